use num_complex::Complex64;
use serde::Serialize;

use super::search::{find_complex_exponent, find_even_exponent, SearchOptions, SeparationReport, Separator, Verdict};
use super::sup::{sup_on_set, SupBudget};
use super::{Evaluate, SetSpec};
use crate::error::{Error, Result};
use crate::groups::{verify_invariance, Group, GroupSpec};
use crate::poly::{Field, Polynomial};

const INVARIANCE_SAMPLES: usize = 64;
const MODULUS_SAMPLES: usize = 2000;

/// Truncation levels to try, the declared tail bound `||z - pi_N z|| <= tail_bound`
/// beyond the given head, and whether the basis is 1-unconditional.
#[derive(Clone, Debug, Serialize)]
pub struct TruncationParams {
    pub schedule: Vec<usize>,
    pub tail_bound: f64,
    pub unconditional: bool,
}

/// What happened at one scheduled level.
#[derive(Clone, Debug, Serialize)]
pub struct LevelCheck {
    pub j: usize,
    pub is_group: bool,
    pub value: f64,
    pub sup: f64,
    pub tail_modulus: f64,
    pub slack: f64,
    pub qualifies: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TruncationReport {
    pub j: usize,
    pub levels: Vec<LevelCheck>,
    pub m: Option<u64>,
    pub exponent: Option<u64>,
    pub search: SeparationReport,
    /// `P~ o Pi_j` on the full space when the separator is symbolic.
    pub separator: Option<Polynomial>,
    pub invariance_deviation: Option<f64>,
    pub assumptions: Vec<String>,
}

/// `u -> Q(c + u) - Q(c)`, whose sup over a radius-`tau` ball is the modulus of continuity at `c`.
struct Shifted<'a> {
    q: &'a Polynomial,
    center: Vec<Complex64>,
    base: Complex64,
}

impl Evaluate for Shifted<'_> {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value(&self, u: &[Complex64]) -> Complex64 {
        let w: Vec<Complex64> = self.center.iter().zip(u).map(|(a, b)| a + b).collect();
        self.q.value(&w) - self.base
    }

    fn homogeneous_degree(&self) -> Option<u32> {
        None
    }
}

fn tail_modulus(q: &Polynomial, center: &[Complex64], tau: f64, field: Field, seed: u64) -> Result<f64> {
    if tau <= 0.0 {
        return Ok(0.0);
    }
    let shifted = Shifted { q, center: center.to_vec(), base: q.value(center) };
    let ball = SetSpec::lp_ball(center.len(), 2.0, tau, field);
    Ok(sup_on_set(&shifted, &ball, SupBudget::samples(MODULUS_SAMPLES), seed)?.value)
}

fn truncation_assumption(set: &SetSpec, j: usize, unconditional: bool) -> Result<Option<String>> {
    Ok(match set {
        SetSpec::LpBall { .. } if unconditional => None,
        SetSpec::LpBall { .. } => Some(format!("pi_{j}(K) in K assumed: the basis was not declared 1-unconditional")),
        SetSpec::PointCloud { points } => {
            let inside = points.iter().all(|p| {
                let mut t = p.clone();
                t[j..].iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
                set.contains(&t, 1e-9).unwrap_or(false)
            });
            (!inside).then(|| format!("pi_{j}(K) in K fails for the cloud; separation holds against pi_{j}(K) only"))
        }
        SetSpec::Named { .. } => unreachable!("resolve removes named sets"),
    })
}

/// Runs a finite-dimensional search at the first scheduled level `j` where the
/// projected group is a group and `Q o iota_j` still separates `pi_j(z)` from
/// `pi_j(K)` with room for the tail, then lifts the result to `P = P~ o Pi_j`
/// and re-checks invariance under the full group.
pub fn truncation_pipeline(
    group: &GroupSpec,
    set: &SetSpec,
    z_head: &[Complex64],
    q: &Polynomial,
    params: &TruncationParams,
    opts: &SearchOptions,
) -> Result<TruncationReport> {
    let full = group.build()?;
    let Some(finite) = full.as_finite() else {
        return Err(Error::Unsupported("truncation needs a finite group at the ambient dimension".into()));
    };
    let dim = finite.dim();
    let set = set.resolve()?;
    if set.dim()? != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: set.dim()? });
    }
    if z_head.len() > dim {
        return Err(Error::DimensionMismatch { expected: dim, found: z_head.len() });
    }
    if !(params.tail_bound >= 0.0) {
        return Err(Error::InvalidArgument("tail bound must be nonnegative".into()));
    }
    let q_full = q.lift_to(dim)?;
    let mut z = z_head.to_vec();
    z.resize(dim, Complex64::new(0.0, 0.0));
    let field = if q.field() == Field::Real && z.iter().all(|x| x.im == 0.0) { Field::Real } else { Field::Complex };

    let mut levels = Vec::new();
    let mut projection_failures = 0;
    for &j in &params.schedule {
        let proj = finite.project(j)?;
        if !proj.is_group {
            projection_failures += 1;
            levels.push(LevelCheck {
                j,
                is_group: false,
                value: 0.0,
                sup: 0.0,
                tail_modulus: 0.0,
                slack: 0.0,
                qualifies: false,
            });
            continue;
        }
        let sub = proj.into_group().expect("checked");
        let q_j = q_full.restrict_to_prefix(j)?;
        let z_j = z[..j].to_vec();
        let set_j = set.truncate(j)?;
        let value = q_j.value(&z_j).norm();
        let sup = sup_on_set(&q_j, &set_j, opts.budget, opts.seed)?.value;
        let tail_modulus = tail_modulus(
            &q_full,
            &z.iter().enumerate().map(|(i, x)| if i < j { *x } else { Complex64::new(0.0, 0.0) }).collect::<Vec<_>>(),
            params.tail_bound,
            field,
            opts.seed,
        )?;
        let slack = value - sup - tail_modulus;
        let qualifies = slack > opts.margin_tol;
        levels.push(LevelCheck { j, is_group: true, value, sup, tail_modulus, slack, qualifies });
        if !qualifies {
            continue;
        }

        let mut assumptions: Vec<String> = truncation_assumption(&set, j, params.unconditional)?.into_iter().collect();
        if params.tail_bound > 0.0 {
            assumptions.push(format!("tail of z beyond the head bounded by {} in l2", params.tail_bound));
        }
        let group_j: Group = sub.clone().into();
        let (m, exponent, search, separator) = if field == Field::Real {
            let s = find_even_exponent(&q_j, &group_j, &set_j, &z_j, opts)?;
            let m = s.m.map(u64::from);
            (m, m.map(|m| 2 * m), s.report, s.separator)
        } else {
            let s = find_complex_exponent(&q_j, &sub, &set_j, &z_j, None, opts)?;
            (s.m, s.m, s.report, s.separator)
        };
        let lifted = match separator {
            Some(Separator::Symbolic(p)) => Some(p.lift_to(dim)?),
            _ => None,
        };
        let invariance_deviation = match &lifted {
            Some(p) => Some(verify_invariance(&full, p, INVARIANCE_SAMPLES, opts.seed)?.max_deviation),
            None => None,
        };
        if search.verdict != Verdict::Separated {
            assumptions.push("no separating exponent found at this level".into());
        }
        return Ok(TruncationReport {
            j,
            levels,
            m,
            exponent,
            search,
            separator: lifted,
            invariance_deviation,
            assumptions,
        });
    }
    if projection_failures == params.schedule.len() && !params.schedule.is_empty() {
        return Err(Error::NotAGroup(format!(
            "projection is not a group at any scheduled level {:?}",
            params.schedule
        )));
    }
    Err(Error::Truncation(format!("no scheduled level captures the margin: {:?}", params.schedule)))
}
