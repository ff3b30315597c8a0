use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{scalar, CaseContext, CaseReport, Check, TailSequence};
use crate::error::{Error, Result};
use crate::groups::{verify_invariance, FiniteGroup, GroupElement, GroupSpec};
use crate::poly::{Field, Polynomial};
use crate::setspec::{
    check_arg_condition, find_linear_separator, lp_norm, truncation_pipeline, SearchOptions, SetSpec, TruncationParams,
    TruncationReport,
};

const INVARIANCE_SAMPLES: usize = 64;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootsParams {
    pub n: usize,
    pub z: TailSequence,
    #[serde(default = "two", with = "crate::setspec::exponent_serde")]
    pub p: f64,
}

fn two() -> f64 {
    2.0
}

impl Default for RootsParams {
    fn default() -> Self {
        RootsParams { n: 3, z: TailSequence::new(vec![Complex64::new(1.2, 0.0)], Default::default()), p: 2.0 }
    }
}

fn search_options(ctx: &CaseContext) -> SearchOptions {
    SearchOptions {
        budget: ctx.budget,
        seed: ctx.seed,
        margin_tol: ctx.margin_tol,
        m_max: ctx.m_max_or(64),
        ..SearchOptions::default()
    }
}

/// Coordinate functional on the largest head coordinate when it exceeds 1,
/// otherwise the Hölder-dual functional of the ball.
fn initial_functional(head: &[Complex64], ball: &SetSpec, field: Field, rep: &mut CaseReport) -> Result<Polynomial> {
    let n = head.len();
    let j = (0..n).max_by(|&a, &b| head[a].norm().total_cmp(&head[b].norm())).expect("n >= 1");
    if head[j].norm() > 1.0 {
        rep.constant("functional", format!("e_{}^*", j + 1));
        return Ok(Polynomial::var(n, j, field));
    }
    match find_linear_separator(ball, head) {
        Ok(sep) => {
            rep.constant("functional", "dual");
            Ok(Polynomial::linear(&sep.coeffs, field))
        }
        Err(Error::InsideHull { .. }) => {
            rep.constant("functional", format!("e_{}^*", j + 1));
            Ok(Polynomial::var(n, j, field))
        }
        Err(e) => Err(e),
    }
}

/// Records the pipeline outcome; `inside` says whether `z` lies in the ball.
fn record_pipeline(
    rep: &mut CaseReport,
    outcome: Result<TruncationReport>,
    inside: bool,
    ctx: &CaseContext,
) -> Result<Option<TruncationReport>> {
    match outcome {
        Ok(t) => {
            rep.constant("j", t.j);
            rep.constant("m", t.m);
            rep.constant("exponent", t.exponent);
            rep.constant("margin", t.search.margin);
            rep.constant("sup", t.search.sup);
            rep.constant("value_at_z", t.search.value_at_z);
            for a in &t.assumptions {
                rep.note(a.clone());
            }
            let separated = t.search.margin > ctx.margin_tol;
            rep.verdict(separated);
            if inside {
                rep.check(Check::le("z in the ball: no separating margin", t.search.margin, ctx.margin_tol));
            } else {
                rep.check(Check::gt("separator margin exceeds margin_tol", t.search.margin, ctx.margin_tol));
                let dev = t.invariance_deviation.unwrap_or(f64::INFINITY);
                rep.check(Check::lt("lifted separator invariant under the full group", dev, 1e-9));
            }
            Ok(Some(t))
        }
        Err(Error::Truncation(msg)) => {
            rep.verdict(false);
            rep.note(msg);
            rep.check(Check::holds("no scheduled level separates exactly when z lies in the ball", inside));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// For a coordinate functional `e_N^*`, the orbit values `Q(g z)` of modulus
/// at least `eta` are the `N` points `e^{2 pi i k / N} z_N`.
fn record_orbit_values(rep: &mut CaseReport, q: &Polynomial, head: &[Complex64], n: usize) -> Result<()> {
    let mut terms = q.terms();
    let coord = match (terms.next(), terms.next()) {
        (Some((mono, _)), None) if mono.degree() == 1 => mono.exponents().iter().position(|&e| e == 1),
        _ => None,
    };
    let Some(j) = coord.filter(|&j| head[j].norm() > 0.0) else {
        return Ok(());
    };
    let big_n = j + 1;
    let group = GroupSpec::RTrunc { n }.build()?;
    let group = group.as_finite().expect("r_trunc is finite");
    let eta = 0.5 * head[j].norm();
    let orbit = check_arg_condition(q, group, head, eta, 1e-9)?;
    rep.constant("orbit_value_count", orbit.count);
    rep.check(Check::eq(
        format!("modulus-eta orbit values at coordinate {big_n}: N distinct"),
        orbit.count as f64,
        big_n as f64,
    ));
    rep.note(format!(
        "orbit enumeration at coordinate N = {big_n} gives N distinct values e^(2 pi i k/N) z_N, not 2N = {}",
        2 * big_n
    ));
    Ok(())
}

pub fn run_roots(p: &RootsParams, ctx: &CaseContext) -> Result<CaseReport> {
    if p.n == 0 || p.z.head.len() > p.n {
        return Err(Error::InvalidArgument("need 1 <= head length <= n".into()));
    }
    let mut rep = CaseReport::new("roots_unity", p);
    let head = p.z.prefix(p.n);
    let ball = SetSpec::lp_ball(p.n, p.p, 1.0, Field::Complex);
    let norm = p.z.norm(p.p);
    rep.constant("norm_z", norm);
    let inside = norm <= 1.0;
    let q = initial_functional(&head, &ball, Field::Complex, &mut rep)?;
    record_orbit_values(&mut rep, &q, &head, p.n)?;
    let params =
        TruncationParams { schedule: (1..=p.n).collect(), tail_bound: p.z.tail_norm(p.p, p.n), unconditional: true };
    let outcome = truncation_pipeline(&GroupSpec::RTrunc { n: p.n }, &ball, &head, &q, &params, &search_options(ctx));
    if let Some(t) = record_pipeline(&mut rep, outcome, inside, ctx)? {
        if !inside {
            match &t.separator {
                Some(sep) => {
                    let divisible = sep
                        .terms()
                        .all(|(m, _)| m.exponents().iter().enumerate().all(|(i, &e)| e % (i as u32 + 1) == 0));
                    rep.check(Check::holds("every monomial exponent e_j is divisible by j", divisible));
                    rep.constant("separator_terms", sep.len());
                }
                None => rep.check(Check::holds("separator available symbolically", false)),
            }
        }
    }
    Ok(rep.finish())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockParams {
    pub blocks: Vec<usize>,
    #[serde(with = "scalar::vec")]
    pub z: Vec<Complex64>,
    #[serde(default = "two", with = "crate::setspec::exponent_serde")]
    pub p: f64,
}

impl Default for BlockParams {
    fn default() -> Self {
        BlockParams {
            blocks: vec![1, 2],
            z: vec![Complex64::new(1.3, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
            p: 2.0,
        }
    }
}

pub fn run_blocks(p: &BlockParams, ctx: &CaseContext) -> Result<CaseReport> {
    let dim: usize = p.blocks.iter().sum();
    if p.blocks.is_empty() || p.blocks.contains(&0) || p.z.len() != dim || p.z.iter().any(|x| x.im != 0.0) {
        return Err(Error::InvalidArgument("need nonempty blocks and a real z of matching length".into()));
    }
    let mut rep = CaseReport::new("block_perm", p);
    let ball = SetSpec::lp_ball(dim, p.p, 1.0, Field::Real);
    let norm = lp_norm(&p.z, p.p);
    rep.constant("norm_z", norm);
    let inside = norm <= 1.0;
    let q = initial_functional(&p.z, &ball, Field::Real, &mut rep)?;
    let schedule: Vec<usize> = p
        .blocks
        .iter()
        .scan(0, |acc, b| {
            *acc += b;
            Some(*acc)
        })
        .collect();
    let params = TruncationParams { schedule, tail_bound: 0.0, unconditional: true };
    let spec = GroupSpec::BlockPerm { blocks: p.blocks.clone() };
    let outcome = truncation_pipeline(&spec, &ball, &p.z, &q, &params, &search_options(ctx));
    if let Some(t) = record_pipeline(&mut rep, outcome, inside, ctx)? {
        if let (Some(sep), false) = (&t.separator, inside) {
            let mut start = 0;
            let mut worst: f64 = 0.0;
            for &b in &p.blocks {
                for i in start..start + b - 1 {
                    let g = FiniteGroup::generate(dim, &[GroupElement::swap(dim, i, i + 1)], 2)?.0;
                    worst = worst.max(verify_invariance(&g.into(), sep, INVARIANCE_SAMPLES, ctx.seed)?.max_deviation);
                }
                start += b;
            }
            rep.check(Check::lt("invariant under every within-block transposition", worst, 1e-9));
        }
    }
    Ok(rep.finish())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HahnBanachParams {
    #[serde(with = "scalar::nested")]
    pub points: Vec<Vec<Complex64>>,
    #[serde(with = "scalar::vec")]
    pub z: Vec<Complex64>,
}

impl Default for HahnBanachParams {
    fn default() -> Self {
        let c = |x: f64| Complex64::new(x, 0.0);
        HahnBanachParams {
            points: vec![vec![c(1.0), c(0.0)], vec![c(-1.0), c(0.0)], vec![c(0.0), c(1.0)], vec![c(0.0), c(-1.0)]],
            z: vec![c(1.5), c(0.0)],
        }
    }
}

/// Degree-one separation from the balanced convex hull of a point cloud.
pub fn run_hahn_banach(p: &HahnBanachParams, _ctx: &CaseContext) -> Result<CaseReport> {
    let mut rep = CaseReport::new("hahn_banach", p);
    let cloud = SetSpec::PointCloud { points: p.points.clone() };
    match find_linear_separator(&cloud, &p.z) {
        Ok(sep) => {
            let f = sep.polynomial();
            let sup = p.points.iter().map(|k| f.eval(k).map(|v| v.norm())).collect::<Result<Vec<_>>>()?;
            let sup = sup.into_iter().fold(0.0, f64::max);
            let value = f.eval(&p.z)?.norm();
            rep.constant("coeffs", &sep.coeffs);
            rep.constant("distance", sep.distance);
            rep.constant("margin", value - sup);
            rep.check(Check::lt("max over the cloud of |f| < |f(z)| - 1e-9", sup, value - 1e-9));
            rep.verdict(true);
        }
        Err(Error::InsideHull { distance }) => {
            rep.constant("distance", distance);
            rep.note("z lies in the closed balanced convex hull: no degree-one separator");
            rep.check(Check::le("distance from z to the balanced hull", distance, 1e-9 * (1.0 + lp_norm(&p.z, 2.0))));
            rep.verdict(false);
        }
        Err(e) => return Err(e),
    }
    Ok(rep.finish())
}
