use num_complex::Complex64;
use serde::Serialize;

use super::sup::{sup_on_set, sup_on_set_with, SupBudget, SupEstimate};
use super::{Evaluate, SetSpec};
use crate::diophantine::{angle_cluster, detect_rational, AngleSet, ReturnTime};
use crate::error::{Error, Result};
use crate::groups::{FiniteGroup, Group};
use crate::poly::{Field, Polynomial, DEFAULT_DEGREE_CAP};
use crate::symmetrize::{m_symmetrization, NumericSymmetrization};

pub const DEFAULT_MARGIN_TOL: f64 = 1e-6;
const RATIONAL_MAX_DEN: u64 = 1000;
const RATIONAL_TOL: f64 = 1e-9;

/// Shared knobs of the exponent searches.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SearchOptions {
    pub budget: SupBudget,
    pub seed: u64,
    pub margin_tol: f64,
    pub m_max: u64,
    pub angle_tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            budget: SupBudget::default(),
            seed: 42,
            margin_tol: DEFAULT_MARGIN_TOL,
            m_max: 64,
            angle_tol: 1e-9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Separated,
    NotSeparated,
    Inconclusive,
}

/// One evaluated candidate exponent.
#[derive(Clone, Debug, Serialize)]
pub struct SearchStep {
    pub m: u64,
    pub sup: f64,
    pub value: f64,
    pub margin: f64,
}

/// Outcome of testing a candidate separator against `K` and `z`.
#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    pub sup: f64,
    pub witness: Vec<Complex64>,
    pub value_at_z: f64,
    pub margin: f64,
    pub m: Option<u64>,
    pub verdict: Verdict,
    pub seed: u64,
    pub budget: usize,
    pub margin_tol: f64,
    pub steps: Vec<SearchStep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl SeparationReport {
    fn from_parts(sup: SupEstimate, value_at_z: f64, m: Option<u64>, opts: &SearchOptions) -> SeparationReport {
        let margin = value_at_z - sup.value;
        let verdict = if margin > opts.margin_tol { Verdict::Separated } else { Verdict::NotSeparated };
        SeparationReport {
            sup: sup.value,
            witness: sup.witness,
            value_at_z,
            margin,
            m,
            verdict,
            seed: opts.seed,
            budget: opts.budget.samples,
            margin_tol: opts.margin_tol,
            steps: vec![SearchStep { m: m.unwrap_or(1), sup: sup.value, value: value_at_z, margin }],
            note: None,
        }
    }

    pub fn separated(&self) -> bool {
        self.verdict == Verdict::Separated
    }
}

fn check_point<F: Evaluate + ?Sized>(f: &F, z: &[Complex64]) -> Result<()> {
    if z.len() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: z.len() });
    }
    Ok(())
}

/// Compares `sup_K |f|` (sampled, seeded by `label`) with `|f(z)|`.
pub fn separation_report<F: Evaluate + ?Sized>(
    f: &F,
    set: &SetSpec,
    z: &[Complex64],
    m: Option<u64>,
    opts: &SearchOptions,
) -> Result<SeparationReport> {
    check_point(f, z)?;
    let sup = sup_on_set_with(f, set, opts.budget, opts.seed, &[z.to_vec()])?;
    Ok(SeparationReport::from_parts(sup, f.value(z).norm(), m, opts))
}

/// A symmetrized polynomial, symbolic when it fits under the degree cap.
#[derive(Clone, Debug)]
pub enum Separator {
    Symbolic(Polynomial),
    Numeric(NumericSymmetrization),
}

impl Separator {
    /// `P_m` for `(q, group, m)`, falling back to numeric evaluation above the cap.
    pub fn build(q: &Polynomial, group: &Group, m: u32) -> Result<Separator> {
        match m_symmetrization(q, group, m, DEFAULT_DEGREE_CAP) {
            Ok(p) => Ok(Separator::Symbolic(p)),
            Err(Error::DegreeCapExceeded { .. }) => Ok(Separator::Numeric(NumericSymmetrization::new(q, group, m)?)),
            Err(e) => Err(e),
        }
    }

    pub fn polynomial(&self) -> Option<&Polynomial> {
        match self {
            Separator::Symbolic(p) => Some(p),
            Separator::Numeric(_) => None,
        }
    }
}

impl Evaluate for Separator {
    fn dim(&self) -> usize {
        match self {
            Separator::Symbolic(p) => Evaluate::dim(p),
            Separator::Numeric(n) => Evaluate::dim(n),
        }
    }

    fn value(&self, w: &[Complex64]) -> Complex64 {
        match self {
            Separator::Symbolic(p) => p.value(w),
            Separator::Numeric(n) => n.value(w),
        }
    }

    fn homogeneous_degree(&self) -> Option<u32> {
        match self {
            Separator::Symbolic(p) => p.homogeneous_degree(),
            Separator::Numeric(n) => n.homogeneous_degree(),
        }
    }
}

/// Scaling constant `t = sqrt(sup * value)` and the resulting bound `r = sup / t`.
pub fn normalization_constant(sup: f64, value: f64, margin_tol: f64) -> Result<(f64, f64)> {
    if !(value - sup > margin_tol) {
        return Err(Error::NotSeparating { sup, value });
    }
    if sup <= 0.0 {
        return Ok((value / 2.0, 0.0));
    }
    let t = (sup * value).sqrt();
    Ok((t, sup / t))
}

/// `Q / t` with `sup_K |Q/t| <= r < 1 < |Q(z)/t|`.
#[derive(Clone, Debug, Serialize)]
pub struct Normalization {
    pub scaled: Polynomial,
    pub t: f64,
    pub r: f64,
    pub sup: f64,
    pub value: f64,
    pub scaled_value: f64,
}

pub fn normalize_separator(
    q: &Polynomial,
    set: &SetSpec,
    z: &[Complex64],
    opts: &SearchOptions,
) -> Result<Normalization> {
    check_point(q, z)?;
    let sup = sup_on_set(q, set, opts.budget, opts.seed)?.value;
    let value = q.eval(z)?.norm();
    let (t, r) = normalization_constant(sup, value, opts.margin_tol)?;
    Ok(Normalization { scaled: q.scale(Complex64::new(1.0 / t, 0.0)), t, r, sup, value, scaled_value: value / t })
}

/// Result of the real even-exponent search.
#[derive(Clone, Debug)]
pub struct EvenSearch {
    /// Index `m` of the separating `P_{2m}`.
    pub m: Option<u32>,
    pub separator: Option<Separator>,
    pub normalization: Normalization,
    pub report: SeparationReport,
}

/// Tries `P_{2m} = S_G((Q/t)^{2m})` for `m = 1, 2, ...` and stops at the first
/// one whose sampled sup over `K` is below its value at `z`.
pub fn find_even_exponent(
    q: &Polynomial,
    group: &Group,
    set: &SetSpec,
    z: &[Complex64],
    opts: &SearchOptions,
) -> Result<EvenSearch> {
    if q.field() != Field::Real {
        return Err(Error::InvalidArgument("even-exponent search needs a real polynomial".into()));
    }
    let normalization = normalize_separator(q, set, z, opts)?;
    let mut steps = Vec::new();
    let mut last = None;
    for m in 1..=opts.m_max {
        let exponent = u32::try_from(2 * m).map_err(|_| Error::InvalidArgument("exponent too large".into()))?;
        let sep = Separator::build(&normalization.scaled, group, exponent)?;
        let report = separation_report(&sep, set, z, Some(m), opts)?;
        steps.push(report.steps[0].clone());
        if report.separated() {
            return Ok(EvenSearch {
                m: Some(m as u32),
                separator: Some(sep),
                normalization,
                report: SeparationReport { steps, ..report },
            });
        }
        last = Some(report);
    }
    let mut report = last.ok_or(Error::InvalidArgument("m_max must be >= 1".into()))?;
    report.verdict = Verdict::Inconclusive;
    report.m = None;
    report.steps = steps;
    report.note = Some(format!("no P_2m separated for m <= {}; this is not a disproof", opts.m_max));
    Ok(EvenSearch { m: None, separator: None, normalization, report })
}

/// Distinct arguments of the orbit values `Q(g z)` of modulus at least `eta`.
#[derive(Clone, Debug, Serialize)]
pub struct ArgCondition {
    pub angles: AngleSet,
    pub values: Vec<Complex64>,
    pub finite: bool,
    pub count: usize,
}

pub fn check_arg_condition(
    q: &Polynomial,
    group: &FiniteGroup,
    z: &[Complex64],
    eta: f64,
    angle_tol: f64,
) -> Result<ArgCondition> {
    if z.len() != group.dim() || q.dim() != group.dim() {
        return Err(Error::DimensionMismatch { expected: group.dim(), found: z.len() });
    }
    let values: Vec<Complex64> = group.elements().iter().map(|g| q.eval_unchecked(&g.apply_unchecked(z))).collect();
    let mut angles = angle_cluster(&values, eta, angle_tol);
    angles.rational =
        angles.angles.iter().map(|&a| detect_rational(a, RATIONAL_MAX_DEN, RATIONAL_TOL)).collect::<Option<Vec<_>>>();
    let count = angles.len();
    Ok(ArgCondition { angles, values, finite: true, count })
}

/// The lower-bound chain `|P_m(z)| >= (1 - r) avg |Q(g z)|^m - 2 eta^m`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ChainCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Result of the complex exponent search.
#[derive(Clone, Debug)]
pub struct ComplexSearch {
    pub m: Option<u64>,
    pub return_time: Option<ReturnTime>,
    pub eta: f64,
    pub arg_condition: ArgCondition,
    pub chain: Option<ChainCheck>,
    pub separator: Option<Separator>,
    pub normalization: Normalization,
    pub report: SeparationReport,
}

/// Complex search: normalizes `Q`, clusters the orbit arguments at `z`, and
/// walks the return times `m` of those angles (tolerance `r`) until `P_m`
/// separates, checking the lower-bound chain at every candidate.
pub fn find_complex_exponent(
    q: &Polynomial,
    group: &FiniteGroup,
    set: &SetSpec,
    z: &[Complex64],
    eta: Option<f64>,
    opts: &SearchOptions,
) -> Result<ComplexSearch> {
    let normalization = normalize_separator(q, set, z, opts)?;
    let r = normalization.r;
    let eta = eta.unwrap_or(if r > 0.0 { 0.5 * r } else { 0.5 });
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidArgument(format!("eta must lie in (0, 1), got {eta}")));
    }
    let tol = if r > 0.0 { r } else { 1.0 };
    let arg_condition = check_arg_condition(&normalization.scaled, group, z, eta, opts.angle_tol)?;
    let base = NumericSymmetrization::new(&normalization.scaled, &group.clone().into(), 1)?;
    let orbit = base.orbit_values(z)?;
    let mut steps = Vec::new();
    let mut last: Option<(SeparationReport, ChainCheck, ReturnTime)> = None;
    let mut m = 0u64;
    while m < opts.m_max {
        let Some(rt) = (m + 1..=opts.m_max).find_map(|k| {
            let d = arg_condition.angles.defect(k);
            (d < tol).then_some(ReturnTime { m: k, max_defect: d })
        }) else {
            break;
        };
        m = rt.m;
        let exponent = u32::try_from(m).map_err(|_| Error::InvalidArgument("exponent too large".into()))?;
        let sep = base.with_exponent(exponent)?;
        let report = separation_report(&sep, set, z, Some(m), opts)?;
        let avg = orbit.iter().map(|v| v.norm().powf(m as f64)).sum::<f64>() / orbit.len() as f64;
        let rhs = (1.0 - r) * avg - 2.0 * eta.powf(m as f64);
        let chain = ChainCheck { lhs: report.value_at_z, rhs, holds: report.value_at_z >= rhs - 1e-8 };
        steps.push(report.steps[0].clone());
        if report.separated() {
            let separator = match Separator::build(&normalization.scaled, &group.clone().into(), exponent)? {
                Separator::Symbolic(p) => Separator::Symbolic(p),
                Separator::Numeric(_) => Separator::Numeric(sep),
            };
            return Ok(ComplexSearch {
                m: Some(m),
                return_time: Some(rt),
                eta,
                arg_condition,
                chain: Some(chain),
                separator: Some(separator),
                normalization,
                report: SeparationReport { steps, ..report },
            });
        }
        last = Some((report, chain, rt));
    }
    let (mut report, chain, rt) = match last {
        Some((rep, chain, rt)) => (rep, Some(chain), Some(rt)),
        None => {
            let sup = sup_on_set(&normalization.scaled, set, opts.budget, opts.seed)?;
            (SeparationReport::from_parts(sup, normalization.scaled_value, None, opts), None, None)
        }
    };
    report.verdict = Verdict::Inconclusive;
    report.m = None;
    report.steps = steps;
    report.note = Some(format!("no return time m <= {} gave a separating P_m", opts.m_max));
    Ok(ComplexSearch { m: None, return_time: rt, eta, arg_condition, chain, separator: None, normalization, report })
}
