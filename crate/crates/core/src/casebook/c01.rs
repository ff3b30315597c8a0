use num_complex::Complex64;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{order_free_sum, scalar, CaseContext, CaseReport, Check};
use crate::diophantine::AngleSet;
use crate::error::{Error, Result};
use crate::groups::{verify_invariance, FiniteGroup, Group, GroupElement};
use crate::poly::{Field, Monomial, Polynomial};
use crate::rng::{self, Rng};
use crate::setspec::{sup_on_set, SetSpec, SupBudget};
use crate::symmetrize::symmetrize;

const CHAIN_TOL: f64 = 1.0;
const RANDOM_INVARIANTS: usize = 50;
const GRID: usize = 1000;
const SUP_SAMPLES: usize = 2000;

fn default_m_max() -> u64 {
    5000
}

fn random_polynomial(r: &mut Rng, dim: usize, degree: u32, terms: usize) -> Result<Polynomial> {
    let t: Vec<(Monomial, Complex64)> = (0..terms)
        .map(|_| {
            let e: Vec<u32> = (0..dim).map(|_| r.random_range(0..=degree)).collect();
            (Monomial::new(e), Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
        })
        .collect();
    Polynomial::from_terms(dim, Field::Complex, t)
}

fn sampled_sup(p: &Polynomial, ctx: &CaseContext) -> Result<f64> {
    let ball = SetSpec::lp_ball(p.dim(), f64::INFINITY, 1.0, Field::Complex);
    let budget = SupBudget { samples: ctx.budget.samples.min(SUP_SAMPLES), ..ctx.budget };
    Ok(sup_on_set(p, &ball, budget, ctx.seed)?.value)
}

/// `sum_j w_j x_j^{e_j}` on `C^dim`.
fn weighted_powers(exponents: &[u32], weight: f64) -> Result<Polynomial> {
    let dim = exponents.len();
    let terms = exponents.iter().enumerate().map(|(j, &e)| {
        let mut v = vec![0; dim];
        v[j] = e;
        (Monomial::new(v), Complex64::new(weight, 0.0))
    });
    Polynomial::from_terms(dim, Field::Complex, terms)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Peak {
    pub t: f64,
    #[serde(with = "scalar")]
    pub value: Complex64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct C01Params {
    #[serde(with = "scalar")]
    pub g0: Complex64,
    #[serde(with = "scalar")]
    pub g1: Complex64,
    #[serde(default)]
    pub interior_peak: Option<Peak>,
    #[serde(default = "default_m_max")]
    pub m_max: u64,
}

impl Default for C01Params {
    fn default() -> Self {
        C01Params { g0: Complex64::new(1.2, 0.0), g1: Complex64::new(-1.0, 0.0), interior_peak: None, m_max: 5000 }
    }
}

/// `P_m(f) = (f(0)^m + f(1)^m) / 2`.
fn p_m(g0: Complex64, g1: Complex64, m: u32) -> Complex64 {
    order_free_sum([g0.powu(m), g1.powu(m)]) * 0.5
}

fn exponent(m: u64) -> Result<u32> {
    u32::try_from(m).map_err(|_| Error::InvalidArgument("exponent too large".into()))
}

pub fn run_c01(p: &C01Params, ctx: &CaseContext) -> Result<CaseReport> {
    if p.m_max == 0 {
        return Err(Error::InvalidArgument("m_max must be positive".into()));
    }
    let mut rep = CaseReport::new("c01", p);
    let r = p.g0.norm().max(p.g1.norm());
    rep.constant("r", r);
    if r > 1.0 {
        let m_first = (1..=p.m_max).find(|&m| p_m(p.g0, p.g1, m as u32).norm() > 1.0 + ctx.margin_tol);
        rep.constant("m_first", m_first);
        let angles = AngleSet::from_angles(&[p.g0.arg(), p.g1.arg()]).with_rational_detection(1000, 1e-9);
        let chain_m = (1..=p.m_max).find(|&m| angles.defect(m) < CHAIN_TOL && 0.25 * r.powf(m as f64) > 1.0);
        let Some(m) = chain_m else {
            rep.check(Check::holds(format!("a return time m <= {} with r^m / 4 > 1", p.m_max), false));
            rep.verdict(false);
            return Ok(rep.finish());
        };
        let e = exponent(m)?;
        let value = p_m(p.g0, p.g1, e).norm();
        let mid = 0.25 * (p.g0.norm().powf(m as f64) + p.g1.norm().powf(m as f64));
        let low = 0.25 * r.powf(m as f64);
        rep.constant("m", m);
        rep.constant("P_m(g)", value);
        rep.constant("defect", angles.defect(m));
        rep.check(Check::lt("endpoint arguments return: max |e^{i m theta} - 1| < 1", angles.defect(m), CHAIN_TOL));
        rep.check(Check::ge("|P_m(g)| >= (|g(0)|^m + |g(1)|^m) / 4", value, mid * (1.0 - 1e-12)));
        rep.check(Check::ge("(|g(0)|^m + |g(1)|^m) / 4 >= r^m / 4", mid, low));
        rep.check(Check::gt("r^m / 4 > 1", low, 1.0));
        rep.check(Check::le("m <= m_max", m as f64, p.m_max as f64));
        let pm = weighted_powers(&[e, e], 0.5)?;
        rep.check(Check::le("sampled sup of |P_m| over the ball <= 1", sampled_sup(&pm, ctx)?, 1.0 + 1e-9));
        rep.check(Check::eq("P_m symmetric under t -> 1 - t", p_m(p.g1, p.g0, e).norm(), value));
        if p.m_max >= 12 {
            rep.constant("P_12(g)", p_m(p.g0, p.g1, 12).norm());
        }
        rep.verdict(value > 1.0 + ctx.margin_tol);
    } else {
        let mut rng = rng::stream(ctx.seed, "casebook.c01");
        let interp = |t: f64| p.g0 * (1.0 - t) + p.g1 * t;
        let (h0, h1) = (interp(0.0), interp(1.0));
        let swap: Group = FiniteGroup::generate(2, &[GroupElement::perm(vec![1, 0])], 2)?.0.into();
        let mut worst: f64 = 0.0;
        for _ in 0..RANDOM_INVARIANTS {
            let f = symmetrize(&random_polynomial(&mut rng, 2, 4, 6)?, &swap)?;
            worst = worst.max((f.eval(&[p.g0, p.g1])? - f.eval(&[h0, h1])?).norm());
        }
        rep.check(Check::eq("F(g) = F(linear interpolant) for random invariants", worst, 0.0));
        let sup = (0..=GRID).map(|i| interp(i as f64 / GRID as f64).norm()).fold(0.0, f64::max);
        rep.check(Check::eq("sup of the interpolant = max(|g(0)|, |g(1)|)", sup, r));
        rep.check(Check::le("interpolant lies in the unit ball", sup, 1.0));
        let best = (1..=p.m_max.min(64)).map(|m| p_m(p.g0, p.g1, m as u32).norm()).fold(0.0, f64::max);
        rep.check(Check::le("max_m |P_m(g)| <= 1", best, 1.0));
        if let Some(peak) = &p.interior_peak {
            if !(peak.t > 0.0 && peak.t < 1.0) {
                return Err(Error::InvalidArgument("interior peak needs 0 < t < 1".into()));
            }
            rep.check(Check::gt(
                "|g(t0)| > 1: the evaluation at t0 separates but is not invariant",
                peak.value.norm(),
                1.0,
            ));
        }
        rep.verdict(false);
    }
    Ok(rep.finish())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TShapeParams {
    /// Values at `0, 1, -1, i`.
    #[serde(with = "scalar::vec")]
    pub g: Vec<Complex64>,
    #[serde(default = "default_m_max")]
    pub m_max: u64,
}

impl Default for TShapeParams {
    fn default() -> Self {
        let c = |x: f64| Complex64::new(x, 0.0);
        TShapeParams { g: vec![c(1.3), c(0.0), c(0.0), c(0.0)], m_max: 5000 }
    }
}

fn tshape_group() -> Result<Group> {
    let gens = [GroupElement::perm(vec![0, 2, 1, 3]), GroupElement::perm(vec![0, 1, 3, 2])];
    Ok(FiniteGroup::generate(4, &gens, 6)?.0.into())
}

fn record_separator(
    rep: &mut CaseReport,
    poly: &Polynomial,
    g: &[Complex64],
    bound: f64,
    ctx: &CaseContext,
) -> Result<f64> {
    let value = poly.eval(g)?.norm();
    rep.check(Check::ge("value at g >= lower bound", value, bound * (1.0 - 1e-12)));
    rep.check(Check::gt("lower bound > 1", bound, 1.0));
    rep.check(Check::le("sampled sup over the ball <= 1", sampled_sup(poly, ctx)?, 1.0 + 1e-9));
    let dev = verify_invariance(&tshape_group()?, poly, 32, ctx.seed)?.max_deviation;
    rep.check(Check::lt("invariant under maps fixing 0 and permuting {1, -1, i}", dev, 1e-9));
    rep.constant("value_at_g", value);
    rep.constant("bound", bound);
    Ok(value)
}

pub fn run_tshape(p: &TShapeParams, ctx: &CaseContext) -> Result<CaseReport> {
    if p.g.len() != 4 || p.m_max == 0 {
        return Err(Error::InvalidArgument("need four values at 0, 1, -1, i and m_max >= 1".into()));
    }
    let mut rep = CaseReport::new("tshape", p);
    let g = &p.g;
    let arms = g[1].norm().max(g[2].norm()).max(g[3].norm());
    if g[0].norm() > 1.0 {
        rep.constant("branch", "center");
        let r = g[0].norm();
        let s = (g[1] + g[2] + g[3]).norm();
        let Some(m) = (1..=p.m_max).find(|&m| 0.25 * (r.powf(m as f64) - s) > 1.0) else {
            rep.check(Check::holds("an exponent m <= m_max with (r^m - |s|)/4 > 1", false));
            rep.verdict(false);
            return Ok(rep.finish());
        };
        rep.constant("m", m);
        let poly = weighted_powers(&[exponent(m)?, 1, 1, 1], 0.25)?;
        let value = record_separator(&mut rep, &poly, g, 0.25 * (r.powf(m as f64) - s), ctx)?;
        rep.verdict(value > 1.0 + ctx.margin_tol);
    } else if arms > 1.0 {
        rep.constant("branch", "arms");
        let angles = AngleSet::from_angles(&[g[1].arg(), g[2].arg(), g[3].arg()]).with_rational_detection(1000, 1e-9);
        let bound = |m: u64| arms.powf(m as f64) / 8.0 - g[0].norm() / 4.0;
        let Some(m) = (1..=p.m_max).find(|&m| angles.defect(m) < CHAIN_TOL && bound(m) > 1.0) else {
            rep.check(Check::holds("a return time m <= m_max with r^m/8 - |g(0)|/4 > 1", false));
            rep.verdict(false);
            return Ok(rep.finish());
        };
        rep.constant("m", m);
        rep.constant("defect", angles.defect(m));
        rep.check(Check::lt("arm arguments return: max |e^{i m theta} - 1| < 1", angles.defect(m), CHAIN_TOL));
        let e = exponent(m)?;
        let poly = weighted_powers(&[1, e, e, e], 0.25)?;
        let value = record_separator(&mut rep, &poly, g, bound(m), ctx)?;
        rep.verdict(value > 1.0 + ctx.margin_tol);
    } else {
        rep.constant("branch", "obstruction");
        let mut rng = rng::stream(ctx.seed, "casebook.tshape");
        let group = tshape_group()?;
        let reduced = |k: [f64; 3]| g[0] * (1.0 - k[0] - k[1] - k[2]) + g[1] * k[0] + g[2] * k[1] + g[3] * k[2];
        let at_points =
            [reduced([0.0; 3]), reduced([1.0, 0.0, 0.0]), reduced([0.0, 1.0, 0.0]), reduced([0.0, 0.0, 1.0])];
        let mut worst: f64 = 0.0;
        for _ in 0..RANDOM_INVARIANTS {
            let f = symmetrize(&random_polynomial(&mut rng, 4, 3, 6)?, &group)?;
            worst = worst.max((f.eval(g)? - f.eval(&at_points)?).norm());
        }
        rep.check(Check::eq("F(g) = F(reduced function) for random invariants", worst, 0.0));
        let mut sup: f64 = 0.0;
        for _ in 0..GRID {
            let mut k = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
            let total: f64 = k.iter().sum::<f64>() + rng.random::<f64>();
            k.iter_mut().for_each(|x| *x /= total);
            sup = sup.max(reduced(k).norm());
        }
        let max = g.iter().map(|x| x.norm()).fold(0.0, f64::max);
        rep.check(Check::le("reduced function bounded by max |g| on sampled points", sup, max + 1e-12));
        rep.check(Check::le("max |g| over the four points <= 1", max, 1.0));
        rep.verdict(false);
    }
    Ok(rep.finish())
}
