use num_complex::Complex64;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{order_free_sum, scalar, CaseContext, CaseReport, Check, TailRule, TailSequence};
use crate::diophantine::AngleSet;
use crate::error::{Error, Result};
use crate::groups::{verify_invariance, GroupSpec};
use crate::poly::{Field, Monomial, Polynomial};
use crate::rng;
use crate::setspec::{sup_on_set, SetSpec, SupBudget};

const RETURN_TOL: f64 = 0.5;
const DECAY_HEAD: usize = 8;
const SUP_SAMPLES: usize = 4000;
const INVARIANCE_MAX_DIM: usize = 6;

fn two() -> f64 {
    2.0
}

fn default_k_max() -> u32 {
    200
}

/// First `k` in `k_min..=k_max` at which the arguments of `big` return within
/// [`RETURN_TOL`] and `|value(k)| > 1 + tol`.
fn exponent_search(
    big: &[Complex64],
    k_min: u32,
    k_max: u32,
    tol: f64,
    value: impl Fn(u32) -> Result<Complex64>,
) -> Result<Option<(u32, f64, f64)>> {
    let angles =
        AngleSet::from_angles(&big.iter().map(|z| z.arg()).collect::<Vec<_>>()).with_rational_detection(1000, 1e-9);
    for k in k_min..=k_max {
        let defect = angles.defect(u64::from(k));
        if defect >= RETURN_TOL {
            continue;
        }
        let v = value(k)?.norm();
        if v > 1.0 + tol {
            return Ok(Some((k, v, defect)));
        }
    }
    Ok(None)
}

fn field_of(z: &[Complex64]) -> Field {
    if z.iter().all(|x| x.im == 0.0) {
        Field::Real
    } else {
        Field::Complex
    }
}

/// `sum_{j in plus} x_j^k - sum_{j in minus} x_j^k` on `C^dim`.
fn signed_power_sum(dim: usize, plus: &[usize], minus: &[usize], k: u32, field: Field) -> Result<Polynomial> {
    let term = |j: usize, s: f64| {
        let mut e = vec![0; dim];
        e[j] = k;
        (Monomial::new(e), Complex64::new(s, 0.0))
    };
    Polynomial::from_terms(dim, field, plus.iter().map(|&j| term(j, 1.0)).chain(minus.iter().map(|&j| term(j, -1.0))))
}

fn sampled_sup(p: &Polynomial, dim: usize, exponent: f64, field: Field, ctx: &CaseContext) -> Result<f64> {
    let ball = SetSpec::lp_ball(dim, exponent, 1.0, field);
    let budget = SupBudget { samples: ctx.budget.samples.min(SUP_SAMPLES), ..ctx.budget };
    Ok(sup_on_set(p, &ball, budget, ctx.seed)?.value)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerParams {
    #[serde(default)]
    pub z: Option<TailSequence>,
    #[serde(default = "two", with = "crate::setspec::exponent_serde")]
    pub p: f64,
    #[serde(default = "default_k_max")]
    pub k_max: u32,
    /// Runs the non-separable point `z_n = 2^{-n/(m+1)}`, which needs `m < p < m+1`.
    #[serde(default)]
    pub decay_m: Option<u32>,
}

impl Default for PowerParams {
    fn default() -> Self {
        let c = |x: f64| Complex64::new(x, 0.0);
        PowerParams {
            z: Some(TailSequence::new(vec![c(1.5), c(0.1), c(0.1)], TailRule::None)),
            p: 2.0,
            k_max: 200,
            decay_m: None,
        }
    }
}

pub fn run_power_sums(p: &PowerParams, ctx: &CaseContext) -> Result<CaseReport> {
    if !(p.p >= 1.0) || p.p.is_infinite() {
        return Err(Error::InvalidArgument("power sums need a finite p >= 1".into()));
    }
    if p.z.is_none() && p.decay_m.is_none() {
        return Err(Error::InvalidArgument("give z or decay_m".into()));
    }
    let mut rep = CaseReport::new("power_sums", p);
    let k_min = p.p.ceil() as u32;
    rep.constant("k_min", k_min);
    let mut separated = false;

    if let Some(z) = &p.z {
        if z.head.is_empty() {
            return Err(Error::InvalidArgument("z needs a nonempty head".into()));
        }
        let h = z.head.len();
        let field = field_of(&z.head);
        let norm = z.norm(p.p);
        rep.constant("norm_z", norm);
        let big: Vec<Complex64> = z.head.iter().copied().filter(|x| x.norm() > 1.0).collect();
        let tail_sup = z.tail_norm(f64::INFINITY, h);
        rep.constant("big_coordinates", big.len());
        if z.head.iter().all(|x| x.im == 0.0 && x.re >= 0.0) && p.p.fract() == 0.0 {
            let fp = z.power_sum(p.p as u32)?.re;
            rep.check(Check::close(
                "F_p(z) = ||z||_p^p for nonnegative z",
                fp,
                norm.powf(p.p),
                1e-12 * fp.abs().max(1.0),
            ));
            rep.constant("F_p", fp);
        }
        for k in [1u32, 2] {
            rep.constant(&format!("F_{k}"), z.power_sum(k)?.norm());
        }
        match exponent_search(&big, k_min, p.k_max, ctx.margin_tol, |k| z.power_sum(k))? {
            Some((k, value, defect)) => {
                separated = true;
                rep.constant("k", k);
                rep.constant("F_k", value);
                rep.constant("defect", defect);
                rep.check(Check::le("k <= k_max", f64::from(k), f64::from(p.k_max)));
                rep.check(Check::ge("k >= p, so sup over the ball of |F_k| <= 1", f64::from(k), p.p));
                rep.check(Check::lt("head arguments return: max |e^{i k theta} - 1|", defect, RETURN_TOL));
                rep.check(Check::gt("|F_k(z)| > 1", value, 1.0));
                let fk = signed_power_sum(h, &(0..h).collect::<Vec<_>>(), &[], k, field)?;
                let sup = sampled_sup(&fk, h, p.p, field, ctx)?;
                rep.check(Check::le("sampled sup over the ball of |F_k| <= 1", sup, 1.0 + 1e-9));
                if h <= INVARIANCE_MAX_DIM {
                    let g = GroupSpec::SymN { n: h, dim: None }.build()?;
                    let dev = verify_invariance(&g, &fk, 32, ctx.seed)?.max_deviation;
                    rep.check(Check::lt("F_k permutation invariant", dev, 1e-9));
                }
            }
            None => {
                rep.check(Check::holds(
                    "an elementary separator exists when a head coordinate exceeds 1",
                    big.is_empty(),
                ));
                rep.note(format!("no F_k with k <= {} separates", p.k_max));
            }
        }
        if !big.is_empty() {
            rep.check(Check::lt("tail coordinates bounded by 1", tail_sup, 1.0 + 1e-12));
        }
    }

    if let Some(m) = p.decay_m {
        let mf = f64::from(m);
        if !(mf < p.p && p.p < mf + 1.0) {
            return Err(Error::InvalidArgument(format!("decay point needs m < p < m + 1, got m = {m}, p = {}", p.p)));
        }
        let base = (-1.0 / (mf + 1.0)).exp2();
        let head: Vec<Complex64> = (1..=DECAY_HEAD).map(|j| Complex64::new(base.powi(j as i32), 0.0)).collect();
        let z = TailSequence::new(head, TailRule::Geometric { base, scale: 1.0 });
        let norm = z.norm(p.p);
        let closed = 1.0 / ((p.p / (mf + 1.0)).exp2() - 1.0);
        rep.constant("decay_norm_p", norm);
        rep.constant("decay_norm_p_pow_p", norm.powf(p.p));
        rep.check(Check::close("||z||_p^p = 1/(2^{p/(m+1)} - 1)", norm.powf(p.p), closed, 1e-10 * closed.max(1.0)));
        rep.check(Check::gt("decay point lies outside the ball", norm, 1.0));
        rep.note("the closed form 1/(2^{p/(m+1)} - 1) equals ||z||_p^p; ||z||_p is its p-th root");
        for k in m + 1..=m + 6 {
            let fk = z.power_sum(k)?.norm();
            let closed_k = 1.0 / ((f64::from(k) / (mf + 1.0)).exp2() - 1.0);
            rep.check(Check::close(format!("|F_{k}(z)| = 1/(2^{{{k}/(m+1)}} - 1)"), fk, closed_k, 1e-10));
            rep.check(Check::le(format!("|F_{k}(z)| <= 1 up to rounding"), fk, 1.0 + 1e-12));
        }
    }
    rep.verdict(separated);
    Ok(rep.finish())
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinfParams {
    pub z: TailSequence,
}

const EVIDENCE_SCAN: usize = 10_000;
const EVIDENCE_LEN: usize = 5;

pub fn run_linf(p: &LinfParams, _ctx: &CaseContext) -> Result<CaseReport> {
    let limsup = p.z.limsup()?;
    let mut rep = CaseReport::new("linf_limsup", p);
    rep.constant("limsup", if limsup.is_finite() { Some(limsup) } else { None });
    let h = p.z.head.len();
    if limsup > 1.0 {
        let constant = matches!(p.z.tail, TailRule::Geometric { base, .. } if base.abs() == 1.0);
        let delta = if constant || limsup.is_infinite() { (limsup - 1.0).min(1.0) } else { (limsup - 1.0) / 2.0 };
        let evidence: Vec<usize> =
            (h + 1..=h + EVIDENCE_SCAN).filter(|&j| p.z.coord(j).norm() >= 1.0 + delta).take(EVIDENCE_LEN).collect();
        rep.constant("delta", delta);
        rep.constant("evidence", &evidence);
        rep.check(Check::gt("limsup |z_j| > 1", limsup, 1.0));
        rep.check(Check::eq("tail indices with |z_j| >= 1 + delta found", evidence.len() as f64, EVIDENCE_LEN as f64));
        rep.note("certificate of the limsup criterion, not the separating functional itself");
        rep.verdict(true);
    } else {
        rep.check(Check::le("limsup |z_j| <= 1", limsup, 1.0));
        let large: Vec<usize> = (1..=h).filter(|&j| p.z.coord(j).norm() > 1.0).collect();
        if !large.is_empty() {
            let mut head = p.z.head.clone();
            for &j in &large {
                head[j - 1] = Complex64::new(0.0, 0.0);
            }
            let reduced = TailSequence::new(head, p.z.tail.clone());
            let sup = reduced.norm(f64::INFINITY);
            rep.constant("large_head_indices", &large);
            rep.check(Check::le("z minus its finitely many large coordinates lies in the ball", sup, 1.0));
            rep.note(
                "invariant polynomials cannot see finitely supported changes, so P(z) equals P at a point of the ball",
            );
        }
        rep.verdict(false);
    }
    Ok(rep.finish())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperParams {
    #[serde(with = "scalar::vec")]
    pub plus: Vec<Complex64>,
    #[serde(with = "scalar::vec")]
    pub minus: Vec<Complex64>,
    #[serde(default = "two", with = "crate::setspec::exponent_serde")]
    pub p: f64,
    #[serde(default = "default_k_max")]
    pub k_max: u32,
}

impl Default for SuperParams {
    fn default() -> Self {
        let c = |x: f64| Complex64::new(x, 0.0);
        SuperParams { plus: vec![c(1.4), c(0.0), c(0.0)], minus: vec![c(0.0); 3], p: 2.0, k_max: 200 }
    }
}

/// `T_k(z) = sum_A z_i^k - sum_{-A} z_i^k`, summed order-free.
fn t_k(plus: &[Complex64], minus: &[Complex64], k: u32) -> Complex64 {
    order_free_sum(plus.iter().map(|x| x.powu(k))) - order_free_sum(minus.iter().map(|x| x.powu(k)))
}

const RANDOM_RELABELINGS: usize = 20;
const RELABEL_K: u32 = 10;

pub fn run_supersymmetric(p: &SuperParams, ctx: &CaseContext) -> Result<CaseReport> {
    let n = p.plus.len();
    if n == 0 || p.minus.len() != n || !(p.p >= 1.0) || p.p.is_infinite() {
        return Err(Error::InvalidArgument("need equal nonempty index sides and a finite p >= 1".into()));
    }
    let mut rep = CaseReport::new("supersymmetric", p);
    let mirror = (1..=p.k_max).map(|k| t_k(&p.plus, &p.plus, k).norm()).fold(0.0, f64::max);
    rep.check(Check::eq("mirror point z_j = z_{-j}: max_k |T_k| = 0", mirror, 0.0));

    let mut r = rng::stream(ctx.seed, "casebook.supersymmetric");
    let mut worst: f64 = 0.0;
    for _ in 0..RANDOM_RELABELINGS {
        let (mut a, mut b) = (p.plus.clone(), p.minus.clone());
        a.shuffle(&mut r);
        b.shuffle(&mut r);
        for k in 1..=RELABEL_K {
            worst = worst.max((t_k(&a, &b, k) - t_k(&p.plus, &p.minus, k)).norm());
        }
    }
    rep.check(Check::eq("T_k unchanged by random relabelings within A and -A", worst, 0.0));

    let dim = 2 * n;
    let field = field_of(&p.plus).join(field_of(&p.minus));
    let plus_idx: Vec<usize> = (0..n).collect();
    let minus_idx: Vec<usize> = (n..dim).collect();
    if n <= 3 {
        let g = GroupSpec::SignedIndex { n }.build()?;
        let t2 = signed_power_sum(dim, &plus_idx, &minus_idx, 2, field)?;
        let dev = verify_invariance(&g, &t2, 32, ctx.seed)?.max_deviation;
        rep.check(Check::lt("T_2 invariant under the signed-index group", dev, 1e-9));
    }

    let big_plus: Vec<Complex64> = p.plus.iter().copied().filter(|x| x.norm() > 1.0).collect();
    let big_minus: Vec<Complex64> = p.minus.iter().copied().filter(|x| x.norm() > 1.0).collect();
    let hypothesis = (!big_plus.is_empty() && big_minus.is_empty()) || (big_plus.is_empty() && !big_minus.is_empty());
    rep.constant("hypothesis", hypothesis);
    let mut separated = false;
    if hypothesis {
        let big = if big_plus.is_empty() { &big_minus } else { &big_plus };
        let k_min = p.p.ceil() as u32;
        match exponent_search(big, k_min, p.k_max, ctx.margin_tol, |k| Ok(t_k(&p.plus, &p.minus, k)))? {
            Some((k, value, defect)) => {
                separated = true;
                rep.constant("k", k);
                rep.constant("T_k", value);
                rep.constant("defect", defect);
                rep.check(Check::gt("|T_k(z)| > 1", value, 1.0));
                rep.check(Check::ge("k >= p, so sup over the ball of |T_k| <= 1", f64::from(k), p.p));
                let tk = signed_power_sum(dim, &plus_idx, &minus_idx, k, field)?;
                let sup = sampled_sup(&tk, dim, p.p, field, ctx)?;
                rep.check(Check::le("sampled sup over the ball of |T_k| <= 1", sup, 1.0 + 1e-9));
            }
            None => rep.check(Check::holds(format!("a separating T_k with k <= {}", p.k_max), false)),
        }
    } else {
        rep.note("hypothesis not met: need a coordinate of modulus > 1 on exactly one side");
    }
    rep.verdict(separated);
    Ok(rep.finish())
}
