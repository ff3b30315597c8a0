use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CaseContext, CaseReport, Check};
use crate::error::{Error, Result};
use crate::groups::{Group, GroupSpec};
use crate::poly::{Field, Polynomial};
use crate::setspec::{sup_on_set, sup_on_set_with, Evaluate, Separator, SetSpec};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(rename = "N")]
    pub big_n: u32,
    pub k: usize,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
}

impl Default for Params {
    fn default() -> Self {
        Params { big_n: 2, k: 1, eps: None, alpha: None }
    }
}

/// Upper bound on `eps`: `n^{1/(2(N-1)) - 1/(2N)} - 1`.
pub fn eps_bound(big_n: u32, n: usize) -> f64 {
    let nn = f64::from(big_n);
    (n as f64).powf(1.0 / (2.0 * (nn - 1.0)) - 1.0 / (2.0 * nn)) - 1.0
}

/// Upper bound on `alpha`: the Hölder term and, for every `l < N`, the term keeping `P_l(z)` below `n^{-l/N}`.
pub fn alpha_bound(big_n: u32, n: usize, eps: f64) -> f64 {
    let nn = f64::from(big_n);
    let nf = n as f64;
    let holder = (eps / 2.0) * (1.0 / (nf - 1.0)).powf((2.0 * nn - 1.0) / (2.0 * nn));
    (1..big_n)
        .map(|l| {
            let l2 = 2.0 * f64::from(l);
            let inner = (1.0 / ((1.0 + eps) * nf.powf(1.0 / (2.0 * nn)))).powf(l2) - 1.0 / nf;
            (nf / (nf - 1.0) * inner).powf(1.0 / l2)
        })
        .fold(holder, f64::min)
}

/// `mean_i ((1 + alpha) x_i - alpha sum x)^e`, the permutation average of `L^e`.
fn averaged_power(x: &[f64], alpha: f64, e: u32) -> f64 {
    let s: f64 = x.iter().sum();
    x.iter().map(|&xi| ((1.0 + alpha) * xi - alpha * s).powi(e as i32)).sum::<f64>() / x.len() as f64
}

pub fn run(p: &Params, ctx: &CaseContext) -> Result<CaseReport> {
    if p.big_n < 2 || p.k < 1 {
        return Err(Error::InvalidArgument("need N >= 2 and k >= 1".into()));
    }
    let n = 2 * p.k + 1;
    let big_n = p.big_n;
    let eb = eps_bound(big_n, n);
    let eps = p.eps.unwrap_or(eb / 2.0);
    if !(eps > 0.0 && eps < eb) {
        return Err(Error::InvalidArgument(format!("eps = {eps} violates 0 < eps < {eb}")));
    }
    let ab = alpha_bound(big_n, n, eps);
    let alpha = p.alpha.unwrap_or(ab / 2.0);
    if !(alpha > 0.0 && alpha < ab) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} violates 0 < alpha < {ab}")));
    }
    let mut rep = CaseReport::new("counterexample", p);
    rep.constant("n", n);
    rep.constant("eps_bound", eb);
    rep.constant("eps", eps);
    rep.constant("alpha_bound", ab);
    rep.constant("alpha", alpha);

    let nf = n as f64;
    let nn = f64::from(big_n);
    let ball = SetSpec::lp_ball(n, 2.0 * nn, 1.0, Field::Real);
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    z[0] = Complex64::new(1.0 + eps, 0.0);
    let zr: Vec<f64> = z.iter().map(|x| x.re).collect();
    let mut coeffs = vec![Complex64::new(-alpha, 0.0); n];
    coeffs[0] = Complex64::new(1.0, 0.0);
    let lin = Polynomial::linear(&coeffs, Field::Real);
    let q = lin.pow(2, 64)?;

    let holder = (1.0 + alpha * (nf - 1.0).powf((2.0 * nn - 1.0) / (2.0 * nn))).powi(2);
    let target = (1.0 + eps / 2.0).powi(2);
    rep.check(Check::lt("Hölder bound on sup_K |Q| below (1+eps/2)^2", holder, target));
    let q_sup = sup_on_set(&q, &ball, ctx.budget, ctx.seed)?;
    rep.check(Check::le("sampled sup_K |Q| within the Hölder bound", q_sup.value, holder + 1e-9));
    let qz = q.eval(&z)?.re;
    rep.check(Check::close("Q(z) = (1+eps)^2", qz, (1.0 + eps).powi(2), 1e-12));
    rep.check(Check::gt("Q separates: Q(z) - sampled sup exceeds 1e-3", qz - q_sup.value, 1e-3));
    rep.constant("sup_Q", q_sup.value);

    let group: Group = GroupSpec::SymN { n, dim: None }.build()?;
    let scale = nf.powf(-1.0 / (2.0 * nn));
    let witness: Vec<f64> = (0..n).map(|i| if i == 0 || i % 2 == 1 { scale } else { -scale }).collect();
    let plus = witness.iter().filter(|&&x| x > 0.0).count();
    rep.check(Check::eq("witness has (n+1)/2 positive coordinates", plus as f64, n.div_ceil(2) as f64));
    let wc: Vec<Complex64> = witness.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    rep.check(Check::close(
        "witness lies on the unit sphere of l_2N",
        crate::setspec::lp_norm(&wc, 2.0 * nn),
        1.0,
        1e-12,
    ));

    for l in 1..big_n {
        let e = 2 * l;
        let pl = Separator::build(&lin, &group, e)?;
        let at_w = pl.value(&wc).re;
        let at_z = pl.value(&z).re;
        rep.check(Check::close(
            format!("P_{l}(z) equals the closed-form average"),
            at_z,
            averaged_power(&zr, alpha, e),
            1e-12 * at_z.abs().max(1.0),
        ));
        let level = nf.powf(-f64::from(l) / nn);
        let (w_val, used_fallback) = if at_w > at_z + 1e-6 {
            (at_w, false)
        } else {
            let s = sup_on_set_with(&pl, &ball, ctx.budget, ctx.seed, std::slice::from_ref(&wc))?;
            (s.value, true)
        };
        if used_fallback {
            rep.note(format!("P_{l}: witness point did not exceed P_{l}(z); a sampled point was used"));
        }
        rep.check(Check::gt(format!("P_{l}(witness) > n^(-{l}/N)"), w_val, level));
        rep.check(Check::lt(format!("P_{l}(z) < n^(-{l}/N)"), at_z, level));
        rep.check(Check::gt(format!("P_{l} fails: P_{l}(witness) - P_{l}(z) > 1e-6"), w_val - at_z, 1e-6));
        rep.constant(&format!("P_{l}_witness"), w_val);
        rep.constant(&format!("P_{l}_z"), at_z);

        let alt_w = averaged_power(&witness, alpha, 2 * e);
        let alt_z = averaged_power(&zr, alpha, 2 * e);
        rep.constant(&format!("alt_P_{l}_witness"), alt_w);
        rep.constant(&format!("alt_P_{l}_z"), alt_z);
        if (alt_w > alt_z) != (w_val > at_z) {
            rep.note(format!("P_{l}: the Q^(2l) reading and the Q^l reading disagree at the witness"));
        }
    }

    let pn = Separator::build(&lin, &group, 2 * big_n)?;
    let pn_z = pn.value(&z).re;
    let closed = (1.0 + eps).powf(2.0 * nn) * (1.0 / nf + (nf - 1.0) / nf * alpha.powf(2.0 * nn));
    rep.check(Check::close("P_N(z) = (1+eps)^2N (1/n + (n-1)/n alpha^2N)", pn_z, closed, 1e-12 * closed));
    rep.check(Check::gt("P_N(z) > 1/n", pn_z, 1.0 / nf));
    let pn_sup = sup_on_set(&pn, &ball, ctx.budget, ctx.seed)?;
    rep.check(Check::gt("P_N separates: margin > 1e-6", pn_z - pn_sup.value, 1e-6));
    rep.constant("P_N_z", pn_z);
    rep.constant("sup_P_N", pn_sup.value);
    rep.verdict(pn_z - pn_sup.value > ctx.margin_tol);
    Ok(rep.finish())
}
