use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{CaseContext, CaseReport, Check, StepFunction};
use crate::error::{Error, Result};
use crate::rng;

const PERMUTATIONS: usize = 100;
const BALL_SAMPLES: usize = 2000;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lp01Params {
    pub x: StepFunction,
    #[serde(with = "crate::setspec::exponent_serde")]
    pub p: f64,
    /// Moments `int x^j` are examined for `1 <= j <= k`, with `k <= p`.
    pub k: u32,
}

impl Default for Lp01Params {
    fn default() -> Self {
        Lp01Params { x: StepFunction { level: 0, coeffs: vec![1.3] }, p: 1.0, k: 1 }
    }
}

fn random_permutation(r: &mut rng::Rng, len: usize) -> Vec<usize> {
    let mut sigma: Vec<usize> = (0..len).collect();
    sigma.shuffle(r);
    sigma
}

/// Step functions on dyadic intervals: moments `int x^j` with `j <= p` are
/// invariant under interval rearrangements and bounded by 1 on the unit ball.
pub fn run(p: &Lp01Params, ctx: &CaseContext) -> Result<CaseReport> {
    p.x.validate()?;
    if p.k == 0 || !(p.p >= 1.0) || f64::from(p.k) > p.p {
        return Err(Error::InvalidArgument("need 1 <= k <= p".into()));
    }
    let mut rep = CaseReport::new("lp01", p);
    let moments: Vec<f64> = (1..=p.k).map(|j| p.x.moment(j)).collect();
    rep.constant("moments", &moments);
    rep.constant("norm_x", p.x.norm(p.p));
    let len = p.x.coeffs.len();
    let mut r = rng::stream(ctx.seed, "casebook.lp01");

    let mut worst: f64 = 0.0;
    for _ in 0..PERMUTATIONS {
        let y = p.x.permuted(&random_permutation(&mut r, len));
        for j in 1..=p.k {
            worst = worst.max((y.moment(j) - p.x.moment(j)).abs());
        }
    }
    rep.check(Check::eq("moments unchanged by random dyadic rearrangements", worst, 0.0));

    let mut sup_moment: f64 = 0.0;
    let mut norm_drift: f64 = 0.0;
    for _ in 0..BALL_SAMPLES {
        let raw: Vec<f64> = (0..len).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
        let s = StepFunction { level: p.x.level, coeffs: raw };
        let n = s.norm(p.p);
        if n == 0.0 {
            continue;
        }
        let scale = r.random::<f64>().max(0.5) / n;
        let u = StepFunction { level: s.level, coeffs: s.coeffs.iter().map(|a| a * scale).collect() };
        for j in 1..=p.k {
            sup_moment = sup_moment.max(u.moment(j).abs());
        }
        let v = u.permuted(&random_permutation(&mut r, len));
        norm_drift = norm_drift.max((v.norm(p.p) - u.norm(p.p)).abs());
    }
    rep.check(Check::le("sampled ball: max_j |int x^j| <= 1", sup_moment, 1.0 + 1e-12));
    rep.check(Check::eq("rearranged ball samples keep their norm", norm_drift, 0.0));

    match moments.iter().position(|m| m.abs() > 1.0) {
        Some(i) => {
            let j = i as u32 + 1;
            rep.constant("j", j);
            rep.check(Check::gt(format!("|int x^{j}| > 1"), moments[i].abs(), 1.0));
            rep.check(Check::le(
                format!("j = {j} <= p, so |int y^j| <= ||y||_p^j <= 1 on the ball"),
                f64::from(j),
                p.p,
            ));
            rep.verdict(true);
        }
        None => {
            rep.note(format!("no moment of order <= {} exceeds 1", p.k));
            rep.verdict(false);
        }
    }
    Ok(rep.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_alternating() {
        let ctx = CaseContext::default();
        let r = run(&Lp01Params::default(), &ctx).unwrap();
        assert!(r.pass);
        assert_eq!(r.constants["j"], 1);
        let alt = Lp01Params { x: StepFunction { level: 1, coeffs: vec![2.0, -2.0] }, p: 2.0, k: 2 };
        let r = run(&alt, &ctx).unwrap();
        assert!(r.pass, "{:?}", r.failed_checks().collect::<Vec<_>>());
        assert_eq!(r.constants["j"], 2);
        assert_eq!(r.constants["moments"], serde_json::json!([0.0, 4.0]));
        let small = Lp01Params { x: StepFunction { level: 2, coeffs: vec![0.5, -0.5, 0.9, 0.1] }, p: 3.0, k: 3 };
        let r = run(&small, &ctx).unwrap();
        assert!(r.pass);
        assert_eq!(r.verdict.as_deref(), Some("not_separated"));
        assert!(run(&Lp01Params { k: 3, ..Lp01Params::default() }, &ctx).is_err());
    }
}
