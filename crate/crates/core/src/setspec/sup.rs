use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::{lp_norm, Evaluate, SetSpec};
use crate::error::{Error, Result};
use crate::poly::Field;
use crate::rng;

/// Sampling budget for sup estimation over a ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SupBudget {
    pub samples: usize,
    pub polish_steps: usize,
}

impl Default for SupBudget {
    fn default() -> Self {
        SupBudget { samples: 20_000, polish_steps: 200 }
    }
}

impl SupBudget {
    pub fn samples(samples: usize) -> SupBudget {
        SupBudget { samples, ..SupBudget::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SupMethod {
    Exact,
    Sampling,
    Polish,
}

/// A lower estimate of `sup_K |f|`: the value is attained at `witness`, which lies in `K`.
#[derive(Clone, Debug, Serialize)]
pub struct SupEstimate {
    pub value: f64,
    pub witness: Vec<Complex64>,
    pub budget_used: usize,
    pub method: SupMethod,
}

pub fn sup_on_set<F: Evaluate + ?Sized>(f: &F, set: &SetSpec, budget: SupBudget, seed: u64) -> Result<SupEstimate> {
    sup_on_set_with(f, set, budget, seed, &[])
}

/// As [`sup_on_set`], additionally seeding the search with the feasible points of `extra`.
///
/// Point clouds are maximized exactly. Balls are sampled from one seed stream;
/// every sample that raises the running maximum is polished by coordinate
/// ascent. A longer run with the same seed polishes a superset of starting
/// points, so the estimate never decreases as the budget grows.
pub fn sup_on_set_with<F: Evaluate + ?Sized>(
    f: &F,
    set: &SetSpec,
    budget: SupBudget,
    seed: u64,
    extra: &[Vec<Complex64>],
) -> Result<SupEstimate> {
    let set = set.resolve()?;
    let dim = set.dim()?;
    if f.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: f.dim() });
    }
    match set {
        SetSpec::PointCloud { points } => {
            let mut best =
                SupEstimate { value: -1.0, witness: vec![], budget_used: points.len(), method: SupMethod::Exact };
            for p in &points {
                let v = f.value(p).norm();
                if v > best.value {
                    best.value = v;
                    best.witness = p.clone();
                }
            }
            Ok(best)
        }
        SetSpec::LpBall { p, radius, field, .. } => {
            let ball = Ball { dim, p, radius, field, homogeneous: f.homogeneous_degree().is_some_and(|d| d > 0) };
            Ok(ball.search(f, budget, seed, extra))
        }
        SetSpec::Named { .. } => unreachable!("resolve removes named sets"),
    }
}

struct Ball {
    dim: usize,
    p: f64,
    radius: f64,
    field: Field,
    homogeneous: bool,
}

impl Ball {
    fn scale_to(&self, w: &mut [Complex64], target: f64) {
        let n = lp_norm(w, self.p);
        if n > 0.0 {
            let s = target / n;
            for x in w.iter_mut() {
                *x *= s;
            }
        }
    }

    /// Pulls `w` back into the ball; homogeneous functions stay on the sphere.
    fn project(&self, w: &mut [Complex64]) {
        if self.field == Field::Real {
            for x in w.iter_mut() {
                x.im = 0.0;
            }
        }
        let n = lp_norm(w, self.p);
        if n > self.radius || (self.homogeneous && n > 0.0) {
            self.scale_to(w, self.radius);
        }
    }

    fn scalar(&self, rng: &mut rng::Rng) -> Complex64 {
        let re: f64 = rng.sample(StandardNormal);
        match self.field {
            Field::Real => Complex64::new(re, 0.0),
            Field::Complex => Complex64::new(re, rng.sample(StandardNormal)),
        }
    }

    fn unit_phase(&self, rng: &mut rng::Rng) -> Complex64 {
        match self.field {
            Field::Real => Complex64::new(if rng.random_bool(0.5) { 1.0 } else { -1.0 }, 0.0),
            Field::Complex => Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)),
        }
    }

    /// Cycles through Gaussian, sparse and near-vertex directions.
    fn sample(&self, rng: &mut rng::Rng, idx: usize) -> Vec<Complex64> {
        let mut w = vec![Complex64::new(0.0, 0.0); self.dim];
        match idx % 3 {
            0 => w.iter_mut().for_each(|x| *x = self.scalar(rng)),
            1 => {
                let support = rng.random_range(1..=self.dim);
                for _ in 0..support {
                    let i = rng.random_range(0..self.dim);
                    w[i] = self.scalar(rng);
                }
            }
            _ => {
                for x in w.iter_mut() {
                    let mag = if rng.random_bool(0.5) { 1.0 } else { rng.random_range(0.0..1.0) };
                    *x = self.unit_phase(rng) * mag;
                }
            }
        }
        if w.iter().all(|x| x.norm() == 0.0) {
            w[0] = Complex64::new(1.0, 0.0);
        }
        let real_dim = match self.field {
            Field::Real => self.dim,
            Field::Complex => 2 * self.dim,
        };
        let target = if self.homogeneous || rng.random_bool(0.5) {
            self.radius
        } else {
            self.radius * rng.random_range(0.0f64..1.0).powf(1.0 / real_dim as f64)
        };
        self.scale_to(&mut w, target);
        w
    }

    /// Deterministic coordinate ascent on `|f|` with step halving.
    fn polish<F: Evaluate + ?Sized>(&self, f: &F, start: &[Complex64], steps: usize) -> (Vec<Complex64>, f64, usize) {
        let mut w = start.to_vec();
        let mut v = f.value(&w).norm();
        let mut evals = 1;
        let mut delta = 0.25 * self.radius;
        let mut improved_in_cycle = false;
        let dirs: &[Complex64] = match self.field {
            Field::Real => &[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
            Field::Complex => &[
                Complex64::new(1.0, 0.0),
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, -1.0),
            ],
        };
        for step in 0..steps {
            let i = step % self.dim;
            let mut best: Option<(Vec<Complex64>, f64)> = None;
            for d in dirs {
                let mut cand = w.clone();
                cand[i] += d * delta;
                self.project(&mut cand);
                let cv = f.value(&cand).norm();
                evals += 1;
                if cv > best.as_ref().map_or(v, |b| b.1) {
                    best = Some((cand, cv));
                }
            }
            if let Some((cand, cv)) = best {
                w = cand;
                v = cv;
                improved_in_cycle = true;
            }
            if i + 1 == self.dim {
                if !improved_in_cycle {
                    delta *= 0.5;
                }
                improved_in_cycle = false;
            }
        }
        (w, v, evals)
    }

    fn search<F: Evaluate + ?Sized>(
        &self,
        f: &F,
        budget: SupBudget,
        seed: u64,
        extra: &[Vec<Complex64>],
    ) -> SupEstimate {
        let mut rng = rng::stream(seed, "setspec.sup");
        let mut best = SupEstimate {
            value: -1.0,
            witness: vec![Complex64::new(0.0, 0.0); self.dim],
            budget_used: 0,
            method: SupMethod::Sampling,
        };
        let mut record = -1.0;
        let consider = |w: Vec<Complex64>, best: &mut SupEstimate, record: &mut f64| {
            let v = f.value(&w).norm();
            best.budget_used += 1;
            if v > best.value {
                best.value = v;
                best.witness = w.clone();
                best.method = SupMethod::Sampling;
            }
            if v > *record {
                *record = v;
                let (pw, pv, evals) = self.polish(f, &w, budget.polish_steps);
                best.budget_used += evals;
                if pv > best.value {
                    best.value = pv;
                    best.witness = pw;
                    best.method = SupMethod::Polish;
                }
            }
        };
        for e in extra {
            let feasible = e.len() == self.dim
                && lp_norm(e, self.p) <= self.radius * (1.0 + 1e-12)
                && (self.field == Field::Complex || e.iter().all(|x| x.im == 0.0));
            if feasible {
                consider(e.clone(), &mut best, &mut record);
            }
        }
        for idx in 0..budget.samples {
            let w = self.sample(&mut rng, idx);
            consider(w, &mut best, &mut record);
        }
        best.value = best.value.max(0.0);
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{Monomial, Polynomial};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn x1x2() -> Polynomial {
        Polynomial::from_terms(2, Field::Real, [(Monomial::new(vec![1, 1]), c(1.0))]).unwrap()
    }

    fn budget(n: usize) -> SupBudget {
        SupBudget::samples(n)
    }

    #[test]
    fn product_on_balls() {
        let linf = sup_on_set(&x1x2(), &SetSpec::lp_ball(2, f64::INFINITY, 1.0, Field::Real), budget(2000), 1).unwrap();
        assert!((linf.value - 1.0).abs() < 1e-9, "{}", linf.value);
        let l2 = sup_on_set(&x1x2(), &SetSpec::lp_ball(2, 2.0, 1.0, Field::Real), budget(2000), 1).unwrap();
        assert!((l2.value - 0.5).abs() < 1e-6, "{}", l2.value);
        assert!(l2.value <= 0.5 + 1e-12);
        let w = &l2.witness;
        assert!((w[0].norm() - 0.5f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn power_sum_on_l2_ball() {
        let f2 = Polynomial::from_terms(
            3,
            Field::Real,
            (0..3).map(|i| {
                let mut e = vec![0; 3];
                e[i] = 2;
                (Monomial::new(e), c(1.0))
            }),
        )
        .unwrap();
        let s = sup_on_set(&f2, &SetSpec::lp_ball(3, 2.0, 1.0, Field::Real), budget(500), 3).unwrap();
        assert!((s.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn witness_is_feasible_and_attains_value() {
        let q = Polynomial::linear(&[c(1.0), c(-0.3), c(0.7)], Field::Complex).pow(3, 64).unwrap();
        for p in [1.0, 3.0, f64::INFINITY] {
            let k = SetSpec::lp_ball(3, p, 1.0, Field::Complex);
            let s = sup_on_set(&q, &k, budget(1000), 5).unwrap();
            assert!(k.contains(&s.witness, 1e-9).unwrap());
            assert_eq!(s.value, q.eval(&s.witness).unwrap().norm());
        }
    }

    #[test]
    fn point_cloud_is_exact() {
        let cloud = SetSpec::PointCloud { points: vec![vec![c(1.0), c(2.0)], vec![c(-3.0), c(0.5)]] };
        let s = sup_on_set(&x1x2(), &cloud, budget(1), 0).unwrap();
        assert_eq!(s.value, 2.0);
        assert_eq!(s.method, SupMethod::Exact);
        assert!(sup_on_set(&x1x2(), &SetSpec::lp_ball(3, 2.0, 1.0, Field::Real), budget(1), 0).is_err());
    }

    #[test]
    fn monotone_in_budget() {
        let q = Polynomial::linear(&[c(1.0), c(-0.4), c(0.2), c(0.9)], Field::Real).pow(4, 64).unwrap();
        let k = SetSpec::lp_ball(4, 3.0, 1.0, Field::Real);
        let mut prev = 0.0;
        for b in [10, 20, 40, 80, 160, 320] {
            let s = sup_on_set(&q, &k, SupBudget { samples: b, polish_steps: 40 }, 11).unwrap();
            assert!(s.value >= prev);
            prev = s.value;
        }
    }

    #[test]
    fn homogeneous_scaling() {
        let q = Polynomial::linear(&[c(1.0), c(-0.4), c(0.2)], Field::Real).pow(3, 64).unwrap();
        let base = sup_on_set(&q, &SetSpec::lp_ball(3, 4.0, 1.0, Field::Real), budget(3000), 2).unwrap().value;
        for rho in [0.5, 2.0] {
            let s = sup_on_set(&q, &SetSpec::lp_ball(3, 4.0, rho, Field::Real), budget(3000), 2).unwrap().value;
            let expected = base * rho.powi(3);
            assert!((s - expected).abs() <= 0.02 * expected);
        }
    }

    #[test]
    fn extra_points_are_used() {
        let q = Polynomial::from_terms(
            1,
            Field::Real,
            [(Monomial::new(vec![0]), c(1.0)), (Monomial::new(vec![2]), c(-1.0))],
        )
        .unwrap();
        let k = SetSpec::lp_ball(1, 2.0, 1.0, Field::Real);
        let s = sup_on_set_with(&q, &k, budget(0), 0, &[vec![c(0.0)], vec![c(5.0)]]).unwrap();
        assert_eq!(s.value, 1.0);
        assert_eq!(s.budget_used, 1 + 1 + 200 * 2);
    }
}
