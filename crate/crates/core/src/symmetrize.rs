//! Group averaging of polynomials: the symmetrization `S_G(Q)` and the
//! `m`-th symmetrization `P_m = S_G(Q^m)`, symbolically or by evaluation.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::groups::{Group, GroupElement};
use crate::poly::{Field, Monomial, Polynomial, DEFAULT_DEGREE_CAP};

const REALIFY_TOL: f64 = 1e-12;

fn check_dim(q: &Polynomial, group: &Group) -> Result<()> {
    if q.dim() != group.dim() {
        return Err(Error::DimensionMismatch { expected: group.dim(), found: q.dim() });
    }
    Ok(())
}

fn check_m(m: u32) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidArgument("symmetrization exponent must be >= 1".into()));
    }
    Ok(())
}

/// Averaging nodes for a polynomial of the given degree; the torus rule must
/// have more nodes than the degree to be exact.
fn exact_nodes(group: &Group, degree: u32) -> Result<Vec<GroupElement>> {
    if let Group::Torus(t) = group {
        let order = t.quadrature_order(degree);
        if order <= u64::from(degree) {
            return Err(Error::Unsupported(format!("quadrature order {order} cannot average degree {degree} exactly")));
        }
    }
    Ok(group.nodes(degree))
}

/// `S_G(Q)`: the Haar average of `Q ∘ g`.
pub fn symmetrize(q: &Polynomial, group: &Group) -> Result<Polynomial> {
    m_symmetrization(q, group, 1, DEFAULT_DEGREE_CAP)
}

/// `P_m = S_G(Q^m)`, expanded symbolically.
///
/// The power is formed once, composed with each group element in canonical
/// key order, and the sum divided by the number of averaging nodes.
pub fn m_symmetrization(q: &Polynomial, group: &Group, m: u32, degree_cap: u32) -> Result<Polynomial> {
    check_dim(q, group)?;
    check_m(m)?;
    let power = q.pow(m, degree_cap)?;
    let nodes = exact_nodes(group, power.max_degree())?;
    let mut acc: BTreeMap<Monomial, Complex64> = BTreeMap::new();
    for g in &nodes {
        let composed = power.compose_linear(g)?;
        for (mono, c) in composed.terms() {
            *acc.entry(mono.clone()).or_default() += *c;
        }
    }
    let weight = 1.0 / nodes.len() as f64;
    let out = Polynomial::from_terms(q.dim(), Field::Complex, acc.into_iter().map(|(mono, c)| (mono, c * weight)))?;
    Ok(match q.field() {
        Field::Real => out.realified(REALIFY_TOL),
        Field::Complex => out,
    })
}

/// `P_m(w)` computed as the average of `Q(g w)^m` without symbolic expansion.
pub fn eval_m_symmetrization(q: &Polynomial, group: &Group, m: u32, w: &[Complex64]) -> Result<Complex64> {
    NumericSymmetrization::new(q, group, m)?.eval(w)
}

/// Precomputed `Q ∘ g` for every averaging node, so `P_m` can be evaluated
/// at many points without symbolic powers.
#[derive(Clone, Debug)]
pub struct NumericSymmetrization {
    composed: Vec<Polynomial>,
    m: u32,
    dim: usize,
    base_degree: Option<u32>,
    node_limit: Option<u64>,
    q_degree: u32,
}

impl NumericSymmetrization {
    pub fn new(q: &Polynomial, group: &Group, m: u32) -> Result<NumericSymmetrization> {
        check_dim(q, group)?;
        check_m(m)?;
        let degree = q.max_degree().saturating_mul(m);
        let composed = group.nodes(degree).iter().map(|g| q.compose_linear(g)).collect::<Result<_>>()?;
        let node_limit = match group {
            Group::Finite(_) => None,
            Group::Torus(t) => Some(t.quadrature_order(degree)),
        };
        Ok(NumericSymmetrization {
            composed,
            m,
            dim: q.dim(),
            base_degree: q.homogeneity().degree,
            node_limit,
            q_degree: q.max_degree(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exponent(&self) -> u32 {
        self.m
    }

    /// Degree of `P_m` when `Q` is homogeneous.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        self.base_degree.map(|k| k * self.m)
    }

    pub fn node_count(&self) -> usize {
        self.composed.len()
    }

    /// The values `Q(g w)` over the averaging nodes.
    pub fn orbit_values(&self, w: &[Complex64]) -> Result<Vec<Complex64>> {
        if w.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: w.len() });
        }
        Ok(self.composed.iter().map(|p| p.eval_unchecked(w)).collect())
    }

    pub fn eval(&self, w: &[Complex64]) -> Result<Complex64> {
        let values = self.orbit_values(w)?;
        Ok(values.iter().map(|v| v.powu(self.m)).sum::<Complex64>() / values.len() as f64)
    }

    pub(crate) fn eval_unchecked(&self, w: &[Complex64]) -> Complex64 {
        let sum: Complex64 = self.composed.iter().map(|p| p.eval_unchecked(w).powu(self.m)).sum();
        sum / self.composed.len() as f64
    }

    /// Same node set, new exponent. Torus quadratures must stay exact for the new degree.
    pub fn with_exponent(&self, m: u32) -> Result<NumericSymmetrization> {
        check_m(m)?;
        if let Some(order) = self.node_limit {
            if u64::from(self.q_degree) * u64::from(m) >= order {
                return Err(Error::Unsupported(format!("quadrature order {order} too small for exponent {m}")));
            }
        }
        Ok(NumericSymmetrization { composed: self.composed.clone(), m, ..*self })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{verify_invariance, FiniteGroup, GroupSpec, TorusGroup};
    use crate::rng;
    use proptest::prelude::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn build(spec: GroupSpec) -> Group {
        spec.build().unwrap()
    }

    fn mono(e: &[u32]) -> Monomial {
        Monomial::new(e.to_vec())
    }

    #[test]
    fn square_over_sym3() {
        let q = Polynomial::var(3, 0, Field::Real).pow(2, 64).unwrap();
        let s = symmetrize(&q, &build(GroupSpec::SymN { n: 3, dim: None })).unwrap();
        assert_eq!(s.len(), 3);
        for e in [[2, 0, 0], [0, 2, 0], [0, 0, 2]] {
            assert!((s.coefficient(&mono(&e)) - 1.0 / 3.0).norm() < 1e-15);
        }
        assert_eq!(s.field(), Field::Real);
    }

    #[test]
    fn circle_kills_z() {
        let q = Polynomial::var(1, 0, Field::Complex);
        let circle: Group = TorusGroup::circle(1).into();
        assert!(symmetrize(&q, &circle).unwrap().is_zero());
        let fixed: Group = TorusGroup::new(1, vec![0], Some(2)).unwrap().into();
        assert!(matches!(m_symmetrization(&q, &fixed, 3, 64), Err(Error::Unsupported(_))));
    }

    #[test]
    fn invariant_is_fixed_point() {
        let q = Polynomial::from_terms(3, Field::Real, [(mono(&[1, 1, 1]), c(2.5))]).unwrap();
        let s = symmetrize(&q, &build(GroupSpec::SymN { n: 3, dim: None })).unwrap();
        assert_eq!(s, q);
    }

    #[test]
    fn m2_over_sym2() {
        let q = Polynomial::var(2, 0, Field::Real);
        let p = m_symmetrization(&q, &build(GroupSpec::SymN { n: 2, dim: None }), 2, 64).unwrap();
        let expected =
            Polynomial::from_terms(2, Field::Real, [(mono(&[2, 0]), c(0.5)), (mono(&[0, 2]), c(0.5))]).unwrap();
        assert!(p.max_coeff_diff(&expected) < 1e-15);
    }

    #[test]
    fn counterexample_closed_form() {
        let (alpha, eps, l) = (0.2, 0.1, 3u32);
        let q = Polynomial::linear(&[c(1.0), c(-alpha), c(-alpha)], Field::Real).pow(2, 64).unwrap();
        let p = m_symmetrization(&q, &build(GroupSpec::SymN { n: 3, dim: None }), l, 64).unwrap();
        let got = p.eval_real(&[1.0 + eps, 0.0, 0.0]).unwrap().re;
        let n = 3.0;
        let want = (1.0 + eps).powi(2 * l as i32) * (1.0 / n + (n - 1.0) / n * alpha.powi(2 * l as i32));
        assert!((got - want).abs() < 1e-12 * want);
    }

    #[test]
    fn m1_equals_symmetrize() {
        let g = build(GroupSpec::RTrunc { n: 3 });
        let q = Polynomial::linear(&[c(1.0), c(2.0), c(-1.0)], Field::Complex).pow(3, 64).unwrap();
        assert_eq!(m_symmetrization(&q, &g, 1, 64).unwrap(), symmetrize(&q, &g).unwrap());
    }

    #[test]
    fn degree_overflow_is_reported() {
        let q = Polynomial::var(2, 0, Field::Real).pow(10, 64).unwrap();
        let g = build(GroupSpec::SymN { n: 2, dim: None });
        assert!(matches!(m_symmetrization(&q, &g, 7, 64), Err(Error::DegreeCapExceeded { .. })));
        assert!(eval_m_symmetrization(&q, &g, 7, &[c(1.0), c(0.5)]).is_ok());
    }

    #[test]
    fn numeric_path_edge_cases() {
        let q = Polynomial::linear(&[c(1.0), c(2.0)], Field::Real);
        let trivial: Group = FiniteGroup::trivial(2).into();
        let w = [c(0.3), c(-0.4)];
        let v = eval_m_symmetrization(&q, &trivial, 3, &w).unwrap();
        assert!((v - q.eval(&w).unwrap().powu(3)).norm() < 1e-15);
        let z = Polynomial::var(1, 0, Field::Complex);
        let circle: Group = TorusGroup::circle(1).into();
        assert!(eval_m_symmetrization(&z, &circle, 3, &[Complex64::new(0.7, 1.9)]).unwrap().norm() < 1e-12);
        assert!(eval_m_symmetrization(&q, &trivial, 0, &w).is_err());
        assert!(eval_m_symmetrization(&q, &trivial, 1, &[c(1.0)]).is_err());
    }

    fn random_poly(rng: &mut crate::rng::Rng, dim: usize, field: Field, max_deg: u32, terms: usize) -> Polynomial {
        let t = (0..terms).map(|_| {
            let mut e = vec![0u32; dim];
            for _ in 0..rng.random_range(0..=max_deg) {
                e[rng.random_range(0..dim)] += 1;
            }
            let coeff = match field {
                Field::Real => c(rng.random_range(-1.0..1.0)),
                Field::Complex => Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            };
            (Monomial::new(e), coeff)
        });
        Polynomial::from_terms(dim, field, t).unwrap()
    }

    fn random_group(rng: &mut crate::rng::Rng) -> Group {
        match rng.random_range(0..4) {
            0 => build(GroupSpec::SymN { n: rng.random_range(1..=4), dim: None }),
            1 => build(GroupSpec::RTrunc { n: rng.random_range(1..=4) }),
            2 => build(GroupSpec::SignedIndex { n: rng.random_range(1..=2) }),
            _ => build(GroupSpec::BlockPerm { blocks: vec![1, 2] }),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn projection_invariance_linearity(seed in any::<u64>()) {
            let mut rng = rng::stream(seed, "symmetrize.prop");
            let g = random_group(&mut rng);
            let field = if rng.random_bool(0.5) { Field::Real } else { Field::Complex };
            let q1 = random_poly(&mut rng, g.dim(), field, 3, 4);
            let q2 = random_poly(&mut rng, g.dim(), field, 3, 4);
            let s1 = symmetrize(&q1, &g).unwrap();
            prop_assert!(symmetrize(&s1, &g).unwrap().max_coeff_diff(&s1) < 1e-10);
            prop_assert!(verify_invariance(&g, &s1, 5, seed).unwrap().max_deviation < 1e-9);
            let (a, b) = (c(rng.random_range(-2.0..2.0)), c(rng.random_range(-2.0..2.0)));
            let lhs = symmetrize(&q1.scale(a).add(&q2.scale(b)).unwrap(), &g).unwrap();
            let rhs = s1.scale(a).add(&symmetrize(&q2, &g).unwrap().scale(b)).unwrap();
            prop_assert!(lhs.max_coeff_diff(&rhs) < 1e-10);
        }

        #[test]
        fn dual_path_and_degree_law(seed in any::<u64>()) {
            let mut rng = rng::stream(seed, "symmetrize.dual");
            let g = random_group(&mut rng);
            let deg = rng.random_range(1..=2);
            let terms: Vec<(Monomial, Complex64)> = random_poly(&mut rng, g.dim(), Field::Complex, deg, 3)
                .terms()
                .filter(|(mo, _)| mo.degree() == deg)
                .map(|(mo, co)| (mo.clone(), *co))
                .collect();
            let q = Polynomial::from_terms(g.dim(), Field::Complex, terms).unwrap();
            let m = rng.random_range(1..=4);
            let p = m_symmetrization(&q, &g, m, 64).unwrap();
            if !p.is_zero() {
                prop_assert_eq!(p.homogeneity().degree, Some(deg * m));
            }
            prop_assert!(verify_invariance(&g, &p, 4, seed).unwrap().max_deviation < 1e-9);
            let w: Vec<Complex64> = (0..g.dim())
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let symbolic = p.eval(&w).unwrap();
            let numeric = eval_m_symmetrization(&q, &g, m, &w).unwrap();
            prop_assert!((symbolic - numeric).norm() <= 1e-9 * numeric.norm().max(1.0));
        }

        #[test]
        fn bound_transport(seed in any::<u64>()) {
            let mut rng = rng::stream(seed, "symmetrize.bound");
            let Group::Finite(g) = build(GroupSpec::SymN { n: 3, dim: None }) else { unreachable!() };
            let q = random_poly(&mut rng, 3, Field::Real, 2, 4);
            let base: Vec<Complex64> = (0..3).map(|_| c(rng.random_range(-1.0..1.0))).collect();
            let cloud = g.orbit(&base).unwrap();
            let r = cloud.iter().map(|k| q.eval(k).unwrap().norm()).fold(0.0, f64::max);
            let group: Group = g.into();
            let m = rng.random_range(1..=5);
            for k in &cloud {
                let v = eval_m_symmetrization(&q, &group, m, k).unwrap().norm();
                prop_assert!(v <= r.powi(m as i32) * (1.0 + 1e-12) + 1e-15);
            }
        }
    }
}
