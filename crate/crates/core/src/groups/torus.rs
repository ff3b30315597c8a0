use num_complex::Complex64;

use super::element::{GroupElement, Phase};
use crate::error::{Error, Result};

/// The torus `T^k` acting by independent phases on `k` chosen coordinates,
/// averaged by tensor-product root-of-unity quadrature.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusGroup {
    dim: usize,
    acting: Vec<usize>,
    order: Option<u64>,
}

impl TorusGroup {
    /// `acting` lists 0-based coordinates; `order` fixes the node count `M`,
    /// otherwise it is chosen per call as `4 * degree + 1`.
    pub fn new(dim: usize, acting: Vec<usize>, order: Option<u64>) -> Result<TorusGroup> {
        if dim == 0 {
            return Err(Error::InvalidArgument("torus dimension must be positive".into()));
        }
        let mut acting = acting;
        acting.sort_unstable();
        acting.dedup();
        if acting.iter().any(|&i| i >= dim) {
            return Err(Error::InvalidArgument("acting coordinate out of range".into()));
        }
        if order == Some(0) {
            return Err(Error::InvalidArgument("quadrature order must be positive".into()));
        }
        Ok(TorusGroup { dim, acting, order })
    }

    /// The circle acting on every coordinate of `C^dim`.
    pub fn circle(dim: usize) -> TorusGroup {
        TorusGroup { dim, acting: (0..dim).collect(), order: None }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn acting(&self) -> &[usize] {
        &self.acting
    }

    pub fn fixed_order(&self) -> Option<u64> {
        self.order
    }

    pub fn quadrature_order(&self, degree: u32) -> u64 {
        self.order.unwrap_or(4 * u64::from(degree) + 1)
    }

    /// Quadrature nodes as diagonal phase elements; each carries weight `1 / M^k`.
    pub fn nodes(&self, order: u64) -> Vec<GroupElement> {
        let k = self.acting.len();
        let total = (order as usize).pow(k as u32);
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0u64; k];
        for _ in 0..total {
            let mut phases = vec![Phase::ONE; self.dim];
            for (slot, &coord) in self.acting.iter().enumerate() {
                phases[coord] = Phase::new(idx[slot], order);
            }
            out.push(GroupElement::from_phased((0..self.dim).collect(), phases));
            for d in idx.iter_mut() {
                *d += 1;
                if *d < order {
                    break;
                }
                *d = 0;
            }
        }
        out
    }

    /// Applies the torus element with the given angles (one per acting coordinate).
    pub fn apply_angles(&self, angles: &[f64], z: &[Complex64]) -> Result<Vec<Complex64>> {
        if angles.len() != self.acting.len() {
            return Err(Error::DimensionMismatch { expected: self.acting.len(), found: angles.len() });
        }
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: z.len() });
        }
        let mut out = z.to_vec();
        for (&coord, &theta) in self.acting.iter().zip(angles) {
            out[coord] *= Complex64::from_polar(1.0, theta);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_integrates_monomials() {
        let t = TorusGroup::circle(1);
        let m = 9;
        let nodes = t.nodes(m);
        assert_eq!(nodes.len(), 9);
        let z = [Complex64::new(1.0, 0.0)];
        for d in 0..m {
            let avg: Complex64 =
                nodes.iter().map(|g| g.apply(&z).unwrap()[0].powu(d as u32)).sum::<Complex64>() / m as f64;
            let expected = if d == 0 { 1.0 } else { 0.0 };
            assert!((avg - expected).norm() < 1e-12, "d={d} avg={avg}");
        }
    }

    #[test]
    fn default_order_and_tensor_nodes() {
        let t = TorusGroup::new(3, vec![2, 0], None).unwrap();
        assert_eq!(t.acting(), &[0, 2]);
        assert_eq!(t.quadrature_order(2), 9);
        assert_eq!(t.nodes(3).len(), 9);
        assert!(TorusGroup::new(2, vec![2], None).is_err());
    }

    #[test]
    fn angles_rotate_acting_coordinates_only() {
        let t = TorusGroup::new(2, vec![1], None).unwrap();
        let z = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        let w = t.apply_angles(&[std::f64::consts::PI], &z).unwrap();
        assert_eq!(w[0], z[0]);
        assert!((w[1] + 1.0).norm() < 1e-15);
    }
}
