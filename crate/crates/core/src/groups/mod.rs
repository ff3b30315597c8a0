mod element;
mod finite;
mod spec;
mod torus;

use num_complex::Complex64;
use rand::Rng as _;
use serde::Serialize;

pub use element::{DenseMatrix, ElementKey, GroupElement, Phase};
pub use finite::{FiniteGroup, GenerationStats, ProjectionReport, ProjectionWitness, DEFAULT_GROUP_CAP};
pub use spec::{permutations, GroupSpec};
pub use torus::TorusGroup;

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::rng;

/// A compact group with its normalized averaging rule.
#[derive(Clone, Debug)]
pub enum Group {
    Finite(FiniteGroup),
    Torus(TorusGroup),
}

impl From<FiniteGroup> for Group {
    fn from(g: FiniteGroup) -> Group {
        Group::Finite(g)
    }
}

impl From<TorusGroup> for Group {
    fn from(t: TorusGroup) -> Group {
        Group::Torus(t)
    }
}

impl Group {
    pub fn dim(&self) -> usize {
        match self {
            Group::Finite(g) => g.dim(),
            Group::Torus(t) => t.dim(),
        }
    }

    /// Averaging nodes, each of weight `1 / len`. For the torus the node count
    /// is chosen to integrate trigonometric polynomials of the given degree exactly.
    pub fn nodes(&self, degree: u32) -> Vec<GroupElement> {
        match self {
            Group::Finite(g) => g.elements().to_vec(),
            Group::Torus(t) => t.nodes(t.quadrature_order(degree)),
        }
    }

    /// Normalized Haar average of `f`.
    pub fn haar_average<F>(&self, degree: u32, f: F) -> Complex64
    where
        F: FnMut(&GroupElement) -> Complex64,
    {
        match self {
            Group::Finite(g) => g.average(f),
            Group::Torus(_) => {
                let nodes = self.nodes(degree);
                let sum: Complex64 = nodes.iter().map(f).sum();
                sum / nodes.len() as f64
            }
        }
    }

    pub fn as_finite(&self) -> Option<&FiniteGroup> {
        match self {
            Group::Finite(g) => Some(g),
            Group::Torus(_) => None,
        }
    }

    /// Number of elements, or `None` for the torus.
    pub fn order(&self) -> Option<usize> {
        self.as_finite().map(FiniteGroup::order)
    }
}

/// Where a polynomial's invariance fails most.
#[derive(Clone, Debug, Serialize)]
pub struct InvarianceWitness {
    pub point: Vec<Complex64>,
    pub image: Vec<Complex64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    pub max_deviation: f64,
    pub witness: Option<InvarianceWitness>,
}

const TORUS_ANGLES_PER_POINT: usize = 16;

/// Max of `|P(g z) - P(z)|` over sampled `z` in the unit polydisc and all `g`
/// (random angles for the torus).
pub fn verify_invariance(group: &Group, p: &Polynomial, samples: usize, seed: u64) -> Result<InvarianceReport> {
    if p.dim() != group.dim() {
        return Err(Error::DimensionMismatch { expected: group.dim(), found: p.dim() });
    }
    let mut rng = rng::stream(seed, "groups.verify_invariance");
    let n = group.dim();
    let mut best = InvarianceReport { max_deviation: 0.0, witness: None };
    let mut consider = |z: &[Complex64], w: Vec<Complex64>, pz: Complex64| {
        let dev = (p.eval_unchecked(&w) - pz).norm();
        if dev > best.max_deviation {
            best.max_deviation = dev;
            best.witness = Some(InvarianceWitness { point: z.to_vec(), image: w });
        }
    };
    for _ in 0..samples {
        let z: Vec<Complex64> =
            (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let pz = p.eval_unchecked(&z);
        match group {
            Group::Finite(g) => {
                for e in g.elements() {
                    consider(&z, e.apply_unchecked(&z), pz);
                }
            }
            Group::Torus(t) => {
                for _ in 0..TORUS_ANGLES_PER_POINT {
                    let angles: Vec<f64> =
                        t.acting().iter().map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
                    consider(&z, t.apply_angles(&angles, &z)?, pz);
                }
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize)]
pub struct SetInvarianceReport {
    pub invariant: bool,
    pub max_displacement: f64,
}

/// Checks that every `g(k)` lies within `tol` of some point of the cloud `K`.
pub fn verify_set_invariance(group: &FiniteGroup, cloud: &[Vec<Complex64>], tol: f64) -> Result<SetInvarianceReport> {
    if cloud.is_empty() {
        return Err(Error::InvalidArgument("point cloud must be nonempty".into()));
    }
    let mut max_displacement: f64 = 0.0;
    for k in cloud {
        if k.len() != group.dim() {
            return Err(Error::DimensionMismatch { expected: group.dim(), found: k.len() });
        }
        for g in group.elements() {
            let y = g.apply_unchecked(k);
            let nearest = cloud
                .iter()
                .map(|c| c.iter().zip(&y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt())
                .fold(f64::INFINITY, f64::min);
            max_displacement = max_displacement.max(nearest);
        }
    }
    Ok(SetInvarianceReport { invariant: max_displacement <= tol, max_displacement })
}
