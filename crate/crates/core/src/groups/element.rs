use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The root of unity `exp(2 pi i num / den)`, kept as a reduced fraction of a turn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "PhaseRepr", into = "PhaseRepr")]
pub struct Phase {
    num: u64,
    den: u64,
}

#[derive(Serialize, Deserialize)]
struct PhaseRepr {
    num: u64,
    den: u64,
}

impl TryFrom<PhaseRepr> for Phase {
    type Error = String;
    fn try_from(r: PhaseRepr) -> std::result::Result<Self, String> {
        if r.den == 0 {
            return Err("phase denominator must be positive".into());
        }
        Ok(Phase::new(r.num, r.den))
    }
}

impl From<Phase> for PhaseRepr {
    fn from(p: Phase) -> Self {
        PhaseRepr { num: p.num, den: p.den }
    }
}

impl Phase {
    pub const ONE: Phase = Phase { num: 0, den: 1 };
    pub const MINUS_ONE: Phase = Phase { num: 1, den: 2 };

    pub fn new(num: u64, den: u64) -> Phase {
        assert!(den > 0, "phase denominator must be positive");
        let num = num % den;
        let g = num.gcd(&den);
        Phase { num: num / g, den: den / g }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn mul(&self, other: &Phase) -> Phase {
        let den = u128::from(self.den) * u128::from(other.den);
        let num = u128::from(self.num) * u128::from(other.den) + u128::from(other.num) * u128::from(self.den);
        let num = num % den;
        let g = num.gcd(&den);
        Phase { num: (num / g) as u64, den: (den / g) as u64 }
    }

    pub fn pow(&self, e: u64) -> Phase {
        let num = (u128::from(self.num) * u128::from(e)) % u128::from(self.den);
        Phase::new(num as u64, self.den)
    }

    pub fn inverse(&self) -> Phase {
        Phase::new(self.den - self.num, self.den)
    }

    pub fn is_real(&self) -> bool {
        self.den <= 2
    }

    pub fn to_complex(&self) -> Complex64 {
        match (self.num, self.den) {
            (0, 1) => Complex64::new(1.0, 0.0),
            (1, 2) => Complex64::new(-1.0, 0.0),
            (1, 4) => Complex64::new(0.0, 1.0),
            (3, 4) => Complex64::new(0.0, -1.0),
            (n, d) => Complex64::from_polar(1.0, TAU * n as f64 / d as f64),
        }
    }
}

/// Square matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    pub n: usize,
    pub entries: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn new(n: usize, entries: Vec<Complex64>) -> Result<DenseMatrix> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: entries.len() });
        }
        Ok(DenseMatrix { n, entries })
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.n, self.n, &self.entries)
    }

    fn from_nalgebra(m: &DMatrix<Complex64>) -> DenseMatrix {
        let n = m.nrows();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(m[(i, j)]);
            }
        }
        DenseMatrix { n, entries }
    }
}

/// A linear map on `C^n` from one of the structured families the groups use.
///
/// Structured variants act by `(g w)_i = phase_i * w_{perm[i]}` with 0-based
/// indices; for a plain permutation this is `(w_{sigma(1)}, ..., w_{sigma(n)})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GroupElement {
    Permutation {
        perm: Vec<usize>,
    },
    SignedPermutation {
        perm: Vec<usize>,
        signs: Vec<i8>,
    },
    DiagonalPhases {
        phases: Vec<Phase>,
    },
    /// One unit-modulus root-of-unity entry per row and column.
    PhasedPermutation {
        perm: Vec<usize>,
        phases: Vec<Phase>,
    },
    Dense {
        matrix: DenseMatrix,
    },
}

/// Exact deduplication key: permutation array plus reduced phase fractions,
/// or matrix entries rounded to 1e-9 for dense elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementKey {
    Structured { perm: Vec<usize>, phases: Vec<(u64, u64)> },
    Dense(Vec<(i64, i64)>),
}

fn is_bijection(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return false;
        }
        seen[p] = true;
    }
    true
}

impl GroupElement {
    pub fn perm(perm: Vec<usize>) -> GroupElement {
        GroupElement::Permutation { perm }
    }

    pub fn diagonal(phases: Vec<Phase>) -> GroupElement {
        GroupElement::DiagonalPhases { phases }
    }

    pub fn identity(n: usize) -> GroupElement {
        GroupElement::Permutation { perm: (0..n).collect() }
    }

    /// Transposition of coordinates `i` and `j` (0-based) in dimension `n`.
    pub fn swap(n: usize, i: usize, j: usize) -> GroupElement {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.swap(i, j);
        GroupElement::Permutation { perm }
    }

    pub fn dense(matrix: DenseMatrix) -> GroupElement {
        GroupElement::Dense { matrix }
    }

    /// Narrowest variant representing the structured map `(perm, phases)`.
    pub fn from_phased(perm: Vec<usize>, phases: Vec<Phase>) -> GroupElement {
        let identity_perm = perm.iter().enumerate().all(|(i, &p)| i == p);
        if phases.iter().all(|p| *p == Phase::ONE) {
            GroupElement::Permutation { perm }
        } else if identity_perm {
            GroupElement::DiagonalPhases { phases }
        } else if phases.iter().all(Phase::is_real) {
            let signs = phases.iter().map(|p| if *p == Phase::ONE { 1 } else { -1 }).collect();
            GroupElement::SignedPermutation { perm, signs }
        } else {
            GroupElement::PhasedPermutation { perm, phases }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        match self {
            GroupElement::Permutation { perm } => {
                if !is_bijection(perm) {
                    return bad("permutation is not a bijection");
                }
            }
            GroupElement::SignedPermutation { perm, signs } => {
                if !is_bijection(perm) || signs.len() != perm.len() {
                    return bad("malformed signed permutation");
                }
                if signs.iter().any(|s| *s != 1 && *s != -1) {
                    return bad("signs must be +1 or -1");
                }
            }
            GroupElement::DiagonalPhases { .. } => {}
            GroupElement::PhasedPermutation { perm, phases } => {
                if !is_bijection(perm) || phases.len() != perm.len() {
                    return bad("malformed phased permutation");
                }
            }
            GroupElement::Dense { matrix } => {
                if matrix.entries.len() != matrix.n * matrix.n {
                    return bad("dense matrix has wrong number of entries");
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            GroupElement::Permutation { perm } => perm.len(),
            GroupElement::SignedPermutation { perm, .. } => perm.len(),
            GroupElement::DiagonalPhases { phases } => phases.len(),
            GroupElement::PhasedPermutation { perm, .. } => perm.len(),
            GroupElement::Dense { matrix } => matrix.n,
        }
    }

    /// Structured form `(perm, phases)`, or `None` for dense elements.
    pub fn as_phased(&self) -> Option<(Vec<usize>, Vec<Phase>)> {
        match self {
            GroupElement::Permutation { perm } => Some((perm.clone(), vec![Phase::ONE; perm.len()])),
            GroupElement::SignedPermutation { perm, signs } => {
                Some((perm.clone(), signs.iter().map(|&s| if s < 0 { Phase::MINUS_ONE } else { Phase::ONE }).collect()))
            }
            GroupElement::DiagonalPhases { phases } => Some(((0..phases.len()).collect(), phases.clone())),
            GroupElement::PhasedPermutation { perm, phases } => Some((perm.clone(), phases.clone())),
            GroupElement::Dense { .. } => None,
        }
    }

    pub fn to_matrix(&self) -> Vec<Complex64> {
        match self {
            GroupElement::Dense { matrix } => matrix.entries.clone(),
            _ => {
                let (perm, phases) = self.as_phased().expect("structured element");
                let n = perm.len();
                let mut m = vec![Complex64::new(0.0, 0.0); n * n];
                for i in 0..n {
                    m[i * n + perm[i]] = phases[i].to_complex();
                }
                m
            }
        }
    }

    pub fn apply(&self, w: &[Complex64]) -> Result<Vec<Complex64>> {
        if w.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: w.len() });
        }
        Ok(self.apply_unchecked(w))
    }

    pub(crate) fn apply_unchecked(&self, w: &[Complex64]) -> Vec<Complex64> {
        match self {
            GroupElement::Permutation { perm } => perm.iter().map(|&p| w[p]).collect(),
            GroupElement::Dense { matrix } => {
                (0..matrix.n).map(|i| (0..matrix.n).map(|j| matrix.get(i, j) * w[j]).sum()).collect()
            }
            _ => {
                let (perm, phases) = self.as_phased().expect("structured element");
                perm.iter().zip(&phases).map(|(&p, ph)| ph.to_complex() * w[p]).collect()
            }
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        match (self.as_phased(), other.as_phased()) {
            (Some((pg, fg)), Some((ph, fh))) => {
                let perm: Vec<usize> = pg.iter().map(|&i| ph[i]).collect();
                let phases: Vec<Phase> = (0..pg.len()).map(|i| fg[i].mul(&fh[pg[i]])).collect();
                Ok(GroupElement::from_phased(perm, phases))
            }
            _ => {
                let n = self.dim();
                let a = DenseMatrix { n, entries: self.to_matrix() }.to_nalgebra();
                let b = DenseMatrix { n, entries: other.to_matrix() }.to_nalgebra();
                Ok(GroupElement::Dense { matrix: DenseMatrix::from_nalgebra(&(a * b)) })
            }
        }
    }

    pub fn inverse(&self) -> Result<GroupElement> {
        match self.as_phased() {
            Some((perm, phases)) => {
                let n = perm.len();
                let mut inv_perm = vec![0; n];
                for (i, &p) in perm.iter().enumerate() {
                    inv_perm[p] = i;
                }
                let inv_phases = (0..n).map(|j| phases[inv_perm[j]].inverse()).collect();
                Ok(GroupElement::from_phased(inv_perm, inv_phases))
            }
            None => {
                let GroupElement::Dense { matrix } = self else { unreachable!() };
                if self.is_singular() {
                    return Err(Error::NotInvertible);
                }
                let inv = matrix.to_nalgebra().try_inverse().ok_or(Error::NotInvertible)?;
                Ok(GroupElement::Dense { matrix: DenseMatrix::from_nalgebra(&inv) })
            }
        }
    }

    /// True when some column (equivalently the determinant) vanishes numerically.
    pub fn is_singular(&self) -> bool {
        match self {
            GroupElement::Dense { matrix } => {
                let n = matrix.n;
                let zero_column = (0..n).any(|j| (0..n).all(|i| matrix.get(i, j).norm() < 1e-12));
                zero_column || matrix.to_nalgebra().determinant().norm() < 1e-12
            }
            _ => false,
        }
    }

    pub fn key(&self) -> ElementKey {
        match self.as_phased() {
            Some((perm, phases)) => {
                ElementKey::Structured { perm, phases: phases.iter().map(|p| (p.num(), p.den())).collect() }
            }
            None => {
                let round = |x: f64| (x * 1e9).round() as i64;
                ElementKey::Dense(self.to_matrix().iter().map(|c| (round(c.re), round(c.im))).collect())
            }
        }
    }

    pub fn is_identity(&self) -> bool {
        self.key() == GroupElement::identity(self.dim()).key()
    }

    /// Order of the cyclic subgroup generated by `self`, if it is at most `cap`.
    pub fn order(&self, cap: usize) -> Option<usize> {
        let mut acc = self.clone();
        for k in 1..=cap {
            if acc.is_identity() {
                return Some(k);
            }
            acc = acc.compose(self).ok()?;
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn phase_arithmetic() {
        let a = Phase::new(1, 3);
        assert_eq!(a.pow(3), Phase::ONE);
        assert_eq!(a.mul(&a.inverse()), Phase::ONE);
        assert_eq!(Phase::new(2, 4), Phase::MINUS_ONE);
        assert_eq!(Phase::new(1, 2).mul(&Phase::new(2, 3)), Phase::new(1, 6));
        assert_eq!(Phase::MINUS_ONE.to_complex(), Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn apply_compose_inverse() {
        let g = GroupElement::PhasedPermutation {
            perm: vec![2, 0, 1],
            phases: vec![Phase::new(1, 3), Phase::ONE, Phase::new(1, 4)],
        };
        let h = GroupElement::SignedPermutation { perm: vec![1, 0, 2], signs: vec![1, -1, 1] };
        let w = vec![Complex64::new(0.3, -0.2), Complex64::new(1.1, 0.5), Complex64::new(-0.7, 0.9)];
        let gh = g.compose(&h).unwrap();
        let lhs = gh.apply(&w).unwrap();
        let rhs = g.apply(&h.apply(&w).unwrap()).unwrap();
        for (a, b) in lhs.iter().zip(&rhs) {
            assert!((a - b).norm() < 1e-14);
        }
        let back = g.inverse().unwrap().apply(&g.apply(&w).unwrap()).unwrap();
        for (a, b) in back.iter().zip(&w) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(g.compose(&g.inverse().unwrap()).unwrap().is_identity());
    }

    #[test]
    fn dense_matches_structured() {
        let g = GroupElement::perm(vec![1, 2, 0]);
        let d = GroupElement::dense(DenseMatrix::new(3, g.to_matrix()).unwrap());
        let w = pt(&[1.0, 2.0, 3.0]);
        assert_eq!(g.apply(&w).unwrap(), d.apply(&w).unwrap());
        assert_eq!(g.apply(&w).unwrap(), pt(&[2.0, 3.0, 1.0]));
        let dinv = d.inverse().unwrap();
        let back = dinv.apply(&d.apply(&w).unwrap()).unwrap();
        for (a, b) in back.iter().zip(&w) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn narrowing_and_order() {
        let g = GroupElement::from_phased(vec![0, 1], vec![Phase::ONE, Phase::new(1, 3)]);
        assert!(matches!(g, GroupElement::DiagonalPhases { .. }));
        assert_eq!(g.order(10), Some(3));
        let s = GroupElement::from_phased(vec![1, 0], vec![Phase::MINUS_ONE, Phase::ONE]);
        assert!(matches!(s, GroupElement::SignedPermutation { .. }));
        assert_eq!(s.order(10), Some(4));
    }

    #[test]
    fn singular_dense() {
        let d = GroupElement::dense(
            DenseMatrix::new(2, vec![Complex64::new(1.0, 0.0), 0.0.into(), 0.0.into(), 0.0.into()]).unwrap(),
        );
        assert!(d.is_singular());
        assert!(matches!(d.inverse(), Err(Error::NotInvertible)));
    }

    #[test]
    fn validation() {
        assert!(GroupElement::perm(vec![0, 0]).validate().is_err());
        assert!(GroupElement::SignedPermutation { perm: vec![0, 1], signs: vec![1, 2] }.validate().is_err());
        assert!(GroupElement::swap(3, 0, 2).validate().is_ok());
    }
}
