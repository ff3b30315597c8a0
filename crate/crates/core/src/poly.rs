//! Sparse multivariate polynomials with complex `f64` coefficients.
//!
//! Terms live in a `BTreeMap` keyed by [`Monomial`], whose ordering is graded
//! lexicographic, so iteration and serialization are deterministic. Every
//! constructor and arithmetic operation drops coefficients whose modulus is
//! below [`ZERO_THRESHOLD`].

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::groups::GroupElement;

pub const ZERO_THRESHOLD: f64 = 1e-12;
pub const DEFAULT_DEGREE_CAP: u32 = 64;

/// Exponent vector of a monomial `x_1^{e_1} ... x_n^{e_n}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(dim: usize) -> Self {
        Monomial(vec![0; dim])
    }

    pub fn var(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    // Graded lex: lower total degree first; within a degree, x_1 dominates.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Field {
    #[serde(rename = "R")]
    Real,
    #[serde(rename = "C")]
    Complex,
}

impl Field {
    pub fn join(self, other: Field) -> Field {
        if self == Field::Real && other == Field::Real {
            Field::Real
        } else {
            Field::Complex
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HomogeneityInfo {
    pub homogeneous: bool,
    /// Common total degree; `None` for the zero polynomial or when not homogeneous.
    pub degree: Option<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    dim: usize,
    field: Field,
    terms: BTreeMap<Monomial, Complex64>,
}

impl Polynomial {
    pub fn zero(dim: usize, field: Field) -> Self {
        Polynomial { dim, field, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        let field = if c.im == 0.0 { Field::Real } else { Field::Complex };
        Self::from_terms(dim, field, [(Monomial::one(dim), c)]).expect("constant monomial has the right dimension")
    }

    /// The coordinate function `x_i` (0-based index).
    pub fn var(dim: usize, i: usize, field: Field) -> Self {
        assert!(i < dim, "variable index {i} out of range for dimension {dim}");
        Self::from_terms(dim, field, [(Monomial::var(dim, i), Complex64::new(1.0, 0.0))])
            .expect("variable monomial has the right dimension")
    }

    /// Linear form `sum_i c_i x_i`.
    pub fn linear(coeffs: &[Complex64], field: Field) -> Self {
        let dim = coeffs.len();
        let terms = coeffs.iter().enumerate().map(|(i, c)| (Monomial::var(dim, i), *c));
        Self::from_terms(dim, field, terms).expect("linear monomials have the right dimension")
    }

    /// Builds a polynomial, summing repeated monomials and dropping negligible terms.
    pub fn from_terms<I>(dim: usize, field: Field, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Monomial, Complex64)>,
    {
        let mut map: BTreeMap<Monomial, Complex64> = BTreeMap::new();
        for (m, c) in terms {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: m.dim() });
            }
            let c = if field == Field::Real { Complex64::new(c.re, 0.0) } else { c };
            *map.entry(m).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        let mut p = Polynomial { dim, field, terms: map };
        p.normalize();
        Ok(p)
    }

    fn normalize(&mut self) {
        self.terms.retain(|_, c| c.norm() >= ZERO_THRESHOLD);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Complex64 {
        self.terms.get(m).copied().unwrap_or_default()
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Relabels the scalar field as real when every imaginary part is below `tol`.
    pub fn realified(mut self, tol: f64) -> Self {
        if self.terms.values().all(|c| c.im.abs() <= tol) {
            self.field = Field::Real;
            for c in self.terms.values_mut() {
                c.im = 0.0;
            }
            self.normalize();
        }
        self
    }

    /// Marks the polynomial as having complex scalars (coefficients are unchanged).
    pub fn complexified(mut self) -> Self {
        self.field = Field::Complex;
        self
    }

    fn check_point(&self, x: &[Complex64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[Complex64]) -> Result<Complex64> {
        self.check_point(x)?;
        Ok(self.eval_unchecked(x))
    }

    /// Evaluation at a real point.
    pub fn eval_real(&self, x: &[f64]) -> Result<Complex64> {
        let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.eval(&z)
    }

    pub(crate) fn eval_unchecked(&self, x: &[Complex64]) -> Complex64 {
        if self.terms.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        let mut max_exp = vec![0u32; self.dim];
        for m in self.terms.keys() {
            for (slot, &e) in max_exp.iter_mut().zip(m.exponents()) {
                *slot = (*slot).max(e);
            }
        }
        let powers: Vec<Vec<Complex64>> = x
            .iter()
            .zip(&max_exp)
            .map(|(&xi, &top)| {
                let mut row = Vec::with_capacity(top as usize + 1);
                let mut acc = Complex64::new(1.0, 0.0);
                row.push(acc);
                for _ in 0..top {
                    acc *= xi;
                    row.push(acc);
                }
                row
            })
            .collect();
        let mut total = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = *c;
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    t *= powers[i][e as usize];
                }
            }
            total += t;
        }
        total
    }

    fn check_compatible(&self, other: &Polynomial) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.field = self.field.join(other.field);
        for (m, c) in &other.terms {
            *out.terms.entry(m.clone()).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        out.normalize();
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Polynomial {
        let field = if s.im == 0.0 { self.field } else { Field::Complex };
        let mut out =
            Polynomial { dim: self.dim, field, terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect() };
        out.normalize();
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_compatible(other)?;
        let mut terms: BTreeMap<Monomial, Complex64> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                *terms.entry(ma.mul(mb)).or_insert(Complex64::new(0.0, 0.0)) += ca * cb;
            }
        }
        let mut out = Polynomial { dim: self.dim, field: self.field.join(other.field), terms };
        out.normalize();
        Ok(out)
    }

    /// Symbolic `m`-th power by repeated squaring. Fails instead of truncating
    /// when the result would exceed `degree_cap`.
    pub fn pow(&self, m: u32, degree_cap: u32) -> Result<Polynomial> {
        if m == 0 {
            return Err(Error::InvalidArgument("power exponent must be >= 1".into()));
        }
        let degree = u64::from(self.max_degree()) * u64::from(m);
        if degree > u64::from(degree_cap) {
            return Err(Error::DegreeCapExceeded { degree: degree.min(u64::from(u32::MAX)) as u32, cap: degree_cap });
        }
        let mut base = self.clone();
        let mut acc: Option<Polynomial> = None;
        let mut e = m;
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base)?,
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul(&base)?;
        }
        Ok(acc.expect("m >= 1"))
    }

    /// `w -> P(A w)`, expanded symbolically.
    ///
    /// Structured elements (permutations and root-of-unity phases) are
    /// handled by reindexing exponents and accumulating the phase exactly as a
    /// fraction of a turn; dense matrices fall back to full expansion.
    pub fn compose_linear(&self, a: &GroupElement) -> Result<Polynomial> {
        if a.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: a.dim() });
        }
        match a.as_phased() {
            Some((perm, phases)) => {
                let mut terms = BTreeMap::new();
                let mut field = self.field;
                for (m, c) in &self.terms {
                    let mut exps = vec![0u32; self.dim];
                    let mut turn = crate::groups::Phase::ONE;
                    for (i, &e) in m.exponents().iter().enumerate() {
                        exps[perm[i]] += e;
                        turn = turn.mul(&phases[i].pow(u64::from(e)));
                    }
                    if !turn.is_real() {
                        field = Field::Complex;
                    }
                    terms.insert(Monomial(exps), c * turn.to_complex());
                }
                let mut out = Polynomial { dim: self.dim, field, terms };
                out.normalize();
                Ok(out)
            }
            None => {
                let matrix = a.to_matrix();
                let n = self.dim;
                let field = if matrix.iter().all(|c| c.im == 0.0) { self.field } else { Field::Complex };
                let forms: Vec<Polynomial> =
                    (0..n).map(|i| Polynomial::linear(&matrix[i * n..(i + 1) * n], field)).collect();
                let mut cache: BTreeMap<(usize, u32), Polynomial> = BTreeMap::new();
                let mut out = Polynomial::zero(n, field);
                for (m, c) in &self.terms {
                    let mut t = Polynomial::constant(n, *c);
                    for (i, &e) in m.exponents().iter().enumerate() {
                        if e == 0 {
                            continue;
                        }
                        let pw = match cache.get(&(i, e)) {
                            Some(p) => p.clone(),
                            None => {
                                let p = forms[i].pow(e, u32::MAX)?;
                                cache.insert((i, e), p.clone());
                                p
                            }
                        };
                        t = t.mul(&pw)?;
                    }
                    out = out.add(&t)?;
                }
                out.field = field.join(self.field);
                Ok(out)
            }
        }
    }

    /// Substitution `x_j -> 0` for `j >= n`, viewed as a polynomial on the
    /// first `n` coordinates (the composition with the coordinate inclusion).
    pub fn restrict_to_prefix(&self, n: usize) -> Result<Polynomial> {
        if n > self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: n });
        }
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.exponents()[n..].iter().all(|&e| e == 0))
            .map(|(m, c)| (Monomial(m.exponents()[..n].to_vec()), *c));
        Polynomial::from_terms(n, self.field, terms)
    }

    /// Pads with unused variables: the composition with the projection onto
    /// the first `self.dim()` coordinates of a `dim`-dimensional space.
    pub fn lift_to(&self, dim: usize) -> Result<Polynomial> {
        if dim < self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: dim });
        }
        let terms = self.terms.iter().map(|(m, c)| {
            let mut e = m.exponents().to_vec();
            e.resize(dim, 0);
            (Monomial(e), *c)
        });
        Polynomial::from_terms(dim, self.field, terms)
    }

    pub fn homogeneity(&self) -> HomogeneityInfo {
        let mut degrees = self.terms.keys().map(Monomial::degree);
        match degrees.next() {
            None => HomogeneityInfo { homogeneous: true, degree: None },
            Some(d) => {
                if degrees.all(|e| e == d) {
                    HomogeneityInfo { homogeneous: true, degree: Some(d) }
                } else {
                    HomogeneityInfo { homogeneous: false, degree: None }
                }
            }
        }
    }

    /// Largest coefficient-wise distance to `other`.
    pub fn max_coeff_diff(&self, other: &Polynomial) -> f64 {
        let mut worst: f64 = 0.0;
        for (m, c) in &self.terms {
            worst = worst.max((c - other.coefficient(m)).norm());
        }
        for (m, c) in &other.terms {
            if !self.terms.contains_key(m) {
                worst = worst.max(c.norm());
            }
        }
        worst
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("polynomial serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Polynomial> {
        Ok(serde_json::from_str(s)?)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        // Highest degree first reads more naturally.
        for (m, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if self.field == Field::Real {
                write!(f, "{}", c.re)?;
            } else {
                write!(f, "({}{:+}i)", c.re, c.im)?;
            }
            for (i, &e) in m.exponents().iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{}", i + 1, e)?,
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exp: Vec<u32>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct PolynomialRepr {
    dim: usize,
    field: Field,
    terms: Vec<TermRepr>,
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PolynomialRepr {
            dim: self.dim,
            field: self.field,
            terms: self.terms.iter().map(|(m, c)| TermRepr { exp: m.0.clone(), re: c.re, im: c.im }).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = PolynomialRepr::deserialize(deserializer)?;
        if repr.dim == 0 {
            return Err(serde::de::Error::custom("polynomial dimension must be positive"));
        }
        let terms = repr.terms.into_iter().map(|t| (Monomial(t.exp), Complex64::new(t.re, t.im)));
        Polynomial::from_terms(repr.dim, repr.field, terms).map_err(serde::de::Error::custom)
    }
}
