use std::collections::{BTreeMap, VecDeque};

use num_complex::Complex64;
use serde::Serialize;

use super::element::{DenseMatrix, ElementKey, GroupElement};
use crate::error::{Error, Result};

pub const DEFAULT_GROUP_CAP: usize = 100_000;

/// A finite group of linear maps with the uniform (normalized Haar) measure.
///
/// Elements are stored sorted by [`ElementKey`], which fixes the reduction
/// order of every average taken over the group.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    dim: usize,
    elements: Vec<GroupElement>,
}

/// Statistics from a closure run.
#[derive(Clone, Debug, Default, Serialize)]
pub struct GenerationStats {
    pub generators: usize,
    pub compositions: usize,
    pub order: usize,
}

impl FiniteGroup {
    /// Wraps an explicit element list, checking identity, closure and inverses.
    pub fn from_elements(dim: usize, elements: Vec<GroupElement>) -> Result<FiniteGroup> {
        let mut map: BTreeMap<ElementKey, GroupElement> = BTreeMap::new();
        for e in elements {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: e.dim() });
            }
            e.validate()?;
            map.insert(e.key(), e);
        }
        if !map.contains_key(&GroupElement::identity(dim).key()) {
            return Err(Error::NotAGroup("identity missing".into()));
        }
        for a in map.values() {
            if !map.contains_key(&a.inverse()?.key()) {
                return Err(Error::NotAGroup("missing inverse".into()));
            }
            for b in map.values() {
                if !map.contains_key(&a.compose(b)?.key()) {
                    return Err(Error::NotAGroup("not closed under composition".into()));
                }
            }
        }
        Ok(FiniteGroup { dim, elements: map.into_values().collect() })
    }

    /// Trusted constructor for element lists known to form a group.
    pub(crate) fn from_trusted(dim: usize, elements: Vec<GroupElement>) -> FiniteGroup {
        let map: BTreeMap<ElementKey, GroupElement> = elements.into_iter().map(|e| (e.key(), e)).collect();
        FiniteGroup { dim, elements: map.into_values().collect() }
    }

    pub fn trivial(dim: usize) -> FiniteGroup {
        FiniteGroup { dim, elements: vec![GroupElement::identity(dim)] }
    }

    /// Breadth-first closure of `generators` under composition.
    pub fn generate(dim: usize, generators: &[GroupElement], cap: usize) -> Result<(FiniteGroup, GenerationStats)> {
        for g in generators {
            if g.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: g.dim() });
            }
            g.validate()?;
            if g.is_singular() {
                return Err(Error::NotInvertible);
            }
        }
        let id = GroupElement::identity(dim);
        let mut seen: BTreeMap<ElementKey, GroupElement> = BTreeMap::new();
        seen.insert(id.key(), id.clone());
        let mut queue = VecDeque::from([id]);
        let mut compositions = 0;
        while let Some(x) = queue.pop_front() {
            for g in generators {
                let y = g.compose(&x)?;
                compositions += 1;
                let key = y.key();
                if !seen.contains_key(&key) {
                    if seen.len() >= cap {
                        return Err(Error::GroupTooLarge { cap });
                    }
                    seen.insert(key, y.clone());
                    queue.push_back(y);
                }
            }
        }
        let order = seen.len();
        let stats = GenerationStats { generators: generators.len(), compositions, order };
        Ok((FiniteGroup { dim, elements: seen.into_values().collect() }, stats))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.elements.len() as f64
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        let key = g.key();
        self.elements.binary_search_by(|e| e.key().cmp(&key)).is_ok()
    }

    /// Uniform average of `f` over the elements, summed in key order.
    pub fn average<F>(&self, mut f: F) -> Complex64
    where
        F: FnMut(&GroupElement) -> Complex64,
    {
        let sum: Complex64 = self.elements.iter().map(&mut f).sum();
        sum * self.weight()
    }

    /// Deduplicated orbit `{g(z)}`, coalescing points closer than 1e-10.
    pub fn orbit(&self, z: &[Complex64]) -> Result<Vec<Vec<Complex64>>> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: z.len() });
        }
        let mut out: Vec<Vec<Complex64>> = Vec::new();
        for g in &self.elements {
            let y = g.apply_unchecked(z);
            if !out.iter().any(|p| dist(p, &y) < 1e-10) {
                out.push(y);
            }
        }
        Ok(out)
    }

    /// `Sigma_n(G) = { Pi_n ∘ g ∘ iota_n }`, with a group test.
    pub fn project(&self, n: usize) -> Result<ProjectionReport> {
        if n == 0 || n > self.dim {
            return Err(Error::InvalidArgument(format!("projection level {n} outside 1..={}", self.dim)));
        }
        let mut map: BTreeMap<ElementKey, GroupElement> = BTreeMap::new();
        for g in &self.elements {
            let p = project_element(g, n);
            map.insert(p.key(), p);
        }
        let elements: Vec<GroupElement> = map.values().cloned().collect();
        let witness = projection_witness(&map);
        Ok(ProjectionReport { n, is_group: witness.is_none(), elements, witness })
    }
}

fn dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Upper-left `n x n` block of `g`, kept structured when `g` preserves the
/// first `n` coordinates.
fn project_element(g: &GroupElement, n: usize) -> GroupElement {
    if let Some((perm, phases)) = g.as_phased() {
        if perm[..n].iter().all(|&p| p < n) {
            return GroupElement::from_phased(perm[..n].to_vec(), phases[..n].to_vec());
        }
    }
    let full = g.to_matrix();
    let d = g.dim();
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        entries.extend_from_slice(&full[i * d..i * d + n]);
    }
    GroupElement::dense(DenseMatrix { n, entries })
}

fn projection_witness(map: &BTreeMap<ElementKey, GroupElement>) -> Option<ProjectionWitness> {
    for g in map.values() {
        if g.is_singular() {
            return Some(ProjectionWitness::Singular { element: g.clone() });
        }
    }
    for a in map.values() {
        for b in map.values() {
            let ab = a.compose(b).ok()?;
            if !map.contains_key(&ab.key()) {
                return Some(ProjectionWitness::NotClosed { left: a.clone(), right: b.clone() });
            }
        }
    }
    None
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProjectionWitness {
    /// A projected element with a vanishing column.
    Singular { element: GroupElement },
    /// Two projected elements whose product leaves the set.
    NotClosed { left: GroupElement, right: GroupElement },
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectionReport {
    pub n: usize,
    pub elements: Vec<GroupElement>,
    pub is_group: bool,
    pub witness: Option<ProjectionWitness>,
}

impl ProjectionReport {
    pub fn into_group(self) -> Option<FiniteGroup> {
        if self.is_group {
            Some(FiniteGroup::from_trusted(self.n, self.elements))
        } else {
            None
        }
    }
}
