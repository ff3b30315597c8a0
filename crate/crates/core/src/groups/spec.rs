use serde::{Deserialize, Serialize};

use super::element::{GroupElement, Phase};
use super::finite::{FiniteGroup, GenerationStats, DEFAULT_GROUP_CAP};
use super::torus::TorusGroup;
use super::Group;
use crate::error::{Error, Result};

/// Named group constructors, serialized as `{"kind": ..., params}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupSpec {
    /// All permutations of the first `n` coordinates of `C^dim` (`dim` defaults to `n`).
    #[serde(rename = "symN")]
    SymN {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
    /// Phases `e^{2 pi i k_j / j}` on coordinate `j = 1..n`, enumerated directly.
    RTrunc { n: usize },
    /// Closure of the generators `gamma_j` (phase `e^{2 pi i / j}` on coordinate `j`).
    RfGen { n: usize },
    /// Permutations preserving each consecutive block of the given sizes.
    BlockPerm { blocks: Vec<usize> },
    /// Permutations of `A ∪ -A` preserving `A` and `-A`; `A` occupies coordinates
    /// `0..n` and `-A` occupies `n..2n`.
    SignedIndex { n: usize },
    /// Permutations of the `2^level` dyadic intervals of one level.
    Dyadic { level: u32 },
    /// Circle (or torus) phases on the `acting` coordinates (default: all).
    Circle {
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        acting: Option<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        order: Option<u64>,
    },
    /// Closure of explicit generators.
    Custom { dim: usize, generators: Vec<GroupElement> },
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (0..n).collect();
    let mut out = vec![cur.clone()];
    while let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) {
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).expect("successor exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
    out
}

fn factorial_within(n: usize, cap: usize) -> Option<usize> {
    (1..=n).try_fold(1usize, |acc, k| acc.checked_mul(k).filter(|&v| v <= cap))
}

fn block_generators(blocks: &[usize]) -> (usize, Vec<GroupElement>) {
    let dim: usize = blocks.iter().sum();
    let mut gens = Vec::new();
    let mut start = 0;
    for &b in blocks {
        for i in start..start + b.saturating_sub(1) {
            gens.push(GroupElement::swap(dim, i, i + 1));
        }
        start += b;
    }
    (dim, gens)
}

impl GroupSpec {
    pub fn dim(&self) -> usize {
        match self {
            GroupSpec::SymN { n, dim } => dim.unwrap_or(*n),
            GroupSpec::RTrunc { n } | GroupSpec::RfGen { n } => *n,
            GroupSpec::BlockPerm { blocks } => blocks.iter().sum(),
            GroupSpec::SignedIndex { n } => 2 * n,
            GroupSpec::Dyadic { level } => 1usize << level,
            GroupSpec::Circle { dim, .. } | GroupSpec::Custom { dim, .. } => *dim,
        }
    }

    pub fn build(&self) -> Result<Group> {
        self.build_with_stats(DEFAULT_GROUP_CAP).map(|(g, _)| g)
    }

    pub fn build_with_stats(&self, cap: usize) -> Result<(Group, GenerationStats)> {
        let finite = |g: FiniteGroup, generators: usize, compositions: usize| {
            let stats = GenerationStats { generators, compositions, order: g.order() };
            Ok((Group::Finite(g), stats))
        };
        match self {
            GroupSpec::SymN { n, dim } => {
                let d = dim.unwrap_or(*n);
                if *n == 0 || *n > d {
                    return Err(Error::InvalidArgument(format!("symN needs 1 <= n <= dim, got n={n}, dim={d}")));
                }
                factorial_within(*n, cap).ok_or(Error::GroupTooLarge { cap })?;
                let elements = permutations(*n)
                    .into_iter()
                    .map(|mut p| {
                        p.extend(*n..d);
                        GroupElement::perm(p)
                    })
                    .collect();
                finite(FiniteGroup::from_trusted(d, elements), 0, 0)
            }
            GroupSpec::RTrunc { n } => {
                if *n == 0 {
                    return Err(Error::InvalidArgument("r_trunc needs n >= 1".into()));
                }
                factorial_within(*n, cap).ok_or(Error::GroupTooLarge { cap })?;
                let mut elements = Vec::new();
                let mut ks = vec![0u64; *n];
                loop {
                    let phases = ks.iter().enumerate().map(|(j, &k)| Phase::new(k, j as u64 + 1)).collect();
                    elements.push(GroupElement::from_phased((0..*n).collect(), phases));
                    let mut j = 0;
                    loop {
                        if j == *n {
                            return finite(FiniteGroup::from_trusted(*n, elements), 0, 0);
                        }
                        ks[j] += 1;
                        if ks[j] < j as u64 + 1 {
                            break;
                        }
                        ks[j] = 0;
                        j += 1;
                    }
                }
            }
            GroupSpec::RfGen { n } => {
                if *n == 0 {
                    return Err(Error::InvalidArgument("rf_gen needs n >= 1".into()));
                }
                let gens: Vec<GroupElement> = (1..*n)
                    .map(|j| {
                        let mut phases = vec![Phase::ONE; *n];
                        phases[j] = Phase::new(1, j as u64 + 1);
                        GroupElement::diagonal(phases)
                    })
                    .collect();
                let (g, stats) = FiniteGroup::generate(*n, &gens, cap)?;
                Ok((Group::Finite(g), stats))
            }
            GroupSpec::BlockPerm { blocks } => {
                if blocks.is_empty() || blocks.contains(&0) {
                    return Err(Error::InvalidArgument("block sizes must be positive".into()));
                }
                let (dim, gens) = block_generators(blocks);
                let (g, stats) = FiniteGroup::generate(dim, &gens, cap)?;
                Ok((Group::Finite(g), stats))
            }
            GroupSpec::SignedIndex { n } => {
                if *n == 0 {
                    return Err(Error::InvalidArgument("signed_index needs n >= 1".into()));
                }
                GroupSpec::BlockPerm { blocks: vec![*n, *n] }.build_with_stats(cap)
            }
            GroupSpec::Dyadic { level } => {
                if *level >= usize::BITS {
                    return Err(Error::GroupTooLarge { cap });
                }
                GroupSpec::SymN { n: 1usize << level, dim: None }.build_with_stats(cap)
            }
            GroupSpec::Circle { dim, acting, order } => {
                let acting = acting.clone().unwrap_or_else(|| (0..*dim).collect());
                let t = TorusGroup::new(*dim, acting, *order)?;
                Ok((Group::Torus(t), GenerationStats::default()))
            }
            GroupSpec::Custom { dim, generators } => {
                let (g, stats) = FiniteGroup::generate(*dim, generators, cap)?;
                Ok((Group::Finite(g), stats))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(spec: GroupSpec) -> usize {
        match spec.build().unwrap() {
            Group::Finite(g) => g.order(),
            Group::Torus(_) => panic!("expected finite group"),
        }
    }

    #[test]
    fn orders() {
        assert_eq!(order(GroupSpec::SymN { n: 3, dim: None }), 6);
        assert_eq!(order(GroupSpec::SymN { n: 3, dim: Some(5) }), 6);
        assert_eq!(order(GroupSpec::RTrunc { n: 4 }), 24);
        assert_eq!(order(GroupSpec::RfGen { n: 4 }), 24);
        assert_eq!(order(GroupSpec::BlockPerm { blocks: vec![1, 2, 3] }), 12);
        assert_eq!(order(GroupSpec::SignedIndex { n: 3 }), 36);
        assert_eq!(order(GroupSpec::Dyadic { level: 2 }), 24);
    }

    #[test]
    fn r_trunc_matches_generated_closure() {
        let (Group::Finite(a), Group::Finite(b)) =
            (GroupSpec::RTrunc { n: 4 }.build().unwrap(), GroupSpec::RfGen { n: 4 }.build().unwrap())
        else {
            panic!("expected finite groups")
        };
        let ka: Vec<_> = a.elements().iter().map(|e| e.key()).collect();
        let kb: Vec<_> = b.elements().iter().map(|e| e.key()).collect();
        assert_eq!(ka, kb);
    }

    #[test]
    fn permutations_are_lexicographic() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![0, 1, 2]);
        assert_eq!(p[5], vec![2, 1, 0]);
        assert_eq!(permutations(0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn json_kinds() {
        let s: GroupSpec = serde_json::from_str(r#"{"kind":"symN","n":3}"#).unwrap();
        assert_eq!(s, GroupSpec::SymN { n: 3, dim: None });
        let c: GroupSpec = serde_json::from_str(r#"{"kind":"circle","dim":1}"#).unwrap();
        assert!(matches!(c.build().unwrap(), Group::Torus(_)));
        let json = serde_json::to_string(&GroupSpec::RTrunc { n: 2 }).unwrap();
        assert_eq!(json, r#"{"kind":"r_trunc","n":2}"#);
    }

    #[test]
    fn caps_and_bad_input() {
        assert!(matches!(GroupSpec::SymN { n: 9, dim: None }.build(), Err(Error::GroupTooLarge { .. })));
        assert!(GroupSpec::SymN { n: 4, dim: Some(2) }.build().is_err());
        assert!(GroupSpec::BlockPerm { blocks: vec![] }.build().is_err());
    }
}
