//! Simultaneous return times: exponents `m` that bring several unit-modulus
//! numbers `e^{i theta_j}` close to 1 at once.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_M_MAX: u64 = 1_000_000;
pub const DEFAULT_ANGLE_TOL: f64 = 1e-9;

/// Distinct angles in `[0, 2 pi)`, with multiplicities and optional exact
/// forms `theta_j = 2 pi p_j / q_j`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngleSet {
    pub angles: Vec<f64>,
    pub rational: Option<Vec<(u64, u64)>>,
    pub counts: Vec<usize>,
}

fn wrap(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

fn circular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(TAU - d)
}

impl AngleSet {
    /// Angles deduplicated within [`DEFAULT_ANGLE_TOL`].
    pub fn from_angles(angles: &[f64]) -> AngleSet {
        let mut out = AngleSet { angles: Vec::new(), rational: None, counts: Vec::new() };
        for &a in angles {
            let a = wrap(a);
            match out.angles.iter().position(|&b| circular_gap(a, b) <= DEFAULT_ANGLE_TOL) {
                Some(i) => out.counts[i] += 1,
                None => {
                    out.angles.push(a);
                    out.counts.push(1);
                }
            }
        }
        out
    }

    /// Exact angles `2 pi p / q`, reduced and deduplicated.
    pub fn from_rational(fractions: &[(u64, u64)]) -> Result<AngleSet> {
        let mut reduced: Vec<(u64, u64)> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for &(p, q) in fractions {
            if q == 0 {
                return Err(Error::InvalidArgument("angle denominator must be positive".into()));
            }
            let p = p % q;
            let g = p.gcd(&q);
            let f = (p / g, q / g);
            match reduced.iter().position(|&r| r == f) {
                Some(i) => counts[i] += 1,
                None => {
                    reduced.push(f);
                    counts.push(1);
                }
            }
        }
        let angles = reduced.iter().map(|&(p, q)| TAU * p as f64 / q as f64).collect();
        Ok(AngleSet { angles, rational: Some(reduced), counts })
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Attaches exact forms when every angle is within `tol` turns of some
    /// `p / q` with `q <= max_den`.
    pub fn with_rational_detection(mut self, max_den: u64, tol: f64) -> AngleSet {
        let detected: Option<Vec<(u64, u64)>> = self.angles.iter().map(|&a| detect_rational(a, max_den, tol)).collect();
        self.rational = detected;
        self
    }

    /// `max_j |e^{i theta_j m} - 1|`, exact for rational forms.
    pub fn defect(&self, m: u64) -> f64 {
        match &self.rational {
            Some(fr) => fr
                .iter()
                .map(|&(p, q)| {
                    let r = ((u128::from(p) * u128::from(m)) % u128::from(q)) as f64;
                    if r == 0.0 {
                        0.0
                    } else {
                        2.0 * (PI * r / q as f64).sin().abs()
                    }
                })
                .fold(0.0, f64::max),
            None => self
                .angles
                .iter()
                .map(|&t| 2.0 * ((t * m as f64).rem_euclid(TAU) / 2.0).sin().abs())
                .fold(0.0, f64::max),
        }
    }
}

/// Smallest `q <= max_den` with `theta / 2 pi` within `tol` of `p / q`.
pub fn detect_rational(theta: f64, max_den: u64, tol: f64) -> Option<(u64, u64)> {
    let turns = wrap(theta) / TAU;
    (1..=max_den).find_map(|q| {
        let p = (turns * q as f64).round();
        ((turns * q as f64 - p).abs() <= tol * q as f64).then(|| {
            let p = (p as u64) % q;
            let g = p.gcd(&q);
            (p / g, q / g)
        })
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReturnTime {
    pub m: u64,
    pub max_defect: f64,
}

/// Smallest `m` in `1..=m_max` with every `|e^{i theta_j m} - 1| < tol`, by direct scan.
pub fn simultaneous_return(angles: &AngleSet, tol: f64, m_max: u64) -> Result<ReturnTime> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("return tolerance must be positive".into()));
    }
    for m in 1..=m_max {
        let d = angles.defect(m);
        if d < tol {
            return Ok(ReturnTime { m, max_defect: d });
        }
    }
    Err(Error::Exhausted { m_max })
}

/// Exact least common return time `lcm(q_j / gcd(p_j, q_j))`.
pub fn rational_shortcut(angles: &AngleSet) -> Result<u64> {
    let fr = angles.rational.as_ref().ok_or(Error::MissingRationalForm)?;
    Ok(fr.iter().fold(1u64, |acc, &(p, q)| acc.lcm(&(q / p.gcd(&q)))))
}

/// Keeps values with modulus at least `eta` and clusters their arguments
/// (single linkage within `angle_tol`, merging across `2 pi`).
pub fn angle_cluster(values: &[Complex64], eta: f64, angle_tol: f64) -> AngleSet {
    let mut args: Vec<f64> = values.iter().filter(|v| v.norm() >= eta).map(|v| wrap(v.arg())).collect();
    args.sort_by(f64::total_cmp);
    let mut clusters: Vec<(f64, usize)> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for a in args {
        match clusters.last_mut() {
            Some(c) if a - last <= angle_tol => c.1 += 1,
            _ => clusters.push((a, 1)),
        }
        last = a;
    }
    if clusters.len() > 1 && TAU - last + clusters[0].0 <= angle_tol {
        let (_, n) = clusters.pop().expect("nonempty");
        clusters[0].1 += n;
    }
    AngleSet {
        angles: clusters.iter().map(|c| c.0).collect(),
        rational: None,
        counts: clusters.iter().map(|c| c.1).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;

    #[test]
    fn exact_cyclic_returns() {
        let a = AngleSet::from_angles(&[TAU / 3.0]);
        let r = simultaneous_return(&a, 1e-9, 100).unwrap();
        assert_eq!(r.m, 3);
        assert!(r.max_defect < 1e-9);
        let b = AngleSet::from_rational(&[(1, 3), (1, 5)]).unwrap();
        assert_eq!(simultaneous_return(&b, 1e-9, 100).unwrap(), ReturnTime { m: 15, max_defect: 0.0 });
        let b2 = AngleSet::from_angles(&[TAU / 3.0, TAU / 5.0]);
        assert_eq!(simultaneous_return(&b2, 1e-9, 100).unwrap().m, 15);
    }

    #[test]
    fn irrational_angle_brute_force() {
        let a = AngleSet::from_angles(&[1.0]);
        let r = simultaneous_return(&a, 0.1, DEFAULT_M_MAX).unwrap();
        let oracle = (1..=1_000_000u64).find(|&m| (Complex64::from_polar(1.0, m as f64) - 1.0).norm() < 0.1).unwrap();
        assert_eq!(r.m, oracle);
    }

    #[test]
    fn exhaustion_and_bad_tol() {
        let a = AngleSet::from_rational(&[(1, 7)]).unwrap();
        assert!(matches!(simultaneous_return(&a, 1e-9, 6), Err(Error::Exhausted { m_max: 6 })));
        assert!(simultaneous_return(&a, 0.0, 6).is_err());
    }

    #[test]
    fn shortcut() {
        assert_eq!(rational_shortcut(&AngleSet::from_rational(&[(1, 2), (2, 3)]).unwrap()).unwrap(), 6);
        assert_eq!(rational_shortcut(&AngleSet::from_rational(&[(0, 1)]).unwrap()).unwrap(), 1);
        assert!(matches!(rational_shortcut(&AngleSet::from_angles(&[1.0])), Err(Error::MissingRationalForm)));
    }

    #[test]
    fn clustering() {
        let same = vec![Complex64::new(1.0, 1.0); 4];
        let a = angle_cluster(&same, 0.5, 1e-9);
        assert_eq!(a.len(), 1);
        assert_eq!(a.counts, vec![4]);
        let roots: Vec<Complex64> = (0..5).map(|k| Complex64::from_polar(1.2, TAU * k as f64 / 5.0)).collect();
        assert_eq!(angle_cluster(&roots, 1.0, 1e-9).len(), 5);
        let small = vec![Complex64::new(0.1, 0.0)];
        assert!(angle_cluster(&small, 0.5, 1e-9).is_empty());
        let wrap_pair = vec![Complex64::from_polar(1.0, -1e-12), Complex64::from_polar(1.0, 1e-12)];
        assert_eq!(angle_cluster(&wrap_pair, 0.5, 1e-9).counts, vec![2]);
    }

    #[test]
    fn cluster_count_matches_rounding() {
        let mut r = rng::stream(3, "cluster");
        use rand::Rng as _;
        let values: Vec<Complex64> =
            (0..200).map(|_| Complex64::from_polar(1.5, TAU * r.random_range(0..12) as f64 / 12.0)).collect();
        let a = angle_cluster(&values, 1.0, 1e-9);
        let mut rounded: Vec<i64> = values.iter().map(|v| (wrap(v.arg()) * 1e6).round() as i64 % 6_283_185).collect();
        rounded.sort_unstable();
        rounded.dedup();
        assert_eq!(a.len(), rounded.len());
        assert_eq!(a.counts.iter().sum::<usize>(), 200);
    }

    #[test]
    fn detection() {
        assert_eq!(detect_rational(TAU * 3.0 / 8.0, 100, 1e-9), Some((3, 8)));
        assert_eq!(detect_rational(1.0, 50, 1e-9), None);
        let a = AngleSet::from_angles(&[TAU / 4.0, PI]).with_rational_detection(100, 1e-9);
        assert_eq!(rational_shortcut(&a).unwrap(), 4);
    }

    fn rational_strategy() -> impl Strategy<Value = Vec<(u64, u64)>> {
        prop::collection::vec((1u64..24).prop_flat_map(|q| (0..q, Just(q))), 1..5)
    }

    proptest! {
        #[test]
        fn scan_equals_shortcut(fr in rational_strategy()) {
            let a = AngleSet::from_rational(&fr).unwrap();
            let exact = rational_shortcut(&a).unwrap();
            prop_assert_eq!(a.defect(exact), 0.0);
            prop_assert_eq!(simultaneous_return(&a, 1e-12, DEFAULT_M_MAX).unwrap().m, exact);
            let loose = simultaneous_return(&a, 0.5, DEFAULT_M_MAX).unwrap().m;
            prop_assert!(loose <= exact);
            let doubled: Vec<(u64, u64)> = fr.iter().map(|&(p, q)| (2 * p, q)).collect();
            let d = rational_shortcut(&AngleSet::from_rational(&doubled).unwrap()).unwrap();
            prop_assert_eq!(exact % d, 0);
        }

        #[test]
        fn minimal_and_self_consistent(angles in prop::collection::vec(0.0f64..TAU, 1..3), tol in 0.1f64..1.0) {
            let a = AngleSet::from_angles(&angles);
            let r = simultaneous_return(&a, tol, DEFAULT_M_MAX).unwrap();
            let recheck = a.angles.iter().map(|&t| (Complex64::from_polar(1.0, t * r.m as f64) - 1.0).norm()).fold(0.0, f64::max);
            prop_assert!(recheck < tol);
            prop_assert!((1..r.m).all(|m| a.defect(m) >= tol));
        }
    }
}
