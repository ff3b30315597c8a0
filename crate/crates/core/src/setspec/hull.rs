use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::{lp_norm, SetSpec};
use crate::error::{Error, Result};
use crate::poly::{Field, Polynomial};

const WOLFE_TOL: f64 = 1e-12;
const WOLFE_MAX_ITER: usize = 10_000;
const MAX_PHASES: usize = 256;

/// A linear form `f(w) = sum c_i w_i` with `sup_K |f| = sup` and `|f(z)| = value`.
#[derive(Clone, Debug, Serialize)]
pub struct LinearSeparator {
    pub coeffs: Vec<Complex64>,
    pub field: Field,
    pub sup: f64,
    pub value: f64,
    pub margin: f64,
    /// Distance from `z` to the balanced hull used to build the form.
    pub distance: f64,
}

impl LinearSeparator {
    pub fn polynomial(&self) -> Polynomial {
        Polynomial::linear(&self.coeffs, self.field)
    }

    fn eval(&self, w: &[Complex64]) -> Complex64 {
        self.coeffs.iter().zip(w).map(|(c, x)| c * x).sum()
    }
}

/// Minimum-norm point of the convex hull of `points` (Wolfe's algorithm),
/// returned as convex weights.
fn min_norm_point(points: &[DVector<f64>]) -> Vec<(usize, f64)> {
    let scale = points.iter().map(|p| p.norm_squared()).fold(0.0, f64::max).max(1.0);
    let start = (0..points.len())
        .min_by(|&a, &b| points[a].norm_squared().total_cmp(&points[b].norm_squared()))
        .expect("nonempty");
    let mut active: Vec<(usize, f64)> = vec![(start, 1.0)];
    let combine = |active: &[(usize, f64)]| {
        active.iter().fold(DVector::zeros(points[0].len()), |acc, &(i, l)| acc + &points[i] * l)
    };
    let mut x = combine(&active);
    for _ in 0..WOLFE_MAX_ITER {
        let (j, best) =
            (0..points.len()).map(|i| (i, x.dot(&points[i]))).min_by(|a, b| a.1.total_cmp(&b.1)).expect("nonempty");
        if x.norm_squared() - best <= WOLFE_TOL * scale || active.iter().any(|&(i, _)| i == j) {
            break;
        }
        active.push((j, 0.0));
        loop {
            let mu = affine_min(points, &active);
            if mu.iter().all(|&m| m > WOLFE_TOL) {
                for (a, m) in active.iter_mut().zip(&mu) {
                    a.1 = *m;
                }
                break;
            }
            let theta = active
                .iter()
                .zip(&mu)
                .filter(|(_, &m)| m <= WOLFE_TOL)
                .map(|(a, &m)| a.1 / (a.1 - m))
                .fold(1.0, f64::min);
            for (a, m) in active.iter_mut().zip(&mu) {
                a.1 = (1.0 - theta) * a.1 + theta * m;
            }
            active.retain(|a| a.1 > WOLFE_TOL);
            let total: f64 = active.iter().map(|a| a.1).sum();
            for a in active.iter_mut() {
                a.1 /= total;
            }
        }
        x = combine(&active);
    }
    active
}

/// Affine weights of the minimum-norm point of the affine hull of the active points.
fn affine_min(points: &[DVector<f64>], active: &[(usize, f64)]) -> Vec<f64> {
    let k = active.len();
    let mut m = DMatrix::zeros(k + 1, k + 1);
    for (a, &(i, _)) in active.iter().enumerate() {
        for (b, &(j, _)) in active.iter().enumerate() {
            m[(a, b)] = points[i].dot(&points[j]);
        }
        m[(a, k)] = 1.0;
        m[(k, a)] = 1.0;
    }
    let mut rhs = DVector::zeros(k + 1);
    rhs[k] = 1.0;
    let sol = m.clone().lu().solve(&rhs).or_else(|| m.svd(true, true).solve(&rhs, 1e-14).ok());
    match sol {
        Some(s) if s.iter().all(|v| v.is_finite()) => s.iter().take(k).copied().collect(),
        _ => active.iter().map(|a| a.1).collect(),
    }
}

fn realify(w: &[Complex64], field: Field) -> DVector<f64> {
    match field {
        Field::Real => DVector::from_iterator(w.len(), w.iter().map(|x| x.re)),
        Field::Complex => DVector::from_iterator(2 * w.len(), w.iter().flat_map(|x| [x.re, x.im])),
    }
}

fn cloud_field(points: &[Vec<Complex64>], z: &[Complex64]) -> Field {
    let real = points.iter().flatten().chain(z).all(|x| x.im == 0.0);
    if real {
        Field::Real
    } else {
        Field::Complex
    }
}

fn finish(mut sep: LinearSeparator, set: &[Vec<Complex64>], z: &[Complex64]) -> Result<LinearSeparator> {
    sep.sup = set.iter().map(|k| sep.eval(k).norm()).fold(0.0, f64::max);
    sep.value = sep.eval(z).norm();
    if !(sep.value > sep.sup) {
        return Err(Error::NotSeparating { sup: sep.sup, value: sep.value });
    }
    normalize(sep)
}

fn normalize(mut sep: LinearSeparator) -> Result<LinearSeparator> {
    let s = if sep.sup > 0.0 { sep.sup } else { sep.value / 2.0 };
    for c in sep.coeffs.iter_mut() {
        *c /= s;
    }
    sep.sup /= s;
    sep.value /= s;
    sep.margin = sep.value - sep.sup;
    Ok(sep)
}

/// A linear form separating `z` from `K`, if `z` lies outside the balanced
/// convex hull of `K`.
///
/// Point clouds go through a minimum-norm-point computation on
/// `{ omega k - z }` over unimodular `omega` (`+-1` over the reals, `2^j`
/// roots of unity over the complex numbers, refined until the form passes an
/// exact check). Balls use the Hölder-dual vector of `z`. The result is
/// scaled so that `sup_K |f| = 1`.
pub fn find_linear_separator(set: &SetSpec, z: &[Complex64]) -> Result<LinearSeparator> {
    match set.resolve()? {
        SetSpec::PointCloud { points } => {
            if points[0].len() != z.len() {
                return Err(Error::DimensionMismatch { expected: points[0].len(), found: z.len() });
            }
            let field = cloud_field(&points, z);
            let zr = realify(z, field);
            let mut phases = if field == Field::Real { 2 } else { 4 };
            loop {
                let atoms: Vec<DVector<f64>> = points
                    .iter()
                    .flat_map(|k| {
                        (0..phases).map(move |j| {
                            let w = Complex64::from_polar(1.0, TAU * j as f64 / phases as f64);
                            k.iter().map(|x| w * x).collect::<Vec<_>>()
                        })
                    })
                    .map(|k| realify(&k, field) - &zr)
                    .collect();
                let weights = min_norm_point(&atoms);
                let closest = weights.iter().fold(DVector::zeros(zr.len()), |acc, &(i, l)| acc + &atoms[i] * l);
                let distance = closest.norm();
                if distance <= 1e-9 * (1.0 + zr.norm()) {
                    return Err(Error::InsideHull { distance });
                }
                let dir = -closest;
                let coeffs: Vec<Complex64> = match field {
                    Field::Real => dir.iter().map(|&d| Complex64::new(d, 0.0)).collect(),
                    Field::Complex => (0..z.len()).map(|i| Complex64::new(dir[2 * i], -dir[2 * i + 1])).collect(),
                };
                let sep = LinearSeparator { coeffs, field, sup: 0.0, value: 0.0, margin: 0.0, distance };
                match finish(sep, &points, z) {
                    Ok(s) => return Ok(s),
                    Err(e) if phases >= MAX_PHASES || field == Field::Real => return Err(e),
                    Err(_) => phases *= 2,
                }
            }
        }
        SetSpec::LpBall { dim, p, radius, field } => {
            if z.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: z.len() });
            }
            let norm = lp_norm(z, p);
            if norm <= radius {
                return Err(Error::InsideHull { distance: 0.0 });
            }
            let unit = |x: &Complex64| if x.norm() > 0.0 { x.conj() / x.norm() } else { Complex64::new(0.0, 0.0) };
            let coeffs: Vec<Complex64> = if p == 1.0 {
                z.iter().map(unit).collect()
            } else if p.is_infinite() {
                let j = (0..dim).max_by(|&a, &b| z[a].norm().total_cmp(&z[b].norm())).expect("dim >= 1");
                (0..dim).map(|i| if i == j { unit(&z[i]) } else { Complex64::new(0.0, 0.0) }).collect()
            } else {
                z.iter().map(|x| unit(x) * x.norm().powf(p - 1.0)).collect()
            };
            let q = if p.is_infinite() {
                1.0
            } else if p == 1.0 {
                f64::INFINITY
            } else {
                p / (p - 1.0)
            };
            let sup = radius * lp_norm(&coeffs, q);
            let mut sep = LinearSeparator { coeffs, field, sup, value: 0.0, margin: 0.0, distance: 0.0 };
            sep.value = sep.eval(z).norm();
            sep.distance = norm - radius;
            normalize(sep)
        }
        SetSpec::Named { .. } => unreachable!("resolve removes named sets"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setspec::{sup_on_set, SupBudget};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn real_cloud() {
        let cloud = SetSpec::PointCloud { points: vec![vec![c(1.0), c(0.0)], vec![c(0.0), c(1.0)]] };
        let z = [c(1.0), c(1.0)];
        let s = find_linear_separator(&cloud, &z).unwrap();
        assert!((s.sup - 1.0).abs() < 1e-12);
        assert!((s.value - 2.0).abs() < 1e-9);
        assert!((s.coeffs[0] - s.coeffs[1]).norm() < 1e-9);
        assert!((s.distance - 0.5f64.sqrt()).abs() < 1e-9);
        let inside = [c(0.3), c(-0.4)];
        assert!(matches!(find_linear_separator(&cloud, &inside), Err(Error::InsideHull { .. })));
    }

    #[test]
    fn complex_cloud_uses_modulus() {
        let i = Complex64::new(0.0, 1.0);
        let cloud = SetSpec::PointCloud { points: vec![vec![c(1.0), c(0.0)], vec![c(0.0), i]] };
        let z = [c(0.9), i * 0.9];
        let s = find_linear_separator(&cloud, &z).unwrap();
        assert!(s.margin > 0.5);
        let SetSpec::PointCloud { points } = &cloud else { unreachable!() };
        for k in points {
            assert!(s.eval(k).norm() <= 1.0 + 1e-9);
        }
        let rotated = [c(0.2), i * 0.2];
        assert!(find_linear_separator(&cloud, &rotated).is_err());
    }

    #[test]
    fn balls_use_dual() {
        for p in [1.0, 2.0, 4.0, f64::INFINITY] {
            let k = SetSpec::lp_ball(3, p, 1.0, Field::Real);
            let z = [c(1.2), c(-0.5), c(0.3)];
            let s = find_linear_separator(&k, &z).unwrap();
            assert!((s.sup - 1.0).abs() < 1e-12);
            assert!((s.value - lp_norm(&z, p)).abs() < 1e-9, "p = {p}");
            let sampled = sup_on_set(&s.polynomial(), &k, SupBudget::samples(2000), 3).unwrap().value;
            assert!(sampled <= 1.0 + 1e-9 && sampled > 0.97, "p = {p}: {sampled}");
        }
        let k = SetSpec::lp_ball(2, 2.0, 1.0, Field::Real);
        assert!(matches!(find_linear_separator(&k, &[c(0.5), c(0.5)]), Err(Error::InsideHull { .. })));
        assert!(find_linear_separator(&k, &[c(0.5)]).is_err());
    }

    #[test]
    fn l1_vertices_and_random_clouds() {
        let cloud = SetSpec::PointCloud {
            points: vec![vec![c(1.0), c(0.0)], vec![c(-1.0), c(0.0)], vec![c(0.0), c(1.0)], vec![c(0.0), c(-1.0)]],
        };
        let s = find_linear_separator(&cloud, &[c(1.5), c(0.0)]).unwrap();
        assert!((s.coeffs[0] - c(1.0)).norm() < 1e-9 && s.coeffs[1].norm() < 1e-9);
        assert!((s.margin - 0.5).abs() < 1e-9);
        assert!(matches!(find_linear_separator(&cloud, &[c(0.5), c(0.4)]), Err(Error::InsideHull { .. })));
        let mut r = crate::rng::stream(11, "hull.test");
        use rand::Rng as _;
        for _ in 0..20 {
            let points: Vec<Vec<Complex64>> =
                (0..8).map(|_| (0..3).map(|_| c(r.random_range(-1.0..1.0))).collect()).collect();
            let z: Vec<Complex64> = (0..3).map(|_| c(r.random_range(-3.0..3.0))).collect();
            let cloud = SetSpec::PointCloud { points: points.clone() };
            if let Ok(s) = find_linear_separator(&cloud, &z) {
                let sup = points.iter().map(|k| s.eval(k).norm()).fold(0.0, f64::max);
                assert!(sup < s.eval(&z).norm() - 1e-9);
            }
        }
    }

    #[test]
    fn wolfe_simplex() {
        let pts: Vec<DVector<f64>> = vec![
            DVector::from_vec(vec![1.0, 0.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0, 0.0]),
            DVector::from_vec(vec![0.0, 0.0, 1.0]),
        ];
        let w = min_norm_point(&pts);
        assert_eq!(w.len(), 3);
        assert!(w.iter().all(|&(_, l)| (l - 1.0 / 3.0).abs() < 1e-9));
    }
}
