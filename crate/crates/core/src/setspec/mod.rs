//! Invariant sets `K`, sup estimation over them, and the separation searches.

mod hull;
mod search;
mod sup;
mod truncation;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use hull::{find_linear_separator, LinearSeparator};
pub use search::{
    check_arg_condition, find_complex_exponent, find_even_exponent, normalization_constant, normalize_separator,
    separation_report, ArgCondition, ChainCheck, ComplexSearch, EvenSearch, Normalization, SearchOptions, SearchStep,
    SeparationReport, Separator, Verdict, DEFAULT_MARGIN_TOL,
};
pub use sup::{sup_on_set, sup_on_set_with, SupBudget, SupEstimate, SupMethod};
pub use truncation::{truncation_pipeline, TruncationParams, TruncationReport};

use crate::error::{Error, Result};
use crate::groups::GroupSpec;
use crate::poly::{Field, Polynomial};
use crate::symmetrize::NumericSymmetrization;

/// Something that can be evaluated at a point of `C^n`.
pub trait Evaluate {
    fn dim(&self) -> usize;
    /// Value at `w`; `w.len()` must equal `self.dim()`.
    fn value(&self, w: &[Complex64]) -> Complex64;
    /// Total degree when the function is a homogeneous polynomial.
    fn homogeneous_degree(&self) -> Option<u32>;
}

impl Evaluate for Polynomial {
    fn dim(&self) -> usize {
        Polynomial::dim(self)
    }

    fn value(&self, w: &[Complex64]) -> Complex64 {
        self.eval_unchecked(w)
    }

    fn homogeneous_degree(&self) -> Option<u32> {
        self.homogeneity().degree
    }
}

impl Evaluate for NumericSymmetrization {
    fn dim(&self) -> usize {
        NumericSymmetrization::dim(self)
    }

    fn value(&self, w: &[Complex64]) -> Complex64 {
        self.eval_unchecked(w)
    }

    fn homogeneous_degree(&self) -> Option<u32> {
        NumericSymmetrization::homogeneous_degree(self)
    }
}

pub(crate) mod exponent_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
        if p.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*p)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) if matches!(t.as_str(), "inf" | "infinity" | "Infinity") => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("invalid exponent {t:?}"))),
        }
    }
}

fn default_radius() -> f64 {
    1.0
}

fn default_field() -> Field {
    Field::Real
}

/// A description of the invariant set `K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetSpec {
    PointCloud {
        #[serde(deserialize_with = "crate::casebook::scalar::nested::deserialize")]
        points: Vec<Vec<Complex64>>,
    },
    /// `{ w : ||w||_p <= radius }` in `R^dim` or `C^dim`; `p` may be `"inf"`.
    LpBall {
        dim: usize,
        #[serde(with = "exponent_serde")]
        p: f64,
        #[serde(default = "default_radius")]
        radius: f64,
        #[serde(default = "default_field")]
        field: Field,
    },
    /// A set defined by name; see [`SetSpec::resolve`].
    Named {
        id: String,
        #[serde(default)]
        params: serde_json::Value,
    },
}

/// `||w||_p`, with `p = inf` giving the max modulus.
pub fn lp_norm(w: &[Complex64], p: f64) -> f64 {
    if p.is_infinite() {
        w.iter().map(|x| x.norm()).fold(0.0, f64::max)
    } else if p == 2.0 {
        w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    } else if p == 1.0 {
        w.iter().map(|x| x.norm()).sum()
    } else {
        w.iter().map(|x| x.norm().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

fn param_usize(params: &serde_json::Value, key: &str) -> Result<usize> {
    params
        .get(key)
        .and_then(serde_json::Value::as_u64)
        .map(|v| v as usize)
        .ok_or_else(|| Error::InvalidArgument(format!("named set needs integer parameter {key:?}")))
}

impl SetSpec {
    pub fn lp_ball(dim: usize, p: f64, radius: f64, field: Field) -> SetSpec {
        SetSpec::LpBall { dim, p, radius, field }
    }

    /// Replaces named sets by concrete ones and validates parameters.
    ///
    /// Known names: `counterexample_ball {N, k}` (the real `l_{2N}` unit ball
    /// of dimension `2k+1`), `unit_disk` (the closed complex unit disk), and
    /// `orbit {group, point}` (the orbit of a real point as a cloud).
    pub fn resolve(&self) -> Result<SetSpec> {
        match self {
            SetSpec::PointCloud { points } => {
                let Some(first) = points.first() else {
                    return Err(Error::InvalidArgument("point cloud must be nonempty".into()));
                };
                if points.iter().any(|p| p.len() != first.len()) || first.is_empty() {
                    return Err(Error::InvalidArgument("point cloud has inconsistent dimensions".into()));
                }
                Ok(self.clone())
            }
            SetSpec::LpBall { dim, p, radius, .. } => {
                if *dim == 0 || !(*p >= 1.0) || !(*radius > 0.0) || !radius.is_finite() {
                    return Err(Error::InvalidArgument("lp ball needs dim >= 1, p >= 1 and radius > 0".into()));
                }
                Ok(self.clone())
            }
            SetSpec::Named { id, params } => match id.as_str() {
                "counterexample_ball" => {
                    let n_exp = param_usize(params, "N")?;
                    let k = param_usize(params, "k")?;
                    SetSpec::lp_ball(2 * k + 1, 2.0 * n_exp as f64, 1.0, Field::Real).resolve()
                }
                "unit_disk" => Ok(SetSpec::lp_ball(1, 2.0, 1.0, Field::Complex)),
                "orbit" => {
                    let spec: GroupSpec = serde_json::from_value(
                        params
                            .get("group")
                            .cloned()
                            .ok_or_else(|| Error::InvalidArgument("orbit needs group".into()))?,
                    )?;
                    let point: Vec<f64> = serde_json::from_value(
                        params
                            .get("point")
                            .cloned()
                            .ok_or_else(|| Error::InvalidArgument("orbit needs point".into()))?,
                    )?;
                    let group = spec.build()?;
                    let finite = group
                        .as_finite()
                        .ok_or_else(|| Error::Unsupported("orbit clouds need a finite group".into()))?;
                    let z: Vec<Complex64> = point.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                    Ok(SetSpec::PointCloud { points: finite.orbit(&z)? })
                }
                other => Err(Error::InvalidArgument(format!("unknown named set {other:?}"))),
            },
        }
    }

    pub fn dim(&self) -> Result<usize> {
        match self.resolve()? {
            SetSpec::PointCloud { points } => Ok(points[0].len()),
            SetSpec::LpBall { dim, .. } => Ok(dim),
            SetSpec::Named { .. } => unreachable!("resolve removes named sets"),
        }
    }

    /// Membership up to `tol`.
    pub fn contains(&self, w: &[Complex64], tol: f64) -> Result<bool> {
        match self.resolve()? {
            SetSpec::PointCloud { points } => {
                Ok(points.iter().any(|p| p.len() == w.len() && p.iter().zip(w).all(|(a, b)| (a - b).norm() <= tol)))
            }
            SetSpec::LpBall { dim, p, radius, field } => {
                if w.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: w.len() });
                }
                let real_ok = field == Field::Complex || w.iter().all(|x| x.im.abs() <= tol);
                Ok(real_ok && lp_norm(w, p) <= radius + tol)
            }
            SetSpec::Named { .. } => unreachable!("resolve removes named sets"),
        }
    }

    /// Image under the coordinate projection onto the first `n` coordinates,
    /// viewed inside `C^n`.
    pub fn truncate(&self, n: usize) -> Result<SetSpec> {
        match self.resolve()? {
            SetSpec::PointCloud { points } => {
                if n == 0 || n > points[0].len() {
                    return Err(Error::InvalidArgument(format!("cannot truncate to {n} coordinates")));
                }
                let mut out: Vec<Vec<Complex64>> = Vec::new();
                for p in points {
                    let t = p[..n].to_vec();
                    if !out.contains(&t) {
                        out.push(t);
                    }
                }
                Ok(SetSpec::PointCloud { points: out })
            }
            SetSpec::LpBall { dim, p, radius, field } => {
                if n == 0 || n > dim {
                    return Err(Error::InvalidArgument(format!("cannot truncate to {n} coordinates")));
                }
                Ok(SetSpec::LpBall { dim: n, p, radius, field })
            }
            SetSpec::Named { .. } => unreachable!("resolve removes named sets"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn norms() {
        let w = [c(3.0), Complex64::new(0.0, -4.0)];
        assert_eq!(lp_norm(&w, 2.0), 5.0);
        assert_eq!(lp_norm(&w, 1.0), 7.0);
        assert_eq!(lp_norm(&w, f64::INFINITY), 4.0);
        assert!((lp_norm(&w, 4.0) - (81.0f64 + 256.0).powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn json_forms() {
        let s: SetSpec = serde_json::from_str(r#"{"kind":"lp_ball","dim":3,"p":"inf"}"#).unwrap();
        assert_eq!(s, SetSpec::lp_ball(3, f64::INFINITY, 1.0, Field::Real));
        let back = serde_json::to_string(&s).unwrap();
        assert!(back.contains(r#""p":"inf""#));
        let named: SetSpec =
            serde_json::from_str(r#"{"kind":"named","id":"counterexample_ball","params":{"N":2,"k":1}}"#).unwrap();
        assert_eq!(named.resolve().unwrap(), SetSpec::lp_ball(3, 4.0, 1.0, Field::Real));
        let orbit: SetSpec = serde_json::from_str(
            r#"{"kind":"named","id":"orbit","params":{"group":{"kind":"symN","n":2},"point":[1.0,0.0]}}"#,
        )
        .unwrap();
        assert_eq!(orbit.dim().unwrap(), 2);
        let cloud: SetSpec =
            serde_json::from_str(r#"{"kind":"point_cloud","points":[[0.5,[1.0,2.0]],[{"re":3.0,"im":0.0},-1.0]]}"#)
                .unwrap();
        let pts = vec![vec![c(0.5), Complex64::new(1.0, 2.0)], vec![c(3.0), c(-1.0)]];
        assert_eq!(cloud, SetSpec::PointCloud { points: pts.clone() });
        let back: SetSpec = serde_json::from_str(&serde_json::to_string(&cloud).unwrap()).unwrap();
        assert_eq!(back, SetSpec::PointCloud { points: pts });
        assert!(SetSpec::Named { id: "nope".into(), params: serde_json::Value::Null }.resolve().is_err());
    }

    #[test]
    fn validation_and_membership() {
        assert!(SetSpec::lp_ball(2, 0.5, 1.0, Field::Real).resolve().is_err());
        assert!(SetSpec::lp_ball(2, 2.0, 0.0, Field::Real).resolve().is_err());
        assert!(SetSpec::PointCloud { points: vec![] }.resolve().is_err());
        let ball = SetSpec::lp_ball(2, 2.0, 1.0, Field::Real);
        assert!(ball.contains(&[c(0.6), c(0.8)], 1e-12).unwrap());
        assert!(!ball.contains(&[c(0.6), c(0.9)], 1e-12).unwrap());
        assert!(!ball.contains(&[Complex64::new(0.0, 0.5), c(0.0)], 1e-12).unwrap());
        assert_eq!(ball.truncate(1).unwrap(), SetSpec::lp_ball(1, 2.0, 1.0, Field::Real));
    }
}
