use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{order_free_sum, scalar};
use crate::error::{Error, Result};

/// How coordinates beyond the head continue (indices are 1-based).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum TailRule {
    /// Zero beyond the head; the limsup is undefined for cases that need it.
    #[default]
    None,
    /// `z_j = scale * base^j`.
    Geometric {
        base: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `z_j = limit * (1 - rate^j)`, with `0 <= rate < 1`.
    Convergent { limit: f64, rate: f64 },
    /// Only a norm bound `||tail|| <= tau` is known.
    Bound { tau: f64 },
}

fn one() -> f64 {
    1.0
}

/// A sequence given by finitely many coordinates plus a tail rule.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TailSequence {
    #[serde(with = "scalar::vec", default)]
    pub head: Vec<Complex64>,
    #[serde(default)]
    pub tail: TailRule,
}

impl TailSequence {
    pub fn new(head: Vec<Complex64>, tail: TailRule) -> TailSequence {
        TailSequence { head, tail }
    }

    /// Coordinate `j >= 1`; coordinates beyond the head under a bound-only rule read as 0.
    pub fn coord(&self, j: usize) -> Complex64 {
        if j == 0 {
            return Complex64::new(0.0, 0.0);
        }
        if j <= self.head.len() {
            return self.head[j - 1];
        }
        let x = match self.tail {
            TailRule::None | TailRule::Bound { .. } => 0.0,
            TailRule::Geometric { base, scale } => scale * base.powi(j as i32),
            TailRule::Convergent { limit, rate } => limit * (1.0 - rate.powi(j as i32)),
        };
        Complex64::new(x, 0.0)
    }

    /// The first `n` coordinates.
    pub fn prefix(&self, n: usize) -> Vec<Complex64> {
        (1..=n).map(|j| self.coord(j)).collect()
    }

    /// `||(z_j)_{j > from}||_p`, in closed form past the head.
    pub fn tail_norm(&self, p: f64, from: usize) -> f64 {
        let s = from.max(self.head.len());
        let explicit: Vec<f64> = (from + 1..=s).map(|j| self.coord(j).norm()).collect();
        let rule = match self.tail {
            TailRule::None => 0.0,
            TailRule::Bound { tau } => tau,
            TailRule::Geometric { base, scale } => {
                let (b, c) = (base.abs(), scale.abs());
                if c == 0.0 {
                    0.0
                } else if p.is_infinite() {
                    if b <= 1.0 {
                        c * b.powi(s as i32 + 1)
                    } else {
                        f64::INFINITY
                    }
                } else if b < 1.0 {
                    (c.powf(p) * b.powf(p * (s as f64 + 1.0)) / (1.0 - b.powf(p))).powf(1.0 / p)
                } else {
                    f64::INFINITY
                }
            }
            TailRule::Convergent { limit, .. } => {
                if limit == 0.0 {
                    0.0
                } else if p.is_infinite() {
                    limit.abs()
                } else {
                    f64::INFINITY
                }
            }
        };
        if p.is_infinite() {
            explicit.into_iter().fold(rule, f64::max)
        } else {
            (explicit.iter().map(|x| x.powf(p)).sum::<f64>() + rule.powf(p)).powf(1.0 / p)
        }
    }

    pub fn norm(&self, p: f64) -> f64 {
        self.tail_norm(p, 0)
    }

    /// `sum_{j > from} z_j^k` with the geometric tail summed in closed form.
    pub fn power_sum_tail(&self, k: u32, from: usize) -> Result<Complex64> {
        let s = from.max(self.head.len());
        let explicit = order_free_sum((from + 1..=s).map(|j| self.coord(j).powu(k)));
        let rule = match self.tail {
            TailRule::None => Complex64::new(0.0, 0.0),
            TailRule::Geometric { base, scale } => {
                let bk = base.powi(k as i32);
                if bk.abs() >= 1.0 && scale != 0.0 {
                    return Err(Error::InvalidArgument("geometric tail power sum diverges".into()));
                }
                Complex64::new(scale.powi(k as i32) * base.powi((k as i32) * (s as i32 + 1)) / (1.0 - bk), 0.0)
            }
            TailRule::Convergent { limit: 0.0, .. } => Complex64::new(0.0, 0.0),
            _ => return Err(Error::InvalidArgument("power sums need a summable closed-form tail".into())),
        };
        Ok(explicit + rule)
    }

    /// `F_k(z) = sum_j z_j^k`.
    pub fn power_sum(&self, k: u32) -> Result<Complex64> {
        self.power_sum_tail(k, 0)
    }

    /// `limsup_j |z_j|`, computed from the tail rule.
    pub fn limsup(&self) -> Result<f64> {
        match self.tail {
            TailRule::None => Err(Error::InvalidArgument("limsup needs a tail rule".into())),
            TailRule::Bound { .. } => Err(Error::InvalidArgument("a norm bound does not determine the limsup".into())),
            TailRule::Geometric { base, scale } => Ok(if scale == 0.0 || base.abs() < 1.0 {
                0.0
            } else if base.abs() == 1.0 {
                scale.abs()
            } else {
                f64::INFINITY
            }),
            TailRule::Convergent { limit, rate } => {
                if !(0.0..1.0).contains(&rate) {
                    return Err(Error::InvalidArgument("convergent tail needs 0 <= rate < 1".into()));
                }
                Ok(limit.abs())
            }
        }
    }
}

/// `x = sum_j a_j 1_{I_j}` on the `2^level` dyadic intervals of `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    pub level: u32,
    pub coeffs: Vec<f64>,
}

impl StepFunction {
    pub fn new(level: u32, coeffs: Vec<f64>) -> Result<StepFunction> {
        let s = StepFunction { level, coeffs };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.level > 20 || self.coeffs.len() != 1usize << self.level {
            return Err(Error::InvalidArgument(format!(
                "step function of level {} needs {} coefficients",
                self.level,
                1u64 << self.level.min(63)
            )));
        }
        Ok(())
    }

    fn weight(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    /// `int_0^1 x^j`.
    pub fn moment(&self, j: u32) -> f64 {
        self.weight() * order_free_sum(self.coeffs.iter().map(|a| Complex64::new(a.powi(j as i32), 0.0))).re
    }

    pub fn norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.coeffs.iter().map(|a| a.abs()).fold(0.0, f64::max);
        }
        let s = order_free_sum(self.coeffs.iter().map(|a| Complex64::new(a.abs().powf(p), 0.0))).re;
        (self.weight() * s).powf(1.0 / p)
    }

    /// `x o sigma^{-1}`: the value on interval `sigma(i)` becomes `a_i`.
    pub fn permuted(&self, sigma: &[usize]) -> StepFunction {
        let mut coeffs = vec![0.0; self.coeffs.len()];
        for (i, &s) in sigma.iter().enumerate() {
            coeffs[s] = self.coeffs[i];
        }
        StepFunction { level: self.level, coeffs }
    }
}
