//! Self-checking reproductions of concrete separation constructions. Each case
//! records every inequality it relies on, with both sides and the slack.

mod c01;
mod circle;
mod counterexample;
mod lp01;
mod power;
mod roots;
mod sequences;

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use sequences::{StepFunction, TailRule, TailSequence};

use crate::error::{Error, Result};
use crate::setspec::{SupBudget, DEFAULT_MARGIN_TOL};

/// Identifiers accepted by [`run_case`], in suite order.
pub const CASE_IDS: [&str; 11] = [
    "counterexample",
    "circle",
    "roots_unity",
    "power_sums",
    "block_perm",
    "linf_limsup",
    "supersymmetric",
    "c01",
    "tshape",
    "lp01",
    "hahn_banach",
];

/// One recorded inequality `lhs rel rhs`; `slack` is positive when it holds strictly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub desc: String,
    pub lhs: f64,
    pub rel: String,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

impl Check {
    fn new(desc: impl Into<String>, lhs: f64, rel: &str, rhs: f64, slack: f64, pass: bool) -> Check {
        Check { desc: desc.into(), lhs, rel: rel.into(), rhs, slack, pass }
    }

    pub fn lt(desc: impl Into<String>, lhs: f64, rhs: f64) -> Check {
        let s = rhs - lhs;
        Check::new(desc, lhs, "<", rhs, s, s > 0.0)
    }

    pub fn le(desc: impl Into<String>, lhs: f64, rhs: f64) -> Check {
        let s = rhs - lhs;
        Check::new(desc, lhs, "<=", rhs, s, s >= 0.0)
    }

    pub fn gt(desc: impl Into<String>, lhs: f64, rhs: f64) -> Check {
        let s = lhs - rhs;
        Check::new(desc, lhs, ">", rhs, s, s > 0.0)
    }

    pub fn ge(desc: impl Into<String>, lhs: f64, rhs: f64) -> Check {
        let s = lhs - rhs;
        Check::new(desc, lhs, ">=", rhs, s, s >= 0.0)
    }

    /// `|lhs - rhs| <= tol`; the slack is `tol - |lhs - rhs|`.
    pub fn close(desc: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Check {
        let s = tol - (lhs - rhs).abs();
        Check::new(desc, lhs, "~=", rhs, s, s >= 0.0)
    }

    /// Exact equality.
    pub fn eq(desc: impl Into<String>, lhs: f64, rhs: f64) -> Check {
        let s = -(lhs - rhs).abs();
        Check::new(desc, lhs, "==", rhs, s, lhs == rhs)
    }

    pub fn holds(desc: impl Into<String>, ok: bool) -> Check {
        let v = if ok { 1.0 } else { 0.0 };
        Check::new(desc, v, "==", 1.0, v - 1.0, ok)
    }
}

/// Outcome of one case; `pass` is true exactly when every check passes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub case: String,
    pub inputs: Value,
    pub constants: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl CaseReport {
    pub(crate) fn new(case: &str, inputs: &impl Serialize) -> CaseReport {
        CaseReport {
            case: case.into(),
            inputs: serde_json::to_value(inputs).unwrap_or(Value::Null),
            constants: BTreeMap::new(),
            verdict: None,
            notes: Vec::new(),
            checks: Vec::new(),
            pass: false,
        }
    }

    pub(crate) fn constant(&mut self, key: &str, value: impl Serialize) {
        self.constants.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub(crate) fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub(crate) fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub(crate) fn verdict(&mut self, separated: bool) {
        self.verdict = Some(if separated { "separated" } else { "not_separated" }.into());
    }

    pub(crate) fn finish(mut self) -> CaseReport {
        self.pass = !self.checks.is_empty() && self.checks.iter().all(|c| c.pass);
        self
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Settings shared by every case.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CaseContext {
    pub seed: u64,
    pub budget: SupBudget,
    pub margin_tol: f64,
    pub m_max: Option<u64>,
    pub eta: Option<f64>,
}

impl Default for CaseContext {
    fn default() -> Self {
        CaseContext { seed: 42, budget: SupBudget::default(), margin_tol: DEFAULT_MARGIN_TOL, m_max: None, eta: None }
    }
}

impl CaseContext {
    pub(crate) fn m_max_or(&self, default: u64) -> u64 {
        self.m_max.unwrap_or(default)
    }
}

fn parse<T: DeserializeOwned + Default>(params: &Value) -> Result<T> {
    if params.is_null() {
        return Ok(T::default());
    }
    serde_json::from_value(params.clone()).map_err(|e| Error::InvalidArgument(format!("bad case parameters: {e}")))
}

/// Runs case `id` with JSON parameters (`null` selects the defaults).
pub fn run_case(id: &str, params: &Value, ctx: &CaseContext) -> Result<CaseReport> {
    match id {
        "counterexample" => counterexample::run(&parse(params)?, ctx),
        "circle" => circle::run(&parse(params)?, ctx),
        "roots_unity" => roots::run_roots(&parse(params)?, ctx),
        "block_perm" => roots::run_blocks(&parse(params)?, ctx),
        "hahn_banach" => roots::run_hahn_banach(&parse(params)?, ctx),
        "power_sums" => power::run_power_sums(&parse(params)?, ctx),
        "linf_limsup" => power::run_linf(&parse(params)?, ctx),
        "supersymmetric" => power::run_supersymmetric(&parse(params)?, ctx),
        "c01" => c01::run_c01(&parse(params)?, ctx),
        "tshape" => c01::run_tshape(&parse(params)?, ctx),
        "lp01" => lp01::run(&parse(params)?, ctx),
        other => Err(Error::InvalidArgument(format!("unknown case {other:?}; known cases: {}", CASE_IDS.join(", ")))),
    }
}

/// The default parameter sets of the full suite, in a fixed order.
pub fn suite() -> Vec<(String, Value)> {
    let v = |s: &str| serde_json::from_str::<Value>(s).expect("static JSON");
    [
        ("counterexample", r#"{"N":2,"k":1}"#),
        ("counterexample", r#"{"N":2,"k":2}"#),
        ("counterexample", r#"{"N":3,"k":1}"#),
        ("counterexample", r#"{"N":3,"k":2}"#),
        ("circle", r#"{"m_max":16}"#),
        ("roots_unity", r#"{"n":3,"z":{"head":[1.2,0,0]},"p":2}"#),
        ("roots_unity", r#"{"n":3,"z":{"head":[0,1.2,0]},"p":2}"#),
        ("roots_unity", r#"{"n":3,"z":{"head":[0.3,0.4,0.2]},"p":2}"#),
        ("power_sums", r#"{"z":{"head":[1.5,0.1,0.1]},"p":2}"#),
        ("power_sums", r#"{"z":{"head":[[0,1.3],0.2]},"p":3}"#),
        ("power_sums", r#"{"decay_m":1,"p":1.5}"#),
        ("power_sums", r#"{"decay_m":2,"p":2.5}"#),
        ("block_perm", r#"{"blocks":[1,2],"z":[1.3,0,0],"p":2}"#),
        ("block_perm", r#"{"blocks":[2,1],"z":[1.2,0,0],"p":2}"#),
        ("block_perm", r#"{"blocks":[1,2],"z":[0.5,0.2,0.1],"p":2}"#),
        ("linf_limsup", r#"{"z":{"head":[2],"tail":{"rule":"geometric","base":0.5}}}"#),
        ("linf_limsup", r#"{"z":{"head":[],"tail":{"rule":"geometric","base":1,"scale":1.1}}}"#),
        ("linf_limsup", r#"{"z":{"head":[0.5],"tail":{"rule":"convergent","limit":1,"rate":0.5}}}"#),
        ("supersymmetric", r#"{"plus":[1.4,0,0],"minus":[0,0,0],"p":2}"#),
        ("supersymmetric", r#"{"plus":[0.3,[0,1.2]],"minus":[0.5,0.1],"p":2}"#),
        ("c01", r#"{"g0":1.2,"g1":-1}"#),
        ("c01", r#"{"g0":[0.6,0.8],"g1":0.5,"interior_peak":{"t":0.5,"value":1.7}}"#),
        ("c01", r#"{"g0":1,"g1":1}"#),
        ("tshape", r#"{"g":[1.3,0,0,0]}"#),
        ("tshape", r#"{"g":[0,[0.848528137423857,0.848528137423857],1,1]}"#),
        ("tshape", r#"{"g":[0.5,[0,-0.9],0.2,1]}"#),
        ("lp01", r#"{"x":{"level":0,"coeffs":[1.3]},"p":1,"k":1}"#),
        ("lp01", r#"{"x":{"level":1,"coeffs":[2,-2]},"p":2,"k":2}"#),
        ("lp01", r#"{"x":{"level":2,"coeffs":[0.5,-0.5,0.9,0.1]},"p":3,"k":3}"#),
        ("hahn_banach", r#"{"points":[[1,0],[-1,0],[0,1],[0,-1]],"z":[1.5,0]}"#),
        ("hahn_banach", r#"{"points":[[1,0],[-1,0],[0,1],[0,-1]],"z":[0.5,0.4]}"#),
    ]
    .into_iter()
    .map(|(id, p)| (id.to_string(), v(p)))
    .collect()
}

/// Runs every case of [`suite`] in order.
pub fn run_suite(ctx: &CaseContext) -> Result<Vec<CaseReport>> {
    suite().iter().map(|(id, p)| run_case(id, p, ctx)).collect()
}

/// Scalars in case parameters: a number, `[re, im]`, or `{"re": .., "im": ..}`.
pub mod scalar {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Real(f64),
        Pair([f64; 2]),
        Named { re: f64, im: f64 },
    }

    impl From<Repr> for Complex64 {
        fn from(r: Repr) -> Complex64 {
            match r {
                Repr::Real(x) => Complex64::new(x, 0.0),
                Repr::Pair([a, b]) | Repr::Named { re: a, im: b } => Complex64::new(a, b),
            }
        }
    }

    #[derive(Serialize)]
    #[serde(untagged)]
    enum Out {
        Real(f64),
        Pair([f64; 2]),
    }

    fn out(z: &Complex64) -> Out {
        if z.im == 0.0 {
            Out::Real(z.re)
        } else {
            Out::Pair([z.re, z.im])
        }
    }

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        out(z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        Ok(Repr::deserialize(d)?.into())
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
            v.iter().map(out).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
            Ok(Vec::<Repr>::deserialize(d)?.into_iter().map(Complex64::from).collect())
        }
    }

    pub mod nested {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[Vec<Complex64>], s: S) -> Result<S::Ok, S::Error> {
            v.iter().map(|row| row.iter().map(out).collect::<Vec<_>>()).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Complex64>>, D::Error> {
            Ok(Vec::<Vec<Repr>>::deserialize(d)?
                .into_iter()
                .map(|row| row.into_iter().map(Complex64::from).collect())
                .collect())
        }
    }
}

/// Sum that does not depend on the order of `terms`, so permuted inputs give bit-identical results.
pub(crate) fn order_free_sum(terms: impl IntoIterator<Item = Complex64>) -> Complex64 {
    let mut v: Vec<Complex64> = terms.into_iter().collect();
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v.into_iter().fold(Complex64::new(0.0, 0.0), |acc, x| acc + x)
}
