use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use invsep::casebook::CaseContext;
use invsep::setspec::{SearchOptions, SupBudget};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

pub const SEED_ENV: &str = "INVSEP_SEED";
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "invsep", version, about = "Group-invariant polynomial separation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Average a polynomial over a group: S_G(Q^m).
    Symmetrize {
        /// JSON file with `q`, `group`, and optionally `m` and `points`.
        input: PathBuf,
        /// Exponent m of S_G(Q^m) (default 1).
        #[arg(short, long)]
        m: Option<u32>,
        /// Evaluate S_G(Q^m) at the input `points` without expanding it.
        #[arg(long)]
        numeric: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Search for an invariant polynomial separating `z` from `set`.
    Separate {
        /// JSON file with `q`, `group`, `set`, `z`, and optionally a fixed `m`.
        input: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run casebook cases (default: the full suite).
    Casebook {
        /// Case id to run; repeatable. Selects that id's suite entries.
        #[arg(long = "case")]
        cases: Vec<String>,
        /// JSON parameters for a single --case.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Print the known case ids and exit.
        #[arg(long)]
        list: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed (default: $INVSEP_SEED, else 42).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random samples per sup estimate.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Largest exponent tried by the searches.
    #[arg(long)]
    pub m_max: Option<u64>,
    /// Minimum margin |P(z)| - sup_K |P| counted as separation.
    #[arg(long)]
    pub margin_tol: Option<f64>,
    /// Tolerance for merging orbit arguments.
    #[arg(long)]
    pub angle_tol: Option<f64>,
    /// Modulus threshold for the orbit-argument condition, in (0, 1).
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file (casebook: output directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for the casebook.
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// A case selection in a config file: an id, or an id with parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CaseSelection {
    Id(String),
    Entry {
        id: String,
        #[serde(default)]
        params: Value,
    },
}

/// The `--config` file; every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub budget: Option<usize>,
    pub polish_steps: Option<usize>,
    pub m_max: Option<u64>,
    pub margin_tol: Option<f64>,
    pub angle_tol: Option<f64>,
    pub eta: Option<f64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub cases: Option<Vec<CaseSelection>>,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub seed: u64,
    pub budget: SupBudget,
    pub m_max: Option<u64>,
    pub margin_tol: f64,
    pub angle_tol: f64,
    pub eta: Option<f64>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub jobs: usize,
    pub cases: Option<Vec<CaseSelection>>,
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(anyhow!("parsing {}: {e}", path.display())))
}

impl RunConfig {
    /// Merges flags over the config file over the environment over defaults.
    pub fn resolve(args: &CommonArgs, env_seed: Option<&str>) -> Result<RunConfig, CliError> {
        let file: FileConfig = match &args.config {
            Some(path) => read_json(path)?,
            None => FileConfig::default(),
        };
        let env_seed = match env_seed {
            Some(s) => Some(
                s.trim().parse::<u64>().map_err(|e| CliError::usage(anyhow!("{SEED_ENV}={s:?} is not a seed: {e}")))?,
            ),
            None => None,
        };
        let defaults = SearchOptions::default();
        let mut budget = SupBudget::default();
        if let Some(s) = args.budget.or(file.budget) {
            budget.samples = s;
        }
        if let Some(p) = file.polish_steps {
            budget.polish_steps = p;
        }
        let cfg = RunConfig {
            seed: args.seed.or(file.seed).or(env_seed).unwrap_or(DEFAULT_SEED),
            budget,
            m_max: args.m_max.or(file.m_max),
            margin_tol: args.margin_tol.or(file.margin_tol).unwrap_or(defaults.margin_tol),
            angle_tol: args.angle_tol.or(file.angle_tol).unwrap_or(defaults.angle_tol),
            eta: args.eta.or(file.eta),
            format: args.format.or(file.format).unwrap_or_default(),
            out: args.out.clone().or(file.out),
            jobs: args.jobs.or(file.jobs).unwrap_or(1),
            cases: file.cases,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::usage(anyhow!(msg)));
        if self.budget.samples == 0 {
            return bad("budget must be positive".into());
        }
        if !(self.margin_tol > 0.0 && self.margin_tol.is_finite()) {
            return bad(format!("margin_tol must be positive, got {}", self.margin_tol));
        }
        if !(self.angle_tol > 0.0 && self.angle_tol.is_finite()) {
            return bad(format!("angle_tol must be positive, got {}", self.angle_tol));
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta < 1.0) {
                return bad(format!("eta must lie in (0, 1), got {eta}"));
            }
        }
        if self.m_max == Some(0) {
            return bad("m_max must be positive".into());
        }
        if self.jobs == 0 {
            return bad("jobs must be positive".into());
        }
        Ok(())
    }

    pub fn search_options(&self) -> SearchOptions {
        SearchOptions {
            budget: self.budget,
            seed: self.seed,
            margin_tol: self.margin_tol,
            m_max: self.m_max.unwrap_or(SearchOptions::default().m_max),
            angle_tol: self.angle_tol,
        }
    }

    pub fn case_context(&self) -> CaseContext {
        CaseContext {
            seed: self.seed,
            budget: self.budget,
            margin_tol: self.margin_tol,
            m_max: self.m_max,
            eta: self.eta,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_precedence() {
        let none = CommonArgs::default();
        assert_eq!(RunConfig::resolve(&none, None).unwrap().seed, 42);
        assert_eq!(RunConfig::resolve(&none, Some("7")).unwrap().seed, 7);
        let flag = CommonArgs { seed: Some(3), ..CommonArgs::default() };
        assert_eq!(RunConfig::resolve(&flag, Some("7")).unwrap().seed, 3);
        assert_eq!(RunConfig::resolve(&none, Some("x")).unwrap_err().code, 2);
    }

    #[test]
    fn file_then_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"seed": 9, "budget": 500, "margin_tol": 1e-4, "cases": ["circle", {"id": "c01"}]}"#)
            .unwrap();
        let args = CommonArgs { config: Some(path.clone()), budget: Some(700), ..CommonArgs::default() };
        let cfg = RunConfig::resolve(&args, Some("7")).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.budget.samples, 700);
        assert_eq!(cfg.margin_tol, 1e-4);
        assert_eq!(cfg.cases.as_ref().unwrap().len(), 2);
        std::fs::write(&path, r#"{"sede": 9}"#).unwrap();
        assert_eq!(RunConfig::resolve(&args, None).unwrap_err().code, 2);
    }

    #[test]
    fn rejects_bad_tolerances() {
        for args in [
            CommonArgs { margin_tol: Some(0.0), ..CommonArgs::default() },
            CommonArgs { angle_tol: Some(-1.0), ..CommonArgs::default() },
            CommonArgs { eta: Some(1.0), ..CommonArgs::default() },
            CommonArgs { budget: Some(0), ..CommonArgs::default() },
            CommonArgs { jobs: Some(0), ..CommonArgs::default() },
            CommonArgs { m_max: Some(0), ..CommonArgs::default() },
        ] {
            assert_eq!(RunConfig::resolve(&args, None).unwrap_err().code, 2);
        }
    }
}
