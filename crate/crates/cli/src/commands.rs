use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, Context};
use invsep::casebook::{self, CaseReport, CASE_IDS};
use invsep::poly::DEFAULT_DEGREE_CAP;
use invsep::setspec::{
    find_complex_exponent, find_even_exponent, separation_report, SearchOptions, SeparationReport, Separator, SetSpec,
    Verdict,
};
use invsep::symmetrize::{m_symmetrization, NumericSymmetrization};
use invsep::{Field, Group, GroupSpec, Polynomial};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{read_json, CaseSelection, Format, RunConfig};
use crate::error::{CliError, EXIT_CAPABILITY, EXIT_NEGATIVE, EXIT_OK};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetrizeInput {
    pub q: Polynomial,
    pub group: GroupSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default, with = "casebook::scalar::nested")]
    pub points: Vec<Vec<Complex64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparateInput {
    pub q: Polynomial,
    pub group: GroupSpec,
    pub set: SetSpec,
    #[serde(with = "casebook::scalar::vec")]
    pub z: Vec<Complex64>,
    /// Test this exponent only instead of searching.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
}

#[derive(Serialize)]
struct TermRow {
    exp: String,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct ValueRow {
    index: usize,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct NumericOutput {
    m: u32,
    values: Vec<Complex64>,
}

#[derive(Serialize)]
struct CheckRow<'a> {
    index: usize,
    case: &'a str,
    desc: &'a str,
    lhs: f64,
    rel: &'a str,
    rhs: f64,
    slack: f64,
    pass: bool,
}

fn to_json(v: &impl Serialize) -> Result<Vec<u8>, CliError> {
    let mut s = serde_json::to_string_pretty(v).context("serializing output")?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn to_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).context("writing CSV")?;
    }
    Ok(w.into_inner().map_err(|e| anyhow!("writing CSV: {e}"))?)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

/// `S_G(Q^m)` expanded, or evaluated at `points` when `numeric` is set.
pub fn cmd_symmetrize(input: &Path, m: Option<u32>, numeric: bool, cfg: &RunConfig) -> Result<u8, CliError> {
    let input: SymmetrizeInput = read_json(input)?;
    let m = m.or(input.m).unwrap_or(1);
    let group = input.group.build()?;
    let bytes = if numeric {
        if input.points.is_empty() {
            return Err(CliError::usage(anyhow!("--numeric needs `points` in the input")));
        }
        let sym = NumericSymmetrization::new(&input.q, &group, m)?;
        let values = input.points.iter().map(|w| sym.eval(w)).collect::<invsep::Result<Vec<_>>>()?;
        match cfg.format {
            Format::Json => to_json(&NumericOutput { m, values })?,
            Format::Csv => to_csv(values.iter().enumerate().map(|(index, v)| ValueRow { index, re: v.re, im: v.im }))?,
        }
    } else {
        let p = m_symmetrization(&input.q, &group, m, DEFAULT_DEGREE_CAP).map_err(|e| match e {
            invsep::Error::DegreeCapExceeded { .. } => CliError::capability(anyhow!(
                "{e}; rerun with --numeric and input `points` to evaluate without expanding"
            )),
            e => e.into(),
        })?;
        match cfg.format {
            Format::Json => to_json(&p)?,
            Format::Csv => to_csv(p.terms().map(|(mono, c)| TermRow {
                exp: mono.exponents().iter().map(u32::to_string).collect::<Vec<_>>().join(" "),
                re: c.re,
                im: c.im,
            }))?,
        }
    };
    emit(cfg.out.as_deref(), &bytes)?;
    Ok(EXIT_OK)
}

fn is_real_set(set: &SetSpec) -> bool {
    match set {
        SetSpec::LpBall { field, .. } => *field == Field::Real,
        SetSpec::PointCloud { points } => points.iter().flatten().all(|c| c.im == 0.0),
        SetSpec::Named { .. } => false,
    }
}

/// Circle/torus groups: tries `S_G(Q^m)` for `m = 1..=m_max` directly.
fn torus_search(
    q: &Polynomial,
    group: &Group,
    set: &SetSpec,
    z: &[Complex64],
    opts: &SearchOptions,
) -> invsep::Result<SeparationReport> {
    let mut steps = Vec::new();
    let mut last = None;
    let mut all_constant = true;
    let mut reached = 0;
    for m in 1..=opts.m_max {
        let exponent = u32::try_from(m).map_err(|_| invsep::Error::InvalidArgument("exponent too large".into()))?;
        let p = match m_symmetrization(q, group, exponent, DEFAULT_DEGREE_CAP) {
            Ok(p) => p,
            Err(invsep::Error::DegreeCapExceeded { .. }) => break,
            Err(e) => return Err(e),
        };
        all_constant &= p.terms().all(|(mono, _)| mono.degree() == 0);
        let report = separation_report(&p, set, z, Some(m), opts)?;
        steps.push(report.steps[0].clone());
        reached = m;
        if report.separated() {
            return Ok(SeparationReport { steps, ..report });
        }
        last = Some(report);
    }
    let mut report =
        last.ok_or_else(|| invsep::Error::DegreeCapExceeded { degree: q.max_degree(), cap: DEFAULT_DEGREE_CAP })?;
    report.steps = steps;
    if all_constant {
        report.verdict = Verdict::NotSeparated;
        report.note = Some(format!(
            "S_G(Q^m) is constant for every m <= {reached}: only constants are invariant under this group action, so no invariant polynomial separates z"
        ));
    } else {
        report.verdict = Verdict::Inconclusive;
        report.m = None;
        report.note = Some(format!("no S_G(Q^m) separated for m <= {reached}; this is not a disproof"));
    }
    Ok(report)
}

/// Fixed-`m` check, or the real/complex exponent search chosen from the input's field.
pub fn separate(input: &SeparateInput, opts: &SearchOptions, eta: Option<f64>) -> invsep::Result<SeparationReport> {
    let group = input.group.build()?;
    if input.q.dim() != group.dim() {
        return Err(invsep::Error::DimensionMismatch { expected: group.dim(), found: input.q.dim() });
    }
    let set = input.set.resolve()?;
    let z = &input.z;
    if let Some(m) = input.m {
        let sep = Separator::build(&input.q, &group, m)?;
        return separation_report(&sep, &set, z, Some(u64::from(m)), opts);
    }
    let finite = match &group {
        Group::Torus(_) => return torus_search(&input.q, &group, &set, z, opts),
        Group::Finite(g) => g,
    };
    let first = separation_report(&Separator::build(&input.q, &group, 1)?, &set, z, Some(1), opts)?;
    if first.separated() {
        return Ok(first);
    }
    let real = input.q.field() == Field::Real && is_real_set(&set) && z.iter().all(|c| c.im == 0.0);
    let searched = if real {
        find_even_exponent(&input.q, &group, &set, z, opts).map(|s| {
            let mut report = s.report;
            report
                .note
                .get_or_insert_with(|| "real search: the separator is P_2m = S_G((Q/t)^(2m)) with index m".into());
            report
        })
    } else {
        find_complex_exponent(&input.q, finite, &set, z, eta, opts).map(|s| s.report)
    };
    match searched {
        Err(invsep::Error::NotSeparating { sup, value }) => Ok(SeparationReport {
            verdict: Verdict::NotSeparated,
            note: Some(format!(
                "Q does not separate: |Q(z)| = {value} <= sup_K |Q| = {sup}; the exponent searches need |Q(z)| > sup_K |Q|"
            )),
            ..first
        }),
        other => other,
    }
}

pub fn cmd_separate(input: &Path, cfg: &RunConfig) -> Result<u8, CliError> {
    let input: SeparateInput = read_json(input)?;
    let report = separate(&input, &cfg.search_options(), cfg.eta)?;
    let bytes = match cfg.format {
        Format::Json => to_json(&report)?,
        Format::Csv => to_csv(&report.steps)?,
    };
    emit(cfg.out.as_deref(), &bytes)?;
    Ok(match report.verdict {
        Verdict::Separated => EXIT_OK,
        Verdict::NotSeparated => EXIT_NEGATIVE,
        Verdict::Inconclusive => EXIT_CAPABILITY,
    })
}

fn check_id(id: &str) -> Result<(), CliError> {
    if CASE_IDS.contains(&id) {
        Ok(())
    } else {
        Err(CliError::usage(anyhow!("unknown case {id:?}; known cases: {}", CASE_IDS.join(", "))))
    }
}

/// The `(id, params)` entries selected by flags, else by the config file, else the full suite.
pub fn select_cases(ids: &[String], params: Option<&Path>, cfg: &RunConfig) -> Result<Vec<(String, Value)>, CliError> {
    for id in ids {
        check_id(id)?;
    }
    let suite = casebook::suite();
    let by_ids = |ids: &[&str]| suite.iter().filter(|(id, _)| ids.contains(&id.as_str())).cloned().collect::<Vec<_>>();
    if let Some(path) = params {
        let [id] = ids else {
            return Err(CliError::usage(anyhow!("--params needs exactly one --case")));
        };
        return Ok(vec![(id.clone(), read_json(path)?)]);
    }
    if !ids.is_empty() {
        return Ok(by_ids(&ids.iter().map(String::as_str).collect::<Vec<_>>()));
    }
    let Some(selections) = &cfg.cases else {
        return Ok(suite);
    };
    let mut out = Vec::new();
    for sel in selections {
        match sel {
            CaseSelection::Id(id) => {
                check_id(id)?;
                out.extend(by_ids(&[id.as_str()]));
            }
            CaseSelection::Entry { id, params } => {
                check_id(id)?;
                out.push((id.clone(), params.clone()));
            }
        }
    }
    Ok(out)
}

/// Runs the entries on `jobs` threads; results keep the entry order.
pub fn run_cases(entries: &[(String, Value)], cfg: &RunConfig) -> Vec<invsep::Result<CaseReport>> {
    let ctx = cfg.case_context();
    let jobs = cfg.jobs.clamp(1, entries.len().max(1));
    let mut results: Vec<Option<invsep::Result<CaseReport>>> = entries.iter().map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|t| {
                scope.spawn(move || {
                    (t..entries.len())
                        .step_by(jobs)
                        .map(|i| (i, casebook::run_case(&entries[i].0, &entries[i].1, &ctx)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("case worker panicked") {
                results[i] = Some(r);
            }
        }
    });
    results.into_iter().map(|r| r.expect("every entry is assigned to a worker")).collect()
}

fn summary(reports: &[CaseReport]) -> String {
    let mut s = String::new();
    for (i, r) in reports.iter().enumerate() {
        let passed = r.checks.iter().filter(|c| c.pass).count();
        s.push_str(&format!(
            "{i:>3}  {:<15} {}  {:<14} {passed}/{} checks\n",
            r.case,
            if r.pass { "PASS" } else { "FAIL" },
            r.verdict.as_deref().unwrap_or("-"),
            r.checks.len()
        ));
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    s.push_str(&format!("{} cases, {} passed, {failed} failed\n", reports.len(), reports.len() - failed));
    s
}

pub fn checks_csv(reports: &[CaseReport]) -> Result<Vec<u8>, CliError> {
    to_csv(reports.iter().enumerate().flat_map(|(index, r)| {
        r.checks.iter().map(move |c| CheckRow {
            index,
            case: &r.case,
            desc: &c.desc,
            lhs: c.lhs,
            rel: &c.rel,
            rhs: c.rhs,
            slack: c.slack,
            pass: c.pass,
        })
    }))
}

pub fn cmd_casebook(ids: &[String], params: Option<&Path>, list: bool, cfg: &RunConfig) -> Result<u8, CliError> {
    if list {
        emit(None, format!("{}\n", CASE_IDS.join("\n")).as_bytes())?;
        return Ok(EXIT_OK);
    }
    let entries = select_cases(ids, params, cfg)?;
    let mut reports = Vec::with_capacity(entries.len());
    for ((id, _), result) in entries.iter().zip(run_cases(&entries, cfg)) {
        let report = result.map_err(|e| {
            let err = CliError::from(e);
            CliError { code: err.code, error: err.error.context(format!("case {id}")) }
        })?;
        reports.push(report);
    }
    match &cfg.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for (i, r) in reports.iter().enumerate() {
                emit(Some(&dir.join(format!("{i:02}_{}.json", r.case))), &to_json(r)?)?;
            }
            emit(Some(&dir.join("checks.csv")), &checks_csv(&reports)?)?;
            emit(None, summary(&reports).as_bytes())?;
        }
        None => {
            let bytes = match cfg.format {
                Format::Json => to_json(&reports)?,
                Format::Csv => checks_csv(&reports)?,
            };
            emit(None, &bytes)?;
            eprint!("{}", summary(&reports));
        }
    }
    Ok(if reports.iter().all(|r| r.pass) { EXIT_OK } else { EXIT_NEGATIVE })
}
