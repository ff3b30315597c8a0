use std::path::{Path, PathBuf};
use std::process::Command;

use invsep::casebook::{self, CaseContext, CaseReport};
use invsep::setspec::{SearchOptions, SupBudget};
use invsep::symmetrize::{eval_m_symmetrization, m_symmetrization};
use invsep::{GroupSpec, Polynomial};
use invsep_cli::commands::{separate, SeparateInput};
use num_complex::Complex64;
use serde_json::{json, Value};

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn invsep(args: &[&str], env_seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_invsep"));
    cmd.args(args).env_remove("INVSEP_SEED");
    if let Some(s) = env_seed {
        cmd.env("INVSEP_SEED", s);
    }
    let out = cmd.output().expect("binary runs");
    Output {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(v).unwrap()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn monomial_poly(dim: usize, field: &str, terms: &[(&[u32], f64, f64)]) -> Value {
    json!({
        "dim": dim,
        "field": field,
        "terms": terms.iter().map(|(e, re, im)| json!({"exp": e, "re": re, "im": im})).collect::<Vec<_>>(),
    })
}

#[test]
fn symmetrize_square_over_sym3() {
    let dir = tempfile::tempdir().unwrap();
    let q = monomial_poly(3, "R", &[(&[2, 0, 0], 1.0, 0.0)]);
    let input = write(dir.path(), "in.json", &json!({"q": q, "group": {"kind": "symN", "n": 3}}));
    let out = invsep(&["symmetrize", s(&input)], None);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let p = Polynomial::from_json(&out.stdout).unwrap();
    assert_eq!(p.len(), 3);
    for (_, c) in p.terms() {
        assert!((c.re - 1.0 / 3.0).abs() < 1e-15 && c.im == 0.0);
    }
    let q: Polynomial = serde_json::from_value(q).unwrap();
    let group = GroupSpec::SymN { n: 3, dim: None }.build().unwrap();
    assert_eq!(p, m_symmetrization(&q, &group, 1, 64).unwrap());
}

#[test]
fn symmetrize_power_over_trivial_group() {
    let dir = tempfile::tempdir().unwrap();
    let q = monomial_poly(2, "R", &[(&[1, 0], 1.0, 0.0), (&[0, 1], 2.0, 0.0)]);
    let group = json!({"kind": "custom", "dim": 2, "generators": []});
    let input = write(dir.path(), "in.json", &json!({"q": q, "group": group, "m": 2}));
    let out = invsep(&["symmetrize", s(&input)], None);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let p = Polynomial::from_json(&out.stdout).unwrap();
    let q: Polynomial = serde_json::from_value(q).unwrap();
    assert!(p.max_coeff_diff(&q.mul(&q).unwrap()) < 1e-15);

    let out_path = dir.path().join("terms.csv");
    let out = invsep(&["symmetrize", s(&input), "-m", "1", "--format", "csv", "--out", s(&out_path)], None);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(csv, "exp,re,im\n1 0,1.0,0.0\n0 1,2.0,0.0\n");
}

#[test]
fn symmetrize_degree_overflow_and_numeric_mode() {
    let dir = tempfile::tempdir().unwrap();
    let q = monomial_poly(2, "C", &[(&[1, 0], 1.0, 0.0), (&[0, 1], 0.0, 0.5)]);
    let point = [[0.3, 0.1], [-0.2, 0.4]];
    let input =
        write(dir.path(), "in.json", &json!({"q": q, "group": {"kind": "symN", "n": 2}, "m": 80, "points": [point]}));
    let out = invsep(&["symmetrize", s(&input)], None);
    assert_eq!(out.code, 3);
    assert!(out.stderr.contains("--numeric"), "{}", out.stderr);

    let out = invsep(&["symmetrize", s(&input), "--numeric"], None);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["m"], 80);
    let got = Complex64::new(v["values"][0][0].as_f64().unwrap(), v["values"][0][1].as_f64().unwrap());
    let q: Polynomial = serde_json::from_value(q).unwrap();
    let group = GroupSpec::SymN { n: 2, dim: None }.build().unwrap();
    let w = [Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.4)];
    let want = eval_m_symmetrization(&q, &group, 80, &w).unwrap();
    assert!((got - want).norm() <= 1e-12 * want.norm().max(1e-300));

    let no_points = write(dir.path(), "np.json", &json!({"q": q, "group": {"kind": "symN", "n": 2}}));
    assert_eq!(invsep(&["symmetrize", s(&no_points), "--numeric"], None).code, 2);
}

#[test]
fn parse_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    assert_eq!(invsep(&["symmetrize", s(&bad)], None).code, 2);
    assert_eq!(invsep(&["separate", s(&bad)], None).code, 2);
    assert_eq!(invsep(&["separate", s(&dir.path().join("missing.json"))], None).code, 2);
    assert_eq!(invsep(&["casebook", "--bogus"], None).code, 2);
    assert_eq!(invsep(&["casebook", "--margin-tol", "-1"], None).code, 2);
    let mismatch = write(
        dir.path(),
        "mm.json",
        &json!({
            "q": monomial_poly(2, "R", &[(&[1, 0], 1.0, 0.0)]),
            "group": {"kind": "symN", "n": 3},
            "set": {"kind": "lp_ball", "dim": 3, "p": 2},
            "z": [2, 0, 0],
        }),
    );
    assert_eq!(invsep(&["separate", s(&mismatch)], None).code, 2);
}

fn trivial_problem() -> Value {
    json!({
        "q": monomial_poly(2, "R", &[(&[1, 0], 1.0, 0.0)]),
        "group": {"kind": "custom", "dim": 2, "generators": []},
        "set": {"kind": "lp_ball", "dim": 2, "p": 2},
        "z": [1.5, 0],
    })
}

#[test]
fn separate_trivial_group() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.json", &trivial_problem());
    let out = invsep(&["separate", s(&input), "--budget", "2000"], None);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["m"], 1);
    assert_eq!(v["verdict"], "separated");
    for key in ["sup", "witness", "value_at_z", "margin", "seed", "budget"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["budget"], 2000);

    let out = invsep(&["separate", s(&input), "--budget", "2000", "--format", "csv"], None);
    assert_eq!(out.code, 0);
    assert!(out.stdout.starts_with("m,sup,value,margin\n1,"), "{}", out.stdout);
}

#[test]
fn separate_circle_reports_constant_invariants() {
    let dir = tempfile::tempdir().unwrap();
    let problem = json!({
        "q": monomial_poly(1, "C", &[(&[1], 1.0, 0.0)]),
        "group": {"kind": "circle", "dim": 1},
        "set": {"kind": "lp_ball", "dim": 1, "p": 2, "field": "C"},
        "z": [2],
    });
    let input = write(dir.path(), "in.json", &problem);
    let out = invsep(&["separate", s(&input), "--budget", "500", "--m-max", "10"], None);
    assert_eq!(out.code, 1, "{}", out.stderr);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "not_separated");
    assert!(v["note"].as_str().unwrap().contains("only constants are invariant"));
    assert_eq!(v["steps"].as_array().unwrap().len(), 10);
}

#[test]
fn separate_even_search_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let problem = json!({
        "q": monomial_poly(2, "R", &[(&[1, 0], 1.0, 0.0)]),
        "group": {"kind": "symN", "n": 2},
        "set": {"kind": "lp_ball", "dim": 2, "p": 2},
        "z": [1.2, 0],
    });
    let input = write(dir.path(), "in.json", &problem);
    let out_path = dir.path().join("report.json");
    let out = invsep(&["separate", s(&input), "--budget", "3000", "--seed", "5", "--out", s(&out_path)], None);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let cli: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(cli["verdict"], "separated");
    assert_eq!(cli["m"], 1);
    assert!(cli["note"].as_str().unwrap().contains("P_2m"));

    let parsed: SeparateInput = serde_json::from_value(problem).unwrap();
    let opts = SearchOptions { budget: SupBudget::samples(3000), seed: 5, ..SearchOptions::default() };
    let lib = serde_json::to_value(separate(&parsed, &opts, None).unwrap()).unwrap();
    assert_eq!(cli, lib);
}

#[test]
fn separate_complex_search() {
    let dir = tempfile::tempdir().unwrap();
    let problem = json!({
        "q": monomial_poly(2, "C", &[(&[0, 1], 1.0, 0.0)]),
        "group": {"kind": "r_trunc", "n": 2},
        "set": {"kind": "lp_ball", "dim": 2, "p": 2, "field": "C"},
        "z": [0, 1.2],
    });
    let input = write(dir.path(), "in.json", &problem);
    let out = invsep(&["separate", s(&input), "--budget", "3000"], None);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "separated");
    let m = v["m"].as_u64().unwrap();
    assert!(m >= 2 && m.is_multiple_of(2), "m = {m}");
}

#[test]
fn separate_fixed_m_and_non_separating_q() {
    let dir = tempfile::tempdir().unwrap();
    let mut problem = trivial_problem();
    problem["z"] = json!([0.5, 0.0]);
    let input = write(dir.path(), "in.json", &problem);
    let out = invsep(&["separate", s(&input), "--budget", "2000"], None);
    assert_eq!(out.code, 1);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert!(v["note"].as_str().unwrap().contains("Q does not separate"));

    problem["z"] = json!([1.5, 0.0]);
    problem["m"] = json!(3);
    let input = write(dir.path(), "fixed.json", &problem);
    let out = invsep(&["separate", s(&input), "--budget", "2000"], None);
    assert_eq!(out.code, 0);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["m"], 3);
    assert!((v["value_at_z"].as_f64().unwrap() - 3.375).abs() < 1e-12);
}

#[test]
fn seed_from_environment_only_without_flag() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.json", &trivial_problem());
    let seed_of = |out: Output| serde_json::from_str::<Value>(&out.stdout).unwrap()["seed"].as_u64().unwrap();
    assert_eq!(seed_of(invsep(&["separate", s(&input), "--budget", "100"], None)), 42);
    assert_eq!(seed_of(invsep(&["separate", s(&input), "--budget", "100"], Some("17"))), 17);
    assert_eq!(seed_of(invsep(&["separate", s(&input), "--budget", "100", "--seed", "3"], Some("17"))), 3);
    assert_eq!(invsep(&["separate", s(&input)], Some("seventeen")).code, 2);
}

#[test]
fn casebook_unknown_id_and_list() {
    let out = invsep(&["casebook", "--case", "no_such_case"], None);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("unknown case"));
    let out = invsep(&["casebook", "--list"], None);
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout.lines().collect::<Vec<_>>(), casebook::CASE_IDS);
}

#[test]
fn casebook_params_file_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let params = json!({"g0": 1.2, "g1": -1});
    let path = write(dir.path(), "params.json", &params);
    let out = invsep(&["casebook", "--case", "c01", "--params", s(&path), "--budget", "4000"], None);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let cli: Vec<CaseReport> = serde_json::from_str(&out.stdout).unwrap();
    let ctx = CaseContext { budget: SupBudget::samples(4000), ..CaseContext::default() };
    assert_eq!(cli, vec![casebook::run_case("c01", &params, &ctx).unwrap()]);
    assert_eq!(invsep(&["casebook", "--params", s(&path)], None).code, 2);
}

#[test]
fn casebook_budget_override_keeps_verdicts() {
    let verdicts = |budget: &str| {
        let out = invsep(&["casebook", "--case", "roots_unity", "--case", "power_sums", "--budget", budget], None);
        assert_eq!(out.code, 0, "{}", out.stderr);
        let reports: Vec<CaseReport> = serde_json::from_str(&out.stdout).unwrap();
        reports.into_iter().map(|r| (r.case, r.verdict)).collect::<Vec<_>>()
    };
    let default = verdicts("20000");
    assert_eq!(default.len(), 7);
    assert_eq!(verdicts("3000"), default);
}

#[test]
fn casebook_config_file_selection() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        &json!({"seed": 7, "budget": 2000, "cases": ["hahn_banach", {"id": "lp01", "params": {"x": {"level": 0, "coeffs": [2]}, "p": 1, "k": 1}}]}),
    );
    let out = invsep(&["casebook", "--config", s(&cfg), "--format", "csv"], None);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.starts_with("index,case,desc,lhs,rel,rhs,slack,pass\n"));
    let cases: Vec<&str> = out.stdout.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert!(cases.iter().take_while(|c| **c == "hahn_banach").count() > 0);
    assert_eq!(*cases.last().unwrap(), "lp01");
    assert!(out.stderr.contains("3 cases, 3 passed, 0 failed"), "{}", out.stderr);
}

#[test]
fn full_casebook_is_deterministic_across_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let out_a = invsep(&["casebook", "--out", s(&a), "--jobs", "1"], None);
    assert_eq!(out_a.code, 0, "{}{}", out_a.stdout, out_a.stderr);
    let out_b = invsep(&["casebook", "--out", s(&b), "--jobs", "4"], None);
    assert_eq!(out_b.code, 0);
    assert_eq!(out_a.stdout, out_b.stdout);
    let suite = casebook::suite();
    assert!(out_a.stdout.contains(&format!("{n} cases, {n} passed, 0 failed", n = suite.len())));

    let mut names: Vec<String> =
        std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names.len(), suite.len() + 1);
    assert_eq!(names[0], "00_counterexample.json");
    for name in &names {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    let csv = std::fs::read_to_string(a.join("checks.csv")).unwrap();
    let total: usize = names
        .iter()
        .filter(|n| n.ends_with(".json"))
        .map(|n| {
            let r: CaseReport = serde_json::from_str(&std::fs::read_to_string(a.join(n)).unwrap()).unwrap();
            assert!(r.pass, "{n}");
            r.checks.len()
        })
        .sum();
    assert_eq!(csv.lines().count(), total + 1);
}
