use invsep::casebook::{run_suite, CaseContext, CaseReport};

fn outcome(reports: &[CaseReport]) -> Vec<(String, bool, Option<String>)> {
    reports.iter().map(|r| (r.case.clone(), r.pass, r.verdict.clone())).collect()
}

#[test]
fn other_seeds_flip_no_pass_fail_or_verdict() {
    let base = outcome(&run_suite(&CaseContext::default()).unwrap());
    assert!(base.iter().all(|(_, pass, _)| *pass));
    for seed in [1, 2, 3, 4, 5] {
        let ctx = CaseContext { seed, ..CaseContext::default() };
        assert_eq!(outcome(&run_suite(&ctx).unwrap()), base, "seed {seed}");
    }
}
