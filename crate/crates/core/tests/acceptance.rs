//! Acceptance suite: prints one PASS/FAIL line per criterion, then fails if
//! any criterion failed.

use partial_correction::experiments::criteria::{
    criterion1, criterion10, criterion2, criterion3, criterion4, criterion5, criterion6,
    criterion7, criterion8, criterion9, run_upper_bound_suite, two_point_sweeps, CriteriaOptions,
    CriterionOutcome,
};

#[test]
fn acceptance() {
    let opts = CriteriaOptions::default();
    let mut outcomes: Vec<CriterionOutcome> = Vec::new();
    let mut report = |o: CriterionOutcome| {
        println!("{o}");
        outcomes.push(o);
    };

    report(criterion1(&opts).expect("criterion 1"));
    report(criterion2().expect("criterion 2"));
    report(criterion3(&opts).expect("criterion 3"));
    report(criterion4().expect("criterion 4"));
    let (two_point, secs) = two_point_sweeps(&opts).expect("two-point sweeps");
    report(criterion5(&two_point, secs));
    let suite = run_upper_bound_suite(&opts).expect("upper-bound sweeps");
    report(criterion6(&suite));
    report(criterion7(&suite));
    report(criterion8(&suite));
    report(criterion9(&suite, &two_point));
    report(criterion10(&opts).expect("criterion 10"));

    let failed: Vec<u8> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.id)
        .collect();
    println!(
        "acceptance: {} of {} criteria passed",
        outcomes.len() - failed.len(),
        outcomes.len()
    );
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
