//! Record one run and replay it through the auditor, printing the weight
//! totals per step and the invariant report.
//!
//! cargo run -p partial-correction --example audit_run

use partial_correction::experiments::{audit_trial, ExperimentSpec};

fn main() -> partial_correction::Result<()> {
    let spec = ExperimentSpec {
        name: "demo".into(),
        space: "grid:M=50,c=4".parse()?,
        expert: "glaring-flaw".into(),
        learner: "threshold-min".into(),
        epsilon: 0.2,
        delta: 0.1,
        k: None,
        trials: 1,
        seed: 0,
        audit: true,
    };
    let (result, report, rows) = audit_trial(&spec, 0)?;
    println!("step  h    accepted  err    w(bad)  w(good)  capped");
    for r in rows.iter().take(15) {
        println!(
            "{:>4}  {:>3}  {:<8}  {:.3}  {:>6.3}  {:>7.3}  {:>6.3}",
            r.step, r.hypothesis, r.accepted, r.err, r.w_bad, r.w_good, r.capped_total
        );
    }
    println!("... {} steps, {:?}", result.steps_used, result.termination);
    println!("{report:#?}");
    println!("clean: {}", report.is_clean());
    Ok(())
}
