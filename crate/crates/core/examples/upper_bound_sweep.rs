//! A batch of seeded trials checking that runs certify a good hypothesis
//! within budget, with every trace audited.
//!
//! cargo run --release -p partial-correction --example upper_bound_sweep

use partial_correction::experiments::{
    verify_phase1_generalization, verify_upper_bound, SweepConfig,
};

const CONFIG: &str = r#"
[[experiment]]
name = "grid, random expert"
space = "grid:M=100,c=4"
expert = "random"
epsilon = 0.2
delta = 0.1
trials = 50
audit = true

[[experiment]]
name = "sparse, stick-with-it"
space = { kind = "sparse", l = 3, c = 3, eps = 0.2 }
expert = "adversarial"
learner = "stick-with-it/max-ones"
epsilon = 0.2
delta = 0.1
trials = 50
audit = true
"#;

fn main() -> partial_correction::Result<()> {
    for spec in SweepConfig::from_toml(CONFIG)?.experiment {
        let full = verify_upper_bound(&spec)?;
        let phase1 = verify_phase1_generalization(&spec)?;
        let s = &full.summary;
        println!("{} ({})", spec.name, full.learner);
        println!(
            "  full runs: {} / {} failed (tolerance {:.3}), mean {:.1} steps, max {} switches",
            s.failures, s.trials, s.tolerance, s.mean_steps, s.max_switches
        );
        println!(
            "  after N = {} steps: {} / {} left a bad hypothesis consistent",
            full.params.n_steps, phase1.summary.failures, phase1.summary.trials
        );
        if let Some(a) = &full.audit {
            println!("  audit clean: {} over {} traces", a.clean(), a.traces);
        }
    }
    Ok(())
}
