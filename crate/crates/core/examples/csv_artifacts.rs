//! Writing the CSV artifacts; each starts with a `#` line holding the
//! config and seed that produced it.
//!
//! cargo run -p partial-correction --example csv_artifacts

use partial_correction::analytics::{policy_curve, ValuePolicy};
use partial_correction::experiments::{verify_upper_bound, ExperimentSpec};
use partial_correction::output::{parse_header, write_curves, write_trials};

fn main() -> partial_correction::Result<()> {
    let spec = ExperimentSpec {
        name: "csv".into(),
        space: "single:c=6".parse()?,
        expert: "largest".into(),
        learner: "random".into(),
        epsilon: 0.2,
        delta: 0.1,
        k: None,
        trials: 5,
        seed: 11,
        audit: false,
    };
    let sweep = verify_upper_bound(&spec)?;
    let mut trials = Vec::new();
    write_trials(&mut trials, &spec, spec.seed, &sweep.trials)?;
    print!("{}", String::from_utf8_lossy(&trials));

    let curves = vec![
        policy_curve(ValuePolicy::Smallest, 4, 4)?,
        policy_curve(ValuePolicy::Largest, 4, 4)?,
    ];
    let mut out = Vec::new();
    write_curves(
        &mut out,
        &serde_json::json!({"c": [4], "grid": 4}),
        0,
        &curves,
    )?;
    let text = String::from_utf8_lossy(&out);
    print!("\n{text}");
    let (config, seed) = parse_header(text.lines().next().unwrap()).unwrap();
    println!("\nheader config {config}, seed {seed}");
    Ok(())
}
