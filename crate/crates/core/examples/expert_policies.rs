//! How each expert policy picks the component to correct, including a
//! weighted table loaded from CSV.
//!
//! cargo run -p partial-correction --example expert_policies

use partial_correction::experts::ExpertContext;
use partial_correction::spaces::GridThresholdSpace;
use partial_correction::{ExpertPolicy, GammaTable, HypothesisId, Instance, QueryId};
use std::sync::Arc;

fn main() -> partial_correction::Result<()> {
    // One query with points 0.2, 0.4, 0.6, 0.8 and thresholds 0, 0.1, ..., 1.
    let space = GridThresholdSpace::new(10, vec![vec![0.2, 0.4, 0.6, 0.8]], vec![1.0])?;
    let instance = Instance::new(Arc::new(space));
    let q = QueryId(0);
    let h = HypothesisId(9); // threshold 0.9: labels every point 0
    let displayed = instance.evaluate(h, q)?;
    let truth = instance.evaluate(instance.target(), q)?;
    println!("displayed {:?}\ntruth     {:?}\n", displayed, truth);

    let version = instance.full_version_space();
    let ctx = ExpertContext {
        instance: &instance,
        version: Some(&version),
    };
    let gamma =
        GammaTable::from_csv("query,component,gamma\n0,0,1\n0,1,1\n0,2,2\n0,3,4\n".as_bytes())?;
    let policies = [
        ExpertPolicy::Smallest,
        ExpertPolicy::Largest,
        ExpertPolicy::GlaringFlaw,
        ExpertPolicy::RandomIncorrect,
        ExpertPolicy::AdversarialMinShrink,
        ExpertPolicy::GammaTable(gamma),
    ];
    for p in policies {
        let dist = p.gamma_of(&ctx, q, &displayed, &truth)?;
        let shown: Vec<String> = dist
            .iter()
            .map(|(j, g)| format!("#{}:{:.3}", j.0, g))
            .collect();
        println!("{:<13} {}", p.name(), shown.join("  "));
    }
    Ok(())
}
