//! The bare interaction loop: a fixed learner answer, an expert, and the
//! version space shrinking as feedback arrives.
//!
//! cargo run -p partial-correction --example protocol_loop

use partial_correction::spaces::GridThresholdSpace;
use partial_correction::{run_step, ExpertPolicy, HypothesisId, Instance, ProtocolState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn main() -> partial_correction::Result<()> {
    let space = GridThresholdSpace::uniform_pool(20, 4, 32, 1)?;
    let instance = Instance::new(Arc::new(space));
    let mut state = ProtocolState::new(&instance);
    let mut rng = ChaCha8Rng::seed_from_u64(0);

    // Keep showing the largest still-consistent threshold.
    for _ in 0..12 {
        let h: HypothesisId = state
            .version
            .iter()
            .last()
            .expect("target is always consistent");
        let out = run_step(
            &instance,
            &mut state,
            h,
            &ExpertPolicy::GlaringFlaw,
            &mut rng,
        )?;
        println!(
            "step {:>2}  show {:<10} {:<28} |V| = {}",
            out.record.step,
            instance.space().render_hypothesis(h),
            if out.accepted {
                "accepted".to_string()
            } else {
                format!("{:?}", out.record.kind)
            },
            state.version.len()
        );
    }
    println!("\ntranscript:\n{}", state.transcript.to_jsonl());
    Ok(())
}
