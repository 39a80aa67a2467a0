//! Base and stick-with-it learners on the same instance, with the sample
//! sizes they are run against.
//!
//! cargo run -p partial-correction --example learners

use partial_correction::experiments::trial_rng;
use partial_correction::learners::{
    run_episode, EpisodeOptions, LearnerConfig, RunParameters, SelectionRule,
};
use partial_correction::{ExpertPolicy, Instance, SpaceSpec};

fn main() -> partial_correction::Result<()> {
    let spec: SpaceSpec = "grid:M=100,c=4".parse()?;
    let instance = Instance::new(spec.build()?);
    let (eps, delta) = (0.2, 0.1);
    let k = RunParameters::recommended_k(eps, delta, instance.num_hypotheses());
    let learners = [
        LearnerConfig::threshold_min(),
        LearnerConfig::base(SelectionRule::SeededRandom),
        LearnerConfig::stick_with_it(k, SelectionRule::SeededRandom)?,
    ];
    for learner in learners {
        let params = RunParameters::for_learner(&instance, &learner, eps, delta)?;
        println!(
            "{learner}: N = {}, budget = {}, verify after {} accepts",
            params.n_steps, params.budget, params.verify_window
        );
        for trial in 0..3 {
            let ep = run_episode(
                &instance,
                &learner,
                &ExpertPolicy::RandomIncorrect,
                &params,
                &EpisodeOptions::default(),
                &mut trial_rng(0, trial),
            )?;
            let r = ep.result;
            println!(
                "  trial {trial}: {:?} after {} steps, {} switches, final err {:.3}",
                r.termination, r.steps_used, r.switches, r.final_err
            );
        }
    }
    Ok(())
}
