//! Hypothesis selection schedules and full learning episodes.
//!
//! The base learner holds a consistent hypothesis at every step. The
//! stick-with-it learner only reconsiders its hypothesis every `k` steps and
//! keeps it through the epoch even after feedback contradicts it. Both stop
//! once the current hypothesis has been accepted on enough consecutive steps
//! to certify its whole-query error is at most `ε`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experts::ExpertPolicy;
use crate::instance::{Instance, VersionSpace};
use crate::protocol::{run_step, FeedbackRecord, HypothesisId, ProtocolState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionRule {
    /// Lowest consistent id.
    FirstIndex,
    /// Uniform among consistent hypotheses.
    SeededRandom,
    /// Most non-zero answers, ties to the lowest id.
    MaxOnes,
    /// Largest consistent threshold (threshold spaces only).
    LargestThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    Base,
    StickWithIt { k: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub schedule: Schedule,
    pub rule: SelectionRule,
}

impl LearnerConfig {
    pub fn base(rule: SelectionRule) -> Self {
        Self {
            schedule: Schedule::Base,
            rule,
        }
    }

    pub fn stick_with_it(k: u64, rule: SelectionRule) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameters("k must be at least 1".into()));
        }
        Ok(Self {
            schedule: Schedule::StickWithIt { k },
            rule,
        })
    }

    /// Base learner that holds the largest consistent threshold, i.e. sits just
    /// below the smallest corrected point.
    pub fn threshold_min() -> Self {
        Self::base(SelectionRule::LargestThreshold)
    }

    /// Base learner that disagrees with the all-zero target as much as feedback allows.
    pub fn max_disagreement() -> Self {
        Self::base(SelectionRule::MaxOnes)
    }

    pub fn epoch(&self) -> u64 {
        match self.schedule {
            Schedule::Base => 1,
            Schedule::StickWithIt { k } => k,
        }
    }
}

impl fmt::Display for SelectionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectionRule::FirstIndex => "first",
            SelectionRule::SeededRandom => "random",
            SelectionRule::MaxOnes => "max-ones",
            SelectionRule::LargestThreshold => "threshold-min",
        })
    }
}

impl FromStr for SelectionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "first" | "first-index" => SelectionRule::FirstIndex,
            "random" | "seeded-random" => SelectionRule::SeededRandom,
            "max-ones" | "maxones" | "max-disagreement" => SelectionRule::MaxOnes,
            "threshold-min" | "largest-threshold" => SelectionRule::LargestThreshold,
            other => {
                return Err(Error::InvalidParameters(format!(
                    "unknown selection rule '{other}'"
                )))
            }
        })
    }
}

impl fmt::Display for LearnerConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.schedule {
            Schedule::Base => write!(f, "base/{}", self.rule),
            Schedule::StickWithIt { k } => write!(f, "stick-with-it(k={k})/{}", self.rule),
        }
    }
}

/// Sample-size quantities for a run at accuracy `ε` and confidence `1 - δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunParameters {
    pub epsilon: f64,
    pub delta: f64,
    /// `ln(|H| / δ)`.
    pub ell: f64,
    /// `ε / 2`.
    pub eps_prime: f64,
    pub k: u64,
    pub components: usize,
    /// `⌈c · (ℓ/ε' + k)⌉`, the length of the first phase.
    pub n_steps: u64,
    /// `2N`.
    pub budget: u64,
    /// Consecutive accepts needed to certify a hypothesis: `⌈ℓ/ε'⌉`.
    pub verify_window: u64,
}

/// Ceiling that ignores float noise just above an integer.
fn ceil_count(x: f64) -> u64 {
    (x - 1e-9).ceil().max(0.0) as u64
}

impl RunParameters {
    pub fn new(
        epsilon: f64,
        delta: f64,
        hypotheses: usize,
        components: usize,
        k: u64,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameters(format!(
                "epsilon = {epsilon} not in (0, 1)"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameters(format!(
                "delta = {delta} not in (0, 1)"
            )));
        }
        if k == 0 || hypotheses == 0 || components == 0 {
            return Err(Error::InvalidParameters(
                "k, |H| and c must be positive".into(),
            ));
        }
        let ell = (hypotheses as f64 / delta).ln();
        let eps_prime = epsilon / 2.0;
        let n_steps = ceil_count(components as f64 * (ell / eps_prime + k as f64));
        Ok(Self {
            epsilon,
            delta,
            ell,
            eps_prime,
            k,
            components,
            n_steps,
            budget: 2 * n_steps,
            verify_window: goodness_window(epsilon, delta, hypotheses),
        })
    }

    pub fn for_learner(
        instance: &Instance,
        learner: &LearnerConfig,
        epsilon: f64,
        delta: f64,
    ) -> Result<Self> {
        Self::new(
            epsilon,
            delta,
            instance.num_hypotheses(),
            instance.components(),
            learner.epoch(),
        )
    }

    /// Epoch length `⌈ℓ/ε'⌉`, for which at most `4c` hypotheses are ever used.
    pub fn recommended_k(epsilon: f64, delta: f64, hypotheses: usize) -> u64 {
        goodness_window(epsilon, delta, hypotheses).max(1)
    }

    /// Oversampling threshold `τ = N / c`.
    pub fn tau(&self) -> f64 {
        self.n_steps as f64 / self.components as f64
    }
}

/// `⌈ln(|H|/δ) / (ε/2)⌉`.
pub fn goodness_window(epsilon: f64, delta: f64, hypotheses: usize) -> u64 {
    ceil_count((hypotheses as f64 / delta).ln() / (epsilon / 2.0))
}

/// True iff the last `⌈ln(|H|/δ)/ε'⌉` records are all accepts. If the hypothesis
/// had error at least `ε`, this passes with probability at most `δ/|H|`.
pub fn goodness_check(
    window: &[FeedbackRecord],
    epsilon: f64,
    delta: f64,
    hypotheses: usize,
) -> bool {
    let need = goodness_window(epsilon, delta, hypotheses) as usize;
    window.len() >= need
        && window[window.len() - need..]
            .iter()
            .all(FeedbackRecord::is_accept)
}

/// Picks a member of the version space according to `rule`.
pub fn select_hypothesis<R: Rng + ?Sized>(
    instance: &Instance,
    version: &VersionSpace,
    rule: SelectionRule,
    rng: &mut R,
) -> Result<HypothesisId> {
    if version.is_empty() {
        return Err(Error::EmptyVersionSpace);
    }
    let chosen = match rule {
        SelectionRule::FirstIndex => version.first(),
        SelectionRule::SeededRandom => {
            let i = rng.gen_range(0..version.len());
            version.iter().nth(i)
        }
        SelectionRule::MaxOnes => version
            .iter()
            .max_by_key(|&h| (instance.ones(h), std::cmp::Reverse(h.0))),
        SelectionRule::LargestThreshold => {
            let space = instance.space();
            if space.threshold(HypothesisId(0)).is_none() {
                return Err(Error::UnsupportedPolicy {
                    policy: rule.to_string(),
                    reason: "space has no thresholds".into(),
                });
            }
            version.iter().max_by(|a, b| {
                let (ta, tb) = (space.threshold(*a).unwrap(), space.threshold(*b).unwrap());
                ta.total_cmp(&tb).then(b.0.cmp(&a.0))
            })
        }
    };
    Ok(chosen.expect("version space is non-empty"))
}

/// One executed step, as needed to replay or audit a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub step: u64,
    pub hypothesis: HypothesisId,
    /// The hypothesis was (re)chosen at the start of this step: an epoch
    /// boundary, or every step for the base schedule.
    pub selected: bool,
    pub record: FeedbackRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Verified,
    BudgetExhausted,
    StepLimit,
}

/// Per-run summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub seed: u64,
    pub trial: u64,
    pub space: String,
    pub policy: String,
    pub learner: String,
    pub c: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub k: u64,
    pub steps_used: u64,
    /// Times the current hypothesis changed to a different one.
    pub switches: u64,
    /// Calls to the selection rule.
    pub selections: u64,
    pub final_hypothesis: HypothesisId,
    pub final_err: f64,
    pub termination: Termination,
    /// Verified within the budget and truly `(1-ε)`-good.
    pub success: bool,
    /// First step whose current hypothesis had error at most `ε`.
    pub first_good_step: Option<u64>,
    pub corrections: u64,
    /// Largest per-component error left in the version space after a
    /// fixed-length first phase.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase1_max_err_c: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct EpisodeOptions {
    /// Stop as soon as the goodness check passes.
    pub stop_when_verified: bool,
    /// Hard step limit; defaults to the `2N` budget.
    pub max_steps: Option<u64>,
    pub record_trace: bool,
}

impl Default for EpisodeOptions {
    fn default() -> Self {
        Self {
            stop_when_verified: true,
            max_steps: None,
            record_trace: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Episode {
    pub result: TrialResult,
    pub trace: Vec<TraceStep>,
    pub state: ProtocolState,
}

/// Learner-side state carried between steps.
#[derive(Debug, Clone)]
pub struct LearnerState {
    pub config: LearnerConfig,
    pub current: Option<HypothesisId>,
    pub switches: u64,
    pub selections: u64,
    /// Consecutive accepts of the current hypothesis.
    pub streak: u64,
}

impl LearnerState {
    pub fn new(config: LearnerConfig) -> Self {
        Self {
            config,
            current: None,
            switches: 0,
            selections: 0,
            streak: 0,
        }
    }

    /// Hypothesis to display at `step` (1-based). Returns it and whether it
    /// was (re)chosen now.
    pub fn hypothesis_for_step<R: Rng + ?Sized>(
        &mut self,
        instance: &Instance,
        version: &VersionSpace,
        step: u64,
        rng: &mut R,
    ) -> Result<(HypothesisId, bool)> {
        let boundary = (step - 1).is_multiple_of(self.config.epoch());
        match self.current {
            Some(h) if !boundary => Ok((h, false)),
            // A still-consistent hypothesis is a valid choice for every rule.
            Some(h) if version.contains(h) => Ok((h, true)),
            previous => {
                let h = select_hypothesis(instance, version, self.config.rule, rng)?;
                self.selections += 1;
                if previous.is_some_and(|p| p != h) {
                    self.switches += 1;
                    self.streak = 0;
                }
                self.current = Some(h);
                Ok((h, true))
            }
        }
    }

    pub fn observe(&mut self, record: &FeedbackRecord) {
        if record.is_accept() {
            self.streak += 1;
        } else {
            self.streak = 0;
        }
    }
}

/// Runs the protocol until the current hypothesis is verified or the step
/// limit is reached.
pub fn run_episode<R: Rng + ?Sized>(
    instance: &Instance,
    learner: &LearnerConfig,
    expert: &ExpertPolicy,
    params: &RunParameters,
    options: &EpisodeOptions,
    rng: &mut R,
) -> Result<Episode> {
    let mut state = ProtocolState::new(instance);
    let mut ls = LearnerState::new(*learner);
    let mut trace = Vec::new();
    let limit = options.max_steps.unwrap_or(params.budget);
    let mut termination = if limit >= params.budget {
        Termination::BudgetExhausted
    } else {
        Termination::StepLimit
    };
    let mut first_good_step = None;
    let mut corrections = 0;
    let mut verified = false;

    for step in 1..=limit {
        let (h, selected) = ls.hypothesis_for_step(instance, &state.version, step, rng)?;
        if first_good_step.is_none() && instance.err(h) <= params.epsilon {
            first_good_step = Some(step);
        }
        let outcome = run_step(instance, &mut state, h, expert, rng)?;
        ls.observe(&outcome.record);
        if !outcome.accepted {
            corrections += 1;
        }
        if options.record_trace {
            trace.push(TraceStep {
                step,
                hypothesis: h,
                selected,
                record: outcome.record,
            });
        }
        if ls.streak >= params.verify_window {
            verified = true;
            if options.stop_when_verified {
                termination = Termination::Verified;
                break;
            }
        }
    }

    let final_hypothesis = ls.current.expect("at least one step ran");
    let final_err = instance.err(final_hypothesis);
    let result = TrialResult {
        seed: 0,
        trial: 0,
        space: instance.space().describe(),
        policy: expert.name().to_string(),
        learner: learner.to_string(),
        c: instance.components(),
        epsilon: params.epsilon,
        delta: params.delta,
        k: learner.epoch(),
        steps_used: state.step,
        switches: ls.switches,
        selections: ls.selections,
        final_hypothesis,
        final_err,
        termination,
        success: verified && final_err <= params.epsilon,
        first_good_step,
        corrections,
        phase1_max_err_c: None,
    };
    Ok(Episode {
        result,
        trace,
        state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{Answer, ComponentIndex, QueryId, Transcript};
    use crate::spaces::{GridThresholdSpace, SparseComponentSpace};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    #[test]
    fn run_parameters_match_hand_computation() {
        // ln(1010) = 6.9177..., N = ceil(4 * (69.177 + 1)) = 281.
        let p = RunParameters::new(0.2, 0.1, 101, 4, 1).unwrap();
        assert!((p.ell - 1010f64.ln()).abs() < 1e-12);
        assert_eq!(p.n_steps, 281);
        assert_eq!(p.budget, 562);
        assert_eq!(p.verify_window, 70);
        assert!(RunParameters::new(0.0, 0.1, 10, 2, 1).is_err());
        assert!(RunParameters::new(0.2, 1.0, 10, 2, 1).is_err());
        assert!(RunParameters::new(0.2, 0.1, 10, 2, 0).is_err());
    }

    #[test]
    fn goodness_examples() {
        assert_eq!(goodness_window(0.5, 0.1, 9), 18);
        let accepts: Vec<FeedbackRecord> = (1..=18)
            .map(|s| FeedbackRecord::accept(s, QueryId(0), vec![Answer(0)]))
            .collect();
        assert!(goodness_check(&accepts, 0.5, 0.1, 9));
        assert!(!goodness_check(&accepts[1..], 0.5, 0.1, 9));
        let mut with_fix = accepts.clone();
        with_fix[10] = FeedbackRecord::correct(11, QueryId(0), ComponentIndex(0), Answer(1));
        assert!(!goodness_check(&with_fix, 0.5, 0.1, 9));
    }

    #[test]
    fn threshold_min_selection() {
        let space = GridThresholdSpace::new(10, vec![vec![0.7, 0.3]], vec![1.0]).unwrap();
        let inst = Instance::new(Arc::new(space));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let vs = inst.full_version_space();
        let h = select_hypothesis(&inst, &vs, SelectionRule::LargestThreshold, &mut rng).unwrap();
        assert_eq!(inst.space().threshold(h), Some(1.0));

        let t = Transcript::from_records([
            FeedbackRecord::correct(1, QueryId(0), ComponentIndex(0), Answer(1)),
            FeedbackRecord::correct(2, QueryId(0), ComponentIndex(1), Answer(1)),
        ])
        .unwrap();
        let vs = inst.consistent_set(&t);
        let h = select_hypothesis(&inst, &vs, SelectionRule::LargestThreshold, &mut rng).unwrap();
        // Largest grid threshold strictly below the smallest corrected point 0.3.
        assert!((inst.space().threshold(h).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn max_ones_marks_the_rare_query() {
        let inst = Instance::new(Arc::new(
            SparseComponentSpace::new(1, 2, 0.25, 1_000_000).unwrap(),
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let h = select_hypothesis(
            &inst,
            &inst.full_version_space(),
            SelectionRule::MaxOnes,
            &mut rng,
        )
        .unwrap();
        assert_eq!(inst.ones(h), 1);
        assert_eq!(inst.err(h), 0.5);
    }

    #[test]
    fn empty_version_space_is_an_error() {
        let inst = Instance::new(Arc::new(
            SparseComponentSpace::new(1, 1, 0.25, 1_000_000).unwrap(),
        ));
        let mut vs = inst.full_version_space();
        vs.restrict_pair(&inst, QueryId(0), ComponentIndex(0), Answer(0));
        vs.restrict_pair(&inst, QueryId(0), ComponentIndex(0), Answer(1));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            select_hypothesis(&inst, &vs, SelectionRule::FirstIndex, &mut rng),
            Err(Error::EmptyVersionSpace)
        );
    }

    #[test]
    fn singleton_space_verifies_without_corrections() {
        let space = GridThresholdSpace::new(1, vec![vec![1.0]], vec![1.0]).unwrap();
        let inst = Instance::with_target(Arc::new(space), HypothesisId(0)).unwrap();
        // Threshold 0 and 1 both exist; make h* the only candidate by feedback-free first index.
        let learner = LearnerConfig::base(SelectionRule::FirstIndex);
        let params = RunParameters::for_learner(&inst, &learner, 0.2, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ep = run_episode(
            &inst,
            &learner,
            &ExpertPolicy::Largest,
            &params,
            &EpisodeOptions::default(),
            &mut rng,
        )
        .unwrap();
        assert_eq!(ep.result.termination, Termination::Verified);
        assert_eq!(ep.result.corrections, 0);
        assert_eq!(ep.result.steps_used, params.verify_window);
        assert!(ep.result.success);
    }

    #[test]
    fn episodes_are_deterministic_and_base_stays_consistent() {
        let inst = Instance::new(Arc::new(
            GridThresholdSpace::uniform_pool(50, 3, 100, 2).unwrap(),
        ));
        let learner = LearnerConfig::threshold_min();
        let params = RunParameters::for_learner(&inst, &learner, 0.2, 0.1).unwrap();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            run_episode(
                &inst,
                &learner,
                &ExpertPolicy::RandomIncorrect,
                &params,
                &EpisodeOptions::default(),
                &mut rng,
            )
            .unwrap()
        };
        let (a, b) = (run(9), run(9));
        assert_eq!(a.result, b.result);
        assert_eq!(a.trace, b.trace);

        // Replaying the trace: every displayed hypothesis was consistent with the
        // feedback before its step.
        let mut t = Transcript::new();
        for s in &a.trace {
            assert!(inst.is_consistent(s.hypothesis, &t), "step {}", s.step);
            t.append(s.record.clone()).unwrap();
        }
        assert!(inst.is_consistent(inst.target(), &t));
    }

    #[test]
    fn stick_with_it_keeps_hypothesis_within_epochs() {
        let inst = Instance::new(Arc::new(
            SparseComponentSpace::new(2, 3, 0.25, 1_000_000).unwrap(),
        ));
        let k = 7;
        let learner = LearnerConfig::stick_with_it(k, SelectionRule::MaxOnes).unwrap();
        let params = RunParameters::for_learner(&inst, &learner, 0.2, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ep = run_episode(
            &inst,
            &learner,
            &ExpertPolicy::Largest,
            &params,
            &EpisodeOptions::default(),
            &mut rng,
        )
        .unwrap();
        for w in ep.trace.windows(2) {
            if (w[1].step - 1) % k != 0 {
                assert_eq!(w[0].hypothesis, w[1].hypothesis);
                assert!(!w[1].selected);
            }
        }
        assert!(ep.result.selections <= params.budget.div_ceil(k));
    }
}
