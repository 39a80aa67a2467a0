//! Seeded batch experiments.
//!
//! Trial `i` of a sweep with seed `s` draws all of its randomness from
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`, so any single trial
//! can be rerun in isolation and results do not depend on thread count.

pub mod criteria;

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auditor::{
    audit_trace, AuditParams, AuditReport, AuditRow, CheckCount, STRICT_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::experts::ExpertPolicy;
use crate::instance::{Instance, VersionSpace};
use crate::learners::{
    run_episode, EpisodeOptions, LearnerConfig, LearnerState, RunParameters, SelectionRule,
    TraceStep, TrialResult,
};
use crate::protocol::{run_step, ProtocolState, QueryId};
use crate::spaces::{GridThresholdSpace, SpaceSpec, SparseComponentSpace};

pub const DEFAULT_TRIALS: u64 = 200;

/// Generator for trial `trial` of a sweep seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Runs `trials` independent trials in parallel, in trial order.
pub fn run_trials<T, F>(seed: u64, trials: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut ChaCha8Rng) -> Result<T> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|i| f(i, &mut trial_rng(seed, i)))
        .collect()
}

/// `p + 3·sqrt(p(1-p)/n)`.
pub fn binomial_tolerance(p: f64, n: u64) -> f64 {
    p + 3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Nearest-rank percentile.
fn percentile(values: &[u64], p: f64) -> u64 {
    if values.is_empty() {
        return 0;
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    let rank = ((p * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

/// Parses `rule` or `stick-with-it/rule`. Without an explicit `k` the
/// stick-with-it epoch is `recommended`.
pub fn parse_learner(text: &str, k: Option<u64>, recommended: u64) -> Result<LearnerConfig> {
    let text = text.trim();
    let named = match text {
        "threshold-min" => Some(LearnerConfig::threshold_min()),
        "max-disagreement" => Some(LearnerConfig::max_disagreement()),
        _ => None,
    };
    match text.split_once('/') {
        Some((schedule, rule)) if schedule.starts_with("stick") => {
            LearnerConfig::stick_with_it(k.unwrap_or(recommended), rule.parse()?)
        }
        Some(("base", rule)) => Ok(LearnerConfig::base(rule.parse()?)),
        Some((schedule, _)) => Err(Error::InvalidParameters(format!(
            "unknown schedule '{schedule}'"
        ))),
        None => match named {
            Some(l) => Ok(l),
            None => Ok(LearnerConfig::base(text.parse::<SelectionRule>()?)),
        },
    }
}

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}

fn default_learner() -> String {
    "threshold-min".into()
}

/// One sweep: a space, an expert, a learner and the accuracy target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    /// A table, or the `kind:key=value` shorthand.
    #[serde(deserialize_with = "SpaceSpec::deserialize_either")]
    pub space: SpaceSpec,
    pub expert: String,
    /// `rule`, `base/rule` or `stick-with-it/rule`.
    #[serde(default = "default_learner")]
    pub learner: String,
    pub epsilon: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    /// Replay every trace through the auditor.
    #[serde(default)]
    pub audit: bool,
}

/// A file of `[[experiment]]` tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub experiment: Vec<ExperimentSpec>,
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::MalformedSpec(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

/// Everything a sweep needs, built once and shared by all trials.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub instance: Instance,
    pub expert: ExpertPolicy,
    pub learner: LearnerConfig,
    pub params: RunParameters,
}

impl ExperimentSpec {
    pub fn resolve(&self) -> Result<Resolved> {
        if self.trials == 0 {
            return Err(Error::InvalidParameters("trials must be at least 1".into()));
        }
        let instance = Instance::new(self.space.build()?);
        let expert: ExpertPolicy = self.expert.parse()?;
        let recommended =
            RunParameters::recommended_k(self.epsilon, self.delta, instance.num_hypotheses());
        let learner = parse_learner(&self.learner, self.k, recommended)?;
        let params = RunParameters::for_learner(&instance, &learner, self.epsilon, self.delta)?;
        Ok(Resolved {
            instance,
            expert,
            learner,
            params,
        })
    }
}

/// Audit totals over many traces.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub traces: u64,
    pub cap_violations: u64,
    pub mass_conservation_errors: u64,
    pub good_oversampled_violations: u64,
    pub oversample_bound: CheckCount,
    pub phase2: CheckCount,
    /// Traces that reached step `N`.
    pub capped_mass_evaluated: u64,
    /// Of those, traces without the elimination-failure event whose capped
    /// mass fell short of `(1-ε')N`.
    pub capped_mass_failures: u64,
    pub capped_mass_min: Option<f64>,
    pub bad_mass_events: u64,
}

impl AuditSummary {
    pub fn add(&mut self, report: &AuditReport, eps_prime: f64) {
        self.traces += 1;
        self.cap_violations += report.cap_violations;
        self.mass_conservation_errors += report.mass_conservation_errors;
        self.good_oversampled_violations += report.good_oversampled_violations;
        self.oversample_bound.evaluated += report.oversample_bound_checks.evaluated;
        self.oversample_bound.violated += report.oversample_bound_checks.violated;
        self.phase2.evaluated += report.phase2_checks.evaluated;
        self.phase2.violated += report.phase2_checks.violated;
        self.bad_mass_events += report.bad_mass_event as u64;
        if let Some(v) = report.capped_mass_ratio {
            self.capped_mass_evaluated += 1;
            self.capped_mass_min = Some(self.capped_mass_min.map_or(v, |m| m.min(v)));
            if !report.bad_mass_event && v < 1.0 - eps_prime - STRICT_TOLERANCE {
                self.capped_mass_failures += 1;
            }
        }
    }

    pub fn merge(&mut self, other: &AuditSummary) {
        self.traces += other.traces;
        self.cap_violations += other.cap_violations;
        self.mass_conservation_errors += other.mass_conservation_errors;
        self.good_oversampled_violations += other.good_oversampled_violations;
        self.oversample_bound.evaluated += other.oversample_bound.evaluated;
        self.oversample_bound.violated += other.oversample_bound.violated;
        self.phase2.evaluated += other.phase2.evaluated;
        self.phase2.violated += other.phase2.violated;
        self.capped_mass_evaluated += other.capped_mass_evaluated;
        self.capped_mass_failures += other.capped_mass_failures;
        self.capped_mass_min = match (self.capped_mass_min, other.capped_mass_min) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.bad_mass_events += other.bad_mass_events;
    }

    /// No violation of a deterministic bound.
    pub fn clean(&self) -> bool {
        self.cap_violations == 0
            && self.mass_conservation_errors == 0
            && self.good_oversampled_violations == 0
            && self.oversample_bound.violated == 0
            && self.phase2.violated == 0
            && self.capped_mass_failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub trials: u64,
    pub failures: u64,
    pub failure_rate: f64,
    /// `δ + 3σ` at this trial count.
    pub tolerance: f64,
    pub mean_steps: f64,
    pub p95_steps: u64,
    pub mean_switches: f64,
    pub max_switches: u64,
}

impl SweepSummary {
    pub fn from_trials(trials: &[TrialResult], delta: f64) -> Self {
        let n = trials.len() as u64;
        let failures = trials.iter().filter(|t| !t.success).count() as u64;
        let steps: Vec<u64> = trials.iter().map(|t| t.steps_used).collect();
        let switches: Vec<f64> = trials.iter().map(|t| t.switches as f64).collect();
        Self {
            trials: n,
            failures,
            failure_rate: if n == 0 {
                0.0
            } else {
                failures as f64 / n as f64
            },
            tolerance: binomial_tolerance(delta, n.max(1)),
            mean_steps: mean(&steps.iter().map(|&s| s as f64).collect::<Vec<_>>()),
            p95_steps: percentile(&steps, 0.95),
            mean_switches: mean(&switches),
            max_switches: trials.iter().map(|t| t.switches).max().unwrap_or(0),
        }
    }

    pub fn within_tolerance(&self) -> bool {
        self.failure_rate <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: ExperimentSpec,
    pub learner: LearnerConfig,
    pub params: RunParameters,
    pub trials: Vec<TrialResult>,
    pub summary: SweepSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<AuditSummary>,
}

/// `max_{h ∈ V} err_c(h)`.
pub fn max_err_c(instance: &Instance, version: &VersionSpace) -> f64 {
    version
        .iter()
        .map(|h| instance.err_c(h))
        .fold(0.0, f64::max)
}

fn collect_sweep(
    spec: &ExperimentSpec,
    resolved: &Resolved,
    outcomes: Vec<(TrialResult, Option<AuditReport>)>,
) -> SweepResult {
    let mut audit = spec.audit.then(AuditSummary::default);
    let mut trials = Vec::with_capacity(outcomes.len());
    for (t, report) in outcomes {
        if let (Some(sum), Some(r)) = (audit.as_mut(), report.as_ref()) {
            sum.add(r, resolved.params.eps_prime);
        }
        trials.push(t);
    }
    SweepResult {
        spec: spec.clone(),
        learner: resolved.learner,
        params: resolved.params,
        summary: SweepSummary::from_trials(&trials, spec.delta),
        trials,
        audit,
    }
}

fn stamp(result: &mut TrialResult, spec: &ExperimentSpec, trial: u64) {
    result.seed = spec.seed;
    result.trial = trial;
    result.space = spec.space.to_string();
}

/// Full runs with verification: a trial succeeds if the learner certifies a
/// hypothesis within `2N` steps and that hypothesis truly has error `≤ ε`.
pub fn verify_upper_bound(spec: &ExperimentSpec) -> Result<SweepResult> {
    let r = spec.resolve()?;
    let audit_params = AuditParams::from_run(&r.params);
    let options = EpisodeOptions {
        record_trace: spec.audit,
        ..EpisodeOptions::default()
    };
    let outcomes = run_trials(spec.seed, spec.trials, |i, rng| {
        let ep = run_episode(&r.instance, &r.learner, &r.expert, &r.params, &options, rng)?;
        let report = if spec.audit {
            Some(audit_trace(&r.instance, &ep.trace, &r.expert, &audit_params, false)?.0)
        } else {
            None
        };
        let mut result = ep.result;
        stamp(&mut result, spec, i);
        Ok((result, report))
    })?;
    Ok(collect_sweep(spec, &r, outcomes))
}

/// One full run, audited step by step. Uses the same random stream as
/// trial `trial` of [`verify_upper_bound`].
pub fn audit_trial(
    spec: &ExperimentSpec,
    trial: u64,
) -> Result<(TrialResult, AuditReport, Vec<AuditRow>)> {
    let r = spec.resolve()?;
    let ep = run_episode(
        &r.instance,
        &r.learner,
        &r.expert,
        &r.params,
        &EpisodeOptions::default(),
        &mut trial_rng(spec.seed, trial),
    )?;
    let (report, rows) = audit_trace(
        &r.instance,
        &ep.trace,
        &r.expert,
        &AuditParams::from_run(&r.params),
        true,
    )?;
    let mut result = ep.result;
    stamp(&mut result, spec, trial);
    Ok((result, report, rows))
}

/// Runs exactly `N` steps and checks that every surviving hypothesis has
/// per-component error below `ε`.
pub fn verify_phase1_generalization(spec: &ExperimentSpec) -> Result<SweepResult> {
    let r = spec.resolve()?;
    let audit_params = AuditParams::from_run(&r.params);
    let options = EpisodeOptions {
        stop_when_verified: false,
        max_steps: Some(r.params.n_steps),
        record_trace: spec.audit,
    };
    let outcomes = run_trials(spec.seed, spec.trials, |i, rng| {
        let ep = run_episode(&r.instance, &r.learner, &r.expert, &r.params, &options, rng)?;
        let report = if spec.audit {
            Some(audit_trace(&r.instance, &ep.trace, &r.expert, &audit_params, false)?.0)
        } else {
            None
        };
        let worst = max_err_c(&r.instance, &ep.state.version);
        let mut result = ep.result;
        stamp(&mut result, spec, i);
        result.phase1_max_err_c = Some(worst);
        result.success = worst < spec.epsilon;
        Ok((result, report))
    })?;
    Ok(collect_sweep(spec, &r, outcomes))
}

/// Interaction driven by `learner` and `expert` until `done` holds for the
/// state reached, or `limit` steps. Returns the steps taken and the trace.
fn drive<R, F>(
    instance: &Instance,
    learner: LearnerConfig,
    expert: &ExpertPolicy,
    limit: u64,
    rng: &mut R,
    mut done: F,
) -> Result<(ProtocolState, LearnerState, Vec<TraceStep>)>
where
    R: rand::Rng + ?Sized,
    F: FnMut(&ProtocolState, &mut LearnerState, &mut R) -> Result<bool>,
{
    let mut state = ProtocolState::new(instance);
    let mut ls = LearnerState::new(learner);
    let mut trace = Vec::new();
    while !done(&state, &mut ls, rng)? {
        if state.step >= limit {
            return Err(Error::InvalidParameters(format!(
                "no result within {limit} steps"
            )));
        }
        let step = state.step + 1;
        let (h, selected) = ls.hypothesis_for_step(instance, &state.version, step, rng)?;
        let outcome = run_step(instance, &mut state, h, expert, rng)?;
        ls.observe(&outcome.record);
        trace.push(TraceStep {
            step,
            hypothesis: h,
            selected,
            record: outcome.record,
        });
    }
    Ok((state, ls, trace))
}

/// Rounds of the repeated single query `(1/c, ..., 1)`, corrected at its
/// most glaring flaw each time, until the learner's threshold has
/// per-component error at most 1/2.
pub fn run_single_query_lower_bound(c: usize) -> Result<u64> {
    if c < 2 || !c.is_multiple_of(2) {
        return Err(Error::InvalidParameters(format!(
            "c = {c} must be even and at least 2"
        )));
    }
    let instance = Instance::new(std::sync::Arc::new(GridThresholdSpace::single_query(c)?));
    let learner = LearnerConfig::threshold_min();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (state, _, _) = drive(
        &instance,
        learner,
        &ExpertPolicy::GlaringFlaw,
        c as u64,
        &mut rng,
        |state, ls, rng| {
            let (h, _) = ls.hypothesis_for_step(&instance, &state.version, state.step + 1, rng)?;
            Ok(instance.err_c(h) <= 0.5 + STRICT_TOLERANCE)
        },
    )?;
    Ok(state.step)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundResult {
    pub c: usize,
    pub epsilon: f64,
    pub trials: u64,
    pub seed: u64,
    /// Steps until every consistent hypothesis has `err_c ≤ ε`, per trial.
    pub steps: Vec<u64>,
    /// Draws of the rare query by then, per trial.
    pub rare_draws: Vec<u64>,
    pub mean_steps: f64,
    pub p5_steps: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<AuditSummary>,
}

/// Two-query construction: the rare query carries mass `2ε`. A threshold
/// learner corrected at the most glaring flaw must see the rare query `c/2`
/// times before every consistent hypothesis has `err_c ≤ ε`.
pub fn run_two_point_lower_bound(
    c: usize,
    epsilon: f64,
    trials: u64,
    seed: u64,
) -> Result<LowerBoundResult> {
    run_two_point_lower_bound_with(c, epsilon, trials, seed, None)
}

/// As [`run_two_point_lower_bound`], auditing every trace against the
/// sample sizes for confidence `1 - delta` when `audit_delta` is set.
pub fn run_two_point_lower_bound_with(
    c: usize,
    epsilon: f64,
    trials: u64,
    seed: u64,
    audit_delta: Option<f64>,
) -> Result<LowerBoundResult> {
    if !(epsilon > 0.0 && epsilon < 0.25) {
        return Err(Error::InvalidParameters(format!(
            "epsilon = {epsilon} not in (0, 1/4)"
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidParameters("trials must be at least 1".into()));
    }
    let instance = Instance::new(std::sync::Arc::new(GridThresholdSpace::two_point(
        c, epsilon,
    )?));
    let learner = LearnerConfig::threshold_min();
    let expert = ExpertPolicy::GlaringFlaw;
    let audit_params = audit_delta
        .map(|d| {
            RunParameters::new(epsilon, d, instance.num_hypotheses(), c, 1)
                .map(|p| AuditParams::from_run(&p))
        })
        .transpose()?;
    // Far beyond the negative-binomial tail.
    let limit = (200.0 * c as f64 / epsilon) as u64 + 1000;
    let outcomes = run_trials(seed, trials, |_, rng| {
        let (state, _, trace) = drive(&instance, learner, &expert, limit, rng, |state, _, _| {
            Ok(max_err_c(&instance, &state.version) <= epsilon + STRICT_TOLERANCE)
        })?;
        let rare = state
            .transcript
            .records()
            .iter()
            .filter(|r| r.query == QueryId(0))
            .count() as u64;
        let report = match &audit_params {
            Some(p) => Some((
                audit_trace(&instance, &trace, &expert, p, false)?.0,
                p.eps_prime,
            )),
            None => None,
        };
        Ok((state.step, rare, report))
    })?;
    let mut audit = audit_params.map(|_| AuditSummary::default());
    let (mut steps, mut rare_draws) = (Vec::new(), Vec::new());
    for (s, r, report) in outcomes {
        steps.push(s);
        rare_draws.push(r);
        if let (Some(sum), Some((rep, eps_prime))) = (audit.as_mut(), report) {
            sum.add(&rep, eps_prime);
        }
    }
    Ok(LowerBoundResult {
        c,
        epsilon,
        trials,
        seed,
        mean_steps: mean(&steps.iter().map(|&s| s as f64).collect::<Vec<_>>()),
        p5_steps: percentile(&steps, 0.05),
        steps,
        rare_draws,
        audit,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseLowerBoundResult {
    pub l: usize,
    pub c: usize,
    pub epsilon: f64,
    pub trials: u64,
    pub seed: u64,
    /// Queries answered before the learner first holds a hypothesis of error `< ε`.
    pub queries: Vec<u64>,
    /// Hypothesis changes by then.
    pub changes: Vec<u64>,
    pub mean_queries: f64,
    /// `c·ℓ/(2ε)`.
    pub reference: f64,
}

/// Max-disagreement learner on the sparse space: every rare query has to be
/// corrected on each of its `c` components before the learner stops marking it.
pub fn run_sparse_lower_bound(
    l: usize,
    c: usize,
    epsilon: f64,
    trials: u64,
    seed: u64,
) -> Result<SparseLowerBoundResult> {
    if trials == 0 {
        return Err(Error::InvalidParameters("trials must be at least 1".into()));
    }
    let space = SparseComponentSpace::new(l, c, epsilon, crate::spaces::DEFAULT_HYPOTHESIS_CAP)?;
    let instance = Instance::new(std::sync::Arc::new(space));
    let learner = LearnerConfig::max_disagreement();
    let expert = ExpertPolicy::RandomIncorrect;
    let limit = (200.0 * (c * l) as f64 / epsilon) as u64 + 1000;
    let outcomes = run_trials(seed, trials, |_, rng| {
        let (state, ls, _) = drive(&instance, learner, &expert, limit, rng, |state, ls, rng| {
            let (h, _) = ls.hypothesis_for_step(&instance, &state.version, state.step + 1, rng)?;
            Ok(instance.err(h) < epsilon - STRICT_TOLERANCE)
        })?;
        Ok((state.step, ls.switches))
    })?;
    let (queries, changes): (Vec<u64>, Vec<u64>) = outcomes.into_iter().unzip();
    Ok(SparseLowerBoundResult {
        l,
        c,
        epsilon,
        trials,
        seed,
        mean_queries: mean(&queries.iter().map(|&s| s as f64).collect::<Vec<_>>()),
        reference: c as f64 * l as f64 / (2.0 * epsilon),
        queries,
        changes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(space: &str, expert: &str, learner: &str, trials: u64) -> ExperimentSpec {
        ExperimentSpec {
            name: "t".into(),
            space: space.parse().unwrap(),
            expert: expert.into(),
            learner: learner.into(),
            epsilon: 0.2,
            delta: 0.1,
            k: None,
            trials,
            seed: 3,
            audit: true,
        }
    }

    #[test]
    fn learner_strings() {
        assert_eq!(
            parse_learner("threshold-min", None, 9).unwrap(),
            LearnerConfig::threshold_min()
        );
        assert_eq!(
            parse_learner("stick-with-it/max-ones", None, 9).unwrap(),
            LearnerConfig::stick_with_it(9, SelectionRule::MaxOnes).unwrap()
        );
        assert_eq!(parse_learner("stick/first", Some(4), 9).unwrap().epoch(), 4);
        assert_eq!(
            parse_learner("random", None, 9).unwrap(),
            LearnerConfig::base(SelectionRule::SeededRandom)
        );
        assert!(parse_learner("eager/first", None, 9).is_err());
        assert!(parse_learner("bogus", None, 9).is_err());
    }

    #[test]
    fn trial_streams_are_independent_of_order() {
        use rand::Rng;
        let a: Vec<u64> = run_trials(7, 5, |_, rng| Ok(rng.gen())).unwrap();
        let b: u64 = trial_rng(7, 3).gen();
        assert_eq!(a[3], b);
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn audit_trial_matches_the_sweep() {
        let s = spec("grid:M=20,c=3", "random", "threshold-min", 4);
        let sweep = verify_upper_bound(&s).unwrap();
        let (result, report, rows) = audit_trial(&s, 2).unwrap();
        assert_eq!(result, sweep.trials[2]);
        assert!(report.is_clean());
        assert_eq!(rows.len() as u64, result.steps_used);
    }

    #[test]
    fn percentile_nearest_rank() {
        assert_eq!(percentile(&[5, 1, 3, 2, 4], 0.95), 5);
        assert_eq!(percentile(&[5, 1, 3, 2, 4], 0.05), 1);
        assert_eq!(percentile(&[], 0.5), 0);
    }

    #[test]
    fn learner_starting_at_the_target_always_succeeds() {
        // The lowest id is the target threshold 0.
        let r = verify_upper_bound(&spec("single:c=2", "largest", "first", 20)).unwrap();
        assert_eq!(r.summary.failures, 0);
        assert!(r
            .trials
            .iter()
            .all(|t| t.steps_used == r.params.verify_window));
    }

    #[test]
    fn upper_bound_sweep_is_reproducible_and_audited() {
        let s = spec("grid:M=30,c=3,pool=40", "random", "threshold-min", 12);
        let a = verify_upper_bound(&s).unwrap();
        let b = verify_upper_bound(&s).unwrap();
        assert_eq!(a, b);
        let audit = a.audit.unwrap();
        assert_eq!(audit.traces, 12);
        assert!(audit.clean(), "{audit:?}");
        assert!(a.trials.iter().all(|t| t.steps_used <= a.params.budget));
    }

    #[test]
    fn phase1_uses_exactly_n_steps() {
        let s = spec(
            "sparse:l=2,c=2,eps=0.2",
            "adversarial",
            "stick-with-it/max-ones",
            8,
        );
        let r = verify_phase1_generalization(&s).unwrap();
        for t in &r.trials {
            assert_eq!(t.steps_used, r.params.n_steps);
            assert_eq!(t.success, t.phase1_max_err_c.unwrap() < 0.2);
        }
    }

    #[test]
    fn max_err_c_extremes() {
        let inst = Instance::new(std::sync::Arc::new(
            SparseComponentSpace::new(2, 2, 0.25, 100).unwrap(),
        ));
        assert!(max_err_c(&inst, &inst.full_version_space()) >= 0.2);
        let mut vs = inst.full_version_space();
        for q in 0..inst.num_queries() {
            for j in 0..2 {
                vs.restrict_pair(
                    &inst,
                    QueryId(q),
                    crate::protocol::ComponentIndex(j),
                    crate::protocol::Answer(0),
                );
            }
        }
        assert_eq!(max_err_c(&inst, &vs), 0.0);
    }

    #[test]
    fn single_query_rounds() {
        for c in [2, 10, 20] {
            assert_eq!(run_single_query_lower_bound(c).unwrap(), c as u64 / 2);
        }
        assert!(run_single_query_lower_bound(3).is_err());
    }

    #[test]
    fn two_point_needs_half_c_rare_draws() {
        let r = run_two_point_lower_bound_with(6, 0.1, 30, 1, Some(0.1)).unwrap();
        assert!(r.rare_draws.iter().all(|&d| d == 3));
        assert!(r.audit.unwrap().clean());
        assert!(run_two_point_lower_bound(4, 0.3, 10, 0).is_err());
    }

    #[test]
    fn sparse_changes_at_least_c_times() {
        let r = run_sparse_lower_bound(2, 3, 0.25, 30, 0).unwrap();
        assert_eq!(r.reference, 12.0);
        assert!(r.changes.iter().all(|&k| k >= 3));
        assert!(r.queries.iter().all(|&q| q >= 6));
    }
}
