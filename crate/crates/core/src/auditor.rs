//! Effective sampling weights of a run and the invariants they obey.
//!
//! At step `t` the expert's choice spreads each query's mass `μ(q)` over its
//! components. On incorrectly answered queries that spread is the expert's
//! exact feedback distribution `γ`. On correctly answered queries there is no
//! feedback, and the mass is water-filled onto the least sampled components,
//! never lifting any of them above `t·μ(q)/c`. The auditor replays a trace,
//! maintains the cumulative table `W`, and checks the bounds that drive the
//! upper-bound proof.

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experts::{ExpertContext, ExpertPolicy};
use crate::instance::{Instance, VersionSpace};
use crate::learners::{RunParameters, TraceStep};
use crate::protocol::{Answer, HypothesisId, QueryId};

/// Tolerance on mass sums.
pub const MASS_TOLERANCE: f64 = 1e-9;
/// Slack on strict inequalities.
pub const STRICT_TOLERANCE: f64 = 1e-12;

/// Spreads `mu` over a row whose entries sum to `(t-1)·mu`, filling the
/// smallest entries first up to the level `t·mu/c`. Ties go to the lower index.
pub fn water_fill(prev: &[f64], t: u64, mu: f64, c: usize) -> Result<Vec<f64>> {
    if prev.len() != c || c == 0 || t == 0 {
        return Err(Error::AuditIntegrity(format!(
            "water-fill row of length {} with c = {c}, t = {t}",
            prev.len()
        )));
    }
    if prev.iter().any(|&x| x.is_nan() || x < -STRICT_TOLERANCE) || mu.is_nan() || mu < 0.0 {
        return Err(Error::AuditIntegrity(
            "negative mass in water-fill input".into(),
        ));
    }
    let total: f64 = prev.iter().sum();
    let expected = (t - 1) as f64 * mu;
    if (total - expected).abs() > MASS_TOLERANCE {
        return Err(Error::AuditIntegrity(format!(
            "row holds {total}, expected (t-1)·μ = {expected}"
        )));
    }
    let cap = t as f64 * mu / c as f64;
    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&a, &b| prev[a].total_cmp(&prev[b]).then(a.cmp(&b)));

    let mut w = vec![0.0; c];
    let mut remaining = mu;
    let mut last = None;
    for j in order {
        if remaining <= 0.0 {
            break;
        }
        let room = cap - prev[j];
        if room <= 0.0 {
            continue;
        }
        let take = room.min(remaining);
        w[j] = take;
        remaining -= take;
        last = Some(j);
    }
    // Rounding can leave a sliver unassigned.
    if remaining > MASS_TOLERANCE {
        return Err(Error::AuditIntegrity(format!(
            "{remaining} of μ left unplaced"
        )));
    }
    if remaining > 0.0 {
        if let Some(j) = last {
            w[j] += remaining;
        }
    }
    Ok(w)
}

/// Cumulative effective mass `W_t(q, j)`, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    w: Vec<f64>,
    mu: Vec<f64>,
    c: usize,
    t: u64,
}

impl WeightTable {
    pub fn new(instance: &Instance) -> Self {
        Self {
            w: vec![0.0; instance.num_queries() * instance.components()],
            mu: instance.distribution().weights().to_vec(),
            c: instance.components(),
            t: 0,
        }
    }

    pub fn step(&self) -> u64 {
        self.t
    }

    pub fn components(&self) -> usize {
        self.c
    }

    pub fn mu(&self, q: QueryId) -> f64 {
        self.mu[q.0]
    }

    pub fn get(&self, q: QueryId, j: usize) -> f64 {
        self.w[q.0 * self.c + j]
    }

    pub fn row(&self, q: QueryId) -> &[f64] {
        &self.w[q.0 * self.c..(q.0 + 1) * self.c]
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }

    /// Adds one step of weights and advances `t`.
    pub fn add(&mut self, step: &[f64]) {
        debug_assert_eq!(step.len(), self.w.len());
        for (a, b) in self.w.iter_mut().zip(step) {
            *a += b;
        }
        self.t += 1;
    }

    /// Queries whose row does not sum to `t·μ(q)`.
    pub fn conservation_errors(&self) -> usize {
        (0..self.mu.len())
            .filter(|&q| {
                let s: f64 = self.row(QueryId(q)).iter().sum();
                (s - self.t as f64 * self.mu[q]).abs() > MASS_TOLERANCE
            })
            .count()
    }
}

/// One step's weights `w_t` over every `(q, j)`, plus which rows were water-filled.
#[derive(Debug, Clone, PartialEq)]
pub struct StepWeights {
    pub w: Vec<f64>,
    pub filled: Vec<bool>,
}

/// `w_t` for displayed hypothesis `h` given the table after step `t-1`. The
/// version space is the one the expert sees before answering.
pub fn step_weights(
    instance: &Instance,
    h: HypothesisId,
    expert: &ExpertPolicy,
    version: &VersionSpace,
    table: &WeightTable,
) -> Result<StepWeights> {
    let c = instance.components();
    let nq = instance.num_queries();
    let t = table.step() + 1;
    let ctx = ExpertContext {
        instance,
        version: Some(version),
    };
    let mut w = vec![0.0; nq * c];
    let mut filled = vec![false; nq];
    for q in 0..nq {
        let qid = QueryId(q);
        let mu = table.mu(qid);
        let out = &mut w[q * c..(q + 1) * c];
        if instance.is_correct_on(h, qid) {
            out.copy_from_slice(&water_fill(table.row(qid), t, mu, c)?);
            filled[q] = true;
        } else {
            let shown: Vec<Answer> = instance
                .answers(h, qid)
                .iter()
                .map(|&a| Answer(a))
                .collect();
            let truth: Vec<Answer> = instance.truth(qid).iter().map(|&a| Answer(a)).collect();
            for (j, g) in expert.gamma_of(&ctx, qid, &shown, &truth)? {
                out[j.0] = mu * g;
            }
        }
    }
    Ok(StepWeights { w, filled })
}

fn oversampled(w: f64, tau: f64, mu: f64) -> bool {
    w > tau * mu + STRICT_TOLERANCE
}

/// `{(q, j) : W(q, j) > τ·μ(q)}`, indexed `q·c + j`.
pub fn oversampled_set(table: &WeightTable, tau: f64) -> FixedBitSet {
    let mut set = FixedBitSet::with_capacity(table.w.len());
    for (i, &w) in table.w.iter().enumerate() {
        if oversampled(w, tau, table.mu[i / table.c]) {
            set.insert(i);
        }
    }
    set
}

/// `Ŵ(q, j) = min(W(q, j), τ·μ(q))` per pair, and its total.
pub fn capped_mass(table: &WeightTable, tau: f64) -> (f64, Vec<f64>) {
    let per: Vec<f64> = table
        .w
        .iter()
        .enumerate()
        .map(|(i, &w)| w.min(tau * table.mu[i / table.c]))
        .collect();
    (per.iter().sum(), per)
}

/// `W(B̄(h))`: mass on the components `h` gets wrong.
pub fn bad_mass(instance: &Instance, h: HypothesisId, w: &[f64]) -> f64 {
    let c = instance.components();
    let mut total = 0.0;
    for q in 0..instance.num_queries() {
        let (mine, truth) = (instance.answers(h, QueryId(q)), instance.truth(QueryId(q)));
        for j in 0..c {
            if mine[j] != truth[j] {
                total += w[q * c + j];
            }
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditParams {
    pub tau: f64,
    pub n_steps: u64,
    pub k: u64,
    pub ell: f64,
    pub eps_prime: f64,
}

impl AuditParams {
    pub fn from_run(run: &RunParameters) -> Self {
        Self {
            tau: run.tau(),
            n_steps: run.n_steps,
            k: run.k,
            ell: run.ell,
            eps_prime: run.eps_prime,
        }
    }

    /// Bound on oversampled bad mass per step, `ℓ/(τ-k)`; `None` if `τ ≤ k`.
    pub fn oversample_bound(&self) -> Option<f64> {
        (self.tau > self.k as f64).then(|| self.ell / (self.tau - self.k as f64))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckCount {
    pub evaluated: u64,
    pub violated: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phase2Step {
    pub step: u64,
    pub err: f64,
    pub increment: f64,
    /// Bad mass `k` steps back was below `ℓ`.
    pub precondition: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub steps: u64,
    pub cap_violations: u64,
    pub mass_conservation_errors: u64,
    pub good_oversampled_violations: u64,
    pub oversample_bound_checks: CheckCount,
    /// `Ŵ_N(Q̄)/N`, if the trace reached step `N`.
    pub capped_mass_ratio: Option<f64>,
    /// Some still-consistent hypothesis had accumulated bad mass `≥ ℓ`.
    pub bad_mass_event: bool,
    pub phase2_checks: CheckCount,
    pub phase2_progress: Vec<Phase2Step>,
}

impl AuditReport {
    /// No deterministic check failed.
    pub fn is_clean(&self) -> bool {
        self.cap_violations == 0
            && self.mass_conservation_errors == 0
            && self.good_oversampled_violations == 0
            && self.oversample_bound_checks.violated == 0
            && self.phase2_checks.violated == 0
    }

    /// The capped-mass bound at `N` holds (vacuous if `N` was not reached).
    pub fn capped_mass_bound_holds(&self, eps_prime: f64) -> bool {
        self.capped_mass_ratio
            .is_none_or(|v| v >= 1.0 - eps_prime - STRICT_TOLERANCE)
    }
}

/// Per-step summary of `w_t`, for plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub step: u64,
    pub hypothesis: usize,
    pub selected: bool,
    pub accepted: bool,
    pub err: f64,
    /// `w_t(B̄(h_t))`.
    pub w_bad: f64,
    /// `w_t(Ḡ(h_t))`.
    pub w_good: f64,
    pub w_bad_oversampled: f64,
    pub w_good_oversampled: f64,
    pub oversampled_pairs: usize,
    pub capped_total: f64,
    pub capped_increment: f64,
}

/// Replays `trace` against `instance`, recomputing `w_t` at each step and
/// checking every invariant. Rows are collected only if `emit_rows` is set.
pub fn audit_trace(
    instance: &Instance,
    trace: &[TraceStep],
    expert: &ExpertPolicy,
    params: &AuditParams,
    emit_rows: bool,
) -> Result<(AuditReport, Vec<AuditRow>)> {
    let c = instance.components();
    let nq = instance.num_queries();
    let mut table = WeightTable::new(instance);
    let mut version = instance.full_version_space();
    let k = params.k.max(1) as usize;
    let zeros = vec![0.0; nq * c];
    // W_{t-k}, ..., W_{t-1}.
    let mut history: VecDeque<Vec<f64>> = VecDeque::with_capacity(k + 1);
    let bound = params.oversample_bound();

    let mut report = AuditReport {
        steps: 0,
        cap_violations: 0,
        mass_conservation_errors: 0,
        good_oversampled_violations: 0,
        oversample_bound_checks: CheckCount::default(),
        capped_mass_ratio: None,
        bad_mass_event: false,
        phase2_checks: CheckCount::default(),
        phase2_progress: Vec::new(),
    };
    let mut rows = Vec::new();
    let mut capped_prev = 0.0;

    for (i, ts) in trace.iter().enumerate() {
        let t = i as u64 + 1;
        if ts.step != t || ts.record.step != t {
            return Err(Error::AuditIntegrity(format!(
                "trace entry {i} has step {} (record step {}), expected {t}",
                ts.step, ts.record.step
            )));
        }
        instance.validate_record(&ts.record)?;
        instance.check_hypothesis(ts.hypothesis)?;
        let h = ts.hypothesis;

        // Hypotheses this record eliminates were consistent through step t-1.
        let mut after = version.clone();
        after.restrict(instance, &ts.record);
        if !report.bad_mass_event {
            report.bad_mass_event = version
                .iter()
                .filter(|&g| !after.contains(g))
                .any(|g| bad_mass(instance, g, table.values()) >= params.ell);
        }

        let sw = step_weights(instance, h, expert, &version, &table)?;
        let cap_level = |q: usize| t as f64 * table.mu[q] / c as f64;
        for q in 0..nq {
            let row = &sw.w[q * c..(q + 1) * c];
            let sum: f64 = row.iter().sum();
            if (sum - table.mu[q]).abs() > MASS_TOLERANCE {
                report.mass_conservation_errors += 1;
            }
            if sw.filled[q] {
                let prev = table.row(QueryId(q));
                report.cap_violations += row
                    .iter()
                    .zip(prev)
                    .filter(|&(&w, &p)| {
                        w < -STRICT_TOLERANCE
                            || (w > 0.0 && p + w > cap_level(q) + STRICT_TOLERANCE)
                    })
                    .count() as u64;
            }
        }

        let w_back = if (t as usize) <= k {
            &zeros
        } else {
            &history[0]
        };
        let precondition = bad_mass(instance, h, w_back) < params.ell;

        history.push_back(table.values().to_vec());
        if history.len() > k {
            history.pop_front();
        }
        table.add(&sw.w);
        report.mass_conservation_errors += table.conservation_errors() as u64;

        let mut w_bad = 0.0;
        let mut w_good = 0.0;
        let mut w_bad_over = 0.0;
        let mut w_good_over = 0.0;
        let mut over_pairs = 0;
        for q in 0..nq {
            let truth = instance.truth(QueryId(q));
            let mine = instance.answers(h, QueryId(q));
            for j in 0..c {
                let idx = q * c + j;
                let over = oversampled(table.values()[idx], params.tau, table.mu[q]);
                over_pairs += over as usize;
                let w = sw.w[idx];
                if sw.filled[q] {
                    w_good += w;
                    if over {
                        w_good_over += w;
                    }
                } else if mine[j] != truth[j] {
                    w_bad += w;
                    if over {
                        w_bad_over += w;
                    }
                }
            }
        }

        if t <= params.n_steps && w_good_over > STRICT_TOLERANCE {
            report.good_oversampled_violations += 1;
        }
        if let (true, Some(b)) = (precondition, bound) {
            report.oversample_bound_checks.evaluated += 1;
            if w_bad_over > b + STRICT_TOLERANCE {
                report.oversample_bound_checks.violated += 1;
            }
        }

        let (capped, _) = capped_mass(&table, params.tau);
        let increment = capped - capped_prev;
        capped_prev = capped;
        if t == params.n_steps {
            report.capped_mass_ratio = Some(capped / params.n_steps as f64);
        }
        let err = instance.err(h);
        if t > params.n_steps {
            report.phase2_progress.push(Phase2Step {
                step: t,
                err,
                increment,
                precondition,
            });
            if precondition && bound.is_some() && err >= 2.0 * params.eps_prime - STRICT_TOLERANCE {
                report.phase2_checks.evaluated += 1;
                if increment < params.eps_prime - STRICT_TOLERANCE {
                    report.phase2_checks.violated += 1;
                }
            }
        }

        if emit_rows {
            rows.push(AuditRow {
                step: t,
                hypothesis: h.0,
                selected: ts.selected,
                accepted: ts.record.is_accept(),
                err,
                w_bad,
                w_good,
                w_bad_oversampled: w_bad_over,
                w_good_oversampled: w_good_over,
                oversampled_pairs: over_pairs,
                capped_total: capped,
                capped_increment: increment,
            });
        }
        version = after;
        report.steps = t;
    }

    if !report.bad_mass_event {
        report.bad_mass_event = version
            .iter()
            .any(|g| bad_mass(instance, g, table.values()) >= params.ell);
    }
    Ok((report, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{run_episode, EpisodeOptions, LearnerConfig};
    use crate::spaces::GridThresholdSpace;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn water_fill_examples() {
        assert!(close(
            &water_fill(&[0.0, 0.0], 1, 0.5, 2).unwrap(),
            &[0.25, 0.25]
        ));
        assert!(close(
            &water_fill(&[0.1, 0.4], 2, 0.5, 2).unwrap(),
            &[0.4, 0.1]
        ));
        assert!(close(
            &water_fill(&[0.5, 0.1, 0.0], 3, 0.3, 3).unwrap(),
            &[0.0, 0.0, 0.3]
        ));
    }

    #[test]
    fn water_fill_rejects_bad_rows() {
        assert!(matches!(
            water_fill(&[0.1, 0.1], 2, 0.5, 2),
            Err(Error::AuditIntegrity(_))
        ));
        assert!(water_fill(&[-0.5, 1.0], 2, 0.5, 2).is_err());
        assert!(water_fill(&[0.0], 1, 0.5, 2).is_err());
    }

    fn threshold_instance() -> Instance {
        Instance::new(Arc::new(GridThresholdSpace::single_query(2).unwrap()))
    }

    #[test]
    fn three_step_glaring_flaw_trace() {
        let inst = threshold_instance();
        let learner = LearnerConfig::threshold_min();
        let run = RunParameters::for_learner(&inst, &learner, 0.5, 0.5).unwrap();
        let options = EpisodeOptions {
            stop_when_verified: false,
            max_steps: Some(3),
            record_trace: true,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let ep = run_episode(
            &inst,
            &learner,
            &ExpertPolicy::GlaringFlaw,
            &run,
            &options,
            &mut rng,
        )
        .unwrap();
        let params = AuditParams::from_run(&run);

        let mut expected = [vec![0.0, 1.0], vec![1.0, 1.0], vec![1.5, 1.5]].into_iter();
        let mut table = WeightTable::new(&inst);
        let mut state = crate::protocol::ProtocolState::new(&inst);
        for ts in &ep.trace {
            let sw = step_weights(
                &inst,
                ts.hypothesis,
                &ExpertPolicy::GlaringFlaw,
                &state.version,
                &table,
            )
            .unwrap();
            table.add(&sw.w);
            assert!(close(table.row(QueryId(0)), &expected.next().unwrap()));
            state.apply(&inst, ts.record.clone()).unwrap();
        }
        let (report, rows) =
            audit_trace(&inst, &ep.trace, &ExpertPolicy::GlaringFlaw, &params, true).unwrap();
        assert!(report.is_clean(), "{report:?}");
        assert_eq!(rows.len(), 3);
        // τ = N/c is far above t, so nothing is oversampled yet.
        assert!(rows.iter().all(|r| r.oversampled_pairs == 0));
        assert!((rows[2].capped_total - 3.0).abs() < 1e-12);
    }

    #[test]
    fn step_weight_shapes() {
        let inst = Instance::new(Arc::new(
            GridThresholdSpace::new(10, vec![vec![0.2, 0.9], vec![0.5, 0.6]], vec![0.2, 0.8])
                .unwrap(),
        ));
        let table = WeightTable::new(&inst);
        let vs = inst.full_version_space();
        // Target threshold 0: h = threshold 1 is wrong everywhere.
        let h = HypothesisId(10);
        let sw = step_weights(&inst, h, &ExpertPolicy::Largest, &vs, &table).unwrap();
        assert!(close(&sw.w, &[0.0, 0.2, 0.0, 0.8]));

        let mut gamma = crate::experts::GammaTable::new();
        gamma
            .set(QueryId(0), crate::protocol::ComponentIndex(0), 0.7)
            .unwrap();
        gamma
            .set(QueryId(0), crate::protocol::ComponentIndex(1), 0.3)
            .unwrap();
        gamma
            .set(QueryId(1), crate::protocol::ComponentIndex(0), 1.0)
            .unwrap();
        let sw = step_weights(&inst, h, &ExpertPolicy::GammaTable(gamma), &vs, &table).unwrap();
        assert!(close(&sw.w[..2], &[0.14, 0.06]));

        let sw = step_weights(&inst, inst.target(), &ExpertPolicy::Largest, &vs, &table).unwrap();
        assert!(sw.filled.iter().all(|&f| f));
        assert!(close(&sw.w, &[0.1, 0.1, 0.4, 0.4]));
    }

    #[test]
    fn oversampling_is_strict_and_capping_clips() {
        let inst = threshold_instance();
        let mut table = WeightTable::new(&inst);
        assert_eq!(oversampled_set(&table, 1.0).count_ones(..), 0);
        table.add(&[1.0, 0.0]);
        // W = τμ exactly is not oversampled.
        assert_eq!(oversampled_set(&table, 1.0).count_ones(..), 0);
        table.add(&[1.0, 0.0]);
        let over = oversampled_set(&table, 1.0);
        assert!(over.contains(0) && !over.contains(1));
        let (total, per) = capped_mass(&table, 1.0);
        assert!(close(&per, &[1.0, 0.0]));
        assert_eq!(total, 1.0);
        let (total, _) = capped_mass(&table, 5.0);
        assert_eq!(total, 2.0);
    }

    #[test]
    fn full_runs_audit_clean() {
        let inst = Instance::new(Arc::new(
            GridThresholdSpace::uniform_pool(40, 3, 60, 4).unwrap(),
        ));
        for expert in [
            ExpertPolicy::Largest,
            ExpertPolicy::RandomIncorrect,
            ExpertPolicy::AdversarialMinShrink,
        ] {
            let learner = LearnerConfig::threshold_min();
            let run = RunParameters::for_learner(&inst, &learner, 0.2, 0.1).unwrap();
            let options = EpisodeOptions {
                stop_when_verified: false,
                max_steps: Some(run.budget),
                record_trace: true,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let ep = run_episode(&inst, &learner, &expert, &run, &options, &mut rng).unwrap();
            let params = AuditParams::from_run(&run);
            let (report, _) = audit_trace(&inst, &ep.trace, &expert, &params, false).unwrap();
            assert!(report.is_clean(), "{expert}: {report:?}");
            assert!(report.capped_mass_ratio.is_some());
            if !report.bad_mass_event {
                assert!(
                    report.capped_mass_bound_holds(params.eps_prime),
                    "{report:?}"
                );
            }
        }
    }

    #[test]
    fn stalled_second_phase_is_flagged() {
        // Showing threshold 1 forever: the same point is corrected every step,
        // so capped mass stops growing once that pair reaches τμ = 2.
        let inst = Instance::new(Arc::new(GridThresholdSpace::single_query(4).unwrap()));
        let h = (0..inst.num_hypotheses())
            .map(HypothesisId)
            .find(|&h| inst.space().threshold(h) == Some(1.0))
            .unwrap();
        let trace: Vec<TraceStep> = (1..=8)
            .map(|t| TraceStep {
                step: t,
                hypothesis: h,
                selected: t == 1,
                record: crate::protocol::FeedbackRecord::correct(
                    t,
                    QueryId(0),
                    crate::protocol::ComponentIndex(3),
                    Answer(1),
                ),
            })
            .collect();
        let params = AuditParams {
            tau: 2.0,
            n_steps: 3,
            k: 1,
            ell: 100.0,
            eps_prime: 0.1,
        };
        let (report, rows) =
            audit_trace(&inst, &trace, &ExpertPolicy::Largest, &params, true).unwrap();
        let increments: Vec<f64> = rows.iter().map(|r| r.capped_increment).collect();
        assert!(close(
            &increments,
            &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        ));
        assert_eq!(
            report.phase2_checks,
            CheckCount {
                evaluated: 5,
                violated: 5
            }
        );
        assert_eq!(report.phase2_progress.len(), 5);
        assert!(!report.is_clean());
        assert_eq!(report.capped_mass_ratio, Some(2.0 / 3.0));
    }

    #[test]
    fn malformed_trace_is_rejected() {
        let inst = threshold_instance();
        let trace = vec![TraceStep {
            step: 2,
            hypothesis: HypothesisId(0),
            selected: true,
            record: crate::protocol::FeedbackRecord::accept(
                2,
                QueryId(0),
                vec![Answer(1), Answer(1)],
            ),
        }];
        let params = AuditParams {
            tau: 10.0,
            n_steps: 20,
            k: 1,
            ell: 1.0,
            eps_prime: 0.1,
        };
        assert!(matches!(
            audit_trace(&inst, &trace, &ExpertPolicy::Largest, &params, false),
            Err(Error::AuditIntegrity(_))
        ));
    }
}
