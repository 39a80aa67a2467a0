//! The acceptance suite: one pass/fail outcome per checked claim, shared by
//! `sweep --check` and the acceptance test target.

use std::fmt;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    binomial_tolerance, run_single_query_lower_bound, run_sparse_lower_bound,
    run_two_point_lower_bound_with, trial_rng, verify_phase1_generalization, verify_upper_bound,
    AuditSummary, ExperimentSpec, LowerBoundResult, SweepResult, DEFAULT_TRIALS,
};
use crate::analytics::{
    expected_next_threshold, monte_carlo_next_threshold, reduction_ratio, ValuePolicy,
};
use crate::auditor::{water_fill, STRICT_TOLERANCE};
use crate::error::Result;
use crate::learners::Schedule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_seconds: Option<f64>,
}

impl CriterionOutcome {
    fn new(
        id: u8,
        title: &str,
        ok: bool,
        detail: String,
        seconds: f64,
        limit: Option<f64>,
    ) -> Self {
        let in_time = limit.is_none_or(|l| seconds < l);
        Self {
            id,
            title: title.into(),
            passed: ok && in_time,
            detail: if in_time {
                detail
            } else {
                format!(
                    "{detail}; over the {:.0} s limit",
                    limit.unwrap_or_default()
                )
            },
            seconds,
            limit_seconds: limit,
        }
    }
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {} {}: {} ({:.2} s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.detail,
            self.seconds
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriteriaOptions {
    pub seed: u64,
    pub trials: u64,
}

impl Default for CriteriaOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: DEFAULT_TRIALS,
        }
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let v = f()?;
    Ok((v, start.elapsed().as_secs_f64()))
}

const UNIT_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Closed forms reduce to `v - v²/2` at `c = 1` and match simulation.
pub fn criterion1(opts: &CriteriaOptions) -> Result<CriterionOutcome> {
    let ((exact_ok, worst_exact, mc_fail, worst_z), secs) = timed(|| {
        let mut worst_exact: f64 = 0.0;
        for p in ValuePolicy::ALL {
            for v in UNIT_GRID {
                let e = expected_next_threshold(p, v, 1)?;
                worst_exact = worst_exact.max((e - (v - v * v / 2.0)).abs());
            }
        }
        let cases: Vec<(ValuePolicy, u32, f64)> = ValuePolicy::ALL
            .iter()
            .flat_map(|&p| {
                [1, 4, 8]
                    .into_iter()
                    .flat_map(move |c| UNIT_GRID.map(|v| (p, c, v)))
            })
            .collect();
        let z: Vec<f64> = cases
            .par_iter()
            .enumerate()
            .map(|(i, &(p, c, v))| {
                let mut rng = trial_rng(opts.seed, i as u64);
                let (m, se) = monte_carlo_next_threshold(p, v, c, 100_000, &mut rng)?;
                let closed = expected_next_threshold(p, v, c)?;
                Ok((m - closed).abs() / se.max(f64::MIN_POSITIVE))
            })
            .collect::<Result<_>>()?;
        let fails = z.iter().filter(|&&z| z > 3.0).count();
        let worst = z.iter().copied().fold(0.0, f64::max);
        Ok((worst_exact <= 1e-15, worst_exact, fails, worst))
    })?;
    Ok(CriterionOutcome::new(
        1,
        "closed-form agreement",
        exact_ok && mc_fail == 0,
        format!(
            "c=1 max |E - (v - v²/2)| = {worst_exact:.1e}; Monte Carlo 54 cases, {mc_fail} beyond 3 se (max {worst_z:.2} se)"
        ),
        secs,
        Some(10.0),
    ))
}

/// Ratio curves approach `c` near zero; the largest-first expert is worse
/// than a single labeled point at large `v_t`.
pub fn criterion2() -> Result<CriterionOutcome> {
    let ((ok, detail), secs) = timed(|| {
        let mut ok = true;
        let mut parts = Vec::new();
        for c in [4u32, 8] {
            for p in ValuePolicy::ALL {
                let r = reduction_ratio(p, 1e-3, c)?;
                let rel = (r - c as f64).abs() / c as f64;
                ok &= rel <= 0.02;
                parts.push(format!("{p} c={c}: {r:.4}"));
            }
        }
        let late = reduction_ratio(ValuePolicy::Largest, 0.9, 8)?;
        ok &= late < 1.0;
        Ok((
            ok,
            format!(
                "ratio at v=1e-3 [{}]; largest c=8 v=0.9: {late:.4}",
                parts.join(", ")
            ),
        ))
    })?;
    Ok(CriterionOutcome::new(
        2,
        "ratio curves",
        ok,
        detail,
        secs,
        Some(1.0),
    ))
}

/// Water-filling on random valid rows: non-negative, conserves `μ`, capped.
pub fn criterion3(opts: &CriteriaOptions) -> Result<CriterionOutcome> {
    const CASES: u64 = 10_000;
    let ((bad, worst_sum), secs) = timed(|| {
        let mut rng = trial_rng(opts.seed, 3);
        let mut bad = 0u64;
        let mut worst_sum: f64 = 0.0;
        for _ in 0..CASES {
            let (prev, t, mu, c) = random_row(&mut rng);
            let w = water_fill(&prev, t, mu, c)?;
            let cap = t as f64 * mu / c as f64;
            let sum: f64 = w.iter().sum();
            worst_sum = worst_sum.max((sum - mu).abs());
            let capped = w
                .iter()
                .zip(&prev)
                .all(|(&x, &p)| x >= 0.0 && (x == 0.0 || p + x <= cap + STRICT_TOLERANCE));
            if !capped || (sum - mu).abs() > 1e-12 {
                bad += 1;
            }
        }
        Ok((bad, worst_sum))
    })?;
    Ok(CriterionOutcome::new(
        3,
        "water-filling",
        bad == 0,
        format!("{CASES} random rows, {bad} failing; max |Σw - μ| = {worst_sum:.1e}"),
        secs,
        Some(5.0),
    ))
}

/// A row that an honest history could produce: non-negative, summing to
/// `(t-1)·μ`, sometimes concentrated enough to leave entries over the cap.
pub fn random_row<R: Rng + ?Sized>(rng: &mut R) -> (Vec<f64>, u64, f64, usize) {
    let c = rng.gen_range(1..=16usize);
    let t = rng.gen_range(1..=64u64);
    let mu = rng.gen_range(1e-6..=1.0);
    let spiky = rng.gen_bool(0.3);
    let raw: Vec<f64> = (0..c)
        .map(|_| {
            let u: f64 = rng.gen();
            if spiky {
                u.powi(6)
            } else if rng.gen_bool(0.2) {
                0.0
            } else {
                u
            }
        })
        .collect();
    let total: f64 = raw.iter().sum();
    let target = (t - 1) as f64 * mu;
    let prev = if total > 0.0 {
        raw.iter().map(|x| x / total * target).collect()
    } else {
        let mut v = vec![0.0; c];
        v[0] = target;
        v
    };
    (prev, t, mu, c)
}

/// Glaring-flaw corrections on one repeated query take exactly `c/2` rounds.
pub fn criterion4() -> Result<CriterionOutcome> {
    let (rounds, secs) = timed(|| {
        [2usize, 10, 20]
            .into_iter()
            .map(|c| Ok((c, run_single_query_lower_bound(c)?)))
            .collect::<Result<Vec<_>>>()
    })?;
    let ok = rounds.iter().all(|&(c, r)| r == c as u64 / 2);
    let detail = rounds
        .iter()
        .map(|(c, r)| format!("c={c}: {r}"))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(CriterionOutcome::new(
        4,
        "single-query rounds",
        ok,
        detail,
        secs,
        Some(1.0),
    ))
}

/// Two-point sweeps used by criteria 5 and 9.
pub fn two_point_sweeps(opts: &CriteriaOptions) -> Result<(Vec<LowerBoundResult>, f64)> {
    timed(|| {
        [(4, 0.05), (8, 0.05), (16, 0.05), (8, 0.025)]
            .into_iter()
            .map(|(c, e)| run_two_point_lower_bound_with(c, e, opts.trials, opts.seed, Some(0.1)))
            .collect()
    })
}

/// Steps needed double with `c` and with `1/ε`.
pub fn criterion5(sweeps: &[LowerBoundResult], secs: f64) -> CriterionOutcome {
    let m = |c: usize, e: f64| {
        sweeps
            .iter()
            .find(|r| r.c == c && r.epsilon == e)
            .map_or(f64::NAN, |r| r.mean_steps)
    };
    let ratios = [
        ("c 4→8", m(8, 0.05) / m(4, 0.05)),
        ("c 8→16", m(16, 0.05) / m(8, 0.05)),
        ("ε 0.05→0.025", m(8, 0.025) / m(8, 0.05)),
    ];
    let ok = ratios.iter().all(|(_, r)| (1.7..=2.3).contains(r));
    let detail = format!(
        "means c=4/8/16 at ε=0.05: {:.1}/{:.1}/{:.1}, c=8 at ε=0.025: {:.1}; ratios {}",
        m(4, 0.05),
        m(8, 0.05),
        m(16, 0.05),
        m(8, 0.025),
        ratios
            .iter()
            .map(|(n, r)| format!("{n}: {r:.3}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    CriterionOutcome::new(5, "lower-bound scaling", ok, detail, secs, Some(60.0))
}

/// The upper-bound and first-phase sweeps behind criteria 6 to 9.
#[derive(Debug, Clone)]
pub struct UpperBoundSuite {
    pub upper: Vec<SweepResult>,
    pub phase1: Vec<SweepResult>,
    pub upper_seconds: f64,
    pub phase1_seconds: f64,
}

/// Every (space, learner, expert) combination of the upper-bound sweep.
pub fn upper_bound_specs(opts: &CriteriaOptions) -> Vec<ExperimentSpec> {
    let spaces = [
        ("grid:M=100,c=4", "threshold-min"),
        ("sparse:l=3,c=3,eps=0.2", "max-ones"),
    ];
    let mut specs = Vec::new();
    for (space, rule) in spaces {
        for schedule in ["base", "stick-with-it"] {
            for expert in ["largest", "random", "adversarial"] {
                specs.push(ExperimentSpec {
                    name: format!("{space} {schedule}/{rule} {expert}"),
                    space: space.parse().expect("static space spec"),
                    expert: expert.into(),
                    learner: format!("{schedule}/{rule}"),
                    epsilon: 0.2,
                    delta: 0.1,
                    k: None,
                    trials: opts.trials,
                    seed: opts.seed,
                    audit: true,
                });
            }
        }
    }
    specs
}

pub fn run_upper_bound_suite(opts: &CriteriaOptions) -> Result<UpperBoundSuite> {
    let specs = upper_bound_specs(opts);
    let (upper, upper_seconds) = timed(|| specs.iter().map(verify_upper_bound).collect())?;
    let (phase1, phase1_seconds) =
        timed(|| specs.iter().map(verify_phase1_generalization).collect())?;
    Ok(UpperBoundSuite {
        upper,
        phase1,
        upper_seconds,
        phase1_seconds,
    })
}

/// Failure rate of every configuration stays within `δ + 3σ`.
pub fn criterion6(suite: &UpperBoundSuite) -> CriterionOutcome {
    let ok = suite.upper.iter().all(|r| r.summary.within_tolerance());
    let worst = suite
        .upper
        .iter()
        .max_by(|a, b| a.summary.failure_rate.total_cmp(&b.summary.failure_rate));
    let detail = match worst {
        Some(w) => format!(
            "{} configurations; worst failure rate {:.3} ({}) vs tolerance {:.3}",
            suite.upper.len(),
            w.summary.failure_rate,
            w.spec.name,
            w.summary.tolerance
        ),
        None => "no configurations".into(),
    };
    CriterionOutcome::new(
        6,
        "upper bound",
        ok && worst.is_some(),
        detail,
        suite.upper_seconds,
        Some(120.0),
    )
}

/// Stick-with-it changes hypothesis at most `4c` times in every trial.
pub fn criterion7(suite: &UpperBoundSuite) -> CriterionOutcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for r in suite
        .upper
        .iter()
        .filter(|r| matches!(r.learner.schedule, Schedule::StickWithIt { .. }))
    {
        let bound = 4 * r.params.components as u64;
        ok &= r.summary.max_switches <= bound;
        parts.push(format!("{}≤{bound}", r.summary.max_switches));
    }
    let detail = format!("max switches per configuration [{}]", parts.join(", "));
    CriterionOutcome::new(
        7,
        "switch bound",
        ok && !parts.is_empty(),
        detail,
        0.0,
        None,
    )
}

/// After exactly `N` steps the whole version space has `err_c < ε`, with
/// probability at least `1 - δ - 3σ`.
pub fn criterion8(suite: &UpperBoundSuite) -> CriterionOutcome {
    let ok = suite.phase1.iter().all(|r| r.summary.within_tolerance());
    let worst = suite
        .phase1
        .iter()
        .max_by(|a, b| a.summary.failure_rate.total_cmp(&b.summary.failure_rate));
    let detail = match worst {
        Some(w) => format!(
            "{} configurations; worst failure rate {:.3} ({}) vs tolerance {:.3}",
            suite.phase1.len(),
            w.summary.failure_rate,
            w.spec.name,
            w.summary.tolerance
        ),
        None => "no configurations".into(),
    };
    CriterionOutcome::new(
        8,
        "first-phase generalization",
        ok && worst.is_some(),
        detail,
        suite.phase1_seconds,
        None,
    )
}

/// Every audited trace obeys the deterministic bounds; the elimination
/// failure event stays rare.
pub fn criterion9(suite: &UpperBoundSuite, two_point: &[LowerBoundResult]) -> CriterionOutcome {
    let mut total = AuditSummary::default();
    for a in suite
        .upper
        .iter()
        .chain(&suite.phase1)
        .filter_map(|r| r.audit.as_ref())
        .chain(two_point.iter().filter_map(|r| r.audit.as_ref()))
    {
        total.merge(a);
    }
    let rate = if total.traces == 0 {
        1.0
    } else {
        total.bad_mass_events as f64 / total.traces as f64
    };
    let tol = binomial_tolerance(0.1, total.traces.max(1));
    let ok = total.traces > 0 && total.clean() && rate <= tol;
    let detail = format!(
        "{} traces; cap {} / mass {} / good-oversampled {} violations; bad-oversampled {} of {} checked; \
         phase-2 progress {} of {} checked; capped mass at N: {} evaluated, {} short, min {}; \
         elimination-failure rate {:.4} vs {:.4}",
        total.traces,
        total.cap_violations,
        total.mass_conservation_errors,
        total.good_oversampled_violations,
        total.oversample_bound.violated,
        total.oversample_bound.evaluated,
        total.phase2.violated,
        total.phase2.evaluated,
        total.capped_mass_evaluated,
        total.capped_mass_failures,
        total.capped_mass_min.map_or("n/a".into(), |v| format!("{v:.4}")),
        rate,
        tol
    );
    CriterionOutcome::new(9, "auditor invariants", ok, detail, 0.0, None)
}

/// Max-disagreement on the sparse space needs about `c·ℓ/(2ε)` queries and
/// changes hypothesis at least `c` times.
pub fn criterion10(opts: &CriteriaOptions) -> Result<CriterionOutcome> {
    let (results, secs) = timed(|| {
        [2usize, 4]
            .into_iter()
            .map(|c| run_sparse_lower_bound(2, c, 0.25, opts.trials, opts.seed))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut ok = true;
    let mut parts = Vec::new();
    for r in &results {
        let ratio = r.mean_queries / r.reference;
        let min_changes = r.changes.iter().copied().min().unwrap_or(0);
        ok &= (0.5..=2.0).contains(&ratio) && min_changes >= r.c as u64;
        parts.push(format!(
            "c={}: mean {:.2} vs {:.0} (×{ratio:.3}), min changes {min_changes}",
            r.c, r.mean_queries, r.reference
        ));
    }
    Ok(CriterionOutcome::new(
        10,
        "sparse lower bound",
        ok,
        parts.join("; "),
        secs,
        Some(60.0),
    ))
}

/// Runs criteria 1 through 10 in order.
pub fn run_all(opts: &CriteriaOptions) -> Result<Vec<CriterionOutcome>> {
    let mut out = vec![
        criterion1(opts)?,
        criterion2()?,
        criterion3(opts)?,
        criterion4()?,
    ];
    let (two_point, two_point_secs) = two_point_sweeps(opts)?;
    out.push(criterion5(&two_point, two_point_secs));
    let suite = run_upper_bound_suite(opts)?;
    out.push(criterion6(&suite));
    out.push(criterion7(&suite));
    out.push(criterion8(&suite));
    out.push(criterion9(&suite, &two_point));
    out.push(criterion10(opts)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_rows_are_valid_inputs() {
        let mut rng = trial_rng(1, 0);
        for _ in 0..1000 {
            let (prev, t, mu, c) = random_row(&mut rng);
            assert_eq!(prev.len(), c);
            assert!(prev.iter().all(|&x| x >= 0.0));
            assert!((prev.iter().sum::<f64>() - (t - 1) as f64 * mu).abs() < 1e-9);
        }
    }

    #[test]
    fn outcome_line_format() {
        let o = CriterionOutcome::new(3, "water-filling", true, "ok".into(), 0.5, Some(5.0));
        assert_eq!(
            o.to_string(),
            "criterion  3 PASS water-filling: ok (0.50 s)"
        );
        let slow = CriterionOutcome::new(3, "water-filling", true, "ok".into(), 6.0, Some(5.0));
        assert!(!slow.passed);
    }

    #[test]
    fn fast_criteria_pass() {
        assert!(criterion2().unwrap().passed);
        assert!(criterion4().unwrap().passed);
    }

    #[test]
    fn suite_specs_cover_every_combination() {
        let specs = upper_bound_specs(&CriteriaOptions::default());
        assert_eq!(specs.len(), 12);
        for s in &specs {
            s.resolve().unwrap();
        }
    }
}
