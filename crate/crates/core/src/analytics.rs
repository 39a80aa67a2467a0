//! Expected progress of a threshold learner under value-ordered experts.
//!
//! Setting: target threshold 0, current threshold `v_t`, one query of `c`
//! i.i.d. uniform points. Points at or below `v_t` are mislabeled. The expert
//! corrects the smallest or the largest of them and the learner moves its
//! threshold to that point.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValuePolicy {
    Smallest,
    Largest,
}

impl ValuePolicy {
    pub const ALL: [ValuePolicy; 2] = [ValuePolicy::Smallest, ValuePolicy::Largest];
}

impl fmt::Display for ValuePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValuePolicy::Smallest => "smallest",
            ValuePolicy::Largest => "largest",
        })
    }
}

impl FromStr for ValuePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "smallest" => Ok(ValuePolicy::Smallest),
            "largest" => Ok(ValuePolicy::Largest),
            other => Err(Error::InvalidParameters(format!(
                "'{other}' is not a value-ordered policy (smallest, largest)"
            ))),
        }
    }
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!(
            "{name} = {x} not in [0, 1]"
        )))
    }
}

fn check_c(c: u32) -> Result<()> {
    if c == 0 {
        Err(Error::InvalidParameters("c must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `ln((1-v)^n)`.
fn log_pow_complement(v: f64, n: f64) -> f64 {
    n * (-v).ln_1p()
}

/// `(1-v)^n`.
fn pow_complement(v: f64, n: f64) -> f64 {
    log_pow_complement(v, n).exp()
}

/// `E[V_{t+1} | V_t = v_t]`.
pub fn expected_next_threshold(policy: ValuePolicy, v_t: f64, c: u32) -> Result<f64> {
    check_unit("v_t", v_t)?;
    check_c(c)?;
    let cf = c as f64;
    Ok(match policy {
        // v_t - (1 - (1-v_t)^c (1 + c v_t)) / (c+1)
        ValuePolicy::Largest => {
            let one_minus = -(log_pow_complement(v_t, cf) + (cf * v_t).ln_1p()).exp_m1();
            v_t - one_minus / (cf + 1.0)
        }
        // (1 - (1-v_t)^(c+1)) / (c+1)
        ValuePolicy::Smallest => -log_pow_complement(v_t, cf + 1.0).exp_m1() / (cf + 1.0),
    })
}

/// `Pr(V_{t+1} > v | V_t = v_t)` for `0 ≤ v ≤ v_t`.
pub fn survival_probability(policy: ValuePolicy, v: f64, v_t: f64, c: u32) -> Result<f64> {
    check_unit("v_t", v_t)?;
    check_c(c)?;
    if !(0.0..=v_t).contains(&v) {
        return Err(Error::InvalidParameters(format!(
            "v = {v} not in [0, v_t = {v_t}]"
        )));
    }
    let cf = c as f64;
    Ok(match policy {
        // No mislabeled point, or one lands in (v, v_t].
        ValuePolicy::Largest => pow_complement(v_t, cf) - log_pow_complement(v_t - v, cf).exp_m1(),
        // No point falls in [0, v].
        ValuePolicy::Smallest => pow_complement(v, cf),
    })
}

/// Expected reduction of the threshold relative to the single random labeled
/// point baseline `v_t²/2`.
pub fn reduction_ratio(policy: ValuePolicy, v_t: f64, c: u32) -> Result<f64> {
    if v_t == 0.0 {
        return Err(Error::UndefinedInput("reduction ratio at v_t = 0".into()));
    }
    let next = expected_next_threshold(policy, v_t, c)?;
    Ok((v_t - next) / (v_t * v_t / 2.0))
}

/// Sample mean and standard error of the next threshold, by simulation.
pub fn monte_carlo_next_threshold<R: Rng + ?Sized>(
    policy: ValuePolicy,
    v_t: f64,
    c: u32,
    n_samples: u64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    check_unit("v_t", v_t)?;
    check_c(c)?;
    if n_samples == 0 {
        return Err(Error::InvalidParameters("need at least one sample".into()));
    }
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n_samples {
        let mut next: Option<f64> = None;
        for _ in 0..c {
            let x: f64 = rng.gen();
            if x <= v_t {
                next = Some(match (policy, next) {
                    (_, None) => x,
                    (ValuePolicy::Largest, Some(y)) => x.max(y),
                    (ValuePolicy::Smallest, Some(y)) => x.min(y),
                });
            }
        }
        let v = next.unwrap_or(v_t);
        sum += v;
        sum_sq += v * v;
    }
    let n = n_samples as f64;
    let mean = sum / n;
    let var = if n_samples > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok((mean, (var / n).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub v: f64,
    pub expected_next: f64,
    pub reduction: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyCurve {
    pub policy: ValuePolicy,
    pub c: u32,
    pub samples: Vec<CurvePoint>,
}

/// Samples `grid` evenly spaced `v_t` in `(0, 1]`.
pub fn policy_curve(policy: ValuePolicy, c: u32, grid: usize) -> Result<PolicyCurve> {
    if grid == 0 {
        return Err(Error::InvalidParameters(
            "grid must have at least one point".into(),
        ));
    }
    let samples = (1..=grid)
        .map(|i| {
            let v = i as f64 / grid as f64;
            let expected_next = expected_next_threshold(policy, v, c)?;
            Ok(CurvePoint {
                v,
                expected_next,
                reduction: v - expected_next,
                ratio: reduction_ratio(policy, v, c)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(PolicyCurve { policy, c, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Composite trapezoid rule over `[a, b]` with `n` intervals.
    fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let inner: f64 = (1..n).map(|i| f(a + i as f64 * h)).sum();
        h * (inner + (f(a) + f(b)) / 2.0)
    }

    #[test]
    fn closed_form_examples() {
        for p in ValuePolicy::ALL {
            assert_eq!(expected_next_threshold(p, 0.0, 4).unwrap(), 0.0);
            assert!((expected_next_threshold(p, 0.5, 1).unwrap() - 0.375).abs() < 1e-15);
        }
        let s = expected_next_threshold(ValuePolicy::Smallest, 0.5, 4).unwrap();
        assert!((s - 0.19375).abs() < 1e-15);
        // 0.9 - (1 - 0.1^8 · 8.2)/9
        let l = expected_next_threshold(ValuePolicy::Largest, 0.9, 8).unwrap();
        assert!((l - (0.9 - (1.0 - 0.1f64.powi(8) * 8.2) / 9.0)).abs() < 1e-14);
    }

    #[test]
    fn survival_examples() {
        assert_eq!(
            survival_probability(ValuePolicy::Smallest, 0.0, 0.6, 3).unwrap(),
            1.0
        );
        assert!(
            survival_probability(ValuePolicy::Smallest, 1.0, 1.0, 2)
                .unwrap()
                .abs()
                < 1e-15
        );
        let l = survival_probability(ValuePolicy::Largest, 0.6, 0.6, 3).unwrap();
        assert!((l - 0.4f64.powi(3)).abs() < 1e-15);
        assert!(survival_probability(ValuePolicy::Largest, 0.7, 0.6, 3).is_err());
    }

    #[test]
    fn survival_integrates_to_expectation() {
        for p in ValuePolicy::ALL {
            for c in [1, 2, 4, 8, 16] {
                for v_t in [0.05, 0.3, 0.5, 0.9, 1.0] {
                    let integral = trapezoid(
                        |v| survival_probability(p, v, v_t, c).unwrap(),
                        0.0,
                        v_t,
                        10_000,
                    );
                    let closed = expected_next_threshold(p, v_t, c).unwrap();
                    assert!((integral - closed).abs() < 1e-4, "{p} c={c} v_t={v_t}");
                }
            }
        }
    }

    #[test]
    fn ratios() {
        for p in ValuePolicy::ALL {
            for v in [0.01, 0.4, 1.0] {
                assert!((reduction_ratio(p, v, 1).unwrap() - 1.0).abs() < 1e-9);
            }
            assert!(matches!(
                reduction_ratio(p, 0.0, 4),
                Err(Error::UndefinedInput(_))
            ));
            let r = reduction_ratio(p, 1e-3, 8).unwrap();
            assert!((r - 8.0).abs() / 8.0 < 0.02, "{p}: {r}");
        }
        assert!((reduction_ratio(ValuePolicy::Smallest, 0.5, 4).unwrap() - 2.45).abs() < 1e-12);
        let r = reduction_ratio(ValuePolicy::Largest, 0.9, 8).unwrap();
        assert!((r - 0.2743).abs() < 1e-3);
    }

    #[test]
    fn monte_carlo_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (m, se) =
            monte_carlo_next_threshold(ValuePolicy::Largest, 0.0, 3, 100, &mut rng).unwrap();
        assert_eq!((m, se), (0.0, 0.0));
        let (m, se) =
            monte_carlo_next_threshold(ValuePolicy::Smallest, 0.5, 1, 100_000, &mut rng).unwrap();
        assert!((m - 0.375).abs() < 3.0 * se);
        let (m, se) =
            monte_carlo_next_threshold(ValuePolicy::Largest, 0.9, 8, 100_000, &mut rng).unwrap();
        let closed = expected_next_threshold(ValuePolicy::Largest, 0.9, 8).unwrap();
        assert!((m - closed).abs() < 3.0 * se, "{m} vs {closed} ± {se}");
    }

    #[test]
    fn curve_grid() {
        let curve = policy_curve(ValuePolicy::Largest, 4, 512).unwrap();
        assert_eq!(curve.samples.len(), 512);
        assert_eq!(curve.samples.last().unwrap().v, 1.0);
        for s in &curve.samples {
            assert!(s.expected_next >= 0.0 && s.expected_next <= s.v + 1e-15);
            assert!(s.ratio.is_finite());
        }
    }
}
