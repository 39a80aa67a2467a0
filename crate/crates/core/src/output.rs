//! CSV artifacts. Every file starts with a `#` line carrying the resolved
//! config and seed, so any artifact can be regenerated.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::analytics::PolicyCurve;
use crate::auditor::AuditRow;
use crate::error::{Error, Result};
use crate::learners::TrialResult;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Writes `# config=<json> seed=<n>`.
pub fn write_header<W: Write, C: Serialize + ?Sized>(
    out: &mut W,
    config: &C,
    seed: u64,
) -> Result<()> {
    let json = serde_json::to_string(config)?;
    writeln!(out, "# config={json} seed={seed}")?;
    Ok(())
}

/// Reads a header line back into `(config json, seed)`.
pub fn parse_header(line: &str) -> Option<(serde_json::Value, u64)> {
    let rest = line.strip_prefix("# config=")?;
    let (json, seed) = rest.rsplit_once(" seed=")?;
    Some((serde_json::from_str(json).ok()?, seed.trim().parse().ok()?))
}

fn write_rows<W: Write, C: Serialize + ?Sized, R: Serialize>(
    mut out: W,
    config: &C,
    seed: u64,
    rows: impl IntoIterator<Item = R>,
) -> Result<()> {
    write_header(&mut out, config, seed)?;
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// One row of the per-trial table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub seed: u64,
    pub space: String,
    pub policy: String,
    pub learner: String,
    pub c: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub k: u64,
    pub steps_used: u64,
    pub switches: u64,
    pub final_err: f64,
    pub success: bool,
}

impl From<&TrialResult> for TrialRow {
    fn from(t: &TrialResult) -> Self {
        Self {
            seed: t.seed,
            space: t.space.clone(),
            policy: t.policy.clone(),
            learner: t.learner.clone(),
            c: t.c,
            epsilon: t.epsilon,
            delta: t.delta,
            k: t.k,
            steps_used: t.steps_used,
            switches: t.switches,
            final_err: t.final_err,
            success: t.success,
        }
    }
}

pub fn write_trials<W: Write, C: Serialize + ?Sized>(
    out: W,
    config: &C,
    seed: u64,
    trials: &[TrialResult],
) -> Result<()> {
    write_rows(out, config, seed, trials.iter().map(TrialRow::from))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub v: f64,
    pub c: u32,
    pub policy: String,
    pub expected_next: f64,
    pub reduction: f64,
    pub ratio: f64,
}

pub fn write_curves<W: Write, C: Serialize + ?Sized>(
    out: W,
    config: &C,
    seed: u64,
    curves: &[PolicyCurve],
) -> Result<()> {
    let rows = curves.iter().flat_map(|curve| {
        curve.samples.iter().map(move |p| CurveRow {
            v: p.v,
            c: curve.c,
            policy: curve.policy.to_string(),
            expected_next: p.expected_next,
            reduction: p.reduction,
            ratio: p.ratio,
        })
    });
    write_rows(out, config, seed, rows)
}

pub fn write_audit_rows<W: Write, C: Serialize + ?Sized>(
    out: W,
    config: &C,
    seed: u64,
    rows: &[AuditRow],
) -> Result<()> {
    write_rows(out, config, seed, rows)
}

/// Reads any of the tables above, skipping the header comment.
pub fn read_rows<R: Read, T: for<'de> Deserialize<'de>>(input: R) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}
