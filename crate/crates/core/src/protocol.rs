//! Queries, feedback records, transcripts and the single interaction step.
//!
//! One step: a query is drawn from the query distribution, the learner shows its
//! current answers on all `c` components, and the expert either accepts the whole
//! answer or fixes exactly one wrong component.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experts::{ExpertContext, ExpertPolicy, Feedback};
use crate::instance::{Instance, VersionSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QueryId(pub usize);

/// 0-based index of an atomic component within a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComponentIndex(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HypothesisId(pub usize);

/// Opaque answer token for one component. What the token means is up to the
/// space: a 0/1 label, a triplet topology, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Answer(pub u8);

impl fmt::Display for QueryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

impl fmt::Display for HypothesisId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "h{}", self.0)
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FeedbackKind {
    /// The whole displayed answer was correct; every component value is implied.
    Accept { displayed: Vec<Answer> },
    /// One component was wrong and the expert supplied its true value.
    Correct {
        component: ComponentIndex,
        value: Answer,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackRecord {
    pub step: u64,
    pub query: QueryId,
    #[serde(flatten)]
    pub kind: FeedbackKind,
}

impl FeedbackRecord {
    pub fn accept(step: u64, query: QueryId, displayed: Vec<Answer>) -> Self {
        Self {
            step,
            query,
            kind: FeedbackKind::Accept { displayed },
        }
    }

    pub fn correct(step: u64, query: QueryId, component: ComponentIndex, value: Answer) -> Self {
        Self {
            step,
            query,
            kind: FeedbackKind::Correct { component, value },
        }
    }

    pub fn is_accept(&self) -> bool {
        matches!(self.kind, FeedbackKind::Accept { .. })
    }

    /// Every `(component, value)` constraint the record pins down.
    pub fn constraints(&self) -> Vec<(ComponentIndex, Answer)> {
        match &self.kind {
            FeedbackKind::Accept { displayed } => displayed
                .iter()
                .enumerate()
                .map(|(j, &a)| (ComponentIndex(j), a))
                .collect(),
            FeedbackKind::Correct { component, value } => vec![(*component, *value)],
        }
    }
}

/// Append-only feedback log. Rejects out-of-order steps and records that
/// contradict an earlier record on the same `(q, j)`.
#[derive(Debug, Clone, Default)]
pub struct Transcript {
    records: Vec<FeedbackRecord>,
    known: HashMap<(QueryId, ComponentIndex), Answer>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn records(&self) -> &[FeedbackRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last_step(&self) -> u64 {
        self.records.last().map_or(0, |r| r.step)
    }

    /// The value feedback has fixed for `(q, j)`, if any.
    pub fn known_value(&self, q: QueryId, j: ComponentIndex) -> Option<Answer> {
        self.known.get(&(q, j)).copied()
    }

    /// Checks `record` against the log without appending it.
    pub fn check(&self, record: &FeedbackRecord) -> Result<()> {
        let previous = self.last_step();
        if !self.records.is_empty() && record.step <= previous {
            return Err(Error::StepOrder {
                step: record.step,
                previous,
            });
        }
        if record.step == 0 {
            return Err(Error::MalformedRecord("steps start at 1".into()));
        }
        for (j, value) in record.constraints() {
            if let Some(existing) = self.known.get(&(record.query, j)) {
                if *existing != value {
                    return Err(Error::Contradiction {
                        query: record.query,
                        component: j,
                        existing: existing.0,
                        new: value.0,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn append(&mut self, record: FeedbackRecord) -> Result<()> {
        self.check(&record)?;
        for (j, value) in record.constraints() {
            self.known.insert((record.query, j), value);
        }
        self.records.push(record);
        Ok(())
    }

    pub fn from_records(records: impl IntoIterator<Item = FeedbackRecord>) -> Result<Self> {
        let mut t = Self::new();
        for r in records {
            t.append(r)?;
        }
        Ok(t)
    }

    /// One JSON object per line.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits utf-8")
    }

    /// Reads line-delimited records. Blank lines and `#` comment lines are skipped.
    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self> {
        let mut t = Self::new();
        for line in input.lines() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let record: FeedbackRecord = serde_json::from_str(trimmed)?;
            t.append(record)?;
        }
        Ok(t)
    }
}

/// Probability distribution over a finite query set.
#[derive(Debug, Clone)]
pub struct QueryDistribution {
    weights: Vec<f64>,
    sampler: WeightedIndex<f64>,
}

impl QueryDistribution {
    pub const SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("no queries".into()));
        }
        if let Some(w) = weights.iter().find(|w| **w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidDistribution(format!(
                "weight {w} is negative or not finite"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, not 1"
            )));
        }
        let sampler =
            WeightedIndex::new(&weights).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
        Ok(Self { weights, sampler })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDistribution("no queries".into()));
        }
        let w = 1.0 / n as f64;
        Self::new(vec![w; n])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn mass(&self, q: QueryId) -> f64 {
        self.weights[q.0]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> QueryId {
        QueryId(self.sampler.sample(rng))
    }
}

/// Mutable state of one interaction run: the transcript plus the materialized
/// version space it induces.
#[derive(Debug, Clone)]
pub struct ProtocolState {
    pub transcript: Transcript,
    pub version: VersionSpace,
    pub step: u64,
}

impl ProtocolState {
    pub fn new(instance: &Instance) -> Self {
        Self {
            transcript: Transcript::new(),
            version: instance.full_version_space(),
            step: 0,
        }
    }

    /// Appends `record`, narrowing the version space.
    pub fn apply(&mut self, instance: &Instance, record: FeedbackRecord) -> Result<()> {
        instance.validate_record(&record)?;
        self.transcript.append(record.clone())?;
        self.version.restrict(instance, &record);
        self.step = record.step;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub accepted: bool,
    pub record: FeedbackRecord,
    pub displayed: Vec<Answer>,
}

/// Runs one protocol step with `hypothesis` as the learner's current answer.
///
/// The expert sees the displayed answers and the truth under the instance's target;
/// any choice of a component that is already correct is a protocol violation.
pub fn run_step<R: Rng + ?Sized>(
    instance: &Instance,
    state: &mut ProtocolState,
    hypothesis: HypothesisId,
    expert: &ExpertPolicy,
    rng: &mut R,
) -> Result<StepOutcome> {
    let q = instance.distribution().sample(rng);
    let displayed = instance.evaluate(hypothesis, q)?;
    let truth = instance.evaluate(instance.target(), q)?;
    let ctx = ExpertContext {
        instance,
        version: Some(&state.version),
    };
    let step = state.step + 1;
    let record = match expert.choose_feedback(&ctx, q, &displayed, &truth, rng)? {
        Feedback::Accept => {
            if displayed != truth {
                return Err(Error::ProtocolViolation(format!(
                    "expert accepted an incorrect answer on {q}"
                )));
            }
            FeedbackRecord::accept(step, q, displayed.clone())
        }
        Feedback::Correct(j) => {
            if j.0 >= displayed.len() {
                return Err(Error::InvalidComponent(j.0, displayed.len()));
            }
            if displayed[j.0] == truth[j.0] {
                return Err(Error::ProtocolViolation(format!(
                    "expert corrected component {} of {q}, which is already correct",
                    j.0
                )));
            }
            FeedbackRecord::correct(step, q, j, truth[j.0])
        }
    };
    state.apply(instance, record.clone())?;
    Ok(StepOutcome {
        accepted: record.is_accept(),
        record,
        displayed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_serialize_to_documented_lines() {
        let a = FeedbackRecord::accept(1, QueryId(3), vec![Answer(0), Answer(1)]);
        let c = FeedbackRecord::correct(2, QueryId(0), ComponentIndex(1), Answer(1));
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            r#"{"step":1,"query":3,"kind":"accept","displayed":[0,1]}"#
        );
        assert_eq!(
            serde_json::to_string(&c).unwrap(),
            r#"{"step":2,"query":0,"kind":"correct","component":1,"value":1}"#
        );
    }

    #[test]
    fn transcript_rejects_contradictions_and_out_of_order_steps() {
        let mut t = Transcript::new();
        t.append(FeedbackRecord::correct(
            1,
            QueryId(0),
            ComponentIndex(1),
            Answer(1),
        ))
        .unwrap();
        let err = t
            .append(FeedbackRecord::accept(
                2,
                QueryId(0),
                vec![Answer(1), Answer(0)],
            ))
            .unwrap_err();
        assert!(matches!(err, Error::Contradiction { .. }));
        let err = t
            .append(FeedbackRecord::correct(
                1,
                QueryId(1),
                ComponentIndex(0),
                Answer(1),
            ))
            .unwrap_err();
        assert!(matches!(err, Error::StepOrder { .. }));
        // Agreeing feedback is fine.
        t.append(FeedbackRecord::accept(
            3,
            QueryId(0),
            vec![Answer(0), Answer(1)],
        ))
        .unwrap();
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn jsonl_round_trip_skips_comments() {
        let mut t = Transcript::new();
        t.append(FeedbackRecord::accept(1, QueryId(0), vec![Answer(1)]))
            .unwrap();
        t.append(FeedbackRecord::correct(
            4,
            QueryId(2),
            ComponentIndex(0),
            Answer(0),
        ))
        .unwrap();
        let text = format!("# seed=0\n{}", t.to_jsonl());
        let back = Transcript::read_jsonl(text.as_bytes()).unwrap();
        assert_eq!(back.records(), t.records());
    }

    #[test]
    fn distribution_must_sum_to_one() {
        assert!(QueryDistribution::new(vec![0.5, 0.4]).is_err());
        assert!(QueryDistribution::new(vec![1.5, -0.5]).is_err());
        let d = QueryDistribution::new(vec![0.1, 0.9]).unwrap();
        assert_eq!(d.mass(QueryId(1)), 0.9);
        for n in [1, 3, 7, 512, 1000] {
            assert!(QueryDistribution::uniform(n).is_ok(), "n = {n}");
        }
    }
}
