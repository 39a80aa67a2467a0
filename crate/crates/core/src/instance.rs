//! A space paired with its target, with the answer oracle tabulated.

use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::protocol::{
    Answer, ComponentIndex, FeedbackKind, FeedbackRecord, HypothesisId, QueryDistribution, QueryId,
    Transcript,
};
use crate::spaces::HypothesisSpace;

/// A hypothesis space with a fixed target `h*`.
///
/// Every answer is tabulated at construction, along with one bitset per
/// `(q, j, value)` holding the hypotheses that give that answer. Version spaces
/// are then narrowed by bitset intersection.
#[derive(Clone)]
pub struct Instance {
    space: Arc<dyn HypothesisSpace>,
    target: HypothesisId,
    n_h: usize,
    n_q: usize,
    c: usize,
    alphabet: usize,
    answers: Vec<u8>,
    masks: Vec<FixedBitSet>,
    err: Vec<f64>,
    err_c: Vec<f64>,
    ones: Vec<usize>,
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Instance")
            .field("space", &self.space.describe())
            .field("target", &self.target)
            .finish()
    }
}

impl Instance {
    /// Uses the space's own default target.
    pub fn new(space: Arc<dyn HypothesisSpace>) -> Self {
        let target = space.default_target();
        Self::with_target(space, target).expect("default target is in range")
    }

    pub fn with_target(space: Arc<dyn HypothesisSpace>, target: HypothesisId) -> Result<Self> {
        let (n_h, n_q, c, alphabet) = (
            space.num_hypotheses(),
            space.num_queries(),
            space.components(),
            space.alphabet_size(),
        );
        if target.0 >= n_h {
            return Err(Error::InvalidHypothesis(target.0, n_h));
        }
        let mut answers = Vec::with_capacity(n_h * n_q * c);
        let mut masks = vec![FixedBitSet::with_capacity(n_h); n_q * c * alphabet];
        for h in 0..n_h {
            for q in 0..n_q {
                for j in 0..c {
                    let a = space
                        .answer(HypothesisId(h), QueryId(q), ComponentIndex(j))
                        .0;
                    debug_assert!((a as usize) < alphabet);
                    answers.push(a);
                    masks[(q * c + j) * alphabet + a as usize].insert(h);
                }
            }
        }
        let mut inst = Self {
            space,
            target,
            n_h,
            n_q,
            c,
            alphabet,
            answers,
            masks,
            err: Vec::new(),
            err_c: Vec::new(),
            ones: Vec::new(),
        };
        inst.tabulate_errors();
        Ok(inst)
    }

    fn tabulate_errors(&mut self) {
        let mu = self.space.distribution().weights().to_vec();
        let t = self.target.0;
        let mut err = vec![0.0; self.n_h];
        let mut err_c = vec![0.0; self.n_h];
        let mut ones = vec![0; self.n_h];
        for h in 0..self.n_h {
            for (q, &m) in mu.iter().enumerate() {
                let row = self.row(h, q);
                let truth = self.row(t, q);
                let wrong = row.iter().zip(truth).filter(|(a, b)| a != b).count();
                if wrong > 0 {
                    err[h] += m;
                }
                err_c[h] += m * wrong as f64 / self.c as f64;
                ones[h] += row.iter().filter(|&&a| a != 0).count();
            }
        }
        self.err = err;
        self.err_c = err_c;
        self.ones = ones;
    }

    fn row(&self, h: usize, q: usize) -> &[u8] {
        let start = (h * self.n_q + q) * self.c;
        &self.answers[start..start + self.c]
    }

    pub fn space(&self) -> &Arc<dyn HypothesisSpace> {
        &self.space
    }

    pub fn target(&self) -> HypothesisId {
        self.target
    }

    pub fn num_hypotheses(&self) -> usize {
        self.n_h
    }

    pub fn num_queries(&self) -> usize {
        self.n_q
    }

    pub fn components(&self) -> usize {
        self.c
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    pub fn distribution(&self) -> &QueryDistribution {
        self.space.distribution()
    }

    pub fn check_hypothesis(&self, h: HypothesisId) -> Result<()> {
        if h.0 < self.n_h {
            Ok(())
        } else {
            Err(Error::InvalidHypothesis(h.0, self.n_h))
        }
    }

    pub fn check_query(&self, q: QueryId) -> Result<()> {
        if q.0 < self.n_q {
            Ok(())
        } else {
            Err(Error::InvalidQuery(q.0, self.n_q))
        }
    }

    pub fn answer(&self, h: HypothesisId, q: QueryId, j: ComponentIndex) -> Result<Answer> {
        self.check_hypothesis(h)?;
        self.check_query(q)?;
        if j.0 >= self.c {
            return Err(Error::InvalidComponent(j.0, self.c));
        }
        Ok(Answer(self.row(h.0, q.0)[j.0]))
    }

    /// `h(q) = (h(q,0), ..., h(q,c-1))`.
    pub fn evaluate(&self, h: HypothesisId, q: QueryId) -> Result<Vec<Answer>> {
        self.check_hypothesis(h)?;
        self.check_query(q)?;
        Ok(self.row(h.0, q.0).iter().map(|&a| Answer(a)).collect())
    }

    /// Raw answer row; ids must be valid.
    pub fn answers(&self, h: HypothesisId, q: QueryId) -> &[u8] {
        self.row(h.0, q.0)
    }

    pub fn truth(&self, q: QueryId) -> &[u8] {
        self.row(self.target.0, q.0)
    }

    pub fn is_correct_on(&self, h: HypothesisId, q: QueryId) -> bool {
        self.row(h.0, q.0) == self.truth(q)
    }

    /// Whole-query error `Pr_q[h(q) != h*(q)]`.
    pub fn err(&self, h: HypothesisId) -> f64 {
        self.err[h.0]
    }

    /// Per-component error `Pr_{q, j}[h(q,j) != h*(q,j)]` with `j` uniform.
    pub fn err_c(&self, h: HypothesisId) -> f64 {
        self.err_c[h.0]
    }

    /// Number of non-zero answers of `h` over every `(q, j)`.
    pub fn ones(&self, h: HypothesisId) -> usize {
        self.ones[h.0]
    }

    /// Hypotheses answering `a` at `(q, j)`.
    pub fn mask(&self, q: QueryId, j: ComponentIndex, a: Answer) -> &FixedBitSet {
        &self.masks[(q.0 * self.c + j.0) * self.alphabet + a.0 as usize]
    }

    /// Ids and alphabet of a record, and that an accept carries all `c` values.
    pub fn validate_record(&self, record: &FeedbackRecord) -> Result<()> {
        self.check_query(record.query)?;
        let check_answer = |a: Answer| {
            if (a.0 as usize) < self.alphabet {
                Ok(())
            } else {
                Err(Error::InvalidAnswer(a.0, self.alphabet))
            }
        };
        match &record.kind {
            FeedbackKind::Accept { displayed } => {
                if displayed.len() != self.c {
                    return Err(Error::MalformedRecord(format!(
                        "accept carries {} values, expected {}",
                        displayed.len(),
                        self.c
                    )));
                }
                displayed.iter().try_for_each(|&a| check_answer(a))
            }
            FeedbackKind::Correct { component, value } => {
                if component.0 >= self.c {
                    return Err(Error::InvalidComponent(component.0, self.c));
                }
                check_answer(*value)
            }
        }
    }

    pub fn is_consistent(&self, h: HypothesisId, transcript: &Transcript) -> bool {
        transcript.records().iter().all(|r| self.agrees_with(h, r))
    }

    pub fn agrees_with(&self, h: HypothesisId, record: &FeedbackRecord) -> bool {
        let row = self.row(h.0, record.query.0);
        match &record.kind {
            FeedbackKind::Accept { displayed } => displayed.iter().zip(row).all(|(a, &b)| a.0 == b),
            FeedbackKind::Correct { component, value } => row[component.0] == value.0,
        }
    }

    pub fn full_version_space(&self) -> VersionSpace {
        let mut alive = FixedBitSet::with_capacity(self.n_h);
        alive.insert_range(..);
        VersionSpace {
            alive,
            count: self.n_h,
        }
    }

    /// `{h : is_consistent(h, transcript)}`.
    pub fn consistent_set(&self, transcript: &Transcript) -> VersionSpace {
        let mut vs = self.full_version_space();
        for r in transcript.records() {
            vs.restrict(self, r);
        }
        vs
    }
}

/// The set of hypotheses still consistent with feedback.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VersionSpace {
    alive: FixedBitSet,
    count: usize,
}

impl VersionSpace {
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn contains(&self, h: HypothesisId) -> bool {
        self.alive.contains(h.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = HypothesisId> + '_ {
        self.alive.ones().map(HypothesisId)
    }

    pub fn first(&self) -> Option<HypothesisId> {
        self.alive.minimum().map(HypothesisId)
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.alive
    }

    pub fn restrict_pair(&mut self, inst: &Instance, q: QueryId, j: ComponentIndex, a: Answer) {
        self.alive.intersect_with(inst.mask(q, j, a));
        self.count = self.alive.count_ones(..);
    }

    pub fn restrict(&mut self, inst: &Instance, record: &FeedbackRecord) {
        for (j, a) in record.constraints() {
            self.alive.intersect_with(inst.mask(record.query, j, a));
        }
        self.count = self.alive.count_ones(..);
    }

    /// How many members would be removed by learning `h*(q,j) = a`.
    pub fn eliminated_by(
        &self,
        inst: &Instance,
        q: QueryId,
        j: ComponentIndex,
        a: Answer,
    ) -> usize {
        self.count - self.alive.intersection_count(inst.mask(q, j, a))
    }
}
