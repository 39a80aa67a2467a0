//! Live sessions in which a person plays the expert.
//!
//! A session is fully determined by its config (space, mode, learner, seed)
//! and the feedback it receives, so an exported transcript replays to the
//! same trajectory. In oracle mode a known target validates every answer; in
//! authoritative mode the person is the target and only consistency with
//! earlier feedback is enforced.

use std::collections::HashMap;
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::experiments::parse_learner;
use crate::instance::Instance;
use crate::learners::{LearnerState, RunParameters};
use crate::protocol::{
    Answer, ComponentIndex, FeedbackRecord, HypothesisId, ProtocolState, QueryId, Transcript,
};
use crate::spaces::SpaceSpec;

/// First line of an exported transcript.
pub const HEADER_PREFIX: &str = "# session ";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SessionMode {
    /// Answers are checked against a known target (index or rendering);
    /// without one, the space's default target.
    Oracle {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target: Option<String>,
    },
    /// The person is the target.
    Authoritative,
}

impl Default for SessionMode {
    fn default() -> Self {
        SessionMode::Oracle { target: None }
    }
}

fn default_epsilon() -> f64 {
    0.2
}

fn default_delta() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    #[serde(deserialize_with = "SpaceSpec::deserialize_either")]
    pub space: SpaceSpec,
    #[serde(default)]
    pub mode: SessionMode,
    /// Defaults to `threshold-min` on threshold spaces, `random` elsewhere.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learner: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

impl SessionConfig {
    pub fn new(space: SpaceSpec) -> Self {
        Self {
            space,
            mode: SessionMode::default(),
            learner: None,
            seed: 0,
            epsilon: default_epsilon(),
            delta: default_delta(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FeedbackAction {
    Accept,
    Correct { component: usize, value: u8 },
}

/// Feedback from the client, echoing the step it answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackRequest {
    pub step: u64,
    #[serde(flatten)]
    pub action: FeedbackAction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SessionError {
    NotFound(String),
    StaleStep {
        expected: u64,
        got: u64,
    },
    Terminated,
    /// The correction repeats the displayed value.
    NotACorrection(String),
    /// Oracle mode: the answer disagrees with the target.
    WrongFeedback(String),
    /// Authoritative mode: the answer contradicts earlier feedback.
    Contradiction(String),
    InvalidFeedback(String),
    InvalidConfig(String),
    Replay(String),
    Io(String),
}

impl SessionError {
    /// HTTP status for the error.
    pub fn status(&self) -> u16 {
        match self {
            SessionError::NotFound(_) => 404,
            SessionError::StaleStep { .. } | SessionError::Terminated => 409,
            SessionError::Io(_) => 500,
            _ => 422,
        }
    }

    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::NotFound(_) => "not-found",
            SessionError::StaleStep { .. } => "stale-step",
            SessionError::Terminated => "terminated",
            SessionError::NotACorrection(_) => "not-a-correction",
            SessionError::WrongFeedback(_) => "wrong-feedback",
            SessionError::Contradiction(_) => "contradiction",
            SessionError::InvalidFeedback(_) => "invalid-feedback",
            SessionError::InvalidConfig(_) => "invalid-config",
            SessionError::Replay(_) => "replay-mismatch",
            SessionError::Io(_) => "io",
        }
    }
}

impl fmt::Display for SessionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SessionError::NotFound(id) => write!(f, "no session '{id}'"),
            SessionError::StaleStep { expected, got } => {
                write!(
                    f,
                    "feedback is for step {got}, the session is at step {expected}"
                )
            }
            SessionError::Terminated => f.write_str("the session has terminated"),
            SessionError::NotACorrection(d)
            | SessionError::WrongFeedback(d)
            | SessionError::Contradiction(d)
            | SessionError::InvalidFeedback(d)
            | SessionError::InvalidConfig(d)
            | SessionError::Replay(d)
            | SessionError::Io(d) => f.write_str(d),
        }
    }
}

impl std::error::Error for SessionError {}

impl From<Error> for SessionError {
    fn from(e: Error) -> Self {
        SessionError::InvalidConfig(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryPoint {
    /// Feedback events so far.
    pub step: u64,
    pub version_space_size: usize,
    pub hypothesis: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerOption {
    pub value: u8,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentView {
    pub index: usize,
    pub label: String,
    pub displayed: u8,
    pub displayed_label: String,
    pub options: Vec<AnswerOption>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryView {
    pub id: usize,
    pub payload: serde_json::Value,
    pub components: Vec<ComponentView>,
    /// The learner's answer on the query as a whole, when the space has a
    /// natural rendering for it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub display: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub mode: String,
    pub space: String,
    pub kind: String,
    /// Step the pending query belongs to; feedback must echo it.
    pub step: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<QueryView>,
    pub hypothesis: String,
    pub version_space_size: usize,
    pub hypotheses_total: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub err: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub err_c: Option<f64>,
    /// Consecutive accepts so far, and how many end the session.
    pub streak: u64,
    pub verify_window: u64,
    pub terminated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_hypothesis: Option<String>,
    pub history: Vec<HistoryPoint>,
}

#[derive(Debug, Clone)]
struct Pending {
    step: u64,
    query: QueryId,
    hypothesis: HypothesisId,
    displayed: Vec<Answer>,
}

/// One interactive run.
#[derive(Debug)]
pub struct Session {
    id: String,
    config: SessionConfig,
    instance: Instance,
    oracle: bool,
    params: RunParameters,
    learner: LearnerState,
    state: ProtocolState,
    rng: ChaCha8Rng,
    pending: Option<Pending>,
    history: Vec<HistoryPoint>,
    journal: Option<File>,
}

impl Session {
    pub fn new(id: impl Into<String>, config: SessionConfig) -> Result<Self, SessionError> {
        let space = config.space.build()?;
        let (instance, oracle) = match &config.mode {
            SessionMode::Oracle { target: Some(t) } => {
                let h = space.parse_hypothesis(t).ok_or_else(|| {
                    SessionError::InvalidConfig(format!(
                        "target '{t}' is not a hypothesis of the space"
                    ))
                })?;
                (Instance::with_target(space, h)?, true)
            }
            SessionMode::Oracle { target: None } => (Instance::new(space), true),
            SessionMode::Authoritative => (Instance::new(space), false),
        };
        let default_learner = if instance.space().threshold(HypothesisId(0)).is_some() {
            "threshold-min"
        } else {
            "random"
        };
        let recommended =
            RunParameters::recommended_k(config.epsilon, config.delta, instance.num_hypotheses());
        let learner = parse_learner(
            config.learner.as_deref().unwrap_or(default_learner),
            None,
            recommended,
        )?;
        let params = RunParameters::for_learner(&instance, &learner, config.epsilon, config.delta)?;
        let mut session = Self {
            id: id.into(),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            state: ProtocolState::new(&instance),
            learner: LearnerState::new(learner),
            config,
            instance,
            oracle,
            params,
            pending: None,
            history: Vec::new(),
            journal: None,
        };
        session.advance()?;
        Ok(session)
    }

    /// Replays `records` through a fresh session. Every record must answer
    /// the query the session draws at that step.
    pub fn replay(
        id: impl Into<String>,
        config: SessionConfig,
        records: &[FeedbackRecord],
    ) -> Result<Self, SessionError> {
        let mut s = Self::new(id, config)?;
        for r in records {
            let pending = s.pending.as_ref().ok_or(SessionError::Terminated)?;
            if r.step != pending.step || r.query != pending.query {
                return Err(SessionError::Replay(format!(
                    "record for step {} asks about query {}, the session drew query {} at step {}",
                    r.step, r.query.0, pending.query.0, pending.step
                )));
            }
            let action = match &r.kind {
                crate::protocol::FeedbackKind::Accept { displayed } => {
                    if *displayed != pending.displayed {
                        return Err(SessionError::Replay(format!(
                            "accept at step {} shows different values than the learner displayed",
                            r.step
                        )));
                    }
                    FeedbackAction::Accept
                }
                crate::protocol::FeedbackKind::Correct { component, value } => {
                    FeedbackAction::Correct {
                        component: component.0,
                        value: value.0,
                    }
                }
            };
            s.submit(FeedbackRequest {
                step: r.step,
                action,
            })?;
        }
        Ok(s)
    }

    /// Parses an exported transcript (header line plus records) and replays it.
    pub fn replay_export(id: impl Into<String>, text: &str) -> Result<Self, SessionError> {
        let config = text
            .lines()
            .find_map(|l| l.strip_prefix(HEADER_PREFIX))
            .ok_or_else(|| SessionError::Replay("missing session header line".into()))?;
        let config: SessionConfig =
            serde_json::from_str(config).map_err(|e| SessionError::Replay(e.to_string()))?;
        let transcript = Transcript::read_jsonl(text.as_bytes())
            .map_err(|e| SessionError::Replay(e.to_string()))?;
        Self::replay(id, config, transcript.records())
    }

    /// Appends every record to `path`, starting with the header.
    pub fn journal_to(&mut self, path: PathBuf) -> Result<(), SessionError> {
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| SessionError::Io(format!("{}: {e}", path.display())))?;
        f.write_all(self.export().as_bytes())
            .map_err(|e| SessionError::Io(e.to_string()))?;
        self.journal = Some(f);
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn transcript(&self) -> &Transcript {
        &self.state.transcript
    }

    pub fn history(&self) -> &[HistoryPoint] {
        &self.history
    }

    pub fn terminated(&self) -> bool {
        self.pending.is_none()
    }

    pub fn current_hypothesis(&self) -> HypothesisId {
        self.learner
            .current
            .expect("a hypothesis is chosen at creation")
    }

    /// Draws the next query, or terminates once the current hypothesis has
    /// been accepted often enough in a row.
    fn advance(&mut self) -> Result<(), SessionError> {
        if self.learner.streak >= self.params.verify_window {
            self.pending = None;
            self.push_history();
            return Ok(());
        }
        let step = self.state.step + 1;
        let (h, _) = self.learner.hypothesis_for_step(
            &self.instance,
            &self.state.version,
            step,
            &mut self.rng,
        )?;
        let q = self.instance.distribution().sample(&mut self.rng);
        let displayed = self.instance.evaluate(h, q)?;
        self.pending = Some(Pending {
            step,
            query: q,
            hypothesis: h,
            displayed,
        });
        self.push_history();
        Ok(())
    }

    fn push_history(&mut self) {
        let point = HistoryPoint {
            step: self.state.step,
            version_space_size: self.state.version.len(),
            hypothesis: self.current_hypothesis().0,
        };
        if self.history.last().map(|p| p.step) != Some(point.step) {
            self.history.push(point);
        }
    }

    fn record_for(
        &self,
        pending: &Pending,
        action: FeedbackAction,
    ) -> Result<FeedbackRecord, SessionError> {
        let truth = self.oracle.then(|| self.instance.truth(pending.query));
        match action {
            FeedbackAction::Accept => {
                if let Some(t) = truth {
                    if pending.displayed.iter().zip(t).any(|(a, &b)| a.0 != b) {
                        return Err(SessionError::WrongFeedback(
                            "accepted a display that is wrong on some component".into(),
                        ));
                    }
                }
                Ok(FeedbackRecord::accept(
                    pending.step,
                    pending.query,
                    pending.displayed.clone(),
                ))
            }
            FeedbackAction::Correct { component, value } => {
                let c = self.instance.components();
                if component >= c {
                    return Err(SessionError::InvalidFeedback(format!(
                        "component {component} out of range (c = {c})"
                    )));
                }
                if value as usize >= self.instance.alphabet_size() {
                    return Err(SessionError::InvalidFeedback(format!(
                        "value {value} outside the answer alphabet of size {}",
                        self.instance.alphabet_size()
                    )));
                }
                if pending.displayed[component].0 == value {
                    return Err(SessionError::NotACorrection(format!(
                        "component {component} already displays {value}"
                    )));
                }
                if let Some(t) = truth {
                    if pending.displayed[component].0 == t[component] {
                        return Err(SessionError::WrongFeedback(format!(
                            "component {component} is already correct"
                        )));
                    }
                    if t[component] != value {
                        return Err(SessionError::WrongFeedback(format!(
                            "component {component} should be {}, not {value}",
                            t[component]
                        )));
                    }
                }
                Ok(FeedbackRecord::correct(
                    pending.step,
                    pending.query,
                    ComponentIndex(component),
                    Answer(value),
                ))
            }
        }
    }

    /// Applies one feedback event and draws the next query.
    pub fn submit(&mut self, request: FeedbackRequest) -> Result<SessionView, SessionError> {
        let pending = self.pending.clone().ok_or(SessionError::Terminated)?;
        if request.step != pending.step {
            return Err(SessionError::StaleStep {
                expected: pending.step,
                got: request.step,
            });
        }
        let record = self.record_for(&pending, request.action)?;
        self.state.transcript.check(&record).map_err(|e| match e {
            Error::Contradiction { .. } => SessionError::Contradiction(e.to_string()),
            other => SessionError::InvalidFeedback(other.to_string()),
        })?;
        let mut narrowed = self.state.version.clone();
        narrowed.restrict(&self.instance, &record);
        if narrowed.is_empty() {
            return Err(SessionError::Contradiction(
                "no hypothesis in the space agrees with all feedback including this one".into(),
            ));
        }
        if let Some(f) = self.journal.as_mut() {
            serde_json::to_writer(&mut *f, &record).map_err(|e| SessionError::Io(e.to_string()))?;
            f.write_all(b"\n")
                .map_err(|e| SessionError::Io(e.to_string()))?;
        }
        self.state
            .apply(&self.instance, record.clone())
            .map_err(|e| SessionError::InvalidFeedback(e.to_string()))?;
        self.learner.observe(&record);
        self.advance()?;
        Ok(self.view())
    }

    pub fn view(&self) -> SessionView {
        let space = self.instance.space();
        let h = self.current_hypothesis();
        let query = self.pending.as_ref().map(|p| {
            let options = |q: QueryId, j: ComponentIndex| {
                (0..self.instance.alphabet_size() as u8)
                    .map(|a| AnswerOption {
                        value: a,
                        label: space.render_answer(q, j, Answer(a)),
                    })
                    .collect()
            };
            QueryView {
                id: p.query.0,
                payload: space.query_payload(p.query),
                components: p
                    .displayed
                    .iter()
                    .enumerate()
                    .map(|(j, &a)| ComponentView {
                        index: j,
                        label: space.render_component(p.query, ComponentIndex(j)),
                        displayed: a.0,
                        displayed_label: space.render_answer(p.query, ComponentIndex(j), a),
                        options: options(p.query, ComponentIndex(j)),
                    })
                    .collect(),
                display: space.render_display(p.hypothesis, p.query),
            }
        });
        SessionView {
            id: self.id.clone(),
            mode: if self.oracle {
                "oracle"
            } else {
                "authoritative"
            }
            .into(),
            space: self.config.space.to_string(),
            kind: space.kind().into(),
            step: self.pending.as_ref().map_or(self.state.step, |p| p.step),
            query,
            hypothesis: space.render_hypothesis(h),
            version_space_size: self.state.version.len(),
            hypotheses_total: self.instance.num_hypotheses(),
            err: self.oracle.then(|| self.instance.err(h)),
            err_c: self.oracle.then(|| self.instance.err_c(h)),
            streak: self.learner.streak,
            verify_window: self.params.verify_window,
            terminated: self.terminated(),
            final_hypothesis: self.terminated().then(|| space.render_hypothesis(h)),
            history: self.history.clone(),
        }
    }

    /// Header line with the config, then one JSON record per line.
    pub fn export(&self) -> String {
        let header = serde_json::to_string(&self.config).expect("config serializes");
        format!(
            "{HEADER_PREFIX}{header}\n{}",
            self.state.transcript.to_jsonl()
        )
    }
}

/// Example space specs offered to clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceOffer {
    pub kind: String,
    pub spec: String,
    pub description: String,
}

pub fn available_spaces() -> Vec<SpaceOffer> {
    let offer = |kind: &str, spec: &str, description: &str| SpaceOffer {
        kind: kind.into(),
        spec: spec.into(),
        description: description.into(),
    };
    vec![
        offer(
            "grid",
            "grid:M=20,c=4,pool=64",
            "thresholds on a grid; each query labels c points",
        ),
        offer("single", "single:c=10", "one repeated query (1/c, ..., 1)"),
        offer(
            "two-point",
            "two-point:c=8,eps=0.05",
            "two queries, the first with mass 2ε",
        ),
        offer(
            "sparse",
            "sparse:l=2,c=3,eps=0.25",
            "ℓ rare queries where any one component may be 1",
        ),
        offer(
            "triplet",
            "triplet:n=5,m=4",
            "rooted binary trees on n leaves; queries are m-leaf subtrees",
        ),
    ]
}

/// Concurrent in-memory registry. Each session is locked independently.
#[derive(Debug, Default)]
pub struct SessionStore {
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    journal_dir: Option<PathBuf>,
}

impl SessionStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Journals every session to `<dir>/<id>.jsonl`.
    pub fn with_journal(dir: PathBuf) -> Self {
        Self {
            sessions: RwLock::default(),
            journal_dir: Some(dir),
        }
    }

    pub fn create(&self, config: SessionConfig) -> Result<SessionView, SessionError> {
        let id = format!("{:016x}", rand::random::<u64>());
        let mut session = Session::new(id.clone(), config)?;
        if let Some(dir) = &self.journal_dir {
            session.journal_to(dir.join(format!("{id}.jsonl")))?;
        }
        let view = session.view();
        self.sessions
            .write()
            .expect("session map lock")
            .insert(id, Arc::new(Mutex::new(session)));
        Ok(view)
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, SessionError> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| SessionError::NotFound(id.into()))
    }

    pub fn view(&self, id: &str) -> Result<SessionView, SessionError> {
        Ok(self.get(id)?.lock().expect("session lock").view())
    }

    pub fn submit(&self, id: &str, request: FeedbackRequest) -> Result<SessionView, SessionError> {
        self.get(id)?.lock().expect("session lock").submit(request)
    }

    pub fn export(&self, id: &str) -> Result<String, SessionError> {
        Ok(self.get(id)?.lock().expect("session lock").export())
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("session map lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Reads an export from any reader.
pub fn read_export<R: BufRead>(mut input: R) -> Result<String, SessionError> {
    let mut text = String::new();
    input
        .read_to_string(&mut text)
        .map_err(|e| SessionError::Io(e.to_string()))?;
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(space: &str) -> SessionConfig {
        SessionConfig::new(space.parse().unwrap())
    }

    fn truthful(s: &Session) -> FeedbackRequest {
        let v = s.view();
        let q = QueryId(v.query.as_ref().unwrap().id);
        let truth = s.instance().truth(q);
        let action = v
            .query
            .as_ref()
            .unwrap()
            .components
            .iter()
            .find(|c| c.displayed != truth[c.index])
            .map_or(FeedbackAction::Accept, |c| FeedbackAction::Correct {
                component: c.index,
                value: truth[c.index],
            });
        FeedbackRequest {
            step: v.step,
            action,
        }
    }

    #[test]
    fn grid_session_starts_with_full_version_space() {
        let mut cfg = config("grid:M=4,c=2,pool=8");
        cfg.seed = 7;
        let s = Session::new("a", cfg).unwrap();
        let v = s.view();
        assert_eq!(v.version_space_size, 5);
        assert_eq!(v.step, 1);
        assert_eq!(v.query.as_ref().unwrap().components.len(), 2);
        assert_eq!(
            v.query.unwrap().payload["points"].as_array().unwrap().len(),
            2
        );
        assert!(v.err.is_some());
    }

    #[test]
    fn triplet_view_lists_four_triplets() {
        let s = Session::new("t", config("triplet:n=5,m=4")).unwrap();
        let q = s.view().query.unwrap();
        assert_eq!(q.components.len(), 4);
        assert!(q.components.iter().all(|c| c.options.len() == 3));
        assert!(q.display.unwrap().ends_with(';'));
    }

    #[test]
    fn authoritative_hides_errors() {
        let mut cfg = config("triplet:n=4,m=4");
        cfg.mode = SessionMode::Authoritative;
        let v = Session::new("x", cfg).unwrap().view();
        assert!(v.err.is_none() && v.err_c.is_none());
        let json = serde_json::to_value(&v).unwrap();
        assert!(json.get("err").is_none());
    }

    #[test]
    fn guards() {
        let mut s = Session::new("g", config("triplet:n=5,m=4")).unwrap();
        // Walk until some display is wrong.
        loop {
            let r = truthful(&s);
            if matches!(r.action, FeedbackAction::Correct { .. }) {
                break;
            }
            s.submit(r).unwrap();
        }
        let v = s.view();
        let stale = FeedbackRequest {
            step: v.step + 1,
            action: FeedbackAction::Accept,
        };
        assert_eq!(s.submit(stale).unwrap_err().status(), 409);
        let comp = &v.query.as_ref().unwrap().components[0];
        let same = FeedbackRequest {
            step: v.step,
            action: FeedbackAction::Correct {
                component: 0,
                value: comp.displayed,
            },
        };
        assert_eq!(s.submit(same).unwrap_err().code(), "not-a-correction");
        let wrong_accept = FeedbackRequest {
            step: v.step,
            action: FeedbackAction::Accept,
        };
        assert_eq!(s.submit(wrong_accept).unwrap_err().status(), 422);
        // Rejections leave the session untouched.
        assert_eq!(s.view(), v);
    }

    #[test]
    fn oracle_session_converges_to_the_target_and_replays() {
        let mut cfg = config("triplet:n=5,m=4");
        cfg.seed = 3;
        let mut s = Session::new("o", cfg).unwrap();
        let mut last = s.view().version_space_size;
        while !s.terminated() {
            let v = s.submit(truthful(&s)).unwrap();
            assert!(v.version_space_size <= last);
            assert!(s
                .instance()
                .is_consistent(s.instance().target(), s.transcript()));
            last = v.version_space_size;
        }
        let view = s.view();
        assert!(view.final_hypothesis.is_some());
        let text = s.export();
        let r = Session::replay_export("o2", &text).unwrap();
        assert_eq!(r.history(), s.history());
        assert_eq!(r.transcript().records(), s.transcript().records());
    }

    #[test]
    fn authoritative_contradictions_are_rejected() {
        let mut cfg = config("single:c=2");
        cfg.mode = SessionMode::Authoritative;
        let mut s = Session::new("auth", cfg).unwrap();
        // Threshold 1 shows (0, 0); claim x=0.5 is 1, then claim the accept of a
        // display that says otherwise is impossible to reach, so contradict directly.
        let v = s.view();
        assert_eq!(v.query.as_ref().unwrap().components[0].displayed, 0);
        s.submit(FeedbackRequest {
            step: 1,
            action: FeedbackAction::Correct {
                component: 0,
                value: 1,
            },
        })
        .unwrap();
        // Now threshold 0 shows (1, 1); saying x=0.5 is 0 contradicts step 1.
        let err = s
            .submit(FeedbackRequest {
                step: 2,
                action: FeedbackAction::Correct {
                    component: 0,
                    value: 0,
                },
            })
            .unwrap_err();
        assert_eq!(err.code(), "contradiction");
    }

    #[test]
    fn fresh_export_has_only_the_header() {
        let s = Session::new("f", config("single:c=4")).unwrap();
        let text = s.export();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with(HEADER_PREFIX));
        assert_eq!(
            Session::replay_export("g", &text)
                .unwrap()
                .view()
                .version_space_size,
            5
        );
    }

    #[test]
    fn store_round_trip() {
        let store = SessionStore::new();
        let v = store.create(config("single:c=4")).unwrap();
        assert_eq!(store.view(&v.id).unwrap(), v);
        assert_eq!(store.view("missing").unwrap_err().status(), 404);
        assert!(store.export(&v.id).unwrap().starts_with(HEADER_PREFIX));
    }

    #[test]
    fn config_accepts_shorthand_and_tables() {
        let c: SessionConfig = serde_json::from_str(
            r#"{"space": "grid:M=4,c=2", "seed": 7, "mode": {"kind": "authoritative"}}"#,
        )
        .unwrap();
        assert_eq!(c.mode, SessionMode::Authoritative);
        let c: SessionConfig =
            serde_json::from_str(r#"{"space": {"kind": "single", "c": 3}}"#).unwrap();
        assert_eq!(c.space, SpaceSpec::Single { c: 3 });
        assert!(
            serde_json::from_str::<SessionConfig>(r#"{"space": "single:c=3", "bogus": 1}"#)
                .is_err()
        );
    }
}
