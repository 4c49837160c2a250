//! Experiment sessions: configuration, in-memory state and the append-only
//! logs that persist it.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use ornament_core::survey::io::{response_to_jsonl_line, responses_from_jsonl};
use ornament_core::survey::{analyze, AnalysisReport, Experiment, SurveyResponse, TaskSet, TaskSpec};
use serde::{Deserialize, Serialize};

use crate::assets;
use crate::error::{CliError, CliResult};

pub const RESPONSES_FILE: &str = "responses.jsonl";
pub const EVENTS_FILE: &str = "session.jsonl";

fn default_reveal() -> usize {
    3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SessionConfig {
    pub session_id: String,
    /// Tasks in presentation order, warm-ups included.
    pub tasks: Vec<TaskSpec>,
    /// Image files by ornament id; ids without an entry are rendered from
    /// the group named in the id.
    #[serde(default)]
    pub ornament_assets: BTreeMap<String, PathBuf>,
    /// Number of leading warm-ups whose answer is revealed after responding.
    #[serde(default = "default_reveal")]
    pub warmup_reveal: usize,
    /// Overrides every task's time limit when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_limit_seconds: Option<u32>,
    /// Analysis to run on the results; inferred from the tasks when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<u8>,
}

impl SessionConfig {
    /// Reads a config and checks it; relative asset paths are resolved
    /// against the config's directory.
    pub fn load(path: &Path) -> CliResult<SessionConfig> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut config: SessionConfig = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in config.ornament_assets.values_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.session_id.trim().is_empty() {
            return Err(CliError::Schema("empty session id".into()));
        }
        self.task_set()?;
        if let Some(e) = self.experiment {
            Experiment::try_from(e)?;
        }
        for id in self.ornament_ids() {
            match self.ornament_assets.get(&id) {
                Some(p) if !p.is_file() => {
                    return Err(CliError::Schema(format!("asset of '{id}' not found: {}", p.display())))
                }
                Some(_) => {}
                None if assets::source_of(&id).is_none() => {
                    return Err(CliError::Schema(format!("no asset for '{id}' and no group in its name")))
                }
                None => {}
            }
        }
        Ok(())
    }

    /// Tasks with the session-wide time limit applied.
    pub fn task_set(&self) -> CliResult<TaskSet> {
        let mut tasks = self.tasks.clone();
        if let Some(limit) = self.time_limit_seconds {
            for t in &mut tasks {
                t.time_limit_seconds = limit;
            }
        }
        Ok(TaskSet::new(tasks)?)
    }

    pub fn ornament_ids(&self) -> BTreeSet<String> {
        self.tasks
            .iter()
            .flat_map(|t| std::iter::once(&t.query_ornament_id).chain(&t.option_ornament_ids))
            .cloned()
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Open,
    Closed,
}

/// One line of the session event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "lowercase")]
pub enum Event {
    Enroll {
        #[serde(rename = "participantId")]
        participant_id: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    Close,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SessionError {
    UnknownParticipant(String),
    Closed,
    Invalid(String),
    /// A second, different answer to an answered task.
    Conflict(String),
    NotClosed,
}

impl std::fmt::Display for SessionError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SessionError::UnknownParticipant(p) => write!(f, "unknown participant '{p}'"),
            SessionError::Closed => write!(f, "session is closed"),
            SessionError::Invalid(m) => write!(f, "{m}"),
            SessionError::Conflict(m) => write!(f, "{m}"),
            SessionError::NotClosed => write!(f, "results are available once the session is closed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubmitOutcome {
    pub accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reveal: Option<String>,
}

/// Everything the service knows about a session.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionState {
    pub session_id: String,
    pub tasks: TaskSet,
    pub warmup_reveal: usize,
    pub experiment: Experiment,
    pub participants: Vec<String>,
    pub names: BTreeMap<String, Option<String>>,
    pub responses: Vec<SurveyResponse>,
    pub status: Status,
}

impl SessionState {
    pub fn new(config: &SessionConfig) -> CliResult<Self> {
        let tasks = config.task_set()?;
        let experiment = match config.experiment {
            Some(e) => Experiment::try_from(e)?,
            None => Experiment::infer(&tasks)?,
        };
        Ok(SessionState {
            session_id: config.session_id.clone(),
            tasks,
            warmup_reveal: config.warmup_reveal,
            experiment,
            participants: Vec::new(),
            names: BTreeMap::new(),
            responses: Vec::new(),
            status: Status::Open,
        })
    }

    pub fn apply(&mut self, event: &Event) {
        match event {
            Event::Enroll { participant_id, name } => {
                self.participants.push(participant_id.clone());
                self.names.insert(participant_id.clone(), name.clone());
            }
            Event::Close => self.status = Status::Closed,
        }
    }

    /// Id for the next enrollment.
    pub fn next_participant_id(&self) -> String {
        format!("p{:02}", self.participants.len() + 1)
    }

    fn check_participant(&self, id: &str) -> Result<(), SessionError> {
        if self.names.contains_key(id) {
            Ok(())
        } else {
            Err(SessionError::UnknownParticipant(id.into()))
        }
    }

    fn answer(&self, participant: &str, task: &str) -> Option<&SurveyResponse> {
        self.responses.iter().find(|r| r.participant_id == participant && r.task_id == task)
    }

    /// First task in list order the participant has not answered.
    pub fn next_task(&self, participant: &str) -> Result<Option<&TaskSpec>, SessionError> {
        self.check_participant(participant)?;
        Ok(self.tasks.tasks.iter().find(|t| self.answer(participant, &t.task_id).is_none()))
    }

    fn reveal_for(&self, task: &TaskSpec) -> Option<String> {
        let pos = self.tasks.tasks.iter().filter(|t| t.warmup).position(|t| t.task_id == task.task_id)?;
        (pos < self.warmup_reveal).then(|| task.correct_option_id.clone()).flatten()
    }

    /// Validates a response and returns it as it should be stored (late
    /// flag set by the server), or `None` when it repeats a stored answer.
    pub fn prepare(&self, r: &SurveyResponse) -> Result<(Option<SurveyResponse>, SubmitOutcome), SessionError> {
        self.check_participant(&r.participant_id)?;
        let task = self.tasks.get(&r.task_id).map_err(|e| SessionError::Invalid(e.to_string()))?;
        r.validate(task).map_err(|e| SessionError::Invalid(e.to_string()))?;
        let outcome = SubmitOutcome { accepted: true, reveal: self.reveal_for(task) };
        if let Some(prev) = self.answer(&r.participant_id, &r.task_id) {
            return if prev.most_similar == r.most_similar && prev.least_similar == r.least_similar {
                Ok((None, outcome))
            } else {
                Err(SessionError::Conflict(format!(
                    "'{}' already answered '{}' differently",
                    r.participant_id, r.task_id
                )))
            };
        }
        if self.status == Status::Closed {
            return Err(SessionError::Closed);
        }
        let mut stored = r.clone();
        stored.late = r.elapsed_ms.is_some_and(|ms| ms > u64::from(task.time_limit_seconds) * 1000);
        Ok((Some(stored), outcome))
    }

    pub fn results(&self) -> Result<AnalysisReport, SessionError> {
        if self.status != Status::Closed {
            return Err(SessionError::NotClosed);
        }
        analyze(&self.tasks, &self.responses, self.experiment).map_err(|e| SessionError::Invalid(e.to_string()))
    }
}

/// Append-only logs in a data directory; every line is flushed to disk
/// before the write is acknowledged.
#[derive(Debug)]
pub struct Store {
    dir: PathBuf,
    responses: File,
    events: File,
}

fn open_append(path: &Path) -> CliResult<File> {
    OpenOptions::new().create(true).append(true).open(path).map_err(|e| CliError::io(path, e))
}

impl Store {
    pub fn open(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Store {
            dir: dir.to_path_buf(),
            responses: open_append(&dir.join(RESPONSES_FILE))?,
            events: open_append(&dir.join(EVENTS_FILE))?,
        })
    }

    fn append(file: &mut File, path: &Path, line: &str) -> CliResult<()> {
        file.write_all(line.as_bytes()).and_then(|_| file.sync_data()).map_err(|e| CliError::io(path, e))
    }

    pub fn append_response(&mut self, r: &SurveyResponse) -> CliResult<()> {
        let path = self.dir.join(RESPONSES_FILE);
        Self::append(&mut self.responses, &path, &response_to_jsonl_line(r))
    }

    pub fn append_event(&mut self, e: &Event) -> CliResult<()> {
        let mut line = serde_json::to_string(e).expect("event serializes");
        line.push('\n');
        let path = self.dir.join(EVENTS_FILE);
        Self::append(&mut self.events, &path, &line)
    }
}

/// Rebuilds the state of a session from the logs in `dir` (an absent
/// directory is a fresh session).
pub fn replay(config: &SessionConfig, dir: &Path) -> CliResult<SessionState> {
    let mut state = SessionState::new(config)?;
    let read = |name: &str| -> CliResult<String> {
        let path = dir.join(name);
        match fs::read_to_string(&path) {
            Ok(t) => Ok(t),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(String::new()),
            Err(e) => Err(CliError::io(path, e)),
        }
    };
    for (i, line) in read(EVENTS_FILE)?.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let event: Event =
            serde_json::from_str(line).map_err(|e| CliError::Schema(format!("{EVENTS_FILE} line {}: {e}", i + 1)))?;
        state.apply(&event);
    }
    for r in responses_from_jsonl(&read(RESPONSES_FILE)?)? {
        let late = r.late;
        let was_closed = std::mem::replace(&mut state.status, Status::Open);
        let prepared = state.prepare(&r).map_err(|e| CliError::Schema(format!("{RESPONSES_FILE}: {e}")))?;
        state.status = was_closed;
        match prepared {
            (Some(mut stored), _) => {
                stored.late = late;
                state.responses.push(stored);
            }
            (None, _) => return Err(CliError::Schema(format!("{RESPONSES_FILE}: repeated response {r:?}"))),
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use ornament_core::survey::synthetic::experiment2_tasks;

    use super::*;

    fn config() -> SessionConfig {
        SessionConfig {
            session_id: "s".into(),
            tasks: experiment2_tasks(true).tasks,
            ornament_assets: BTreeMap::new(),
            warmup_reveal: 3,
            time_limit_seconds: None,
            experiment: None,
        }
    }

    fn enroll(s: &mut SessionState) -> String {
        let id = s.next_participant_id();
        s.apply(&Event::Enroll { participant_id: id.clone(), name: None });
        id
    }

    #[test]
    fn reveal_only_on_the_first_warmups() {
        let mut s = SessionState::new(&config()).unwrap();
        let p = enroll(&mut s);
        for (i, t) in s.tasks.tasks.clone().iter().enumerate() {
            assert_eq!(s.next_task(&p).unwrap().unwrap().task_id, t.task_id);
            let r = SurveyResponse::new(&p, &t.task_id, &t.option_ornament_ids[0], None);
            let (stored, out) = s.prepare(&r).unwrap();
            assert_eq!(out.reveal.is_some(), i < 3, "task {i}");
            s.responses.push(stored.unwrap());
        }
        assert_eq!(s.next_task(&p).unwrap(), None);
    }

    #[test]
    fn retries_are_idempotent_and_changes_conflict() {
        let mut s = SessionState::new(&config()).unwrap();
        let p = enroll(&mut s);
        let r = SurveyResponse::new(&p, "task01", "p6m-1", None);
        let (stored, _) = s.prepare(&r).unwrap();
        s.responses.push(stored.unwrap());
        assert_eq!(s.prepare(&r).unwrap().0, None);
        let other = SurveyResponse::new(&p, "task01", "p6-3", None);
        assert!(matches!(s.prepare(&other), Err(SessionError::Conflict(_))));
    }

    #[test]
    fn validation_errors() {
        let mut s = SessionState::new(&config()).unwrap();
        assert!(matches!(s.next_task("nobody"), Err(SessionError::UnknownParticipant(_))));
        let p = enroll(&mut s);
        let bad = SurveyResponse::new(&p, "task01", "cmm-new", None);
        assert!(matches!(s.prepare(&bad), Err(SessionError::Invalid(_))));
        let mut late = SurveyResponse::new(&p, "task01", "p6m-1", None);
        late.elapsed_ms = Some(30_001);
        assert!(s.prepare(&late).unwrap().0.unwrap().late);
        late.elapsed_ms = Some(30_000);
        assert!(!s.prepare(&late).unwrap().0.unwrap().late);
        s.apply(&Event::Close);
        assert_eq!(s.prepare(&late), Err(SessionError::Closed));
    }

    #[test]
    fn logs_replay_to_the_same_state() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config();
        let mut s = SessionState::new(&cfg).unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        for _ in 0..2 {
            let id = s.next_participant_id();
            let e = Event::Enroll { participant_id: id, name: Some("x".into()) };
            store.append_event(&e).unwrap();
            s.apply(&e);
        }
        let mut r = SurveyResponse::new("p02", "warmup1", "warm-p4m-a", None);
        r.elapsed_ms = Some(45_000);
        let stored = s.prepare(&r).unwrap().0.unwrap();
        store.append_response(&stored).unwrap();
        s.responses.push(stored);
        store.append_event(&Event::Close).unwrap();
        s.apply(&Event::Close);
        assert_eq!(replay(&cfg, dir.path()).unwrap(), s);
    }
}
