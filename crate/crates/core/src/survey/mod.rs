//! Perceptual survey analytics: rankings, Kendall tau distances, distance
//! and similarity matrices, tSNE embedding and the reports built on them.

pub mod io;
pub mod kendall;
pub mod matrices;
pub mod report;
pub mod synthetic;
pub mod tsne;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use kendall::{kendall_tau, normalized_kendall};
pub use matrices::{
    ornament_similarity_matrix, participant_distance_matrices, per_task_distance_matrices, similarity_to_distance,
    DistanceMatrix, SimilarityMatrix, Unobserved,
};
pub use report::{analyze, AnalysisReport, Experiment};
pub use tsne::{embedding_to_rgb, tsne, Embedding, RgbMapping, TsneOptions};

/// Time limit per task used in both experiments.
pub const DEFAULT_TIME_LIMIT_SECONDS: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskMode {
    /// Pick the most and the least similar option among three.
    MostAndLeast,
    /// Pick the single option most similar to the query.
    PickSimilar,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TaskSpec {
    pub task_id: String,
    pub query_ornament_id: String,
    pub option_ornament_ids: Vec<String>,
    pub mode: TaskMode,
    #[serde(default = "default_time_limit")]
    pub time_limit_seconds: u32,
    /// Training task, left out of analytics.
    #[serde(default, skip_serializing_if = "is_false")]
    pub warmup: bool,
    /// Answer revealed after a warm-up response, when the session allows it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct_option_id: Option<String>,
}

fn default_time_limit() -> u32 {
    DEFAULT_TIME_LIMIT_SECONDS
}

fn is_false(b: &bool) -> bool {
    !*b
}

impl TaskSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.option_ornament_ids.len();
        let bad = |m: String| Err(Error::Invalid(format!("task '{}': {m}", self.task_id)));
        if self.task_id.is_empty() {
            return Err(Error::Invalid("empty task id".into()));
        }
        if !(2..=3).contains(&n) {
            return bad(format!("{n} options, expected 2 or 3"));
        }
        if self.mode == TaskMode::MostAndLeast && n != 3 {
            return bad("most-and-least tasks need three options".into());
        }
        let distinct: BTreeSet<&String> = self.option_ornament_ids.iter().collect();
        if distinct.len() != n {
            return bad("options are not distinct".into());
        }
        if distinct.contains(&self.query_ornament_id) {
            return bad("query is among the options".into());
        }
        if let Some(c) = &self.correct_option_id {
            if !distinct.contains(c) {
                return bad(format!("correct option '{c}' is not an option"));
            }
        }
        Ok(())
    }

    pub fn has_option(&self, id: &str) -> bool {
        self.option_ornament_ids.iter().any(|o| o == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SurveyResponse {
    pub participant_id: String,
    pub task_id: String,
    pub most_similar: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub least_similar: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
    /// Set by the service when the answer came after the time limit.
    #[serde(default, skip_serializing_if = "is_false")]
    pub late: bool,
}

impl SurveyResponse {
    pub fn new(participant: &str, task: &str, most: &str, least: Option<&str>) -> Self {
        SurveyResponse {
            participant_id: participant.into(),
            task_id: task.into(),
            most_similar: most.into(),
            least_similar: least.map(Into::into),
            elapsed_ms: None,
            late: false,
        }
    }

    /// Checks the response against its task.
    pub fn validate(&self, task: &TaskSpec) -> Result<()> {
        let unknown = |o: &str| Error::UnknownOption { task: task.task_id.clone(), option: o.into() };
        if !task.has_option(&self.most_similar) {
            return Err(unknown(&self.most_similar));
        }
        match (&self.least_similar, task.mode) {
            (Some(l), TaskMode::MostAndLeast) if !task.has_option(l) => Err(unknown(l)),
            (Some(_), TaskMode::MostAndLeast) => Ok(()),
            (None, TaskMode::MostAndLeast) => {
                Err(Error::Invalid(format!("task '{}' needs a least-similar answer", task.task_id)))
            }
            (Some(_), TaskMode::PickSimilar) => {
                Err(Error::Invalid(format!("task '{}' takes no least-similar answer", task.task_id)))
            }
            (None, TaskMode::PickSimilar) => Ok(()),
        }
    }
}

/// Ordered task list with lookup by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSet {
    pub tasks: Vec<TaskSpec>,
}

impl TaskSet {
    pub fn new(tasks: Vec<TaskSpec>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for t in &tasks {
            t.validate()?;
            if !seen.insert(t.task_id.as_str()) {
                return Err(Error::Invalid(format!("duplicate task id '{}'", t.task_id)));
            }
        }
        Ok(TaskSet { tasks })
    }

    pub fn get(&self, id: &str) -> Result<&TaskSpec> {
        self.tasks.iter().find(|t| t.task_id == id).ok_or_else(|| Error::UnknownTask(id.into()))
    }

    /// Non-warm-up tasks of the given mode, in list order.
    pub fn scored(&self, mode: TaskMode) -> impl Iterator<Item = &TaskSpec> {
        self.tasks.iter().filter(move |t| !t.warmup && t.mode == mode)
    }
}

/// Ranks given by one participant to the options of one task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ranking {
    pub participant_id: String,
    pub task_id: String,
    pub scores: BTreeMap<String, u32>,
    pub consistent: bool,
}

impl Ranking {
    /// Ranking from options listed best first (rank 1, 2, ...).
    pub fn from_order(participant: &str, task: &str, order: &[&str]) -> Self {
        let scores = order.iter().enumerate().map(|(i, o)| (o.to_string(), i as u32 + 1)).collect();
        Ranking { participant_id: participant.into(), task_id: task.into(), scores, consistent: true }
    }

    /// 1 for the most similar, 3 for the least similar, 2 for the other.
    pub fn from_response(r: &SurveyResponse, task: &TaskSpec) -> Result<Self> {
        r.validate(task)?;
        let least = r.least_similar.as_deref().unwrap_or_default();
        let consistent = r.most_similar != least;
        let scores = task
            .option_ornament_ids
            .iter()
            .map(|o| {
                let rank = if *o == r.most_similar {
                    1
                } else if o == least {
                    3
                } else {
                    2
                };
                (o.clone(), rank)
            })
            .collect();
        Ok(Ranking { participant_id: r.participant_id.clone(), task_id: task.task_id.clone(), scores, consistent })
    }
}

/// Rankings of every most-and-least task and the participants left out.
#[derive(Debug, Clone, PartialEq)]
pub struct Rankings {
    pub rankings: Vec<Ranking>,
    /// Participants with an inconsistent or missing answer on any task.
    pub excluded: BTreeSet<String>,
    pub retained: Vec<String>,
}

/// Scores the most-and-least responses and applies the exclusion rule: a
/// participant inconsistent (or silent) on any task is dropped everywhere.
pub fn build_rankings(responses: &[SurveyResponse], tasks: &TaskSet) -> Result<Rankings> {
    let scored: Vec<&TaskSpec> = tasks.scored(TaskMode::MostAndLeast).collect();
    let mut rankings = Vec::new();
    let mut participants = BTreeSet::new();
    let mut answered: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for r in responses {
        let task = tasks.get(&r.task_id)?;
        if task.warmup || task.mode != TaskMode::MostAndLeast {
            continue;
        }
        participants.insert(r.participant_id.clone());
        answered.entry(&r.participant_id).or_default().insert(&task.task_id);
        rankings.push(Ranking::from_response(r, task)?);
    }
    let mut excluded: BTreeSet<String> =
        rankings.iter().filter(|r| !r.consistent).map(|r| r.participant_id.clone()).collect();
    for p in &participants {
        if answered.get(p.as_str()).map_or(0, |s| s.len()) < scored.len() {
            excluded.insert(p.clone());
        }
    }
    let retained = participants.into_iter().filter(|p| !excluded.contains(p)).collect();
    Ok(Rankings { rankings, excluded, retained })
}
