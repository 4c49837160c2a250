//! The complete analysis of one response file.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::matrices::{
    ornament_similarity_matrix, participant_distance_matrices, per_task_distance_matrices, DistanceMatrix,
    SimilarityMatrix,
};
use super::{build_rankings, SurveyResponse, TaskMode, TaskSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Experiment {
    /// Most- and least-similar choices among three options.
    One,
    /// A single pick between two options.
    Two,
}

impl From<Experiment> for u8 {
    fn from(e: Experiment) -> u8 {
        match e {
            Experiment::One => 1,
            Experiment::Two => 2,
        }
    }
}

impl TryFrom<u8> for Experiment {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Experiment::One),
            2 => Ok(Experiment::Two),
            _ => Err(Error::Invalid(format!("experiment {v} is not 1 or 2"))),
        }
    }
}

impl Experiment {
    pub fn mode(self) -> TaskMode {
        match self {
            Experiment::One => TaskMode::MostAndLeast,
            Experiment::Two => TaskMode::PickSimilar,
        }
    }

    /// The experiment matching the scored tasks of a set.
    pub fn infer(tasks: &TaskSet) -> Result<Self> {
        let modes: BTreeSet<TaskMode> = tasks.tasks.iter().filter(|t| !t.warmup).map(|t| t.mode).collect();
        match modes.into_iter().collect::<Vec<_>>().as_slice() {
            [TaskMode::MostAndLeast] => Ok(Experiment::One),
            [TaskMode::PickSimilar] => Ok(Experiment::Two),
            [] => Err(Error::Invalid("no scored tasks".into())),
            _ => Err(Error::Invalid("tasks mix most-and-least and pick-similar modes".into())),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct OptionTally {
    pub most: usize,
    pub least: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TaskTally {
    pub task_id: String,
    pub responses: usize,
    pub options: BTreeMap<String, OptionTally>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedMatrix {
    pub name: String,
    pub matrix: DistanceMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalysisReport {
    pub experiment: Experiment,
    pub participants: usize,
    pub responses: usize,
    pub late_responses: usize,
    pub retained: Vec<String>,
    pub excluded: Vec<String>,
    pub tallies: Vec<TaskTally>,
    pub participant_matrices: Vec<NamedMatrix>,
    pub per_task_matrices: Vec<NamedMatrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub similarity: Option<SimilarityMatrix>,
}

fn file_stem(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

impl AnalysisReport {
    /// Pretty JSON with a trailing newline; the canonical text form.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Output files by name: the summary plus one CSV per matrix.
    pub fn files(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        out.insert("summary.json".to_string(), self.to_json_string());
        for m in &self.participant_matrices {
            out.insert(format!("participants_{}.csv", file_stem(&m.name)), m.matrix.to_csv());
        }
        for m in &self.per_task_matrices {
            out.insert(format!("task_{}.csv", file_stem(&m.name)), m.matrix.to_csv());
        }
        if let Some(s) = &self.similarity {
            out.insert("similarity.csv".to_string(), s.to_csv());
        }
        out
    }
}

/// Runs every computation for the experiment on the scored (non-warm-up)
/// responses.
pub fn analyze(tasks: &TaskSet, responses: &[SurveyResponse], experiment: Experiment) -> Result<AnalysisReport> {
    if responses.is_empty() {
        return Err(Error::Invalid("no responses".into()));
    }
    let mode = experiment.mode();
    if tasks.scored(mode).next().is_none() {
        return Err(Error::Invalid(format!("no {mode:?} tasks for experiment {}", u8::from(experiment))));
    }
    let mut seen = BTreeSet::new();
    let mut scored = Vec::new();
    for r in responses {
        let t = tasks.get(&r.task_id)?;
        r.validate(t)?;
        if !seen.insert((r.participant_id.as_str(), r.task_id.as_str())) {
            return Err(Error::Invalid(format!("duplicate response of '{}' to '{}'", r.participant_id, r.task_id)));
        }
        if !t.warmup && t.mode == mode {
            scored.push(r.clone());
        }
    }
    let participants: BTreeSet<&str> = scored.iter().map(|r| r.participant_id.as_str()).collect();
    let tallies = tasks
        .scored(mode)
        .map(|t| {
            let mut options: BTreeMap<String, OptionTally> =
                t.option_ornament_ids.iter().map(|o| (o.clone(), OptionTally::default())).collect();
            let mut n = 0;
            for r in scored.iter().filter(|r| r.task_id == t.task_id) {
                n += 1;
                options.get_mut(&r.most_similar).expect("validated").most += 1;
                if let Some(l) = &r.least_similar {
                    options.get_mut(l).expect("validated").least += 1;
                }
            }
            TaskTally { task_id: t.task_id.clone(), responses: n, options }
        })
        .collect();
    let named = |v: Vec<(String, DistanceMatrix)>| v.into_iter().map(|(name, matrix)| NamedMatrix { name, matrix }).collect();
    let per_task_matrices = named(per_task_distance_matrices(&scored, tasks)?);
    let (retained, excluded, participant_matrices, similarity) = match experiment {
        Experiment::One => {
            let rk = build_rankings(&scored, tasks)?;
            let pm = named(participant_distance_matrices(&rk, tasks)?);
            (rk.retained.clone(), rk.excluded.iter().cloned().collect(), pm, None)
        }
        Experiment::Two => (
            participants.iter().map(|s| s.to_string()).collect(),
            Vec::new(),
            Vec::new(),
            Some(ornament_similarity_matrix(&scored, tasks)?),
        ),
    };
    Ok(AnalysisReport {
        experiment,
        participants: participants.len(),
        responses: scored.len(),
        late_responses: scored.iter().filter(|r| r.late).count(),
        retained,
        excluded,
        tallies,
        participant_matrices,
        per_task_matrices,
        similarity,
    })
}
