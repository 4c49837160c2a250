//! Participant distance matrices and ornament similarity matrices.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::kendall::normalized_kendall;
use super::{Rankings, SurveyResponse, TaskMode, TaskSet};
use crate::error::{Error, Result};

/// Square labelled matrix of distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl DistanceMatrix {
    pub fn zeros(labels: Vec<String>) -> Self {
        let n = labels.len();
        DistanceMatrix { labels, values: vec![vec![0.0; n]; n] }
    }

    pub fn new(labels: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if values.len() != n || values.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid(format!("matrix is not {n}x{n}")));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("matrix has non-finite entries".into()));
        }
        Ok(DistanceMatrix { labels, values })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.len();
        (0..n).all(|i| (0..n).all(|j| (self.values[i][j] - self.values[j][i]).abs() <= tol))
    }

    pub fn has_zero_diagonal(&self) -> bool {
        (0..self.len()).all(|i| self.values[i][i] == 0.0)
    }

    /// CSV with a header row of labels and a label in front of each row.
    pub fn to_csv(&self) -> String {
        super::io::matrix_to_csv(&self.labels, &self.values)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (labels, values) = super::io::matrix_from_csv(text)?;
        DistanceMatrix::new(labels, values)
    }
}

/// Ornament similarities; pairs never shown together stay at zero and are
/// marked unobserved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimilarityMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub observed_mask: Vec<Vec<bool>>,
    /// How option-to-option ratios were formed.
    pub convention: String,
}

/// Ratio convention for two options of one task.
pub const OPTION_RATIO_CONVENTION: &str = "option-option similarity = min(selections)/max(selections) per task, averaged over shared tasks";

impl SimilarityMatrix {
    pub fn index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        Some(self.values[self.index(a)?][self.index(b)?])
    }

    pub fn to_csv(&self) -> String {
        super::io::matrix_to_csv(&self.labels, &self.values)
    }
}

/// Normalized Kendall distances between retained participants, one matrix
/// per most-and-least task, in task order.
pub fn participant_distance_matrices(rankings: &Rankings, tasks: &TaskSet) -> Result<Vec<(String, DistanceMatrix)>> {
    let mut out = Vec::new();
    for task in tasks.scored(TaskMode::MostAndLeast) {
        let by_participant: BTreeMap<&str, &super::Ranking> = rankings
            .rankings
            .iter()
            .filter(|r| r.task_id == task.task_id)
            .map(|r| (r.participant_id.as_str(), r))
            .collect();
        let mut m = DistanceMatrix::zeros(rankings.retained.clone());
        let n = m.len();
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (by_participant[m.labels[i].as_str()], by_participant[m.labels[j].as_str()]);
                let d = normalized_kendall(a, b)?;
                m.values[i][j] = d;
                m.values[j][i] = d;
            }
        }
        out.push((task.task_id.clone(), m));
    }
    Ok(out)
}

/// Binary agreement matrices per answer: 0 for identical answers, 1 for
/// different ones. Most-and-least tasks yield one matrix for each of their
/// two answers (labelled `task:most` and `task:least`); every participant
/// who answered is included.
pub fn per_task_distance_matrices(responses: &[SurveyResponse], tasks: &TaskSet) -> Result<Vec<(String, DistanceMatrix)>> {
    let mut out = Vec::new();
    for task in tasks.tasks.iter().filter(|t| !t.warmup) {
        let mut answers: BTreeMap<&str, &SurveyResponse> = BTreeMap::new();
        for r in responses.iter().filter(|r| r.task_id == task.task_id) {
            r.validate(task)?;
            answers.insert(&r.participant_id, r);
        }
        let labels: Vec<String> = answers.keys().map(|s| s.to_string()).collect();
        let binary = |pick: &dyn Fn(&SurveyResponse) -> Option<String>| {
            let mut m = DistanceMatrix::zeros(labels.clone());
            let picks: Vec<Option<String>> = answers.values().map(|r| pick(r)).collect();
            for i in 0..picks.len() {
                for j in 0..picks.len() {
                    m.values[i][j] = if picks[i] == picks[j] { 0.0 } else { 1.0 };
                }
            }
            m
        };
        match task.mode {
            TaskMode::MostAndLeast => {
                out.push((format!("{}:most", task.task_id), binary(&|r| Some(r.most_similar.clone()))));
                out.push((format!("{}:least", task.task_id), binary(&|r| r.least_similar.clone())));
            }
            TaskMode::PickSimilar => out.push((task.task_id.clone(), binary(&|r| Some(r.most_similar.clone())))),
        }
    }
    Ok(out)
}

/// Similarity of every ornament shown in the pick-similar tasks.
///
/// An option's similarity to the query is the share of participants picking
/// it, averaged over its tasks. Two options of one task get
/// `min(picks)/max(picks)`, averaged over the tasks they share.
pub fn ornament_similarity_matrix(responses: &[SurveyResponse], tasks: &TaskSet) -> Result<SimilarityMatrix> {
    let scored: Vec<_> = tasks.scored(TaskMode::PickSimilar).collect();
    let mut labels: Vec<String> = Vec::new();
    for t in &scored {
        for id in std::iter::once(&t.query_ornament_id).chain(&t.option_ornament_ids) {
            if !labels.contains(id) {
                labels.push(id.clone());
            }
        }
    }
    let n = labels.len();
    let idx = |s: &str| labels.iter().position(|l| l == s).expect("label collected");
    let mut sums = vec![vec![0.0f64; n]; n];
    let mut counts = vec![vec![0usize; n]; n];
    for t in &scored {
        let mut picks: BTreeMap<&str, usize> = t.option_ornament_ids.iter().map(|o| (o.as_str(), 0)).collect();
        let mut participants = BTreeSet::new();
        for r in responses.iter().filter(|r| r.task_id == t.task_id) {
            r.validate(t)?;
            if participants.insert(r.participant_id.as_str()) {
                *picks.get_mut(r.most_similar.as_str()).expect("validated") += 1;
            }
        }
        if participants.is_empty() {
            return Err(Error::ZeroParticipants(t.task_id.clone()));
        }
        let q = idx(&t.query_ornament_id);
        let total = participants.len() as f64;
        for (o, &c) in &picks {
            let i = idx(o);
            for (a, b) in [(i, q), (q, i)] {
                sums[a][b] += c as f64 / total;
                counts[a][b] += 1;
            }
        }
        let opts: Vec<(&str, usize)> = picks.iter().map(|(k, v)| (*k, *v)).collect();
        for x in 0..opts.len() {
            for y in x + 1..opts.len() {
                let (ca, cb) = (opts[x].1, opts[y].1);
                let hi = ca.max(cb);
                let s = if hi == 0 { 0.0 } else { ca.min(cb) as f64 / hi as f64 };
                let (i, j) = (idx(opts[x].0), idx(opts[y].0));
                for (a, b) in [(i, j), (j, i)] {
                    sums[a][b] += s;
                    counts[a][b] += 1;
                }
            }
        }
    }
    let mut values = vec![vec![0.0; n]; n];
    let mut mask = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                values[i][j] = 1.0;
                mask[i][j] = true;
            } else if counts[i][j] > 0 {
                values[i][j] = sums[i][j] / counts[i][j] as f64;
                mask[i][j] = true;
            }
        }
    }
    Ok(SimilarityMatrix { labels, values, observed_mask: mask, convention: OPTION_RATIO_CONVENTION.into() })
}

/// Distance assigned to pairs never shown together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Unobserved {
    /// The largest distance among observed pairs.
    MaxObserved,
    Value(f64),
}

/// `1 - s` for observed pairs; unobserved pairs follow `policy`.
pub fn similarity_to_distance(sim: &SimilarityMatrix, policy: Unobserved) -> DistanceMatrix {
    let n = sim.labels.len();
    let mut values = vec![vec![0.0; n]; n];
    let mut max_seen: Option<f64> = None;
    for i in 0..n {
        for j in 0..n {
            if i != j && sim.observed_mask[i][j] {
                let d = 1.0 - sim.values[i][j];
                values[i][j] = d;
                max_seen = Some(max_seen.map_or(d, |m: f64| m.max(d)));
            }
        }
    }
    let fill = match policy {
        Unobserved::MaxObserved => max_seen.unwrap_or(1.0),
        Unobserved::Value(v) => v,
    };
    for i in 0..n {
        for j in 0..n {
            if i != j && !sim.observed_mask[i][j] {
                values[i][j] = fill;
            }
        }
    }
    DistanceMatrix { labels: sim.labels.clone(), values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survey::{build_rankings, TaskSpec};

    fn mal(id: &str) -> TaskSpec {
        TaskSpec {
            task_id: id.into(),
            query_ornament_id: "q".into(),
            option_ornament_ids: vec!["A".into(), "B".into(), "C".into()],
            mode: TaskMode::MostAndLeast,
            time_limit_seconds: 30,
            warmup: false,
            correct_option_id: None,
        }
    }

    fn pick(id: &str, a: &str, b: &str) -> TaskSpec {
        TaskSpec {
            task_id: id.into(),
            query_ornament_id: "q".into(),
            option_ornament_ids: vec![a.into(), b.into()],
            mode: TaskMode::PickSimilar,
            time_limit_seconds: 30,
            warmup: false,
            correct_option_id: None,
        }
    }

    #[test]
    fn reversed_participants_are_at_distance_one() {
        let tasks = TaskSet::new(vec![mal("s")]).unwrap();
        let rs = vec![SurveyResponse::new("p1", "s", "A", Some("C")), SurveyResponse::new("p2", "s", "C", Some("A"))];
        let rk = build_rankings(&rs, &tasks).unwrap();
        let ms = participant_distance_matrices(&rk, &tasks).unwrap();
        assert_eq!(ms[0].1.values, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn identical_participants_give_zero_matrix() {
        let tasks = TaskSet::new(vec![mal("s")]).unwrap();
        let rs: Vec<_> = (0..4).map(|i| SurveyResponse::new(&format!("p{i}"), "s", "B", Some("A"))).collect();
        let rk = build_rankings(&rs, &tasks).unwrap();
        let m = &participant_distance_matrices(&rk, &tasks).unwrap()[0].1;
        assert!(m.values.iter().flatten().all(|v| *v == 0.0));
        let per = per_task_distance_matrices(&rs, &tasks).unwrap();
        assert_eq!(per.len(), 2);
        assert!(per.iter().all(|(_, m)| m.values.iter().flatten().all(|v| *v == 0.0)));
    }

    #[test]
    fn split_answers_form_blocks() {
        let tasks = TaskSet::new(vec![pick("t", "A", "B")]).unwrap();
        let rs: Vec<_> =
            (0..4).map(|i| SurveyResponse::new(&format!("p{i}"), "t", if i < 2 { "A" } else { "B" }, None)).collect();
        let m = &per_task_distance_matrices(&rs, &tasks).unwrap()[0].1;
        let expect = |i: usize, j: usize| if (i < 2) == (j < 2) { 0.0 } else { 1.0 };
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m.values[i][j], expect(i, j));
            }
        }
    }

    #[test]
    fn similarity_averages_and_unobserved_pairs() {
        let tasks = TaskSet::new(vec![pick("t1", "A", "B"), pick("t2", "A", "C")]).unwrap();
        let mut rs = Vec::new();
        for i in 0..4 {
            rs.push(SurveyResponse::new(&format!("p{i}"), "t1", if i < 1 { "A" } else { "B" }, None));
            rs.push(SurveyResponse::new(&format!("p{i}"), "t2", if i < 3 { "A" } else { "C" }, None));
        }
        let s = ornament_similarity_matrix(&rs, &tasks).unwrap();
        assert!((s.get("A", "q").unwrap() - (0.25 + 0.75) / 2.0).abs() < 1e-15);
        assert!((s.get("A", "B").unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.get("B", "C").unwrap(), 0.0);
        let (b, c) = (s.index("B").unwrap(), s.index("C").unwrap());
        assert!(!s.observed_mask[b][c]);
        let d = similarity_to_distance(&s, Unobserved::MaxObserved);
        let max_obs = (1.0f64 - 0.25).max(1.0 - 1.0 / 3.0);
        assert!((d.values[b][c] - max_obs).abs() < 1e-15);
        assert!(d.is_symmetric(0.0) && d.has_zero_diagonal());
        assert_eq!(similarity_to_distance(&s, Unobserved::Value(1.0)).values[b][c], 1.0);
    }

    #[test]
    fn task_without_answers_errors() {
        let tasks = TaskSet::new(vec![pick("t1", "A", "B")]).unwrap();
        assert_eq!(ornament_similarity_matrix(&[], &tasks), Err(Error::ZeroParticipants("t1".into())));
    }
}
