//! Synthetic response files shaped like the two published experiments.
//!
//! Experiment 1: ten three-option sets, each with a most- and a
//! least-similar question, answered by 30 participants of whom a chosen
//! number answer one set inconsistently. Experiment 2: sixteen two-option
//! pick-similar tasks answered by 20 participants, with the vote counts
//! quoted for the overlapped cmm ornament.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SurveyResponse, TaskMode, TaskSet, TaskSpec, DEFAULT_TIME_LIMIT_SECONDS};

/// The query ornament of every task.
pub const QUERY: &str = "moroccan";
/// The overlapped copy of the query, classified as cmm.
pub const CMM_OL: &str = "cmm-ol";

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticExperiment {
    pub tasks: TaskSet,
    pub responses: Vec<SurveyResponse>,
}

fn task(id: String, options: &[&str], mode: TaskMode) -> TaskSpec {
    TaskSpec {
        task_id: id,
        query_ornament_id: QUERY.into(),
        option_ornament_ids: options.iter().map(|s| s.to_string()).collect(),
        mode,
        time_limit_seconds: DEFAULT_TIME_LIMIT_SECONDS,
        warmup: false,
        correct_option_id: None,
    }
}

/// Option triples of the ten experiment-1 sets.
pub const EXPERIMENT1_SETS: [[&str; 3]; 10] = [
    ["cmm-ol", "cmm-1", "p6-1"],
    ["p6m-1", "cmm-2", "p31m-1"],
    ["p6m-1", "cmm-ol", "cmm-3"],
    ["p6-2", "cmm-1", "p4g-1"],
    ["p3m1-1", "cmm-2", "p6m-2"],
    ["p31m-1", "cmm-3", "p6-1"],
    ["p3m1-1", "p6-2", "cmm-1"],
    ["p4m-1", "cmm-ol", "p3-1"],
    ["pmm-1", "p6m-2", "cmm-2"],
    ["p3-1", "cmm-3", "p4g-1"],
];

/// Participants `p01..pNN`, each answering every set; the first
/// `inconsistent` of them (after a seeded shuffle) name the same ornament as
/// most and least similar in one randomly chosen set.
pub fn experiment1(participants: usize, inconsistent: usize, seed: u64) -> SyntheticExperiment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tasks: Vec<TaskSpec> = EXPERIMENT1_SETS
        .iter()
        .enumerate()
        .map(|(i, opts)| task(format!("set{:02}", i + 1), opts, TaskMode::MostAndLeast))
        .collect();
    let ids: Vec<String> = (1..=participants).map(|i| format!("p{i:02}")).collect();
    let mut order: Vec<usize> = (0..participants).collect();
    order.shuffle(&mut rng);
    let bad: Vec<usize> = order.into_iter().take(inconsistent.min(participants)).collect();
    let mut responses = Vec::new();
    for (pi, pid) in ids.iter().enumerate() {
        let bad_set = bad.contains(&pi).then(|| rng.random_range(0..tasks.len()));
        for (si, t) in tasks.iter().enumerate() {
            let mut opts: Vec<&str> = t.option_ornament_ids.iter().map(String::as_str).collect();
            opts.shuffle(&mut rng);
            let least = if bad_set == Some(si) { opts[0] } else { opts[2] };
            let mut r = SurveyResponse::new(pid, &t.task_id, opts[0], Some(least));
            r.elapsed_ms = Some(rng.random_range(4_000..29_000));
            responses.push(r);
        }
    }
    SyntheticExperiment { tasks: TaskSet::new(tasks).expect("valid synthetic tasks"), responses }
}

/// Two-option tasks of experiment 2 with the number of participants (out of
/// 20) choosing the first option.
pub const EXPERIMENT2_TASKS: [(&str, &str, usize); 16] = [
    ("p6m-1", "p6-3", 12),
    ("p6m-1", CMM_OL, 10),
    ("p6-3", "p3m1-1", 15),
    ("p31m-1", "p6-5", 6),
    (CMM_OL, "p4g-cmm", 14),
    ("p6m-2", "cmm-new", 17),
    ("p3-1", "p6-5", 4),
    ("p3m1-1", "p31m-1", 11),
    ("p3-1", "p4m-1", 13),
    ("p6-3", "p4g-cmm", 16),
    (CMM_OL, "cmm-new", 18),
    ("p6m-2", "p3m1-1", 14),
    ("p4m-1", "p4g-cmm", 9),
    (CMM_OL, "p31m-1", 18),
    ("p6-5", "cmm-new", 19),
    ("p6m-1", "p6m-2", 8),
];

/// Warm-up tasks with a known answer (the option sharing the query's group).
pub const EXPERIMENT2_WARMUPS: [(&str, &str, &str); 5] = [
    ("warm-p4m-q", "warm-p4m-a", "warm-p3-b"),
    ("warm-p6-q", "warm-p2-a", "warm-p6-b"),
    ("warm-pgg-q", "warm-pgg-a", "warm-p31m-b"),
    ("warm-p3-q", "warm-cm-a", "warm-p3-b"),
    ("warm-pmg-q", "warm-pmg-a", "warm-p4g-b"),
];

/// Sixteen experiment-2 tasks, optionally preceded by the five warm-ups.
pub fn experiment2_tasks(with_warmups: bool) -> TaskSet {
    let mut tasks = Vec::new();
    if with_warmups {
        for (i, (q, a, b)) in EXPERIMENT2_WARMUPS.iter().enumerate() {
            let mut t = task(format!("warmup{}", i + 1), &[a, b], TaskMode::PickSimilar);
            t.query_ornament_id = q.to_string();
            t.warmup = true;
            let group = |id: &str| id.split('-').nth(1).unwrap_or_default().to_string();
            t.correct_option_id = [a, b].iter().find(|o| group(o) == group(q)).map(|o| o.to_string());
            tasks.push(t);
        }
    }
    for (i, (a, b, _)) in EXPERIMENT2_TASKS.iter().enumerate() {
        tasks.push(task(format!("task{:02}", i + 1), &[a, b], TaskMode::PickSimilar));
    }
    TaskSet::new(tasks).expect("valid synthetic tasks")
}

/// Responses of 20 participants reproducing the vote counts of
/// [`EXPERIMENT2_TASKS`]; who votes for which option is shuffled by `seed`.
pub fn experiment2(seed: u64) -> SyntheticExperiment {
    let participants = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tasks = experiment2_tasks(false);
    let ids: Vec<String> = (1..=participants).map(|i| format!("p{i:02}")).collect();
    let mut responses = Vec::new();
    for (t, (a, b, first)) in tasks.tasks.iter().zip(EXPERIMENT2_TASKS) {
        let mut order: Vec<usize> = (0..participants).collect();
        order.shuffle(&mut rng);
        let mut picks = vec![b; participants];
        for &p in &order[..first] {
            picks[p] = a;
        }
        for (pid, pick) in ids.iter().zip(picks) {
            let mut r = SurveyResponse::new(pid, &t.task_id, pick, None);
            r.elapsed_ms = Some(rng.random_range(3_000..28_000));
            responses.push(r);
        }
    }
    SyntheticExperiment { tasks, responses }
}

/// Every ornament id used by a task set, queries first, in order of
/// appearance.
pub fn ornament_ids(tasks: &TaskSet) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for t in &tasks.tasks {
        for id in std::iter::once(&t.query_ornament_id).chain(&t.option_ornament_ids) {
            if !out.contains(id) {
                out.push(id.clone());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survey::build_rankings;

    #[test]
    fn experiment1_exclusions() {
        let e = experiment1(30, 13, 5);
        assert_eq!(e.responses.len(), 300);
        let r = build_rankings(&e.responses, &e.tasks).unwrap();
        assert_eq!(r.excluded.len(), 13);
        assert_eq!(r.retained.len(), 17);
    }

    #[test]
    fn experiment2_counts() {
        let e = experiment2(1);
        assert_eq!(e.responses.len(), 320);
        let votes = |task: &str, opt: &str| {
            e.responses.iter().filter(|r| r.task_id == task && r.most_similar == opt).count()
        };
        assert_eq!(votes("task02", CMM_OL), 10);
        assert_eq!(votes("task05", CMM_OL), 14);
        assert_eq!(votes("task11", CMM_OL), 18);
        assert_eq!(votes("task14", CMM_OL), 18);
    }

    #[test]
    fn warmups_know_their_answer() {
        let t = experiment2_tasks(true);
        assert_eq!(t.tasks.len(), 21);
        assert!(t.tasks[..5].iter().all(|t| t.warmup && t.correct_option_id.is_some()));
    }
}
