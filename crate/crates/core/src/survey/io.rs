//! Reading and writing responses, task lists and matrices.

use super::{SurveyResponse, TaskSet, TaskSpec};
use crate::error::{Error, Result};

/// One response per non-blank line.
pub fn responses_from_jsonl(text: &str) -> Result<Vec<SurveyResponse>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Invalid(format!("line {}: {e}", i + 1))))
        .collect()
}

pub fn response_to_jsonl_line(r: &SurveyResponse) -> String {
    let mut s = serde_json::to_string(r).expect("response serializes");
    s.push('\n');
    s
}

pub fn responses_to_jsonl(rs: &[SurveyResponse]) -> String {
    rs.iter().map(response_to_jsonl_line).collect()
}

/// CSV with a header naming the response fields (`participantId`,
/// `taskId`, `mostSimilar`, optional `leastSimilar` and `elapsedMs`).
pub fn responses_from_csv(text: &str) -> Result<Vec<SurveyResponse>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    rdr.deserialize()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| Error::Invalid(format!("row {}: {e}", i + 1))))
        .collect()
}

/// Reads responses, choosing the format from the first non-blank character.
pub fn responses_from_str(text: &str) -> Result<Vec<SurveyResponse>> {
    match text.trim_start().chars().next() {
        None => Err(Error::Invalid("no responses".into())),
        Some('{') => responses_from_jsonl(text),
        Some(_) => responses_from_csv(text),
    }
}

/// A JSON array of tasks or an object with a `tasks` array.
pub fn tasks_from_json(text: &str) -> Result<TaskSet> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    let list = match v {
        serde_json::Value::Array(_) => v,
        serde_json::Value::Object(mut o) => {
            o.remove("tasks").ok_or_else(|| Error::Invalid("expected a 'tasks' array".into()))?
        }
        _ => return Err(Error::Invalid("expected a task array".into())),
    };
    let tasks: Vec<TaskSpec> = serde_json::from_value(list)?;
    TaskSet::new(tasks)
}

pub(crate) fn matrix_to_csv(labels: &[String], values: &[Vec<f64>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<&str> = std::iter::once("label").chain(labels.iter().map(String::as_str)).collect();
    w.write_record(&header).expect("in-memory write");
    for (l, row) in labels.iter().zip(values) {
        let rec: Vec<String> = std::iter::once(l.clone()).chain(row.iter().map(|v| v.to_string())).collect();
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

pub(crate) fn matrix_from_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let bad = |e: String| Error::Invalid(format!("matrix csv: {e}"));
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let labels: Vec<String> = header.iter().skip(1).map(String::from).collect();
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.get(0) != labels.get(i).map(String::as_str) {
            return Err(bad(format!("row {} label does not match the header", i + 1)));
        }
        let row = rec
            .iter()
            .skip(1)
            .map(|v| v.parse::<f64>().map_err(|e| bad(format!("row {}: {e}", i + 1))))
            .collect::<Result<Vec<f64>>>()?;
        values.push(row);
    }
    Ok((labels, values))
}
