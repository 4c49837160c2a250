//! Kendall tau distance between rankings of the same options.

use super::Ranking;
use crate::error::{Error, Result};

/// Number of option pairs ranked in opposite order by the two rankings.
pub fn kendall_tau(r1: &Ranking, r2: &Ranking) -> Result<usize> {
    if r1.scores.len() != r2.scores.len() || r1.scores.keys().zip(r2.scores.keys()).any(|(a, b)| a != b) {
        return Err(Error::MismatchedOptions);
    }
    let a: Vec<i64> = r1.scores.values().map(|&v| v as i64).collect();
    let b: Vec<i64> = r2.scores.values().map(|&v| v as i64).collect();
    let mut count = 0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            if (a[i] - a[j]) * (b[i] - b[j]) < 0 {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Kendall tau divided by the number of pairs `n(n-1)/2`.
pub fn normalized_kendall(r1: &Ranking, r2: &Ranking) -> Result<f64> {
    let k = kendall_tau(r1, r2)?;
    let n = r1.scores.len();
    if n < 2 {
        return Ok(0.0);
    }
    Ok(k as f64 / (n * (n - 1) / 2) as f64)
}
