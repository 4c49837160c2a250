//! Exact t-distributed stochastic neighbour embedding for small matrices.
//!
//! The first half of the iterations uses momentum with per-coordinate gains
//! (and early exaggeration); the second half switches to gradient steps that
//! are only accepted when the KL divergence does not grow.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::matrices::{similarity_to_distance, DistanceMatrix, SimilarityMatrix, Unobserved};
use crate::error::{Error, Result};

const MIN_PROB: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TsneOptions {
    pub dims: usize,
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub exaggeration: f64,
    pub exaggeration_iterations: usize,
    pub seed: u64,
}

impl Default for TsneOptions {
    fn default() -> Self {
        TsneOptions {
            dims: 2,
            perplexity: 5.0,
            iterations: 1000,
            learning_rate: 100.0,
            exaggeration: 4.0,
            exaggeration_iterations: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Embedding {
    pub labels: Vec<String>,
    /// One row of `dims` coordinates per label.
    pub points: Vec<Vec<f64>>,
    pub final_kl: f64,
    pub seed: u64,
    /// KL divergence after every iteration.
    #[serde(skip)]
    pub kl_history: Vec<f64>,
}

impl Embedding {
    pub fn dims(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    /// `label,x,y[,z]` rows under a header.
    pub fn to_csv(&self) -> String {
        let axes = ["x", "y", "z"];
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<&str> = std::iter::once("label").chain(axes[..self.dims()].iter().copied()).collect();
        w.write_record(&header).expect("in-memory write");
        for (l, p) in self.labels.iter().zip(&self.points) {
            let rec: Vec<String> = std::iter::once(l.clone()).chain(p.iter().map(|v| v.to_string())).collect();
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

/// Conditional probabilities of row `i` at precision `beta`; returns the
/// row and its entropy (nats).
fn row_probabilities(d2: &[f64], i: usize, beta: f64) -> (Vec<f64>, f64) {
    let min = d2.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
    let mut p: Vec<f64> =
        d2.iter().enumerate().map(|(j, &v)| if j == i { 0.0 } else { (-(v - min) * beta).exp() }).collect();
    let sum: f64 = p.iter().sum();
    let mut h = 0.0;
    for (j, v) in p.iter_mut().enumerate() {
        *v /= sum;
        if j != i && *v > 0.0 {
            h -= *v * v.ln();
        }
    }
    (p, h)
}

/// Rows of conditional probabilities calibrated to `perplexity`.
pub fn conditional_probabilities(d: &DistanceMatrix, perplexity: f64) -> Vec<Vec<f64>> {
    let target = perplexity.ln();
    (0..d.len())
        .map(|i| {
            let d2: Vec<f64> = d.values[i].iter().map(|v| v * v).collect();
            let (mut lo, mut hi, mut beta) = (0.0f64, f64::INFINITY, 1.0f64);
            let mut best = row_probabilities(&d2, i, beta);
            for _ in 0..200 {
                let diff = best.1 - target;
                if diff.abs() < 1e-10 {
                    break;
                }
                if diff > 0.0 {
                    lo = beta;
                    beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
                } else {
                    hi = beta;
                    beta = (beta + lo) / 2.0;
                }
                best = row_probabilities(&d2, i, beta);
            }
            best.0
        })
        .collect()
}

/// Symmetrized joint probabilities summing to one.
pub fn joint_probabilities(d: &DistanceMatrix, perplexity: f64) -> Vec<Vec<f64>> {
    let c = conditional_probabilities(d, perplexity);
    let k = d.len();
    (0..k)
        .map(|i| (0..k).map(|j| if i == j { 0.0 } else { ((c[i][j] + c[j][i]) / (2.0 * k as f64)).max(MIN_PROB) }).collect())
        .collect()
}

/// Student-t affinities (unnormalized) and their sum.
fn affinities(y: &[Vec<f64>]) -> (Vec<Vec<f64>>, f64) {
    let k = y.len();
    let mut num = vec![vec![0.0; k]; k];
    let mut sum = 0.0;
    for i in 0..k {
        for j in i + 1..k {
            let d2: f64 = y[i].iter().zip(&y[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            let v = 1.0 / (1.0 + d2);
            num[i][j] = v;
            num[j][i] = v;
            sum += 2.0 * v;
        }
    }
    (num, sum)
}

fn kl_divergence(p: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
    let (num, sum) = affinities(y);
    let mut kl = 0.0;
    for i in 0..p.len() {
        for j in 0..p.len() {
            if i != j {
                let q = (num[i][j] / sum).max(MIN_PROB);
                kl += p[i][j] * (p[i][j] / q).ln();
            }
        }
    }
    kl
}

fn gradient(p: &[Vec<f64>], y: &[Vec<f64>], exaggeration: f64) -> Vec<Vec<f64>> {
    let (num, sum) = affinities(y);
    let (k, dims) = (y.len(), y[0].len());
    let mut g = vec![vec![0.0; dims]; k];
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let w = 4.0 * (exaggeration * p[i][j] - num[i][j] / sum) * num[i][j];
            for c in 0..dims {
                g[i][c] += w * (y[i][c] - y[j][c]);
            }
        }
    }
    g
}

fn recenter(y: &mut [Vec<f64>]) {
    let dims = y[0].len();
    for c in 0..dims {
        let mean = y.iter().map(|r| r[c]).sum::<f64>() / y.len() as f64;
        for r in y.iter_mut() {
            r[c] -= mean;
        }
    }
}

fn validate(d: &DistanceMatrix, opts: &TsneOptions) -> Result<()> {
    let k = d.len();
    if !(2..=3).contains(&opts.dims) {
        return Err(Error::Invalid(format!("embedding dimension {} is not 2 or 3", opts.dims)));
    }
    if k < opts.dims + 1 {
        return Err(Error::Invalid(format!("{k} points cannot be embedded in {} dimensions", opts.dims)));
    }
    if !d.is_symmetric(1e-9) || !d.has_zero_diagonal() || d.values.iter().flatten().any(|v| *v < 0.0) {
        return Err(Error::Invalid("distance matrix must be symmetric, non-negative, zero on the diagonal".into()));
    }
    if d.values.iter().flatten().all(|v| *v == 0.0) {
        return Err(Error::DegenerateInput("all distances are zero".into()));
    }
    let limit = (k as f64 - 1.0) / 3.0;
    if !(opts.perplexity > 0.0) || opts.perplexity > limit {
        return Err(Error::PerplexityTooLarge { perplexity: opts.perplexity, limit });
    }
    Ok(())
}

/// Embeds the points of a distance matrix in 2 or 3 dimensions.
pub fn tsne(d: &DistanceMatrix, opts: &TsneOptions) -> Result<Embedding> {
    validate(d, opts)?;
    let k = d.len();
    let p = joint_probabilities(d, opts.perplexity);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let normal = Normal::new(0.0, 1e-2).expect("valid normal");
    let mut y: Vec<Vec<f64>> = (0..k).map(|_| (0..opts.dims).map(|_| normal.sample(&mut rng)).collect()).collect();
    let mut velocity = vec![vec![0.0; opts.dims]; k];
    let mut gains = vec![vec![1.0; opts.dims]; k];
    let mut history = Vec::with_capacity(opts.iterations);
    let half = opts.iterations / 2;
    for it in 0..half {
        let ex = if it < opts.exaggeration_iterations { opts.exaggeration } else { 1.0 };
        let momentum = if it < opts.exaggeration_iterations { 0.5 } else { 0.8 };
        let g = gradient(&p, &y, ex);
        for i in 0..k {
            for c in 0..opts.dims {
                let same_sign = (g[i][c] > 0.0) == (velocity[i][c] > 0.0);
                gains[i][c] = if same_sign { (gains[i][c] * 0.8f64).max(0.01) } else { gains[i][c] + 0.2 };
                velocity[i][c] = momentum * velocity[i][c] - opts.learning_rate * gains[i][c] * g[i][c];
                y[i][c] += velocity[i][c];
            }
        }
        recenter(&mut y);
        history.push(kl_divergence(&p, &y));
    }
    let mut kl = kl_divergence(&p, &y);
    let mut step = opts.learning_rate;
    for _ in half..opts.iterations {
        let g = gradient(&p, &y, 1.0);
        for _ in 0..40 {
            let mut cand: Vec<Vec<f64>> =
                y.iter().zip(&g).map(|(r, gr)| r.iter().zip(gr).map(|(v, d)| v - step * d).collect()).collect();
            recenter(&mut cand);
            let c = kl_divergence(&p, &cand);
            if c <= kl {
                y = cand;
                kl = c;
                step *= 1.2;
                break;
            }
            step /= 2.0;
        }
        history.push(kl);
    }
    if y.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("embedding diverged".into()));
    }
    Ok(Embedding { labels: d.labels.clone(), points: y, final_kl: kl, seed: opts.seed, kl_history: history })
}

/// Embeds a similarity matrix through `d = 1 - s`.
pub fn tsne_from_similarity(s: &SimilarityMatrix, unobserved: Unobserved, opts: &TsneOptions) -> Result<Embedding> {
    tsne(&similarity_to_distance(s, unobserved), opts)
}

/// Colors of a 3D embedding; constant axes are listed in `degenerate_axes`
/// and map to channel value 128.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RgbMapping {
    pub colors: Vec<(String, [u8; 3])>,
    pub degenerate_axes: Vec<usize>,
}

impl RgbMapping {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,r,g,b\n");
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        for (l, c) in &self.colors {
            w.write_record([l.clone(), c[0].to_string(), c[1].to_string(), c[2].to_string()]).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv"));
        out
    }
}

/// Per-axis min-max scaling of a 3D embedding to `0..=255`.
pub fn embedding_to_rgb(e: &Embedding) -> Result<RgbMapping> {
    if e.dims() != 3 {
        return Err(Error::Invalid(format!("RGB mapping needs a 3D embedding, got {}D", e.dims())));
    }
    let mut ranges = [(f64::INFINITY, f64::NEG_INFINITY); 3];
    for p in &e.points {
        for c in 0..3 {
            ranges[c] = (ranges[c].0.min(p[c]), ranges[c].1.max(p[c]));
        }
    }
    let degenerate_axes: Vec<usize> = (0..3).filter(|&c| ranges[c].1 - ranges[c].0 <= 0.0).collect();
    let colors = e
        .labels
        .iter()
        .zip(&e.points)
        .map(|(l, p)| {
            let mut rgb = [128u8; 3];
            for c in 0..3 {
                let (lo, hi) = ranges[c];
                if hi > lo {
                    rgb[c] = (255.0 * (p[c] - lo) / (hi - lo)).round().clamp(0.0, 255.0) as u8;
                }
            }
            (l.clone(), rgb)
        })
        .collect();
    Ok(RgbMapping { colors, degenerate_axes })
}
