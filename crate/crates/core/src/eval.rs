//! Ranking metrics and the wall-clock scaling benchmark.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};

/// Average precision and ROC-AUC of one scored dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankingEval {
    pub ap: f64,
    pub roc_auc: f64,
    pub n_pos: usize,
    pub n_neg: usize,
}

pub fn evaluate_ranking(scores: &[f64], labels: &[u8]) -> Result<RankingEval> {
    Ok(RankingEval {
        ap: average_precision(scores, labels)?,
        roc_auc: roc_auc(scores, labels)?,
        n_pos: labels.iter().filter(|l| **l == 1).count(),
        n_neg: labels.iter().filter(|l| **l == 0).count(),
    })
}

/// Average precision: mean over positives of the precision at that
/// positive's rank, scores sorted descending. Ties are broken by input
/// order (stable sort), not averaged over permutations.
pub fn average_precision(scores: &[f64], labels: &[u8]) -> Result<f64> {
    check_lengths(scores, labels)?;
    let n_pos = labels.iter().filter(|l| **l == 1).count();
    if n_pos == 0 {
        return Err(Error::InvalidParam("average precision needs a positive label".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]));
    let mut hits = 0usize;
    let mut total = 0.0;
    for (rank0, &i) in order.iter().enumerate() {
        if labels[i] == 1 {
            hits += 1;
            total += hits as f64 / (rank0 + 1) as f64;
        }
    }
    Ok(total / n_pos as f64)
}

/// ROC-AUC in its Mann-Whitney form: the probability that a random positive
/// outscores a random negative, ties counted one half.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    check_lengths(scores, labels)?;
    let n_pos = labels.iter().filter(|l| **l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::InvalidParam("ROC-AUC needs both classes".into()));
    }

    // Midranks over ascending scores.
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[i].total_cmp(&scores[j]));
    let mut rank_sum_pos = 0.0f64;
    let mut start = 0usize;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let midrank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            if labels[i] == 1 {
                rank_sum_pos += midrank;
            }
        }
        start = end;
    }
    let np = n_pos as f64;
    Ok((rank_sum_pos - np * (np + 1.0) / 2.0) / (np * n_neg as f64))
}

fn check_lengths(scores: &[f64], labels: &[u8]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidParam(format!(
            "{} scores vs {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(bad) = labels.iter().position(|l| *l > 1) {
        return Err(Error::BadLabel { row: bad, value: labels[bad].to_string() });
    }
    Ok(())
}

/// Wall-time measurements across dataset sizes with the fitted log-log
/// slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub sizes: Vec<usize>,
    pub wall_times: Vec<f64>,
    pub fitted_loglog_slope: f64,
    pub fitted_loglog_intercept: f64,
}

impl ScalingResult {
    /// Predicted wall time at size `n` under the fitted power law.
    pub fn extrapolate(&self, n: usize) -> f64 {
        (self.fitted_loglog_intercept + self.fitted_loglog_slope * (n as f64).ln()).exp()
    }
}

/// Time `run` on datasets produced by `generate`, one per size, taking the
/// median of `repeats` runs. Generation is excluded from the timing.
pub fn scaling_benchmark(
    sizes: &[usize],
    repeats: usize,
    mut generate: impl FnMut(usize) -> DataMatrix,
    mut run: impl FnMut(&DataMatrix),
) -> Result<ScalingResult> {
    if sizes.len() < 3 {
        return Err(Error::InvalidParam("benchmark needs at least 3 sizes".into()));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParam("benchmark sizes must be strictly increasing".into()));
    }
    if repeats == 0 {
        return Err(Error::InvalidParam("benchmark needs at least 1 repeat".into()));
    }

    let mut wall_times = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let x = generate(n);
        let mut times = Vec::with_capacity(repeats);
        for _ in 0..repeats {
            let start = Instant::now();
            run(&x);
            times.push(start.elapsed().as_secs_f64());
        }
        wall_times.push(median(&mut times));
    }

    let (slope, intercept) = loglog_fit(sizes, &wall_times);
    Ok(ScalingResult {
        sizes: sizes.to_vec(),
        wall_times,
        fitted_loglog_slope: slope,
        fitted_loglog_intercept: intercept,
    })
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

/// Least-squares slope and intercept of `ln(time)` against `ln(n)`.
pub fn loglog_fit(sizes: &[usize], times: &[f64]) -> (f64, f64) {
    let n = sizes.len() as f64;
    let xs: Vec<f64> = sizes.iter().map(|s| (*s as f64).ln()).collect();
    let ys: Vec<f64> = times.iter().map(|t| t.max(1e-12).ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
