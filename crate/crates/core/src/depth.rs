//! The depth-estimation function `H(n)`.
//!
//! Average depth of a randomized partition tree grows linearly with
//! `log2(n)` regardless of the data distribution; only the slope depends on
//! the distribution. `H(n) = w0 + w1·log2(n)` is therefore fitted per
//! dataset by growing full trees on subsamples of doubling sizes and
//! regressing the observed depths. The module also carries the analytic
//! expected-depth recurrence for the fixed-cut tree model and the
//! coefficient pair that makes the scorer coincide with a classic isolation
//! forest.

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::seed::{Seed, DOM_SUBSAMPLE, DOM_TREE};
use crate::tree::{AtomicTree, UNLIMITED_DEPTH};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// How per-point depths of the sampled trees are collapsed to one
/// observation per sample size.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepthAggregator {
    /// Mean per-point leaf depth (default; stable at small sizes).
    #[default]
    Mean,
    /// Most frequent per-point leaf depth.
    Mode,
}

/// Fitted coefficients of `H(n) = w0 + w1·log2(n)`, with the regression
/// points kept for provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthModel {
    pub w0: f64,
    pub w1: f64,
    /// (log2 of sample size, observed depth) pairs behind the fit.
    pub fit_points: Vec<(f64, f64)>,
}

impl DepthModel {
    /// Ordinary least squares through `(log2 n, depth)` points.
    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::DatasetTooSmall(
                "depth regression needs at least two sample sizes".into(),
            ));
        }
        let n = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
        let mz = points.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let sxz: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - mz)).sum();
        if sxx == 0.0 {
            return Err(Error::DatasetTooSmall(
                "depth regression needs two distinct sample sizes".into(),
            ));
        }
        let w1 = sxz / sxx;
        let w0 = mz - w1 * mx;
        Ok(DepthModel { w0, w1, fit_points: points.to_vec() })
    }

    /// The coefficient pair under which `H` reproduces the average
    /// unsuccessful-search path length a classic isolation forest divides
    /// by: `w0 = 2γ − 2(n−1)/n`, `w1 = 2·ln 2`.
    pub fn isolation_forest(n: usize) -> DepthModel {
        let (w0, w1) = if_coefficients(n);
        DepthModel { w0, w1, fit_points: Vec::new() }
    }

    /// `H(n) = max(w0 + w1·log2 n, 0)`. Also applied to leaf populations
    /// when extending truncated paths, hence the clamp.
    pub fn estimate(&self, n: usize) -> f64 {
        debug_assert!(n >= 1);
        (self.w0 + self.w1 * (n as f64).log2()).max(0.0)
    }
}

/// Isolation-forest-equivalent coefficients `(w0, w1)` for a dataset of `n`
/// points.
pub fn if_coefficients(n: usize) -> (f64, f64) {
    debug_assert!(n >= 2);
    let n = n as f64;
    (2.0 * EULER_GAMMA - 2.0 * (n - 1.0) / n, 2.0 * std::f64::consts::LN_2)
}

/// Average path length of an unsuccessful search in a binary search tree
/// over `n` points: `2(ln(n−1) + γ) − 2(n−1)/n`. The closed-form expected
/// depth below a truncated leaf holding `n` training points; zero for
/// singletons.
pub fn reference_path_length(n: usize) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let n = n as f64;
    2.0 * ((n - 1.0).ln() + EULER_GAMMA) - 2.0 * (n - 1.0) / n
}

/// Configuration for [`fit_depth_model`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthFitConfig {
    /// Smallest sample size is `2^i_min`.
    pub i_min: u32,
    /// Fully grown trees per sample size.
    pub trees_per_size: usize,
    pub aggregator: DepthAggregator,
}

impl Default for DepthFitConfig {
    fn default() -> Self {
        DepthFitConfig { i_min: 8, trees_per_size: 5, aggregator: DepthAggregator::Mean }
    }
}

/// Fit `H(n)` on a dataset: for each `i` in `i_min ..= floor(log2 n)`, draw a
/// uniform subsample of size `2^i` without replacement, grow
/// `trees_per_size` unbounded trees on it, record the aggregated per-point
/// depth, then regress depth on `i`.
pub fn fit_depth_model(x: &DataMatrix, config: &DepthFitConfig, seed: Seed) -> Result<DepthModel> {
    let n = x.n_rows();
    if config.i_min < 2 {
        return Err(Error::InvalidParam("i_min must be at least 2".into()));
    }
    if config.trees_per_size == 0 {
        return Err(Error::InvalidParam("trees_per_size must be at least 1".into()));
    }
    let i_max = if n == 0 { 0 } else { n.ilog2() };
    if i_max < config.i_min + 1 {
        return Err(Error::DatasetTooSmall(format!(
            "{n} rows allow no two sample sizes at i_min {}",
            config.i_min
        )));
    }

    let sizes: Vec<u32> = (config.i_min..=i_max).collect();
    let points: Vec<(f64, f64)> = sizes
        .par_iter()
        .map(|&i| {
            let size = 1usize << i;
            let level_seed = seed.derive(&[DOM_SUBSAMPLE, i as u64]);
            let depths: Vec<f64> = (0..config.trees_per_size)
                .into_par_iter()
                .map(|t| {
                    let tree_seed = level_seed.derive(&[DOM_TREE, t as u64]);
                    let mut rng = tree_seed.rng();
                    let idx: Vec<u32> =
                        sample(&mut rng, n, size).into_iter().map(|v| v as u32).collect();
                    let tree = AtomicTree::construct_on(x, idx, UNLIMITED_DEPTH, &mut rng);
                    match config.aggregator {
                        DepthAggregator::Mean => tree.mean_point_depth(),
                        DepthAggregator::Mode => tree.modal_point_depth() as f64,
                    }
                })
                .collect();
            let depth = depths.iter().sum::<f64>() / depths.len() as f64;
            (f64::from(i), depth)
        })
        .collect();

    DepthModel::from_points(&points)
}

/// Expected mean point depth `H(n, b)` of a fixed-cut tree: every split
/// sends each point left independently with probability `b`. Evaluated by
/// solving the self-referential terms of
///
/// ```text
/// H(n) = Σ_k C(n,k) b^k (1−b)^(n−k) [ (k/n)·H(k) + ((n−k)/n)·H(n−k) + 1 ]
/// ```
///
/// for `H(n)` and filling in bottom-up from `H(0) = 0`, `H(1) = 1`.
pub fn fixed_cut_expected_depth(n: usize, b: f64) -> Result<f64> {
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::InvalidParam(format!("bias {b} outside (0, 1)")));
    }
    // Cumulative log-factorials; binomial weights are assembled in log space
    // above n = 50, where C(n,k) alone overflows the naive product.
    let mut lnf = vec![0.0f64; n.max(1) + 1];
    for k in 2..lnf.len() {
        lnf[k] = lnf[k - 1] + (k as f64).ln();
    }
    let weight = |m: usize, k: usize| -> f64 {
        let (mf, kf) = (m as f64, k as f64);
        if m > 50 {
            (lnf[m] - lnf[k] - lnf[m - k] + kf * b.ln() + (mf - kf) * (1.0 - b).ln()).exp()
        } else {
            let mut c = 1.0f64;
            for j in 0..k.min(m - k) {
                c = c * (mf - j as f64) / (j as f64 + 1.0);
            }
            c * b.powf(kf) * (1.0 - b).powf(mf - kf)
        }
    };

    let mut h = vec![0.0f64; n.max(1) + 1];
    h[1] = 1.0;
    for m in 2..=n {
        let mf = m as f64;
        let mut rhs = 1.0;
        for k in 1..m {
            let kf = k as f64;
            rhs += weight(m, k) * ((kf / mf) * h[k] + ((mf - kf) / mf) * h[m - k]);
        }
        // Mass of the degenerate all-left / all-right splits that recurse on
        // the same m.
        let self_mass = weight(m, m) + weight(m, 0);
        h[m] = rhs / (1.0 - self_mass);
    }
    Ok(h[n])
}
