//! The point-anomaly detector: a depth-limited tree ensemble scored against
//! the fitted depth model.
//!
//! Fitting first regresses `H(n)` on the dataset, then grows `num_trees`
//! depth-limited trees, each on the full matrix (no per-tree subsampling).
//! A query's path length through one tree is `h0` plus, for a terminal
//! leaf holding more than one training point, the closed-form expected
//! remaining depth over the leaf population. (The fitted line is the wrong
//! tool there: evaluated far below its fit window it clamps to zero for
//! exactly the small leaves that carry the contrast between a stripped and
//! a clumped micro-cluster.) The score is `2^(−E[h] / H(n_train))`, so
//! higher means more anomalous and values are comparable across datasets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::depth::{fit_depth_model, reference_path_length, DepthFitConfig, DepthModel};
use crate::error::{Error, Result};
use crate::seed::{Seed, DOM_DEPTH_FIT, DOM_TREE};
use crate::tree::AtomicTree;

/// Current model file format.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub num_trees: usize,
    pub depth_limit: usize,
    pub depth_fit: DepthFitConfig,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig { num_trees: 100, depth_limit: 8, depth_fit: DepthFitConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detector {
    ensemble: Vec<AtomicTree>,
    depth_model: DepthModel,
    n_train: usize,
    dims: usize,
    depth_limit: usize,
}

impl Detector {
    /// Fit on every row of `x`. Deterministic per seed: trees are built on
    /// independent substreams, so thread count does not affect the result.
    ///
    /// The depth-model's smallest sample size is clamped so at least two
    /// sample sizes fit into `x`; the qualification ladder fits detectors on
    /// subsamples as small as a few hundred points.
    pub fn fit(x: &DataMatrix, config: &DetectorConfig, seed: Seed) -> Result<Detector> {
        if config.num_trees == 0 {
            return Err(Error::InvalidParam("ensemble needs at least one tree".into()));
        }
        let n = x.n_rows();
        if n < 2 {
            return Err(Error::DatasetTooSmall("fit needs at least two rows".into()));
        }

        let mut depth_fit = config.depth_fit;
        depth_fit.i_min = depth_fit.i_min.min(n.ilog2().saturating_sub(1));
        if depth_fit.i_min < 2 {
            return Err(Error::DatasetTooSmall(format!(
                "{n} rows leave no room for two depth-fit sample sizes"
            )));
        }
        let depth_model = fit_depth_model(x, &depth_fit, seed.derive(&[DOM_DEPTH_FIT]))?;

        let ensemble: Vec<AtomicTree> = (0..config.num_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = seed.derive(&[DOM_TREE, t as u64]).rng();
                AtomicTree::construct(x, config.depth_limit, &mut rng)
            })
            .collect();

        Ok(Detector {
            ensemble,
            depth_model,
            n_train: n,
            dims: x.n_cols(),
            depth_limit: config.depth_limit,
        })
    }

    /// Anomaly score per row of `x`, each in (0, 1].
    pub fn score(&self, x: &DataMatrix) -> Result<Vec<f64>> {
        self.score_with(x, &self.depth_model)
    }

    /// Score with an alternative normalization model. Swapping in
    /// [`DepthModel::isolation_forest`] reproduces a classic
    /// isolation-forest scorer.
    pub fn score_with(&self, x: &DataMatrix, model: &DepthModel) -> Result<Vec<f64>> {
        if x.n_cols() != self.dims {
            return Err(Error::DimensionMismatch { expected: self.dims, got: x.n_cols() });
        }
        let hn = model.estimate(self.n_train).max(f64::MIN_POSITIVE);
        Ok((0..x.n_rows())
            .into_par_iter()
            .map(|i| (-self.average_path_length(x.row(i)) / hn).exp2())
            .collect())
    }

    /// Score a single observation.
    pub fn score_row(&self, q: &[f64]) -> Result<f64> {
        if q.len() != self.dims {
            return Err(Error::DimensionMismatch { expected: self.dims, got: q.len() });
        }
        let hn = self.depth_model.estimate(self.n_train).max(f64::MIN_POSITIVE);
        Ok((-self.average_path_length(q) / hn).exp2())
    }

    /// Mean over trees of `h0 + reference_path_length(leaf_size)`.
    fn average_path_length(&self, q: &[f64]) -> f64 {
        let mut total = 0.0;
        for tree in &self.ensemble {
            let p = tree.path_length(q);
            total += p.h0 as f64 + reference_path_length(p.leaf_size);
        }
        total / self.ensemble.len() as f64
    }

    pub fn depth_model(&self) -> &DepthModel {
        &self.depth_model
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn n_trees(&self) -> usize {
        self.ensemble.len()
    }

    pub fn trees(&self) -> &[AtomicTree] {
        &self.ensemble
    }

    #[cfg(test)]
    pub(crate) fn duplicate_ensemble(&self) -> Detector {
        let mut d = self.clone();
        d.ensemble.extend_from_slice(&self.ensemble);
        d
    }
}

/// Versioned on-disk form of a fitted detector, JSON-encoded. The resolved
/// config and seed ride along so a model file names its own provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub seed: u64,
    pub config: DetectorConfig,
    pub detector: Detector,
}

impl ModelFile {
    pub fn new(detector: Detector, config: DetectorConfig, seed: Seed) -> Self {
        ModelFile { format_version: MODEL_FORMAT_VERSION, seed: seed.0, config, detector }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<ModelFile> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelVersion {
                found: file.format_version,
                expected: MODEL_FORMAT_VERSION,
            });
        }
        Ok(file)
    }
}
