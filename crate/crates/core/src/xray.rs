//! The generalized detector: qualification-rate sampling, X-ray
//! trajectories, apex extraction, outlier grouping and iso-curve scoring.
//!
//! Subsampling strips a micro-cluster of most of its members, so a point of
//! a group anomaly starts to look like a point anomaly once the sampling
//! rate drops near the group's share of the data. Scoring every point under
//! a ladder of qualification rates (powers of 1/2) gives each point a score
//! trajectory — its X-ray line — whose peak (apex) tells both how anomalous
//! the point can get and at which rate it got there. Candidates above a
//! global threshold are clustered per rate; clusters are group anomalies,
//! leftovers are point anomalies, and both are ranked on the iso-curve
//! scale anchored at the theoretical extreme (score 1 at rate 1).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::dbscan::{self, Label};
use crate::detector::{Detector, DetectorConfig};
use crate::error::{Error, Result};
use crate::seed::{Seed, DOM_LEVEL, DOM_SUBSAMPLE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectConfig {
    pub detector: DetectorConfig,
    /// Ladder stops before a level's sample would fall below this.
    pub min_level_size: usize,
    /// Ladder never goes below `qr = 2^-qr_floor_exp`; the iso-curve scale
    /// divides `log2(qr)` by this design range.
    pub qr_floor_exp: u32,
    /// Grouping radius; `None` derives 3x the median 4-nearest-neighbor
    /// distance of a 1k-row subsample.
    pub dbscan_eps: Option<f64>,
    pub dbscan_min_pts: usize,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            detector: DetectorConfig::default(),
            min_level_size: 256,
            qr_floor_exp: 10,
            dbscan_eps: None,
            dbscan_min_pts: 4,
        }
    }
}

/// One rung of the qualification ladder: the rate, the subsample size and
/// the detector fitted on that subsample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QualificationLevel {
    pub qr: f64,
    pub sample_size: usize,
    pub detector: Detector,
}

/// Score trajectories of all points across the ladder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct XRayPlot {
    pub levels: Vec<QualificationLevel>,
    /// Row-major n x L: score of point `i` under level `l`.
    trajectories: Vec<f64>,
    n_points: usize,
}

impl XRayPlot {
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn score(&self, point: usize, level: usize) -> f64 {
        self.trajectories[point * self.levels.len() + level]
    }

    /// A point's full trajectory, ordered like `levels`.
    pub fn line(&self, point: usize) -> &[f64] {
        let l = self.levels.len();
        &self.trajectories[point * l..(point + 1) * l]
    }
}

/// Peak of one X-ray line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Apex {
    pub point_index: usize,
    pub max_score: f64,
    pub max_qr: f64,
    /// Ladder index achieving the max (ties resolve to the largest qr).
    pub max_level: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApexExtraction {
    pub apexes: Vec<Apex>,
    /// Mean + 3 population standard deviations of the scores, pooled over
    /// every point and qualification level. Pooling calibrates the cut to
    /// the cross-level score noise that a per-point max rides on; a
    /// threshold taken from the qr = 1 column alone lets a large slab of
    /// ordinary points cross at some noisier level.
    pub threshold: f64,
    /// Points whose apex reaches the threshold.
    pub candidates: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAnomaly {
    pub members: Vec<usize>,
    /// Qualification rate of the stratum the group surfaced in.
    pub qr: f64,
    /// Median iso-curve score of the members.
    pub iso_score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointAnomaly {
    pub index: usize,
    pub iso_score: f64,
}

/// Ranked detection output: groups and point anomalies on one scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedAnomalyReport {
    pub groups: Vec<GroupAnomaly>,
    pub point_anomalies: Vec<PointAnomaly>,
    pub threshold: f64,
}

/// Fit one detector per qualification rate and score all of `x` under each.
pub fn build_xray(x: &DataMatrix, config: &DetectConfig, seed: Seed) -> Result<XRayPlot> {
    let n = x.n_rows();
    if config.min_level_size < 8 {
        return Err(Error::InvalidParam("min_level_size must be at least 8".into()));
    }
    let mut rungs = Vec::new();
    for exp in 0..=config.qr_floor_exp {
        let qr = 0.5f64.powi(exp as i32);
        let sample_size = (n as f64 * qr).round() as usize;
        if sample_size < config.min_level_size {
            break;
        }
        rungs.push((exp as usize, qr, sample_size));
    }
    if rungs.len() < 2 {
        return Err(Error::DatasetTooSmall(format!(
            "{n} rows give {} qualification level(s) at minimum sample size {}; need 2",
            rungs.len(),
            config.min_level_size
        )));
    }

    let per_level: Vec<(QualificationLevel, Vec<f64>)> = rungs
        .par_iter()
        .map(|&(level, qr, sample_size)| {
            let level_seed = seed.derive(&[DOM_LEVEL, level as u64]);
            let mut rng = level_seed.derive(&[DOM_SUBSAMPLE]).rng();
            let indices: Vec<usize> =
                rand::seq::index::sample(&mut rng, n, sample_size).into_vec();
            let subsample = x.select_rows(&indices);
            let detector = Detector::fit(&subsample, &config.detector, level_seed)?;
            let scores = detector.score(x)?;
            Ok((QualificationLevel { qr, sample_size, detector }, scores))
        })
        .collect::<Result<_>>()?;

    let levels_count = per_level.len();
    let mut trajectories = vec![0.0f64; n * levels_count];
    let mut levels = Vec::with_capacity(levels_count);
    for (l, (level, scores)) in per_level.into_iter().enumerate() {
        for (i, s) in scores.into_iter().enumerate() {
            trajectories[i * levels_count + l] = s;
        }
        levels.push(level);
    }
    Ok(XRayPlot { levels, trajectories, n_points: n })
}

/// Per-point apexes, the candidate threshold and the candidate set.
pub fn extract_apex(xray: &XRayPlot) -> ApexExtraction {
    let n = xray.n_points();
    let total = (n * xray.n_levels()) as f64;
    let mean = xray.trajectories.iter().sum::<f64>() / total;
    let var =
        xray.trajectories.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / total;
    let threshold = mean + 3.0 * var.sqrt();

    let apexes: Vec<Apex> = (0..n)
        .map(|i| {
            let line = xray.line(i);
            let mut best = 0usize;
            for (l, s) in line.iter().enumerate().skip(1) {
                if *s > line[best] {
                    best = l;
                }
            }
            Apex {
                point_index: i,
                max_score: line[best],
                max_qr: xray.levels[best].qr,
                max_level: best,
            }
        })
        .collect();

    let candidates: Vec<usize> =
        apexes.iter().filter(|a| a.max_score >= threshold).map(|a| a.point_index).collect();
    ApexExtraction { apexes, threshold, candidates }
}

/// Similarity of an apex to the theoretical extreme (score 1 at qr 1) under
/// scaled Manhattan distance, in [0, 1].
pub fn iso_score(apex: &Apex) -> f64 {
    let x = apex.max_qr.log2() / 10.0 + 1.0;
    let distance = (x - 1.0).abs() + (apex.max_score - 1.0).abs();
    ((2.0 - distance) / 2.0).clamp(0.0, 1.0)
}

/// Cluster candidates within each qualification-rate stratum in the original
/// feature space. Returns the clusters (as member index lists) with their
/// stratum's rate, and the noise points.
pub fn group_candidates(
    x: &DataMatrix,
    apexes: &[Apex],
    candidates: &[usize],
    eps: f64,
    min_pts: usize,
) -> (Vec<(Vec<usize>, f64)>, Vec<usize>) {
    let n_levels = apexes.iter().map(|a| a.max_level).max().map_or(0, |l| l + 1);
    let mut clusters = Vec::new();
    let mut noise = Vec::new();
    for level in 0..n_levels {
        let stratum: Vec<usize> = candidates
            .iter()
            .copied()
            .filter(|&i| apexes[i].max_level == level)
            .collect();
        if stratum.is_empty() {
            continue;
        }
        let qr = apexes[stratum[0]].max_qr;
        let coords = x.select_rows(&stratum);
        let labels = dbscan::dbscan(&coords, eps, min_pts);
        let n_clusters = labels
            .iter()
            .filter_map(|l| match l {
                Label::Cluster(c) => Some(c + 1),
                Label::Noise => None,
            })
            .max()
            .unwrap_or(0);
        let mut members = vec![Vec::new(); n_clusters];
        for (local, label) in labels.iter().enumerate() {
            match label {
                Label::Cluster(c) => members[*c].push(stratum[local]),
                Label::Noise => noise.push(stratum[local]),
            }
        }
        clusters.extend(members.into_iter().map(|m| (m, qr)));
    }
    (clusters, noise)
}

/// Full pipeline: ladder, X-ray, apexes, grouping, iso-curve scoring.
pub fn detect(x: &DataMatrix, config: &DetectConfig, seed: Seed) -> Result<GeneralizedAnomalyReport> {
    detect_with_xray(x, config, seed).map(|(report, _, _)| report)
}

/// [`detect`], also returning the X-ray plot and apexes for export.
pub fn detect_with_xray(
    x: &DataMatrix,
    config: &DetectConfig,
    seed: Seed,
) -> Result<(GeneralizedAnomalyReport, XRayPlot, ApexExtraction)> {
    let xray = build_xray(x, config, seed)?;
    let extraction = extract_apex(&xray);

    let eps = match config.dbscan_eps {
        Some(e) => e,
        None => default_grouping_radius(x, seed),
    };

    let (clusters, noise) =
        group_candidates(x, &extraction.apexes, &extraction.candidates, eps, config.dbscan_min_pts);

    let mut groups: Vec<GroupAnomaly> = clusters
        .into_iter()
        .map(|(members, qr)| {
            let mut scores: Vec<f64> =
                members.iter().map(|&i| iso_score(&extraction.apexes[i])).collect();
            scores.sort_by(f64::total_cmp);
            let mid = scores.len() / 2;
            let median = if scores.len() % 2 == 1 {
                scores[mid]
            } else {
                0.5 * (scores[mid - 1] + scores[mid])
            };
            GroupAnomaly { members, qr, iso_score: median }
        })
        .collect();
    groups.sort_by(|a, b| {
        b.iso_score
            .total_cmp(&a.iso_score)
            .then(b.qr.total_cmp(&a.qr))
            .then(a.members[0].cmp(&b.members[0]))
    });

    let mut point_anomalies: Vec<PointAnomaly> = noise
        .into_iter()
        .map(|i| PointAnomaly { index: i, iso_score: iso_score(&extraction.apexes[i]) })
        .collect();
    point_anomalies.sort_by(|a, b| {
        b.iso_score.total_cmp(&a.iso_score).then(a.index.cmp(&b.index))
    });

    let report = GeneralizedAnomalyReport {
        groups,
        point_anomalies,
        threshold: extraction.threshold,
    };
    Ok((report, xray, extraction))
}

/// 3x the median 4-nearest-neighbor distance over a seeded subsample of at
/// most 1k rows.
fn default_grouping_radius(x: &DataMatrix, seed: Seed) -> f64 {
    let n = x.n_rows();
    let cap = n.min(1000);
    let mut rng = seed.derive(&[DOM_SUBSAMPLE, u64::MAX]).rng();
    let indices: Vec<usize> = rand::seq::index::sample(&mut rng, n, cap).into_vec();
    let sub = x.select_rows(&indices);
    3.0 * dbscan::median_knn_distance(&sub, 4, cap)
}
