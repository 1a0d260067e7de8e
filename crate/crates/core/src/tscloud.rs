//! Sliding-window featurization of multivariate time series.
//!
//! Each window of each channel is collapsed to its first four moments
//! (mean, population variance, standardized skewness, standardized
//! kurtosis), turning a window of an M-channel series into an M x 4 point
//! cloud. Running the group detector on each cloud flags anomalous windows
//! and names the member channels that carry the anomaly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::seed::{Seed, DOM_WINDOW};
use crate::xray::{detect_with_xray, DetectConfig};

/// An M-channel series of length T, channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSeries {
    channels: usize,
    length: usize,
    values: Vec<f64>,
    pub sample_interval: f64,
}

impl MultiSeries {
    pub fn new(channels: usize, length: usize, values: Vec<f64>, sample_interval: f64) -> Result<Self> {
        if channels == 0 || length == 0 {
            return Err(Error::InvalidParam("series needs >= 1 channel and sample".into()));
        }
        if values.len() != channels * length {
            return Err(Error::InvalidParam(format!(
                "expected {} values for {channels}x{length}, got {}",
                channels * length,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonNumericCell {
                row: bad / length,
                col: bad % length,
                token: values[bad].to_string(),
            });
        }
        Ok(MultiSeries { channels, length, values, sample_interval })
    }

    /// Build from a column-per-channel matrix (the CSV layout: one row per
    /// time step).
    pub fn from_matrix(x: &DataMatrix, sample_interval: f64) -> Result<Self> {
        let (t, m) = (x.n_rows(), x.n_cols());
        let mut values = vec![0.0; t * m];
        for ti in 0..t {
            for ch in 0..m {
                values[ch * t + ti] = x.get(ti, ch);
            }
        }
        MultiSeries::new(m, t, values, sample_interval)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn channel(&self, ch: usize) -> &[f64] {
        &self.values[ch * self.length..(ch + 1) * self.length]
    }
}

/// One window turned into an M x 4 moment cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowCloud {
    pub window_index: usize,
    pub start_t: usize,
    /// M x 4: per channel (mean, variance, skewness, kurtosis).
    pub matrix: DataMatrix,
}

/// First four moments of a slice: mean, population variance, standardized
/// skewness and raw standardized kurtosis (normal -> 3). Zero-variance
/// windows report skewness and kurtosis 0.
pub fn four_moments(values: &[f64]) -> [f64; 4] {
    let n = values.len() as f64;
    let mut s1 = 0.0f64;
    let mut s2 = 0.0f64;
    let mut s3 = 0.0f64;
    let mut s4 = 0.0f64;
    for &v in values {
        s1 += v;
        s2 += v * v;
        s3 += v * v * v;
        s4 += v * v * v * v;
    }
    let mean = s1 / n;
    // Central power sums from the raw ones.
    let m2 = s2 / n - mean * mean;
    let m3 = s3 / n - 3.0 * mean * s2 / n + 2.0 * mean * mean * mean;
    let m4 = s4 / n - 4.0 * mean * s3 / n + 6.0 * mean * mean * s2 / n
        - 3.0 * mean * mean * mean * mean;
    let var = m2.max(0.0);
    if var <= 0.0 {
        return [mean, 0.0, 0.0, 0.0];
    }
    [mean, var, m3 / var.powf(1.5), m4 / (var * var)]
}

/// Slide a window of `window` samples with the given stride and emit one
/// moment cloud per position: `floor((T - K) / stride) + 1` windows.
pub fn windows_to_clouds(
    series: &MultiSeries,
    window: usize,
    stride: usize,
) -> Result<Vec<WindowCloud>> {
    if window == 0 || window > series.length {
        return Err(Error::InvalidParam(format!(
            "window {window} does not fit series of length {}",
            series.length
        )));
    }
    if stride == 0 {
        return Err(Error::InvalidParam("stride must be >= 1".into()));
    }
    let count = (series.length - window) / stride + 1;
    (0..count)
        .map(|w| {
            let start = w * stride;
            let mut rows = Vec::with_capacity(series.channels * 4);
            for ch in 0..series.channels {
                rows.extend_from_slice(&four_moments(&series.channel(ch)[start..start + window]));
            }
            Ok(WindowCloud {
                window_index: w,
                start_t: start,
                matrix: DataMatrix::from_vec(series.channels, 4, rows)?,
            })
        })
        .collect()
}

/// Verdict for one window: the per-channel anomaly score vector plus the
/// top reported group (score 0 when no group was found) and its member
/// channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowScore {
    pub window_index: usize,
    pub start_t: usize,
    /// Full-rate (qr = 1) anomaly score of every channel; the window's
    /// anomaly score vector, comparable across windows.
    pub channel_scores: Vec<f64>,
    pub group_score: f64,
    pub member_channels: Vec<usize>,
}

impl WindowScore {
    /// The loudest channel's score; the window-level attention signal.
    pub fn max_channel_score(&self) -> f64 {
        self.channel_scores.iter().cloned().fold(0.0, f64::max)
    }
}

/// Run the group detector on every window cloud. Scores are comparable
/// across windows, so the loudest window is the most anomalous period and
/// its group members are the implicated channels.
pub fn score_windows(
    clouds: &[WindowCloud],
    config: &DetectConfig,
    seed: Seed,
) -> Result<Vec<WindowScore>> {
    if clouds.is_empty() {
        return Err(Error::InvalidParam("no windows to score".into()));
    }
    clouds
        .par_iter()
        .map(|cloud| {
            let (report, xray, _) = detect_with_xray(
                &cloud.matrix,
                config,
                seed.derive(&[DOM_WINDOW, cloud.window_index as u64]),
            )?;
            let channel_scores = (0..cloud.matrix.n_rows()).map(|i| xray.score(i, 0)).collect();
            let (group_score, member_channels) = report
                .groups
                .first()
                .map(|g| (g.iso_score, g.members.clone()))
                .unwrap_or((0.0, Vec::new()));
            Ok(WindowScore {
                window_index: cloud.window_index,
                start_t: cloud.start_t,
                channel_scores,
                group_score,
                member_channels,
            })
        })
        .collect()
}

/// Ladder settings sized for window clouds, which have one point per
/// channel rather than thousands.
pub fn small_cloud_config() -> DetectConfig {
    DetectConfig { min_level_size: 16, ..DetectConfig::default() }
}
