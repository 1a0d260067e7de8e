//! Dataset representation, CSV ingestion and seeded synthetic generators.
//!
//! All generators are pure functions of `(spec, seed)`: the same inputs give
//! the same matrix on any machine and thread count. Matrices are immutable
//! after construction and safe to share across threads.

use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{Seed, DOM_BLOB, DOM_IFS, DOM_UNIFORM};

/// An n × m matrix of real-valued observations, row-major, with optional
/// binary ground-truth outlier labels (1 = outlier).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    labels: Option<Vec<u8>>,
}

impl DataMatrix {
    /// Build from a flat row-major buffer. Every value must be finite and
    /// `values.len()` must equal `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if cols == 0 {
            return Err(Error::InvalidParam("matrix needs at least one column".into()));
        }
        if values.len() != rows * cols {
            return Err(Error::InvalidParam(format!(
                "expected {} values for {rows}x{cols}, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonNumericCell {
                row: pos / cols,
                col: pos % cols,
                token: values[pos].to_string(),
            });
        }
        Ok(DataMatrix { rows, cols, values, labels: None })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(1, |r| r.len());
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::RaggedRow { row: i, expected: cols, got: r.len() });
            }
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    /// Attach ground-truth labels; length must match the row count.
    pub fn with_labels(mut self, labels: Vec<u8>) -> Result<Self> {
        if labels.len() != self.rows {
            return Err(Error::InvalidParam(format!(
                "{} labels for {} rows",
                labels.len(),
                self.rows
            )));
        }
        if let Some(bad) = labels.iter().position(|l| *l > 1) {
            return Err(Error::BadLabel { row: bad, value: labels[bad].to_string() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    /// New matrix containing the given rows, in the given order. Labels, if
    /// present, follow their rows.
    pub fn select_rows(&self, indices: &[usize]) -> DataMatrix {
        let mut values = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        let labels = self
            .labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i]).collect());
        DataMatrix { rows: indices.len(), cols: self.cols, values, labels }
    }

    /// Vertical concatenation. Labels are kept only if every part has them.
    pub fn vstack(parts: &[&DataMatrix]) -> Result<DataMatrix> {
        let cols = parts
            .first()
            .ok_or_else(|| Error::InvalidParam("vstack of nothing".into()))?
            .cols;
        let mut values = Vec::new();
        let mut labels = Some(Vec::new());
        let mut rows = 0;
        for p in parts {
            if p.cols != cols {
                return Err(Error::DimensionMismatch { expected: cols, got: p.cols });
            }
            values.extend_from_slice(&p.values);
            rows += p.rows;
            match (&mut labels, &p.labels) {
                (Some(acc), Some(l)) => acc.extend_from_slice(l),
                _ => labels = None,
            }
        }
        Ok(DataMatrix { rows, cols, values, labels })
    }
}

/// Parse a CSV file of real-valued observations.
///
/// Dialect: comma-separated, `.` decimal point, UTF-8. Lines starting with
/// `#` are skipped. A header row is auto-detected: if any cell of the first
/// data line fails to parse as a number, it is treated as a header. When
/// `label_column` names a column (by header name, or by zero-based index for
/// headerless files), that column is split off as binary labels.
pub fn load_csv(path: impl AsRef<Path>, label_column: Option<&str>) -> Result<DataMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(&text, label_column)
}

pub(crate) fn parse_csv(text: &str, label_column: Option<&str>) -> Result<DataMatrix> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .peekable();

    let mut header: Option<Vec<String>> = None;
    if let Some(first) = lines.peek() {
        let cells: Vec<&str> = first.split(',').collect();
        if cells.iter().any(|c| c.trim().parse::<f64>().is_err()) {
            header = Some(cells.iter().map(|c| c.trim().to_string()).collect());
            lines.next();
        }
    }

    let label_idx = match label_column {
        None => None,
        Some(name) => match &header {
            Some(h) => Some(
                h.iter()
                    .position(|c| c == name)
                    .ok_or_else(|| Error::MissingColumn { name: name.to_string() })?,
            ),
            None => Some(
                name.parse::<usize>()
                    .map_err(|_| Error::MissingColumn { name: name.to_string() })?,
            ),
        },
    };

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut width: Option<usize> = header.as_ref().map(Vec::len);
    let mut n = 0usize;

    for (row, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        match width {
            None => width = Some(cells.len()),
            Some(w) if w != cells.len() => {
                return Err(Error::RaggedRow { row, expected: w, got: cells.len() })
            }
            _ => {}
        }
        if let Some(li) = label_idx {
            if li >= cells.len() {
                return Err(Error::MissingColumn { name: label_column.unwrap().to_string() });
            }
        }
        for (col, cell) in cells.iter().enumerate() {
            let cell = cell.trim();
            if Some(col) == label_idx {
                match cell {
                    "0" => labels.push(0),
                    "1" => labels.push(1),
                    other => {
                        return Err(Error::BadLabel { row, value: other.to_string() })
                    }
                }
            } else {
                let v: f64 = cell.parse().map_err(|_| Error::NonNumericCell {
                    row,
                    col,
                    token: cell.to_string(),
                })?;
                if !v.is_finite() {
                    return Err(Error::NonNumericCell { row, col, token: cell.to_string() });
                }
                values.push(v);
            }
        }
        n += 1;
    }

    let cols = width.unwrap_or(1).saturating_sub(label_idx.map_or(0, |_| 1));
    if cols == 0 {
        return Err(Error::InvalidParam("no feature columns left after label".into()));
    }
    let m = DataMatrix::from_vec(n, cols, values)?;
    if label_idx.is_some() {
        m.with_labels(labels)
    } else {
        Ok(m)
    }
}

/// Draw i.i.d. isotropic Gaussian blobs; blob `k` contributes `counts[k]`
/// rows centered at `centers[k]` with standard deviation `stds[k]`.
pub fn gen_gaussian_blobs(
    centers: &[Vec<f64>],
    stds: &[f64],
    counts: &[usize],
    seed: Seed,
) -> Result<DataMatrix> {
    if centers.len() != stds.len() || centers.len() != counts.len() {
        return Err(Error::InvalidParam(format!(
            "blob spec lengths differ: {} centers, {} stds, {} counts",
            centers.len(),
            stds.len(),
            counts.len()
        )));
    }
    if centers.is_empty() {
        return Err(Error::InvalidParam("at least one blob required".into()));
    }
    let dim = centers[0].len();
    if centers.iter().any(|c| c.len() != dim) {
        return Err(Error::InvalidParam("blob centers of mixed dimension".into()));
    }
    if stds.iter().any(|s| *s < 0.0 || !s.is_finite()) {
        return Err(Error::InvalidParam("blob stds must be finite and >= 0".into()));
    }

    let n: usize = counts.iter().sum();
    let mut values = Vec::with_capacity(n * dim);
    for (k, center) in centers.iter().enumerate() {
        let mut rng = seed.derive(&[DOM_BLOB, k as u64]).rng();
        for _ in 0..counts[k] {
            for &c in center {
                values.push(c + stds[k] * standard_normal(&mut rng));
            }
        }
    }
    DataMatrix::from_vec(n, dim, values)
}

/// Box-Muller draw. `rand_distr` would do; this keeps the sampling path
/// self-contained and frozen.
fn standard_normal(rng: &mut impl Rng) -> f64 {
    loop {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        if u1 > f64::MIN_POSITIVE {
            return (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
        }
    }
}

/// Points uniform on the segment (0,0)–(1,0).
pub fn gen_uniform_line(n: usize, seed: Seed) -> DataMatrix {
    let mut rng = seed.derive(&[DOM_UNIFORM, 0]).rng();
    let mut values = Vec::with_capacity(n * 2);
    for _ in 0..n {
        values.push(rng.random::<f64>());
        values.push(0.0);
    }
    DataMatrix { rows: n, cols: 2, values, labels: None }
}

/// Points uniform in the unit square.
pub fn gen_uniform_square(n: usize, seed: Seed) -> DataMatrix {
    let mut rng = seed.derive(&[DOM_UNIFORM, 1]).rng();
    let mut values = Vec::with_capacity(n * 2);
    for _ in 0..n {
        values.push(rng.random::<f64>());
        values.push(rng.random::<f64>());
    }
    DataMatrix { rows: n, cols: 2, values, labels: None }
}

/// Points uniform in a disc of radius `radius` around `center` (area-uniform:
/// r = R·sqrt(u)).
pub fn gen_uniform_disc(center: [f64; 2], radius: f64, n: usize, seed: Seed) -> DataMatrix {
    let mut rng = seed.derive(&[DOM_UNIFORM, 2]).rng();
    let mut values = Vec::with_capacity(n * 2);
    for _ in 0..n {
        let r = radius * rng.random::<f64>().sqrt();
        let theta = std::f64::consts::TAU * rng.random::<f64>();
        values.push(center[0] + r * theta.cos());
        values.push(center[1] + r * theta.sin());
    }
    DataMatrix { rows: n, cols: 2, values, labels: None }
}

/// One affine map of an iterated function system: `x ↦ A·x + b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub a: [[f64; 2]; 2],
    pub b: [f64; 2],
}

impl AffineMap {
    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        [
            self.a[0][0] * p[0] + self.a[0][1] * p[1] + self.b[0],
            self.a[1][0] * p[0] + self.a[1][1] * p[1] + self.b[1],
        ]
    }
}

/// Iterated function system played as a chaos game: repeatedly apply a map
/// drawn by weight, discarding the first `burn_in` iterates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IfsSpec {
    pub maps: Vec<AffineMap>,
    pub weights: Vec<f64>,
    pub burn_in: usize,
}

impl IfsSpec {
    pub const DEFAULT_BURN_IN: usize = 100;

    pub fn new(maps: Vec<AffineMap>, weights: Vec<f64>) -> Result<Self> {
        let spec = IfsSpec { maps, weights, burn_in: Self::DEFAULT_BURN_IN };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.maps.is_empty() {
            return Err(Error::InvalidParam("IFS needs at least one map".into()));
        }
        if self.maps.len() != self.weights.len() {
            return Err(Error::InvalidParam(format!(
                "{} maps but {} weights",
                self.maps.len(),
                self.weights.len()
            )));
        }
        if self.weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidParam("IFS weights must be finite and >= 0".into()));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParam(format!("IFS weights sum to {total}, not 1")));
        }
        Ok(())
    }

    /// Sierpinski triangle: three half-scale maps toward the triangle
    /// vertices, one weight each.
    pub fn sierpinski(weights: [f64; 3]) -> Self {
        let half = [[0.5, 0.0], [0.0, 0.5]];
        let vertices = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.75_f64.sqrt()]];
        IfsSpec {
            maps: vertices
                .iter()
                .map(|v| AffineMap { a: half, b: [v[0] * 0.5, v[1] * 0.5] })
                .collect(),
            weights: weights.to_vec(),
            burn_in: Self::DEFAULT_BURN_IN,
        }
    }

    /// Line on [0,1] where a fraction `bias` of the mass recursively occupies
    /// the first half: maps x ↦ x/2 (weight `bias`) and x ↦ x/2 + 1/2.
    pub fn biased_line(bias: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&bias) {
            return Err(Error::InvalidParam(format!("line bias {bias} outside [0,1]")));
        }
        let a = [[0.5, 0.0], [0.0, 0.5]];
        Ok(IfsSpec {
            maps: vec![
                AffineMap { a, b: [0.0, 0.0] },
                AffineMap { a, b: [0.5, 0.0] },
            ],
            weights: vec![bias, 1.0 - bias],
            burn_in: Self::DEFAULT_BURN_IN,
        })
    }

    /// The classic four-map fern (stem, main frond, left and right leaflets)
    /// with the usual weights (0.01, 0.85, 0.07, 0.07).
    pub fn fern() -> Self {
        IfsSpec {
            maps: vec![
                AffineMap { a: [[0.0, 0.0], [0.0, 0.16]], b: [0.0, 0.0] },
                AffineMap { a: [[0.85, 0.04], [-0.04, 0.85]], b: [0.0, 1.6] },
                AffineMap { a: [[0.2, -0.26], [0.23, 0.22]], b: [0.0, 1.6] },
                AffineMap { a: [[-0.15, 0.28], [0.26, 0.24]], b: [0.0, 0.44] },
            ],
            weights: vec![0.01, 0.85, 0.07, 0.07],
            burn_in: Self::DEFAULT_BURN_IN,
        }
    }
}

/// Run the chaos game and emit `n` points (after burn-in), starting from the
/// origin.
pub fn gen_ifs(spec: &IfsSpec, n: usize, seed: Seed) -> Result<DataMatrix> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidParam("IFS sample size must be >= 1".into()));
    }
    // Cumulative weights; the last bucket absorbs rounding.
    let mut cum = Vec::with_capacity(spec.weights.len());
    let mut acc = 0.0;
    for w in &spec.weights {
        acc += w;
        cum.push(acc);
    }
    *cum.last_mut().unwrap() = f64::INFINITY;

    let mut rng = seed.derive(&[DOM_IFS, 0]).rng();
    let mut p = [0.0f64, 0.0];
    let mut values = Vec::with_capacity(n * 2);
    for step in 0..spec.burn_in + n {
        let u: f64 = rng.random();
        let k = cum.iter().position(|c| u < *c).unwrap();
        p = spec.maps[k].apply(p);
        if step >= spec.burn_in {
            values.push(p[0]);
            values.push(p[1]);
        }
    }
    DataMatrix::from_vec(n, 2, values)
}
