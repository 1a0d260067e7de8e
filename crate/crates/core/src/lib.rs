//! Generalized anomaly detection for point-cloud data.
//!
//! The detector builds ensembles of depth-limited randomized partition trees
//! and normalizes path lengths with a depth-estimation function `H(n)` fitted
//! to the dataset at hand, so that scores are comparable across datasets of
//! different sizes and distributions. On top of the point detector sits a
//! qualification-rate sampling pipeline that surfaces *group* anomalies:
//! micro-clusters whose members look normal individually but are collectively
//! rare. Points and groups are ranked on one scale.
//!
//! The crate also ships the supporting machinery used to validate the
//! detector: synthetic data generators (Gaussian blobs, uniform shapes,
//! chaos-game fractals), an axiom test battery, ranking metrics, a scaling
//! benchmark, and a sliding-window featurizer that turns multivariate time
//! series into per-window point clouds.
//!
//! ```
//! use gen2out::data::gen_gaussian_blobs;
//! use gen2out::detector::{Detector, DetectorConfig};
//! use gen2out::seed::Seed;
//!
//! let x = gen_gaussian_blobs(
//!     &[vec![0.0, 0.0]],
//!     &[1.0],
//!     &[2000],
//!     Seed::new(7),
//! ).unwrap();
//! let det = Detector::fit(&x, &DetectorConfig::default(), Seed::new(7)).unwrap();
//! let scores = det.score(&x).unwrap();
//! assert!(scores.iter().all(|s| *s > 0.0 && *s <= 1.0));
//! ```

pub mod axioms;
pub mod data;
pub mod dbscan;
pub mod depth;
pub mod detector;
pub mod error;
pub mod eval;
pub mod seed;
pub mod tree;
pub mod tscloud;
pub mod xray;

pub use error::{Error, Result};
pub use seed::Seed;
