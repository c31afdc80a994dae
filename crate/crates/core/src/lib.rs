//! Time-series anomaly detection with cumulative Radon features.
//!
//! A series is turned into a cloud of multi-resolution window vectors, the
//! cloud is projected onto a fixed set of directions, and each projection is
//! summarised by a histogram CDF on a grid fitted to the training data. The
//! concatenated CDFs are optionally whitened with the training covariance and
//! scored by distance to the training set.
//!
//! ```
//! use radon_ad::{FittedDetector, PipelineConfig, TimeSeries};
//!
//! let wave = |phase: f64, amp: f64| {
//!     let v = (0..64).map(|t| amp * (t as f64 * 0.4 + phase).sin()).collect();
//!     TimeSeries::univariate("s", v).unwrap()
//! };
//! let train: Vec<_> = (0..8).map(|i| wave(i as f64 * 0.3, 1.0)).collect();
//! let mut cfg = PipelineConfig::default();
//! cfg.radon.n_projections = 20;
//! cfg.radon.n_bins = 8;
//! let det = FittedDetector::fit(&train, &cfg).unwrap();
//! assert!(det.score_series(&wave(0.1, 4.0)).unwrap() > det.score_series(&wave(0.1, 1.0)).unwrap());
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod data;
pub mod detector;
pub mod distance;
pub mod error;
pub mod eval;
pub mod features;
pub mod linalg;
pub mod radon;
pub mod regressor;
pub mod sphering;
pub mod synth;

pub use config::{Model, RunConfig, SCHEMA_VERSION};
pub use data::{LabeledDataset, PointLabeledSeries, Split, TimeSeries};
pub use detector::{DetectorConfig, FittedDetector, PipelineConfig, RadonConfig, Scorer, Space};
pub use distance::DistanceKind;
pub use error::{Error, Result};
pub use features::{Boundary, Resolutions, WindowConfig};
pub use radon::DirectionScheme;
pub use regressor::PointRegressor;
pub use sphering::EpsilonPolicy;
pub use synth::{Scenario, SynthConfig};
