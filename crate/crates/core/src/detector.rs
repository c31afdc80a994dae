//! Series-level anomaly scoring: distance to the training mean or average
//! distance to the K nearest training series, on raw or sphered features.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::TimeSeries;
use crate::distance::{distance, DistanceKind};
use crate::error::{Error, Result};
use crate::features::{extract_point_features, PointFeatureMatrix, Resolutions, WindowConfig};
use crate::radon::{
    cumulative_radon, fit_grid_from_ranges, projection_ranges, sample_directions, CrFeatures, DirectionScheme,
    DirectionSet, HistogramGrid, DEFAULT_BINS, DEFAULT_PAD, DEFAULT_PROJECTIONS,
};
use crate::sphering::{fit_sphering, EpsilonPolicy, SpheringModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadonConfig {
    pub n_projections: usize,
    pub n_bins: usize,
    pub scheme: DirectionScheme,
    pub seed: u64,
    pub pad: f64,
}

impl Default for RadonConfig {
    fn default() -> Self {
        Self {
            n_projections: DEFAULT_PROJECTIONS,
            n_bins: DEFAULT_BINS,
            scheme: DirectionScheme::Gaussian,
            seed: 0,
            pad: DEFAULT_PAD,
        }
    }
}

impl RadonConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_projections == 0 {
            return Err(Error::config("n_projections must be at least 1"));
        }
        if self.n_bins < 2 {
            return Err(Error::config("n_bins must be at least 2"));
        }
        if !(self.pad >= 0.0 && self.pad.is_finite()) {
            return Err(Error::config("pad must be a finite non-negative fraction"));
        }
        Ok(())
    }

    /// Length of a flattened feature vector.
    pub fn feature_len(&self) -> usize {
        self.n_projections * self.n_bins
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scorer {
    #[default]
    MeanDist,
    Knn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Raw,
    #[default]
    Sphered,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub scorer: Scorer,
    pub distance: DistanceKind,
    pub k: usize,
    pub space: Space,
    pub epsilon: EpsilonPolicy,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            scorer: Scorer::MeanDist,
            distance: DistanceKind::L2,
            k: 2,
            space: Space::Sphered,
            epsilon: EpsilonPolicy::default(),
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.space == Space::Sphered && self.distance.needs_raw_features() {
            return Err(Error::config("SWD distances are only defined on raw (unsphered) features"));
        }
        if self.scorer == Scorer::Knn && self.k == 0 {
            return Err(Error::config("k must be at least 1"));
        }
        self.epsilon.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub window: WindowConfig,
    pub radon: RadonConfig,
    pub detector: DetectorConfig,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        self.radon.validate()?;
        self.detector.validate()
    }
}

/// The fitted, shared part of the pipeline: resolved window layout,
/// projection directions and histogram grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturePipeline {
    pub window: WindowConfig,
    pub channels: usize,
    pub directions: DirectionSet,
    pub grid: HistogramGrid,
}

impl FeaturePipeline {
    /// Fits directions and grid on the training series. `Auto` resolutions
    /// are pinned using the shortest training series.
    pub fn fit(train: &[TimeSeries], window: &WindowConfig, radon: &RadonConfig) -> Result<Self> {
        window.validate()?;
        radon.validate()?;
        let first = train.first().ok_or_else(|| Error::invalid("no training series"))?;
        let channels = first.channels();
        if let Some(bad) = train.iter().find(|s| s.channels() != channels) {
            return Err(Error::Dimension { expected: channels, found: bad.channels() });
        }
        let min_len = train.iter().map(TimeSeries::len).min().unwrap_or(1);
        let window = match window.resolutions {
            Resolutions::Auto => window.resolve(min_len),
            Resolutions::Fixed(_) => *window,
        };
        let dim = window.feature_dim(channels).ok_or_else(|| Error::config("window resolutions unresolved"))?;

        let features: Vec<PointFeatureMatrix> = train.par_iter().map(|s| extract_point_features(s, &window)).collect();
        let directions = sample_directions(dim, radon.n_projections, radon.scheme, radon.seed, Some(&features))?;
        let ranges = features
            .par_chunks(64)
            .map(|chunk| projection_ranges(chunk, &directions))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .reduce(|a, b| a.iter().zip(&b).map(|(x, y)| (x.0.min(y.0), x.1.max(y.1))).collect())
            .unwrap_or_default();
        let grid = fit_grid_from_ranges(&ranges, radon.n_bins, radon.pad)?;
        Ok(Self { window, channels, directions, grid })
    }

    pub fn feature_len(&self) -> usize {
        self.grid.directions() * self.grid.bins()
    }

    /// Cumulative Radon features of one series.
    pub fn transform(&self, series: &TimeSeries) -> Result<CrFeatures> {
        if series.channels() != self.channels {
            return Err(Error::Dimension { expected: self.channels, found: series.channels() });
        }
        let f = extract_point_features(series, &self.window);
        cumulative_radon(&f, &self.directions, &self.grid)
    }

    pub fn transform_many(&self, series: &[TimeSeries]) -> Result<Vec<CrFeatures>> {
        series.par_iter().map(|s| self.transform(s)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedDetector {
    pub config: DetectorConfig,
    pub pipeline: FeaturePipeline,
    pub sphering: Option<SpheringModel>,
    /// Raw cumulative Radon features of each training series.
    pub bank_raw: Vec<Vec<f64>>,
    /// Training features in the scoring space (sphered or raw).
    pub bank: Vec<Vec<f64>>,
    /// Mean of `bank`.
    pub center: Vec<f64>,
    /// When set, the detector was fitted on sliding windows of this length
    /// and point scores use the same window length.
    pub window_len: Option<usize>,
}

impl FittedDetector {
    /// Fits the detector on normal training series.
    pub fn fit(train: &[TimeSeries], cfg: &PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        if train.len() < 2 {
            return Err(Error::invalid(format!("need at least 2 normal training series, got {}", train.len())));
        }
        if cfg.detector.scorer == Scorer::Knn && cfg.detector.k > train.len() {
            return Err(Error::config(format!("k = {} exceeds the {} training series", cfg.detector.k, train.len())));
        }
        let pipeline = FeaturePipeline::fit(train, &cfg.window, &cfg.radon)?;
        let bank_raw: Vec<Vec<f64>> = pipeline.transform_many(train)?.into_iter().map(CrFeatures::into_vec).collect();
        let (sphering, bank) = match cfg.detector.space {
            Space::Raw => (None, bank_raw.clone()),
            Space::Sphered => {
                let model = fit_sphering(&bank_raw, cfg.detector.epsilon)?;
                let bank = bank_raw.par_iter().map(|x| model.sphere(x)).collect::<Result<Vec<_>>>()?;
                (Some(model), bank)
            }
        };
        let center = mean_vector(&bank);
        Ok(Self { config: cfg.detector, pipeline, sphering, bank_raw, bank, center, window_len: None })
    }

    /// Fits on every length-`window_len` sub-window of the training series,
    /// for point-level scoring with [`FittedDetector::score_points`].
    pub fn fit_windows(train: &[TimeSeries], window_len: usize, cfg: &PipelineConfig) -> Result<Self> {
        let windows = sliding_windows(train, window_len)?;
        let mut det = Self::fit(&windows, cfg)?;
        det.window_len = Some(window_len);
        Ok(det)
    }

    pub fn feature_len(&self) -> usize {
        self.pipeline.feature_len()
    }

    /// Series features in the scoring space.
    pub fn embed(&self, series: &TimeSeries) -> Result<Vec<f64>> {
        let raw = self.pipeline.transform(series)?.into_vec();
        match &self.sphering {
            Some(model) => model.sphere(&raw),
            None => Ok(raw),
        }
    }

    fn grid(&self) -> Option<&HistogramGrid> {
        Some(&self.pipeline.grid)
    }

    /// Anomaly score of an embedded vector; higher is more anomalous.
    pub fn score_embedded(&self, x: &[f64]) -> Result<f64> {
        let kind = self.config.distance;
        match self.config.scorer {
            Scorer::MeanDist => distance(kind, x, &self.center, self.grid()),
            Scorer::Knn => {
                let mut dists =
                    self.bank.iter().map(|row| distance(kind, x, row, self.grid())).collect::<Result<Vec<_>>>()?;
                Ok(mean_of_smallest(&mut dists, self.config.k))
            }
        }
    }

    pub fn score_series(&self, series: &TimeSeries) -> Result<f64> {
        self.score_embedded(&self.embed(series)?)
    }

    pub fn score_many(&self, series: &[TimeSeries]) -> Result<Vec<f64>> {
        series.par_iter().map(|s| self.score_series(s)).collect()
    }

    /// Point scores from sliding windows: position `t` gets the score of the
    /// length-`window_len` window centred on it, shifted to stay in range.
    pub fn score_points(&self, series: &TimeSeries, window_len: usize) -> Result<Vec<f64>> {
        let len = series.len();
        if window_len == 0 || window_len > len {
            return Err(Error::invalid(format!("window length {window_len} does not fit a series of length {len}")));
        }
        let start_of = |t: usize| t.saturating_sub(window_len / 2).min(len - window_len);
        let starts: Vec<usize> = (0..=len - window_len).collect();
        let window_scores =
            starts.par_iter().map(|&s| self.score_series(&series.slice(s, window_len)?)).collect::<Result<Vec<_>>>()?;
        Ok((0..len).map(|t| window_scores[start_of(t)]).collect())
    }
}

/// Every contiguous length-`window_len` slice of every series, in order.
pub fn sliding_windows(series: &[TimeSeries], window_len: usize) -> Result<Vec<TimeSeries>> {
    let mut out = Vec::new();
    for s in series {
        if window_len == 0 || s.len() < window_len {
            return Err(Error::invalid(format!(
                "series `{}` (length {}) is shorter than the window length {window_len}",
                s.id(),
                s.len()
            )));
        }
        for start in 0..=s.len() - window_len {
            out.push(s.slice(start, window_len)?);
        }
    }
    Ok(out)
}

/// Average of the `k` smallest values (all of them when `k` exceeds the count).
pub fn mean_of_smallest(values: &mut [f64], k: usize) -> f64 {
    values.sort_by(f64::total_cmp);
    let k = k.min(values.len()).max(1);
    values[..k].iter().sum::<f64>() / k as f64
}

fn mean_vector(rows: &[Vec<f64>]) -> Vec<f64> {
    let dim = rows.first().map_or(0, Vec::len);
    let mut mean = vec![0.0; dim];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    let n = rows.len().max(1) as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    mean
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(id: &str, len: usize, phase: f64, amp: f64) -> TimeSeries {
        TimeSeries::univariate(
            id,
            (0..len).map(|t| amp * (2.0 * std::f64::consts::PI * t as f64 / 12.0 + phase).sin()).collect(),
        )
        .unwrap()
    }

    fn small_cfg() -> PipelineConfig {
        PipelineConfig {
            radon: RadonConfig { n_projections: 8, n_bins: 6, ..Default::default() },
            ..Default::default()
        }
    }

    #[test]
    fn identical_training_series() {
        let train: Vec<_> = (0..5).map(|i| sine(&i.to_string(), 40, 0.0, 1.0)).collect();
        let det = FittedDetector::fit(&train, &small_cfg()).unwrap();
        assert!(det.bank_raw.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(det.score_series(&train[0]).unwrap(), 0.0);
        assert!(det.score_series(&sine("x", 40, 0.0, 3.0)).unwrap() > 0.0);
    }

    #[test]
    fn knn_on_a_training_member_is_zero() {
        let train: Vec<_> = (0..6).map(|i| sine(&i.to_string(), 50, i as f64 * 0.4, 1.0 + 0.1 * i as f64)).collect();
        let mut cfg = small_cfg();
        cfg.detector.scorer = Scorer::Knn;
        cfg.detector.k = 1;
        for space in [Space::Raw, Space::Sphered] {
            cfg.detector.space = space;
            let det = FittedDetector::fit(&train, &cfg).unwrap();
            for s in &train {
                assert_eq!(det.score_series(s).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = small_cfg();
        cfg.detector.distance = DistanceKind::Swd1;
        assert!(cfg.validate().is_err());
        cfg.detector.space = Space::Raw;
        assert!(cfg.validate().is_ok());
        cfg.detector.scorer = Scorer::Knn;
        cfg.detector.k = 10;
        let train: Vec<_> = (0..3).map(|i| sine(&i.to_string(), 30, i as f64, 1.0)).collect();
        assert!(FittedDetector::fit(&train, &cfg).is_err());
        assert!(FittedDetector::fit(&train[..1], &small_cfg()).is_err());
    }

    #[test]
    fn channel_mismatch_is_rejected() {
        let train: Vec<_> = (0..3).map(|i| sine(&i.to_string(), 30, i as f64, 1.0)).collect();
        let det = FittedDetector::fit(&train, &small_cfg()).unwrap();
        let two = TimeSeries::new("x", 2, vec![0.0; 20]).unwrap();
        assert!(det.score_series(&two).is_err());
    }

    #[test]
    fn point_scores_cover_every_position() {
        let train = vec![sine("a", 80, 0.0, 1.0), sine("b", 80, 0.3, 1.0)];
        let det = FittedDetector::fit_windows(&train, 16, &small_cfg()).unwrap();
        assert_eq!(det.bank.len(), 2 * 65);
        let scores = det.score_points(&sine("t", 100, 0.0, 1.0), 16).unwrap();
        assert_eq!(scores.len(), 100);
        assert!(det.score_points(&sine("t", 10, 0.0, 1.0), 16).is_err());
    }

    #[test]
    fn smallest_mean() {
        let mut v = vec![3.0, 1.0, 2.0, 10.0];
        assert_eq!(mean_of_smallest(&mut v, 1), 1.0);
        assert_eq!(mean_of_smallest(&mut v, 3), 2.0);
        assert_eq!(mean_of_smallest(&mut v, 9), 4.0);
    }
}
