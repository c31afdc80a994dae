//! Seeded generator for univariate anomaly scenarios on a noisy sine wave:
//! three collective kinds (shapelet, trend, seasonal) injected as contiguous
//! segments and two point kinds (global, contextual) injected as isolated
//! points.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{PointLabeledSeries, TimeSeries};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Shapelet,
    Trend,
    Seasonal,
    PointGlobal,
    PointContextual,
}

impl Scenario {
    pub const ALL: [Scenario; 5] =
        [Scenario::Shapelet, Scenario::Trend, Scenario::Seasonal, Scenario::PointContextual, Scenario::PointGlobal];

    pub fn is_collective(self) -> bool {
        matches!(self, Scenario::Shapelet | Scenario::Trend | Scenario::Seasonal)
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Shapelet => "shapelet",
            Scenario::Trend => "trend",
            Scenario::Seasonal => "seasonal",
            Scenario::PointGlobal => "point_global",
            Scenario::PointContextual => "point_contextual",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s.to_ascii_lowercase().replace('-', "_"))
            .ok_or_else(|| Error::config(format!("unknown scenario `{s}`")))
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub length: usize,
    pub amplitude: f64,
    pub period: f64,
    pub noise: f64,
    pub scenario: Scenario,
    /// Target fraction of anomalous points, in `[0, 1)`.
    pub ratio: f64,
    pub seed: u64,
    /// Length of each collective anomaly segment.
    pub segment_len: usize,
    /// Positions this close to either end are never anomalous.
    pub margin: usize,
    /// Per-step drift of trend segments, in units of the amplitude.
    pub trend_slope: f64,
    /// Period multiplier inside seasonal segments.
    pub seasonal_factor: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            length: 200,
            amplitude: 1.0,
            period: 25.0,
            noise: 0.05,
            scenario: Scenario::Shapelet,
            ratio: 0.1,
            seed: 0,
            segment_len: 20,
            margin: 20,
            trend_slope: 0.05,
            seasonal_factor: 0.5,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.ratio) {
            return Err(Error::config("ratio must lie in [0, 1)"));
        }
        if !(self.period > 0.0) || (self.length as f64) < 2.0 * self.period {
            return Err(Error::config("length must cover at least two periods"));
        }
        if !(self.amplitude > 0.0) || !(self.noise >= 0.0) {
            return Err(Error::config("amplitude must be positive and noise non-negative"));
        }
        if self.segment_len < 5 {
            return Err(Error::config("segment length must be at least 5"));
        }
        if self.seasonal_factor <= 0.0 || self.seasonal_factor == 1.0 {
            return Err(Error::config("seasonal factor must be positive and differ from 1"));
        }
        Ok(())
    }

    fn clean_value(&self, t: usize) -> f64 {
        self.amplitude * (2.0 * PI * t as f64 / self.period).sin()
    }

    /// Number of injected units (segments or points) for the configured ratio.
    pub fn units(&self) -> usize {
        if self.ratio == 0.0 {
            return 0;
        }
        let points = self.ratio * self.length as f64;
        if self.scenario.is_collective() {
            ((points / self.segment_len as f64).round() as usize).max(1)
        } else {
            (points.round() as usize).max(1)
        }
    }
}

/// Places `count` non-overlapping, non-adjacent runs of length `run` inside
/// `lo..hi`, uniformly over valid placements.
fn place_runs(rng: &mut ChaCha8Rng, count: usize, run: usize, lo: usize, hi: usize) -> Option<Vec<usize>> {
    if count == 0 {
        return Some(vec![]);
    }
    let span = hi.checked_sub(lo)?;
    let needed = count * run + (count - 1);
    let slack = span.checked_sub(needed)?;
    let mut offsets: Vec<usize> = (0..count).map(|_| rng.random_range(0..=slack)).collect();
    offsets.sort_unstable();
    Some(offsets.iter().enumerate().map(|(i, off)| lo + off + i * (run + 1)).collect())
}

fn series_seed(seed: u64, index: usize) -> u64 {
    seed ^ index as u64
}

/// Generates one labelled series.
pub fn generate_one(cfg: &SynthConfig) -> Result<PointLabeledSeries> {
    cfg.validate()?;
    let len = cfg.length;
    let a = cfg.amplitude;
    let sigma = cfg.noise;

    let mut noise_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    noise_rng.set_stream(0);
    let mut inject_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    inject_rng.set_stream(1);

    let normal = Normal::new(0.0, sigma).map_err(|e| Error::config(e.to_string()))?;
    let noise: Vec<f64> = (0..len).map(|_| normal.sample(&mut noise_rng)).collect();
    let mut values: Vec<f64> = (0..len).map(|t| cfg.clean_value(t) + noise[t]).collect();
    let mut labels = vec![0u8; len];

    let units = cfg.units();
    let (lo, hi) = (cfg.margin, len.saturating_sub(cfg.margin));
    let run = if cfg.scenario.is_collective() { cfg.segment_len } else { 1 };
    let starts = place_runs(&mut inject_rng, units, run, lo, hi).ok_or_else(|| {
        Error::config(format!("cannot fit {units} anomalies of length {run} into positions {lo}..{hi}"))
    })?;

    for &start in &starts {
        for (k, t) in (start..start + run).enumerate() {
            let clean = cfg.clean_value(t);
            values[t] = match cfg.scenario {
                Scenario::Shapelet => {
                    let square = if clean >= 0.0 { a } else { -a };
                    square + noise[t]
                }
                Scenario::Trend => values[t] + cfg.trend_slope * a * (k + 1) as f64,
                Scenario::Seasonal => a * (2.0 * PI * t as f64 / (cfg.period * cfg.seasonal_factor)).sin() + noise[t],
                Scenario::PointGlobal => {
                    let magnitude = a + 6.0 * sigma + inject_rng.random_range(0.1 * a..=a);
                    if inject_rng.random_bool(0.5) {
                        magnitude
                    } else {
                        -magnitude
                    }
                }
                Scenario::PointContextual => {
                    let delta = inject_rng.random_range(0.5 * a..=a).max(4.0 * sigma * 1.01);
                    let up = if clean == 0.0 { inject_rng.random_bool(0.5) } else { clean < 0.0 };
                    let sign = if up { 1.0 } else { -1.0 };
                    (clean + sign * delta).clamp(-a, a)
                }
            };
            if values[t] == cfg.clean_value(t) + noise[t] {
                return Err(Error::config("injected value coincides with the clean signal"));
            }
            labels[t] = 1;
        }
    }

    let id = format!("{}_{:02}_{}", cfg.scenario, (cfg.ratio * 100.0).round() as u32, cfg.seed);
    PointLabeledSeries::new(TimeSeries::univariate(id, values)?, labels)
}

/// Sidecar JSON for a generated series: its point labels and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointMask {
    pub series_id: String,
    #[serde(default)]
    pub scenario: Option<Scenario>,
    #[serde(default)]
    pub ratio: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub labels: Vec<u8>,
}

impl PointMask {
    pub fn for_series(series: &PointLabeledSeries, cfg: &SynthConfig) -> Self {
        Self {
            series_id: series.series().id().to_string(),
            scenario: Some(cfg.scenario),
            ratio: Some(cfg.ratio),
            seed: Some(cfg.seed),
            labels: series.point_labels().to_vec(),
        }
    }
}

/// Generates `n_series` series; series `i` uses seed `cfg.seed ⊕ i`.
pub fn generate(cfg: &SynthConfig, n_series: usize) -> Result<Vec<PointLabeledSeries>> {
    (0..n_series).map(|i| generate_one(&SynthConfig { seed: series_seed(cfg.seed, i), ..*cfg })).collect()
}
