//! Flat run configuration shared by the CLI and the bindings, plus the model
//! file format.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::detector::{DetectorConfig, FittedDetector, PipelineConfig, RadonConfig, Scorer, Space};
use crate::distance::DistanceKind;
use crate::error::{Error, Result};
use crate::eval::SuiteConfig;
use crate::features::{Boundary, Resolutions, WindowConfig};
use crate::radon::{DirectionScheme, DEFAULT_BINS, DEFAULT_PAD, DEFAULT_PROJECTIONS};
use crate::regressor::{PointRegressor, DEFAULT_CONTEXT_LEN};
use crate::sphering::EpsilonPolicy;
use crate::synth::{Scenario, SynthConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonMode {
    #[default]
    Relative,
    Absolute,
}

/// What `fit` produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// One score per series.
    #[default]
    Series,
    /// Fitted on sliding windows of `context_len`; scores points.
    Collective,
    /// Next-value ridge regressor; scores points.
    Regressor,
}

/// Detector used for point-level evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointMethod {
    /// Collective scorer for segment scenarios, regressor for point scenarios.
    #[default]
    Auto,
    Collective,
    Regressor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub half_width: usize,
    /// Unset: `auto` for datasets, 1 for the synthetic suite.
    pub resolutions: Option<Resolutions>,
    pub boundary: Boundary,
    pub znorm: bool,

    pub n_projections: usize,
    pub n_bins: usize,
    pub scheme: DirectionScheme,
    pub seed: u64,
    pub pad: f64,

    pub epsilon_mode: EpsilonMode,
    pub epsilon: f64,
    pub scorer: Scorer,
    pub distance: DistanceKind,
    pub k: usize,
    pub space: Space,

    pub model_kind: ModelKind,
    pub context_len: usize,
    pub ridge_lambda: Option<f64>,
    pub point_method: PointMethod,
    pub include_prefix: bool,

    pub min_length: Option<usize>,
    pub max_length: Option<usize>,

    pub scenarios: Vec<Scenario>,
    pub ratios: Vec<f64>,
    pub n_trials: usize,
    pub n_train_series: usize,
    pub synth_length: usize,
    pub synth_amplitude: f64,
    pub synth_period: f64,
    pub synth_noise: f64,
    pub synth_segment_len: usize,
    pub synth_margin: usize,
    pub synth_trend_slope: f64,
    pub synth_seasonal_factor: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let window = WindowConfig::default();
        let synth = SynthConfig::default();
        let suite = SuiteConfig::default();
        Self {
            half_width: window.half_width,
            resolutions: None,
            boundary: window.boundary,
            znorm: window.znorm,
            n_projections: DEFAULT_PROJECTIONS,
            n_bins: DEFAULT_BINS,
            scheme: DirectionScheme::Gaussian,
            seed: 0,
            pad: DEFAULT_PAD,
            epsilon_mode: EpsilonMode::Relative,
            epsilon: 1e-6,
            scorer: Scorer::MeanDist,
            distance: DistanceKind::L2,
            k: 2,
            space: Space::Sphered,
            model_kind: ModelKind::Series,
            context_len: DEFAULT_CONTEXT_LEN,
            ridge_lambda: None,
            point_method: PointMethod::Auto,
            include_prefix: false,
            min_length: None,
            max_length: None,
            scenarios: suite.scenarios,
            ratios: suite.ratios,
            n_trials: suite.n_trials,
            n_train_series: suite.n_train_series,
            synth_length: synth.length,
            synth_amplitude: synth.amplitude,
            synth_period: synth.period,
            synth_noise: synth.noise,
            synth_segment_len: synth.segment_len,
            synth_margin: synth.margin,
            synth_trend_slope: synth.trend_slope,
            synth_seasonal_factor: synth.seasonal_factor,
        }
    }
}

impl RunConfig {
    /// Parses a JSON config object, applies `key=value` overrides and
    /// validates the result.
    pub fn from_json_with_overrides(text: Option<&str>, overrides: &[(String, String)]) -> Result<Self> {
        let mut obj = match text {
            Some(t) => match serde_json::from_str::<Value>(t)? {
                Value::Object(m) => m,
                _ => return Err(Error::config("config file must hold a JSON object")),
            },
            None => Map::new(),
        };
        let defaults = match serde_json::to_value(Self::default())? {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        for (key, raw) in overrides {
            let key = key.replace('-', "_");
            let Some(default) = defaults.get(&key) else {
                return Err(Error::config(format!("unknown config key `{key}`")));
            };
            let value = match override_value(raw) {
                v @ Value::Array(_) => v,
                v if default.is_array() => Value::Array(vec![v]),
                v => v,
            };
            obj.insert(key, value);
        }
        let cfg: RunConfig = serde_json::from_value(Value::Object(obj)).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_json_with_overrides(Some(text), &[])
    }

    /// Every config key.
    pub fn keys() -> Vec<String> {
        match serde_json::to_value(Self::default()) {
            Ok(Value::Object(m)) => m.keys().cloned().collect(),
            _ => Vec::new(),
        }
    }

    pub fn epsilon_policy(&self) -> EpsilonPolicy {
        match self.epsilon_mode {
            EpsilonMode::Relative => EpsilonPolicy::Relative(self.epsilon),
            EpsilonMode::Absolute => EpsilonPolicy::Absolute(self.epsilon),
        }
    }

    pub fn pipeline(&self) -> PipelineConfig {
        self.pipeline_with(self.resolutions.unwrap_or(Resolutions::Auto))
    }

    fn pipeline_with(&self, resolutions: Resolutions) -> PipelineConfig {
        PipelineConfig {
            window: WindowConfig {
                half_width: self.half_width,
                resolutions,
                boundary: self.boundary,
                znorm: self.znorm,
            },
            radon: RadonConfig {
                n_projections: self.n_projections,
                n_bins: self.n_bins,
                scheme: self.scheme,
                seed: self.seed,
                pad: self.pad,
            },
            detector: DetectorConfig {
                scorer: self.scorer,
                distance: self.distance,
                k: self.k,
                space: self.space,
                epsilon: self.epsilon_policy(),
            },
        }
    }

    pub fn synth(&self) -> SynthConfig {
        SynthConfig {
            length: self.synth_length,
            amplitude: self.synth_amplitude,
            period: self.synth_period,
            noise: self.synth_noise,
            scenario: Scenario::Shapelet,
            ratio: 0.0,
            seed: self.seed,
            segment_len: self.synth_segment_len,
            margin: self.synth_margin,
            trend_slope: self.synth_trend_slope,
            seasonal_factor: self.synth_seasonal_factor,
        }
    }

    pub fn suite(&self) -> SuiteConfig {
        SuiteConfig {
            synth: self.synth(),
            scenarios: self.scenarios.clone(),
            ratios: self.ratios.clone(),
            n_trials: self.n_trials,
            seed: self.seed,
            n_train_series: self.n_train_series,
            pipeline: self.pipeline_with(self.resolutions.unwrap_or(Resolutions::Fixed(1))),
            context_len: self.context_len,
            ridge_lambda: self.ridge_lambda,
            include_prefix: self.include_prefix,
            collective: match self.point_method {
                PointMethod::Auto => None,
                PointMethod::Collective => Some(true),
                PointMethod::Regressor => Some(false),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pipeline().validate()?;
        self.suite().pipeline.validate()?;
        if self.context_len == 0 {
            return Err(Error::config("context_len must be at least 1"));
        }
        if let Some(l) = self.ridge_lambda {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::config("ridge_lambda must be a finite non-negative number"));
            }
        }
        if let (Some(lo), Some(hi)) = (self.min_length, self.max_length) {
            if lo > hi {
                return Err(Error::config("min_length exceeds max_length"));
            }
        }
        if self.n_trials == 0 {
            return Err(Error::config("n_trials must be at least 1"));
        }
        if self.ratios.iter().any(|r| !(0.0..1.0).contains(r)) {
            return Err(Error::config("ratios must lie in [0, 1)"));
        }
        self.synth().validate()
    }

    /// Canonical JSON of the configuration.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// SHA-256 of the canonical JSON, as lowercase hex.
    pub fn hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_json()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}

/// Reads an override as JSON when it parses, otherwise as a bare string.
fn override_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| {
        if raw.contains(',') {
            Value::Array(raw.split(',').map(|p| override_value(p.trim())).collect())
        } else {
            Value::String(raw.to_string())
        }
    })
}

/// A fitted model of either kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Detector(FittedDetector),
    Regressor(PointRegressor),
}

#[derive(Serialize)]
struct ModelFileOut<'a> {
    schema_version: u32,
    model: &'a Model,
}

#[derive(Deserialize)]
struct ModelFileIn {
    schema_version: u32,
    model: Value,
}

impl Model {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ModelFileOut { schema_version: SCHEMA_VERSION, model: self })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFileIn = serde_json::from_str(text)?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion { found: file.schema_version, supported: SCHEMA_VERSION });
        }
        let model: Model = serde_json::from_value(file.model)?;
        model.check()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Internal consistency of a deserialized model.
    fn check(&self) -> Result<()> {
        let pipeline = match self {
            Model::Detector(d) => &d.pipeline,
            Model::Regressor(r) => &r.pipeline,
        };
        let dim = pipeline
            .window
            .feature_dim(pipeline.channels)
            .ok_or_else(|| Error::invalid("model window resolutions are unresolved"))?;
        if pipeline.directions.dim() != dim || pipeline.directions.len() != pipeline.grid.directions() {
            return Err(Error::invalid("model directions do not match its window or grid"));
        }
        let d = pipeline.feature_len();
        let bad = match self {
            Model::Detector(det) => {
                det.center.len() != d
                    || det.bank.iter().chain(&det.bank_raw).any(|r| r.len() != d)
                    || det.sphering.as_ref().is_some_and(|s| s.dim() != d || s.eigenvectors().cols() != d)
            }
            Model::Regressor(reg) => reg.weights.len() != d + 1,
        };
        if bad {
            return Err(Error::invalid("model feature dimensions are inconsistent"));
        }
        Ok(())
    }
}
