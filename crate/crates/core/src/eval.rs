//! ROC-AUC and the experiment drivers: one-vs-rest on labelled datasets, the
//! synthetic point-level suite, and single-axis ablations.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{one_vs_rest_splits, LabeledDataset, PointLabeledSeries, SkippedClass, TimeSeries};
use crate::detector::{FittedDetector, PipelineConfig, Space};
use crate::distance::DistanceKind;
use crate::error::{Error, Result};
use crate::features::{Resolutions, WindowConfig};
use crate::radon::DirectionScheme;
use crate::regressor::{PointRegressor, DEFAULT_CONTEXT_LEN};
use crate::synth::{generate_one, Scenario, SynthConfig};

/// Scores with binary labels (1 = anomalous).
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSet<'a> {
    pub scores: &'a [f64],
    pub labels: &'a [u8],
}

impl<'a> ScoredSet<'a> {
    pub fn new(scores: &'a [f64], labels: &'a [u8]) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::Dimension { expected: scores.len(), found: labels.len() });
        }
        if scores.iter().any(|s| s.is_nan()) {
            return Err(Error::invalid("NaN anomaly score"));
        }
        Ok(Self { scores, labels })
    }

    fn counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l != 0).count();
        (pos, self.labels.len() - pos)
    }
}

/// Rank-based (Mann–Whitney) ROC-AUC with average ranks for ties.
pub fn roc_auc(set: &ScoredSet) -> Result<f64> {
    let (pos, neg) = set.counts();
    if pos == 0 || neg == 0 {
        return Err(Error::invalid("ROC-AUC needs both normal and anomalous items"));
    }
    let n = set.scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| set.scores[a].total_cmp(&set.scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && set.scores[order[j]] == set.scores[order[i]] {
            j += 1;
        }
        // ranks i+1..=j share their average
        let avg = (i + 1 + j) as f64 / 2.0;
        let tied_pos = order[i..j].iter().filter(|&&k| set.labels[k] != 0).count();
        rank_sum_pos += avg * tied_pos as f64;
        i = j;
    }
    let (p, q) = (pos as f64, neg as f64);
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * q))
}

/// ROC curve points `(fpr, tpr)`, one per distinct threshold, from (0,0) to (1,1).
pub fn roc_curve(set: &ScoredSet) -> Result<Vec<(f64, f64)>> {
    let (pos, neg) = set.counts();
    if pos == 0 || neg == 0 {
        return Err(Error::invalid("ROC curve needs both normal and anomalous items"));
    }
    let mut order: Vec<usize> = (0..set.scores.len()).collect();
    order.sort_by(|&a, &b| set.scores[b].total_cmp(&set.scores[a]));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = set.scores[order[i]];
        while i < order.len() && set.scores[order[i]] == s {
            if set.labels[order[i]] != 0 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    Ok(points)
}

pub fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

// ---------------------------------------------------------------------------
// One-vs-rest

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub normal_class: String,
    pub n_train: usize,
    pub n_test: usize,
    pub n_anomalous: usize,
    pub auc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitTiming {
    pub normal_class: String,
    pub fit_seconds: f64,
    pub score_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneVsRestReport {
    pub splits: Vec<SplitResult>,
    pub skipped: Vec<SkippedClass>,
    /// Unweighted mean over splits with a defined AUC.
    pub mean_auc: Option<f64>,
    #[serde(skip)]
    pub timings: Vec<SplitTiming>,
    #[serde(skip)]
    pub test_scores: Vec<(Vec<f64>, Vec<u8>)>,
}

impl OneVsRestReport {
    /// Copy with AUCs rounded to 4 decimals.
    pub fn rounded(&self) -> Self {
        let mut out = self.clone();
        for s in &mut out.splits {
            s.auc = s.auc.map(round4);
        }
        out.mean_auc = out.mean_auc.map(round4);
        out
    }
}

pub fn mean_defined(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    let defined: Vec<f64> = values.into_iter().flatten().collect();
    (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
}

/// Fits one detector per normal class and scores the whole test split.
pub fn run_one_vs_rest(dataset: &LabeledDataset, cfg: &PipelineConfig) -> Result<OneVsRestReport> {
    cfg.validate()?;
    let ovr = one_vs_rest_splits(dataset)?;
    let results = ovr
        .splits
        .par_iter()
        .map(|split| {
            let n_anomalous = split.test_labels.iter().filter(|&&l| l == 1).count();
            let started = Instant::now();
            let det = FittedDetector::fit(&split.train, cfg)?;
            let fit_seconds = started.elapsed().as_secs_f64();
            let started = Instant::now();
            let scores = det.score_many(&split.test)?;
            let score_seconds = started.elapsed().as_secs_f64();
            let set = ScoredSet::new(&scores, &split.test_labels)?;
            let (auc, note) = match roc_auc(&set) {
                Ok(a) => (Some(a), None),
                Err(e) => (None, Some(e.to_string())),
            };
            Ok((
                SplitResult {
                    normal_class: split.normal_class.clone(),
                    n_train: split.train.len(),
                    n_test: split.test.len(),
                    n_anomalous,
                    auc,
                    note,
                },
                SplitTiming { normal_class: split.normal_class.clone(), fit_seconds, score_seconds },
                (scores, split.test_labels.clone()),
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut splits = Vec::new();
    let mut timings = Vec::new();
    let mut test_scores = Vec::new();
    for (r, t, s) in results {
        splits.push(r);
        timings.push(t);
        test_scores.push(s);
    }
    let mean_auc = mean_defined(splits.iter().map(|s| s.auc));
    Ok(OneVsRestReport { splits, skipped: ovr.skipped, mean_auc, timings, test_scores })
}

// ---------------------------------------------------------------------------
// Synthetic point-level suite

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Base generator settings; scenario, ratio and seed are overridden per run.
    pub synth: SynthConfig,
    pub scenarios: Vec<Scenario>,
    pub ratios: Vec<f64>,
    pub n_trials: usize,
    pub seed: u64,
    /// Clean series used to fit each detector.
    pub n_train_series: usize,
    /// Collective scoring pipeline; the point regressor reuses its window and
    /// Radon settings.
    pub pipeline: PipelineConfig,
    pub context_len: usize,
    pub ridge_lambda: Option<f64>,
    /// Count the regressor's unscored prefix in the AUC.
    pub include_prefix: bool,
    /// Force the collective scorer (`true`) or the regressor (`false`);
    /// `None` picks by scenario.
    pub collective: Option<bool>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            synth: SynthConfig::default(),
            scenarios: Scenario::ALL.to_vec(),
            ratios: vec![0.05, 0.10, 0.15, 0.20],
            n_trials: 1,
            seed: 0,
            n_train_series: 1,
            pipeline: PipelineConfig {
                window: WindowConfig { resolutions: Resolutions::Fixed(1), ..WindowConfig::default() },
                ..PipelineConfig::default()
            },
            context_len: DEFAULT_CONTEXT_LEN,
            ridge_lambda: None,
            include_prefix: false,
            collective: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioResult {
    pub ratio: f64,
    /// Mean AUC over trials with a defined AUC.
    pub auc: Option<f64>,
    pub skipped_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub scenario: Scenario,
    pub detector: String,
    pub ratios: Vec<RatioResult>,
    /// Mean over ratios.
    pub mean_auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub evaluation: String,
    pub seed: u64,
    pub n_trials: usize,
    pub scenarios: Vec<ScenarioResult>,
    pub mean_auc: Option<f64>,
}

impl SuiteReport {
    pub fn scenario(&self, scenario: Scenario) -> Option<&ScenarioResult> {
        self.scenarios.iter().find(|s| s.scenario == scenario)
    }

    pub fn rounded(&self) -> Self {
        let mut out = self.clone();
        for s in &mut out.scenarios {
            s.mean_auc = s.mean_auc.map(round4);
            for r in &mut s.ratios {
                r.auc = r.auc.map(round4);
            }
        }
        out.mean_auc = out.mean_auc.map(round4);
        out
    }
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Point scores of `test` from a detector fitted on clean `train` series;
/// the collective scorer for group scenarios and the regressor otherwise.
/// Returns the scores and the first position that counts for evaluation.
pub fn score_point_task(
    train: &[TimeSeries],
    test: &TimeSeries,
    collective: bool,
    cfg: &SuiteConfig,
) -> Result<(Vec<f64>, usize)> {
    if collective {
        let det = FittedDetector::fit_windows(train, cfg.context_len, &cfg.pipeline)?;
        Ok((det.score_points(test, cfg.context_len)?, 0))
    } else {
        let reg =
            PointRegressor::fit(train, &cfg.pipeline.window, &cfg.pipeline.radon, cfg.context_len, cfg.ridge_lambda)?;
        let scores = reg.score_points(test)?;
        let from = if cfg.include_prefix { 0 } else { scores.scored_from };
        Ok((scores.scores, from))
    }
}

/// Point-level AUC, or `None` when the evaluated range has a single class.
pub fn point_auc(scores: &[f64], labels: &[u8], from: usize) -> Result<Option<f64>> {
    let set = ScoredSet::new(&scores[from..], &labels[from..])?;
    match roc_auc(&set) {
        Ok(a) => Ok(Some(a)),
        Err(Error::InvalidInput(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn run_trial(cfg: &SuiteConfig, scenario: Scenario, ratio: f64, seed: u64) -> Result<Option<f64>> {
    let base = SynthConfig { scenario, ratio, ..cfg.synth };
    let test: PointLabeledSeries = generate_one(&SynthConfig { seed, ..base })?;
    let train = (0..cfg.n_train_series.max(1))
        .map(|i| {
            generate_one(&SynthConfig { ratio: 0.0, seed: mix(seed ^ (0xA5A5_0000 + i as u64)), ..base })
                .map(|s| s.series().clone())
        })
        .collect::<Result<Vec<_>>>()?;
    let collective = cfg.collective.unwrap_or(scenario.is_collective());
    let (scores, from) = score_point_task(&train, test.series(), collective, cfg)?;
    point_auc(&scores, test.point_labels(), from)
}

/// Runs every scenario × ratio × trial and averages point-level AUCs over
/// trials, then over ratios.
pub fn run_synthetic_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.pipeline.validate()?;
    let jobs: Vec<(usize, usize, usize)> = (0..cfg.scenarios.len())
        .flat_map(|s| (0..cfg.ratios.len()).flat_map(move |r| (0..cfg.n_trials).map(move |t| (s, r, t))))
        .collect();
    let aucs = jobs
        .par_iter()
        .map(|&(s, r, t)| {
            let seed = mix(cfg.seed ^ mix(((s as u64) << 40) | ((r as u64) << 20) | t as u64));
            run_trial(cfg, cfg.scenarios[s], cfg.ratios[r], seed)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut scenarios = Vec::new();
    for (s, &scenario) in cfg.scenarios.iter().enumerate() {
        let mut ratios = Vec::new();
        for (r, &ratio) in cfg.ratios.iter().enumerate() {
            let trial_aucs: Vec<Option<f64>> =
                jobs.iter().zip(&aucs).filter(|((js, jr, _), _)| *js == s && *jr == r).map(|(_, a)| *a).collect();
            ratios.push(RatioResult {
                ratio,
                auc: mean_defined(trial_aucs.iter().copied()),
                skipped_trials: trial_aucs.iter().filter(|a| a.is_none()).count(),
            });
        }
        scenarios.push(ScenarioResult {
            scenario,
            detector: if cfg.collective.unwrap_or(scenario.is_collective()) { "collective" } else { "regressor" }
                .into(),
            mean_auc: mean_defined(ratios.iter().map(|r| r.auc)),
            ratios,
        });
    }
    Ok(SuiteReport {
        evaluation: "point_level".into(),
        seed: cfg.seed,
        n_trials: cfg.n_trials,
        mean_auc: mean_defined(scenarios.iter().map(|s| s.mean_auc)),
        scenarios,
    })
}

// ---------------------------------------------------------------------------
// Ablations

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationAxis {
    Projections,
    Bins,
    Scheme,
    Distance,
}

impl std::str::FromStr for AblationAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "projections" => Ok(Self::Projections),
            "bins" => Ok(Self::Bins),
            "scheme" => Ok(Self::Scheme),
            "distance" => Ok(Self::Distance),
            other => Err(Error::config(format!("unknown ablation axis `{other}`"))),
        }
    }
}

/// Applies one ablation value to a pipeline configuration.
pub fn apply_axis(cfg: &mut PipelineConfig, axis: AblationAxis, value: &str) -> Result<()> {
    let bad = |what: &str| Error::config(format!("invalid {what} value `{value}`"));
    match axis {
        AblationAxis::Projections => cfg.radon.n_projections = value.parse().map_err(|_| bad("projections"))?,
        AblationAxis::Bins => cfg.radon.n_bins = value.parse().map_err(|_| bad("bins"))?,
        AblationAxis::Scheme => cfg.radon.scheme = value.parse::<DirectionScheme>()?,
        AblationAxis::Distance => {
            let kind: DistanceKind = value.parse()?;
            cfg.detector.distance = kind;
            if kind.needs_raw_features() {
                cfg.detector.space = Space::Raw;
            }
        }
    }
    cfg.validate()
}

pub enum AblationTarget<'a> {
    Synthetic(&'a SuiteConfig),
    Dataset(&'a LabeledDataset, &'a PipelineConfig),
}

/// One pipeline run per value; returns `(value, mean AUC)` rows.
pub fn run_ablation(
    target: &AblationTarget,
    axis: AblationAxis,
    values: &[String],
) -> Result<Vec<(String, Option<f64>)>> {
    if values.is_empty() {
        return Err(Error::config("ablation needs at least one value"));
    }
    values
        .iter()
        .map(|v| {
            let mean = match target {
                AblationTarget::Synthetic(suite) => {
                    let mut suite = (*suite).clone();
                    apply_axis(&mut suite.pipeline, axis, v)?;
                    run_synthetic_suite(&suite)?.mean_auc
                }
                AblationTarget::Dataset(ds, cfg) => {
                    let mut cfg = **cfg;
                    apply_axis(&mut cfg, axis, v)?;
                    run_one_vs_rest(ds, &cfg)?.mean_auc
                }
            };
            Ok((v.clone(), mean))
        })
        .collect()
}
