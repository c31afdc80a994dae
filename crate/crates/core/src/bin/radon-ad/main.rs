mod input;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use radon_ad::config::{ModelKind, PointMethod};
use radon_ad::data::write_csv_series;
use radon_ad::eval::{
    point_auc, roc_curve, run_ablation, run_one_vs_rest, run_synthetic_suite, score_point_task, AblationAxis,
    AblationTarget, ScoredSet,
};
use radon_ad::synth::{generate, generate_one, PointMask};
use radon_ad::{Error, FittedDetector, Model, PointRegressor, Result, RunConfig, TimeSeries};

const AFTER_HELP: &str = "\
Any configuration key can be set with --KEY=VALUE before or after the
subcommand (e.g. --n_projections=50 --distance=swd1 --space=raw).
Flags override the --config file.";

#[derive(Parser)]
#[command(name = "radon-ad", version, about = "Time-series anomaly detection with cumulative Radon features", after_help = AFTER_HELP)]
struct Cli {
    /// JSON configuration file with a flat key space.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker thread cap; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Protocol {
    OneVsRest,
    Point,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model on normal series and write it as JSON.
    Fit {
        /// CSV files, `.ts` files or directories of them.
        #[arg(long, required = true, num_args = 1..)]
        data: Vec<PathBuf>,
        /// Keep only `.ts` series with this class label.
        #[arg(long)]
        class: Option<String>,
        /// Model file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Score series with a fitted model; JSON lines on standard output.
    Score {
        /// Model file written by `fit`.
        #[arg(long)]
        model: PathBuf,
        /// CSV files, `.ts` files or directories of them.
        #[arg(long, required = true, num_args = 1..)]
        data: Vec<PathBuf>,
        /// One score per time step instead of one per series.
        #[arg(long)]
        points: bool,
    },
    /// Evaluate ROC-AUC.
    ///
    /// one-vs-rest: --data TRAIN.ts [--test TEST.ts]. point: --data TEST.csv
    /// with its mask and --train clean series. --data synthetic always runs
    /// the generated scenario suite.
    Eval {
        /// `.ts` training file, test series for `point`, or `synthetic`.
        #[arg(long)]
        data: String,
        /// `.ts` test file (default: the `_TEST` sibling of --data).
        #[arg(long)]
        test: Option<PathBuf>,
        /// Clean training series for the point protocol.
        #[arg(long, num_args = 1..)]
        train: Vec<PathBuf>,
        /// Point mask JSON (default: next to --data).
        #[arg(long)]
        mask: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "one-vs-rest")]
        protocol: Protocol,
        /// Report file; timings go to a `.timing.json` sidecar.
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV of ROC points per split.
        #[arg(long)]
        roc_csv: Option<PathBuf>,
    },
    /// Write synthetic train/test series and point masks.
    Synth {
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Rerun the evaluation for each value of one parameter.
    Ablate {
        /// `.ts` training file or `synthetic`.
        #[arg(long)]
        data: String,
        /// `.ts` test file (default: the `_TEST` sibling of --data).
        #[arg(long)]
        test: Option<PathBuf>,
        /// projections, bins, scheme or distance.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<String>,
        /// CSV output (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Splits `--key=value` config overrides from the remaining arguments.
fn split_overrides(args: Vec<String>) -> (Vec<String>, Vec<(String, String)>) {
    let keys = RunConfig::keys();
    let mut rest = Vec::new();
    let mut overrides = Vec::new();
    for arg in args {
        if let Some((k, v)) = arg.strip_prefix("--").and_then(|a| a.split_once('=')) {
            let key = k.replace('-', "_");
            if keys.contains(&key) {
                overrides.push((key, v.to_string()));
                continue;
            }
        }
        rest.push(arg);
    }
    (rest, overrides)
}

fn main() -> ExitCode {
    let (args, overrides) = split_overrides(std::env::args().collect());
    let cli = Cli::parse_from(args);
    match run(cli, &overrides) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) => 2,
                Error::Io { .. } => 3,
                Error::Parse { .. } | Error::Json(_) | Error::SchemaVersion { .. } => 4,
                _ => 1,
            })
        }
    }
}

fn run(cli: Cli, overrides: &[(String, String)]) -> Result<()> {
    let text = cli.config.as_deref().map(input::read).transpose()?;
    let cfg = RunConfig::from_json_with_overrides(text.as_deref(), overrides)?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Fit { data, class, out } => cmd_fit(&cfg, &data, class.as_deref(), &out),
        Command::Score { model, data, points } => cmd_score(&model, &data, points),
        Command::Eval { data, test, train, mask, protocol, out, roc_csv } => match protocol {
            Protocol::OneVsRest if data != "synthetic" => {
                cmd_eval_ovr(&cfg, &data, test.as_deref(), out.as_deref(), roc_csv.as_deref())
            }
            _ => cmd_eval_point(&cfg, &data, &train, mask.as_deref(), out.as_deref(), roc_csv.as_deref()),
        },
        Command::Synth { out } => cmd_synth(&cfg, &out),
        Command::Ablate { data, test, axis, values, out } => {
            cmd_ablate(&cfg, &data, test.as_deref(), &axis, &values, out.as_deref())
        }
    }
}

fn cmd_fit(cfg: &RunConfig, data: &[PathBuf], class: Option<&str>, out: &Path) -> Result<()> {
    let series: Vec<TimeSeries> = input::load_series(data)?
        .into_iter()
        .filter(|(_, label)| class.is_none() || label.as_deref() == class)
        .map(|(s, _)| s)
        .collect();
    if series.is_empty() {
        return Err(Error::InvalidInput("no training series selected".into()));
    }
    let started = Instant::now();
    let model = match cfg.model_kind {
        ModelKind::Series => Model::Detector(FittedDetector::fit(&series, &cfg.pipeline())?),
        ModelKind::Collective => {
            Model::Detector(FittedDetector::fit_windows(&series, cfg.context_len, &cfg.pipeline())?)
        }
        ModelKind::Regressor => {
            let p = cfg.pipeline();
            Model::Regressor(PointRegressor::fit(&series, &p.window, &p.radon, cfg.context_len, cfg.ridge_lambda)?)
        }
    };
    let fit_seconds = started.elapsed().as_secs_f64();
    model.save(out)?;
    let (d, n) = match &model {
        Model::Detector(det) => (det.feature_len(), det.bank.len()),
        Model::Regressor(reg) => (reg.pipeline.feature_len(), series.len()),
    };
    eprintln!(
        "fitted {:?} model on {n} series: D = {d} ({} projections x {} bins), fit {fit_seconds:.3} s",
        cfg.model_kind, cfg.n_projections, cfg.n_bins
    );
    Ok(())
}

fn cmd_score(model_path: &Path, data: &[PathBuf], points: bool) -> Result<()> {
    let model = Model::load(model_path)?;
    let series: Vec<TimeSeries> = input::load_series(data)?.into_iter().map(|(s, _)| s).collect();
    let started = Instant::now();
    let mut lines = Vec::with_capacity(series.len());
    for s in &series {
        let line = match (&model, points) {
            (Model::Detector(det), false) => json!({"series_id": s.id(), "score": det.score_series(s)?}),
            (Model::Detector(det), true) => {
                let len = det.window_len.ok_or_else(|| {
                    Error::Config("--points needs a model fitted with model_kind=collective or regressor".into())
                })?;
                json!({"series_id": s.id(), "point_scores": det.score_points(s, len)?})
            }
            (Model::Regressor(reg), true) => {
                let p = reg.score_points(s)?;
                json!({"series_id": s.id(), "point_scores": p.scores, "scored_from": p.scored_from})
            }
            (Model::Regressor(_), false) => {
                return Err(Error::Config("a regressor model only produces point scores; pass --points".into()))
            }
        };
        lines.push(line.to_string());
    }
    let mut stdout = std::io::stdout().lock();
    for l in lines {
        writeln!(stdout, "{l}").map_err(|e| Error::Io { path: "<stdout>".into(), source: e })?;
    }
    eprintln!("scored {} series in {:.3} s", series.len(), started.elapsed().as_secs_f64());
    Ok(())
}

fn write_report(report: &serde_json::Value, timing: &serde_json::Value, out: Option<&Path>) -> Result<()> {
    let body = serde_json::to_string_pretty(report)? + "\n";
    match out {
        Some(path) => {
            input::write(path, &body)?;
            let sidecar = PathBuf::from(format!("{}.timing.json", path.with_extension("").display()));
            input::write(&sidecar, &(serde_json::to_string_pretty(timing)? + "\n"))?;
        }
        None => print!("{body}"),
    }
    eprintln!("timing: {timing}");
    Ok(())
}

fn report_header(cfg: &RunConfig, protocol: &str, dataset: &str) -> Result<serde_json::Value> {
    Ok(json!({
        "protocol": protocol,
        "dataset": dataset,
        "seed": cfg.seed,
        "config_hash": cfg.hash()?,
        "config": cfg,
    }))
}

fn cmd_eval_ovr(
    cfg: &RunConfig,
    data: &str,
    test: Option<&Path>,
    out: Option<&Path>,
    roc_csv: Option<&Path>,
) -> Result<()> {
    let started = Instant::now();
    let mut ds = input::load_dataset(Path::new(data), test)?;
    if cfg.min_length.is_some() || cfg.max_length.is_some() {
        ds = ds.filter_lengths(cfg.min_length.unwrap_or(0), cfg.max_length.unwrap_or(usize::MAX));
    }
    let report = run_one_vs_rest(&ds, &cfg.pipeline())?;
    if let Some(path) = roc_csv {
        let mut csv = String::from("split,fpr,tpr\n");
        for (split, (scores, labels)) in report.splits.iter().zip(&report.test_scores) {
            if let Ok(curve) = roc_curve(&ScoredSet::new(scores, labels)?) {
                for (f, t) in curve {
                    csv.push_str(&format!("{},{f},{t}\n", split.normal_class));
                }
            }
        }
        input::write(path, &csv)?;
    }
    for s in &report.splits {
        match s.auc {
            Some(a) => {
                eprintln!("class {}: AUC {:.4} ({} test, {} anomalous)", s.normal_class, a, s.n_test, s.n_anomalous)
            }
            None => eprintln!("class {}: no AUC ({})", s.normal_class, s.note.as_deref().unwrap_or("")),
        }
    }
    for s in &report.skipped {
        eprintln!("class {} skipped: {}", s.class, s.reason);
    }
    let mut value = report_header(cfg, "one_vs_rest", ds.problem_name.as_deref().unwrap_or(data))?;
    value["result"] = serde_json::to_value(report.rounded())?;
    let timing = json!({
        "splits": report.timings,
        "total_seconds": started.elapsed().as_secs_f64(),
    });
    write_report(&value, &timing, out)
}

fn cmd_eval_point(
    cfg: &RunConfig,
    data: &str,
    train: &[PathBuf],
    mask: Option<&Path>,
    out: Option<&Path>,
    roc_csv: Option<&Path>,
) -> Result<()> {
    let started = Instant::now();
    if data == "synthetic" {
        let report = run_synthetic_suite(&cfg.suite())?;
        for s in &report.scenarios {
            eprintln!("{} ({}): mean AUC {:?}", s.scenario, s.detector, s.mean_auc.map(radon_ad::eval::round4));
        }
        let mut value = report_header(cfg, "point", "synthetic")?;
        value["result"] = serde_json::to_value(report.rounded())?;
        let timing = json!({"total_seconds": started.elapsed().as_secs_f64()});
        return write_report(&value, &timing, out);
    }

    let path = Path::new(data);
    let test = input::read_csv(path)?;
    let mask_file = match mask {
        Some(m) => m.to_path_buf(),
        None => input::mask_path(path),
    };
    let mask: PointMask = input::load_mask(&mask_file)?;
    if mask.labels.len() != test.len() {
        return Err(Error::Dimension { expected: test.len(), found: mask.labels.len() });
    }
    if train.is_empty() {
        return Err(Error::Config("point evaluation of a file needs --train".into()));
    }
    let train: Vec<TimeSeries> = input::load_series(train)?.into_iter().map(|(s, _)| s).collect();
    let collective = match cfg.point_method {
        PointMethod::Collective => true,
        PointMethod::Regressor => false,
        PointMethod::Auto => mask.scenario.is_some_and(|s| s.is_collective()),
    };
    let fit_started = Instant::now();
    let (scores, from) = score_point_task(&train, &test, collective, &cfg.suite())?;
    let elapsed = fit_started.elapsed().as_secs_f64();
    let auc = point_auc(&scores, &mask.labels, from)?;
    if let Some(p) = roc_csv {
        let mut csv = String::from("split,fpr,tpr\n");
        if let Ok(curve) = roc_curve(&ScoredSet::new(&scores[from..], &mask.labels[from..])?) {
            for (f, t) in curve {
                csv.push_str(&format!("{},{f},{t}\n", test.id()));
            }
        }
        input::write(p, &csv)?;
    }
    eprintln!("{}: point AUC {:?}", test.id(), auc.map(radon_ad::eval::round4));
    let mut value = report_header(cfg, "point", test.id())?;
    value["result"] = json!({
        "series_id": test.id(),
        "detector": if collective { "collective" } else { "regressor" },
        "n_points": test.len(),
        "n_evaluated": test.len() - from,
        "n_anomalous": mask.labels.iter().filter(|&&l| l != 0).count(),
        "auc": auc.map(radon_ad::eval::round4),
    });
    let timing = json!({"fit_and_score_seconds": elapsed, "total_seconds": started.elapsed().as_secs_f64()});
    write_report(&value, &timing, out)
}

fn cmd_synth(cfg: &RunConfig, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::Io { path: out.to_path_buf(), source: e })?;
    let base = cfg.synth();
    let mut files = 0;
    for &scenario in &cfg.scenarios {
        for &ratio in &cfg.ratios {
            let stem = format!("{scenario}_{:02}", (ratio * 100.0).round() as u32);
            let sc = radon_ad::SynthConfig { scenario, ratio, ..base };
            let clean = radon_ad::SynthConfig { ratio: 0.0, seed: base.seed.wrapping_add(1 << 32), ..sc };
            for (i, s) in generate(&clean, cfg.n_train_series)?.iter().enumerate() {
                input::write(&out.join(format!("{stem}_train_{i}.csv")), &write_csv_series(s.series()))?;
                files += 1;
            }
            let test = generate_one(&sc)?;
            let test_path = out.join(format!("{stem}_test.csv"));
            input::write(&test_path, &write_csv_series(test.series()))?;
            let mask = PointMask::for_series(&test, &sc);
            input::write(&input::mask_path(&test_path), &(serde_json::to_string(&mask)? + "\n"))?;
            files += 2;
        }
    }
    eprintln!("wrote {files} files to {}", out.display());
    Ok(())
}

fn cmd_ablate(
    cfg: &RunConfig,
    data: &str,
    test: Option<&Path>,
    axis: &str,
    values: &[String],
    out: Option<&Path>,
) -> Result<()> {
    let axis: AblationAxis = axis.parse()?;
    let values: Vec<String> = values.iter().map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
    if values.is_empty() {
        return Err(Error::Config("--values needs at least one value".into()));
    }
    let started = Instant::now();
    let rows = if data == "synthetic" {
        let suite = cfg.suite();
        run_ablation(&AblationTarget::Synthetic(&suite), axis, &values)?
    } else {
        let ds = input::load_dataset(Path::new(data), test)?;
        let pipeline = cfg.pipeline();
        run_ablation(&AblationTarget::Dataset(&ds, &pipeline), axis, &values)?
    };
    let mut csv = String::from("value,mean_auc\n");
    for (v, auc) in &rows {
        let cell = auc.map(|a| format!("{:.4}", a)).unwrap_or_default();
        csv.push_str(&format!("{v},{cell}\n"));
    }
    match out {
        Some(p) => input::write(p, &csv)?,
        None => print!("{csv}"),
    }
    eprintln!("ablation over {} values in {:.3} s", rows.len(), started.elapsed().as_secs_f64());
    Ok(())
}
