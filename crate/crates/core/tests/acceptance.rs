//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if a required criterion fails. Criterion 12 needs the
//! published `.ts` archives (set `RADON_AD_UEA_DIR`) and is report-only.

#![allow(clippy::needless_range_loop)]

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use radon_ad::distance::{dist_l2, dist_swd1, dist_swd2};
use radon_ad::eval::{
    roc_auc, run_ablation, run_one_vs_rest, run_synthetic_suite, AblationAxis, AblationTarget, ScoredSet, SuiteConfig,
};
use radon_ad::features::PointFeatureMatrix;
use radon_ad::linalg::{Matrix, SymmetricEigen};
use radon_ad::radon::{cumulative_radon, fit_grid, sample_directions, DirectionSet};
use radon_ad::sphering::fit_sphering;
use radon_ad::{
    DirectionScheme, EpsilonPolicy, FittedDetector, LabeledDataset, PipelineConfig, RadonConfig, Scenario, Scorer,
    Space, Split, TimeSeries, WindowConfig,
};

type Outcome = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_series(r: &mut ChaCha8Rng, id: usize) -> TimeSeries {
    let len = r.random_range(9..120);
    let channels = r.random_range(1..4);
    let kind = r.random_range(0..4);
    let values: Vec<f64> = (0..len * channels)
        .map(|i| match kind {
            0 => r.sample::<f64, _>(StandardNormal),
            1 => 3.0 * (i as f64 * 0.3).sin() + 0.1 * r.sample::<f64, _>(StandardNormal),
            2 => r.random_range(-1.0..1.0f64).powi(7) * 1e3,
            _ => (i / 7) as f64,
        })
        .collect();
    TimeSeries::new(id.to_string(), channels, values).unwrap()
}

// 1. Every CR row is a CDF.
fn cdf_validity() -> Outcome {
    let started = Instant::now();
    let mut r = rng(1);
    let mut worst = 0.0f64;
    let mut checked = 0;
    for group in 0..50 {
        let channels = 1 + group % 3;
        let series: Vec<TimeSeries> = (0..20)
            .map(|i| loop {
                let s = random_series(&mut r, i);
                if s.channels() == channels {
                    break s;
                }
            })
            .collect();
        let window = WindowConfig::default();
        // fit on half so the other half can fall outside the grid
        let pipeline = radon_ad::detector::FeaturePipeline::fit(&series[..10], &window, &RadonConfig::default())
            .map_err(|e| e.to_string())?;
        for s in &series {
            let cr = pipeline.transform(s).map_err(|e| e.to_string())?;
            for p in 0..cr.projections() {
                let row = cr.row(p);
                if row.windows(2).any(|w| w[1] < w[0]) || row.iter().any(|v| !(0.0..=1.0).contains(v)) {
                    return Err(format!("non-monotone row in series {}", s.id()));
                }
                worst = worst.max((row[row.len() - 1] - 1.0).abs());
            }
            checked += 1;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    check(
        worst <= 1e-9 && secs < 10.0,
        format!("{checked} series, max |J_last − 1| = {worst:.1e}, {secs:.2} s (limit 10 s)"),
    )
}

// 2. Shuffling point-feature rows leaves CR features bit-identical.
fn permutation_invariance() -> Outcome {
    let mut r = rng(2);
    for case in 0..100 {
        let rows = r.random_range(1..80);
        let dim = r.random_range(1..12);
        let data: Vec<f64> = (0..rows * dim).map(|_| r.sample::<f64, _>(StandardNormal) * 10.0).collect();
        let f = PointFeatureMatrix::from_rows(rows, dim, data.clone()).unwrap();
        let dirs = sample_directions(dim, r.random_range(1..30), DirectionScheme::Gaussian, case, None).unwrap();
        let proj: Vec<Vec<f64>> = (0..dirs.len())
            .map(|p| f.iter_rows().map(|x| x.iter().zip(dirs.direction(p)).map(|(a, b)| a * b).sum()).collect())
            .collect();
        let grid = fit_grid(&proj, r.random_range(2..40), 0.05).unwrap();
        let base = cumulative_radon(&f, &dirs, &grid).unwrap();
        let mut order: Vec<usize> = (0..rows).collect();
        order.shuffle(&mut r);
        let shuffled: Vec<f64> = order.iter().flat_map(|&t| data[t * dim..(t + 1) * dim].to_vec()).collect();
        let g = PointFeatureMatrix::from_rows(rows, dim, shuffled).unwrap();
        let other = cumulative_radon(&g, &dirs, &grid).unwrap();
        let same = base.as_slice().iter().zip(other.as_slice()).all(|(a, b)| a.to_bits() == b.to_bits());
        if !same {
            return Err(format!("case {case}: features changed under a row shuffle"));
        }
    }
    Ok("100 shuffles, all bit-identical".into())
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

fn sample_covariance(data: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = data.len() as f64;
    let d = data[0].len();
    let mean: Vec<f64> = (0..d).map(|j| data.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let mut cov = vec![vec![0.0; d]; d];
    for r in data {
        for i in 0..d {
            for j in 0..d {
                cov[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]) / (n - 1.0);
            }
        }
    }
    (mean, cov)
}

// 3. Sphered covariance ≈ I and sphered L2 = Mahalanobis distance.
fn whitening_identity() -> Outcome {
    let mut r = rng(3);
    let d = 40;
    // identity plus a random part with spectral radius about 1/2: every
    // coordinate is correlated and the covariance stays well conditioned
    let scale = 0.5 / (d as f64).sqrt();
    let mixing: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| f64::from(u8::from(i == j)) + scale * r.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let data: Vec<Vec<f64>> = (0..200)
        .map(|_| {
            let z: Vec<f64> = (0..d).map(|_| r.sample(StandardNormal)).collect();
            (0..d).map(|i| (0..d).map(|j| mixing[i][j] * z[j]).sum::<f64>() + 5.0).collect()
        })
        .collect();
    let model = fit_sphering(&data, EpsilonPolicy::default()).map_err(|e| e.to_string())?;
    let sphered: Vec<Vec<f64>> = data.iter().map(|x| model.sphere(x).unwrap()).collect();
    let (_, cov) = sample_covariance(&sphered);
    let mut cov_err = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            cov_err = cov_err.max((cov[i][j] - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }

    let (_, mut raw_cov) = sample_covariance(&data);
    for (i, row) in raw_cov.iter_mut().enumerate() {
        row[i] += model.epsilon();
    }
    let mut maha_err = 0.0f64;
    for _ in 0..50 {
        let a = &data[r.random_range(0..200)];
        let b: Vec<f64> = (0..d).map(|_| r.sample::<f64, _>(StandardNormal) * 2.0 + 5.0).collect();
        let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let z = solve(raw_cov.clone(), diff.clone());
        let oracle = diff.iter().zip(&z).map(|(x, y)| x * y).sum::<f64>().sqrt();
        let ours = dist_l2(&model.sphere(a).unwrap(), &model.sphere(&b).unwrap()).unwrap();
        maha_err = maha_err.max((ours - oracle).abs());
    }
    check(
        cov_err <= 1e-3 && maha_err <= 1e-9,
        format!("D = {d}, max |cov − I| = {cov_err:.1e} (≤ 1e-3), max Mahalanobis gap = {maha_err:.1e} (≤ 1e-9)"),
    )
}

/// Exact `W_p^p` between two equally weighted 1D samples.
fn wasserstein_pow(a: &[f64], b: &[f64], p: i32) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let mut levels: Vec<f64> = (0..=a.len()).map(|i| i as f64 / a.len() as f64).collect();
    levels.extend((0..=b.len()).map(|i| i as f64 / b.len() as f64));
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    levels
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let qa = a[((mid * a.len() as f64) as usize).min(a.len() - 1)];
            let qb = b[((mid * b.len() as f64) as usize).min(b.len() - 1)];
            (w[1] - w[0]) * (qa - qb).abs().powi(p)
        })
        .sum()
}

// 4. SWD on one direction matches the exact sample Wasserstein distances.
fn swd_oracles() -> Outcome {
    let mut r = rng(4);
    let dirs = DirectionSet::from_matrix(DirectionScheme::Marginals, 0, Matrix::identity(1)).unwrap();
    let mut worst = 0.0f64;
    for case in 0..200 {
        let n = r.random_range(1..=16);
        let m = r.random_range(1..=16);
        let scale = r.random_range(0.1..10.0);
        let shift = r.random_range(-2.0..2.0) * scale;
        let a: Vec<f64> = (0..n).map(|_| r.random_range(0.0..1.0) * scale).collect();
        let b: Vec<f64> = (0..m).map(|_| r.random_range(0.0..1.0) * scale + shift).collect();
        let grid = fit_grid(&[[a.clone(), b.clone()].concat()], r.random_range(8..64), 0.05).unwrap();
        let fa = cumulative_radon(&PointFeatureMatrix::from_rows(n, 1, a.clone()).unwrap(), &dirs, &grid).unwrap();
        let fb = cumulative_radon(&PointFeatureMatrix::from_rows(m, 1, b.clone()).unwrap(), &dirs, &grid).unwrap();
        let width = grid.bin_width(0);
        let w1 = wasserstein_pow(&a, &b, 1);
        let w2 = wasserstein_pow(&a, &b, 2).sqrt();
        let e1 = (dist_swd1(&fa, &fb, &grid).unwrap() - w1).abs() / width;
        let e2 = (dist_swd2(&fa, &fb, &grid).unwrap() - w2).abs() / width;
        if e1 > 2.0 || e2 > 2.0 {
            return Err(format!("case {case}: errors {e1:.2} / {e2:.2} bin widths"));
        }
        worst = worst.max(e1).max(e2);
    }
    Ok(format!("200 cases, worst error {worst:.2} bin widths (≤ 2)"))
}

// 5. Rank AUC equals pair counting.
fn auc_oracle() -> Outcome {
    let mut r = rng(5);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let n = r.random_range(2..120);
        let levels = if case % 2 == 0 { 3 } else { 1000 };
        let scores: Vec<f64> = (0..n).map(|_| r.random_range(0..levels) as f64 * 0.25).collect();
        let mut labels: Vec<u8> = (0..n).map(|_| u8::from(r.random_bool(0.4))).collect();
        labels[0] = 0;
        labels[1] = 1;
        let mut wins = 0.0;
        let (mut pos, mut neg) = (0.0, 0.0);
        for i in 0..n {
            if labels[i] == 1 {
                pos += 1.0;
            } else {
                neg += 1.0;
            }
            for j in 0..n {
                if labels[i] == 1 && labels[j] == 0 {
                    wins += if scores[i] > scores[j] {
                        1.0
                    } else if scores[i] == scores[j] {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        let oracle = wins / (pos * neg);
        let ours = roc_auc(&ScoredSet::new(&scores, &labels).unwrap()).unwrap();
        worst = worst.max((ours - oracle).abs());
    }
    check(worst <= 1e-12, format!("100 sets, max gap {worst:.1e} (≤ 1e-12)"))
}

// 6. kNN scores grow with k; a bank member scores 0 at k = 1.
fn knn_monotonicity() -> Outcome {
    let mut r = rng(6);
    for case in 0..100 {
        let n = r.random_range(2..12);
        let len = r.random_range(10..40);
        let train: Vec<TimeSeries> = (0..n)
            .map(|i| {
                let amp = r.random_range(0.5..2.0);
                let v =
                    (0..len).map(|t| amp * (t as f64 * 0.4).sin() + 0.2 * r.sample::<f64, _>(StandardNormal)).collect();
                TimeSeries::univariate(i.to_string(), v).unwrap()
            })
            .collect();
        let mut cfg = PipelineConfig {
            radon: RadonConfig { n_projections: 10, n_bins: 6, seed: case, ..Default::default() },
            ..Default::default()
        };
        cfg.detector.scorer = Scorer::Knn;
        cfg.detector.k = 1;
        cfg.detector.space = if case % 2 == 0 { Space::Raw } else { Space::Sphered };
        let mut det = FittedDetector::fit(&train, &cfg).map_err(|e| e.to_string())?;
        let member = &train[r.random_range(0..n)];
        if det.score_series(member).unwrap() != 0.0 {
            return Err(format!("case {case}: bank member scored non-zero at k = 1"));
        }
        let query =
            TimeSeries::univariate("q", (0..len).map(|_| r.sample::<f64, _>(StandardNormal)).collect()).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in 1..=n {
            det.config.k = k;
            let s = det.score_series(&query).unwrap();
            if s < prev {
                return Err(format!("case {case}: score fell from {prev} to {s} at k = {k}"));
            }
            prev = s;
        }
    }
    Ok("100 banks, scores non-decreasing in k, members score 0 at k = 1".into())
}

/// Characteristic polynomial coefficients (highest degree first) by
/// Faddeev–LeVerrier.
fn char_poly(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut coeffs = vec![1.0];
    let mut m = vec![vec![0.0; n]; n];
    for k in 1..=n {
        // M_k = A M_{k−1} + c_{n−k+1} I
        let mut am = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                am[i][j] = (0..n).map(|l| a[i][l] * m[l][j]).sum::<f64>();
            }
        }
        let c_prev = coeffs[k - 1];
        for (i, row) in am.iter_mut().enumerate() {
            row[i] += c_prev;
        }
        m = am;
        let mut trace = 0.0;
        for i in 0..n {
            trace += (0..n).map(|l| a[i][l] * m[l][i]).sum::<f64>();
        }
        coeffs.push(-trace / k as f64);
    }
    coeffs
}

/// Roots of a real-rooted monic polynomial: Durand–Kerner, then Newton polish.
fn real_roots(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len() - 1;
    let eval =
        |z: (f64, f64)| coeffs.iter().fold((0.0, 0.0), |(re, im), &c| (re * z.0 - im * z.1 + c, re * z.1 + im * z.0));
    let mut roots: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let ang = 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            (1.3 * ang.cos(), 1.3 * ang.sin())
        })
        .collect();
    for _ in 0..2000 {
        for i in 0..n {
            let num = eval(roots[i]);
            let mut den = (1.0, 0.0);
            for j in 0..n {
                if i != j {
                    let d = (roots[i].0 - roots[j].0, roots[i].1 - roots[j].1);
                    den = (den.0 * d.0 - den.1 * d.1, den.0 * d.1 + den.1 * d.0);
                }
            }
            let norm = den.0 * den.0 + den.1 * den.1;
            let q = ((num.0 * den.0 + num.1 * den.1) / norm, (num.1 * den.0 - num.0 * den.1) / norm);
            roots[i] = (roots[i].0 - q.0, roots[i].1 - q.1);
        }
    }
    let mut out: Vec<f64> = roots
        .iter()
        .map(|&(re, _)| {
            let mut x = re;
            for _ in 0..5 {
                let (p, dp) = coeffs.iter().fold((0.0, 0.0), |(p, dp), &c| (p * x + c, dp * x + p));
                if dp.abs() > 1e-300 {
                    let step = p / dp;
                    if step.is_finite() && step.abs() < 1e-6 {
                        x -= step;
                    }
                }
            }
            x
        })
        .collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

// 7. Eigensolver against characteristic-polynomial roots; whitening at D = 200.
fn eigensolver() -> Outcome {
    let mut r = rng(7);
    let mut worst = 0.0f64;
    for case in 0..300 {
        let n = 2 + case % 3;
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let v = r.random_range(-1.0..1.0);
                a[i][j] = v;
                a[j][i] = v;
            }
        }
        let m = Matrix::from_fn(n, n, |i, j| a[i][j]);
        let eig = SymmetricEigen::new(&m).map_err(|e| e.to_string())?;
        let roots = real_roots(&char_poly(&a));
        for (x, y) in eig.values.iter().zip(&roots) {
            worst = worst.max((x - y).abs());
        }
    }

    let d = 200;
    let mut whiten_err = 0.0f64;
    for n in [400usize, 150] {
        let data: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..d).map(|j| r.sample::<f64, _>(StandardNormal) * (1.0 + (j % 7) as f64) + (i % 3) as f64).collect()
            })
            .collect();
        let model = fit_sphering(&data, EpsilonPolicy::default()).map_err(|e| e.to_string())?;
        let w = model.whitener();
        let mut reg = model.covariance();
        for i in 0..d {
            reg.row_mut(i)[i] += model.epsilon();
        }
        let prod = w.matmul(&reg).unwrap().matmul(&w).unwrap();
        for i in 0..d {
            for j in 0..d {
                whiten_err = whiten_err.max((prod[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
    }
    let limit = 1e-6 * d as f64;
    check(
        worst <= 1e-9 && whiten_err <= limit,
        format!("300 matrices, max eigenvalue gap {worst:.1e} (≤ 1e-9); max |W(Σ+εI)W − I| = {whiten_err:.1e} (≤ {limit:.0e})"),
    )
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_radon-ad")).args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("radon-ad {args:?} failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap_or_default()
}

// 8. Same seeds give byte-identical models and reports, for any thread count.
fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = |name: &str| dir.path().join(name);
    let s = |p: PathBuf| p.to_string_lossy().into_owned();
    run_cli(&["synth", "--out", &s(d("data")), "--n_train_series=4", "--seed=3"])?;
    let train: Vec<String> = (0..4).map(|i| s(d(&format!("data/shapelet_10_train_{i}.csv")))).collect();
    let test = s(d("data/point_global_05_test.csv"));
    let global_train = s(d("data/point_global_05_train_0.csv"));

    let mut outputs = Vec::new();
    for (run, threads) in ["1", "8", "8"].iter().enumerate() {
        let model = s(d(&format!("model_{run}.json")));
        let mut fit = vec!["fit", "--threads", threads, "--out", &model, "--data"];
        fit.extend(train.iter().map(String::as_str));
        run_cli(&fit)?;
        let point_model = s(d(&format!("point_{run}.json")));
        run_cli(&[
            "fit",
            "--threads",
            threads,
            "--model_kind=regressor",
            "--data",
            &global_train,
            "--out",
            &point_model,
        ])?;
        let scores = run_cli(&["score", "--threads", threads, "--model", &point_model, "--data", &test, "--points"])?;
        let report = s(d(&format!("report_{run}.json")));
        run_cli(&[
            "eval",
            "--threads",
            threads,
            "--protocol",
            "point",
            "--data",
            "synthetic",
            "--scenarios=shapelet,point_global",
            "--ratios=0.1,0.2",
            "--out",
            &report,
        ])?;
        outputs.push([read(Path::new(&model)), read(Path::new(&point_model)), scores, read(Path::new(&report))]);
    }
    let identical = outputs.windows(2).all(|w| w[0] == w[1]) && outputs[0].iter().all(|o| !o.is_empty());
    check(identical, "models, point scores and reports byte-identical across reruns and --threads 1/8".into())
}

fn default_suite(seed: u64) -> SuiteConfig {
    let mut cfg = SuiteConfig { seed, ..SuiteConfig::default() };
    cfg.pipeline.radon.seed = seed;
    cfg
}

// 9. Synthetic suite with defaults.
fn synthetic_suite() -> Outcome {
    let started = Instant::now();
    let report = run_synthetic_suite(&SuiteConfig::default()).map_err(|e| e.to_string())?;
    let secs = started.elapsed().as_secs_f64();
    let auc = |s: Scenario| report.scenario(s).and_then(|r| r.mean_auc).unwrap_or(0.0);
    let (shapelet, trend, global) = (auc(Scenario::Shapelet), auc(Scenario::Trend), auc(Scenario::PointGlobal));
    check(
        shapelet >= 0.65 && trend >= 0.65 && global >= 0.85 && secs < 120.0,
        format!(
            "shapelet {shapelet:.4} / trend {trend:.4} (≥ 0.65), point_global {global:.4} (≥ 0.85); \
             seasonal {:.4}, point_contextual {:.4}; {secs:.1} s (limit 120 s)",
            auc(Scenario::Seasonal),
            auc(Scenario::PointContextual)
        ),
    )
}

// 10. Projection and bin count trends, averaged over 5 seeds.
fn ablation_trends() -> Outcome {
    let mut means = [[0.0; 2]; 2];
    for seed in 0..5 {
        let suite = default_suite(seed);
        let target = AblationTarget::Synthetic(&suite);
        for (a, (axis, values)) in
            [(AblationAxis::Projections, ["5", "100"]), (AblationAxis::Bins, ["2", "20"])].into_iter().enumerate()
        {
            let values: Vec<String> = values.iter().map(|v| v.to_string()).collect();
            let rows = run_ablation(&target, axis, &values).map_err(|e| e.to_string())?;
            for (i, (_, auc)) in rows.iter().enumerate() {
                means[a][i] += auc.ok_or("undefined AUC")? / 5.0;
            }
        }
    }
    let [[p5, p100], [b2, b20]] = means;
    check(
        p100 >= p5 - 0.02 && b20 >= b2,
        format!("N_P=5 {p5:.4} vs N_P=100 {p100:.4} (≥ N_P=5 − 0.02); N_B=2 {b2:.4} vs N_B=20 {b20:.4}"),
    )
}

/// Four classes of 3-channel series sharing one waveform with a large random
/// amplitude; a class is marked by a small offset on one channel.
fn correlated_channels(seed: u64) -> LabeledDataset {
    let mut r = rng(seed);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let mut ds = LabeledDataset::new();
    for class in 0..4usize {
        for i in 0..40 {
            let amp = r.random_range(0.5..2.0);
            let phase = r.random_range(0.0..std::f64::consts::TAU);
            let mut values = Vec::with_capacity(64 * 3);
            for t in 0..64 {
                let base = amp * (t as f64 * std::f64::consts::TAU / 16.0 + phase).sin();
                for c in 0..3 {
                    let offset = if class > 0 && c == class - 1 { 0.15 } else { 0.0 };
                    values.push(base + offset + noise.sample(&mut r));
                }
            }
            let split = if i < 20 { Split::Train } else { Split::Test };
            ds.push(TimeSeries::new(format!("{class}_{i}"), 3, values).unwrap(), class.to_string(), split);
        }
    }
    ds
}

// 11. Sphering beats raw features on correlated channels.
fn sphering_ablation() -> Outcome {
    let mut gaps = Vec::new();
    for seed in 0..5 {
        let ds = correlated_channels(100 + seed);
        let mut aucs = [0.0; 2];
        for (i, space) in [Space::Raw, Space::Sphered].into_iter().enumerate() {
            let mut cfg = PipelineConfig::default();
            cfg.radon.seed = seed;
            cfg.detector.space = space;
            aucs[i] = run_one_vs_rest(&ds, &cfg).map_err(|e| e.to_string())?.mean_auc.ok_or("no AUC")?;
        }
        gaps.push((aucs[0], aucs[1]));
    }
    let detail = gaps.iter().map(|(raw, sph)| format!("{raw:.3}→{sph:.3}")).collect::<Vec<_>>().join(", ");
    check(
        gaps.iter().all(|(raw, sph)| sph - raw >= 0.05),
        format!("raw→sphered mean AUC per seed: {detail} (gap ≥ 0.05 each)"),
    )
}

const PUBLISHED: [(&str, &str, f64); 5] = [
    ("EPSY", "Epilepsy", 98.1),
    ("NAT", "NATOPS", 96.1),
    ("SAD", "SpokenArabicDigits", 97.8),
    ("CT", "CharacterTrajectories", 99.7),
    ("RS", "RacketSports", 92.3),
];

fn find_train_file(root: &Path, name: &str) -> Option<PathBuf> {
    [root.join(name).join(format!("{name}_TRAIN.ts")), root.join(format!("{name}_TRAIN.ts"))]
        .into_iter()
        .find(|p| p.exists())
}

// 12. Published datasets, when available locally.
fn published_datasets() -> Option<Outcome> {
    let root = PathBuf::from(std::env::var_os("RADON_AD_UEA_DIR")?);
    let cfg = radon_ad::RunConfig::default();
    let mut lines = Vec::new();
    let mut ok = true;
    for (short, name, target) in PUBLISHED {
        let Some(train) = find_train_file(&root, name) else {
            lines.push(format!("{short}: missing"));
            ok = false;
            continue;
        };
        let test = PathBuf::from(train.to_string_lossy().replace("_TRAIN", "_TEST"));
        let load = |p: &Path, split| {
            std::fs::read_to_string(p)
                .map_err(|e| e.to_string())
                .and_then(|t| radon_ad::data::parse_ts(&t, split).map_err(|e| e.to_string()))
        };
        let result = load(&train, Split::Train)
            .and_then(|tr| load(&test, Split::Test).map(|te| LabeledDataset::from_train_test(tr, te)))
            .and_then(|ds| run_one_vs_rest(&ds, &cfg.pipeline()).map_err(|e| e.to_string()));
        match result.map(|r| r.mean_auc) {
            Ok(Some(auc)) => {
                let pts = 100.0 * auc;
                ok &= (pts - target).abs() <= 2.0;
                lines.push(format!("{short} {pts:.1} (target {target} ± 2.0)"));
            }
            Ok(None) => {
                ok = false;
                lines.push(format!("{short}: no AUC"));
            }
            Err(e) => {
                ok = false;
                lines.push(format!("{short}: {e}"));
            }
        }
    }
    let provenance = format!("config hash {}", cfg.hash().unwrap_or_default());
    Some(check(ok, format!("{}; {provenance}", lines.join(", "))))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    // `cargo test -- --list` and filters are handled by the default harness;
    // this target only runs as a whole.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [Criterion; 11] = [
        ("CDF validity", cdf_validity),
        ("permutation invariance", permutation_invariance),
        ("whitening identity", whitening_identity),
        ("SWD oracles", swd_oracles),
        ("ROC-AUC oracle", auc_oracle),
        ("kNN monotonicity", knn_monotonicity),
        ("eigensolver validation", eigensolver),
        ("determinism", determinism),
        ("synthetic suite", synthetic_suite),
        ("ablation trends", ablation_trends),
        ("sphering ablation", sphering_ablation),
    ];
    let mut failed = 0;
    let total = Instant::now();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.1} s]", i + 1);
            }
        }
    }
    match published_datasets() {
        None => println!("criterion 12 SKIP  published datasets: RADON_AD_UEA_DIR not set (optional)"),
        Some(Ok(detail)) => println!("criterion 12 PASS  published datasets: {detail} (optional)"),
        Some(Err(detail)) => {
            println!("criterion 12 FAIL  published datasets: {detail} (optional, does not fail the suite)")
        }
    }
    println!(
        "acceptance: {} of 11 required criteria passed in {:.1} s",
        11 - failed,
        Duration::from_secs_f64(total.elapsed().as_secs_f64()).as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
