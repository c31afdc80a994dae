//! C ABI over the detector: fit, save/load, and score through an opaque
//! handle. Every function returns a [`RadStatus`]; on failure the message is
//! available from [`rad_last_error_message`] on the same thread.
//!
//! Series are passed as one flat buffer: series after series, each stored
//! time-major (`len × channels` values).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use radon_ad::config::ModelKind;
use radon_ad::eval::{roc_auc, ScoredSet};
use radon_ad::{Error, FittedDetector, Model, PointRegressor, RunConfig, TimeSeries};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Dimension = 4,
    InvalidInput = 5,
    Parse = 6,
    Io = 7,
    SchemaVersion = 8,
    NoConvergence = 9,
    /// A Rust panic was caught at the boundary.
    Internal = 10,
}

/// Opaque fitted model.
pub struct RadDetector {
    model: Model,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(RadStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Parse { .. } | Error::Json(_) => RadStatus::Parse,
            Error::Config(_) => RadStatus::Config,
            Error::Dimension { .. } => RadStatus::Dimension,
            Error::InvalidInput(_) => RadStatus::InvalidInput,
            Error::NoConvergence(_) => RadStatus::NoConvergence,
            Error::SchemaVersion { .. } => RadStatus::SchemaVersion,
            Error::Io { .. } => RadStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RadStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RadStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error".into());
            RadStatus::Internal
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(RadStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(RadStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn detector<'a>(p: *const RadDetector) -> Result<&'a RadDetector, Failure> {
    p.as_ref().ok_or_else(|| null("detector"))
}

fn series_from(values: &[f64], len: usize, channels: usize, id: String) -> Result<TimeSeries, Failure> {
    Ok(TimeSeries::new(id, channels, values[..len * channels].to_vec())?)
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(value);
    Ok(())
}

/// Fits a model on `n_series` series of `channels` channels; `lengths[i]` is
/// the length of series `i`. `config_json` is a flat JSON config object (may
/// be null for defaults). Its `model_kind` selects series, collective or
/// regressor models.
///
/// # Safety
/// Buffers must be valid for the sizes implied by the arguments; `out` must
/// be writable. The handle is released with [`rad_detector_free`].
#[no_mangle]
pub unsafe extern "C" fn rad_detector_fit(
    values: *const f64,
    lengths: *const usize,
    n_series: usize,
    channels: usize,
    config_json: *const c_char,
    out: *mut *mut RadDetector,
) -> RadStatus {
    guard(|| {
        let lengths = slice_arg(lengths, n_series, "lengths")?;
        let total = lengths.iter().try_fold(0usize, |acc, &l| acc.checked_add(l.checked_mul(channels)?));
        let total = total.ok_or_else(|| Failure(RadStatus::Dimension, "buffer size overflows".into()))?;
        let values = slice_arg(values, total, "values")?;
        let cfg = if config_json.is_null() {
            RunConfig::default()
        } else {
            RunConfig::from_json(str_arg(config_json, "config_json")?)?
        };
        let mut series = Vec::with_capacity(n_series);
        let mut offset = 0;
        for (i, &len) in lengths.iter().enumerate() {
            series.push(series_from(&values[offset..], len, channels, i.to_string())?);
            offset += len * channels;
        }
        let p = cfg.pipeline();
        let model = match cfg.model_kind {
            ModelKind::Series => Model::Detector(FittedDetector::fit(&series, &p)?),
            ModelKind::Collective => Model::Detector(FittedDetector::fit_windows(&series, cfg.context_len, &p)?),
            ModelKind::Regressor => {
                Model::Regressor(PointRegressor::fit(&series, &p.window, &p.radon, cfg.context_len, cfg.ridge_lambda)?)
            }
        };
        write_out(out, Box::into_raw(Box::new(RadDetector { model })))
    })
}

/// Parses a model from its JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rad_detector_from_json(json: *const c_char, out: *mut *mut RadDetector) -> RadStatus {
    guard(|| {
        let model = Model::from_json(str_arg(json, "json")?)?;
        write_out(out, Box::into_raw(Box::new(RadDetector { model })))
    })
}

/// Loads a model file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rad_detector_load(path: *const c_char, out: *mut *mut RadDetector) -> RadStatus {
    guard(|| {
        let model = Model::load(Path::new(str_arg(path, "path")?))?;
        write_out(out, Box::into_raw(Box::new(RadDetector { model })))
    })
}

/// Writes the model file.
///
/// # Safety
/// `det` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn rad_detector_save(det: *const RadDetector, path: *const c_char) -> RadStatus {
    guard(|| {
        let det = detector(det)?;
        Ok(det.model.save(Path::new(str_arg(path, "path")?))?)
    })
}

/// Serializes the model; free the string with [`rad_string_free`].
///
/// # Safety
/// `det` must come from this library and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn rad_detector_to_json(det: *const RadDetector, out: *mut *mut c_char) -> RadStatus {
    guard(|| {
        let json = detector(det)?.model.to_json()?;
        let c = CString::new(json).map_err(|_| Failure(RadStatus::Internal, "NUL in JSON".into()))?;
        write_out(out, c.into_raw())
    })
}

/// Length of the model's feature vectors (`N_P · N_B`).
///
/// # Safety
/// `det` must come from this library and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn rad_detector_feature_dim(det: *const RadDetector, out: *mut usize) -> RadStatus {
    guard(|| {
        let d = match &detector(det)?.model {
            Model::Detector(d) => d.feature_len(),
            Model::Regressor(r) => r.pipeline.feature_len(),
        };
        write_out(out, d)
    })
}

/// Anomaly score of one series of `len × channels` values.
///
/// # Safety
/// `values` must hold `len * channels` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rad_detector_score(
    det: *const RadDetector,
    values: *const f64,
    len: usize,
    channels: usize,
    out: *mut f64,
) -> RadStatus {
    guard(|| {
        let det = detector(det)?;
        let n =
            len.checked_mul(channels).ok_or_else(|| Failure(RadStatus::Dimension, "buffer size overflows".into()))?;
        let s = series_from(slice_arg(values, n, "values")?, len, channels, "0".into())?;
        let score = match &det.model {
            Model::Detector(d) => d.score_series(&s)?,
            Model::Regressor(_) => {
                return Err(Failure(RadStatus::Config, "a regressor model only produces point scores".into()))
            }
        };
        write_out(out, score)
    })
}

/// Per-point scores of one series; writes `len` values to `out`. Needs a
/// collective or regressor model. Positions a regressor cannot score get 0.
///
/// # Safety
/// `values` must hold `len * channels` doubles and `out` room for `len`.
#[no_mangle]
pub unsafe extern "C" fn rad_detector_score_points(
    det: *const RadDetector,
    values: *const f64,
    len: usize,
    channels: usize,
    out: *mut f64,
) -> RadStatus {
    guard(|| {
        let det = detector(det)?;
        let n =
            len.checked_mul(channels).ok_or_else(|| Failure(RadStatus::Dimension, "buffer size overflows".into()))?;
        let s = series_from(slice_arg(values, n, "values")?, len, channels, "0".into())?;
        let scores = match &det.model {
            Model::Detector(d) => {
                let w = d
                    .window_len
                    .ok_or_else(|| Failure(RadStatus::Config, "series models do not produce point scores".into()))?;
                d.score_points(&s, w)?
            }
            Model::Regressor(r) => r.score_points(&s)?.scores,
        };
        if out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(scores.as_ptr(), out, scores.len());
        Ok(())
    })
}

/// Rank-based ROC-AUC of `n` scores with 0/1 labels.
///
/// # Safety
/// `scores` and `labels` must hold `n` entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rad_roc_auc(scores: *const f64, labels: *const u8, n: usize, out: *mut f64) -> RadStatus {
    guard(|| {
        let set = ScoredSet::new(slice_arg(scores, n, "scores")?, slice_arg(labels, n, "labels")?)?;
        write_out(out, roc_auc(&set)?)
    })
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rad_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn rad_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `det` must come from this library or be null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn rad_detector_free(det: *mut RadDetector) {
    if !det.is_null() {
        drop(Box::from_raw(det));
    }
}
