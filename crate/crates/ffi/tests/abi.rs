use std::ffi::{CStr, CString};
use std::ptr;

use radon_ad_ffi::*;

fn wave(len: usize, phase: f64, amp: f64) -> Vec<f64> {
    (0..len).map(|t| amp * (t as f64 * 0.5 + phase).sin()).collect()
}

fn last_error() -> String {
    let p = rad_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn fit(config: &str, series: &[Vec<f64>]) -> Result<*mut RadDetector, (RadStatus, String)> {
    let values: Vec<f64> = series.concat();
    let lengths: Vec<usize> = series.iter().map(Vec::len).collect();
    let cfg = CString::new(config).unwrap();
    let mut det = ptr::null_mut();
    let status =
        unsafe { rad_detector_fit(values.as_ptr(), lengths.as_ptr(), series.len(), 1, cfg.as_ptr(), &mut det) };
    if status == RadStatus::Ok {
        Ok(det)
    } else {
        Err((status, last_error()))
    }
}

fn training() -> Vec<Vec<f64>> {
    (0..6).map(|i| wave(48, i as f64 * 0.2, 1.0 + 0.05 * i as f64)).collect()
}

#[test]
fn fit_score_and_round_trip() {
    let det = fit(r#"{"n_projections": 12, "n_bins": 6, "scorer": "knn", "k": 1}"#, &training()).unwrap();
    let mut dim = 0usize;
    assert_eq!(unsafe { rad_detector_feature_dim(det, &mut dim) }, RadStatus::Ok);
    assert_eq!(dim, 72);

    let member = &training()[2];
    let mut score = f64::NAN;
    assert_eq!(unsafe { rad_detector_score(det, member.as_ptr(), member.len(), 1, &mut score) }, RadStatus::Ok);
    assert_eq!(score, 0.0);
    let odd = wave(48, 0.1, 5.0);
    let mut odd_score = 0.0;
    unsafe { rad_detector_score(det, odd.as_ptr(), odd.len(), 1, &mut odd_score) };
    assert!(odd_score > 0.0);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { rad_detector_to_json(det, &mut json) }, RadStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { rad_detector_from_json(json, &mut back) }, RadStatus::Ok);
    let mut again = 0.0;
    unsafe { rad_detector_score(back, odd.as_ptr(), odd.len(), 1, &mut again) };
    assert_eq!(again, odd_score);

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("m.json").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { rad_detector_save(det, path.as_ptr()) }, RadStatus::Ok);
    let mut loaded = ptr::null_mut();
    assert_eq!(unsafe { rad_detector_load(path.as_ptr(), &mut loaded) }, RadStatus::Ok);
    let saved = std::fs::read_to_string(dir.path().join("m.json")).unwrap();
    assert_eq!(saved, unsafe { CStr::from_ptr(json) }.to_str().unwrap());

    unsafe {
        rad_string_free(json);
        rad_detector_free(det);
        rad_detector_free(back);
        rad_detector_free(loaded);
    }
}

#[test]
fn point_scores_fill_the_buffer() {
    let train = vec![wave(120, 0.0, 1.0)];
    let det =
        fit(r#"{"model_kind": "regressor", "n_projections": 10, "n_bins": 5, "resolutions": 1}"#, &train).unwrap();
    let test = wave(80, 0.3, 1.0);
    let mut out = vec![f64::NAN; 80];
    assert_eq!(unsafe { rad_detector_score_points(det, test.as_ptr(), 80, 1, out.as_mut_ptr()) }, RadStatus::Ok);
    assert!(out[..20].iter().all(|&v| v == 0.0));
    assert!(out.iter().all(|v| v.is_finite()));

    let mut one = 0.0;
    assert_eq!(unsafe { rad_detector_score(det, test.as_ptr(), 80, 1, &mut one) }, RadStatus::Config);
    unsafe { rad_detector_free(det) };
}

#[test]
fn errors_map_to_codes() {
    let err = fit(r#"{"distance": "swd1"}"#, &training()).unwrap_err();
    assert_eq!(err.0, RadStatus::Config);
    assert!(err.1.contains("SWD"));

    let err = fit("{not json", &training()).unwrap_err();
    assert_eq!(err.0, RadStatus::Parse);

    let err = fit("{}", &training()[..1]).unwrap_err();
    assert_eq!(err.0, RadStatus::InvalidInput);

    let mut det = ptr::null_mut();
    let bad = CString::new(r#"{"schema_version": 7, "model": {}}"#).unwrap();
    assert_eq!(unsafe { rad_detector_from_json(bad.as_ptr(), &mut det) }, RadStatus::SchemaVersion);
    assert_eq!(unsafe { rad_detector_from_json(ptr::null(), &mut det) }, RadStatus::NullPointer);
    let mut d = 0;
    assert_eq!(unsafe { rad_detector_feature_dim(ptr::null(), &mut d) }, RadStatus::NullPointer);

    let missing = CString::new("/nonexistent/dir/model.json").unwrap();
    assert_eq!(unsafe { rad_detector_load(missing.as_ptr(), &mut det) }, RadStatus::Io);
    unsafe { rad_detector_free(ptr::null_mut()) };
}

#[test]
fn auc_through_the_abi() {
    let scores = [0.1, 0.5, 0.5, 0.9];
    let labels = [0u8, 0, 1, 1];
    let mut auc = 0.0;
    assert_eq!(unsafe { rad_roc_auc(scores.as_ptr(), labels.as_ptr(), 4, &mut auc) }, RadStatus::Ok);
    assert_eq!(auc, 0.875);
    let zeros = [0u8; 4];
    assert_eq!(unsafe { rad_roc_auc(scores.as_ptr(), zeros.as_ptr(), 4, &mut auc) }, RadStatus::InvalidInput);
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/radon_ad.h")).unwrap();
    for name in [
        "rad_detector_fit",
        "rad_detector_from_json",
        "rad_detector_load",
        "rad_detector_save",
        "rad_detector_to_json",
        "rad_detector_feature_dim",
        "rad_detector_score",
        "rad_detector_score_points",
        "rad_roc_auc",
        "rad_last_error_message",
        "rad_string_free",
        "rad_detector_free",
        "typedef struct RadDetector RadDetector",
        "RAD_STATUS_SCHEMA_VERSION = 8",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}
