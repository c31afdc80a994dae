//! Loading series and datasets from the command line's file arguments.

use std::fs;
use std::path::{Path, PathBuf};

use radon_ad::data::{csv_channel_count, parse_csv_series, parse_ts};
use radon_ad::synth::PointMask;
use radon_ad::{Error, LabeledDataset, Result, Split, TimeSeries};

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

pub fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

fn is_ts(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("ts"))
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Expands directories into their `.csv` and `.ts` files, sorted by name.
fn expand(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| Error::Io { path: p.clone(), source: e })?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|q| (is_csv(q) || is_ts(q)) && !q.to_string_lossy().ends_with(".mask.json"))
                .collect();
            entries.sort();
            out.extend(entries);
        } else {
            out.push(p.clone());
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidInput("no input series files".into()));
    }
    Ok(out)
}

pub fn read_csv(path: &Path) -> Result<TimeSeries> {
    let text = read(path)?;
    let channels = csv_channel_count(&text)
        .ok_or_else(|| Error::Parse { line: 1, message: format!("{}: empty CSV", path.display()) })?;
    let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_csv_series(&id, &text, channels)
}

/// All series from CSV files, `.ts` files and directories of them, with
/// `.ts` class labels when present.
pub fn load_series(paths: &[PathBuf]) -> Result<Vec<(TimeSeries, Option<String>)>> {
    let mut out = Vec::new();
    for p in expand(paths)? {
        if is_ts(&p) {
            let ds = parse_ts(&read(&p)?, Split::Train)?;
            let has_labels = ds.labels().iter().any(|l| !l.is_empty());
            for (s, label, _) in ds.iter() {
                out.push((s.clone(), has_labels.then(|| label.to_string())));
            }
        } else {
            out.push((read_csv(&p)?, None));
        }
    }
    Ok(out)
}

/// Train and test `.ts` files. Without an explicit test path, a `_TRAIN`
/// file is paired with its `_TEST` sibling.
pub fn load_dataset(train: &Path, test: Option<&Path>) -> Result<LabeledDataset> {
    let test_path = match test {
        Some(t) => t.to_path_buf(),
        None => {
            let name = train.to_string_lossy();
            let sibling = PathBuf::from(name.replace("_TRAIN", "_TEST"));
            if sibling.as_path() == train || !sibling.exists() {
                return Err(Error::Config(format!("no test split for {}; pass --test", train.display())));
            }
            sibling
        }
    };
    let tr = parse_ts(&read(train)?, Split::Train)?;
    let te = parse_ts(&read(&test_path)?, Split::Test)?;
    Ok(LabeledDataset::from_train_test(tr, te))
}

/// The mask next to `series.csv` is `series.mask.json`.
pub fn mask_path(series: &Path) -> PathBuf {
    series.with_extension("mask.json")
}

pub fn load_mask(path: &Path) -> Result<PointMask> {
    Ok(serde_json::from_str(&read(path)?)?)
}
