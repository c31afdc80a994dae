//! Series and dataset types, plus readers for the `.ts` multivariate text
//! format and a one-row-per-time-step CSV convention.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A `d`-channel sequence of `T` finite reals, stored row-major (row = time step).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    id: String,
    len: usize,
    channels: usize,
    values: Vec<f64>,
}

impl TimeSeries {
    /// Builds a series from row-major values. Fails on empty input, ragged
    /// shape or non-finite values.
    pub fn new(id: impl Into<String>, channels: usize, values: Vec<f64>) -> Result<Self> {
        if channels == 0 {
            return Err(Error::invalid("a series needs at least one channel"));
        }
        if values.is_empty() {
            return Err(Error::invalid("a series needs at least one time step"));
        }
        if values.len() % channels != 0 {
            return Err(Error::invalid(format!("{} values do not divide into {} channels", values.len(), channels)));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite value at time step {}", pos / channels)));
        }
        Ok(Self { id: id.into(), len: values.len() / channels, channels, values })
    }

    /// Univariate convenience constructor.
    pub fn univariate(id: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        Self::new(id, 1, values)
    }

    /// Builds a series from per-channel sequences of equal length.
    pub fn from_channels(id: impl Into<String>, channels: &[Vec<f64>]) -> Result<Self> {
        let d = channels.len();
        let t = channels.first().map_or(0, Vec::len);
        if channels.iter().any(|c| c.len() != t) {
            return Err(Error::invalid("channels have different lengths"));
        }
        let mut values = Vec::with_capacity(t * d);
        for i in 0..t {
            values.extend(channels.iter().map(|c| c[i]));
        }
        Self::new(id, d, values)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Number of time steps `T`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of channels `d`.
    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.channels..(t + 1) * self.channels]
    }

    #[inline]
    pub fn get(&self, t: usize, channel: usize) -> f64 {
        self.values[t * self.channels + channel]
    }

    pub fn channel(&self, channel: usize) -> Vec<f64> {
        (0..self.len).map(|t| self.get(t, channel)).collect()
    }

    /// Contiguous sub-series covering time steps `start..start + len`.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        if len == 0 || start + len > self.len {
            return Err(Error::invalid(format!(
                "slice {}..{} out of range for a series of length {}",
                start,
                start + len,
                self.len
            )));
        }
        Ok(Self {
            id: format!("{}[{}..{}]", self.id, start, start + len),
            len,
            channels: self.channels,
            values: self.values[start * self.channels..(start + len) * self.channels].to_vec(),
        })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

/// An ordered collection of labelled series, each tagged train or test.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub problem_name: Option<String>,
    series: Vec<TimeSeries>,
    labels: Vec<String>,
    splits: Vec<Split>,
}

impl LabeledDataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, series: TimeSeries, label: impl Into<String>, split: Split) {
        self.series.push(series);
        self.labels.push(label.into());
        self.splits.push(split);
    }

    /// Concatenates a train file and a test file into one dataset.
    pub fn from_train_test(train: LabeledDataset, test: LabeledDataset) -> Self {
        let mut out = LabeledDataset {
            problem_name: train.problem_name.clone().or(test.problem_name.clone()),
            ..Default::default()
        };
        for (s, l) in train.series.into_iter().zip(train.labels) {
            out.push(s, l, Split::Train);
        }
        for (s, l) in test.series.into_iter().zip(test.labels) {
            out.push(s, l, Split::Test);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn series(&self) -> &[TimeSeries] {
        &self.series
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn splits(&self) -> &[Split] {
        &self.splits
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TimeSeries, &str, Split)> {
        self.series.iter().zip(&self.labels).zip(&self.splits).map(|((s, l), sp)| (s, l.as_str(), *sp))
    }

    /// Distinct class tags, sorted.
    pub fn classes(&self) -> Vec<String> {
        self.labels.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect()
    }

    /// Keeps only series whose length lies in `min..=max`.
    pub fn filter_lengths(&self, min: usize, max: usize) -> Self {
        let mut out = LabeledDataset { problem_name: self.problem_name.clone(), ..Default::default() };
        for (s, l, sp) in self.iter() {
            if (min..=max).contains(&s.len()) {
                out.push(s.clone(), l, sp);
            }
        }
        out
    }
}

/// A univariate or multivariate series with point-level ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointLabeledSeries {
    series: TimeSeries,
    point_labels: Vec<u8>,
}

impl PointLabeledSeries {
    pub fn new(series: TimeSeries, point_labels: Vec<u8>) -> Result<Self> {
        if point_labels.len() != series.len() {
            return Err(Error::Dimension { expected: series.len(), found: point_labels.len() });
        }
        if point_labels.iter().any(|&l| l > 1) {
            return Err(Error::invalid("point labels must be 0 or 1"));
        }
        Ok(Self { series, point_labels })
    }

    pub fn series(&self) -> &TimeSeries {
        &self.series
    }

    pub fn point_labels(&self) -> &[u8] {
        &self.point_labels
    }

    pub fn anomalous_count(&self) -> usize {
        self.point_labels.iter().filter(|&&l| l == 1).count()
    }
}

// ---------------------------------------------------------------------------
// `.ts` format

#[derive(Debug, Default)]
struct TsHeader {
    problem_name: Option<String>,
    dimensions: Option<usize>,
    equal_length: Option<bool>,
    series_length: Option<usize>,
    class_label: bool,
    class_values: Vec<String>,
}

fn parse_bool(line: usize, directive: &str, value: Option<&str>) -> Result<bool> {
    match value.map(str::to_ascii_lowercase).as_deref() {
        Some("true") => Ok(true),
        Some("false") => Ok(false),
        _ => Err(Error::parse(line, format!("@{directive} expects `true` or `false`"))),
    }
}

fn parse_usize(line: usize, directive: &str, value: Option<&str>) -> Result<usize> {
    value
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::parse(line, format!("@{directive} expects a non-negative integer")))
}

fn parse_real(line: usize, token: &str) -> Result<f64> {
    let token = token.trim();
    if token == "?" || token.eq_ignore_ascii_case("nan") {
        return Err(Error::parse(line, format!("missing value `{token}` is not supported")));
    }
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(Error::parse(line, format!("non-finite value `{token}`"))),
        Err(_) => Err(Error::parse(line, format!("non-numeric token `{token}`"))),
    }
}

/// Parses a `.ts` file. Every series is tagged with `split`.
///
/// Body lines hold colon-separated channels of comma-separated reals; when
/// `@classLabel true` the final field is the class tag. Line numbers in
/// errors are 1-based.
pub fn parse_ts(text: &str, split: Split) -> Result<LabeledDataset> {
    let mut header = TsHeader::default();
    let mut in_data = false;
    let mut dataset = LabeledDataset::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !in_data {
            let Some(directive_line) = line.strip_prefix('@') else {
                return Err(Error::parse(line_no, "expected a header directive before @data"));
            };
            let mut parts = directive_line.split_whitespace();
            let directive = parts.next().unwrap_or_default();
            let value = parts.next();
            match directive.to_ascii_lowercase().as_str() {
                "problemname" => {
                    header.problem_name =
                        Some(value.ok_or_else(|| Error::parse(line_no, "@problemName expects a name"))?.to_string())
                }
                "timestamps" => {
                    if parse_bool(line_no, directive, value)? {
                        return Err(Error::parse(line_no, "timestamped series are not supported"));
                    }
                }
                "missing" => {
                    parse_bool(line_no, directive, value)?;
                }
                "univariate" => {
                    if parse_bool(line_no, directive, value)? {
                        header.dimensions.get_or_insert(1);
                    }
                }
                "dimension" | "dimensions" => {
                    let d = parse_usize(line_no, directive, value)?;
                    if d == 0 {
                        return Err(Error::parse(line_no, "@dimensions must be at least 1"));
                    }
                    header.dimensions = Some(d);
                }
                "equallength" => header.equal_length = Some(parse_bool(line_no, directive, value)?),
                "serieslength" => header.series_length = Some(parse_usize(line_no, directive, value)?),
                "classlabel" => {
                    header.class_label = parse_bool(line_no, directive, value)?;
                    header.class_values = parts.map(str::to_string).collect();
                    if let Some(v) = value {
                        if !header.class_label && !v.eq_ignore_ascii_case("false") {
                            return Err(Error::parse(line_no, "malformed @classLabel"));
                        }
                    }
                }
                "targetlabel" => {
                    if parse_bool(line_no, directive, value)? {
                        return Err(Error::parse(line_no, "regression targets are not supported"));
                    }
                }
                "data" => {
                    if value.is_some() {
                        return Err(Error::parse(line_no, "@data takes no arguments"));
                    }
                    in_data = true;
                }
                other => return Err(Error::parse(line_no, format!("unknown header directive `@{other}`"))),
            }
            continue;
        }

        let mut fields: Vec<&str> = line.split(':').collect();
        let label = if header.class_label {
            if fields.len() < 2 {
                return Err(Error::parse(line_no, "missing class label"));
            }
            let label = fields.pop().unwrap_or_default().trim().to_string();
            if !header.class_values.is_empty() && !header.class_values.contains(&label) {
                return Err(Error::parse(line_no, format!("class label `{label}` not declared in @classLabel")));
            }
            label
        } else {
            String::new()
        };

        let d = *header.dimensions.get_or_insert(fields.len());
        if fields.len() != d {
            return Err(Error::parse(line_no, format!("expected {d} channels, found {}", fields.len())));
        }
        let channels = fields
            .iter()
            .map(|f| f.split(',').map(|tok| parse_real(line_no, tok)).collect::<Result<Vec<f64>>>())
            .collect::<Result<Vec<_>>>()?;
        let t = channels[0].len();
        if channels.iter().any(|c| c.len() != t) {
            return Err(Error::parse(line_no, "channels of one series have different lengths"));
        }
        if let (Some(true), Some(expected)) = (header.equal_length, header.series_length) {
            if t != expected {
                return Err(Error::parse(line_no, format!("series length {t} differs from @seriesLength {expected}")));
            }
        }
        if header.equal_length == Some(true) {
            if let Some(first) = dataset.series.first() {
                if first.len() != t {
                    return Err(Error::parse(line_no, "unequal series lengths under @equalLength true"));
                }
            }
        }
        let id = format!("{}", dataset.len());
        let series = TimeSeries::from_channels(id, &channels).map_err(|e| Error::parse(line_no, e.to_string()))?;
        dataset.push(series, label, split);
    }

    if !in_data {
        return Err(Error::parse(text.lines().count().max(1), "missing @data section"));
    }
    dataset.problem_name = header.problem_name;
    Ok(dataset)
}

/// Serializes a dataset (or one split of it) in `.ts` form. Reals are printed
/// with the shortest representation that parses back to the same bits.
pub fn write_ts(dataset: &LabeledDataset, split: Option<Split>) -> String {
    let rows: Vec<_> = dataset.iter().filter(|(_, _, sp)| split.is_none_or(|want| *sp == want)).collect();
    let d = rows.first().map_or(1, |(s, _, _)| s.channels());
    let equal = rows.windows(2).all(|w| w[0].0.len() == w[1].0.len());
    let classes: BTreeSet<&str> = rows.iter().map(|(_, l, _)| *l).collect();

    let mut out = String::new();
    if let Some(name) = &dataset.problem_name {
        let _ = writeln!(out, "@problemName {name}");
    }
    let _ = writeln!(out, "@timeStamps false");
    let _ = writeln!(out, "@missing false");
    let _ = writeln!(out, "@univariate {}", d == 1);
    if d > 1 {
        let _ = writeln!(out, "@dimensions {d}");
    }
    let _ = writeln!(out, "@equalLength {equal}");
    if equal {
        if let Some((s, _, _)) = rows.first() {
            let _ = writeln!(out, "@seriesLength {}", s.len());
        }
    }
    let class_list: Vec<&str> = classes.into_iter().collect();
    let _ = writeln!(out, "@classLabel true {}", class_list.join(" "));
    let _ = writeln!(out, "@data");
    for (s, label, _) in rows {
        for c in 0..s.channels() {
            let channel: Vec<String> = (0..s.len()).map(|t| format!("{}", s.get(t, c))).collect();
            out.push_str(&channel.join(","));
            out.push(':');
        }
        out.push_str(label);
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// CSV

/// Parses a CSV table with one time step per row and exactly `channels`
/// numeric fields per row. Blank lines are ignored.
pub fn parse_csv_series(id: &str, text: &str, channels: usize) -> Result<TimeSeries> {
    if channels == 0 {
        return Err(Error::config("channel count must be at least 1"));
    }
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != channels {
            return Err(Error::parse(idx + 1, format!("expected {channels} fields, found {}", fields.len())));
        }
        for f in fields {
            values.push(parse_real(idx + 1, f)?);
        }
    }
    if values.is_empty() {
        return Err(Error::parse(1, "no rows"));
    }
    TimeSeries::new(id, channels, values)
}

/// Number of fields on the first non-blank row.
pub fn csv_channel_count(text: &str) -> Option<usize> {
    text.lines().map(str::trim).find(|l| !l.is_empty()).map(|l| l.split(',').count())
}

pub fn write_csv_series(series: &TimeSeries) -> String {
    let mut out = String::new();
    for t in 0..series.len() {
        let row: Vec<String> = series.row(t).iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// One-vs-rest protocol

/// One anomaly detection task carved out of a classification dataset.
#[derive(Debug, Clone)]
pub struct OneVsRestSplit {
    pub normal_class: String,
    pub train: Vec<TimeSeries>,
    pub test: Vec<TimeSeries>,
    /// 1 when the test series belongs to a class other than `normal_class`.
    pub test_labels: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedClass {
    pub class: String,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct OneVsRest {
    pub splits: Vec<OneVsRestSplit>,
    pub skipped: Vec<SkippedClass>,
}

/// Builds one task per class: that class's training series are normal, the
/// whole test split is scored, and every other class is anomalous. Classes
/// are visited in sorted order. A class with no training series is skipped
/// and recorded.
pub fn one_vs_rest_splits(dataset: &LabeledDataset) -> Result<OneVsRest> {
    let classes = dataset.classes();
    if classes.len() < 2 {
        return Err(Error::invalid(format!("one-vs-rest needs at least 2 classes, found {}", classes.len())));
    }
    let mut train_by_class: BTreeMap<&str, Vec<TimeSeries>> = BTreeMap::new();
    let mut test = Vec::new();
    let mut test_classes = Vec::new();
    for (s, label, split) in dataset.iter() {
        match split {
            Split::Train => train_by_class.entry(label).or_default().push(s.clone()),
            Split::Test => {
                test.push(s.clone());
                test_classes.push(label);
            }
        }
    }

    let mut splits = Vec::new();
    let mut skipped = Vec::new();
    for class in &classes {
        match train_by_class.get(class.as_str()) {
            Some(train) if !train.is_empty() => splits.push(OneVsRestSplit {
                normal_class: class.clone(),
                train: train.clone(),
                test: test.clone(),
                test_labels: test_classes.iter().map(|c| u8::from(*c != class.as_str())).collect(),
            }),
            _ => skipped.push(SkippedClass { class: class.clone(), reason: "no training series".into() }),
        }
    }
    Ok(OneVsRest { splits, skipped })
}
