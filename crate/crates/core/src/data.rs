//! Dataset loading, numeric-feature selection, standardization and its
//! inverse, stream sub-sampling, and the split protocols used by the rest
//! of the crate.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::seeds;

const TAG_SUBSAMPLE: u64 = 0x01;
const TAG_SPLIT_POINT: u64 = 0x02;
const TAG_TRAIN_TEST: u64 = 0x03;

/// Rows of numeric features with optional binary labels.
///
/// Values are stored row-major. All values are finite; labels, when
/// present, are 0/1 and row-aligned.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    feature_names: Vec<String>,
    values: Vec<f64>,
    labels: Option<Vec<u8>>,
    d: usize,
}

impl FeatureMatrix {
    pub fn new(
        feature_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Option<Vec<u8>>,
    ) -> Result<Self> {
        let d = feature_names.len();
        if d == 0 {
            return Err(Error::InvalidMatrix("no features".into()));
        }
        if rows.is_empty() {
            return Err(Error::InvalidMatrix("no rows".into()));
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidMatrix(format!(
                    "duplicate feature name {name:?}"
                )));
            }
        }
        let mut values = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has {} values, expected {d}",
                    row.len()
                )));
            }
            for &v in row {
                if !v.is_finite() {
                    return Err(Error::InvalidMatrix(format!("row {i} holds {v}")));
                }
            }
            values.extend_from_slice(row);
        }
        let m = Self::from_parts(feature_names, values, d, None);
        match labels {
            Some(y) => m.with_labels(y),
            None => Ok(m),
        }
    }

    /// Trusted constructor for values produced inside the crate.
    pub(crate) fn from_parts(
        feature_names: Vec<String>,
        values: Vec<f64>,
        d: usize,
        labels: Option<Vec<u8>>,
    ) -> Self {
        debug_assert_eq!(values.len() % d.max(1), 0);
        FeatureMatrix {
            feature_names,
            values,
            labels,
            d,
        }
    }

    pub fn n_rows(&self) -> usize {
        if self.d == 0 {
            0
        } else {
            self.values.len() / self.d
        }
    }

    pub fn n_features(&self) -> usize {
        self.d
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.d + j]
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    pub fn label(&self, i: usize) -> Option<u8> {
        self.labels.as_ref().map(|y| y[i])
    }

    /// Attaches a label vector, validating length and 0/1 range.
    pub fn with_labels(&self, labels: Vec<u8>) -> Result<Self> {
        if labels.len() != self.n_rows() {
            return Err(Error::LengthMismatch {
                expected: self.n_rows(),
                actual: labels.len(),
                context: "labels".into(),
            });
        }
        if let Some(bad) = labels.iter().find(|&&y| y > 1) {
            return Err(Error::InvalidMatrix(format!("label value {bad} is not 0/1")));
        }
        Ok(FeatureMatrix {
            labels: Some(labels),
            ..self.clone()
        })
    }

    pub fn without_labels(&self) -> Self {
        FeatureMatrix {
            labels: None,
            ..self.clone()
        }
    }

    /// Copies the rows in `range`, preserving order and labels.
    pub fn slice_rows(&self, range: std::ops::Range<usize>) -> Self {
        let values = self.values[range.start * self.d..range.end * self.d].to_vec();
        let labels = self.labels.as_ref().map(|y| y[range.clone()].to_vec());
        FeatureMatrix::from_parts(self.feature_names.clone(), values, self.d, labels)
    }

    /// Copies the given rows (indices may repeat), preserving labels.
    pub fn take_rows(&self, idx: &[usize]) -> Self {
        let mut values = Vec::with_capacity(idx.len() * self.d);
        for &i in idx {
            values.extend_from_slice(self.row(i));
        }
        let labels = self
            .labels
            .as_ref()
            .map(|y| idx.iter().map(|&i| y[i]).collect());
        FeatureMatrix::from_parts(self.feature_names.clone(), values, self.d, labels)
    }

    /// Row-wise concatenation; feature spaces must match.
    pub fn concat_rows(&self, other: &FeatureMatrix) -> Result<Self> {
        if self.feature_names != other.feature_names {
            return Err(Error::FeatureMismatch(format!(
                "{:?} vs {:?}",
                self.feature_names, other.feature_names
            )));
        }
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        let labels = match (&self.labels, &other.labels) {
            (Some(a), Some(b)) => {
                let mut y = a.clone();
                y.extend_from_slice(b);
                Some(y)
            }
            (None, None) => None,
            _ => {
                return Err(Error::FeatureMismatch(
                    "one side is labeled, the other is not".into(),
                ))
            }
        };
        Ok(FeatureMatrix::from_parts(
            self.feature_names.clone(),
            values,
            self.d,
            labels,
        ))
    }

    /// Column-major copy, used by the tree fitter.
    pub(crate) fn columns(&self) -> Vec<Vec<f64>> {
        let n = self.n_rows();
        let mut cols = vec![Vec::with_capacity(n); self.d];
        for i in 0..n {
            for (j, col) in cols.iter_mut().enumerate() {
                col.push(self.value(i, j));
            }
        }
        cols
    }

    /// Renders the matrix as CSV (header row; labels, when present, go to
    /// `label_column`).
    pub fn to_csv_string(&self, label_column: &str) -> String {
        let mut out = String::new();
        let mut header: Vec<&str> = self.feature_names.iter().map(|s| s.as_str()).collect();
        if self.labels.is_some() {
            header.push(label_column);
        }
        let _ = writeln!(out, "{}", header.join(","));
        for i in 0..self.n_rows() {
            let mut cells: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            if let Some(y) = &self.labels {
                cells.push(y[i].to_string());
            }
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn write_csv(&self, path: &Path, label_column: &str) -> Result<()> {
        std::fs::write(path, self.to_csv_string(label_column)).map_err(|e| Error::io(path, e))
    }
}

/// Per-feature `[lo, hi]` bounds of the known, bounded feature domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBounds {
    bounds: Vec<(f64, f64)>,
}

impl DomainBounds {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        for (j, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo <= hi) {
                return Err(Error::InvalidMatrix(format!(
                    "domain bound {j} has lo {lo} > hi {hi}"
                )));
            }
        }
        Ok(DomainBounds { bounds })
    }

    pub fn len(&self) -> usize {
        self.bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_empty()
    }

    pub fn lo(&self, j: usize) -> f64 {
        self.bounds[j].0
    }

    pub fn hi(&self, j: usize) -> f64 {
        self.bounds[j].1
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn contains_row(&self, row: &[f64]) -> bool {
        row.iter()
            .zip(&self.bounds)
            .all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }
}

/// Per-feature mean and standard deviation of the standardization, plus
/// the names of zero-variance features that were dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    entries: Vec<ScalerEntry>,
    dropped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalerEntry {
    pub name: String,
    pub mean: f64,
    pub std: f64,
}

impl Scaler {
    pub fn from_entries(entries: Vec<ScalerEntry>) -> Self {
        Scaler {
            entries,
            dropped: Vec::new(),
        }
    }

    /// Identity scaler (mean 0, std 1 for every feature).
    pub fn identity(feature_names: &[String]) -> Self {
        Scaler {
            entries: feature_names
                .iter()
                .map(|n| ScalerEntry {
                    name: n.clone(),
                    mean: 0.0,
                    std: 1.0,
                })
                .collect(),
            dropped: Vec::new(),
        }
    }

    pub fn n_features(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[ScalerEntry] {
        &self.entries
    }

    pub fn dropped(&self) -> &[String] {
        &self.dropped
    }

    pub fn mean(&self, j: usize) -> Result<f64> {
        self.entries
            .get(j)
            .map(|e| e.mean)
            .ok_or(Error::UnknownFeature(j))
    }

    pub fn std(&self, j: usize) -> Result<f64> {
        self.entries
            .get(j)
            .map(|e| e.std)
            .ok_or(Error::UnknownFeature(j))
    }

    /// Flat key=value rendering: one `name=mean std` line per retained
    /// feature, `name=dropped` for zero-variance features.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# scaler v1\n");
        for e in &self.entries {
            let _ = writeln!(out, "{}={} {}", e.name, e.mean, e.std);
        }
        for name in &self.dropped {
            let _ = writeln!(out, "{name}=dropped");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut dropped = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, rest) = line.split_once('=').ok_or_else(|| Error::Parse {
                what: "scaler",
                detail: format!("line {}: missing '='", i + 1),
            })?;
            if rest.trim() == "dropped" {
                dropped.push(name.to_string());
                continue;
            }
            let mut parts = rest.split_whitespace();
            let parse = |s: Option<&str>| -> Result<f64> {
                s.and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::Parse {
                        what: "scaler",
                        detail: format!("line {}: expected 'mean std'", i + 1),
                    })
            };
            let mean = parse(parts.next())?;
            let std = parse(parts.next())?;
            entries.push(ScalerEntry {
                name: name.to_string(),
                mean,
                std,
            });
        }
        Ok(Scaler { entries, dropped })
    }
}

/// Result of [`load_csv`]: the parsed matrix plus the names of non-numeric
/// columns that were dropped (callers should surface them as a warning).
#[derive(Debug)]
pub struct CsvLoad {
    pub matrix: FeatureMatrix,
    pub dropped_columns: Vec<String>,
}

/// Loads a CSV file with a header row. Columns whose first data cell does
/// not parse as a finite number are dropped (reported in
/// `dropped_columns`); the remaining columns become features in header
/// order. When `label_column` is given, that column must hold only 0/1
/// values and becomes the label vector.
pub fn load_csv(path: &Path, label_column: Option<&str>) -> Result<CsvLoad> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Parse {
                what: "csv",
                detail: format!("{other:?}"),
            },
        })?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse {
            what: "csv",
            detail: e.to_string(),
        })?
        .iter()
        .map(|s| s.to_string())
        .collect();

    let label_idx = match label_column {
        Some(name) => Some(
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingLabelColumn(name.to_string()))?,
        ),
        None => None,
    };

    let mut records = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            what: "csv",
            detail: format!("row {}: {e}", i + 1),
        })?;
        records.push(rec);
    }
    if records.is_empty() {
        return Err(Error::InvalidMatrix(format!(
            "{}: no data rows",
            path.display()
        )));
    }

    // Classify columns from the first data row: finite-numeric or dropped.
    let first = &records[0];
    let mut feature_cols = Vec::new();
    let mut dropped_columns = Vec::new();
    for (c, header) in headers.iter().enumerate() {
        if Some(c) == label_idx {
            continue;
        }
        match first.get(c).and_then(|s| s.parse::<f64>().ok()) {
            Some(v) if v.is_finite() => feature_cols.push(c),
            _ => dropped_columns.push(header.clone()),
        }
    }
    if feature_cols.is_empty() {
        return Err(Error::InvalidMatrix(format!(
            "{}: no numeric feature columns",
            path.display()
        )));
    }

    let d = feature_cols.len();
    let mut values = Vec::with_capacity(records.len() * d);
    let mut labels = label_idx.map(|_| Vec::with_capacity(records.len()));
    for (i, rec) in records.iter().enumerate() {
        for &c in &feature_cols {
            let raw = rec.get(c).unwrap_or("");
            let v: f64 = raw.parse().map_err(|_| Error::BadNumericCell {
                path: path.into(),
                row: i + 2, // 1-based, after the header
                column: headers[c].clone(),
                value: raw.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::BadNumericCell {
                    path: path.into(),
                    row: i + 2,
                    column: headers[c].clone(),
                    value: raw.to_string(),
                });
            }
            values.push(v);
        }
        if let (Some(c), Some(ys)) = (label_idx, labels.as_mut()) {
            let raw = rec.get(c).unwrap_or("");
            let y: f64 = raw.parse().map_err(|_| Error::NonBinaryLabel {
                path: path.into(),
                row: i + 2,
                value: raw.to_string(),
            })?;
            if y == 0.0 {
                ys.push(0);
            } else if y == 1.0 {
                ys.push(1);
            } else {
                return Err(Error::NonBinaryLabel {
                    path: path.into(),
                    row: i + 2,
                    value: raw.to_string(),
                });
            }
        }
    }

    let feature_names = feature_cols
        .iter()
        .map(|&c| headers[c].clone())
        .collect::<Vec<_>>();
    let matrix = FeatureMatrix::from_parts(feature_names, values, d, labels);
    Ok(CsvLoad {
        matrix,
        dropped_columns,
    })
}

/// Standardizes every feature to mean 0, population std 1. Zero-variance
/// features carry no split information and are dropped; they are recorded
/// in the scaler.
pub fn standardize(m: &FeatureMatrix) -> Result<(FeatureMatrix, Scaler)> {
    let n = m.n_rows();
    if n < 2 {
        return Err(Error::TooFewRows { need: 2, got: n });
    }
    let mut entries = Vec::new();
    let mut dropped = Vec::new();
    let mut retained = Vec::new();
    for j in 0..m.n_features() {
        let mean = (0..n).map(|i| m.value(i, j)).sum::<f64>() / n as f64;
        let var = (0..n).map(|i| (m.value(i, j) - mean).powi(2)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        if std > 0.0 {
            retained.push(j);
            entries.push(ScalerEntry {
                name: m.feature_names()[j].clone(),
                mean,
                std,
            });
        } else {
            dropped.push(m.feature_names()[j].clone());
        }
    }
    if retained.is_empty() {
        return Err(Error::AllFeaturesConstant);
    }
    let d = retained.len();
    let mut values = Vec::with_capacity(n * d);
    for i in 0..n {
        for (k, &j) in retained.iter().enumerate() {
            values.push((m.value(i, j) - entries[k].mean) / entries[k].std);
        }
    }
    let names = entries.iter().map(|e| e.name.clone()).collect();
    let scaled = FeatureMatrix::from_parts(names, values, d, m.labels.clone());
    Ok((scaled, Scaler { entries, dropped }))
}

/// Maps a threshold in scaled units back to original feature units.
pub fn inverse_transform_threshold(s: &Scaler, feature: usize, t: f64) -> Result<f64> {
    Ok(t * s.std(feature)? + s.mean(feature)?)
}

/// Per-feature column min/max.
pub fn compute_domain(m: &FeatureMatrix) -> DomainBounds {
    let n = m.n_rows();
    let bounds = (0..m.n_features())
        .map(|j| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for i in 0..n {
                let v = m.value(i, j);
                lo = lo.min(v);
                hi = hi.max(v);
            }
            (lo, hi)
        })
        .collect();
    DomainBounds { bounds }
}

/// Takes a contiguous window of `n` rows; the start offset is drawn
/// uniformly from the seed. Contiguity preserves the stream's temporal
/// order.
pub fn subsample_stream(m: &FeatureMatrix, n: usize, seed: u64) -> Result<FeatureMatrix> {
    let total = m.n_rows();
    if total < n {
        return Err(Error::StreamTooShort { want: n, got: total });
    }
    let mut rng = seeds::rng(seed, &[TAG_SUBSAMPLE]);
    let start = rng.gen_range(0..=total - n);
    Ok(m.slice_rows(start..start + n))
}

/// Splits at an index k drawn uniformly from [⌈n/3⌉, ⌊2n/3⌋]; the first
/// part is rows [0, k), the second rows [k, n).
pub fn split_at_random_point(
    m: &FeatureMatrix,
    seed: u64,
) -> Result<(FeatureMatrix, FeatureMatrix)> {
    let k = random_split_index(m.n_rows(), seed)?;
    Ok((m.slice_rows(0..k), m.slice_rows(k..m.n_rows())))
}

/// The split index used by [`split_at_random_point`], exposed so callers
/// that need the first split in isolation draw the same k.
pub fn random_split_index(n: usize, seed: u64) -> Result<usize> {
    if n < 3 {
        return Err(Error::TooFewRows { need: 3, got: n });
    }
    let lo = n.div_ceil(3);
    let hi = 2 * n / 3;
    let mut rng = seeds::rng(seed, &[TAG_SPLIT_POINT]);
    Ok(rng.gen_range(lo..=hi))
}

/// Random 70/30-style row partition with sizes ⌈(1−f)·n⌉ / ⌊f·n⌋.
/// When labels are present the partition is stratified per class so that
/// heavily imbalanced disagreement labels keep stable test-set ratios.
/// Both outputs preserve the input's row order.
pub fn train_test_split(
    m: &FeatureMatrix,
    test_fraction: f64,
    seed: u64,
) -> Result<(FeatureMatrix, FeatureMatrix)> {
    let n = m.n_rows();
    if n < 2 {
        return Err(Error::TooFewRows { need: 2, got: n });
    }
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(Error::InvalidMatrix(format!(
            "test fraction {test_fraction} outside [0, 1)"
        )));
    }
    let test_n = exact_floor(n as f64 * test_fraction);
    let mut rng = seeds::rng(seed, &[TAG_TRAIN_TEST]);

    let mut is_test = vec![false; n];
    match m.labels() {
        Some(y) => {
            let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
            for (i, &c) in y.iter().enumerate() {
                by_class[c as usize].push(i);
            }
            // Largest-remainder allocation of the test quota across classes.
            let exact: Vec<f64> = by_class
                .iter()
                .map(|idx| idx.len() as f64 * test_fraction)
                .collect();
            let mut take: Vec<usize> = exact.iter().map(|&e| exact_floor(e)).collect();
            let mut rem: Vec<(usize, f64)> = exact
                .iter()
                .enumerate()
                .map(|(c, &e)| (c, e - take[c] as f64))
                .collect();
            rem.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
            let mut short = test_n.saturating_sub(take.iter().sum::<usize>());
            for &(c, _) in &rem {
                if short == 0 {
                    break;
                }
                if take[c] < by_class[c].len() {
                    take[c] += 1;
                    short -= 1;
                }
            }
            for (c, idx) in by_class.iter().enumerate() {
                let mut order: Vec<usize> = idx.clone();
                shuffle(&mut order, &mut rng);
                for &i in order.iter().take(take[c]) {
                    is_test[i] = true;
                }
            }
        }
        None => {
            let mut order: Vec<usize> = (0..n).collect();
            shuffle(&mut order, &mut rng);
            for &i in order.iter().take(test_n) {
                is_test[i] = true;
            }
        }
    }

    let train_idx: Vec<usize> = (0..n).filter(|&i| !is_test[i]).collect();
    let test_idx: Vec<usize> = (0..n).filter(|&i| is_test[i]).collect();
    Ok((m.take_rows(&train_idx), m.take_rows(&test_idx)))
}

/// Floor of a product like 0.3·n that is mathematically integral for many
/// n; the epsilon absorbs binary-representation error (0.3·10 ↦ 3, not 2).
fn exact_floor(x: f64) -> usize {
    (x + 1e-9).floor() as usize
}

fn shuffle<R: Rng>(idx: &mut [usize], rng: &mut R) {
    for i in (1..idx.len()).rev() {
        let j = rng.gen_range(0..=i);
        idx.swap(i, j);
    }
}
