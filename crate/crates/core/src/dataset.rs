//! Right-censored survival datasets: CSV loading, variance filtering, and
//! discretization of follow-up times onto a fixed interval grid.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hazard::ObservedOutcome;

/// Whether a feature column is a conventional clinical measure or a
/// derived brain-morphometry-style feature. Grouping logic in the
/// evaluation harness keys off this tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Conventional,
    Dbm,
}

/// Which CSV columns hold what. Feature columns named in `conventional`
/// are tagged [`FeatureKind::Conventional`]; everything else (listed in
/// `dbm` or unlisted) is tagged [`FeatureKind::Dbm`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub time: String,
    pub event: String,
    #[serde(default)]
    pub conventional: Vec<String>,
    #[serde(default)]
    pub dbm: Vec<String>,
}

impl DatasetSchema {
    /// Schema with just time/event names and every feature treated as DBM.
    pub fn plain(time: &str, event: &str) -> Self {
        Self {
            time: time.into(),
            event: event.into(),
            conventional: Vec::new(),
            dbm: Vec::new(),
        }
    }
}

/// An in-memory dataset: an `N x M` feature matrix plus follow-up times and
/// event indicators. Construction validates every invariant once; the rest
/// of the crate can then assume clean data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurvivalDataset {
    features: Array2<f64>,
    feature_names: Vec<String>,
    kinds: Vec<FeatureKind>,
    times: Vec<f64>,
    events: Vec<bool>,
}

impl SurvivalDataset {
    pub fn new(
        features: Array2<f64>,
        feature_names: Vec<String>,
        kinds: Vec<FeatureKind>,
        times: Vec<f64>,
        events: Vec<bool>,
    ) -> Result<Self> {
        let (n, m) = features.dim();
        if n == 0 {
            return Err(Error::InvalidInput("dataset has no rows".into()));
        }
        if feature_names.len() != m || kinds.len() != m {
            return Err(Error::InvalidInput(format!(
                "feature metadata mismatch: {m} columns, {} names, {} kinds",
                feature_names.len(),
                kinds.len()
            )));
        }
        if times.len() != n || events.len() != n {
            return Err(Error::InvalidInput(format!(
                "outcome length mismatch: {n} rows, {} times, {} events",
                times.len(),
                events.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if name.is_empty() {
                return Err(Error::InvalidInput("empty feature name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate feature name {name:?}")));
            }
        }
        for (i, &t) in times.iter().enumerate() {
            if !t.is_finite() || t <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "time {t} at row {i} is not strictly positive and finite"
                )));
            }
        }
        for &v in features.iter() {
            if !v.is_finite() {
                return Err(Error::InvalidInput("non-finite feature value".into()));
            }
        }
        Ok(Self { features, feature_names, kinds, times, events })
    }

    pub fn n_rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_events(&self) -> usize {
        self.events.iter().filter(|&&e| e).count()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn name(&self, j: usize) -> &str {
        &self.feature_names[j]
    }

    pub fn kind(&self, j: usize) -> FeatureKind {
        self.kinds[j]
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.kinds
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn events(&self) -> &[bool] {
        &self.events
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.features.column(j)
    }

    /// Column indices carrying the given tag, in dataset order.
    pub fn columns_of_kind(&self, kind: FeatureKind) -> Vec<usize> {
        (0..self.n_features()).filter(|&j| self.kinds[j] == kind).collect()
    }

    /// Materialize a row/column subset as a new dataset. Row indices may
    /// repeat; column indices must not (names stay unique).
    pub fn subset(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        if rows.is_empty() || cols.is_empty() {
            return Err(Error::InvalidInput("subset needs at least one row and one column".into()));
        }
        for &i in rows {
            if i >= self.n_rows() {
                return Err(Error::InvalidInput(format!("row index {i} out of range")));
            }
        }
        let mut seen = HashSet::new();
        for &j in cols {
            if j >= self.n_features() {
                return Err(Error::InvalidInput(format!("column index {j} out of range")));
            }
            if !seen.insert(j) {
                return Err(Error::InvalidInput(format!("duplicate column index {j} in subset")));
            }
        }
        let mut features = Array2::zeros((rows.len(), cols.len()));
        for (ri, &i) in rows.iter().enumerate() {
            for (cj, &j) in cols.iter().enumerate() {
                features[(ri, cj)] = self.features[(i, j)];
            }
        }
        Self::new(
            features,
            cols.iter().map(|&j| self.feature_names[j].clone()).collect(),
            cols.iter().map(|&j| self.kinds[j]).collect(),
            rows.iter().map(|&i| self.times[i]).collect(),
            rows.iter().map(|&i| self.events[i]).collect(),
        )
    }

    /// All rows, DBM-tagged columns only.
    pub fn dbm_view(&self) -> Result<Self> {
        let rows: Vec<usize> = (0..self.n_rows()).collect();
        self.subset(&rows, &self.columns_of_kind(FeatureKind::Dbm))
    }

    /// A copy with column `j` replaced by `values` (used for permutation
    /// tests; everything else is shared state re-validated on construction).
    pub fn with_column(&self, j: usize, values: Vec<f64>) -> Result<Self> {
        if j >= self.n_features() {
            return Err(Error::InvalidInput(format!("column index {j} out of range")));
        }
        if values.len() != self.n_rows() {
            return Err(Error::InvalidInput(format!(
                "replacement column has {} values for {} rows",
                values.len(),
                self.n_rows()
            )));
        }
        let mut features = self.features.clone();
        for (i, v) in values.into_iter().enumerate() {
            features[(i, j)] = v;
        }
        Self::new(
            features,
            self.feature_names.clone(),
            self.kinds.clone(),
            self.times.clone(),
            self.events.clone(),
        )
    }

    /// Drop features whose sample variance (n-1 denominator) falls below
    /// `threshold`, keeping anything named in `protected` regardless.
    /// Order-preserving and idempotent.
    pub fn variance_filter(&self, threshold: f64, protected: &[String]) -> Result<Self> {
        if !threshold.is_finite() || threshold < 0.0 {
            return Err(Error::InvalidInput(format!("variance threshold {threshold} must be >= 0")));
        }
        for name in protected {
            if self.index_of(name).is_none() {
                return Err(Error::InvalidInput(format!(
                    "protected feature {name:?} is not in the dataset"
                )));
            }
        }
        let n = self.n_rows() as f64;
        let keep: Vec<usize> = (0..self.n_features())
            .filter(|&j| {
                if protected.iter().any(|p| p == &self.feature_names[j]) {
                    return true;
                }
                if self.n_rows() < 2 {
                    return false;
                }
                let col = self.features.column(j);
                let mean = col.sum() / n;
                let var = col.iter().map(|&v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
                var >= threshold
            })
            .collect();
        if keep.is_empty() {
            return Err(Error::InvalidInput(format!(
                "variance filter at threshold {threshold} removed every feature"
            )));
        }
        let rows: Vec<usize> = (0..self.n_rows()).collect();
        self.subset(&rows, &keep)
    }

    /// Map every observed time onto `grid`, yielding one outcome per row.
    pub fn discretize(&self, grid: &TimeGrid) -> Result<Vec<ObservedOutcome>> {
        self.times
            .iter()
            .zip(&self.events)
            .map(|(&t, &e)| Ok(ObservedOutcome { q: grid.interval_of(t)?, event: e }))
            .collect()
    }

    /// Load from CSV. Any unparseable or empty cell is a hard error with its
    /// location; there is no imputation path. Lines starting with `#` are
    /// metadata comments and skipped.
    pub fn load_csv<P: AsRef<Path>>(path: P, schema: &DatasetSchema) -> Result<Self> {
        let path_str = path.as_ref().display().to_string();
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path.as_ref())?;

        let headers: Vec<String> = reader.headers()?.iter().map(|h| h.to_string()).collect();
        let mut seen = HashSet::new();
        for h in &headers {
            if !seen.insert(h.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "duplicate column {h:?} in {path_str}"
                )));
            }
        }
        let col_idx = |name: &str| headers.iter().position(|h| h == name);
        let time_idx = col_idx(&schema.time).ok_or_else(|| {
            Error::InvalidInput(format!("time column {:?} not found in {path_str}", schema.time))
        })?;
        let event_idx = col_idx(&schema.event).ok_or_else(|| {
            Error::InvalidInput(format!("event column {:?} not found in {path_str}", schema.event))
        })?;
        for name in schema.conventional.iter().chain(&schema.dbm) {
            if col_idx(name).is_none() {
                return Err(Error::InvalidInput(format!(
                    "schema column {name:?} not found in {path_str}"
                )));
            }
            if name == &schema.time || name == &schema.event {
                return Err(Error::InvalidInput(format!(
                    "schema lists outcome column {name:?} as a feature"
                )));
            }
        }
        for name in &schema.conventional {
            if schema.dbm.contains(name) {
                return Err(Error::InvalidInput(format!(
                    "column {name:?} is listed as both conventional and dbm"
                )));
            }
        }

        let feature_cols: Vec<usize> =
            (0..headers.len()).filter(|&j| j != time_idx && j != event_idx).collect();
        let feature_names: Vec<String> =
            feature_cols.iter().map(|&j| headers[j].clone()).collect();
        let kinds: Vec<FeatureKind> = feature_names
            .iter()
            .map(|name| {
                if schema.conventional.contains(name) {
                    FeatureKind::Conventional
                } else {
                    FeatureKind::Dbm
                }
            })
            .collect();

        let mut times = Vec::new();
        let mut events = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        for (row_idx, record) in reader.records().enumerate() {
            let record = record?;
            let row = row_idx + 1;
            if record.len() != headers.len() {
                return Err(Error::BadData {
                    path: path_str.clone(),
                    row,
                    column: "<record>".into(),
                    message: format!("expected {} fields, found {}", headers.len(), record.len()),
                });
            }
            let cell = |j: usize| -> &str { record.get(j).unwrap_or("") };
            let bad = |column: &str, message: String| Error::BadData {
                path: path_str.clone(),
                row,
                column: column.to_string(),
                message,
            };

            let t_raw = cell(time_idx);
            let t: f64 = t_raw
                .parse()
                .map_err(|_| bad(&schema.time, format!("unparseable time {t_raw:?}")))?;
            if !t.is_finite() || t <= 0.0 {
                return Err(bad(&schema.time, format!("time {t} must be strictly positive")));
            }
            times.push(t);

            let e_raw = cell(event_idx);
            let e: i64 = e_raw
                .parse()
                .map_err(|_| bad(&schema.event, format!("event indicator {e_raw:?} must be the integer 0 or 1")))?;
            match e {
                0 => events.push(false),
                1 => events.push(true),
                other => {
                    return Err(bad(&schema.event, format!("event indicator {other} must be 0 or 1")))
                }
            }

            for (&j, name) in feature_cols.iter().zip(&feature_names) {
                let raw = cell(j);
                if raw.is_empty() {
                    return Err(bad(name, "missing value".into()));
                }
                let v: f64 = raw
                    .parse()
                    .map_err(|_| bad(name, format!("unparseable value {raw:?}")))?;
                if !v.is_finite() {
                    return Err(bad(name, format!("non-finite value {v}")));
                }
                values.push(v);
            }
        }
        if times.is_empty() {
            return Err(Error::InvalidInput(format!("{path_str} contains no data rows")));
        }
        let n = times.len();
        let m = feature_cols.len();
        let features = Array2::from_shape_vec((n, m), values)
            .map_err(|e| Error::InvalidInput(format!("shape error reading {path_str}: {e}")))?;
        Self::new(features, feature_names, kinds, times, events)
    }

    /// Write as CSV: optional `# `-prefixed metadata lines, a header row of
    /// `time,event,<features...>`, then data. Floats use Rust's shortest
    /// round-trip formatting, so a load of this file reproduces the exact
    /// same values.
    pub fn write_csv<P: AsRef<Path>>(&self, path: P, metadata_lines: &[String]) -> Result<()> {
        let file = File::create(path.as_ref())?;
        let mut w = BufWriter::new(file);
        for line in metadata_lines {
            writeln!(w, "# {line}")?;
        }
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["time".to_string(), "event".to_string()];
        header.extend(self.feature_names.iter().cloned());
        wtr.write_record(&header)?;
        for i in 0..self.n_rows() {
            let mut record = Vec::with_capacity(2 + self.n_features());
            record.push(format!("{}", self.times[i]));
            record.push(if self.events[i] { "1".to_string() } else { "0".to_string() });
            for j in 0..self.n_features() {
                record.push(format!("{}", self.features[(i, j)]));
            }
            wtr.write_record(&record)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// The schema matching what [`write_csv`](Self::write_csv) produced.
    pub fn schema(&self) -> DatasetSchema {
        DatasetSchema {
            time: "time".into(),
            event: "event".into(),
            conventional: (0..self.n_features())
                .filter(|&j| self.kinds[j] == FeatureKind::Conventional)
                .map(|j| self.feature_names[j].clone())
                .collect(),
            dbm: (0..self.n_features())
                .filter(|&j| self.kinds[j] == FeatureKind::Dbm)
                .map(|j| self.feature_names[j].clone())
                .collect(),
        }
    }
}

/// How interval boundaries are placed over the observed time range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binning {
    #[default]
    EqualWidth,
    Quantile,
}

/// `d + 1` strictly increasing boundaries over `[0, max_time * (1 + 1e-9)]`.
/// Interval `s` is `[b[s], b[s+1])`; the nudged upper end makes the last
/// interval effectively closed at the observed maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    boundaries: Vec<f64>,
}

/// Relative nudge applied above the maximum observed time so the maximum
/// itself falls inside the last half-open interval.
const SPAN_NUDGE: f64 = 1e-9;

impl TimeGrid {
    /// Equal-width intervals covering all of `times`.
    pub fn equal_width(times: &[f64], d: usize) -> Result<Self> {
        let span = Self::span(times, d)?;
        let boundaries = (0..=d).map(|s| span * s as f64 / d as f64).collect();
        Ok(Self { boundaries })
    }

    /// Interval boundaries at quantiles of the observed times, so each
    /// interval holds roughly the same number of observations. Fails when
    /// there are too few distinct times to place `d` distinct boundaries.
    pub fn quantile(times: &[f64], d: usize) -> Result<Self> {
        let span = Self::span(times, d)?;
        let mut sorted = times.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut boundaries = vec![0.0];
        for s in 1..d {
            boundaries.push(crate::stats::quantile(&sorted, s as f64 / d as f64));
        }
        boundaries.push(span);
        for w in boundaries.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidInput(format!(
                    "quantile binning with d = {d} produced duplicate boundaries; \
                     too few distinct times"
                )));
            }
        }
        Ok(Self { boundaries })
    }

    pub fn from_binning(times: &[f64], d: usize, binning: Binning) -> Result<Self> {
        match binning {
            Binning::EqualWidth => Self::equal_width(times, d),
            Binning::Quantile => Self::quantile(times, d),
        }
    }

    fn span(times: &[f64], d: usize) -> Result<f64> {
        if d == 0 {
            return Err(Error::InvalidInput("grid needs at least one interval".into()));
        }
        if times.is_empty() {
            return Err(Error::InvalidInput("grid needs at least one observed time".into()));
        }
        let max = times.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() || max <= 0.0 {
            return Err(Error::InvalidInput(format!("maximum time {max} must be positive")));
        }
        Ok(max * (1.0 + SPAN_NUDGE))
    }

    pub fn d(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// End of the covered range (just above the maximum time the grid was
    /// built from).
    pub fn end(&self) -> f64 {
        *self.boundaries.last().unwrap()
    }

    /// 0-based interval containing `t`. Every time the grid was built from
    /// maps successfully; times beyond the covered range are an error.
    pub fn interval_of(&self, t: f64) -> Result<usize> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidInput(format!("time {t} is not in [0, inf)")));
        }
        let d = self.d();
        if t > self.end() {
            return Err(Error::InvalidInput(format!(
                "time {t} lies beyond the grid end {}",
                self.end()
            )));
        }
        // First d boundaries b[1..=d]: count how many are <= t. The clamp
        // closes the last interval at the grid end.
        let idx = self.boundaries[1..].partition_point(|&b| b <= t);
        Ok(idx.min(d - 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn toy(times: &[f64], events: &[bool]) -> SurvivalDataset {
        let n = times.len();
        let features = Array2::from_shape_fn((n, 2), |(i, j)| (i * 2 + j) as f64);
        SurvivalDataset::new(
            features,
            vec!["a".into(), "b".into()],
            vec![FeatureKind::Conventional, FeatureKind::Dbm],
            times.to_vec(),
            events.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn equal_width_maps_each_time_to_its_interval() {
        let times = [1.0, 2.0, 3.0, 4.0];
        let grid = TimeGrid::equal_width(&times, 4).unwrap();
        let qs: Vec<usize> = times.iter().map(|&t| grid.interval_of(t).unwrap()).collect();
        assert_eq!(qs, vec![0, 1, 2, 3]);
    }

    #[test]
    fn maximum_time_lands_in_last_interval() {
        let grid = TimeGrid::equal_width(&[5.0], 2).unwrap();
        assert_eq!(grid.interval_of(5.0).unwrap(), 1);
    }

    #[test]
    fn widths_are_equal_to_relative_tolerance() {
        let grid = TimeGrid::equal_width(&[0.3, 97.2, 14.0], 16).unwrap();
        let b = grid.boundaries();
        let w0 = b[1] - b[0];
        for w in b.windows(2) {
            assert!(((w[1] - w[0]) - w0).abs() <= 1e-9 * w0.abs());
        }
        assert_eq!(b[0], 0.0);
    }

    #[test]
    fn boundary_times_belong_to_the_right_interval() {
        let grid = TimeGrid::equal_width(&[4.0], 4).unwrap();
        // Interior boundary at ~2.0: a time exactly there opens interval 2.
        let b2 = grid.boundaries()[2];
        assert_eq!(grid.interval_of(b2).unwrap(), 2);
        assert_eq!(grid.interval_of(0.0).unwrap(), 0);
    }

    #[test]
    fn beyond_grid_end_is_an_error() {
        let grid = TimeGrid::equal_width(&[4.0], 4).unwrap();
        assert!(grid.interval_of(4.1).is_err());
    }

    #[test]
    fn quantile_binning_balances_counts() {
        let times: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let grid = TimeGrid::quantile(&times, 4).unwrap();
        let mut counts = [0usize; 4];
        for &t in &times {
            counts[grid.interval_of(t).unwrap()] += 1;
        }
        for c in counts {
            assert!((20..=30).contains(&c), "counts {counts:?}");
        }
    }

    #[test]
    fn quantile_binning_rejects_degenerate_times() {
        let times = vec![3.0; 50];
        assert!(TimeGrid::quantile(&times, 4).is_err());
    }

    #[test]
    fn discretize_covers_every_row() {
        let ds = toy(&[1.0, 2.0, 3.0, 4.0], &[true, false, true, false]);
        let grid = TimeGrid::equal_width(ds.times(), 4).unwrap();
        let outcomes = ds.discretize(&grid).unwrap();
        assert_eq!(outcomes.len(), 4);
        assert!(outcomes.iter().all(|o| o.q < 4));
        assert_eq!(outcomes[1].event, false);
    }

    #[test]
    fn variance_filter_keeps_varying_and_protected() {
        let features = array![
            [0.0, 5.0, 1.0],
            [1.0, 5.0, 1.0],
            [0.0, 5.0, 1.0],
            [1.0, 5.0, 1.0],
        ];
        let ds = SurvivalDataset::new(
            features,
            vec!["varies".into(), "flat".into(), "kept".into()],
            vec![FeatureKind::Dbm; 3],
            vec![1.0, 2.0, 3.0, 4.0],
            vec![true, true, false, false],
        )
        .unwrap();
        let filtered = ds.variance_filter(0.01, &["kept".to_string()]).unwrap();
        assert_eq!(filtered.feature_names(), &["varies".to_string(), "kept".to_string()]);
        // Idempotent: filtering again changes nothing.
        let again = filtered.variance_filter(0.01, &["kept".to_string()]).unwrap();
        assert_eq!(again.feature_names(), filtered.feature_names());
    }

    #[test]
    fn variance_filter_unknown_protected_errors() {
        let ds = toy(&[1.0, 2.0], &[true, false]);
        assert!(ds.variance_filter(0.01, &["nope".to_string()]).is_err());
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.csv");
        let features = array![
            [0.1, -2.5e-7, 3.0],
            [1.0 / 3.0, 5.5, 0.0],
        ];
        let ds = SurvivalDataset::new(
            features,
            vec!["x1".into(), "x2".into(), "x3".into()],
            vec![FeatureKind::Conventional, FeatureKind::Dbm, FeatureKind::Dbm],
            vec![0.25, 7.125],
            vec![true, false],
        )
        .unwrap();
        ds.write_csv(&path, &["tool=test".into()]).unwrap();
        let back = SurvivalDataset::load_csv(&path, &ds.schema()).unwrap();
        assert_eq!(back.features(), ds.features());
        assert_eq!(back.times(), ds.times());
        assert_eq!(back.events(), ds.events());
        assert_eq!(back.kind(0), FeatureKind::Conventional);
        assert_eq!(back.kind(1), FeatureKind::Dbm);
    }

    #[test]
    fn missing_cell_is_a_located_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "time,event,x\n1.0,1,0.5\n2.0,0,\n").unwrap();
        let err = SurvivalDataset::load_csv(&path, &DatasetSchema::plain("time", "event"))
            .unwrap_err();
        match err {
            Error::BadData { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "x");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn non_integer_event_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "time,event,x\n1.0,1.0,0.5\n").unwrap();
        assert!(SurvivalDataset::load_csv(&path, &DatasetSchema::plain("time", "event")).is_err());
        std::fs::write(&path, "time,event,x\n1.0,2,0.5\n").unwrap();
        assert!(SurvivalDataset::load_csv(&path, &DatasetSchema::plain("time", "event")).is_err());
    }

    #[test]
    fn non_positive_time_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "time,event,x\n0.0,1,0.5\n").unwrap();
        assert!(SurvivalDataset::load_csv(&path, &DatasetSchema::plain("time", "event")).is_err());
    }

    #[test]
    fn subset_preserves_metadata() {
        let ds = toy(&[1.0, 2.0, 3.0], &[true, false, true]);
        let sub = ds.subset(&[2, 0], &[1]).unwrap();
        assert_eq!(sub.n_rows(), 2);
        assert_eq!(sub.feature_names(), &["b".to_string()]);
        assert_eq!(sub.kind(0), FeatureKind::Dbm);
        assert_eq!(sub.times(), &[3.0, 1.0]);
        assert_eq!(sub.events(), &[true, true]);
    }
}
