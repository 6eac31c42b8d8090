//! Columnar numeric datasets: CSV ingestion, cleaning, role assignment and
//! deterministic train/test splitting.
//!
//! A [`Dataset`] is a named collection of equally long numeric columns. Data
//! arrives from CSV (photometric catalogues, synthetic samples) and may carry
//! survey sentinel values such as `-9999`; [`Dataset::clean`] drops affected
//! rows so that downstream estimators only ever see finite numbers.

use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// What a column means to the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnRole {
    /// Candidate predictor.
    Feature,
    /// The regression target (exactly one).
    Target,
    /// Present in the file but excluded from analysis.
    Ignored,
}

/// Resolved role assignment for one dataset.
///
/// Built from a target name plus optional explicit feature / ignored lists;
/// every column not otherwise mentioned becomes a feature.
#[derive(Debug, Clone)]
pub struct ColumnRoles {
    target: String,
    features: Vec<String>,
}

impl ColumnRoles {
    /// Assign roles by name. `features` empty means "all remaining columns
    /// except `target` and `ignored`", keeping the dataset's column order.
    pub fn assign(
        names: &[String],
        target: &str,
        features: &[String],
        ignored: &[String],
    ) -> Result<Self> {
        let exists = |n: &str| names.iter().any(|c| c == n);
        if !exists(target) {
            return Err(Error::UnknownColumn(target.to_string()));
        }
        for n in features.iter().chain(ignored) {
            if !exists(n) {
                return Err(Error::UnknownColumn(n.clone()));
            }
        }
        if ignored.iter().any(|n| n == target) {
            return Err(Error::InvalidParameter(format!(
                "target {target:?} is also listed as ignored"
            )));
        }
        let resolved: Vec<String> = if features.is_empty() {
            names
                .iter()
                .filter(|n| n.as_str() != target && !ignored.contains(n))
                .cloned()
                .collect()
        } else {
            if features.iter().any(|n| n == target) {
                return Err(Error::InvalidParameter(format!(
                    "target {target:?} is also listed as a feature"
                )));
            }
            if let Some(n) = features.iter().find(|n| ignored.contains(n)) {
                return Err(Error::InvalidParameter(format!(
                    "column {n:?} is both a feature and ignored"
                )));
            }
            let mut seen: Vec<&String> = Vec::new();
            for n in features {
                if seen.contains(&n) {
                    return Err(Error::DuplicateColumn(n.clone()));
                }
                seen.push(n);
            }
            features.to_vec()
        };
        if resolved.is_empty() {
            return Err(Error::InvalidParameter(
                "no feature columns remain after role assignment".into(),
            ));
        }
        Ok(Self {
            target: target.to_string(),
            features: resolved,
        })
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn role_of(&self, name: &str) -> ColumnRole {
        if name == self.target {
            ColumnRole::Target
        } else if self.features.iter().any(|f| f == name) {
            ColumnRole::Feature
        } else {
            ColumnRole::Ignored
        }
    }

    /// Target column followed by the features, the projection most commands use.
    pub fn analysis_columns(&self) -> Vec<String> {
        let mut cols = Vec::with_capacity(1 + self.features.len());
        cols.push(self.target.clone());
        cols.extend(self.features.iter().cloned());
        cols
    }
}

/// Row-removal policy for [`Dataset::clean`].
///
/// A row is dropped when any of its values is non-finite or equals one of the
/// sentinel codes. The defaults cover the magic numbers common in survey
/// catalogues.
#[derive(Debug, Clone)]
pub struct CleanPolicy<F: Real> {
    pub sentinels: Vec<F>,
}

impl<F: Real> Default for CleanPolicy<F> {
    fn default() -> Self {
        Self {
            sentinels: vec![F::of(-9999.0), F::of(-99.0), F::of(9999.0)],
        }
    }
}

impl<F: Real> CleanPolicy<F> {
    fn keeps(&self, v: F) -> bool {
        v.is_finite() && !self.sentinels.iter().any(|s| *s == v)
    }
}

/// Named numeric columns of equal length, stored column-major.
#[derive(Debug, Clone)]
pub struct Dataset<F: Real> {
    names: Vec<String>,
    columns: Vec<Vec<F>>,
    rows: usize,
}

impl<F: Real> Dataset<F> {
    /// Build a dataset from columns, validating names and lengths.
    pub fn new(names: Vec<String>, columns: Vec<Vec<F>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        if names.is_empty() {
            return Err(Error::InvalidParameter("dataset has no columns".into()));
        }
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() {
                return Err(Error::InvalidParameter(format!(
                    "column {} has an empty name",
                    i + 1
                )));
            }
            if names[..i].contains(n) {
                return Err(Error::DuplicateColumn(n.clone()));
            }
        }
        let rows = columns[0].len();
        if let Some(c) = columns.iter().position(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch(format!(
                "column {:?} has {} rows, expected {}",
                names[c],
                columns[c].len(),
                rows
            )));
        }
        Ok(Self {
            names,
            columns,
            rows,
        })
    }

    /// Read a CSV file. With `has_header == false` columns are named
    /// `c1..cN` in file order.
    pub fn load_csv<P: AsRef<Path>>(path: P, has_header: bool) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_csv_reader(file, has_header)
    }

    /// Read CSV from any reader. Rows are validated for width and every field
    /// must parse as a number; `NaN`/`inf` parse but are left for [`clean`]
    /// to remove.
    ///
    /// [`clean`]: Dataset::clean
    pub fn from_csv_reader<R: Read>(reader: R, has_header: bool) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(has_header)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);

        let mut names: Vec<String> = Vec::new();
        if has_header {
            let headers = rdr
                .headers()
                .map_err(|e| Error::InvalidParameter(format!("bad header: {e}")))?;
            names = headers.iter().map(|h| h.to_string()).collect();
        }

        let mut columns: Vec<Vec<F>> = names.iter().map(|_| Vec::new()).collect();
        for (i, record) in rdr.records().enumerate() {
            let row = i + 1; // 1-based data rows, header not counted
            let record = record.map_err(|e| Error::InvalidParameter(format!("row {row}: {e}")))?;
            if names.is_empty() {
                // Headerless file: width is set by the first row.
                names = (1..=record.len()).map(|j| format!("c{j}")).collect();
                columns = names.iter().map(|_| Vec::new()).collect();
            }
            if record.len() != names.len() {
                return Err(Error::RaggedRow {
                    row,
                    found: record.len(),
                    expected: names.len(),
                });
            }
            for (j, field) in record.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| Error::BadField {
                    row,
                    column: j + 1,
                    name: names[j].clone(),
                    value: field.to_string(),
                })?;
                columns[j].push(F::of(v));
            }
        }
        Self::new(names, columns)
    }

    /// Write the dataset as CSV with a header row.
    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let path = path.as_ref();
        let io_err = |source| Error::Io {
            path: path.display().to_string(),
            source,
        };
        let mut out = String::new();
        out.push_str(&self.names.join(","));
        out.push('\n');
        for r in 0..self.rows {
            for (j, col) in self.columns.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&col[r].to_string());
            }
            out.push('\n');
        }
        std::fs::write(path, out).map_err(io_err)
    }

    pub fn row_count(&self) -> usize {
        self.rows
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<&[F]> {
        Ok(&self.columns[self.column_index(name)?])
    }

    /// Project onto the named columns, in the given order.
    pub fn select_columns(&self, names: &[String]) -> Result<Self> {
        let mut cols = Vec::with_capacity(names.len());
        for n in names {
            cols.push(self.column(n)?.to_vec());
        }
        Self::new(names.to_vec(), cols)
    }

    /// Drop every row containing a sentinel or non-finite value in any column.
    /// Returns the cleaned dataset and the number of rows removed. Applying
    /// the same policy twice removes nothing the second time.
    pub fn clean(&self, policy: &CleanPolicy<F>) -> (Self, usize) {
        let keep: Vec<usize> = (0..self.rows)
            .filter(|&r| self.columns.iter().all(|c| policy.keeps(c[r])))
            .collect();
        let removed = self.rows - keep.len();
        let columns = self
            .columns
            .iter()
            .map(|c| keep.iter().map(|&r| c[r]).collect())
            .collect();
        (
            Self {
                names: self.names.clone(),
                columns,
                rows: keep.len(),
            },
            removed,
        )
    }

    /// Deterministic seeded train/test split. The row order of each side is
    /// the shuffled order, so the same `(fraction, seed)` always reproduces
    /// the same two datasets.
    pub fn split(&self, train_fraction: f64, seed: u64) -> Result<(Self, Self)> {
        let (train_idx, test_idx) = split_indices(self.rows, train_fraction, seed)?;
        Ok((self.take_rows(&train_idx), self.take_rows(&test_idx)))
    }

    fn take_rows(&self, idx: &[u32]) -> Self {
        let columns = self
            .columns
            .iter()
            .map(|c| idx.iter().map(|&r| c[r as usize]).collect())
            .collect();
        Self {
            names: self.names.clone(),
            columns,
            rows: idx.len(),
        }
    }
}

/// Shuffle `0..rows` with ChaCha12 keyed by `seed` and cut at
/// `ceil(train_fraction * rows)`. Exposed so callers can hash or log the
/// exact membership of a split.
pub fn split_indices(rows: usize, train_fraction: f64, seed: u64) -> Result<(Vec<u32>, Vec<u32>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train_fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    if rows < 2 {
        return Err(Error::TooFewSamples { rows, min: 2 });
    }
    let mut idx: Vec<u32> = (0..rows as u32).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let n_train = (train_fraction * rows as f64).ceil() as usize;
    if n_train == 0 || n_train >= rows {
        return Err(Error::InvalidParameter(format!(
            "split of {rows} rows at fraction {train_fraction} leaves an empty side"
        )));
    }
    let test = idx.split_off(n_train);
    Ok((idx, test))
}
