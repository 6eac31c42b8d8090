//! Nonlinear regressors for the photo-z-style benchmark, plus evaluation.
//!
//! Two model families: bagged regression trees ([`forest`]) and
//! ε-insensitive support vector regression with an RBF kernel ([`svr`]).
//! Both train on a plain row-major [`Matrix`] and implement [`Regressor`];
//! [`Model`] wraps either for serialization. [`metrics`] scores predictions
//! overall and per redshift bin.

pub mod forest;
pub mod metrics;
pub mod svr;
mod tree;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub use forest::{train_forest, ForestModel, ForestParams};
pub use metrics::{evaluate, BinMetrics, EvalReport, Metrics};
pub use svr::{train_svr, train_svr_traced, SvrModel, SvrParams, SvrTrace};

/// Dense row-major feature matrix with finite entries.
#[derive(Debug, Clone)]
pub struct Matrix<F: Real> {
    data: Vec<F>,
    rows: usize,
    cols: usize,
}

impl<F: Real> Matrix<F> {
    pub fn from_rows(rows: Vec<Vec<F>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::TooFewSamples { rows: 0, min: 1 });
        }
        let cols = rows[0].len();
        if cols == 0 {
            return Err(Error::InvalidParameter(
                "matrix needs at least one column".into(),
            ));
        }
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} values, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::from_flat(data, rows.len(), cols)
    }

    /// Assemble the named dataset columns into a feature matrix.
    pub fn from_dataset(data: &Dataset<F>, feature_names: &[String]) -> Result<Self> {
        if feature_names.is_empty() {
            return Err(Error::InvalidParameter(
                "matrix needs at least one column".into(),
            ));
        }
        let cols: Vec<&[F]> = feature_names
            .iter()
            .map(|n| data.column(n))
            .collect::<Result<_>>()?;
        let rows = data.row_count();
        let mut flat = Vec::with_capacity(rows * cols.len());
        for r in 0..rows {
            for c in &cols {
                flat.push(c[r]);
            }
        }
        Self::from_flat(flat, rows, cols.len())
    }

    fn from_flat(data: Vec<F>, rows: usize, cols: usize) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "feature matrix".into(),
            });
        }
        Ok(Self { data, rows, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> F {
        self.data[r * self.cols + c]
    }
}

/// Anything that maps feature rows to a numeric prediction.
pub trait Regressor<F: Real> {
    /// Number of features the model was trained on.
    fn n_features(&self) -> usize;

    /// Predict a single (unstandardized) feature row.
    fn predict_row(&self, row: &[F]) -> F;

    /// Predict every row of a matrix, checking the width once.
    fn predict(&self, x: &Matrix<F>) -> Result<Vec<F>> {
        if x.cols() != self.n_features() {
            return Err(Error::DimensionMismatch(format!(
                "model expects {} features, matrix has {}",
                self.n_features(),
                x.cols()
            )));
        }
        Ok((0..x.rows()).map(|r| self.predict_row(x.row(r))).collect())
    }
}

/// A trained model of either family, tagged for serialization.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model_type", rename_all = "snake_case")]
pub enum Model<F: Real> {
    Forest(ForestModel<F>),
    Svr(SvrModel<F>),
}

impl<F: Real> Regressor<F> for Model<F> {
    fn n_features(&self) -> usize {
        match self {
            Model::Forest(m) => m.n_features(),
            Model::Svr(m) => m.n_features(),
        }
    }

    fn predict_row(&self, row: &[F]) -> F {
        match self {
            Model::Forest(m) => m.predict_row(row),
            Model::Svr(m) => m.predict_row(row),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_from_dataset_orders_columns_as_asked() {
        let d = Dataset::new(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 2.0], vec![10.0, 20.0]],
        )
        .unwrap();
        let m = Matrix::from_dataset(&d, &["b".to_string(), "a".to_string()]).unwrap();
        assert_eq!(m.rows(), 2);
        assert_eq!(m.cols(), 2);
        assert_eq!(m.row(0), &[10.0, 1.0]);
        assert_eq!(m.row(1), &[20.0, 2.0]);
    }

    #[test]
    fn matrix_validation() {
        assert!(Matrix::<f64>::from_rows(vec![]).is_err());
        assert!(Matrix::from_rows(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(Matrix::from_rows(vec![vec![f64::NAN]]).is_err());
    }
}
