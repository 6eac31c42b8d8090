//! Regression metrics with the stratified reporting used in photometric
//! redshift work.
//!
//! Besides RMSE and MAE, predictions are scored on the normalized residual
//! `δ = (ŷ − y) / (1 + y)`: `σ_NMAD = 1.4826·median(|δ − median(δ)|)` is a
//! robust spread, and the outlier fraction counts `|δ| > 0.15`. Rows are
//! additionally binned by the true value into `[0,2]`, `(2,4]` and `(4,∞)`
//! — the yardstick bands for low-, mid- and high-redshift objects. The first
//! bin absorbs everything below 2 so the bins always partition the sample;
//! bins with no rows are omitted rather than reported as NaN.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Scale factor that makes the MAD of a normal sample estimate its σ.
pub const NMAD_SCALE: f64 = 1.4826;

/// Normalized-residual magnitude above which a prediction counts as an
/// outlier.
pub const OUTLIER_CUT: f64 = 0.15;

/// Scores for one set of rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Metrics<F: Real> {
    pub count: usize,
    pub rmse: F,
    pub mae: F,
    pub sigma_nmad: F,
    pub outlier_fraction: F,
}

/// Scores for one true-value stratum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinMetrics<F: Real> {
    pub range: String,
    #[serde(flatten)]
    pub metrics: Metrics<F>,
}

/// Overall scores plus the non-empty strata, in bin order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport<F: Real> {
    pub overall: Metrics<F>,
    pub bins: Vec<BinMetrics<F>>,
}

impl<F: Real> EvalReport<F> {
    /// One row per scope: overall first, then each non-empty bin.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scope,count,rmse,mae,sigma_nmad,outlier_fraction\n");
        let mut push = |scope: &str, m: &Metrics<F>| {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                scope, m.count, m.rmse, m.mae, m.sigma_nmad, m.outlier_fraction
            ));
        };
        push("overall", &self.overall);
        for b in &self.bins {
            push(&b.range, &b.metrics);
        }
        out
    }
}

const BIN_LABELS: [&str; 3] = ["[0,2]", "(2,4]", "(4,inf)"];

fn bin_of<F: Real>(truth: F) -> usize {
    if truth <= F::of(2.0) {
        0
    } else if truth <= F::of(4.0) {
        1
    } else {
        2
    }
}

fn median<F: Real>(values: &mut [F]) -> F {
    values.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / F::of(2.0)
    }
}

fn score<F: Real>(pairs: &[(F, F)]) -> Metrics<F> {
    let n = pairs.len();
    let n_f = F::of_usize(n);
    let mut se = F::zero();
    let mut ae = F::zero();
    let mut deltas: Vec<F> = Vec::with_capacity(n);
    let mut outliers = 0usize;
    for &(pred, truth) in pairs {
        let err = pred - truth;
        se += err * err;
        ae += err.abs();
        let delta = err / (F::one() + truth);
        if delta.abs() > F::of(OUTLIER_CUT) {
            outliers += 1;
        }
        deltas.push(delta);
    }
    let med = median(&mut deltas.clone());
    let mut abs_dev: Vec<F> = deltas.iter().map(|&d| (d - med).abs()).collect();
    let mad = median(&mut abs_dev);
    Metrics {
        count: n,
        rmse: (se / n_f).sqrt(),
        mae: ae / n_f,
        sigma_nmad: F::of(NMAD_SCALE) * mad,
        outlier_fraction: F::of_usize(outliers) / n_f,
    }
}

/// Score predictions against truth, overall and per stratum.
///
/// Requires equal, non-zero lengths, finite values, and `truth > −1` so the
/// normalized residual is well defined.
pub fn evaluate<F: Real>(predicted: &[F], actual: &[F]) -> Result<EvalReport<F>> {
    if predicted.len() != actual.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions for {} truths",
            predicted.len(),
            actual.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::TooFewSamples { rows: 0, min: 1 });
    }
    if predicted.iter().chain(actual).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "evaluation inputs".into(),
        });
    }
    if actual.iter().any(|&t| t <= F::of(-1.0)) {
        return Err(Error::InvalidParameter(
            "normalized residuals need every true value > -1".into(),
        ));
    }

    let pairs: Vec<(F, F)> = predicted
        .iter()
        .copied()
        .zip(actual.iter().copied())
        .collect();
    let mut binned: [Vec<(F, F)>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for &(p, t) in &pairs {
        binned[bin_of(t)].push((p, t));
    }
    let bins = BIN_LABELS
        .iter()
        .zip(&binned)
        .filter(|(_, rows)| !rows.is_empty())
        .map(|(label, rows)| BinMetrics {
            range: label.to_string(),
            metrics: score(rows),
        })
        .collect();

    Ok(EvalReport {
        overall: score(&pairs),
        bins,
    })
}
