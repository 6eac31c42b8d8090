//! Variable selection by mutual information with the target.
//!
//! Each candidate feature is scored by its estimated MI with the target
//! column — a rank-based measure, so monotone recalibration of either
//! variable changes nothing — and features are ranked by that score.
//! Selection then keeps the top `m`, or everything above a threshold.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::entropy::{mutual_information, EstimatorParams};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// One feature's score.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionEntry<F: Real> {
    pub feature: String,
    pub mi_nats: F,
}

/// How the `selected` list was cut from the ranking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionCriterion<F: Real> {
    TopM { m: usize },
    Threshold { tau: F },
}

/// Ranked MI scores plus the subset that survived the criterion (empty list
/// until one of the `select_*` functions is applied).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionReport<F: Real> {
    pub target: String,
    /// All candidates, sorted by MI descending; ties broken by feature name
    /// so the order never depends on thread scheduling.
    pub entries: Vec<SelectionEntry<F>>,
    pub selected: Vec<String>,
    pub criterion: Option<SelectionCriterion<F>>,
    pub params: EstimatorParams,
}

impl<F: Real> SelectionReport<F> {
    /// The ranking as a two-column CSV, in ranking order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature,mi_nats\n");
        for e in &self.entries {
            out.push_str(&format!("{},{}\n", e.feature, e.mi_nats));
        }
        out
    }

    pub fn to_json(&self) -> String
    where
        F: serde::Serialize,
    {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Score every feature against the target and rank them.
///
/// The per-feature estimates are independent, so they run in parallel; the
/// final ordering is by `(−MI, name)` and therefore deterministic.
pub fn rank_features<F: Real>(
    data: &Dataset<F>,
    target: &str,
    features: &[String],
    params: &EstimatorParams,
) -> Result<SelectionReport<F>> {
    if features.is_empty() {
        return Err(Error::InvalidParameter(
            "no candidate features given".into(),
        ));
    }
    data.column(target)?; // existence check with a decent error
    for (i, f) in features.iter().enumerate() {
        if f == target {
            return Err(Error::InvalidParameter(format!(
                "target {target:?} cannot be its own feature"
            )));
        }
        if features[..i].contains(f) {
            return Err(Error::DuplicateColumn(f.clone()));
        }
        data.column(f)?;
    }

    let mut entries: Vec<SelectionEntry<F>> = features
        .par_iter()
        .map(|f| {
            let pair = vec![f.clone(), target.to_string()];
            mutual_information(data, &pair, params).map(|mi| SelectionEntry {
                feature: f.clone(),
                mi_nats: mi,
            })
        })
        .collect::<Result<_>>()?;

    entries.sort_by(|a, b| {
        b.mi_nats
            .partial_cmp(&a.mi_nats)
            .expect("finite MI")
            .then_with(|| a.feature.cmp(&b.feature))
    });

    Ok(SelectionReport {
        target: target.to_string(),
        entries,
        selected: Vec::new(),
        criterion: None,
        params: *params,
    })
}

/// Keep the `m` best-ranked features. `m` must be in `1..=n_candidates`.
pub fn select_top<F: Real>(report: &SelectionReport<F>, m: usize) -> Result<SelectionReport<F>> {
    if m < 1 || m > report.entries.len() {
        return Err(Error::InvalidParameter(format!(
            "top-m must satisfy 1 <= m <= {} candidates, got {m}",
            report.entries.len()
        )));
    }
    let mut out = report.clone();
    out.selected = out.entries[..m].iter().map(|e| e.feature.clone()).collect();
    out.criterion = Some(SelectionCriterion::TopM { m });
    Ok(out)
}

/// Keep every feature with `MI > tau`. The result may be empty; whether that
/// is an error is the caller's call.
pub fn select_threshold<F: Real>(report: &SelectionReport<F>, tau: F) -> SelectionReport<F> {
    let mut out = report.clone();
    out.selected = out
        .entries
        .iter()
        .filter(|e| e.mi_nats > tau)
        .map(|e| e.feature.clone())
        .collect();
    out.criterion = Some(SelectionCriterion::Threshold { tau });
    out
}
