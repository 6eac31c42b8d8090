//! Bagged regression trees ("random forest" in the usual loose sense).
//!
//! Each tree trains on a bootstrap resample and considers a random feature
//! subset at every split. Trees grow in parallel, but each one owns a
//! ChaCha12 generator derived from `(seed, tree_index)` and results are
//! collected in tree order, so the trained model is byte-identical whatever
//! the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{GrowParams, Tree};
use super::{Matrix, Regressor};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::seeding::derive_seed;

/// Forest hyperparameters. `features_per_split: None` means `⌈d/3⌉`, the
/// customary regression default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub features_per_split: Option<usize>,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_leaf: 5,
            features_per_split: None,
            seed: 0,
        }
    }
}

/// A trained forest: the trees, plus per-feature importances normalized to
/// sum to one (all zeros when no tree ever split).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestModel<F: Real> {
    trees: Vec<Tree<F>>,
    n_features: usize,
    pub params: ForestParams,
    pub importance: Vec<F>,
}

/// Train a forest on `x` (rows = samples) against `y`.
pub fn train_forest<F: Real>(
    x: &Matrix<F>,
    y: &[F],
    params: &ForestParams,
) -> Result<ForestModel<F>> {
    if y.len() != x.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{} targets for {} rows",
            y.len(),
            x.rows()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "targets".into(),
        });
    }
    if params.n_trees < 1 {
        return Err(Error::InvalidParameter("n_trees must be at least 1".into()));
    }
    if params.min_leaf < 1 {
        return Err(Error::InvalidParameter(
            "min_leaf must be at least 1".into(),
        ));
    }
    let d = x.cols();
    let mtry = params.features_per_split.unwrap_or(d.div_ceil(3));
    if mtry < 1 || mtry > d {
        return Err(Error::InvalidParameter(format!(
            "features_per_split must be in 1..={d}, got {mtry}"
        )));
    }

    let n = x.rows();
    let grow = GrowParams {
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
        mtry,
    };

    let per_tree: Vec<(Tree<F>, Vec<F>)> = (0..params.n_trees)
        .into_par_iter()
        .map(|tree_idx| {
            let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(params.seed, tree_idx as u64));
            let mut items: Vec<u32> = (0..n).map(|_| rng.gen_range(0..n) as u32).collect();
            let mut importance = vec![F::zero(); d];
            let tree = Tree::grow(x, y, &mut items, &grow, &mut rng, &mut importance);
            (tree, importance)
        })
        .collect();

    // Fold in tree order: same bytes no matter how the pool scheduled them.
    let mut importance = vec![F::zero(); d];
    let mut trees = Vec::with_capacity(params.n_trees);
    for (tree, imp) in per_tree {
        for (total, g) in importance.iter_mut().zip(&imp) {
            *total += *g;
        }
        trees.push(tree);
    }
    let total: F = importance.iter().copied().sum();
    if total > F::zero() {
        for v in importance.iter_mut() {
            *v /= total;
        }
    }

    Ok(ForestModel {
        trees,
        n_features: d,
        params: *params,
        importance,
    })
}

impl<F: Real> ForestModel<F> {
    pub fn tree_count(&self) -> usize {
        self.trees.len()
    }
}

impl<F: Real> Regressor<F> for ForestModel<F> {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_row(&self, row: &[F]) -> F {
        let first = self.trees[0].predict_row(row);
        let mut sum = first;
        let mut all_equal = true;
        for tree in &self.trees[1..] {
            let p = tree.predict_row(row);
            all_equal &= p == first;
            sum += p;
        }
        // Averaging identical votes must not perturb the value; this is what
        // keeps a constant-target forest exactly constant.
        if all_equal {
            first
        } else {
            sum / F::of_usize(self.trees.len())
        }
    }
}
