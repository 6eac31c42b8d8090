//! Single variance-reduction regression tree, the unit a forest bags.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::scalar::Real;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub(crate) enum TreeNode<F> {
    Leaf {
        value: F,
    },
    Split {
        feature: u32,
        threshold: F,
        left: u32,
        right: u32,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct Tree<F> {
    nodes: Vec<TreeNode<F>>,
}

pub(crate) struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub mtry: usize,
}

impl<F: Real> Tree<F> {
    /// Grow on the rows listed in `items` (a bootstrap sample; duplicates
    /// welcome). Split gains are accumulated into `importance`, indexed by
    /// feature, in raw sum-of-squares units.
    pub fn grow(
        x: &Matrix<F>,
        y: &[F],
        items: &mut [u32],
        params: &GrowParams,
        rng: &mut ChaCha12Rng,
        importance: &mut [F],
    ) -> Self {
        let mut tree = Tree { nodes: Vec::new() };
        tree.grow_node(x, y, items, 0, params, rng, importance);
        tree
    }

    #[allow(clippy::too_many_arguments)]
    fn grow_node(
        &mut self,
        x: &Matrix<F>,
        y: &[F],
        items: &mut [u32],
        depth: usize,
        params: &GrowParams,
        rng: &mut ChaCha12Rng,
        importance: &mut [F],
    ) -> u32 {
        let idx = self.nodes.len() as u32;
        let n = items.len();

        let mut sum = F::zero();
        let mut y_min = F::infinity();
        let mut y_max = F::neg_infinity();
        for &i in items.iter() {
            let v = y[i as usize];
            sum += v;
            y_min = y_min.min(v);
            y_max = y_max.max(v);
        }
        // A constant node keeps the exact constant rather than sum/n, so a
        // constant target survives training bit for bit.
        if y_min == y_max {
            self.nodes.push(TreeNode::Leaf { value: y_min });
            return idx;
        }
        let depth_exhausted = params.max_depth.is_some_and(|d| depth >= d);
        if depth_exhausted || n < 2 * params.min_leaf {
            self.nodes.push(TreeNode::Leaf {
                value: sum / F::of_usize(n),
            });
            return idx;
        }

        let best = self.best_split(x, y, items, sum, params, rng);
        let Some((feature, threshold, gain)) = best else {
            self.nodes.push(TreeNode::Leaf {
                value: sum / F::of_usize(n),
            });
            return idx;
        };
        importance[feature as usize] += gain;

        // Stable partition so child subproblems see a deterministic order.
        let mut left_items = Vec::with_capacity(n);
        let mut right_items = Vec::with_capacity(n);
        for &i in items.iter() {
            if x.get(i as usize, feature as usize) < threshold {
                left_items.push(i);
            } else {
                right_items.push(i);
            }
        }

        self.nodes.push(TreeNode::Split {
            feature,
            threshold,
            left: 0,
            right: 0,
        });
        let left = self.grow_node(x, y, &mut left_items, depth + 1, params, rng, importance);
        let right = self.grow_node(x, y, &mut right_items, depth + 1, params, rng, importance);
        match &mut self.nodes[idx as usize] {
            TreeNode::Split {
                left: l, right: r, ..
            } => {
                *l = left;
                *r = right;
            }
            TreeNode::Leaf { .. } => unreachable!(),
        }
        idx
    }

    /// Best `(feature, threshold, gain)` over a random feature subset, or
    /// `None` when no split improves on the parent. Gain is the decrease in
    /// sum of squared errors: `S_L²/n_L + S_R²/n_R − S²/n`.
    fn best_split(
        &self,
        x: &Matrix<F>,
        y: &[F],
        items: &[u32],
        sum: F,
        params: &GrowParams,
        rng: &mut ChaCha12Rng,
    ) -> Option<(u32, F, F)> {
        let n = items.len();
        let parent_score = sum * sum / F::of_usize(n);

        // Partial Fisher-Yates: the first `mtry` entries become the
        // candidate features, an unbiased sample without replacement.
        let d = x.cols();
        let mut feats: Vec<u32> = (0..d as u32).collect();
        for i in 0..params.mtry.min(d) {
            let j = rng.gen_range(i..d);
            feats.swap(i, j);
        }
        feats.truncate(params.mtry.min(d));

        let mut best: Option<(u32, F, F)> = None;
        let mut sorted: Vec<u32> = Vec::with_capacity(n);
        for &f in &feats {
            sorted.clear();
            sorted.extend_from_slice(items);
            sorted.sort_unstable_by(|&a, &b| {
                x.get(a as usize, f as usize)
                    .partial_cmp(&x.get(b as usize, f as usize))
                    .expect("finite feature")
                    .then(a.cmp(&b))
            });

            let mut left_sum = F::zero();
            for i in 1..n {
                left_sum += y[sorted[i - 1] as usize];
                if i < params.min_leaf || n - i < params.min_leaf {
                    continue;
                }
                let prev = x.get(sorted[i - 1] as usize, f as usize);
                let here = x.get(sorted[i] as usize, f as usize);
                if prev == here {
                    continue; // can't separate equal values
                }
                let right_sum = sum - left_sum;
                let score = left_sum * left_sum / F::of_usize(i)
                    + right_sum * right_sum / F::of_usize(n - i);
                let gain = score - parent_score;
                if gain > F::zero() && best.map_or(true, |(_, _, g)| gain > g) {
                    // Midpoint threshold; nudge up if rounding collapsed it
                    // onto the left value so `< threshold` still separates.
                    let mut mid = prev + (here - prev) / F::of(2.0);
                    if !(mid > prev) {
                        mid = here;
                    }
                    best = Some((f, mid, gain));
                }
            }
        }
        best
    }

    pub fn predict_row(&self, row: &[F]) -> F {
        let mut node = 0usize;
        loop {
            match self.nodes[node] {
                TreeNode::Leaf { value } => return value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[feature as usize] < threshold {
                        left as usize
                    } else {
                        right as usize
                    };
                }
            }
        }
    }

    #[cfg(test)]
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn grow_all_features(x: &Matrix<f64>, y: &[f64], min_leaf: usize) -> (Tree<f64>, Vec<f64>) {
        let mut items: Vec<u32> = (0..x.rows() as u32).collect();
        let mut importance = vec![0.0; x.cols()];
        let params = GrowParams {
            max_depth: None,
            min_leaf,
            mtry: x.cols(),
        };
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let tree = Tree::grow(x, y, &mut items, &params, &mut rng, &mut importance);
        (tree, importance)
    }

    #[test]
    fn splits_a_step_function_perfectly() {
        // y jumps at x = 2.5; a single split should capture it.
        let x = Matrix::from_rows((0..6).map(|i| vec![i as f64]).collect()).unwrap();
        let y = [0.0, 0.0, 0.0, 10.0, 10.0, 10.0];
        let (tree, importance) = grow_all_features(&x, &y, 1);
        for i in 0..6 {
            assert_eq!(tree.predict_row(&[i as f64]), y[i]);
        }
        assert!(importance[0] > 0.0);
        // Unseen values route to the nearest regime.
        assert_eq!(tree.predict_row(&[-5.0]), 0.0);
        assert_eq!(tree.predict_row(&[99.0]), 10.0);
    }

    #[test]
    fn constant_target_is_a_single_exact_leaf() {
        let x = Matrix::from_rows((0..10).map(|i| vec![i as f64]).collect()).unwrap();
        let y = [0.1; 10];
        let (tree, importance) = grow_all_features(&x, &y, 1);
        assert_eq!(tree.node_count(), 1);
        assert_eq!(tree.predict_row(&[3.0]).to_bits(), 0.1f64.to_bits());
        assert!(importance.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn min_leaf_limits_split_granularity() {
        let x = Matrix::from_rows((0..8).map(|i| vec![i as f64]).collect()).unwrap();
        let y: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let (tree, _) = grow_all_features(&x, &y, 4);
        // Only the midpoint split is allowed: both children hold 4 rows.
        assert_eq!(tree.node_count(), 3);
        assert_eq!(tree.predict_row(&[0.0]), 1.5); // mean of 0..=3
        assert_eq!(tree.predict_row(&[7.0]), 5.5); // mean of 4..=7
    }

    #[test]
    fn identical_features_cannot_split() {
        let x = Matrix::from_rows(vec![vec![1.0]; 6]).unwrap();
        let y = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
        let (tree, _) = grow_all_features(&x, &y, 1);
        assert_eq!(tree.node_count(), 1);
        assert_eq!(tree.predict_row(&[1.0]), 0.5);
    }
}
