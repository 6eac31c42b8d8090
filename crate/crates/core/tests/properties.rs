//! Invariants that should hold for *any* input, checked with random cases.
//!
//! Values are drawn on a 1/16 grid in [-64, 64] where bit-exactness matters:
//! on that range the monotone-transform menu (exp, cube, logistic) maps
//! distinct values to distinct values and ties to ties, so rank equality is a
//! mathematical identity rather than a tolerance question.

use cope_core::dataset::{split_indices, CleanPolicy, Dataset};
use cope_core::entropy::{copula_entropy, digamma, mutual_information, EstimatorParams};
use cope_core::knn::{brute_kth_distance, NeighborIndex, Norm, PointSet};
use cope_core::rank::{ecdf_transform, TiePolicy};
use cope_core::regress::forest::{train_forest, ForestParams};
use cope_core::regress::{Matrix, Regressor};
use cope_core::select::{rank_features, select_threshold, select_top};
use cope_core::synth::MarginalTransform;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

// Cap the grid at ±16: past ~36.7 the logistic transform saturates to exactly
// 1.0 in f64 and would merge values the raw data kept distinct.
fn grid_vec(len: impl Into<prop::collection::SizeRange>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-256i32..=256, len)
        .prop_map(|v| v.into_iter().map(|i| i as f64 / 16.0).collect())
}

/// `n` rows of the same dimension, quantized to an eighth.
fn point_rows(
    dims: std::ops::Range<usize>,
    n: std::ops::Range<usize>,
) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (dims, n).prop_flat_map(|(d, n)| {
        prop::collection::vec(prop::collection::vec(-512i32..=512, d), n).prop_map(|rows| {
            rows.into_iter()
                .map(|r| r.into_iter().map(|v| v as f64 / 8.0).collect())
                .collect()
        })
    })
}

/// Two equally long grid columns.
fn grid_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (8usize..64).prop_flat_map(|n| (grid_vec(n), grid_vec(n)))
}

fn two_col(x: &[f64], y: &[f64]) -> Dataset<f64> {
    Dataset::new(vec!["x".into(), "y".into()], vec![x.to_vec(), y.to_vec()]).unwrap()
}

const TRANSFORMS: [MarginalTransform; 3] = [
    MarginalTransform::Exp,
    MarginalTransform::Cube,
    MarginalTransform::Logistic,
];

proptest! {
    #[test]
    fn ecdf_lands_in_unit_interval(x in grid_vec(1..200)) {
        for policy in [TiePolicy::Average, TiePolicy::Max] {
            let u = ecdf_transform(&x, policy).unwrap();
            prop_assert_eq!(u.len(), x.len());
            for &v in &u {
                prop_assert!(v > 0.0 && v <= 1.0);
            }
        }
        // The literal ≤-count always sends the maximum to exactly 1; average
        // ranks only do so when the maximum is untied.
        let u = ecdf_transform(&x, TiePolicy::Max).unwrap();
        let max = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(max.to_bits(), 1.0f64.to_bits());
    }

    #[test]
    fn tie_free_ranks_are_the_exact_grid(x in prop::collection::hash_set(-4096i32..=4096, 1..150)) {
        let x: Vec<f64> = x.into_iter().map(|v| v as f64 / 16.0).collect();
        let t = x.len() as f64;
        for policy in [TiePolicy::Average, TiePolicy::Max] {
            let mut u = ecdf_transform(&x, policy).unwrap();
            u.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (i, &v) in u.iter().enumerate() {
                prop_assert_eq!(v.to_bits(), ((i + 1) as f64 / t).to_bits());
            }
        }
    }

    #[test]
    fn ecdf_mean_rank_is_fixed_by_tie_averaging(x in grid_vec(1..200)) {
        // Average ranks always sum to T(T+1)/2, whatever the tie structure.
        let t = x.len() as f64;
        let u = ecdf_transform(&x, TiePolicy::Average).unwrap();
        let mean = u.iter().sum::<f64>() / t;
        prop_assert!((mean - (t + 1.0) / (2.0 * t)).abs() < 1e-12);
    }

    #[test]
    fn ecdf_is_invariant_under_monotone_maps(x in grid_vec(1..150)) {
        let base = ecdf_transform(&x, TiePolicy::Average).unwrap();
        for tf in TRANSFORMS {
            let mapped: Vec<f64> = x.iter().map(|&v| tf.apply(v)).collect();
            let u = ecdf_transform(&mapped, TiePolicy::Average).unwrap();
            for (a, b) in base.iter().zip(&u) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn ecdf_is_permutation_equivariant(x in grid_vec(2..150), seed in 0u64..1000) {
        let base = ecdf_transform(&x, TiePolicy::Average).unwrap();
        let mut perm: Vec<usize> = (0..x.len()).collect();
        perm.shuffle(&mut ChaCha12Rng::seed_from_u64(seed));
        let shuffled: Vec<f64> = perm.iter().map(|&i| x[i]).collect();
        let u = ecdf_transform(&shuffled, TiePolicy::Average).unwrap();
        for (out_pos, &src) in perm.iter().enumerate() {
            prop_assert_eq!(u[out_pos].to_bits(), base[src].to_bits());
        }
    }

    #[test]
    fn tree_and_brute_force_agree_bitwise(
        pts in point_rows(1..5, 2..60),
        k in 1usize..8,
        chebyshev in any::<bool>(),
    ) {
        prop_assume!(k < pts.len());
        let norm = if chebyshev { Norm::Chebyshev } else { Norm::Euclidean };
        let set = PointSet::from_rows(pts, norm).unwrap();
        let index = NeighborIndex::build(&set);
        for q in 0..set.row_count() {
            let fast = index.kth_distance(q, k).unwrap();
            let slow = brute_kth_distance(&set, q, k).unwrap();
            prop_assert_eq!(fast.to_bits(), slow.to_bits());
        }
    }

    #[test]
    fn kth_distance_grows_with_k(pts in point_rows(2..4, 12..50)) {
        let set = PointSet::from_rows(pts, Norm::Chebyshev).unwrap();
        let index = NeighborIndex::build(&set);
        for q in 0..set.row_count().min(8) {
            let mut prev = 0.0f64;
            for k in 1..=10.min(set.row_count() - 1) {
                let d = index.kth_distance(q, k).unwrap();
                prop_assert!(d >= prev);
                prev = d;
            }
        }
    }

    #[test]
    fn mi_is_negated_ce_and_symmetric((x, y) in grid_pair()) {
        let params = EstimatorParams::default();
        let cols = vec!["x".to_string(), "y".to_string()];
        let d = two_col(&x, &y);
        let ce = copula_entropy(&d, &cols, &params);
        prop_assume!(ce.is_ok()); // constant columns degenerate legitimately
        let ce = ce.unwrap();
        let mi = mutual_information(&d, &cols, &params).unwrap();
        prop_assert_eq!(mi.to_bits(), (-ce.value).to_bits());

        let swapped = vec!["y".to_string(), "x".to_string()];
        let mi_rev = mutual_information(&d, &swapped, &params).unwrap();
        prop_assert_eq!(mi.to_bits(), mi_rev.to_bits());
    }

    #[test]
    fn ce_is_invariant_under_monotone_maps((x, y) in grid_pair()) {
        let params = EstimatorParams::default();
        let cols = vec!["x".to_string(), "y".to_string()];
        let base = copula_entropy(&two_col(&x, &y), &cols, &params);
        prop_assume!(base.is_ok());
        let base = base.unwrap().value;
        for tf in TRANSFORMS {
            let mapped: Vec<f64> = x.iter().map(|&v| tf.apply(v)).collect();
            let ce = copula_entropy(&two_col(&mapped, &y), &cols, &params).unwrap();
            prop_assert_eq!(ce.value.to_bits(), base.to_bits());
        }
    }

    #[test]
    fn clean_is_idempotent(raw in prop::collection::vec((-1024i32..=1024, prop::bool::weighted(0.2)), 2..80)) {
        // `true` marks a row poisoned with a sentinel in the second column.
        let a: Vec<f64> = raw.iter().map(|&(v, _)| v as f64 / 16.0).collect();
        let b: Vec<f64> = raw
            .iter()
            .map(|&(v, bad)| if bad { -9999.0 } else { v as f64 / 16.0 })
            .collect();
        prop_assume!(raw.iter().any(|&(_, bad)| !bad));
        let d = two_col(&a, &b);
        let policy = CleanPolicy::default();
        let (once, removed) = d.clean(&policy);
        let (twice, removed_again) = once.clean(&policy);
        prop_assert_eq!(removed, raw.iter().filter(|&&(_, bad)| bad).count());
        prop_assert_eq!(removed_again, 0);
        prop_assert_eq!(once.row_count(), twice.row_count());
        for name in ["x", "y"] {
            prop_assert_eq!(once.column(name).unwrap(), twice.column(name).unwrap());
        }
    }

    #[test]
    fn split_partitions_the_rows(rows in 2usize..300, fraction in 0.05f64..0.95, seed in 0u64..500) {
        let split = split_indices(rows, fraction, seed);
        prop_assume!(split.is_ok()); // tiny row counts can leave a side empty
        let (train, test) = split.unwrap();
        prop_assert_eq!(train.len() + test.len(), rows);
        prop_assert_eq!(train.len(), (fraction * rows as f64).ceil() as usize);
        let mut all: Vec<u32> = train.iter().chain(test.iter()).copied().collect();
        all.sort_unstable();
        let expect: Vec<u32> = (0..rows as u32).collect();
        prop_assert_eq!(all, expect);
    }

    #[test]
    fn forest_predicts_inside_the_target_range(
        (x, y) in grid_pair(),
        queries in grid_vec(1..20),
    ) {
        let mat = Matrix::from_rows(x.iter().map(|&v| vec![v]).collect()).unwrap();
        let params = ForestParams { n_trees: 7, min_leaf: 2, seed: 3, ..ForestParams::default() };
        let model = train_forest(&mat, &y, &params).unwrap();
        let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for q in queries {
            let p = model.predict_row(&[q]);
            prop_assert!(p >= lo && p <= hi, "{p} outside [{lo}, {hi}]");
        }
    }

    #[test]
    fn ranking_is_sorted_and_selection_is_a_prefix((x, y) in grid_pair(), m in 1usize..3) {
        let names: Vec<String> = vec!["x".into(), "y".into(), "z".into()];
        let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let d = Dataset::new(names, vec![x.clone(), y.clone(), z]).unwrap();
        let feats = vec!["x".to_string(), "y".to_string()];
        let report = rank_features(&d, "z", &feats, &EstimatorParams::default());
        prop_assume!(report.is_ok());
        let report = report.unwrap();
        for w in report.entries.windows(2) {
            let sorted = w[0].mi_nats > w[1].mi_nats
                || (w[0].mi_nats == w[1].mi_nats && w[0].feature <= w[1].feature);
            prop_assert!(sorted);
        }
        let top = select_top(&report, m).unwrap();
        prop_assert_eq!(top.selected.len(), m);
        for (sel, entry) in top.selected.iter().zip(&report.entries) {
            prop_assert_eq!(sel, &entry.feature);
        }
        let all: Vec<String> = report.entries.iter().map(|e| e.feature.clone()).collect();
        for tau in [-1.0, 0.0, 0.05] {
            let kept = select_threshold(&report, tau);
            prop_assert!(kept.selected.iter().all(|f| all.contains(f)));
            for f in &kept.selected {
                let e = report.entries.iter().find(|e| &e.feature == f).unwrap();
                prop_assert!(e.mi_nats > tau);
            }
        }
    }

    #[test]
    fn digamma_satisfies_the_recurrence(x in 0.05f64..40.0) {
        let lhs: f64 = digamma(x + 1.0);
        let rhs = digamma(x) + 1.0 / x;
        prop_assert!((lhs - rhs).abs() < 1e-10 * rhs.abs().max(1.0), "x={x}: {lhs} vs {rhs}");
    }
}
