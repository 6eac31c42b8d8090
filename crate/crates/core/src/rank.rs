//! Empirical-CDF rank transform.
//!
//! The copula of a random vector is reached through its marginals: each
//! coordinate is replaced by its empirical CDF value, `u_t = F̂(x_t)`, giving
//! pseudo-observations on the unit cube that carry only the dependence
//! structure. Ranks are scaled by `1/T`, so the largest value maps to exactly
//! `1` and every pseudo-observation lies in `(0, 1]`.
//!
//! Any strictly increasing transform of a column permutes nothing and leaves
//! the ranks — and therefore everything estimated from them — untouched.

use crate::error::{Error, Result};
use crate::knn::{Norm, PointSet};
use crate::scalar::Real;

/// How tied values share a rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiePolicy {
    /// Tied values receive the mean of the ranks they occupy. Keeps the
    /// pseudo-sample mean at `(T+1)/(2T)` even under heavy ties.
    #[default]
    Average,
    /// Tied values all receive the largest rank of their group — the literal
    /// `#{x_s ≤ x_t}/T` count.
    Max,
}

/// Rank-transform one column to `(0, 1]`.
///
/// Errors on empty input and on non-finite values; ranking NaN is meaningless.
pub fn ecdf_transform<F: Real>(x: &[F], ties: TiePolicy) -> Result<Vec<F>> {
    if x.is_empty() {
        return Err(Error::TooFewSamples { rows: 0, min: 1 });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "ecdf_transform input".into(),
        });
    }
    let t = x.len();
    let mut order: Vec<usize> = (0..t).collect();
    order.sort_unstable_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap().then(a.cmp(&b)));

    let scale = F::of_usize(t);
    let mut u = vec![F::zero(); t];
    let mut i = 0;
    while i < t {
        let mut j = i + 1;
        while j < t && x[order[j]] == x[order[i]] {
            j += 1;
        }
        // Sorted positions i..j (0-based) carry 1-based ranks i+1..=j.
        let rank = match ties {
            TiePolicy::Average => F::of_usize(i + 1 + j) / F::of(2.0),
            TiePolicy::Max => F::of_usize(j),
        };
        for &idx in &order[i..j] {
            u[idx] = rank / scale;
        }
        i = j;
    }
    Ok(u)
}

/// Rank-transformed view of selected dataset columns: the empirical copula
/// sample.
#[derive(Debug, Clone)]
pub struct PseudoObservations<F: Real> {
    columns: Vec<Vec<F>>,
    rows: usize,
}

impl<F: Real> PseudoObservations<F> {
    pub fn row_count(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, i: usize) -> &[F] {
        &self.columns[i]
    }

    /// Lay the pseudo-observations out as points for neighbour searches.
    pub fn to_point_set(&self, norm: Norm) -> PointSet<F> {
        PointSet::from_columns(&self.columns, norm)
            .expect("pseudo-observations are finite by construction")
    }
}

/// Rank-transform the named columns of a dataset, in the given order.
pub fn pseudo_observations<F: Real>(
    data: &crate::dataset::Dataset<F>,
    column_names: &[String],
    ties: TiePolicy,
) -> Result<PseudoObservations<F>> {
    if column_names.is_empty() {
        return Err(Error::InvalidParameter(
            "pseudo_observations needs at least one column".into(),
        ));
    }
    let mut columns = Vec::with_capacity(column_names.len());
    for name in column_names {
        columns.push(ecdf_transform(data.column(name)?, ties)?);
    }
    Ok(PseudoObservations {
        rows: data.row_count(),
        columns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn average_ties_share_the_mean_rank() {
        let u = ecdf_transform(&[3.0, 1.0, 4.0, 1.0, 5.0], TiePolicy::Average).unwrap();
        assert_eq!(u, vec![0.6, 0.3, 0.8, 0.3, 1.0]);
    }

    #[test]
    fn max_ties_take_the_group_maximum() {
        let u = ecdf_transform(&[3.0, 1.0, 4.0, 1.0, 5.0], TiePolicy::Max).unwrap();
        assert_eq!(u, vec![0.6, 0.4, 0.8, 0.4, 1.0]);
    }

    #[test]
    fn policies_agree_without_ties() {
        let x = [0.3, -2.0, 5.5, 1.25, -0.75, 9.0];
        let a = ecdf_transform(&x, TiePolicy::Average).unwrap();
        let m = ecdf_transform(&x, TiePolicy::Max).unwrap();
        assert_eq!(a, m);
    }

    #[test]
    fn largest_value_always_maps_to_one() {
        for ties in [TiePolicy::Average, TiePolicy::Max] {
            let u = ecdf_transform(&[2.0, 2.0, 2.0, 7.0], ties).unwrap();
            assert_eq!(u.iter().cloned().fold(f64::MIN, f64::max), 1.0);
            assert!(u.iter().all(|&v| v > 0.0 && v <= 1.0));
        }
    }

    #[test]
    fn all_equal_column_maps_to_average_of_full_range() {
        // Every value ties: average rank is (T+1)/2 = 2, max rank is T.
        let avg = ecdf_transform(&[5.0, 5.0, 5.0], TiePolicy::Average).unwrap();
        assert_eq!(avg, vec![2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0]);
        let max = ecdf_transform(&[5.0, 5.0, 5.0], TiePolicy::Max).unwrap();
        assert_eq!(max, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn rejects_empty_and_nonfinite() {
        assert!(ecdf_transform::<f64>(&[], TiePolicy::Average).is_err());
        assert!(ecdf_transform(&[1.0, f64::NAN], TiePolicy::Average).is_err());
        assert!(ecdf_transform(&[1.0, f64::INFINITY], TiePolicy::Average).is_err());
    }

    #[test]
    fn monotone_transform_leaves_ranks_unchanged() {
        let x = [0.4, -1.3, 2.2, 0.9, -0.1, 1.7];
        let y: Vec<f64> = x.iter().map(|v: &f64| (2.0 * v + 1.0).exp()).collect();
        let ux = ecdf_transform(&x, TiePolicy::Average).unwrap();
        let uy = ecdf_transform(&y, TiePolicy::Average).unwrap();
        assert_eq!(ux, uy);
    }
}
