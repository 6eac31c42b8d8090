//! k-nearest-neighbour distances over small-dimensional point sets.
//!
//! Entropy estimation needs, for every sample point, the distance to its
//! k-th nearest neighbour among the remaining points. A bucketed kd-tree
//! ([`NeighborIndex`]) answers those queries in roughly `O(log T)` for the
//! dimensions this crate works in (d ≲ 20); [`brute_kth_distance`] is the
//! obvious `O(T)` scan kept as an oracle. Both run the same distance code on
//! the same operand order, so their answers agree bit for bit, not merely to
//! a tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Distance used for neighbour queries (and for the entropy unit-ball term).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    /// `L∞`: max coordinate difference. The usual choice for entropy
    /// estimation because its unit ball has volume one.
    #[default]
    Chebyshev,
    /// `L2` with the full correction term applied downstream.
    Euclidean,
}

impl std::fmt::Display for Norm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Norm::Chebyshev => "chebyshev",
            Norm::Euclidean => "euclidean",
        })
    }
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chebyshev" => Ok(Norm::Chebyshev),
            "euclidean" => Ok(Norm::Euclidean),
            other => Err(Error::InvalidParameter(format!(
                "unknown norm {other:?} (expected \"chebyshev\" or \"euclidean\")"
            ))),
        }
    }
}

/// A fixed set of finite points, row-major, tagged with the norm queries use.
#[derive(Debug, Clone)]
pub struct PointSet<F: Real> {
    data: Vec<F>,
    rows: usize,
    dims: usize,
    norm: Norm,
}

impl<F: Real> PointSet<F> {
    /// Build from row-major data. Errors on emptiness, ragged rows or
    /// non-finite coordinates.
    pub fn from_rows(rows: Vec<Vec<F>>, norm: Norm) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::TooFewSamples { rows: 0, min: 1 });
        }
        let dims = rows[0].len();
        if dims == 0 {
            return Err(Error::InvalidParameter(
                "points must have at least one coordinate".into(),
            ));
        }
        let mut data = Vec::with_capacity(rows.len() * dims);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dims {
                return Err(Error::DimensionMismatch(format!(
                    "point {i} has {} coordinates, expected {dims}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::from_flat(data, rows.len(), dims, norm)
    }

    /// Build from column vectors of equal length.
    pub fn from_columns(columns: &[Vec<F>], norm: Norm) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidParameter(
                "points must have at least one coordinate".into(),
            ));
        }
        let rows = columns[0].len();
        if rows == 0 {
            return Err(Error::TooFewSamples { rows: 0, min: 1 });
        }
        if let Some(c) = columns.iter().position(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch(format!(
                "column {c} has {} values, expected {rows}",
                columns[c].len()
            )));
        }
        let dims = columns.len();
        let mut data = Vec::with_capacity(rows * dims);
        for r in 0..rows {
            for col in columns {
                data.push(col[r]);
            }
        }
        Self::from_flat(data, rows, dims, norm)
    }

    fn from_flat(data: Vec<F>, rows: usize, dims: usize, norm: Norm) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "point coordinates".into(),
            });
        }
        Ok(Self {
            data,
            rows,
            dims,
            norm,
        })
    }

    pub fn row_count(&self) -> usize {
        self.rows
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.dims..(i + 1) * self.dims]
    }

    /// Distance between two stored points under the set's norm.
    ///
    /// Every caller — tree search and brute-force scan alike — funnels
    /// through here with `(query, other)` operand order, which is what makes
    /// the two search strategies bitwise comparable.
    #[inline]
    pub fn distance(&self, a: usize, b: usize) -> F {
        let pa = self.row(a);
        let pb = self.row(b);
        match self.norm {
            Norm::Chebyshev => {
                let mut m = F::zero();
                for i in 0..self.dims {
                    m = m.max((pa[i] - pb[i]).abs());
                }
                m
            }
            Norm::Euclidean => {
                let mut s = F::zero();
                for i in 0..self.dims {
                    let d = pa[i] - pb[i];
                    s += d * d;
                }
                s.sqrt()
            }
        }
    }

    fn check_query(&self, query: usize, k: usize) -> Result<()> {
        if self.rows < 2 {
            return Err(Error::TooFewSamples {
                rows: self.rows,
                min: 2,
            });
        }
        if query >= self.rows {
            return Err(Error::InvalidParameter(format!(
                "query index {query} out of range (rows: {})",
                self.rows
            )));
        }
        if k < 1 || k >= self.rows {
            return Err(Error::InvalidParameter(format!(
                "k must satisfy 1 <= k <= T-1, got k={k} with T={}",
                self.rows
            )));
        }
        Ok(())
    }
}

/// Neighbour candidates are ordered by `(distance, index)` so ties resolve
/// the same way everywhere. Distances are finite, hence the `unwrap`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate<F: Real>(F, u32);

impl<F: Real> Eq for Candidate<F> {}

impl<F: Real> PartialOrd for Candidate<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<F: Real> Ord for Candidate<F> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .partial_cmp(&other.0)
            .expect("finite distance")
            .then(self.1.cmp(&other.1))
    }
}

const LEAF_SIZE: usize = 16;

#[derive(Debug, Clone)]
enum Node<F> {
    /// Range into `ids`.
    Leaf { start: u32, end: u32 },
    /// Median split: left child holds `(coord, id)` pairs below the pivot,
    /// right child holds the pivot and everything above.
    Split {
        axis: u32,
        value: F,
        left: u32,
        right: u32,
    },
}

/// kd-tree over a [`PointSet`]. Construction is deterministic: median splits
/// with `(coordinate, index)` as the sort key, axes cycling with depth.
#[derive(Debug)]
pub struct NeighborIndex<'a, F: Real> {
    points: &'a PointSet<F>,
    ids: Vec<u32>,
    nodes: Vec<Node<F>>,
}

impl<'a, F: Real> NeighborIndex<'a, F> {
    pub fn build(points: &'a PointSet<F>) -> Self {
        let mut ids: Vec<u32> = (0..points.rows as u32).collect();
        let mut nodes = Vec::new();
        build_node(points, &mut ids, &mut nodes, 0, points.rows, 0);
        Self { points, ids, nodes }
    }

    pub fn points(&self) -> &PointSet<F> {
        self.points
    }

    /// Distance from point `query` to its k-th nearest other point.
    pub fn kth_distance(&self, query: usize, k: usize) -> Result<F> {
        self.points.check_query(query, k)?;
        let mut heap: BinaryHeap<Candidate<F>> = BinaryHeap::with_capacity(k + 1);
        self.search(0, query, k, &mut heap);
        debug_assert_eq!(heap.len(), k);
        Ok(heap.peek().expect("k >= 1").0)
    }

    /// k-th neighbour distance for every point, in point order.
    pub fn kth_distances(&self, k: usize) -> Result<Vec<F>> {
        self.points.check_query(0, k)?;
        Ok((0..self.points.rows)
            .into_par_iter()
            .map(|q| {
                let mut heap = BinaryHeap::with_capacity(k + 1);
                self.search(0, q, k, &mut heap);
                heap.peek().expect("k >= 1").0
            })
            .collect())
    }

    fn search(&self, node: usize, query: usize, k: usize, heap: &mut BinaryHeap<Candidate<F>>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &id in &self.ids[start as usize..end as usize] {
                    if id as usize == query {
                        continue;
                    }
                    let d = self.points.distance(query, id as usize);
                    let cand = Candidate(d, id);
                    if heap.len() < k {
                        heap.push(cand);
                    } else if cand < *heap.peek().expect("nonempty") {
                        heap.pop();
                        heap.push(cand);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let q = self.points.row(query)[axis as usize];
                let (near, far) = if q < value {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search(near as usize, query, k, heap);
                // The far side can only improve on the current k-th distance
                // if the splitting plane is strictly closer than it.
                let plane = (q - value).abs();
                let must_visit = heap.len() < k || plane < heap.peek().expect("nonempty").0;
                if must_visit {
                    self.search(far as usize, query, k, heap);
                }
            }
        }
    }
}

fn build_node<F: Real>(
    points: &PointSet<F>,
    ids: &mut [u32],
    nodes: &mut Vec<Node<F>>,
    start: usize,
    end: usize,
    depth: usize,
) -> u32 {
    let idx = nodes.len() as u32;
    let len = end - start;
    if len <= LEAF_SIZE {
        nodes.push(Node::Leaf {
            start: start as u32,
            end: end as u32,
        });
        return idx;
    }
    let axis = depth % points.dims;
    let mid = len / 2;
    ids[start..end].select_nth_unstable_by(mid, |&a, &b| {
        let ca = points.row(a as usize)[axis];
        let cb = points.row(b as usize)[axis];
        ca.partial_cmp(&cb)
            .expect("finite coordinate")
            .then(a.cmp(&b))
    });
    let value = points.row(ids[start + mid] as usize)[axis];
    nodes.push(Node::Split {
        axis: axis as u32,
        value,
        left: 0,
        right: 0,
    });
    let left = build_node(points, ids, nodes, start, start + mid, depth + 1);
    let right = build_node(points, ids, nodes, start + mid, end, depth + 1);
    match &mut nodes[idx as usize] {
        Node::Split {
            left: l, right: r, ..
        } => {
            *l = left;
            *r = right;
        }
        Node::Leaf { .. } => unreachable!(),
    }
    idx
}

/// Exhaustive-scan k-th neighbour distance; the reference the tree is held to.
pub fn brute_kth_distance<F: Real>(points: &PointSet<F>, query: usize, k: usize) -> Result<F> {
    points.check_query(query, k)?;
    let mut dists: Vec<Candidate<F>> = (0..points.rows)
        .filter(|&i| i != query)
        .map(|i| Candidate(points.distance(query, i), i as u32))
        .collect();
    dists.sort_unstable();
    Ok(dists[k - 1].0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn line_points() -> PointSet<f64> {
        PointSet::from_rows(
            vec![vec![0.0], vec![1.0], vec![3.0], vec![7.0]],
            Norm::Chebyshev,
        )
        .unwrap()
    }

    #[test]
    fn hand_checked_line() {
        let ps = line_points();
        let idx = NeighborIndex::build(&ps);
        assert_eq!(idx.kth_distance(0, 1).unwrap(), 1.0);
        assert_eq!(idx.kth_distance(0, 2).unwrap(), 3.0);
        assert_eq!(idx.kth_distance(0, 3).unwrap(), 7.0);
        assert_eq!(idx.kth_distance(2, 1).unwrap(), 2.0);
    }

    #[test]
    fn hand_checked_plane_both_norms() {
        let rows = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![3.0, 3.0]];
        let cheb = PointSet::from_rows(rows.clone(), Norm::Chebyshev).unwrap();
        let idx = NeighborIndex::build(&cheb);
        assert_eq!(idx.kth_distance(0, 1).unwrap(), 1.0);
        assert_eq!(idx.kth_distance(0, 2).unwrap(), 3.0);

        let eucl = PointSet::from_rows(rows, Norm::Euclidean).unwrap();
        let idx = NeighborIndex::build(&eucl);
        assert_eq!(idx.kth_distance(0, 1).unwrap(), 2.0f64.sqrt());
        assert_eq!(idx.kth_distance(0, 2).unwrap(), 18.0f64.sqrt());
    }

    #[test]
    fn duplicate_points_give_zero_distance() {
        let ps = PointSet::from_rows(
            vec![vec![2.0, 2.0], vec![2.0, 2.0], vec![5.0, 5.0]],
            Norm::Chebyshev,
        )
        .unwrap();
        let idx = NeighborIndex::build(&ps);
        assert_eq!(idx.kth_distance(0, 1).unwrap(), 0.0);
        assert_eq!(idx.kth_distance(0, 2).unwrap(), 3.0);
    }

    #[test]
    fn parameter_validation() {
        let ps = line_points();
        let idx = NeighborIndex::build(&ps);
        assert!(idx.kth_distance(0, 0).is_err());
        assert!(idx.kth_distance(0, 4).is_err()); // k == T
        assert!(idx.kth_distance(9, 1).is_err());
        let lonely = PointSet::from_rows(vec![vec![1.0]], Norm::Chebyshev).unwrap();
        assert!(NeighborIndex::build(&lonely).kth_distance(0, 1).is_err());
    }

    #[test]
    fn rejects_nonfinite_and_ragged_points() {
        assert!(PointSet::from_rows(vec![vec![f64::NAN]], Norm::Chebyshev).is_err());
        assert!(PointSet::from_rows(vec![vec![1.0], vec![1.0, 2.0]], Norm::Chebyshev).is_err());
        assert!(PointSet::<f64>::from_rows(vec![], Norm::Chebyshev).is_err());
    }

    #[test]
    fn tree_matches_brute_force_on_random_sets() {
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        for trial in 0..40 {
            let t = rng.gen_range(2..=200);
            let d = rng.gen_range(1..=5);
            let norm = if trial % 2 == 0 {
                Norm::Chebyshev
            } else {
                Norm::Euclidean
            };
            // Quantized coordinates force plenty of exact ties.
            let rows: Vec<Vec<f64>> = (0..t)
                .map(|_| {
                    (0..d)
                        .map(|_| (rng.gen_range(-20i32..20) as f64) * 0.25)
                        .collect()
                })
                .collect();
            let ps = PointSet::from_rows(rows, norm).unwrap();
            let idx = NeighborIndex::build(&ps);
            let kmax = (t - 1).min(10);
            for q in 0..t {
                for k in 1..=kmax {
                    let fast = idx.kth_distance(q, k).unwrap();
                    let slow = brute_kth_distance(&ps, q, k).unwrap();
                    assert_eq!(
                        fast.to_bits(),
                        slow.to_bits(),
                        "t={t} d={d} q={q} k={k} {norm}"
                    );
                }
            }
        }
    }

    #[test]
    fn batch_distances_match_single_queries() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let rows: Vec<Vec<f64>> = (0..300)
            .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()])
            .collect();
        let ps = PointSet::from_rows(rows, Norm::Chebyshev).unwrap();
        let idx = NeighborIndex::build(&ps);
        let all = idx.kth_distances(3).unwrap();
        for q in 0..300 {
            assert_eq!(all[q], idx.kth_distance(q, 3).unwrap());
        }
    }

    #[test]
    fn construction_is_deterministic() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let rows: Vec<Vec<f64>> = (0..500).map(|_| vec![rng.gen::<f64>(); 3]).collect();
        let ps = PointSet::from_rows(rows, Norm::Euclidean).unwrap();
        let a = NeighborIndex::build(&ps);
        let b = NeighborIndex::build(&ps);
        assert_eq!(a.ids, b.ids);
        for q in [0, 99, 499] {
            assert_eq!(
                a.kth_distance(q, 4).unwrap().to_bits(),
                b.kth_distance(q, 4).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn norm_parses_and_prints() {
        assert_eq!("chebyshev".parse::<Norm>().unwrap(), Norm::Chebyshev);
        assert_eq!("euclidean".parse::<Norm>().unwrap(), Norm::Euclidean);
        assert!("manhattan".parse::<Norm>().is_err());
        assert_eq!(Norm::Chebyshev.to_string(), "chebyshev");
    }
}
