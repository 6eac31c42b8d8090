//! ε-insensitive support vector regression, RBF kernel, trained by
//! sequential minimal optimization.
//!
//! The model is `f(x) = Σ_i v_i·k(x, x_i) + b` over the training points with
//! `v_i ≠ 0` (the support vectors), `k(a, b) = exp(−γ‖a−b‖²)`. Training
//! minimizes the standard dual in `β = α − α*`:
//!
//! ```text
//! min_β  ½·βᵀKβ − yᵀβ + ε·Σ|β|      s.t.  Σβ = 0,  |β_i| ≤ C
//! ```
//!
//! Each SMO step picks the maximal violating pair among the `(point, sign)`
//! coordinates — the largest KKT score `s = y − (Kβ) ∓ ε` that may still
//! increase against the smallest that may still decrease — and moves the
//! pair as far as the box allows, which costs `O(n)` per iteration with the
//! Gram matrix precomputed and the gradient kept incrementally. The bias is
//! the midpoint of the final score bracket, `b = (m + M)/2`, and the solver
//! reports the bracket width so convergence is checkable from outside.
//!
//! Features are standardized internally (train-set mean and deviation;
//! constant features pass through); targets are left alone, so `ε` and `C`
//! keep the units of `y`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Matrix, Regressor};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// SVR hyperparameters. `gamma: None` means `1/d`, the usual default once
/// features are standardized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrParams<F: Real> {
    pub c: F,
    pub epsilon: F,
    pub gamma: Option<F>,
    pub tol: F,
    pub max_iter: usize,
}

impl<F: Real> Default for SvrParams<F> {
    fn default() -> Self {
        Self {
            c: F::of(10.0),
            epsilon: F::of(0.1),
            gamma: None,
            tol: F::of(1e-3),
            max_iter: 200_000,
        }
    }
}

/// A trained SVR: support vectors in standardized coordinates, their dual
/// coefficients, and the standardization itself.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvrModel<F: Real> {
    support_vectors: Vec<Vec<F>>,
    coefficients: Vec<F>,
    pub bias: F,
    pub gamma: F,
    feature_means: Vec<F>,
    feature_stds: Vec<F>,
    pub converged: bool,
    pub iterations: usize,
    pub params: SvrParams<F>,
}

/// Solver diagnostics for auditing a training run.
#[derive(Debug, Clone)]
pub struct SvrTrace<F: Real> {
    /// Dual objective after each accepted update, starting at 0 for `β = 0`.
    /// Strictly decreasing while the solver runs.
    pub objective: Vec<F>,
    /// Final `β` for every training row (zeros included).
    pub beta: Vec<F>,
    /// Final KKT bracket width `m − M`; `≤ tol` iff converged.
    pub final_gap: F,
}

/// `exp(−γ‖a−b‖²)`.
pub fn rbf_kernel<F: Real>(a: &[F], b: &[F], gamma: F) -> F {
    debug_assert_eq!(a.len(), b.len());
    let mut s = F::zero();
    for i in 0..a.len() {
        let d = a[i] - b[i];
        s += d * d;
    }
    (-gamma * s).exp()
}

pub fn train_svr<F: Real>(x: &Matrix<F>, y: &[F], params: &SvrParams<F>) -> Result<SvrModel<F>> {
    train_svr_traced(x, y, params).map(|(model, _)| model)
}

/// As [`train_svr`], additionally returning the solver trace.
pub fn train_svr_traced<F: Real>(
    x: &Matrix<F>,
    y: &[F],
    params: &SvrParams<F>,
) -> Result<(SvrModel<F>, SvrTrace<F>)> {
    let n = x.rows();
    let d = x.cols();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} targets for {n} rows",
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "targets".into(),
        });
    }
    if !(params.c > F::zero() && params.c.is_finite()) {
        return Err(Error::InvalidParameter(
            "C must be positive and finite".into(),
        ));
    }
    if !(params.epsilon >= F::zero() && params.epsilon.is_finite()) {
        return Err(Error::InvalidParameter(
            "epsilon must be non-negative".into(),
        ));
    }
    if !(params.tol > F::zero()) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    if let Some(g) = params.gamma {
        if !(g > F::zero() && g.is_finite()) {
            return Err(Error::InvalidParameter("gamma must be positive".into()));
        }
    }
    let gamma = params.gamma.unwrap_or_else(|| F::one() / F::of_usize(d));

    // Standardize features on the training sample.
    let (means, stds) = column_standardization(x);
    let std_rows: Vec<Vec<F>> = (0..n)
        .map(|r| {
            x.row(r)
                .iter()
                .enumerate()
                .map(|(c, &v)| (v - means[c]) / stds[c])
                .collect()
        })
        .collect();

    // Full Gram matrix; n is capped by memory at roughly 10⁴ rows, which is
    // the regime SMO with a dense kernel is meant for anyway.
    let rows_ref = &std_rows;
    let kernel: Vec<F> = (0..n)
        .into_par_iter()
        .flat_map_iter(move |i| (0..n).map(move |j| rbf_kernel(&rows_ref[i], &rows_ref[j], gamma)))
        .collect();

    let solved = solve_smo(&kernel, y, params);

    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for (i, &b) in solved.beta.iter().enumerate() {
        if b != F::zero() {
            support_vectors.push(std_rows[i].clone());
            coefficients.push(b);
        }
    }

    let model = SvrModel {
        support_vectors,
        coefficients,
        bias: solved.bias,
        gamma,
        feature_means: means,
        feature_stds: stds,
        converged: solved.converged,
        iterations: solved.iterations,
        params: *params,
    };
    let trace = SvrTrace {
        objective: solved.objective,
        beta: solved.beta,
        final_gap: solved.final_gap,
    };
    Ok((model, trace))
}

fn column_standardization<F: Real>(x: &Matrix<F>) -> (Vec<F>, Vec<F>) {
    let n = F::of_usize(x.rows());
    let mut means = vec![F::zero(); x.cols()];
    for r in 0..x.rows() {
        for (c, &v) in x.row(r).iter().enumerate() {
            means[c] += v;
        }
    }
    for m in means.iter_mut() {
        *m /= n;
    }
    let mut vars = vec![F::zero(); x.cols()];
    for r in 0..x.rows() {
        for (c, &v) in x.row(r).iter().enumerate() {
            let d = v - means[c];
            vars[c] += d * d;
        }
    }
    let stds = vars
        .iter()
        .map(|&v| {
            let s = (v / n).sqrt();
            if s > F::zero() {
                s
            } else {
                F::one() // constant column: leave it centered, unscaled
            }
        })
        .collect();
    (means, stds)
}

struct SmoResult<F> {
    beta: Vec<F>,
    bias: F,
    converged: bool,
    iterations: usize,
    objective: Vec<F>,
    final_gap: F,
}

fn solve_smo<F: Real>(kernel: &[F], y: &[F], params: &SvrParams<F>) -> SmoResult<F> {
    let n = y.len();
    let c = params.c;
    let eps = params.epsilon;

    // α and α* from the textbook dual; β = ap − am.
    let mut ap = vec![F::zero(); n];
    let mut am = vec![F::zero(); n];
    // g = K·β, maintained incrementally.
    let mut g = vec![F::zero(); n];

    let mut objective = Vec::new();
    let mut obj = F::zero();
    objective.push(obj);

    let mut iterations = 0usize;
    let (bias, converged, final_gap) = loop {
        // Maximal violating pair. A coordinate may move up if it sits below
        // its box bound, down if above; the KKT scores are y − g ∓ ε.
        let mut m_val = F::neg_infinity();
        let mut m_min = F::infinity();
        let mut up: Option<(usize, bool)> = None;
        let mut low: Option<(usize, bool)> = None;
        for l in 0..n {
            let s_plus = y[l] - g[l] - eps;
            let s_minus = y[l] - g[l] + eps;
            if ap[l] < c && s_plus > m_val {
                m_val = s_plus;
                up = Some((l, true));
            }
            if am[l] > F::zero() && s_minus > m_val {
                m_val = s_minus;
                up = Some((l, false));
            }
            if ap[l] > F::zero() && s_plus < m_min {
                m_min = s_plus;
                low = Some((l, true));
            }
            if am[l] < c && s_minus < m_min {
                m_min = s_minus;
                low = Some((l, false));
            }
        }
        let (Some((i, i_plus)), Some((j, j_plus))) = (up, low) else {
            // Both index sets are provably nonempty while Σβ = 0; reachable
            // only through numeric catastrophe, so stop gracefully.
            break (F::zero(), false, F::infinity());
        };
        let gap = m_val - m_min;
        if gap <= params.tol {
            break ((m_val + m_min) / F::of(2.0), true, gap);
        }
        if iterations >= params.max_iter {
            break ((m_val + m_min) / F::of(2.0), false, gap);
        }

        let eta_true = kernel[i * n + i] + kernel[j * n + j] - F::of(2.0) * kernel[i * n + j];
        let eta = eta_true.max(F::of(1e-12));
        let mut t = gap / eta;
        let cap_i = if i_plus { c - ap[i] } else { am[i] };
        let cap_j = if j_plus { ap[j] } else { c - am[j] };
        t = t.min(cap_i).min(cap_j);

        // Analytic objective change for this step; the quadratic uses the
        // true curvature, so the recorded trace is exact up to rounding.
        let delta = -gap * t + F::of(0.5) * eta_true * t * t;
        debug_assert!(delta <= F::of(1e-9), "objective must not increase");
        obj += delta;
        objective.push(obj);

        // β_i rises by t, β_j falls by t; clamp so the box holds exactly.
        if i_plus {
            ap[i] = (ap[i] + t).min(c);
        } else {
            am[i] = (am[i] - t).max(F::zero());
        }
        if j_plus {
            ap[j] = (ap[j] - t).max(F::zero());
        } else {
            am[j] = (am[j] + t).min(c);
        }
        for l in 0..n {
            g[l] += t * (kernel[l * n + i] - kernel[l * n + j]);
        }
        iterations += 1;
    };

    let beta = ap.iter().zip(&am).map(|(&p, &m)| p - m).collect();
    SmoResult {
        beta,
        bias,
        converged,
        iterations,
        objective,
        final_gap,
    }
}

impl<F: Real> SvrModel<F> {
    pub fn support_vector_count(&self) -> usize {
        self.support_vectors.len()
    }

    pub fn coefficients(&self) -> &[F] {
        &self.coefficients
    }

    /// Recompute the KKT bracket width for an arbitrary dual point, from
    /// scratch. Used by tests to verify `final_gap` independently of the
    /// solver's incremental bookkeeping.
    pub fn kkt_gap(kernel: &[F], y: &[F], beta: &[F], c: F, eps: F) -> F {
        let n = y.len();
        let mut m_val = F::neg_infinity();
        let mut m_min = F::infinity();
        for l in 0..n {
            let mut g = F::zero();
            for (j, &b) in beta.iter().enumerate() {
                g += kernel[l * n + j] * b;
            }
            let s_plus = y[l] - g - eps;
            let s_minus = y[l] - g + eps;
            let (apl, aml) = if beta[l] >= F::zero() {
                (beta[l], F::zero())
            } else {
                (F::zero(), -beta[l])
            };
            if apl < c {
                m_val = m_val.max(s_plus);
            }
            if aml > F::zero() {
                m_val = m_val.max(s_minus);
            }
            if apl > F::zero() {
                m_min = m_min.min(s_plus);
            }
            if aml < c {
                m_min = m_min.min(s_minus);
            }
        }
        m_val - m_min
    }
}

impl<F: Real> Regressor<F> for SvrModel<F> {
    fn n_features(&self) -> usize {
        self.feature_means.len()
    }

    fn predict_row(&self, row: &[F]) -> F {
        let std_row: Vec<F> = row
            .iter()
            .enumerate()
            .map(|(c, &v)| (v - self.feature_means[c]) / self.feature_stds[c])
            .collect();
        let mut f = self.bias;
        for (sv, &coef) in self.support_vectors.iter().zip(&self.coefficients) {
            f += coef * rbf_kernel(&std_row, sv, self.gamma);
        }
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn line_problem(n: usize) -> (Matrix<f64>, Vec<f64>) {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 / n as f64]).collect();
        let y: Vec<f64> = rows.iter().map(|r| 2.0 * r[0]).collect();
        (Matrix::from_rows(rows).unwrap(), y)
    }

    #[test]
    fn constant_target_converges_instantly() {
        let x = Matrix::from_rows((0..30).map(|i| vec![i as f64]).collect()).unwrap();
        let y = vec![1.7; 30];
        let (model, trace) = train_svr_traced(&x, &y, &SvrParams::default()).unwrap();
        assert!(model.converged);
        assert_eq!(model.iterations, 0);
        assert_eq!(model.support_vector_count(), 0);
        assert!((model.bias - 1.7).abs() < 1e-12);
        assert!((model.predict_row(&[100.0]) - 1.7).abs() < 1e-12);
        assert_eq!(trace.objective, vec![0.0]);
        // The bracket is m − M = −2ε for a constant target.
        assert!((trace.final_gap + 0.2).abs() < 1e-12);
    }

    #[test]
    fn fits_a_line_within_the_tube() {
        let (x, y) = line_problem(60);
        let params = SvrParams {
            c: 100.0,
            gamma: Some(2.0),
            ..SvrParams::default()
        };
        let model = train_svr(&x, &y, &params).unwrap();
        assert!(
            model.converged,
            "did not converge in {} iters",
            model.iterations
        );
        let preds = model.predict(&x).unwrap();
        let mut worst: f64 = 0.0;
        for (p, t) in preds.iter().zip(&y) {
            worst = worst.max((p - t).abs());
        }
        // ε-insensitive fit: training error of roughly the tube width.
        assert!(worst < 0.2, "worst residual {worst}");
    }

    #[test]
    fn objective_decreases_monotonically_and_matches_direct_evaluation() {
        let (x, y) = line_problem(40);
        let (model, trace) = train_svr_traced(&x, &y, &SvrParams::default()).unwrap();
        assert!(model.converged);
        assert!(trace.objective.len() > 1);
        for w in trace.objective.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "objective rose: {} -> {}", w[0], w[1]);
        }

        // Recompute ½βᵀKβ − yᵀβ + ε·Σ|β| from the returned β alone.
        let n = y.len();
        let (means, stds) = column_standardization(&x);
        let std_rows: Vec<Vec<f64>> = (0..n)
            .map(|r| {
                x.row(r)
                    .iter()
                    .enumerate()
                    .map(|(c, &v)| (v - means[c]) / stds[c])
                    .collect()
            })
            .collect();
        let gamma = model.gamma;
        let mut quad = 0.0;
        let mut lin = 0.0;
        let mut l1 = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad +=
                    trace.beta[i] * trace.beta[j] * rbf_kernel(&std_rows[i], &std_rows[j], gamma);
            }
            lin += y[i] * trace.beta[i];
            l1 += trace.beta[i].abs();
        }
        let direct = 0.5 * quad - lin + model.params.epsilon * l1;
        let traced = *trace.objective.last().unwrap();
        assert!(
            (direct - traced).abs() < 1e-6 * (1.0 + direct.abs()),
            "direct {direct} vs traced {traced}"
        );
    }

    #[test]
    fn kkt_gap_verified_from_scratch_and_coefficients_boxed() {
        let (x, y) = line_problem(50);
        let params = SvrParams::<f64>::default();
        let (model, trace) = train_svr_traced(&x, &y, &params).unwrap();
        assert!(model.converged);
        assert!(trace.final_gap <= params.tol);

        let n = y.len();
        let (means, stds) = column_standardization(&x);
        let std_rows: Vec<Vec<f64>> = (0..n)
            .map(|r| {
                x.row(r)
                    .iter()
                    .enumerate()
                    .map(|(c, &v)| (v - means[c]) / stds[c])
                    .collect()
            })
            .collect();
        let mut kernel = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                kernel[i * n + j] = rbf_kernel(&std_rows[i], &std_rows[j], model.gamma);
            }
        }
        let gap = SvrModel::kkt_gap(&kernel, &y, &trace.beta, params.c, params.epsilon);
        assert!(gap <= params.tol, "independent gap {gap} > tol");

        for &v in model.coefficients() {
            assert!(v.abs() <= params.c, "coefficient {v} outside the box");
        }
        // Σβ = 0 is the dual equality constraint.
        let total: f64 = trace.beta.iter().sum();
        assert!(total.abs() < 1e-9, "sum of beta = {total}");
    }

    #[test]
    fn training_is_deterministic() {
        let (x, y) = line_problem(35);
        let a = train_svr(&x, &y, &SvrParams::default()).unwrap();
        let b = train_svr(&x, &y, &SvrParams::default()).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn iteration_cap_reports_nonconvergence() {
        // A scattered target needs many support vectors, so a tiny iteration
        // budget cannot reach the KKT gap tolerance.
        let mut rng = ChaCha12Rng::seed_from_u64(40);
        let rows: Vec<Vec<f64>> = (0..60).map(|i| vec![i as f64 / 60.0]).collect();
        let y: Vec<f64> = (0..60).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let x = Matrix::from_rows(rows).unwrap();
        let params = SvrParams {
            max_iter: 5,
            ..SvrParams::default()
        };
        let model = train_svr(&x, &y, &params).unwrap();
        assert!(!model.converged);
        assert_eq!(model.iterations, 5);
    }

    #[test]
    fn parameter_validation() {
        let (x, y) = line_problem(10);
        for bad in [
            SvrParams {
                c: 0.0,
                ..SvrParams::default()
            },
            SvrParams {
                epsilon: -0.1,
                ..SvrParams::default()
            },
            SvrParams {
                tol: 0.0,
                ..SvrParams::default()
            },
            SvrParams {
                gamma: Some(-1.0),
                ..SvrParams::default()
            },
        ] {
            assert!(train_svr(&x, &y, &bad).is_err());
        }
        assert!(train_svr(&x, &y[..5].to_vec().as_slice(), &SvrParams::default()).is_err());
    }

    #[test]
    fn constant_feature_does_not_poison_standardization() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64, 5.0]).collect();
        let y: Vec<f64> = (0..30).map(|i| (i as f64 * 0.3).sin()).collect();
        let x = Matrix::from_rows(rows).unwrap();
        let model = train_svr(&x, &y, &SvrParams::default()).unwrap();
        let preds = model.predict(&x).unwrap();
        assert!(preds.iter().all(|p| p.is_finite()));
    }
}
