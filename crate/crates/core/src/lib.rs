//! Copula-entropy estimation and variable selection for nonlinear
//! regression.
//!
//! The core idea: the entropy of a random vector splits into what the
//! marginals contribute and what the dependence contributes — the copula
//! entropy. Rank-transform each column to its empirical CDF value, estimate
//! the entropy of those pseudo-observations with a k-nearest-neighbour
//! estimator, and you have a mutual-information measure (`MI = −CE`) that is
//! model-free, captures nonlinear association, and is immune to monotone
//! recalibration of any variable.
//!
//! On top of the estimator sit the pieces of a photometric-redshift-style
//! benchmark: MI-based feature ranking ([`select`]), bagged trees and RBF
//! support vector regression ([`regress`]), stratified evaluation metrics,
//! and synthetic generators with closed-form ground truth ([`synth`]).
//!
//! Everything numeric is generic over [`scalar::Real`] (`f32` or `f64`);
//! the aliases at the crate root fix `f64`, which is what the accuracy
//! guarantees are stated for.
//!
//! ```
//! use cope_core::{entropy::EstimatorParams, synth};
//!
//! // A correlated Gaussian pair has MI = −½·ln(1−ρ²) exactly; the
//! // rank-based estimate lands nearby without being told the marginals.
//! let spec = synth::correlated_pair_spec(0.6f64, 2000, 7);
//! let data = synth::sample_gaussian_copula(&spec).unwrap();
//! let cols = vec!["x1".to_string(), "x2".to_string()];
//! let mi = cope_core::entropy::mutual_information(&data, &cols, &EstimatorParams::default()).unwrap();
//! assert!((mi - synth::gaussian_mi(0.6)).abs() < 0.05);
//! ```

pub mod dataset;
pub mod entropy;
pub mod error;
pub mod knn;
pub mod rank;
pub mod regress;
pub mod scalar;
pub mod seeding;
pub mod select;
pub mod synth;

pub use error::{Error, Result};
pub use knn::Norm;
pub use rank::TiePolicy;
pub use scalar::Real;

/// Concrete `f64` instantiations of the generic types.
pub type Dataset = dataset::Dataset<f64>;
pub type CleanPolicy = dataset::CleanPolicy<f64>;
pub type PseudoObservations = rank::PseudoObservations<f64>;
pub type PointSet = knn::PointSet<f64>;
pub type CeEstimate = entropy::CeEstimate<f64>;
pub type SelectionReport = select::SelectionReport<f64>;
pub type Matrix = regress::Matrix<f64>;
pub type Model = regress::Model<f64>;
pub type ForestModel = regress::ForestModel<f64>;
pub type SvrModel = regress::SvrModel<f64>;
pub type SvrParams = regress::SvrParams<f64>;
pub type EvalReport = regress::EvalReport<f64>;

pub use entropy::EstimatorParams;
pub use regress::ForestParams;
