//! The TOML run configuration.
//!
//! Every knob has a default matching the library's, so a minimal config is
//! just `input` + `target`. Unknown keys are rejected — a typo should fail
//! loudly, not silently run with defaults.

use std::path::{Path, PathBuf};

use cope_core::entropy::EstimatorParams;
use cope_core::knn::Norm;
use cope_core::regress::forest::ForestParams;
use cope_core::regress::svr::SvrParams;
use cope_core::synth::{MarginalTransform, RegressionForm};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// CSV to analyse. Required by every subcommand except `synth`.
    pub input: Option<PathBuf>,
    #[serde(default = "yes")]
    pub has_header: bool,
    /// Name of the column to predict.
    pub target: Option<String>,
    /// Candidate features; empty means every non-target, non-ignored column.
    #[serde(default)]
    pub features: Vec<String>,
    #[serde(default)]
    pub ignored: Vec<String>,
    /// Where reports and models land. Overridable with `--out`.
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub clean: CleanSection,
    #[serde(default)]
    pub estimator: EstimatorSection,
    pub selection: Option<SelectionSection>,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub split: SplitSection,
    pub synth: Option<SynthSection>,
}

fn yes() -> bool {
    true
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CleanSection {
    /// Values treated as missing-data codes; rows containing one are dropped.
    pub sentinels: Vec<f64>,
}

impl Default for CleanSection {
    fn default() -> Self {
        Self {
            sentinels: vec![-9999.0, -99.0, 9999.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorSection {
    pub k: usize,
    pub norm: Norm,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        let p = EstimatorParams::default();
        Self {
            k: p.k,
            norm: p.norm,
        }
    }
}

impl EstimatorSection {
    pub fn params(&self) -> EstimatorParams {
        EstimatorParams {
            k: self.k,
            norm: self.norm,
        }
    }
}

/// Exactly one of the two cut rules must be set.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionSection {
    pub top_m: Option<usize>,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Forest,
    Svr,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub kind: ModelKind,
    #[serde(default)]
    pub forest: ForestSection,
    #[serde(default)]
    pub svr: SvrSection,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            kind: ModelKind::Forest,
            forest: ForestSection::default(),
            svr: SvrSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForestSection {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub features_per_split: Option<usize>,
    pub seed: u64,
}

impl Default for ForestSection {
    fn default() -> Self {
        let p = ForestParams::default();
        Self {
            n_trees: p.n_trees,
            max_depth: p.max_depth,
            min_leaf: p.min_leaf,
            features_per_split: p.features_per_split,
            seed: p.seed,
        }
    }
}

impl ForestSection {
    pub fn params(&self) -> ForestParams {
        ForestParams {
            n_trees: self.n_trees,
            max_depth: self.max_depth,
            min_leaf: self.min_leaf,
            features_per_split: self.features_per_split,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvrSection {
    pub c: f64,
    pub epsilon: f64,
    pub gamma: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvrSection {
    fn default() -> Self {
        let p: SvrParams<f64> = SvrParams::default();
        Self {
            c: p.c,
            epsilon: p.epsilon,
            gamma: p.gamma,
            tol: p.tol,
            max_iter: p.max_iter,
        }
    }
}

impl SvrSection {
    pub fn params(&self) -> SvrParams<f64> {
        SvrParams {
            c: self.c,
            epsilon: self.epsilon,
            gamma: self.gamma,
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitSection {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSection {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    Regression,
    Copula,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSection {
    pub kind: SynthKind,
    /// Output CSV path; relative paths land inside `out_dir`.
    pub output: PathBuf,
    #[serde(default = "default_rows")]
    pub rows: usize,
    #[serde(default)]
    pub seed: u64,
    // Regression knobs.
    #[serde(default)]
    pub form: RegressionForm,
    #[serde(default = "default_noise_features")]
    pub n_noise_features: usize,
    #[serde(default = "default_noise_sd")]
    pub noise_sd: f64,
    // Copula knobs.
    pub correlation: Option<Vec<Vec<f64>>>,
    pub marginals: Option<Vec<MarginalTransform>>,
}

fn default_rows() -> usize {
    1000
}

fn default_noise_features() -> usize {
    4
}

fn default_noise_sd() -> f64 {
    0.1
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| CliError::Validation(format!("bad config {}: {e}", path.display())))
    }

    /// Apply the CLI flag overrides: `--seed` retunes every seeded stage,
    /// `--out` redirects the artifact directory.
    pub fn apply_overrides(&mut self, seed: Option<u64>, out: Option<PathBuf>) {
        if let Some(s) = seed {
            self.split.seed = s;
            self.model.forest.seed = s;
            if let Some(synth) = &mut self.synth {
                synth.seed = s;
            }
        }
        if let Some(dir) = out {
            self.out_dir = dir;
        }
    }

    pub fn input(&self) -> Result<&Path, CliError> {
        self.input
            .as_deref()
            .ok_or_else(|| CliError::Validation("config is missing `input`".into()))
    }

    pub fn target(&self) -> Result<&str, CliError> {
        self.target
            .as_deref()
            .ok_or_else(|| CliError::Validation("config is missing `target`".into()))
    }

    pub fn selection(&self) -> Result<&SelectionSection, CliError> {
        let sel = self.selection.as_ref().ok_or_else(|| {
            CliError::Validation("config is missing a [selection] section".into())
        })?;
        match (sel.top_m, sel.threshold) {
            (Some(_), Some(_)) => Err(CliError::Validation(
                "[selection] sets both top_m and threshold; pick one".into(),
            )),
            (None, None) => Err(CliError::Validation(
                "[selection] must set top_m or threshold".into(),
            )),
            _ => Ok(sel),
        }
    }

    pub fn synth(&self) -> Result<&SynthSection, CliError> {
        self.synth
            .as_ref()
            .ok_or_else(|| CliError::Validation("config is missing a [synth] section".into()))
    }
}
