//! One function per subcommand, plus the pipeline's report type.

use std::path::{Path, PathBuf};
use std::time::Instant;

use cope_core::dataset::{split_indices, CleanPolicy, ColumnRoles, Dataset};
use cope_core::regress::forest::train_forest;
use cope_core::regress::metrics::EvalReport;
use cope_core::regress::svr::train_svr;
use cope_core::regress::{Matrix, Model, Regressor};
use cope_core::select::{rank_features, select_threshold, select_top, SelectionReport};
use cope_core::synth::{
    sample_gaussian_copula, sample_regression, GaussianCopulaSpec, MarginalTransform,
    RegressionSpec,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{Config, ModelKind, SynthKind};
use crate::CliError;

/// Everything `run_report.json` carries. `timings_ms` is the one field two
/// otherwise-identical runs may disagree on, so it stays isolated at the end.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub generator: String,
    pub config: Config,
    pub rows_loaded: usize,
    pub rows_removed: usize,
    pub selection: SelectionReport<f64>,
    pub split: SplitSummary,
    pub model: ModelSummary,
    pub eval_selected: EvalReport<f64>,
    pub eval_all: EvalReport<f64>,
    pub timings_ms: Timings,
}

/// Which rows went where, pinned by a digest so "both models saw the same
/// split" is checkable after the fact.
#[derive(Debug, Serialize)]
pub struct SplitSummary {
    pub train_rows: usize,
    pub test_rows: usize,
    pub train_fraction: f64,
    pub seed: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct ModelSummary {
    pub kind: String,
    pub features_selected: Vec<String>,
    pub converged: Option<bool>,
    pub iterations: Option<usize>,
}

#[derive(Debug, Default, Serialize)]
pub struct Timings {
    pub load: u128,
    pub estimate: u128,
    pub train_selected: u128,
    pub train_all: u128,
    pub evaluate: u128,
    pub total: u128,
}

fn ms(from: Instant) -> u128 {
    from.elapsed().as_millis()
}

/// Load, clean, and resolve column roles — the preamble every data command shares.
fn prepare(config: &Config) -> Result<(Dataset<f64>, ColumnRoles, usize), CliError> {
    let path = config.input()?;
    let raw = Dataset::load_csv(path, config.has_header)?;
    let policy = CleanPolicy {
        sentinels: config.clean.sentinels.clone(),
    };
    let (data, removed) = raw.clean(&policy);
    if data.row_count() == 0 {
        return Err(CliError::Validation(format!(
            "{} has no usable rows after cleaning",
            path.display()
        )));
    }
    let roles = ColumnRoles::assign(
        data.names(),
        config.target()?,
        &config.features,
        &config.ignored,
    )?;
    println!(
        "loaded {} ({} rows, {} columns; {} rows dropped by cleaning)",
        path.display(),
        data.row_count(),
        data.column_count(),
        removed
    );
    Ok((data, roles, removed))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| {
                CliError::Validation(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    std::fs::write(path, contents)
        .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("report serializes");
    out.push('\n');
    out
}

/// Rank every candidate feature by its estimated MI with the target.
pub fn cmd_estimate(config: &Config) -> Result<SelectionReport<f64>, CliError> {
    let (data, roles, _) = prepare(config)?;
    let report = rank_features(
        &data,
        roles.target(),
        roles.features(),
        &config.estimator.params(),
    )?;
    for e in &report.entries {
        println!("  {:<24} {:+.4} nats", e.feature, e.mi_nats);
    }
    write(&config.out_dir.join("ranking.csv"), &report.to_csv())?;
    write(&config.out_dir.join("ranking.json"), &to_pretty(&report))?;
    Ok(report)
}

fn apply_selection(
    config: &Config,
    report: &SelectionReport<f64>,
) -> Result<SelectionReport<f64>, CliError> {
    let section = config.selection()?;
    let cut = if let Some(m) = section.top_m {
        select_top(report, m)?
    } else {
        let tau = section.threshold.expect("validated");
        select_threshold(report, tau)
    };
    if cut.selected.is_empty() {
        return Err(CliError::EmptySelection(format!(
            "no feature cleared the MI threshold {}; best was {} at {:.4} nats",
            section
                .threshold
                .expect("only the threshold rule can select nothing"),
            cut.entries[0].feature,
            cut.entries[0].mi_nats,
        )));
    }
    Ok(cut)
}

/// Rank, then cut the ranking down to the configured selection.
pub fn cmd_select(config: &Config) -> Result<SelectionReport<f64>, CliError> {
    let (data, roles, _) = prepare(config)?;
    let report = rank_features(
        &data,
        roles.target(),
        roles.features(),
        &config.estimator.params(),
    )?;
    let cut = apply_selection(config, &report)?;
    println!("selected {:?}", cut.selected);
    write(&config.out_dir.join("ranking.csv"), &cut.to_csv())?;
    write(&config.out_dir.join("ranking.json"), &to_pretty(&cut))?;
    Ok(cut)
}

fn fit(config: &Config, x: &Matrix<f64>, y: &[f64]) -> Result<Model<f64>, CliError> {
    match config.model.kind {
        ModelKind::Forest => Ok(Model::Forest(train_forest(
            x,
            y,
            &config.model.forest.params(),
        )?)),
        ModelKind::Svr => {
            let model = train_svr(x, y, &config.model.svr.params())?;
            if !model.converged {
                return Err(CliError::Convergence(format!(
                    "SVR stopped at the {}-iteration cap without reaching tol={}",
                    model.iterations, config.model.svr.tol
                )));
            }
            Ok(Model::Svr(model))
        }
    }
}

/// Train one model on every row, using the configured feature list as-is.
pub fn cmd_train(config: &Config) -> Result<(), CliError> {
    let (data, roles, _) = prepare(config)?;
    let x = Matrix::from_dataset(&data, roles.features())?;
    let y = data.column(roles.target())?;
    let model = fit(config, &x, y)?;
    println!(
        "trained {:?} model on {} rows x {} features",
        config.model.kind,
        x.rows(),
        x.cols()
    );
    write(&config.out_dir.join("model.json"), &to_pretty(&model))?;
    Ok(())
}

/// Score a previously trained model against the configured input.
pub fn cmd_evaluate(config: &Config) -> Result<EvalReport<f64>, CliError> {
    let (data, roles, _) = prepare(config)?;
    let model_path = config.out_dir.join("model.json");
    let text = std::fs::read_to_string(&model_path).map_err(|e| {
        CliError::Validation(format!(
            "cannot read {} (run `cope train` first?): {e}",
            model_path.display()
        ))
    })?;
    let model: Model<f64> = serde_json::from_str(&text).map_err(|e| {
        CliError::Validation(format!("bad model file {}: {e}", model_path.display()))
    })?;
    let x = Matrix::from_dataset(&data, roles.features())?;
    let predictions = model.predict(&x)?;
    let report = cope_core::regress::metrics::evaluate(&predictions, data.column(roles.target())?)?;
    print!("{}", report.to_csv());
    write(
        &config.out_dir.join("eval_report.json"),
        &to_pretty(&report),
    )?;
    Ok(report)
}

/// The end-to-end run: rank, select, split, train the selected-features model
/// and the all-features model, score both on the shared held-out rows.
pub fn cmd_pipeline(config: &Config) -> Result<RunReport, CliError> {
    let started = Instant::now();
    let mut timings = Timings::default();

    let stage = Instant::now();
    let (data, roles, removed) = prepare(config)?;
    timings.load = ms(stage);

    let stage = Instant::now();
    let ranking = rank_features(
        &data,
        roles.target(),
        roles.features(),
        &config.estimator.params(),
    )?;
    let selection = apply_selection(config, &ranking)?;
    timings.estimate = ms(stage);
    println!("selected {:?}", selection.selected);

    let (train_idx, test_idx) = split_indices(
        data.row_count(),
        config.split.train_fraction,
        config.split.seed,
    )?;
    let mut hasher = Sha256::new();
    for idx in train_idx.iter().chain(&test_idx) {
        hasher.update(idx.to_le_bytes());
    }
    hasher.update((train_idx.len() as u64).to_le_bytes());
    let split = SplitSummary {
        train_rows: train_idx.len(),
        test_rows: test_idx.len(),
        train_fraction: config.split.train_fraction,
        seed: config.split.seed,
        sha256: format!("{:x}", hasher.finalize()),
    };
    let (train, test) = data.split(config.split.train_fraction, config.split.seed)?;
    let y_train = train.column(roles.target())?.to_vec();
    let y_test = test.column(roles.target())?.to_vec();

    let stage = Instant::now();
    let model_selected = fit(
        config,
        &Matrix::from_dataset(&train, &selection.selected)?,
        &y_train,
    )?;
    timings.train_selected = ms(stage);

    let stage = Instant::now();
    let model_all = fit(
        config,
        &Matrix::from_dataset(&train, roles.features())?,
        &y_train,
    )?;
    timings.train_all = ms(stage);

    let stage = Instant::now();
    let pred_selected =
        model_selected.predict(&Matrix::from_dataset(&test, &selection.selected)?)?;
    let pred_all = model_all.predict(&Matrix::from_dataset(&test, roles.features())?)?;
    let eval_selected = cope_core::regress::metrics::evaluate(&pred_selected, &y_test)?;
    let eval_all = cope_core::regress::metrics::evaluate(&pred_all, &y_test)?;
    timings.evaluate = ms(stage);

    println!(
        "test RMSE: {:.4} with {} selected features vs {:.4} with all {}",
        eval_selected.overall.rmse,
        selection.selected.len(),
        eval_all.overall.rmse,
        roles.features().len()
    );

    let (converged, iterations) = match &model_selected {
        Model::Svr(m) => (Some(m.converged), Some(m.iterations)),
        Model::Forest(_) => (None, None),
    };
    timings.total = ms(started);
    let report = RunReport {
        schema_version: 1,
        generator: format!("cope {}", env!("CARGO_PKG_VERSION")),
        config: config.clone(),
        rows_loaded: data.row_count(),
        rows_removed: removed,
        selection,
        split,
        model: ModelSummary {
            kind: match config.model.kind {
                ModelKind::Forest => "forest".into(),
                ModelKind::Svr => "svr".into(),
            },
            features_selected: report_features(&ranking),
            converged,
            iterations,
        },
        eval_selected,
        eval_all,
        timings_ms: timings,
    };

    write(
        &config.out_dir.join("ranking.csv"),
        &report.selection.to_csv(),
    )?;
    write(
        &config.out_dir.join("ranking.json"),
        &to_pretty(&report.selection),
    )?;
    write(
        &config.out_dir.join("model.json"),
        &to_pretty(&model_selected),
    )?;
    write(&config.out_dir.join("run_report.json"), &to_pretty(&report))?;
    Ok(report)
}

fn report_features(ranking: &SelectionReport<f64>) -> Vec<String> {
    ranking.entries.iter().map(|e| e.feature.clone()).collect()
}

/// Generate a synthetic CSV fixture.
pub fn cmd_synth(config: &Config) -> Result<PathBuf, CliError> {
    let section = config.synth()?;
    let dataset: Dataset<f64> = match section.kind {
        SynthKind::Regression => {
            let spec = RegressionSpec {
                rows: section.rows,
                seed: section.seed,
                form: section.form,
                n_noise_features: section.n_noise_features,
                noise_sd: section.noise_sd,
            };
            sample_regression(&spec)?.dataset
        }
        SynthKind::Copula => {
            let correlation = section.correlation.clone().ok_or_else(|| {
                CliError::Validation(
                    "[synth] kind = \"copula\" requires a correlation matrix".into(),
                )
            })?;
            let marginals = section
                .marginals
                .clone()
                .unwrap_or_else(|| vec![MarginalTransform::Identity; correlation.len()]);
            let spec = GaussianCopulaSpec {
                correlation,
                marginals,
                rows: section.rows,
                seed: section.seed,
            };
            sample_gaussian_copula(&spec)?
        }
    };
    let path = if section.output.is_relative() {
        config.out_dir.join(&section.output)
    } else {
        section.output.clone()
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| {
                CliError::Validation(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    dataset.write_csv(&path)?;
    println!(
        "wrote {} ({} rows, {} columns)",
        path.display(),
        dataset.row_count(),
        dataset.column_count()
    );
    Ok(path)
}
