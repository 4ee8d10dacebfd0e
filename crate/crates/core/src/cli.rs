//! Command-line surface: `fit`, `cv`, `ddc`, `label`, `simulate`, and
//! `network` subcommands writing CSV/SVG/DOT/JSON artifacts plus a run
//! manifest into an `--out` directory.
//!
//! Exit codes: 0 ok, 1 usage, 2 data error, 3 numerical failure.
//!
//! All randomness flows from the single `--seed`: cross-validation folds use
//! child stream 1, robust subset sampling stream 2 (via
//! [`crate::stats::derive_seed`]); `simulate` feeds the seed straight into
//! the generator.

use crate::cv::{cross_validate, CvConfig, Estimator};
use crate::dataset::Dataset;
use crate::ddc::{detect, render_cell_map, DdcConfig, RenderFormat};
use crate::enet::{fit_enet_logistic, FitResult, SolverConfig};
use crate::error::Error;
use crate::lts::{fit_enet_lts, pearson_residual, LtsConfig, ResidualVariant};
use crate::model::{Coefficients, PenaltySpec};
use crate::pipeline::io::{load_dataset, write_dataset, DataFormat};
use crate::pipeline::labels::{derive_label, read_clinical_records, write_labels_csv, write_suspects_csv, Label};
use crate::pipeline::network::{correlation_network, ClassFilter};
use crate::pipeline::synthetic::{generate_synthetic, generate_two_regime, SyntheticConfig};
use crate::stats::{derive_seed, normal_quantile};
use chrono::{SecondsFormat, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Array1;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation (exit 1); distinct from data/numerical errors.
    Usage(String),
    Lib(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Lib(e) => e.exit_code(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(Error::Io(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Lib(Error::Json(e))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

#[derive(Debug, Parser)]
#[command(
    name = "trimlogit",
    version,
    about = "Robust sparse logistic regression with cellwise outlier maps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one elastic-net logistic model (classical or trimmed-robust)
    Fit(FitArgs),
    /// Choose (alpha, lambda) by repeated stratified k-fold cross-validation
    Cv(CvArgs),
    /// Flag deviating cells and render the cell map
    Ddc(DdcArgs),
    /// Derive binary labels from clinical receptor-status columns
    Label(LabelArgs),
    /// Generate a seeded synthetic instance with recorded contamination
    Simulate(SimulateArgs),
    /// Export a correlation network over selected columns
    Network(NetworkArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Classical,
    Robust,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Classical => Estimator::Classical,
            EstimatorArg::Robust => Estimator::Robust,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Input dataset (CSV, or TSV by extension; first column is the row id)
    #[arg(long)]
    pub data: PathBuf,
    /// Response column name
    #[arg(long, default_value = "y")]
    pub label_col: String,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "classical")]
    pub estimator: EstimatorArg,
    /// Elastic-net mixing parameter (ignored with --cv)
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Penalty level; required unless --cv selects one
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Pick (alpha, lambda) by cross-validation before fitting
    #[arg(long)]
    pub cv: bool,
    #[arg(long, default_value_t = 5)]
    pub cv_folds: usize,
    #[arg(long, default_value_t = 10)]
    pub cv_repeats: usize,
    /// Trimming fraction for the robust estimator
    #[arg(long, default_value_t = 0.85)]
    pub h_fraction: f64,
    /// Per-column penalty factor override, repeatable: NAME=VALUE
    #[arg(long = "penalty-factor")]
    pub penalty_factor: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "y")]
    pub label_col: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "classical")]
    pub estimator: EstimatorArg,
    /// Comma-separated alpha grid; default 0.0,0.1,...,1.0
    #[arg(long)]
    pub alphas: Option<String>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    #[arg(long, default_value_t = 40)]
    pub n_lambda: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lambda_ratio: f64,
    #[arg(long, default_value_t = 0.85)]
    pub h_fraction: f64,
    #[arg(long = "penalty-factor")]
    pub penalty_factor: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct DdcArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Response column to exclude from the cell map, if the file has one
    #[arg(long)]
    pub label_col: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated column subset (default: all columns)
    #[arg(long)]
    pub genes: Option<String>,
    /// CSV of id,group pairs; render order groups rows into bands
    #[arg(long)]
    pub row_group: Option<PathBuf>,
    #[arg(long, default_value_t = 0.99)]
    pub flag_quantile: f64,
    #[arg(long, default_value_t = 0.5)]
    pub corr_threshold: f64,
    #[arg(long, default_value_t = 10)]
    pub max_predictors: usize,
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    /// Clinical records CSV/TSV
    #[arg(long)]
    pub clinical: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 300)]
    pub n: usize,
    #[arg(long, default_value_t = 30)]
    pub p: usize,
    #[arg(long, default_value_t = 5)]
    pub sparsity: usize,
    #[arg(long, default_value_t = 1.0)]
    pub signal: f64,
    #[arg(long, default_value_t = 0.5)]
    pub class_balance: f64,
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.0)]
    pub label_flip_rate: f64,
    #[arg(long, default_value_t = 0.0)]
    pub leverage_rate: f64,
    #[arg(long, default_value_t = 0.0)]
    pub cell_outlier_rate: f64,
    #[arg(long, default_value_t = 6.0)]
    pub cell_outlier_size: f64,
    /// Two-regime mode (for network demos): class-0 feature correlation
    #[arg(long)]
    pub rho0: Option<f64>,
    /// Two-regime mode: class-1 feature correlation
    #[arg(long)]
    pub rho1: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct NetworkArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Response column (needed for --class 0/1)
    #[arg(long)]
    pub label_col: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated gene list (default: all columns)
    #[arg(long)]
    pub genes: Option<String>,
    /// Row filter: all, 0, or 1
    #[arg(long, default_value = "all")]
    pub class: String,
    #[arg(long, default_value_t = 0.6)]
    pub threshold: f64,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Cv(args) => cmd_cv(args),
        Command::Ddc(args) => cmd_ddc(args),
        Command::Label(args) => cmd_label(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Network(args) => cmd_network(args),
    }
}

// --- manifest -------------------------------------------------------------

#[derive(Debug, Serialize)]
struct InputHash {
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct RunManifest {
    command: &'static str,
    version: &'static str,
    started_utc: String,
    finished_utc: String,
    inputs: Vec<InputHash>,
    params: serde_json::Value,
    outputs: Vec<String>,
}

struct ManifestBuilder {
    command: &'static str,
    started_utc: String,
    inputs: Vec<InputHash>,
}

impl ManifestBuilder {
    fn new(command: &'static str) -> Self {
        Self {
            command,
            started_utc: now_utc(),
            inputs: Vec::new(),
        }
    }

    fn add_input(&mut self, path: &Path) -> CliResult<()> {
        let bytes = fs::read(path).map_err(|e| Error::Data {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        self.inputs.push(InputHash {
            path: path.display().to_string(),
            sha256: hex::encode(hasher.finalize()),
        });
        Ok(())
    }

    fn finish(
        self,
        out_dir: &Path,
        params: serde_json::Value,
        outputs: &[&str],
    ) -> CliResult<()> {
        let manifest = RunManifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            started_utc: self.started_utc,
            finished_utc: now_utc(),
            inputs: self.inputs,
            params,
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        };
        let text = serde_json::to_string_pretty(&manifest)?;
        fs::write(out_dir.join("manifest.json"), text + "\n")?;
        Ok(())
    }
}

fn now_utc() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn ensure_out_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path)?;
    Ok(())
}

fn write_text(out_dir: &Path, name: &str, content: &str) -> CliResult<()> {
    fs::write(out_dir.join(name), content)?;
    Ok(())
}

// --- shared plumbing --------------------------------------------------------

fn load_complete(path: &Path, label_col: &str) -> CliResult<Dataset> {
    let loaded = load_dataset(path, DataFormat::infer(path), Some(label_col))?;
    loaded.data.require_complete()?;
    Ok(loaded.data)
}

fn resolve_penalty_factors(
    overrides: &[String],
    data: &Dataset,
) -> CliResult<Option<Array1<f64>>> {
    if overrides.is_empty() {
        return Ok(None);
    }
    let mut factors = Array1::ones(data.n_cols());
    for item in overrides {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| usage(format!("--penalty-factor expects NAME=VALUE, got '{item}'")))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| usage(format!("--penalty-factor value is not a number: '{value}'")))?;
        if !(v >= 0.0) {
            return Err(usage(format!("penalty factor for '{name}' must be >= 0, got {v}")));
        }
        let j = data.col_index(name.trim())?;
        factors[j] = v;
    }
    Ok(Some(factors))
}

fn parse_gene_list(raw: &Option<String>, data: &Dataset) -> CliResult<Vec<String>> {
    match raw {
        None => Ok(data.col_names().to_vec()),
        Some(s) => {
            let genes: Vec<String> = s
                .split(',')
                .map(|g| g.trim().to_string())
                .filter(|g| !g.is_empty())
                .collect();
            if genes.is_empty() {
                return Err(usage("--genes list is empty"));
            }
            Ok(genes)
        }
    }
}

/// Nonzero coefficients, intercept first, features sorted by coefficient
/// value (descending) then name.
fn coefficients_csv(coefs: &Coefficients, names: &[String]) -> String {
    let mut rows: Vec<(String, f64)> = names
        .iter()
        .zip(coefs.beta.iter())
        .filter(|(_, b)| **b != 0.0)
        .map(|(n, b)| (n.clone(), *b))
        .collect();
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut out = String::from("name,coefficient\n");
    out.push_str(&format!("(intercept),{}\n", coefs.intercept));
    for (name, b) in rows {
        out.push_str(&format!("{name},{b}\n"));
    }
    out
}

fn outliers_csv(
    data: &Dataset,
    flags: &[bool],
    residuals: &[f64],
    fitted: &[f64],
) -> String {
    let mut out = String::from("row_id,residual,fitted_prob\n");
    for i in 0..data.n_rows() {
        if flags[i] {
            out.push_str(&format!(
                "{},{},{}\n",
                data.row_ids()[i],
                residuals[i],
                fitted[i]
            ));
        }
    }
    out
}

// --- fit ---------------------------------------------------------------------

fn cmd_fit(args: FitArgs) -> CliResult<()> {
    if !args.cv && args.lambda.is_none() {
        return Err(usage("fit needs either --lambda or --cv"));
    }
    if args.cv && args.lambda.is_some() {
        return Err(usage("--cv and --lambda are mutually exclusive"));
    }
    ensure_out_dir(&args.out)?;
    let mut manifest = ManifestBuilder::new("fit");
    manifest.add_input(&args.data)?;

    let data = load_complete(&args.data, &args.label_col)?;
    let factors = resolve_penalty_factors(&args.penalty_factor, &data)?;
    let estimator: Estimator = args.estimator.into();

    let (alpha, lambda, cv_summary) = if args.cv {
        let cv = CvConfig {
            k_folds: args.cv_folds,
            n_repeats: args.cv_repeats,
            estimator,
            rng_seed: derive_seed(args.seed, 1),
            ..CvConfig::default()
        };
        let lts = LtsConfig {
            h_fraction: args.h_fraction,
            rng_seed: derive_seed(args.seed, 2),
            ..LtsConfig::default()
        };
        let solver = match estimator {
            Estimator::Classical => SolverConfig::default(),
            Estimator::Robust => SolverConfig::robust(),
        };
        let result = cross_validate(&data, &cv, Some(&lts), &solver)?;
        let summary = serde_json::json!({
            "best_alpha": result.best_alpha,
            "best_lambda": result.best_lambda,
        });
        (result.best_alpha, result.best_lambda, Some(summary))
    } else {
        (args.alpha, args.lambda.expect("checked above"), None)
    };

    let spec = match factors {
        Some(f) => PenaltySpec::with_factors(alpha, lambda, f),
        None => PenaltySpec::new(alpha, lambda),
    };

    let cutoff = normal_quantile(0.975);
    let (coefs, summary, outliers, warnings) = match estimator {
        Estimator::Classical => {
            let fit = fit_enet_logistic(&data, &spec, &SolverConfig::default())?;
            let flags = crate::enet::flag_outliers_classical(&fit, &data, cutoff, ResidualVariant::AsPrinted)?;
            let y = data.require_y()?;
            let residuals: Vec<f64> = (0..data.n_rows())
                .map(|i| pearson_residual(y[i], fit.fitted_prob[i], ResidualVariant::AsPrinted))
                .collect();
            let out_csv = outliers_csv(&data, &flags, &residuals, fit.fitted_prob.as_slice().unwrap());
            let summary = fit_summary(&fit, estimator, &spec, flags.iter().filter(|f| **f).count(), None);
            (fit.coefs.clone(), summary, out_csv, fit.warnings.clone())
        }
        Estimator::Robust => {
            let lts = LtsConfig {
                h_fraction: args.h_fraction,
                rng_seed: derive_seed(args.seed, 2),
                ..LtsConfig::default()
            };
            let fit = fit_enet_lts(&data, &spec, &lts, &SolverConfig::robust())?;
            let out_csv = outliers_csv(
                &data,
                &fit.outlier_flags,
                fit.pearson_residuals.as_slice().unwrap(),
                fit.raw_fit.fitted_prob.as_slice().unwrap(),
            );
            let reweighted = fit.reweighted_coefs().clone();
            let summary = fit_summary(
                &fit.reweighted_fit,
                estimator,
                &spec,
                fit.n_outliers(),
                Some(fit.split.h),
            );
            (reweighted, summary, out_csv, fit.warnings.clone())
        }
    };

    let mut summary = summary;
    if let Some(cv_part) = cv_summary {
        summary["cv"] = cv_part;
    }
    summary["warnings"] = serde_json::json!(warnings);

    write_text(&args.out, "coefficients.csv", &coefficients_csv(&coefs, data.col_names()))?;
    write_text(&args.out, "outliers.csv", &outliers)?;
    write_text(&args.out, "summary.json", &(serde_json::to_string_pretty(&summary)? + "\n"))?;

    manifest.finish(
        &args.out,
        serde_json::json!({
            "data": args.data.display().to_string(),
            "label_col": args.label_col,
            "estimator": format!("{:?}", args.estimator).to_lowercase(),
            "alpha": alpha,
            "lambda": lambda,
            "cv": args.cv,
            "cv_folds": args.cv_folds,
            "cv_repeats": args.cv_repeats,
            "h_fraction": args.h_fraction,
            "penalty_factor": args.penalty_factor,
            "seed": args.seed,
            "cv_seed": derive_seed(args.seed, 1),
            "subset_seed": derive_seed(args.seed, 2),
        }),
        &["coefficients.csv", "outliers.csv", "summary.json"],
    )
}

fn fit_summary(
    fit: &FitResult,
    estimator: Estimator,
    spec: &PenaltySpec,
    n_outliers: usize,
    h: Option<usize>,
) -> serde_json::Value {
    serde_json::json!({
        "estimator": match estimator { Estimator::Classical => "classical", Estimator::Robust => "robust" },
        "alpha": spec.alpha,
        "lambda": spec.lambda,
        "n_nonzero": fit.coefs.n_nonzero(),
        "n_outliers": n_outliers,
        "deviance": fit.deviance_total,
        "converged": fit.converged,
        "h": h,
    })
}

// --- cv ------------------------------------------------------------------------

fn cmd_cv(args: CvArgs) -> CliResult<()> {
    let alpha_grid = match &args.alphas {
        None => CvConfig::default().alpha_grid,
        Some(s) => {
            let grid: Vec<f64> = s
                .split(',')
                .map(|t| t.trim())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<f64>().map_err(|_| usage(format!("bad alpha '{t}'"))))
                .collect::<CliResult<_>>()?;
            if grid.is_empty() {
                return Err(usage("--alphas grid is empty"));
            }
            grid
        }
    };

    ensure_out_dir(&args.out)?;
    let mut manifest = ManifestBuilder::new("cv");
    manifest.add_input(&args.data)?;

    let data = load_complete(&args.data, &args.label_col)?;
    // penalty factors are resolved for validation; CV currently applies a
    // uniform penalty, so reject overrides loudly instead of ignoring them
    if !args.penalty_factor.is_empty() {
        let _ = resolve_penalty_factors(&args.penalty_factor, &data)?;
        return Err(usage(
            "--penalty-factor is supported by `fit`, not `cv`; fit with explicit (alpha, lambda)",
        ));
    }

    let estimator: Estimator = args.estimator.into();
    let cv = CvConfig {
        k_folds: args.folds,
        n_repeats: args.repeats,
        alpha_grid,
        n_lambda: args.n_lambda,
        lambda_ratio: args.lambda_ratio,
        stratified: true,
        rng_seed: derive_seed(args.seed, 1),
        estimator,
    };
    let lts = LtsConfig {
        h_fraction: args.h_fraction,
        rng_seed: derive_seed(args.seed, 2),
        ..LtsConfig::default()
    };
    let solver = match estimator {
        Estimator::Classical => SolverConfig::default(),
        Estimator::Robust => SolverConfig::robust(),
    };
    let result = cross_validate(&data, &cv, Some(&lts), &solver)?;

    let mut table = Vec::new();
    result.write_csv(&mut table)?;
    write_text(&args.out, "cv_table.csv", std::str::from_utf8(&table).expect("utf8 csv"))?;

    let best_cell = result
        .cells
        .iter()
        .find(|c| c.alpha == result.best_alpha && c.lambda == result.best_lambda);
    let summary = serde_json::json!({
        "estimator": match estimator { Estimator::Classical => "classical", Estimator::Robust => "robust" },
        "best_alpha": result.best_alpha,
        "best_lambda": result.best_lambda,
        "best_mean_deviance": best_cell.and_then(|c| c.mean_deviance),
        "best_n_nonzero": best_cell.map(|c| c.n_nonzero),
        "k_folds": result.k_folds,
        "n_repeats": result.n_repeats,
        "warnings": result.warnings,
    });
    write_text(&args.out, "summary.json", &(serde_json::to_string_pretty(&summary)? + "\n"))?;

    manifest.finish(
        &args.out,
        serde_json::json!({
            "data": args.data.display().to_string(),
            "label_col": args.label_col,
            "estimator": format!("{:?}", args.estimator).to_lowercase(),
            "alphas": cv.alpha_grid,
            "folds": args.folds,
            "repeats": args.repeats,
            "n_lambda": args.n_lambda,
            "lambda_ratio": args.lambda_ratio,
            "h_fraction": args.h_fraction,
            "seed": args.seed,
            "cv_seed": cv.rng_seed,
            "subset_seed": lts.rng_seed,
        }),
        &["cv_table.csv", "summary.json"],
    )
}

// --- ddc -------------------------------------------------------------------------

fn cmd_ddc(args: DdcArgs) -> CliResult<()> {
    ensure_out_dir(&args.out)?;
    let mut manifest = ManifestBuilder::new("ddc");
    manifest.add_input(&args.data)?;

    let loaded = load_dataset(
        &args.data,
        DataFormat::infer(&args.data),
        args.label_col.as_deref(),
    )?;
    let mut data = loaded.data;
    if let Some(raw) = &args.genes {
        let genes = parse_gene_list(&Some(raw.clone()), &data)?;
        data = data.select_columns(&genes)?;
    }

    let config = DdcConfig {
        corr_threshold: args.corr_threshold,
        flag_quantile: args.flag_quantile,
        max_predictors: args.max_predictors,
        ..DdcConfig::default()
    };
    let map = detect(&data, &config)?;

    let row_order = match &args.row_group {
        None => None,
        Some(path) => {
            manifest.add_input(path)?;
            Some(banded_row_order(path, &data)?)
        }
    };

    let mut csv = Vec::new();
    map.write_csv(&mut csv)?;
    write_text(&args.out, "cellmap.csv", std::str::from_utf8(&csv).expect("utf8 csv"))?;
    let svg = render_cell_map(&map, row_order.as_deref(), None, RenderFormat::Svg)?;
    write_text(&args.out, "cellmap.svg", &svg)?;
    let txt = render_cell_map(&map, row_order.as_deref(), None, RenderFormat::Txt)?;
    write_text(&args.out, "cellmap.txt", &txt)?;

    let summary = serde_json::json!({
        "n_rows": map.n_rows(),
        "n_cols": map.n_cols(),
        "cutoff": map.cutoff,
        "n_flagged": map.n_flagged(),
        "n_missing_cells": loaded.n_missing,
    });
    write_text(&args.out, "summary.json", &(serde_json::to_string_pretty(&summary)? + "\n"))?;

    manifest.finish(
        &args.out,
        serde_json::json!({
            "data": args.data.display().to_string(),
            "label_col": args.label_col,
            "genes": args.genes,
            "row_group": args.row_group.as_ref().map(|p| p.display().to_string()),
            "flag_quantile": args.flag_quantile,
            "corr_threshold": args.corr_threshold,
            "max_predictors": args.max_predictors,
        }),
        &["cellmap.csv", "cellmap.svg", "cellmap.txt", "summary.json"],
    )
}

/// Read `id,group` pairs and produce a render order with groups contiguous
/// (groups in first-appearance order, rows in file order, unlisted rows
/// appended in original order).
fn banded_row_order(path: &Path, data: &Dataset) -> CliResult<Vec<usize>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Data {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut groups: Vec<String> = Vec::new();
    let mut by_group: std::collections::BTreeMap<String, Vec<usize>> = Default::default();
    let mut listed = vec![false; data.n_rows()];
    for (k, line) in text.lines().enumerate() {
        if k == 0 || line.trim().is_empty() {
            continue; // header
        }
        let mut parts = line.splitn(2, [',', '\t']);
        let id = parts.next().unwrap_or("").trim();
        let group = parts.next().unwrap_or("").trim().to_string();
        let i = data
            .row_ids()
            .iter()
            .position(|r| r == id)
            .ok_or_else(|| Error::Invalid(format!("row-group id '{id}' not in dataset")))?;
        if !groups.contains(&group) {
            groups.push(group.clone());
        }
        by_group.entry(group).or_default().push(i);
        listed[i] = true;
    }
    let mut order = Vec::with_capacity(data.n_rows());
    for g in &groups {
        order.extend(by_group[g].iter().copied());
    }
    order.extend((0..data.n_rows()).filter(|&i| !listed[i]));
    Ok(order)
}

// --- label -------------------------------------------------------------------------

fn cmd_label(args: LabelArgs) -> CliResult<()> {
    ensure_out_dir(&args.out)?;
    let mut manifest = ManifestBuilder::new("label");
    manifest.add_input(&args.clinical)?;

    let records = read_clinical_records(&args.clinical)?;
    let results: Vec<_> = records.iter().map(derive_label).collect();

    let mut labels = Vec::new();
    write_labels_csv(&mut labels, &records, &results)?;
    write_text(&args.out, "labels.csv", std::str::from_utf8(&labels).expect("utf8 csv"))?;
    let mut suspects = Vec::new();
    write_suspects_csv(&mut suspects, &records, &results)?;
    write_text(&args.out, "suspects.csv", std::str::from_utf8(&suspects).expect("utf8 csv"))?;

    let count = |l: Label| results.iter().filter(|r| r.label == l).count();
    let summary = serde_json::json!({
        "n_records": records.len(),
        "n_tnbc": count(Label::Tnbc),
        "n_non_tnbc": count(Label::NonTnbc),
        "n_unlabelable": count(Label::Unlabelable),
        "n_suspect": results.iter().filter(|r| r.suspect).count(),
    });
    write_text(&args.out, "summary.json", &(serde_json::to_string_pretty(&summary)? + "\n"))?;

    manifest.finish(
        &args.out,
        serde_json::json!({ "clinical": args.clinical.display().to_string() }),
        &["labels.csv", "suspects.csv", "summary.json"],
    )
}

// --- simulate -------------------------------------------------------------------------

fn cmd_simulate(args: SimulateArgs) -> CliResult<()> {
    ensure_out_dir(&args.out)?;
    let manifest = ManifestBuilder::new("simulate");

    let two_regime = match (args.rho0, args.rho1) {
        (Some(r0), Some(r1)) => Some((r0, r1)),
        (None, None) => None,
        _ => return Err(usage("--rho0 and --rho1 must be given together")),
    };

    let mut outputs: Vec<&str> = vec!["dataset.csv"];
    let params;
    match two_regime {
        Some((rho0, rho1)) => {
            let data = generate_two_regime(args.n, args.p, rho0, rho1, args.class_balance, args.seed)?;
            let mut csv = Vec::new();
            write_dataset(&mut csv, &data, DataFormat::Csv)?;
            write_text(&args.out, "dataset.csv", std::str::from_utf8(&csv).expect("utf8 csv"))?;
            params = serde_json::json!({
                "mode": "two-regime",
                "n": args.n, "p": args.p,
                "rho0": rho0, "rho1": rho1,
                "class_balance": args.class_balance,
                "seed": args.seed,
            });
        }
        None => {
            let config = SyntheticConfig {
                n: args.n,
                p: args.p,
                sparsity: args.sparsity,
                signal: args.signal,
                class_balance: args.class_balance,
                rho: args.rho,
                label_flip_rate: args.label_flip_rate,
                leverage_rate: args.leverage_rate,
                cell_outlier_rate: args.cell_outlier_rate,
                cell_outlier_size: args.cell_outlier_size,
                seed: args.seed,
            };
            let (data, truth) = generate_synthetic(&config)?;
            let mut csv = Vec::new();
            write_dataset(&mut csv, &data, DataFormat::Csv)?;
            write_text(&args.out, "dataset.csv", std::str::from_utf8(&csv).expect("utf8 csv"))?;
            write_text(&args.out, "ground_truth.json", &(truth.to_json()? + "\n"))?;
            outputs.push("ground_truth.json");
            params = serde_json::to_value(&config)?;
        }
    }

    manifest.finish(&args.out, params, &outputs)
}

// --- network -------------------------------------------------------------------------

fn cmd_network(args: NetworkArgs) -> CliResult<()> {
    let filter = ClassFilter::parse(&args.class).map_err(usage)?;
    if filter != ClassFilter::All && args.label_col.is_none() {
        return Err(usage("--class 0/1 needs --label-col to identify the response"));
    }

    ensure_out_dir(&args.out)?;
    let mut manifest = ManifestBuilder::new("network");
    manifest.add_input(&args.data)?;

    let loaded = load_dataset(
        &args.data,
        DataFormat::infer(&args.data),
        args.label_col.as_deref(),
    )?;
    let data = loaded.data;
    let genes = parse_gene_list(&args.genes, &data)?;
    let net = correlation_network(&data, &genes, filter, args.threshold)?;

    write_text(&args.out, "network.dot", &net.to_dot())?;
    write_text(&args.out, "network.json", &(net.to_json()? + "\n"))?;

    manifest.finish(
        &args.out,
        serde_json::json!({
            "data": args.data.display().to_string(),
            "label_col": args.label_col,
            "genes": genes,
            "class": args.class,
            "threshold": args.threshold,
        }),
        &["network.dot", "network.json"],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn penalty_factor_parsing() {
        let data = Dataset::from_matrix(ndarray::array![[1.0, 2.0], [3.0, 4.0], [5.0, 7.0]], None).unwrap();
        let f = resolve_penalty_factors(&["x2=0.5".into()], &data).unwrap().unwrap();
        assert_eq!(f.to_vec(), vec![1.0, 0.5]);

        let err = resolve_penalty_factors(&["x2".into()], &data).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        let err = resolve_penalty_factors(&["x2=abc".into()], &data).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        let err = resolve_penalty_factors(&["nope=1".into()], &data).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(resolve_penalty_factors(&[], &data).unwrap().is_none());
    }

    #[test]
    fn usage_errors_exit_with_one() {
        assert_eq!(usage("x").exit_code(), 1);
        assert_eq!(CliError::from(Error::DegenerateResponse).exit_code(), 3);
        assert_eq!(
            CliError::from(Error::UnknownColumn("g".into())).exit_code(),
            2
        );
    }

    #[test]
    fn coefficient_csv_is_sorted_by_value() {
        let coefs = Coefficients {
            intercept: 0.25,
            beta: ndarray::array![0.0, -1.5, 2.0, 0.5],
        };
        let names: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let csv = coefficients_csv(&coefs, &names);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "name,coefficient");
        assert_eq!(lines[1], "(intercept),0.25");
        assert_eq!(lines[2], "c,2");
        assert_eq!(lines[3], "d,0.5");
        assert_eq!(lines[4], "b,-1.5");
        assert_eq!(lines.len(), 5); // zero coefficient omitted
    }
}
