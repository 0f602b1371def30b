//! Command-line front end: argument types, the three subcommands and their
//! report formats.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::criterion::{build_cache, pairwise_mvmr_matrix};
use crate::dataset::{
    iris, load_csv, make_artificial_iris, min_max_normalize, stratified_split, Dataset, LabelColumn,
};
use crate::density::{DEFAULT_GRID_POINTS, MIN_GRID_POINTS};
use crate::error::{Error, Result};
use crate::evaluate::{evaluate_columns, evaluate_subset, pearson, EvalReport};
use crate::search::{self, GaConfig, GaTrace};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TEST_FRACTION: f64 = 0.2;
pub const DEFAULT_REPEATS: usize = 10;

/// Pass thresholds of the Iris reproduction.
pub mod thresholds {
    pub const REDUNDANCY_ZERO: f64 = 1e-9;
    pub const PEARSON_NORMALIZED_MAX: f64 = -0.80;
    pub const ORDER_SLACK: f64 = 0.02;
    pub const PW_DIAGONAL_MIN: f64 = 0.95;
}

#[derive(Debug, Parser)]
#[command(name = "mvmr-fs", version, about = "Filter feature selection by class-density overlap and Wasserstein redundancy")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select a feature subset and evaluate it on a held-out split.
    Select(SelectArgs),
    /// Export the pairwise subset-score matrix.
    Matrix(MatrixArgs),
    /// Rebuild the Artificial Iris experiment and check it.
    ReproduceIris(ReproduceArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// CSV file with a header row.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Label column, by name or 0-based index. Defaults to the last column.
    #[arg(long)]
    pub label: Option<String>,
}

impl InputArgs {
    fn label_column(&self) -> LabelColumn {
        match &self.label {
            None => LabelColumn::Last,
            Some(s) => s.parse().expect("infallible"),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DensityArgs {
    /// Gaussian kernel bandwidth.
    #[arg(long, default_value_t = 1.0)]
    pub bandwidth: f64,
    /// Grid nodes per density estimate.
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
    /// Skip min-max normalisation before measuring.
    #[arg(long)]
    pub no_normalize: bool,
}

#[derive(Debug, Clone, Args)]
pub struct GaArgs {
    #[arg(long, default_value_t = search::DEFAULT_POPULATION)]
    pub pop_size: usize,
    /// Generations without a new best individual before stopping.
    #[arg(long = "stagnation", default_value_t = search::DEFAULT_STAGNATION)]
    pub stagnation: usize,
    #[arg(long, default_value_t = 0.90)]
    pub pc_max: f64,
    #[arg(long, default_value_t = 0.50)]
    pub pc_min: f64,
    #[arg(long, default_value_t = 0.10)]
    pub pm_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub pm_min: f64,
    #[arg(long, default_value_t = search::DEFAULT_MAX_FEATURES)]
    pub max_features: usize,
    #[arg(long, default_value_t = search::DEFAULT_MAX_GENERATIONS)]
    pub max_generations: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub density: DensityArgs,
    #[command(flatten)]
    pub ga: GaArgs,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_TEST_FRACTION)]
    pub test_fraction: f64,
    /// Estimate densities on the whole dataset instead of the training split.
    #[arg(long)]
    pub fit_on_all: bool,
    /// JSON report destination.
    #[arg(long, short)]
    pub output: PathBuf,
    /// CSV file to append one summary row per run to.
    #[arg(long)]
    pub results_log: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MatrixArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub density: DensityArgs,
    /// CSV destination. Without --csv or --json the CSV goes to stdout.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReproduceArgs {
    /// Iris CSV; the bundled copy is used when omitted.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub bandwidth: f64,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Number of stratified 8:2 splits the accuracy matrix is averaged over.
    #[arg(long, default_value_t = DEFAULT_REPEATS)]
    pub repeats: usize,
    #[arg(long, default_value_t = DEFAULT_TEST_FRACTION)]
    pub test_fraction: f64,
    /// JSON report destination.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Everything a selection run depends on.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub input: PathBuf,
    #[serde(serialize_with = "display")]
    pub label: LabelColumn,
    pub bandwidth: f64,
    pub grid_points: usize,
    pub normalize: bool,
    pub fit_on_all: bool,
    pub test_fraction: f64,
    pub seed: u64,
    pub ga: GaConfig,
}

fn display<S: serde::Serializer>(v: &LabelColumn, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        check_density(self.bandwidth, self.grid_points)?;
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "test fraction must be in (0, 1), got {}",
                self.test_fraction
            )));
        }
        self.ga.validate()
    }
}

fn check_density(bandwidth: f64, grid_points: usize) -> Result<()> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::InvalidConfig(format!("bandwidth must be positive, got {bandwidth}")));
    }
    if grid_points < MIN_GRID_POINTS {
        return Err(Error::InvalidConfig(format!(
            "grid points must be at least {MIN_GRID_POINTS}, got {grid_points}"
        )));
    }
    Ok(())
}

impl From<&SelectArgs> for RunConfig {
    fn from(a: &SelectArgs) -> Self {
        RunConfig {
            input: a.input.input.clone(),
            label: a.input.label_column(),
            bandwidth: a.density.bandwidth,
            grid_points: a.density.grid_points,
            normalize: !a.density.no_normalize,
            fit_on_all: a.fit_on_all,
            test_fraction: a.test_fraction,
            seed: a.seed,
            ga: GaConfig {
                population_size: a.ga.pop_size,
                stagnation_limit: a.ga.stagnation,
                pc_max: a.ga.pc_max,
                pc_min: a.ga.pc_min,
                pm_max: a.ga.pm_max,
                pm_min: a.ga.pm_min,
                max_features: a.ga.max_features,
                max_generations: a.ga.max_generations,
                seed: a.seed,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitSummary {
    pub train_size: usize,
    pub test_size: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectionReport {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub config: RunConfig,
    /// Which rows the densities were estimated on: "train" or "all".
    pub density_fit: &'static str,
    pub feature_names: Vec<String>,
    pub selected_indices: Vec<usize>,
    pub selected_names: Vec<String>,
    pub mvmr_score: f64,
    pub split: SplitSummary,
    pub evaluation: EvalReport,
    pub sim: Vec<f64>,
    pub trace: GaTrace,
}

/// Load, normalise, split, fit the cache, search and evaluate.
pub fn run_select(cfg: &RunConfig) -> Result<SelectionReport> {
    cfg.validate()?;
    let raw = load_csv(&cfg.input, &cfg.label)?;
    select_on(&raw, cfg)
}

pub fn select_on(raw: &Dataset, cfg: &RunConfig) -> Result<SelectionReport> {
    cfg.validate()?;
    let ds = if cfg.normalize {
        min_max_normalize(raw)
    } else {
        raw.clone()
    };
    let split = stratified_split(&ds, cfg.test_fraction, cfg.seed)?;
    let fit = if cfg.fit_on_all { &ds } else { &split.train };
    let cache = build_cache(fit, cfg.bandwidth, cfg.grid_points, cfg.normalize)?;
    let (best, trace) = search::run(&cache, &cfg.ga)?;
    let evaluation = evaluate_subset(&split, &best.mask, cfg.seed)?;
    let selected_indices = best.mask.indices();
    Ok(SelectionReport {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        config: cfg.clone(),
        density_fit: if cfg.fit_on_all { "all" } else { "train" },
        feature_names: ds.feature_names().to_vec(),
        selected_names: selected_indices
            .iter()
            .map(|&i| ds.feature_names()[i].clone())
            .collect(),
        selected_indices,
        mvmr_score: best.fitness.expect("search returns evaluated individuals"),
        split: SplitSummary {
            train_size: split.train.n_samples(),
            test_size: split.test.n_samples(),
        },
        evaluation,
        sim: cache.sim().to_vec(),
        trace,
    })
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(contents)?;
            f.sync_all()
        })
        .and_then(|_| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io_err)
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

fn append_results_log(path: &Path, report: &SelectionReport) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let fresh = !path.exists() || fs::metadata(path).map_err(io_err)?.len() == 0;
    let file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err)?;
    let mut w = csv::Writer::from_writer(file);
    if fresh {
        w.write_record([
            "input", "seed", "selected", "n_selected", "mvmr_score", "knn", "gnb", "dt", "avg_acc",
            "variance",
        ])?;
    }
    let e = &report.evaluation;
    w.write_record([
        report.config.input.display().to_string(),
        report.config.seed.to_string(),
        report.selected_names.join(";"),
        report.selected_indices.len().to_string(),
        report.mvmr_score.to_string(),
        e.knn.to_string(),
        e.gnb.to_string(),
        e.dt.to_string(),
        e.avg_acc.to_string(),
        e.variance.to_string(),
    ])?;
    w.flush().map_err(io_err)
}

pub fn cmd_select(args: &SelectArgs) -> Result<SelectionReport> {
    let cfg = RunConfig::from(args);
    let report = run_select(&cfg)?;
    write_atomic(&args.output, &to_json(&report)?)?;
    if let Some(log_path) = &args.results_log {
        append_results_log(log_path, &report)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixReport {
    pub schema_version: u32,
    pub feature_names: Vec<String>,
    pub normalized: bool,
    pub bandwidth: f64,
    pub grid_points: usize,
    pub sim: Vec<f64>,
    pub red: Vec<Vec<f64>>,
    pub mvmr: Vec<Vec<f64>>,
}

/// Pairwise scores over the whole dataset.
pub fn matrix_report(
    ds: &Dataset,
    bandwidth: f64,
    grid_points: usize,
    normalize: bool,
) -> Result<MatrixReport> {
    check_density(bandwidth, grid_points)?;
    let cache = build_cache(ds, bandwidth, grid_points, normalize)?;
    Ok(MatrixReport {
        schema_version: SCHEMA_VERSION,
        feature_names: ds.feature_names().to_vec(),
        normalized: normalize,
        bandwidth,
        grid_points,
        sim: cache.sim().to_vec(),
        red: cache.red_matrix().to_vec(),
        mvmr: pairwise_mvmr_matrix(&cache),
    })
}

/// Square matrix as CSV with a header row and a leading name column.
pub fn matrix_csv(names: &[String], matrix: &[Vec<f64>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(std::iter::once("feature").chain(names.iter().map(String::as_str)))?;
    for (name, row) in names.iter().zip(matrix) {
        w.write_record(std::iter::once(name.clone()).chain(row.iter().map(f64::to_string)))?;
    }
    w.into_inner()
        .map_err(|e| Error::Numerical(format!("CSV buffer: {e}")))
}

pub fn cmd_matrix(args: &MatrixArgs) -> Result<MatrixReport> {
    let ds = load_csv(&args.input.input, &args.input.label_column())?;
    let report = matrix_report(
        &ds,
        args.density.bandwidth,
        args.density.grid_points,
        !args.density.no_normalize,
    )?;
    let csv_bytes = matrix_csv(&report.feature_names, &report.mvmr)?;
    if let Some(path) = &args.csv {
        write_atomic(path, &csv_bytes)?;
    }
    if let Some(path) = &args.json {
        write_atomic(path, &to_json(&report)?)?;
    }
    if args.csv.is_none() && args.json.is_none() {
        std::io::stdout()
            .write_all(&csv_bytes)
            .map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReproductionReport {
    pub schema_version: u32,
    pub feature_names: Vec<String>,
    pub bandwidth: f64,
    pub grid_points: usize,
    pub seed: u64,
    pub repeats: usize,
    /// Densities use all 150 rows; accuracies use stratified splits.
    pub density_fit: &'static str,
    /// Pearson inputs: every cell of both matrices, flattened row-major.
    pub pearson_cells: &'static str,
    pub accuracy: Vec<Vec<f64>>,
    pub mvmr_normalized: Vec<Vec<f64>>,
    pub mvmr_raw: Vec<Vec<f64>>,
    pub sim_normalized: Vec<f64>,
    pub red_normalized: Vec<Vec<f64>>,
    pub red_raw: Vec<Vec<f64>>,
    pub pearson_normalized: f64,
    pub pearson_raw: f64,
    pub checks: Vec<Check>,
}

impl ReproductionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn flatten(m: &[Vec<f64>]) -> Vec<f64> {
    m.iter().flatten().copied().collect()
}

/// Average 3-classifier accuracy for every column pair `{i, j}`; the
/// diagonal feeds the same column twice. Averaged over `repeats` splits
/// seeded `seed, seed + 1, ...`.
pub fn pairwise_accuracy(
    ds: &Dataset,
    test_fraction: f64,
    seed: u64,
    repeats: usize,
) -> Result<Vec<Vec<f64>>> {
    if repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be at least 1".into()));
    }
    let d = ds.n_features();
    let mut acc = vec![vec![0.0; d]; d];
    for r in 0..repeats {
        let split_seed = seed.wrapping_add(r as u64);
        let split = stratified_split(ds, test_fraction, split_seed)?;
        for i in 0..d {
            for j in i..d {
                let rep: EvalReport = evaluate_columns(&split, &[i, j], split_seed)?;
                acc[i][j] += rep.avg_acc / repeats as f64;
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            acc[i][j] = acc[j][i];
        }
    }
    Ok(acc)
}

/// Builds Artificial Iris from a 4-feature Iris dataset and computes the
/// accuracy matrix, both score matrices and their correlations.
pub fn reproduce_iris(
    iris_ds: &Dataset,
    bandwidth: f64,
    grid_points: usize,
    seed: u64,
    repeats: usize,
    test_fraction: f64,
) -> Result<ReproductionReport> {
    use thresholds::*;
    check_density(bandwidth, grid_points)?;
    let art = make_artificial_iris(iris_ds)?;
    let norm_cache = build_cache(&art, bandwidth, grid_points, true)?;
    let raw_cache = build_cache(&art, bandwidth, grid_points, false)?;
    let mvmr_normalized = pairwise_mvmr_matrix(&norm_cache);
    let mvmr_raw = pairwise_mvmr_matrix(&raw_cache);
    let accuracy = pairwise_accuracy(&min_max_normalize(&art), test_fraction, seed, repeats)?;
    let pearson_normalized = pearson(&flatten(&mvmr_normalized), &flatten(&accuracy))?;
    let pearson_raw = pearson(&flatten(&mvmr_raw), &flatten(&accuracy))?;

    let (sl, sw, pl, pw, sl2) = (0, 1, 2, 3, 4);
    let mut checks = Vec::new();
    let mut check = |name: &str, passed: bool, detail: String| {
        checks.push(Check {
            name: name.to_string(),
            passed,
            detail,
        })
    };

    let row_gap = (0..5)
        .map(|j| (mvmr_normalized[sl2][j] - mvmr_normalized[sl][j]).abs())
        .fold(0.0, f64::max);
    let red_dup = norm_cache.red(sl, sl2);
    check(
        "normalized duplicate is fully redundant",
        red_dup <= REDUNDANCY_ZERO && row_gap <= REDUNDANCY_ZERO,
        format!("red(SL,2SL) = {red_dup:.3e}, max |row 2SL - row SL| = {row_gap:.3e}"),
    );

    let raw_dup = raw_cache.red(sl, sl2);
    check(
        "raw duplicate is not detected",
        raw_dup > 0.0 && mvmr_raw[sl][sl2] != mvmr_raw[sl][sl],
        format!(
            "red(SL,2SL) = {raw_dup:.4}, MVMR(SL,2SL) = {:.4}, MVMR(SL,SL) = {:.4}",
            mvmr_raw[sl][sl2], mvmr_raw[sl][sl]
        ),
    );

    check(
        "normalized scores track accuracy",
        pearson_normalized <= PEARSON_NORMALIZED_MAX
            && pearson_normalized.abs() - pearson_raw.abs() > 0.0,
        format!(
            "pearson normalized = {pearson_normalized:.4}, raw = {pearson_raw:.4}, gain = {:.4}",
            pearson_normalized.abs() - pearson_raw.abs()
        ),
    );

    let s = norm_cache.sim();
    let diag: Vec<f64> = (0..5).map(|i| accuracy[i][i]).collect();
    let sim_order = s[pw] < s[pl] && s[pl] < s[sl] && s[sl] < s[sw];
    let acc_order = diag[pw] >= diag[pl] - ORDER_SLACK
        && diag[pl] >= diag[sl] - ORDER_SLACK
        && diag[sl] >= diag[sw] - ORDER_SLACK;
    check(
        "single-feature orderings agree",
        sim_order && acc_order,
        format!(
            "sim SL/SW/PL/PW = {:.4}/{:.4}/{:.4}/{:.4}, accuracy = {:.4}/{:.4}/{:.4}/{:.4}",
            s[sl], s[sw], s[pl], s[pw], diag[sl], diag[sw], diag[pl], diag[pw]
        ),
    );

    check(
        "petal width alone classifies well",
        diag[pw] >= PW_DIAGONAL_MIN,
        format!("accuracy(PW,PW) = {:.4}", diag[pw]),
    );

    let symmetric = (0..5).all(|i| (0..5).all(|j| accuracy[i][j] == accuracy[j][i]));
    check("accuracy matrix is symmetric", symmetric, String::new());

    Ok(ReproductionReport {
        schema_version: SCHEMA_VERSION,
        feature_names: art.feature_names().to_vec(),
        bandwidth,
        grid_points,
        seed,
        repeats,
        density_fit: "all",
        pearson_cells: "all 25 cells, row-major",
        accuracy,
        mvmr_normalized,
        mvmr_raw,
        sim_normalized: s.to_vec(),
        red_normalized: norm_cache.red_matrix().to_vec(),
        red_raw: raw_cache.red_matrix().to_vec(),
        pearson_normalized,
        pearson_raw,
        checks,
    })
}

fn print_matrix(title: &str, names: &[String], m: &[Vec<f64>]) {
    println!("{title}");
    print!("{:>6}", "");
    for n in names {
        print!("{n:>9}");
    }
    println!();
    for (n, row) in names.iter().zip(m) {
        print!("{n:>6}");
        for v in row {
            print!("{v:>9.4}");
        }
        println!();
    }
    println!();
}

pub fn cmd_reproduce_iris(args: &ReproduceArgs) -> Result<ReproductionReport> {
    let ds = match &args.input {
        Some(path) => {
            let label = match &args.label {
                None => LabelColumn::Last,
                Some(s) => s.parse().expect("infallible"),
            };
            load_csv(path, &label)?
        }
        None => iris(),
    };
    let report = reproduce_iris(
        &ds,
        args.bandwidth,
        args.grid_points,
        args.seed,
        args.repeats,
        args.test_fraction,
    )?;
    let names = &report.feature_names;
    print_matrix("pairwise accuracy (mean of KNN, GNB, DT)", names, &report.accuracy);
    print_matrix("pairwise MVMR, normalized", names, &report.mvmr_normalized);
    print_matrix("pairwise MVMR, raw", names, &report.mvmr_raw);
    println!("pearson normalized: {:.4}", report.pearson_normalized);
    println!("pearson raw:        {:.4}", report.pearson_raw);
    println!();
    for c in &report.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {}  {}", c.name, c.detail);
    }
    if let Some(path) = &args.output {
        write_atomic(path, &to_json(&report)?)?;
    }
    Ok(report)
}
