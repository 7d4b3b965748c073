//! Command-line front end: fitting, intervals, and the simulation lab.
//!
//! Every invocation writes its outputs plus a `run_manifest.json` recording
//! the full argument vector, master seed, and SHA-256 digest of each file.
//! Replication work is reduced in a fixed order, so rerunning a `sim`
//! command with the same seed produces byte-identical CSVs regardless of
//! `--threads`.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rlp_core::bootstrap::BootEstimator;
use rlp_core::cv::estimate_sigma2;
use rlp_core::data::{load_csv, standardize, StandardizedDesign};
use rlp_core::interval::destandardize;
use rlp_core::lasso::{fit_lasso_path, LambdaGrid, LassoConfig, LassoFit};
use rlp_core::manifest::RunManifest;
use rlp_core::posterior::rlp_intervals;
use rlp_core::report;
use rlp_core::rng::RngStream;
use rlp_core::scenario::{BetaLaw, CorrKind, ScenarioSpec};
use rlp_core::sim::{
    cv_pipeline, exact_conjugate, run_bootstrap_bias, run_corr_pair_experiment,
    run_coverage_experiment, run_lambda_heatmap, run_ridge_compare, run_stability,
    symmetric_grid, BootLambda, MethodSpec, RunConfig,
};
use rlp_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "rlp",
    version,
    about = "Penalized-regression intervals and a seeded Monte Carlo lab"
)]
struct Cli {
    /// Worker threads (default: the RLP_THREADS variable, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory all outputs are written into (created if missing).
    #[arg(long, global = true, default_value = ".")]
    output_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the penalized path on a CSV dataset and write coefficients.
    Fit(FitArgs),
    /// Per-coordinate confidence intervals on a CSV dataset.
    Ci(CiArgs),
    /// Seeded Monte Carlo experiments.
    #[command(subcommand)]
    Sim(SimCommand),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scale {
    /// Original predictor units.
    Raw,
    /// Unit-variance predictor scale used internally by the solver.
    Standardized,
}

#[derive(Args)]
struct FitArgs {
    /// CSV file with a header row.
    #[arg(long)]
    input: PathBuf,
    /// Header name of the response column.
    #[arg(long)]
    response: String,
    /// Penalty: "cv" for cross-validation or an explicit value.
    #[arg(long, default_value = "cv")]
    lambda: String,
    #[arg(long, default_value_t = 10)]
    cv_folds: usize,
    /// Master seed (drives cross-validation fold assignment).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Scale::Raw)]
    scale: Scale,
}

#[derive(Args)]
struct CiArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    response: String,
    #[arg(long, default_value_t = 0.8)]
    level: f64,
    /// Penalty: "cv" or an explicit value.
    #[arg(long, default_value = "cv")]
    lambda: String,
    /// Noise variance: "estimate" or an explicit value.
    #[arg(long, default_value = "estimate")]
    sigma2: String,
    #[arg(long, default_value_t = 10)]
    cv_folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Scale::Raw)]
    scale: Scale,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LawArg {
    Laplace,
    T3,
    Normal,
    Uniform,
    Beta01,
    Sparse1,
    Sparse2,
    Sparse3,
}

impl From<LawArg> for BetaLaw {
    fn from(v: LawArg) -> Self {
        match v {
            LawArg::Laplace => BetaLaw::Laplace,
            LawArg::T3 => BetaLaw::T3,
            LawArg::Normal => BetaLaw::Normal,
            LawArg::Uniform => BetaLaw::Uniform,
            LawArg::Beta01 => BetaLaw::Beta01,
            LawArg::Sparse1 => BetaLaw::Sparse1,
            LawArg::Sparse2 => BetaLaw::Sparse2,
            LawArg::Sparse3 => BetaLaw::Sparse3,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CorrArg {
    /// Autoregressive decay between neighboring columns.
    Ar1,
    /// Correlation only between immediate neighbors.
    Banded,
    /// Correlation only between the first two columns.
    FirstPair,
}

impl From<CorrArg> for CorrKind {
    fn from(v: CorrArg) -> Self {
        match v {
            CorrArg::Ar1 => CorrKind::Ar1,
            CorrArg::Banded => CorrKind::Banded,
            CorrArg::FirstPair => CorrKind::FirstPair,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// Conditional-posterior intervals at a cross-validated penalty.
    Rlp,
    /// Closed-form ridge posterior at a fixed penalty.
    RidgePosterior,
    /// Percentile intervals from lasso refits on resampled rows.
    BootstrapLasso,
    /// Percentile intervals from ridge refits on resampled rows.
    BootstrapRidge,
}

/// Scenario description shared by `sim coverage` and `sim heatmap`.
#[derive(Args)]
struct ScenarioArgs {
    /// JSON scenario file; overrides the inline scenario flags.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = LawArg::Laplace)]
    law: LawArg,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 101)]
    p: usize,
    /// Neighboring-column correlation.
    #[arg(long, default_value_t = 0.0)]
    rho: f64,
    #[arg(long, value_enum, default_value_t = CorrArg::Ar1)]
    corr: CorrArg,
    /// Signal-to-noise ratio the coefficients are rescaled to.
    #[arg(long, default_value_t = 1.0)]
    snr: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
}

impl ScenarioArgs {
    fn build(&self) -> Result<ScenarioSpec> {
        let spec = match &self.scenario {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                serde_json::from_str(&text)?
            }
            None => ScenarioSpec {
                n: self.n,
                p: self.p,
                beta_law: self.law.into(),
                rho: self.rho,
                corr: self.corr.into(),
                beta_scale: 1.0,
                snr: Some(self.snr),
                sigma2: self.sigma2,
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Subcommand)]
enum SimCommand {
    /// Average-coverage study of one interval method on one scenario.
    Coverage(CoverageArgs),
    /// Coverage relative to nominal across a descending penalty sweep.
    Heatmap(HeatmapArgs),
    /// Ridge versus conditional-posterior intervals under a collinear pair.
    CorrPair(CorrPairArgs),
    /// Ridge posterior versus ridge bootstrap as the dimension grows.
    RidgeCompare(RidgeCompareArgs),
    /// Four-term decomposition of the estimate gap, original versus
    /// bootstrap refits.
    BootstrapBias(BiasArgs),
    /// Selection frequency on fresh data versus under resampling.
    Stability(StabilityArgs),
    /// Exact scalar conjugate coverage curve (no Monte Carlo).
    ExactConjugate(ExactArgs),
}

#[derive(Args)]
struct CoverageArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Rlp)]
    method: MethodArg,
    /// Fixed penalty for the ridge-posterior and bootstrap methods.
    #[arg(long)]
    lambda: Option<f64>,
    /// Known noise variance for the ridge-posterior method
    /// (default: the scenario's noise variance).
    #[arg(long)]
    method_sigma2: Option<f64>,
    /// Bootstrap replications per dataset for the bootstrap methods.
    #[arg(long, default_value_t = 300)]
    boot_b: usize,
    #[arg(long, default_value_t = 250)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.8)]
    level: f64,
    #[arg(long, default_value_t = 10)]
    cv_folds: usize,
    /// Also write one row per (replication, variable).
    #[arg(long)]
    detail: bool,
}

#[derive(Args)]
struct HeatmapArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, default_value_t = 25)]
    grid_size: usize,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.8)]
    level: f64,
    #[arg(long, default_value_t = 10)]
    cv_folds: usize,
}

#[derive(Args)]
struct CorrPairArgs {
    #[arg(long, default_value_t = 250)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.8)]
    level: f64,
    #[arg(long, default_value_t = 10)]
    cv_folds: usize,
    /// Ridge penalty (matched to the implied prior of the design).
    #[arg(long, default_value_t = 1.0)]
    ridge_lambda: f64,
}

#[derive(Args)]
struct RidgeCompareArgs {
    /// Dimensions to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = vec![20, 100, 200])]
    p_list: Vec<usize>,
    #[arg(long, default_value_t = 300)]
    boot_b: usize,
    #[arg(long, default_value_t = 200)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.8)]
    level: f64,
}

#[derive(Args)]
struct BiasArgs {
    #[arg(long, default_value_t = 200)]
    boot_b: usize,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    cv_folds: usize,
}

#[derive(Args)]
struct StabilityArgs {
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 500)]
    p: usize,
    #[arg(long, default_value_t = 200)]
    boot_b: usize,
    #[arg(long, default_value_t = 200)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    cv_folds: usize,
}

#[derive(Args)]
struct ExactArgs {
    #[arg(long, default_value_t = 1.0)]
    tau2: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    #[arg(long, default_value_t = 0.8)]
    level: f64,
    /// Half-width of the evaluation grid for the coverage curve.
    #[arg(long, default_value_t = 3.0)]
    theta_max: f64,
    #[arg(long, default_value_t = 121)]
    theta_steps: usize,
}

fn main() {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("RLP_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .filter(|&t| t > 0);
    if let Some(t) = threads {
        // Ignore failure: the pool can only be sized once per process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }

    let started = Instant::now();
    match dispatch(&cli, started) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}

fn dispatch(cli: &Cli, started: Instant) -> Result<()> {
    std::fs::create_dir_all(&cli.output_dir)?;
    let (name, seed, files) = match &cli.command {
        Command::Fit(a) => run_fit(cli, a)?,
        Command::Ci(a) => run_ci(cli, a)?,
        Command::Sim(s) => run_sim(cli, s)?,
    };
    let mut manifest = RunManifest::new(name, std::env::args().collect());
    manifest.master_seed = seed;
    manifest.threads = rayon::current_num_threads();
    manifest.wall_ms = started.elapsed().as_millis();
    manifest.record_outputs(&cli.output_dir, &files)?;
    manifest.write(&cli.output_dir)?;
    Ok(())
}

/// Resolve a `"cv"`-or-number flag into a fitted path point plus the noise
/// estimate at it (where estimable).
struct ResolvedFit {
    fit: LassoFit,
    index: usize,
    lambda: f64,
    sigma2_hat: Option<f64>,
}

fn resolve_fit(
    sd: StandardizedDesign,
    lambda_flag: &str,
    cv_folds: usize,
    seed: u64,
) -> Result<(StandardizedDesign, ResolvedFit)> {
    let cfg = LassoConfig::default();
    if lambda_flag == "cv" {
        let cvf = cv_pipeline(sd, cv_folds, &cfg, RngStream::root(seed).stream(1))?;
        let resolved = ResolvedFit {
            index: cvf.lambda_index,
            lambda: cvf.lambda_cv,
            sigma2_hat: Some(cvf.sigma2_hat),
            fit: cvf.fit,
        };
        Ok((cvf.sd, resolved))
    } else {
        let lambda: f64 = lambda_flag
            .parse()
            .map_err(|_| Error::invalid(format!("--lambda must be 'cv' or a number, got {lambda_flag:?}")))?;
        let grid = LambdaGrid::single(lambda)?;
        let fit = fit_lasso_path(&sd, &grid, &cfg)?;
        let sigma2_hat = estimate_sigma2(&sd, &fit, 0).ok().map(|s| s.sigma2_hat);
        Ok((
            sd,
            ResolvedFit {
                fit,
                index: 0,
                lambda,
                sigma2_hat,
            },
        ))
    }
}

fn run_fit(cli: &Cli, a: &FitArgs) -> Result<(String, Option<u64>, Vec<PathBuf>)> {
    let (data, names) = load_csv(&a.input, &a.response)?;
    let sd = standardize(&data)?;
    let (sd, r) = resolve_fit(sd, &a.lambda, a.cv_folds, a.seed)?;
    let point = &r.fit.points[r.index];
    let (coefs, intercept) = match a.scale {
        Scale::Raw => {
            let raw = sd.raw_coefficients(&point.beta);
            let ic = sd.intercept(&point.beta);
            (raw.iter().cloned().collect::<Vec<f64>>(), ic)
        }
        Scale::Standardized => (point.beta.iter().cloned().collect(), 0.0),
    };
    let path = cli.output_dir.join("fit.csv");
    report::write_fit_csv(&path, &names, &coefs, intercept, r.lambda)?;
    Ok(("fit".into(), Some(a.seed), vec![path]))
}

fn run_ci(cli: &Cli, a: &CiArgs) -> Result<(String, Option<u64>, Vec<PathBuf>)> {
    let (data, names) = load_csv(&a.input, &a.response)?;
    let sd = standardize(&data)?;
    let (sd, r) = resolve_fit(sd, &a.lambda, a.cv_folds, a.seed)?;
    let sigma2 = match a.sigma2.as_str() {
        "estimate" => r.sigma2_hat.ok_or_else(|| {
            Error::invalid("noise variance is not estimable here; pass --sigma2 <value>")
        })?,
        other => other
            .parse()
            .map_err(|_| Error::invalid(format!("--sigma2 must be 'estimate' or a number, got {other:?}")))?,
    };
    let point = &r.fit.points[r.index];
    let set = rlp_intervals(&sd, point, sigma2, a.level)?;
    let set = match a.scale {
        Scale::Raw => destandardize(&set, &sd),
        Scale::Standardized => set,
    };
    let path = cli.output_dir.join("intervals.csv");
    report::write_interval_csv(&path, &names, &set)?;
    Ok(("ci".into(), Some(a.seed), vec![path]))
}

fn run_sim(cli: &Cli, s: &SimCommand) -> Result<(String, Option<u64>, Vec<PathBuf>)> {
    let dir = &cli.output_dir;
    match s {
        SimCommand::Coverage(a) => {
            let spec = a.scenario.build()?;
            let method = match a.method {
                MethodArg::Rlp => MethodSpec::Rlp,
                MethodArg::RidgePosterior => MethodSpec::RidgePosterior {
                    lambda: a
                        .lambda
                        .ok_or_else(|| Error::invalid("ridge-posterior needs --lambda"))?,
                    sigma2: a.method_sigma2.unwrap_or(spec.sigma2),
                },
                MethodArg::BootstrapLasso => MethodSpec::Bootstrap {
                    estimator: BootEstimator::Lasso,
                    lambda: a
                        .lambda
                        .map(BootLambda::Fixed)
                        .unwrap_or(BootLambda::CrossValidated),
                    replicates: a.boot_b,
                },
                MethodArg::BootstrapRidge => MethodSpec::Bootstrap {
                    estimator: BootEstimator::Ridge,
                    lambda: BootLambda::Fixed(
                        a.lambda
                            .ok_or_else(|| Error::invalid("bootstrap-ridge needs --lambda"))?,
                    ),
                    replicates: a.boot_b,
                },
            };
            let rc = RunConfig {
                reps: a.reps,
                seed: a.seed,
                level: a.level,
                cv_folds: a.cv_folds,
            };
            let rep = run_coverage_experiment(&spec, &method, &rc)?;
            let files = report::write_coverage(dir, &rep, a.detail)?;
            Ok(("sim coverage".into(), Some(a.seed), files))
        }
        SimCommand::Heatmap(a) => {
            let spec = a.scenario.build()?;
            let rc = RunConfig {
                reps: a.reps,
                seed: a.seed,
                level: a.level,
                cv_folds: a.cv_folds,
            };
            let rep = run_lambda_heatmap(&spec, &rc, a.grid_size)?;
            let files = report::write_heatmap(dir, &rep)?;
            Ok(("sim heatmap".into(), Some(a.seed), files))
        }
        SimCommand::CorrPair(a) => {
            let rc = RunConfig {
                reps: a.reps,
                seed: a.seed,
                level: a.level,
                cv_folds: a.cv_folds,
            };
            let rep = run_corr_pair_experiment(&rc, a.ridge_lambda)?;
            let files = report::write_corr_pair(dir, &rep)?;
            Ok(("sim corr-pair".into(), Some(a.seed), files))
        }
        SimCommand::RidgeCompare(a) => {
            let rc = RunConfig {
                reps: a.reps,
                seed: a.seed,
                level: a.level,
                cv_folds: 10,
            };
            let rep = run_ridge_compare(&rc, &a.p_list, a.boot_b)?;
            let files = report::write_ridge_compare(dir, &rep)?;
            Ok(("sim ridge-compare".into(), Some(a.seed), files))
        }
        SimCommand::BootstrapBias(a) => {
            let rc = RunConfig {
                reps: a.reps,
                seed: a.seed,
                level: 0.8,
                cv_folds: a.cv_folds,
            };
            let rep = run_bootstrap_bias(&rc, a.boot_b)?;
            let files = report::write_bias(dir, &rep)?;
            Ok(("sim bootstrap-bias".into(), Some(a.seed), files))
        }
        SimCommand::Stability(a) => {
            let rc = RunConfig {
                reps: a.reps,
                seed: a.seed,
                level: 0.8,
                cv_folds: a.cv_folds,
            };
            let rep = run_stability(&rc, a.boot_b, a.n, a.p)?;
            let files = report::write_stability(dir, &rep)?;
            Ok(("sim stability".into(), Some(a.seed), files))
        }
        SimCommand::ExactConjugate(a) => {
            let grid = symmetric_grid(a.theta_max, a.theta_steps);
            let rep = exact_conjugate(&grid, a.tau2, a.sigma2, a.level)?;
            let files = report::write_exact_conjugate(dir, &rep)?;
            Ok(("sim exact-conjugate".into(), None, files))
        }
    }
}
