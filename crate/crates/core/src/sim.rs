//! Seeded Monte Carlo experiments.
//!
//! Every experiment follows the same reproducibility scheme: replication `r`
//! of a run with master seed `s` works entirely from `RngStream::root(s)`
//! .stream(r)`, with child 0 generating the data, child 1 driving
//! cross-validation fold assignment, and child 2 feeding resampling. Results
//! are reduced in replication order, so reports are identical regardless of
//! how many worker threads execute them.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::bootstrap::{
    decompose_bias, draw_indices, empirical_quantile, pairs_bootstrap, resample_rows,
    BiasDecomposition, BootEstimator, BootstrapConfig,
};
use crate::cv::{cross_validate, estimate_sigma2};
use crate::data::{standardize, StandardizedDesign};
use crate::error::{Error, Result};
use crate::interval::destandardize;
use crate::lasso::{fit_lasso_at, fit_lasso_path, lambda_max, LambdaGrid, LassoConfig, LassoFit};
use crate::posterior::rlp_intervals;
use crate::ridge::{conjugate_average_coverage, conjugate_scalar_coverage, ridge_posterior};
use crate::rng::RngStream;
use crate::scenario::{build_beta, generate_dataset, BetaLaw, CorrKind, ScenarioSpec};

/// Grid resolution used whenever a penalty is chosen by cross-validation.
pub const CV_GRID_SIZE: usize = 100;

/// Fraction of replications allowed to fail before the whole experiment is
/// considered broken.
const FAILURE_BUDGET: f64 = 0.01;

/// Shared Monte Carlo parameters.
#[derive(Clone, Copy, Debug)]
pub struct RunConfig {
    pub reps: usize,
    pub seed: u64,
    pub level: f64,
    pub cv_folds: usize,
}

impl RunConfig {
    pub fn new(reps: usize, seed: u64) -> Self {
        RunConfig {
            reps,
            seed,
            level: 0.8,
            cv_folds: 10,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::invalid("at least one replication required"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::invalid("level must lie in (0,1)"));
        }
        if self.cv_folds < 2 {
            return Err(Error::invalid("cross-validation needs at least 2 folds"));
        }
        Ok(())
    }
}

/// Interval method evaluated by a coverage experiment.
#[derive(Clone, Debug)]
pub enum MethodSpec {
    /// Data-driven penalty and noise estimate, conditional-posterior
    /// intervals for every coordinate.
    Rlp,
    /// Closed-form ridge posterior on the raw design, fixed penalty, known
    /// noise variance.
    RidgePosterior { lambda: f64, sigma2: f64 },
    /// Percentile intervals from pairs-bootstrap refits.
    Bootstrap {
        estimator: BootEstimator,
        lambda: BootLambda,
        replicates: usize,
    },
}

/// How a bootstrap run picks the penalty it refits at.
#[derive(Clone, Copy, Debug)]
pub enum BootLambda {
    CrossValidated,
    Fixed(f64),
}

/// Run closures over all replications in parallel, keeping outputs in
/// replication order and enforcing the failure budget.
fn run_reps<T: Send>(
    reps: usize,
    work: impl Fn(usize) -> Result<T> + Sync,
) -> Result<(Vec<(usize, T)>, usize)> {
    let raw: Vec<(usize, Result<T>)> = (0..reps)
        .into_par_iter()
        .map(|r| (r, work(r)))
        .collect();
    let mut out = Vec::with_capacity(reps);
    let mut failures = 0usize;
    let mut first_error: Option<Error> = None;
    for (r, res) in raw {
        match res {
            Ok(t) => out.push((r, t)),
            Err(e) => {
                failures += 1;
                first_error.get_or_insert(e);
            }
        }
    }
    if failures as f64 > reps as f64 * FAILURE_BUDGET {
        let detail = first_error
            .map(|e| e.to_string())
            .unwrap_or_else(|| "unknown".into());
        return Err(Error::simulation(format!(
            "{failures} of {reps} replications failed; first error: {detail}"
        )));
    }
    Ok((out, failures))
}

/// Penalty grid used when cross-validating on a given design: log-spaced down
/// from the smallest all-zero penalty. A design that is not strictly
/// overdetermined keeps a higher floor — below it the fit approaches an
/// interpolator and the solution is no longer usefully penalized.
pub fn default_grid(sd: &StandardizedDesign) -> Result<LambdaGrid> {
    let min_ratio = if sd.p() >= sd.n() { 1e-2 } else { 1e-4 };
    LambdaGrid::log_spaced(lambda_max(sd), min_ratio, CV_GRID_SIZE)
}

/// Standardized fit at the cross-validated penalty, with the noise estimate
/// taken from the same path point.
pub struct CvFit {
    pub sd: StandardizedDesign,
    pub fit: LassoFit,
    pub lambda_cv: f64,
    pub lambda_index: usize,
    pub sigma2_hat: f64,
}

/// Standardize, cross-validate, fit the full path, and estimate the noise
/// variance at the chosen penalty.
pub fn cv_pipeline(
    sd: StandardizedDesign,
    folds: usize,
    cfg: &LassoConfig,
    cv_stream: RngStream,
) -> Result<CvFit> {
    let grid = default_grid(&sd)?;
    let cv = cross_validate(&sd, &grid, folds, cv_stream, cfg)?;
    // Only the prefix of the path down to the chosen penalty is ever used;
    // warm starts make the fit identical to the same prefix of a full path.
    let prefix = LambdaGrid::from_values(grid.values()[..=cv.lambda_cv_index].to_vec())?;
    let fit = fit_lasso_path(&sd, &prefix, cfg)?;
    let lambda_index = prefix.len() - 1;
    let sigma2_hat = estimate_sigma2(&sd, &fit, lambda_index)?.sigma2_hat;
    Ok(CvFit {
        sd,
        fit,
        lambda_cv: cv.lambda_cv,
        lambda_index,
        sigma2_hat,
    })
}

/// One coordinate of one replication, on the raw scale.
#[derive(Clone, Copy, Debug)]
pub struct CoverageRecord {
    pub rep: usize,
    pub variable: usize,
    pub beta_true: f64,
    pub lower: f64,
    pub upper: f64,
    pub covered: bool,
    pub selected: bool,
}

/// Coverage aggregated over a fixed group of coordinates.
#[derive(Clone, Debug)]
pub struct CoverageBin {
    /// Smallest and largest |true coefficient| in the group.
    pub lo: f64,
    pub hi: f64,
    pub mean_abs_beta: f64,
    pub members: usize,
    pub coverage: f64,
    /// Standard error of the replication-level group coverages.
    pub se: f64,
}

/// Everything a coverage experiment produces.
#[derive(Clone, Debug)]
pub struct CoverageReport {
    pub level: f64,
    pub reps_requested: usize,
    pub reps_done: usize,
    pub failures: usize,
    pub p: usize,
    /// Mean cover indicator over every (replication, coordinate) pair.
    pub average_coverage: f64,
    /// Binomial-style uncertainty of `average_coverage` at the replication
    /// level; within-replication dependence across coordinates means this is
    /// an approximation.
    pub mc_se: f64,
    pub per_rep_coverage: Vec<f64>,
    pub bins: Vec<CoverageBin>,
    pub median_width: f64,
    pub infinite_widths: usize,
    /// Penalty actually used by each completed replication.
    pub lambdas: Vec<f64>,
    pub detail: Vec<CoverageRecord>,
}

struct RepOutcome {
    lower: Vec<f64>,
    upper: Vec<f64>,
    selected: Vec<bool>,
    lambda: f64,
}

fn rep_stream(seed: u64, rep: usize) -> RngStream {
    RngStream::root(seed).stream(rep as u64)
}

/// Assign coordinate indices to `bins` groups of near-equal size by rank of
/// |value| (ties broken by index, so grouping is deterministic).
fn rank_bins(values: &DVector<f64>, bins: usize) -> Vec<Vec<usize>> {
    let p = values.len();
    let bins = bins.min(p).max(1);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .abs()
            .partial_cmp(&values[b].abs())
            .expect("non-finite coefficient")
            .then(a.cmp(&b))
    });
    let base = p / bins;
    let extra = p % bins;
    let mut out = Vec::with_capacity(bins);
    let mut at = 0usize;
    for b in 0..bins {
        let len = base + usize::from(b < extra);
        out.push(order[at..at + len].to_vec());
        at += len;
    }
    out
}

fn intervals_for_method(
    sim_x: &DMatrix<f64>,
    sim_y: &DVector<f64>,
    method: &MethodSpec,
    rc: &RunConfig,
    stream: RngStream,
) -> Result<RepOutcome> {
    let cfg = LassoConfig::default();
    match method {
        MethodSpec::Rlp => {
            let data = crate::data::Dataset::new(sim_x.clone(), sim_y.clone())?;
            let sd = standardize(&data)?;
            let cvf = cv_pipeline(sd, rc.cv_folds, &cfg, stream.stream(1))?;
            let point = &cvf.fit.points[cvf.lambda_index];
            let set = rlp_intervals(&cvf.sd, point, cvf.sigma2_hat, rc.level)?;
            let raw = destandardize(&set, &cvf.sd);
            Ok(RepOutcome {
                lower: raw.entries.iter().map(|e| e.lower).collect(),
                upper: raw.entries.iter().map(|e| e.upper).collect(),
                selected: raw.entries.iter().map(|e| e.selected).collect(),
                lambda: cvf.lambda_cv,
            })
        }
        MethodSpec::RidgePosterior { lambda, sigma2 } => {
            let post = ridge_posterior(sim_x, sim_y, *lambda, *sigma2)?;
            let ivs = post.intervals(rc.level)?;
            Ok(RepOutcome {
                lower: ivs.iter().map(|&(l, _)| l).collect(),
                upper: ivs.iter().map(|&(_, u)| u).collect(),
                selected: vec![true; ivs.len()],
                lambda: *lambda,
            })
        }
        MethodSpec::Bootstrap {
            estimator,
            lambda,
            replicates,
        } => {
            match estimator {
                BootEstimator::Lasso => {
                    // Lasso refits live on the standardized scale; intervals
                    // are mapped back to raw units at the end.
                    let data = crate::data::Dataset::new(sim_x.clone(), sim_y.clone())?;
                    let sd = standardize(&data)?;
                    let lam = match lambda {
                        BootLambda::Fixed(v) => *v,
                        BootLambda::CrossValidated => {
                            let grid = default_grid(&sd)?;
                            cross_validate(&sd, &grid, rc.cv_folds, stream.stream(1), &cfg)?
                                .lambda_cv
                        }
                    };
                    let bcfg = BootstrapConfig {
                        estimator: BootEstimator::Lasso,
                        lambda: lam,
                        replicates: *replicates,
                        level: rc.level,
                        restandardize: true,
                        lasso: cfg.clone(),
                    };
                    let run = pairs_bootstrap(&sd.xs, &sd.ys, &bcfg, stream.stream(2))?;
                    let p = sd.p();
                    let mut lower = Vec::with_capacity(p);
                    let mut upper = Vec::with_capacity(p);
                    let mut selected = Vec::with_capacity(p);
                    for j in 0..p {
                        let (l, u) = run.intervals[j];
                        lower.push(l / sd.col_scale[j]);
                        upper.push(u / sd.col_scale[j]);
                        selected.push(run.original[j] != 0.0);
                    }
                    Ok(RepOutcome {
                        lower,
                        upper,
                        selected,
                        lambda: lam,
                    })
                }
                BootEstimator::Ridge => {
                    let lam = match lambda {
                        BootLambda::Fixed(v) => *v,
                        BootLambda::CrossValidated => {
                            return Err(Error::invalid(
                                "ridge bootstrap runs use a fixed penalty",
                            ))
                        }
                    };
                    let bcfg = BootstrapConfig {
                        estimator: BootEstimator::Ridge,
                        lambda: lam,
                        replicates: *replicates,
                        level: rc.level,
                        restandardize: false,
                        lasso: cfg.clone(),
                    };
                    let run = pairs_bootstrap(sim_x, sim_y, &bcfg, stream.stream(2))?;
                    Ok(RepOutcome {
                        lower: run.intervals.iter().map(|&(l, _)| l).collect(),
                        upper: run.intervals.iter().map(|&(_, u)| u).collect(),
                        selected: vec![true; run.intervals.len()],
                        lambda: lam,
                    })
                }
            }
        }
    }
}

/// Average-coverage study of one interval method on one scenario.
pub fn run_coverage_experiment(
    spec: &ScenarioSpec,
    method: &MethodSpec,
    rc: &RunConfig,
) -> Result<CoverageReport> {
    rc.validate()?;
    spec.validate()?;
    let beta_true = build_beta(spec)?;
    let p = spec.p;

    let (done, failures) = run_reps(rc.reps, |r| -> Result<RepOutcome> {
        let s = rep_stream(rc.seed, r);
        let sim = generate_dataset(spec, s.stream(0))?;
        intervals_for_method(&sim.data.x, &sim.data.y, method, rc, s)
    })?;

    let bins_idx = rank_bins(&beta_true, 10);
    let mut detail = Vec::with_capacity(done.len() * p);
    let mut per_rep_coverage = Vec::with_capacity(done.len());
    let mut lambdas = Vec::with_capacity(done.len());
    let mut widths: Vec<f64> = Vec::with_capacity(done.len() * p);
    let mut infinite_widths = 0usize;
    let mut per_rep_bin: Vec<Vec<f64>> = vec![Vec::with_capacity(done.len()); bins_idx.len()];

    for (rep, out) in &done {
        let mut covered_count = 0usize;
        for j in 0..p {
            let covered = out.lower[j] <= beta_true[j] && beta_true[j] <= out.upper[j];
            covered_count += usize::from(covered);
            let w = out.upper[j] - out.lower[j];
            if w.is_finite() {
                widths.push(w);
            } else {
                infinite_widths += 1;
            }
            detail.push(CoverageRecord {
                rep: *rep,
                variable: j,
                beta_true: beta_true[j],
                lower: out.lower[j],
                upper: out.upper[j],
                covered,
                selected: out.selected[j],
            });
        }
        per_rep_coverage.push(covered_count as f64 / p as f64);
        lambdas.push(out.lambda);
        let base = detail.len() - p;
        for (b, members) in bins_idx.iter().enumerate() {
            let c = members
                .iter()
                .filter(|&&j| detail[base + j].covered)
                .count();
            per_rep_bin[b].push(c as f64 / members.len() as f64);
        }
    }

    let reps_done = done.len();
    if reps_done == 0 {
        return Err(Error::simulation("no replications completed"));
    }
    let average_coverage = mean(&per_rep_coverage);
    let mc_se = (average_coverage * (1.0 - average_coverage) / reps_done as f64).sqrt();
    let bins = bins_idx
        .iter()
        .zip(&per_rep_bin)
        .map(|(members, series)| {
            let abs: Vec<f64> = members.iter().map(|&j| beta_true[j].abs()).collect();
            CoverageBin {
                lo: abs.iter().cloned().fold(f64::INFINITY, f64::min),
                hi: abs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                mean_abs_beta: mean(&abs),
                members: members.len(),
                coverage: mean(series),
                se: standard_error(series),
            }
        })
        .collect();
    widths.sort_by(|a, b| a.partial_cmp(b).expect("NaN width"));
    let median_width = if widths.is_empty() {
        f64::INFINITY
    } else {
        empirical_quantile(&widths, 0.5)
    };

    Ok(CoverageReport {
        level: rc.level,
        reps_requested: rc.reps,
        reps_done,
        failures,
        p,
        average_coverage,
        mc_se,
        per_rep_coverage,
        bins,
        median_width,
        infinite_widths,
        lambdas,
        detail,
    })
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn sample_sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return f64::NAN;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

fn standard_error(v: &[f64]) -> f64 {
    sample_sd(v) / (v.len() as f64).sqrt()
}

/// Mean, paired with a one-sample t statistic against zero.
fn paired_t(v: &[f64]) -> (f64, f64) {
    let m = mean(v);
    (m, m / standard_error(v))
}

/// Relative coverage of the interval method across a descending penalty
/// sweep, grouped by |true coefficient|.
#[derive(Clone, Debug)]
pub struct HeatmapReport {
    pub level: f64,
    pub reps_done: usize,
    pub failures: usize,
    pub grid_size: usize,
    /// Mean log10 penalty at each sweep position (the sweep is relative to
    /// each replication's own largest useful penalty).
    pub mean_log10_lambda: Vec<f64>,
    pub bins: Vec<CoverageBin>,
    /// Coverage minus the nominal level, bins × sweep positions.
    pub rel_coverage: DMatrix<f64>,
    /// Column averages of `rel_coverage` over all coordinates.
    pub avg_rel_coverage: Vec<f64>,
    pub lambda_cv_median: f64,
    /// Central 75% range of the cross-validated penalty across replications.
    pub lambda_cv_lo: f64,
    pub lambda_cv_hi: f64,
}

struct HeatmapRep {
    covered: Vec<Vec<bool>>,
    log10_lambda: Vec<f64>,
    lambda_cv: f64,
}

/// Sweep a fixed-size penalty grid on every replication and tabulate
/// coverage relative to nominal, with the noise estimate anchored at the
/// cross-validated penalty.
pub fn run_lambda_heatmap(
    spec: &ScenarioSpec,
    rc: &RunConfig,
    grid_size: usize,
) -> Result<HeatmapReport> {
    rc.validate()?;
    spec.validate()?;
    if grid_size < 2 {
        return Err(Error::invalid("penalty sweep needs at least 2 values"));
    }
    let beta_true = build_beta(spec)?;
    let p = spec.p;
    let cfg = LassoConfig::default();

    let (done, failures) = run_reps(rc.reps, |r| -> Result<HeatmapRep> {
        let s = rep_stream(rc.seed, r);
        let sim = generate_dataset(spec, s.stream(0))?;
        let sd = standardize(&sim.data)?;
        let grid = LambdaGrid::log_spaced(lambda_max(&sd), 0.05, grid_size)?;
        let cv = cross_validate(&sd, &grid, rc.cv_folds, s.stream(1), &cfg)?;
        let fit = fit_lasso_path(&sd, &grid, &cfg)?;
        let sigma2_hat = estimate_sigma2(&sd, &fit, cv.lambda_cv_index)?.sigma2_hat;
        let mut covered = Vec::with_capacity(grid.len());
        for point in &fit.points {
            let set = rlp_intervals(&sd, point, sigma2_hat, rc.level)?;
            let raw = destandardize(&set, &sd);
            covered.push(
                raw.entries
                    .iter()
                    .map(|e| e.covers(beta_true[e.index]))
                    .collect(),
            );
        }
        Ok(HeatmapRep {
            covered,
            log10_lambda: grid.values().iter().map(|l| l.log10()).collect(),
            lambda_cv: cv.lambda_cv,
        })
    })?;

    let reps_done = done.len();
    if reps_done == 0 {
        return Err(Error::simulation("no replications completed"));
    }
    let bins_idx = rank_bins(&beta_true, 10);
    let mut rel_coverage = DMatrix::zeros(bins_idx.len(), grid_size);
    let mut avg_rel_coverage = vec![0.0; grid_size];
    let mut mean_log10_lambda = vec![0.0; grid_size];
    for g in 0..grid_size {
        let mut all_hits = 0usize;
        for (b, members) in bins_idx.iter().enumerate() {
            let mut hits = 0usize;
            for (_, rep) in &done {
                hits += members.iter().filter(|&&j| rep.covered[g][j]).count();
            }
            all_hits += hits;
            rel_coverage[(b, g)] =
                hits as f64 / (members.len() * reps_done) as f64 - rc.level;
        }
        avg_rel_coverage[g] = all_hits as f64 / (p * reps_done) as f64 - rc.level;
        mean_log10_lambda[g] =
            done.iter().map(|(_, rep)| rep.log10_lambda[g]).sum::<f64>() / reps_done as f64;
    }
    let mut lambda_cvs: Vec<f64> = done.iter().map(|(_, rep)| rep.lambda_cv).collect();
    lambda_cvs.sort_by(|a, b| a.partial_cmp(b).expect("NaN penalty"));

    // Bin descriptors (coverage fields describe the whole sweep average).
    let bins = bins_idx
        .iter()
        .enumerate()
        .map(|(b, members)| {
            let abs: Vec<f64> = members.iter().map(|&j| beta_true[j].abs()).collect();
            let avg = (0..grid_size).map(|g| rel_coverage[(b, g)]).sum::<f64>()
                / grid_size as f64;
            CoverageBin {
                lo: abs.iter().cloned().fold(f64::INFINITY, f64::min),
                hi: abs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                mean_abs_beta: mean(&abs),
                members: members.len(),
                coverage: rc.level + avg,
                se: f64::NAN,
            }
        })
        .collect();

    Ok(HeatmapReport {
        level: rc.level,
        reps_done,
        failures,
        grid_size,
        mean_log10_lambda,
        bins,
        rel_coverage,
        avg_rel_coverage,
        lambda_cv_median: empirical_quantile(&lambda_cvs, 0.5),
        lambda_cv_lo: empirical_quantile(&lambda_cvs, 0.125),
        lambda_cv_hi: empirical_quantile(&lambda_cvs, 0.875),
    })
}

/// One recorded interval in the correlated-pair study.
#[derive(Clone, Copy, Debug)]
pub struct CorrPairRecord {
    pub rep: usize,
    pub method: &'static str,
    pub variable: &'static str,
    pub lower: f64,
    pub upper: f64,
    pub midpoint: f64,
    pub width: f64,
    pub covered: bool,
}

/// Interval for one coordinate of the example replication.
#[derive(Clone, Copy, Debug)]
pub struct ExampleRecord {
    pub method: &'static str,
    pub variable: usize,
    pub truth: f64,
    pub center: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug)]
pub struct CorrPairReport {
    pub level: f64,
    pub reps_done: usize,
    pub failures: usize,
    pub records: Vec<CorrPairRecord>,
    /// First-coordinates snapshot of replication 0 under both methods.
    pub example: Vec<ExampleRecord>,
}

const CORR_PAIR_TRACKED: [(usize, &str); 3] = [(0, "A"), (1, "B"), (2, "N1")];

/// Contrast ridge-posterior and conditional-posterior intervals when the
/// signal sits on one of two nearly collinear columns.
///
/// Design: square design, a single unit coefficient on the first column, the
/// second column correlated with it at 0.99, everything else independent
/// noise with unit-variance errors.
pub fn run_corr_pair_experiment(rc: &RunConfig, ridge_lambda: f64) -> Result<CorrPairReport> {
    rc.validate()?;
    let spec = ScenarioSpec {
        n: 100,
        p: 100,
        beta_law: BetaLaw::Custom(vec![1.0]),
        rho: 0.99,
        corr: CorrKind::FirstPair,
        beta_scale: 1.0,
        snr: None,
        sigma2: 1.0,
    };
    let beta_true = build_beta(&spec)?;
    let cfg = LassoConfig::default();
    let example_vars = 20.min(spec.p);

    struct Rep {
        ridge: Vec<(f64, f64, f64)>,
        rlp: Vec<(f64, f64, f64)>,
        example: Vec<ExampleRecord>,
    }

    let (done, failures) = run_reps(rc.reps, |r| -> Result<Rep> {
        let s = rep_stream(rc.seed, r);
        let sim = generate_dataset(&spec, s.stream(0))?;

        let post = ridge_posterior(&sim.data.x, &sim.data.y, ridge_lambda, spec.sigma2)?;
        let ridge_ivs = post.intervals(rc.level)?;

        let sd = standardize(&sim.data)?;
        let cvf = cv_pipeline(sd, rc.cv_folds, &cfg, s.stream(1))?;
        let point = &cvf.fit.points[cvf.lambda_index];
        let set = rlp_intervals(&cvf.sd, point, cvf.sigma2_hat, rc.level)?;
        let raw = destandardize(&set, &cvf.sd);

        let ridge: Vec<(f64, f64, f64)> = CORR_PAIR_TRACKED
            .iter()
            .map(|&(j, _)| (ridge_ivs[j].0, ridge_ivs[j].1, post.mean[j]))
            .collect();
        let rlp: Vec<(f64, f64, f64)> = CORR_PAIR_TRACKED
            .iter()
            .map(|&(j, _)| (raw.entries[j].lower, raw.entries[j].upper, raw.entries[j].beta_tilde))
            .collect();
        let example = if r == 0 {
            let mut ex = Vec::with_capacity(2 * example_vars);
            for j in 0..example_vars {
                ex.push(ExampleRecord {
                    method: "ridge",
                    variable: j,
                    truth: beta_true[j],
                    center: post.mean[j],
                    lower: ridge_ivs[j].0,
                    upper: ridge_ivs[j].1,
                });
            }
            for j in 0..example_vars {
                ex.push(ExampleRecord {
                    method: "rlp",
                    variable: j,
                    truth: beta_true[j],
                    center: raw.entries[j].beta_tilde,
                    lower: raw.entries[j].lower,
                    upper: raw.entries[j].upper,
                });
            }
            ex
        } else {
            Vec::new()
        };
        Ok(Rep { ridge, rlp, example })
    })?;

    let mut records = Vec::with_capacity(done.len() * 6);
    let mut example = Vec::new();
    for (rep, out) in &done {
        for (slot, &(j, name)) in CORR_PAIR_TRACKED.iter().enumerate() {
            let truth = beta_true[j];
            for (method, ivs) in [("ridge", &out.ridge), ("rlp", &out.rlp)] {
                let (lower, upper, _) = ivs[slot];
                records.push(CorrPairRecord {
                    rep: *rep,
                    method,
                    variable: name,
                    lower,
                    upper,
                    midpoint: 0.5 * (lower + upper),
                    width: upper - lower,
                    covered: lower <= truth && truth <= upper,
                });
            }
        }
        if !out.example.is_empty() {
            example = out.example.clone();
        }
    }

    Ok(CorrPairReport {
        level: rc.level,
        reps_done: done.len(),
        failures,
        records,
        example,
    })
}

/// One cell (a dimension setting) of the posterior-versus-bootstrap contrast.
#[derive(Clone, Copy, Debug)]
pub struct RidgeCompareCell {
    pub p: usize,
    pub reps_done: usize,
    pub failures: usize,
    pub posterior_coverage: f64,
    pub posterior_se: f64,
    pub bootstrap_coverage: f64,
    pub bootstrap_se: f64,
}

#[derive(Clone, Debug)]
pub struct RidgeCompareReport {
    pub level: f64,
    pub n: usize,
    pub lambda: f64,
    pub sigma2: f64,
    pub tau2: f64,
    pub boot_replicates: usize,
    pub cells: Vec<RidgeCompareCell>,
}

/// Hold the sample size fixed and grow the dimension: closed-form ridge
/// posterior intervals keep their average coverage, while percentile
/// intervals from ridge refits on resampled rows lose coverage as the
/// dimension grows.
///
/// The prior variance is matched to the penalty (`tau2 = sigma2/(n·lambda)`)
/// and the true coefficients are evenly spaced quantiles of that prior, the
/// setting where average coverage is exact for the posterior.
pub fn run_ridge_compare(
    rc: &RunConfig,
    p_list: &[usize],
    boot_replicates: usize,
) -> Result<RidgeCompareReport> {
    rc.validate()?;
    let n = 200usize;
    let lambda = 0.4;
    let sigma2 = 100.0;
    let tau2 = sigma2 / (n as f64 * lambda);

    let mut cells = Vec::with_capacity(p_list.len());
    for (cell, &p) in p_list.iter().enumerate() {
        let spec = ScenarioSpec {
            n,
            p,
            beta_law: BetaLaw::Normal,
            rho: 0.0,
            corr: CorrKind::Ar1,
            beta_scale: tau2.sqrt(),
            snr: None,
            sigma2,
        };
        let beta_true = build_beta(&spec)?;
        let cell_seed = RngStream::root(rc.seed).stream(cell as u64);

        let (done, failures) = run_reps(rc.reps, |r| -> Result<(f64, f64)> {
            let s = cell_seed.stream(r as u64);
            let sim = generate_dataset(&spec, s.stream(0))?;
            let post = ridge_posterior(&sim.data.x, &sim.data.y, lambda, sigma2)?;
            let ivs = post.intervals(rc.level)?;
            let post_cov = (0..p)
                .filter(|&j| ivs[j].0 <= beta_true[j] && beta_true[j] <= ivs[j].1)
                .count() as f64
                / p as f64;

            let bcfg = BootstrapConfig {
                estimator: BootEstimator::Ridge,
                lambda,
                replicates: boot_replicates,
                level: rc.level,
                restandardize: false,
                lasso: LassoConfig::default(),
            };
            let run = pairs_bootstrap(&sim.data.x, &sim.data.y, &bcfg, s.stream(2))?;
            let boot_cov = (0..p)
                .filter(|&j| {
                    run.intervals[j].0 <= beta_true[j] && beta_true[j] <= run.intervals[j].1
                })
                .count() as f64
                / p as f64;
            Ok((post_cov, boot_cov))
        })?;

        let post_series: Vec<f64> = done.iter().map(|&(_, (a, _))| a).collect();
        let boot_series: Vec<f64> = done.iter().map(|&(_, (_, b))| b).collect();
        cells.push(RidgeCompareCell {
            p,
            reps_done: done.len(),
            failures,
            posterior_coverage: mean(&post_series),
            posterior_se: standard_error(&post_series),
            bootstrap_coverage: mean(&boot_series),
            bootstrap_se: standard_error(&boot_series),
        });
    }

    Ok(RidgeCompareReport {
        level: rc.level,
        n,
        lambda,
        sigma2,
        tau2,
        boot_replicates,
        cells,
    })
}

/// Bias components for one replication, original fit and bootstrap mean.
#[derive(Clone, Copy, Debug)]
pub struct BiasRecord {
    pub rep: usize,
    /// "original" or "bootstrap_mean".
    pub source: &'static str,
    pub irreducible: f64,
    pub from_b: f64,
    pub from_n: f64,
    pub penalty: f64,
    pub total: f64,
}

impl BiasRecord {
    fn from_parts(rep: usize, source: &'static str, d: &BiasDecomposition) -> Self {
        BiasRecord {
            rep,
            source,
            irreducible: d.irreducible,
            from_b: d.from_b,
            from_n: d.from_n,
            penalty: d.penalty,
            total: d.total,
        }
    }

    pub fn identity_gap(&self) -> f64 {
        self.irreducible + self.from_b + self.from_n + self.penalty - self.total
    }
}

#[derive(Clone, Debug)]
pub struct BiasReport {
    pub reps_done: usize,
    pub failures: usize,
    /// Replications where the target was not selected with a positive
    /// estimate on the original data.
    pub excluded_original: usize,
    /// Fraction of bootstrap refits excluded for the same reason, averaged
    /// over replications.
    pub mean_boot_excluded: f64,
    pub boot_replicates: usize,
    pub records: Vec<BiasRecord>,
    pub lambda_cvs: Vec<f64>,
}

impl BiasReport {
    fn source_mean(&self, source: &str, pick: impl Fn(&BiasRecord) -> f64) -> f64 {
        let vals: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.source == source)
            .map(&pick)
            .collect();
        mean(&vals)
    }

    /// Mean |partner| and |remaining| components among bootstrap means.
    pub fn bootstrap_abs_from_b_and_n(&self) -> (f64, f64) {
        (
            self.source_mean("bootstrap_mean", |r| r.from_b.abs()),
            self.source_mean("bootstrap_mean", |r| r.from_n.abs()),
        )
    }
}

/// Decompose the estimate gap for one strong coordinate, on the original fit
/// and across bootstrap refits, replication by replication.
///
/// Design: square design, one strong positive coefficient on the first
/// column, the second column correlated with it at 0.5, all others
/// independent. The penalty is cross-validated per replication and reused by
/// every bootstrap refit of that replication.
pub fn run_bootstrap_bias(rc: &RunConfig, boot_replicates: usize) -> Result<BiasReport> {
    rc.validate()?;
    if boot_replicates < 2 {
        return Err(Error::invalid("bootstrap needs at least 2 replicates"));
    }
    let spec = ScenarioSpec {
        n: 100,
        p: 100,
        beta_law: BetaLaw::Custom(vec![2.0]),
        rho: 0.5,
        corr: CorrKind::FirstPair,
        beta_scale: 1.0,
        snr: None,
        sigma2: 1.0,
    };
    let p = spec.p;
    let n_idx: Vec<usize> = (2..p).collect();
    let cfg = LassoConfig::default();

    enum RepBias {
        Excluded,
        Done {
            original: BiasDecomposition,
            boot_mean: BiasDecomposition,
            boot_excluded: usize,
            lambda_cv: f64,
        },
    }

    let (done, failures) = run_reps(rc.reps, |r| -> Result<RepBias> {
        let s = rep_stream(rc.seed, r);
        let sim = generate_dataset(&spec, s.stream(0))?;
        let sd = standardize(&sim.data)?;
        let cvf = cv_pipeline(sd, rc.cv_folds, &cfg, s.stream(1))?;
        let lambda = cvf.lambda_cv;
        let point = &cvf.fit.points[cvf.lambda_index];
        let original = match decompose_bias(
            &cvf.sd,
            &point.beta,
            &sim.beta_true,
            &sim.eps,
            0,
            1,
            &n_idx,
            lambda,
        )? {
            Some(d) => d,
            None => return Ok(RepBias::Excluded),
        };

        let boot = s.stream(2);
        let mut sums = [0.0f64; 5];
        let mut kept = 0usize;
        let mut boot_excluded = 0usize;
        for b in 0..boot_replicates {
            let idx = draw_indices(sim.data.n(), boot.stream(b as u64));
            let (xb, yb) = resample_rows(&sim.data.x, &sim.data.y, &idx);
            let eps_b = DVector::from_fn(idx.len(), |i, _| sim.eps[idx[i] as usize]);
            let data_b = match crate::data::Dataset::new(xb, yb)
                .and_then(|d| standardize(&d))
            {
                Ok(sd_b) => sd_b,
                Err(Error::Invalid(_)) => {
                    boot_excluded += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let fit_b = fit_lasso_at(&data_b.xs, &data_b.ys, lambda, Some(&point.beta), &cfg)?;
            match decompose_bias(
                &data_b,
                &fit_b.beta,
                &sim.beta_true,
                &eps_b,
                0,
                1,
                &n_idx,
                lambda,
            )? {
                Some(d) => {
                    kept += 1;
                    for (slot, v) in [d.irreducible, d.from_b, d.from_n, d.penalty, d.total]
                        .into_iter()
                        .enumerate()
                    {
                        sums[slot] += v;
                    }
                }
                None => boot_excluded += 1,
            }
        }
        if kept * 2 < boot_replicates {
            return Err(Error::simulation(format!(
                "only {kept} of {boot_replicates} bootstrap refits usable for decomposition"
            )));
        }
        let k = kept as f64;
        Ok(RepBias::Done {
            original,
            boot_mean: BiasDecomposition {
                irreducible: sums[0] / k,
                from_b: sums[1] / k,
                from_n: sums[2] / k,
                penalty: sums[3] / k,
                total: sums[4] / k,
            },
            boot_excluded,
            lambda_cv: lambda,
        })
    })?;

    let mut records = Vec::new();
    let mut lambda_cvs = Vec::new();
    let mut excluded_original = 0usize;
    let mut boot_excluded_fracs = Vec::new();
    let mut reps_done = 0usize;
    for (rep, out) in &done {
        match out {
            RepBias::Excluded => excluded_original += 1,
            RepBias::Done {
                original,
                boot_mean,
                boot_excluded,
                lambda_cv,
            } => {
                reps_done += 1;
                records.push(BiasRecord::from_parts(*rep, "original", original));
                records.push(BiasRecord::from_parts(*rep, "bootstrap_mean", boot_mean));
                lambda_cvs.push(*lambda_cv);
                boot_excluded_fracs.push(*boot_excluded as f64 / boot_replicates as f64);
            }
        }
    }
    if reps_done == 0 {
        return Err(Error::simulation(
            "target coordinate was never retained; decomposition impossible",
        ));
    }

    Ok(BiasReport {
        reps_done,
        failures,
        excluded_original,
        mean_boot_excluded: mean(&boot_excluded_fracs),
        boot_replicates,
        records,
        lambda_cvs,
    })
}

/// Selection indicators and bootstrap selection frequencies, replication by
/// replication.
#[derive(Clone, Debug)]
pub struct StabilityReport {
    pub reps_done: usize,
    pub failures: usize,
    pub boot_replicates: usize,
    /// 0/1 selection of each coordinate on each replication's original fit.
    pub a: DMatrix<f64>,
    /// Bootstrap selection frequency of each coordinate per replication.
    pub a_star: DMatrix<f64>,
    /// Column means of `a`.
    pub a_bar: DVector<f64>,
    /// Column means of `a_star`.
    pub a_star_bar: DVector<f64>,
    pub dropped_total: usize,
}

impl StabilityReport {
    /// One-sample t statistic of the per-replication difference
    /// `a − a_star` for one coordinate (positive: refits select less often).
    pub fn attenuation_t(&self, j: usize) -> f64 {
        let diffs: Vec<f64> = (0..self.a.nrows())
            .map(|r| self.a[(r, j)] - self.a_star[(r, j)])
            .collect();
        paired_t(&diffs).1
    }
}

/// Compare how often each coordinate is selected on fresh data against how
/// often refits on resampled rows select it, at each replication's
/// cross-validated penalty.
///
/// Design: short wide design (default 50×500) with four signal coefficients
/// (0.25, 0.5, 1, 2) and independent standard-normal predictors and errors.
pub fn run_stability(
    rc: &RunConfig,
    boot_replicates: usize,
    n: usize,
    p: usize,
) -> Result<StabilityReport> {
    rc.validate()?;
    let spec = ScenarioSpec {
        n,
        p,
        beta_law: BetaLaw::Custom(vec![0.25, 0.5, 1.0, 2.0]),
        rho: 0.0,
        corr: CorrKind::Ar1,
        beta_scale: 1.0,
        snr: None,
        sigma2: 1.0,
    };
    spec.validate()?;
    let cfg = LassoConfig::default();

    struct Rep {
        sel: Vec<f64>,
        freq: DVector<f64>,
        dropped: usize,
    }

    let (done, failures) = run_reps(rc.reps, |r| -> Result<Rep> {
        let s = rep_stream(rc.seed, r);
        let sim = generate_dataset(&spec, s.stream(0))?;
        let sd = standardize(&sim.data)?;
        let grid = default_grid(&sd)?;
        let cv = cross_validate(&sd, &grid, rc.cv_folds, s.stream(1), &cfg)?;
        let prefix = LambdaGrid::from_values(grid.values()[..=cv.lambda_cv_index].to_vec())?;
        let fit = fit_lasso_path(&sd, &prefix, &cfg)?;
        let point = fit.points.last().expect("nonempty path");
        let sel: Vec<f64> = (0..p).map(|j| f64::from(point.beta[j] != 0.0)).collect();
        let (freq, dropped) = crate::bootstrap::bootstrap_selection_freq(
            &sd.xs,
            &sd.ys,
            cv.lambda_cv,
            boot_replicates,
            &cfg,
            s.stream(2),
        )?;
        Ok(Rep { sel, freq, dropped })
    })?;

    let reps_done = done.len();
    if reps_done == 0 {
        return Err(Error::simulation("no replications completed"));
    }
    let mut a = DMatrix::zeros(reps_done, p);
    let mut a_star = DMatrix::zeros(reps_done, p);
    let mut dropped_total = 0usize;
    for (row, (_, rep)) in done.iter().enumerate() {
        for j in 0..p {
            a[(row, j)] = rep.sel[j];
            a_star[(row, j)] = rep.freq[j];
        }
        dropped_total += rep.dropped;
    }
    let a_bar = DVector::from_fn(p, |j, _| a.column(j).sum() / reps_done as f64);
    let a_star_bar = DVector::from_fn(p, |j, _| a_star.column(j).sum() / reps_done as f64);

    Ok(StabilityReport {
        reps_done,
        failures,
        boot_replicates,
        a,
        a_star,
        a_bar,
        a_star_bar,
        dropped_total,
    })
}

/// Exact coverage of the scalar conjugate-normal credible interval.
#[derive(Clone, Debug)]
pub struct ExactConjugateReport {
    pub level: f64,
    pub tau2: f64,
    pub sigma2: f64,
    /// (parameter value, frequentist coverage of the credible interval).
    pub curve: Vec<(f64, f64)>,
    /// Prior-weighted average of the coverage curve (matches `level`).
    pub average: f64,
}

/// Evaluate the closed-form coverage curve on a grid and its prior-weighted
/// average by quadrature. No Monte Carlo is involved.
pub fn exact_conjugate(
    theta_grid: &[f64],
    tau2: f64,
    sigma2: f64,
    level: f64,
) -> Result<ExactConjugateReport> {
    if !(tau2 > 0.0) || !(sigma2 > 0.0) {
        return Err(Error::invalid("variances must be positive"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("level must lie in (0,1)"));
    }
    let curve = theta_grid
        .iter()
        .map(|&t| (t, conjugate_scalar_coverage(t, tau2, sigma2, level)))
        .collect();
    Ok(ExactConjugateReport {
        level,
        tau2,
        sigma2,
        curve,
        average: conjugate_average_coverage(tau2, sigma2, level),
    })
}

/// Symmetric evaluation grid for the coverage curve.
pub fn symmetric_grid(max_abs: f64, steps: usize) -> Vec<f64> {
    assert!(steps >= 2 && max_abs > 0.0);
    (0..steps)
        .map(|i| -max_abs + 2.0 * max_abs * i as f64 / (steps - 1) as f64)
        .collect()
}

/// Scalar demonstration that averaging refits over resamples pulls a
/// penalized estimate toward zero.
#[derive(Clone, Debug)]
pub struct JensenReport {
    pub datasets_done: usize,
    pub skipped: usize,
    pub failures: usize,
    /// Bootstrap mean minus original estimate, one entry per dataset.
    pub diffs: Vec<f64>,
    pub mean_diff: f64,
    /// One-sample t statistic of `diffs` against zero (negative values mean
    /// the bootstrap recenters toward zero).
    pub t_stat: f64,
}

/// For each seeded dataset of a single-column design, compare the original
/// penalized estimate with the mean of its bootstrap refits.
///
/// Refits use the resampled data as-is: the variability of the resampled
/// column's second moment is exactly what creates the recentring.
pub fn run_jensen_p1(
    estimator: BootEstimator,
    datasets: usize,
    boot_replicates: usize,
    n: usize,
    beta: f64,
    lambda: f64,
    sigma2: f64,
    seed: u64,
) -> Result<JensenReport> {
    if datasets < 2 {
        return Err(Error::invalid("need at least 2 datasets"));
    }
    let spec = ScenarioSpec {
        n,
        p: 1,
        beta_law: BetaLaw::Custom(vec![beta]),
        rho: 0.0,
        corr: CorrKind::Ar1,
        beta_scale: 1.0,
        snr: None,
        sigma2,
    };
    spec.validate()?;
    let cfg = BootstrapConfig {
        estimator,
        lambda,
        replicates: boot_replicates,
        level: 0.8,
        restandardize: false,
        lasso: LassoConfig::default(),
    };

    let (done, failures) = run_reps(datasets, |d| -> Result<Option<f64>> {
        let s = RngStream::root(seed).stream(d as u64);
        let sim = generate_dataset(&spec, s.stream(0))?;
        let run = pairs_bootstrap(&sim.data.x, &sim.data.y, &cfg, s.stream(2))?;
        // The concavity argument lives on the positive branch; datasets where
        // the original estimate is not positive are skipped, not flipped.
        if run.original[0] <= 0.0 {
            return Ok(None);
        }
        Ok(Some(run.mean[0] - run.original[0]))
    })?;

    let mut diffs = Vec::with_capacity(done.len());
    let mut skipped = 0usize;
    for (_, d) in done {
        match d {
            Some(v) => diffs.push(v),
            None => skipped += 1,
        }
    }
    if diffs.len() < 2 {
        return Err(Error::simulation("too few usable datasets"));
    }
    let (mean_diff, t_stat) = paired_t(&diffs);
    Ok(JensenReport {
        datasets_done: diffs.len(),
        skipped,
        failures,
        diffs,
        mean_diff,
        t_stat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rank_bins_partition_everything_in_order() {
        let v = DVector::from_vec(vec![0.5, -3.0, 0.1, 2.0, -0.2, 0.0, 1.0]);
        let bins = rank_bins(&v, 3);
        assert_eq!(bins.len(), 3);
        let mut all: Vec<usize> = bins.iter().flatten().cloned().collect();
        assert_eq!(all.len(), 7);
        all.sort();
        assert_eq!(all, (0..7).collect::<Vec<_>>());
        // Groups ascend in |value|.
        let max0 = bins[0].iter().map(|&j| v[j].abs()).fold(0.0, f64::max);
        let min2 = bins[2]
            .iter()
            .map(|&j| v[j].abs())
            .fold(f64::INFINITY, f64::min);
        assert!(max0 <= min2);
        assert_eq!(bins[0].len(), 3);
    }

    #[test]
    fn coverage_experiment_is_deterministic_and_consistent() {
        let spec = ScenarioSpec::standard(40, 12, BetaLaw::Laplace);
        let rc = RunConfig {
            reps: 6,
            seed: 42,
            level: 0.8,
            cv_folds: 5,
        };
        let a = run_coverage_experiment(&spec, &MethodSpec::Rlp, &rc).unwrap();
        let b = run_coverage_experiment(&spec, &MethodSpec::Rlp, &rc).unwrap();
        assert_eq!(a.average_coverage, b.average_coverage);
        assert_eq!(a.per_rep_coverage, b.per_rep_coverage);
        assert_eq!(a.detail.len(), 6 * 12);

        // The headline number is the mean of the per-replication averages,
        // and also the mean of bin coverages weighted by bin size.
        let from_reps = a.per_rep_coverage.iter().sum::<f64>() / a.reps_done as f64;
        assert_abs_diff_eq!(a.average_coverage, from_reps, epsilon = 1e-12);
        let weighted: f64 = a
            .bins
            .iter()
            .map(|b| b.coverage * b.members as f64)
            .sum::<f64>()
            / a.p as f64;
        assert_abs_diff_eq!(a.average_coverage, weighted, epsilon = 1e-12);
        let from_detail =
            a.detail.iter().filter(|d| d.covered).count() as f64 / a.detail.len() as f64;
        assert_abs_diff_eq!(a.average_coverage, from_detail, epsilon = 1e-12);
    }

    #[test]
    fn ridge_posterior_method_covers_roughly_at_level() {
        // Penalty matched to the prior that generated the coefficients:
        // average coverage should sit near the level even at few reps.
        let n = 60;
        let lambda = 0.4;
        let sigma2 = 25.0;
        let tau2 = sigma2 / (n as f64 * lambda);
        let spec = ScenarioSpec {
            n,
            p: 10,
            beta_law: BetaLaw::Normal,
            rho: 0.0,
            corr: CorrKind::Ar1,
            beta_scale: tau2.sqrt(),
            snr: None,
            sigma2,
        };
        let rc = RunConfig {
            reps: 40,
            seed: 7,
            level: 0.8,
            cv_folds: 5,
        };
        let rep = run_coverage_experiment(
            &spec,
            &MethodSpec::RidgePosterior { lambda, sigma2 },
            &rc,
        )
        .unwrap();
        assert!(
            (rep.average_coverage - 0.8).abs() < 0.08,
            "coverage {} too far from level",
            rep.average_coverage
        );
    }

    #[test]
    fn exact_conjugate_average_matches_level() {
        let grid = symmetric_grid(3.0, 41);
        let rep = exact_conjugate(&grid, 1.0, 1.0, 0.8).unwrap();
        assert_abs_diff_eq!(rep.average, 0.8, epsilon = 1e-6);
        // At the prior center shrinkage helps; far out it hurts.
        let at_zero = rep.curve[20].1;
        assert!(at_zero > 0.8);
        assert!(rep.curve[0].1 < 0.8);
        assert_eq!(rep.curve.len(), 41);
    }

    #[test]
    fn stability_runs_at_toy_scale() {
        let rc = RunConfig {
            reps: 4,
            seed: 11,
            level: 0.8,
            cv_folds: 5,
        };
        let rep = run_stability(&rc, 8, 30, 40).unwrap();
        assert_eq!(rep.a.nrows(), 4);
        assert_eq!(rep.a.ncols(), 40);
        for r in 0..4 {
            for j in 0..40 {
                let v = rep.a[(r, j)];
                assert!(v == 0.0 || v == 1.0);
                let f = rep.a_star[(r, j)];
                assert!((0.0..=1.0).contains(&f));
            }
        }
        // Strongest coefficient should be found essentially always.
        assert!(rep.a_bar[3] >= 0.75, "a_bar[3] = {}", rep.a_bar[3]);
    }

    #[test]
    fn bias_experiment_identity_and_exclusions() {
        let rc = RunConfig {
            reps: 5,
            seed: 3,
            level: 0.8,
            cv_folds: 5,
        };
        let rep = run_bootstrap_bias(&rc, 12).unwrap();
        assert!(rep.reps_done >= 4);
        for r in &rep.records {
            assert!(
                r.identity_gap().abs() < 1e-10,
                "identity gap {} for {} rep {}",
                r.identity_gap(),
                r.source,
                r.rep
            );
        }
        assert_eq!(rep.records.len(), 2 * rep.reps_done);
    }

    #[test]
    fn jensen_p1_ridge_pulls_toward_zero() {
        let rep = run_jensen_p1(BootEstimator::Ridge, 40, 60, 25, 2.0, 0.5, 1.0, 99).unwrap();
        assert!(rep.skipped == 0);
        assert!(
            rep.mean_diff < 0.0,
            "expected negative mean difference, got {}",
            rep.mean_diff
        );
    }
}
