//! Pairs (row-resampling) bootstrap for penalized fits.
//!
//! Provides percentile intervals from refits on resampled rows, selection
//! frequencies across refits, and a four-term decomposition of the gap
//! between a true coefficient and its penalized estimate. The decomposition
//! is the tool used to show *why* resampling a penalized estimator recenters
//! it: averaging refits over resamples passes a concave map (penalty over
//! realized column variance) through an expectation, which biases the
//! bootstrap mean toward zero relative to the original estimate.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::data::{standardize, Dataset, StandardizedDesign};
use crate::error::{Error, Result};
use crate::lasso::{fit_lasso_at, LassoConfig};
use crate::ridge::ridge_solve;
use crate::rng::RngStream;

/// Which penalized estimator is refit on each resample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BootEstimator {
    Lasso,
    Ridge,
}

/// Settings for a pairs-bootstrap run.
#[derive(Clone, Debug)]
pub struct BootstrapConfig {
    pub estimator: BootEstimator,
    /// Penalty reused by every refit (no re-tuning inside the bootstrap).
    pub lambda: f64,
    pub replicates: usize,
    /// Central coverage level of the percentile intervals.
    pub level: f64,
    /// Re-standardize each resampled design before fitting, then map the
    /// coefficients back to the scale of the input matrix. The lasso penalty
    /// is calibrated for unit-variance columns, so lasso runs want this;
    /// ridge refits deliberately operate on the resampled data as-is so that
    /// resampling variability in the column second moments is preserved.
    pub restandardize: bool,
    pub lasso: LassoConfig,
}

impl BootstrapConfig {
    pub fn lasso(lambda: f64, replicates: usize, level: f64) -> Self {
        BootstrapConfig {
            estimator: BootEstimator::Lasso,
            lambda,
            replicates,
            level,
            restandardize: true,
            lasso: LassoConfig::default(),
        }
    }

    pub fn ridge(lambda: f64, replicates: usize, level: f64) -> Self {
        BootstrapConfig {
            estimator: BootEstimator::Ridge,
            lambda,
            replicates,
            level,
            restandardize: false,
            lasso: LassoConfig::default(),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::invalid("bootstrap needs at least 2 replicates"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::invalid("level must lie in (0,1)"));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::invalid("lambda must be finite and nonnegative"));
        }
        if n < 2 {
            return Err(Error::invalid("bootstrap needs at least 2 rows"));
        }
        Ok(())
    }
}

/// Output of [`pairs_bootstrap`].
///
/// All coefficient values are on the scale of the input matrix, so rows of
/// `estimates` are directly comparable to `original`.
#[derive(Clone, Debug)]
pub struct BootstrapRun {
    /// Point estimate on the full (non-resampled) data.
    pub original: DVector<f64>,
    /// One row per retained replication.
    pub estimates: DMatrix<f64>,
    pub mean: DVector<f64>,
    /// Per-coordinate percentile interval at `level`.
    pub intervals: Vec<(f64, f64)>,
    /// Row indices drawn by each retained replication, aligned with
    /// `estimates` rows.
    pub resample_indices: Vec<Vec<u32>>,
    /// Replications discarded because the resample produced a constant
    /// column (re-standardization impossible).
    pub dropped: usize,
    pub level: f64,
    pub lambda: f64,
}

fn fit_on(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    cfg: &BootstrapConfig,
    warm: Option<&DVector<f64>>,
) -> Result<DVector<f64>> {
    if cfg.restandardize {
        let data = Dataset::new(x.clone(), y.clone())?;
        let sd = standardize(&data)?;
        let beta = match cfg.estimator {
            BootEstimator::Lasso => {
                fit_lasso_at(&sd.xs, &sd.ys, cfg.lambda, warm, &cfg.lasso)?.beta
            }
            BootEstimator::Ridge => ridge_solve(
                &sd.xs,
                &sd.ys,
                cfg.lambda,
            )?,
        };
        Ok(sd.raw_coefficients(&beta))
    } else {
        match cfg.estimator {
            BootEstimator::Lasso => Ok(fit_lasso_at(x, y, cfg.lambda, warm, &cfg.lasso)?.beta),
            BootEstimator::Ridge => ridge_solve(x, y, cfg.lambda),
        }
    }
}

pub(crate) fn draw_indices(n: usize, stream: RngStream) -> Vec<u32> {
    use rand::Rng;
    let mut rng = stream.rng();
    (0..n).map(|_| rng.random_range(0..n as u32)).collect()
}

pub(crate) fn resample_rows(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    idx: &[u32],
) -> (DMatrix<f64>, DVector<f64>) {
    let (n, p) = (idx.len(), x.ncols());
    let mut xb = DMatrix::zeros(n, p);
    let mut yb = DVector::zeros(n);
    for (r, &i) in idx.iter().enumerate() {
        let i = i as usize;
        for j in 0..p {
            xb[(r, j)] = x[(i, j)];
        }
        yb[r] = y[i];
    }
    (xb, yb)
}

/// Interpolated empirical quantile of an ascending-sorted sample
/// (the linear-interpolation convention of most statistical software).
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    assert!((0.0..=1.0).contains(&p), "quantile order must lie in [0,1]");
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    if lo + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

/// Refit `cfg.estimator` on `cfg.replicates` row-resamples of `(x, y)`.
///
/// The penalty is held fixed across replications. Each replication draws its
/// own deterministic substream of `stream`, so results do not depend on
/// scheduling. Replications whose resample has a constant column are dropped
/// and counted (only possible when `cfg.restandardize` is set).
pub fn pairs_bootstrap(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    cfg: &BootstrapConfig,
    stream: RngStream,
) -> Result<BootstrapRun> {
    let n = x.nrows();
    let p = x.ncols();
    cfg.validate(n)?;
    if y.len() != n {
        return Err(Error::invalid("response length must match row count"));
    }
    let original = fit_on(x, y, cfg, None)?;
    // Warm-start refits from the full-data solution: resampled problems are
    // perturbations of it, and the solve still runs to its own certificate.
    let warm = match cfg.estimator {
        BootEstimator::Lasso => Some(&original),
        BootEstimator::Ridge => None,
    };

    let fits: Vec<Option<(Vec<u32>, DVector<f64>)>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|b| -> Result<Option<(Vec<u32>, DVector<f64>)>> {
            let idx = draw_indices(n, stream.stream(b as u64));
            let (xb, yb) = resample_rows(x, y, &idx);
            match fit_on(&xb, &yb, cfg, warm) {
                Ok(coef) => Ok(Some((idx, coef))),
                // A constant column in the resample is a property of the
                // draw, not of the inputs; skip that replication.
                Err(Error::Invalid(_)) if cfg.restandardize => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut resample_indices = Vec::new();
    let mut rows = Vec::new();
    let mut dropped = 0usize;
    for fit in fits {
        match fit {
            Some((idx, coef)) => {
                resample_indices.push(idx);
                rows.push(coef);
            }
            None => dropped += 1,
        }
    }
    if rows.len() < 2 {
        return Err(Error::simulation(format!(
            "only {} of {} bootstrap replications usable",
            rows.len(),
            cfg.replicates
        )));
    }

    let retained = rows.len();
    let estimates = DMatrix::from_fn(retained, p, |r, c| rows[r][c]);
    let mean = DVector::from_fn(p, |j, _| estimates.column(j).sum() / retained as f64);
    let alpha = 1.0 - cfg.level;
    let mut intervals = Vec::with_capacity(p);
    let mut col = vec![0.0; retained];
    for j in 0..p {
        for r in 0..retained {
            col[r] = estimates[(r, j)];
        }
        col.sort_by(|a, b| a.partial_cmp(b).expect("non-finite bootstrap estimate"));
        intervals.push((
            empirical_quantile(&col, alpha / 2.0),
            empirical_quantile(&col, 1.0 - alpha / 2.0),
        ));
    }

    Ok(BootstrapRun {
        original,
        estimates,
        mean,
        intervals,
        resample_indices,
        dropped,
        level: cfg.level,
        lambda: cfg.lambda,
    })
}

/// How often each coordinate is selected (nonzero) across lasso refits on
/// resampled rows, at a fixed penalty.
///
/// Returns the per-coordinate frequency over retained replications plus the
/// dropped-replication count. Memory stays O(p) regardless of the
/// replication count.
pub fn bootstrap_selection_freq(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    lambda: f64,
    replicates: usize,
    lasso_cfg: &LassoConfig,
    stream: RngStream,
) -> Result<(DVector<f64>, usize)> {
    let cfg = BootstrapConfig {
        estimator: BootEstimator::Lasso,
        lambda,
        replicates,
        level: 0.5,
        restandardize: true,
        lasso: lasso_cfg.clone(),
    };
    let n = x.nrows();
    let p = x.ncols();
    cfg.validate(n)?;
    let original = fit_on(x, y, &cfg, None)?;

    let counts: Vec<Option<Vec<bool>>> = (0..replicates)
        .into_par_iter()
        .map(|b| -> Result<Option<Vec<bool>>> {
            let idx = draw_indices(n, stream.stream(b as u64));
            let (xb, yb) = resample_rows(x, y, &idx);
            match fit_on(&xb, &yb, &cfg, Some(&original)) {
                Ok(coef) => Ok(Some((0..p).map(|j| coef[j] != 0.0).collect())),
                Err(Error::Invalid(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut freq = DVector::zeros(p);
    let mut retained = 0usize;
    let mut dropped = 0usize;
    for c in counts {
        match c {
            Some(sel) => {
                retained += 1;
                for (j, &s) in sel.iter().enumerate() {
                    if s {
                        freq[j] += 1.0;
                    }
                }
            }
            None => dropped += 1,
        }
    }
    if retained == 0 {
        return Err(Error::simulation("no usable bootstrap replications"));
    }
    freq /= retained as f64;
    Ok((freq, dropped))
}

/// Additive split of the gap between a true coefficient and its lasso
/// estimate, for one target coordinate of one fit.
///
/// All terms are on the standardized scale of the design the fit was run on.
/// Signs are arranged so that the four components sum to `total` and a
/// positive value moves the estimate toward zero (the natural reading when
/// the true coefficient is positive).
#[derive(Clone, Copy, Debug)]
pub struct BiasDecomposition {
    /// Chance alignment between the target column and the noise.
    pub irreducible: f64,
    /// Contribution of the designated correlated partner column.
    pub from_b: f64,
    /// Cumulative contribution of the remaining columns.
    pub from_n: f64,
    /// Realized stationarity value of the penalty at the target coordinate;
    /// equals the penalty parameter up to the solver certificate tolerance.
    pub penalty: f64,
    /// True standardized coefficient minus the estimate.
    pub total: f64,
}

impl BiasDecomposition {
    /// Residual of the additive identity; zero up to rounding.
    pub fn identity_gap(&self) -> f64 {
        self.irreducible + self.from_b + self.from_n + self.penalty - self.total
    }
}

/// Decompose `beta_true[a] − beta[a]` (standardized scale) into noise,
/// partner-column, remaining-column, and penalty contributions.
///
/// `beta` must be a certified solution on `sd`; `beta_true` and `eps` are the
/// raw-scale coefficients and noise that generated the underlying data.
/// Returns `None` when coordinate `a` is not selected with a positive
/// estimate — the split is derived from the positive stationarity branch, so
/// those fits are excluded rather than sign-juggled.
pub fn decompose_bias(
    sd: &StandardizedDesign,
    beta: &DVector<f64>,
    beta_true: &DVector<f64>,
    eps: &DVector<f64>,
    a: usize,
    b_idx: usize,
    n_idx: &[usize],
    lambda: f64,
) -> Result<Option<BiasDecomposition>> {
    let n = sd.n();
    let p = sd.p();
    if beta.len() != p || beta_true.len() != p {
        return Err(Error::invalid("coefficient length must match column count"));
    }
    if eps.len() != n {
        return Err(Error::invalid("noise length must match row count"));
    }
    if a >= p || b_idx >= p || a == b_idx {
        return Err(Error::invalid("target and partner must be distinct columns"));
    }
    if n_idx.iter().any(|&j| j >= p || j == a || j == b_idx) {
        return Err(Error::invalid(
            "remaining-column set must exclude the target and partner",
        ));
    }
    let nf = n as f64;
    let xa = sd.xs.column(a);
    let ssq = xa.dot(&xa) / nf;
    if (ssq - 1.0).abs() > 1e-6 {
        return Err(Error::numerical(
            "target column is not unit-variance standardized",
        ));
    }
    if beta[a] <= 0.0 {
        return Ok(None);
    }

    let residual = &sd.ys - &sd.xs * beta;
    let penalty = xa.dot(&residual) / nf;
    if (penalty - lambda).abs() > 1e-3 * (1.0 + lambda) {
        return Err(Error::certification(format!(
            "stationarity value {penalty} far from penalty {lambda}; \
             was the fit certified on this design?"
        )));
    }

    // The standardized response follows the standardized design with
    // coefficients scale∘beta_true and centered noise, exactly.
    let eps_mean = eps.sum() / nf;
    let mut irreducible = 0.0;
    for i in 0..n {
        irreducible -= xa[i] * (eps[i] - eps_mean);
    }
    irreducible /= nf;

    let gap = |j: usize| sd.col_scale[j] * beta_true[j] - beta[j];
    let cross = |j: usize| xa.dot(&sd.xs.column(j)) / nf;
    let from_b = -cross(b_idx) * gap(b_idx);
    let mut from_n = 0.0;
    for &j in n_idx {
        from_n -= cross(j) * gap(j);
    }
    let total = gap(a);

    Ok(Some(BiasDecomposition {
        irreducible,
        from_b,
        from_n,
        penalty,
        total,
    }))
}
