//! K-fold cross-validation for the lasso penalty and the residual-variance
//! estimate used by the posterior.
//!
//! Each training split is re-centered and re-scaled before fitting, exactly
//! as a fresh fit would be, and held-out predictions are mapped back through
//! the training split's centers and scales. The penalty grid itself is fixed
//! in advance from the full data so every fold scores the same candidates.

use nalgebra::{DMatrix, DVector};

use crate::data::{standardize, Dataset, StandardizedDesign};
use crate::error::{Error, Result};
use crate::lasso::{fit_lasso_path_design, LambdaGrid, LassoConfig, LassoFit};
use crate::rng::RngStream;

/// Cross-validation summary over a penalty grid.
#[derive(Clone, Debug)]
pub struct CvResult {
    pub lambdas: Vec<f64>,
    /// Mean squared held-out prediction error per grid value.
    pub cve: Vec<f64>,
    /// Standard error of `cve` across folds.
    pub cve_se: Vec<f64>,
    /// Grid value minimizing `cve` (ties resolved toward the larger penalty).
    pub lambda_cv: f64,
    pub lambda_cv_index: usize,
    /// Largest penalty whose error is within one standard error of the minimum.
    pub lambda_1se: f64,
    pub lambda_1se_index: usize,
    /// Fold id of each observation.
    pub fold_assignment: Vec<usize>,
}

/// Assign `n` observations to `k` folds of near-equal size, shuffled by `stream`.
fn assign_folds(n: usize, k: usize, stream: RngStream) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream.rng());
    let mut fold = vec![0usize; n];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % k;
    }
    fold
}

/// K-fold cross-validation of the lasso path on a standardized design.
pub fn cross_validate(
    sd: &StandardizedDesign,
    grid: &LambdaGrid,
    k: usize,
    stream: RngStream,
    cfg: &LassoConfig,
) -> Result<CvResult> {
    let n = sd.n();
    let p = sd.p();
    if k < 2 || k > n {
        return Err(Error::invalid(format!("fold count {k} must lie in [2, n]")));
    }
    let m = grid.len();
    let fold_assignment = assign_folds(n, k, stream);

    // Per-fold mean squared errors, folds × grid.
    let mut fold_err = vec![vec![0.0f64; m]; k];
    let mut fold_size = vec![0usize; k];
    for fid in 0..k {
        let test: Vec<usize> = (0..n).filter(|&i| fold_assignment[i] == fid).collect();
        let train: Vec<usize> = (0..n).filter(|&i| fold_assignment[i] != fid).collect();
        fold_size[fid] = test.len();
        if test.is_empty() || train.len() < 2 {
            return Err(Error::invalid("a fold is empty; reduce the fold count"));
        }

        let xt = DMatrix::from_fn(train.len(), p, |r, c| sd.xs[(train[r], c)]);
        let yt = DVector::from_fn(train.len(), |r, _| sd.ys[train[r]]);
        let sdt = standardize(&Dataset::new(xt, yt)?)?;
        let fit = fit_lasso_path_design(&sdt.xs, &sdt.ys, grid, cfg)?;

        for (mi, pt) in fit.points.iter().enumerate() {
            let mut sse = 0.0;
            for &i in &test {
                let mut pred = sdt.y_center;
                for &j in &pt.selected {
                    pred += pt.beta[j] * (sd.xs[(i, j)] - sdt.col_center[j]) / sdt.col_scale[j];
                }
                let e = sd.ys[i] - pred;
                sse += e * e;
            }
            fold_err[fid][mi] = sse / test.len() as f64;
        }
    }

    // Observation-weighted mean across folds, plus the spread across folds.
    let mut cve = vec![0.0f64; m];
    let mut cve_se = vec![0.0f64; m];
    for mi in 0..m {
        let total: f64 = (0..k).map(|f| fold_err[f][mi] * fold_size[f] as f64).sum();
        cve[mi] = total / n as f64;
        let mean_of_folds: f64 = (0..k).map(|f| fold_err[f][mi]).sum::<f64>() / k as f64;
        let var: f64 = (0..k).map(|f| (fold_err[f][mi] - mean_of_folds).powi(2)).sum::<f64>() / (k as f64 - 1.0);
        cve_se[mi] = (var / k as f64).sqrt();
    }

    // Grid is descending, so scanning with strict `<` keeps the largest
    // penalty among tied minima.
    let mut lambda_cv_index = 0;
    for mi in 1..m {
        if cve[mi] < cve[lambda_cv_index] {
            lambda_cv_index = mi;
        }
    }
    let threshold = cve[lambda_cv_index] + cve_se[lambda_cv_index];
    let lambda_1se_index = (0..m).find(|&mi| cve[mi] <= threshold).unwrap_or(lambda_cv_index);

    Ok(CvResult {
        lambdas: grid.values().to_vec(),
        cve,
        cve_se,
        lambda_cv: grid.values()[lambda_cv_index],
        lambda_cv_index,
        lambda_1se: grid.values()[lambda_1se_index],
        lambda_1se_index,
        fold_assignment,
    })
}

/// Residual-variance estimate at the cross-validated penalty.
#[derive(Clone, Copy, Debug)]
pub struct SigmaEstimate {
    pub sigma2_hat: f64,
    /// Degrees of freedom used in the denominator, `n − |selected|`.
    pub df: usize,
}

/// `σ̂² = ‖y − Xβ̂(λ)‖² / (n − |Ŝ(λ)|)` from a solved path point.
pub fn estimate_sigma2(sd: &StandardizedDesign, fit: &LassoFit, index: usize) -> Result<SigmaEstimate> {
    let pt = fit
        .points
        .get(index)
        .ok_or_else(|| Error::invalid(format!("path index {index} out of range")))?;
    let df_lost = pt.selected.len();
    if sd.n() <= df_lost {
        return Err(Error::numerical(format!(
            "cannot estimate variance: {} observations, {} selected coefficients",
            sd.n(),
            df_lost
        )));
    }
    let r = &sd.ys - &sd.xs * &pt.beta;
    let df = sd.n() - df_lost;
    Ok(SigmaEstimate {
        sigma2_hat: r.norm_squared() / df as f64,
        df,
    })
}
