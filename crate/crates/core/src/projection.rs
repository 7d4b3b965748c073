//! Per-coordinate conditional statistics after selection.
//!
//! For a fitted selected set `S`, each coordinate `j` is summarized by the
//! pair (β̃_j, ñ_j) built from the projection `Q` off the *other* selected
//! columns `S_j = S \ {j}`:
//!
//! * `ñ_j = x_jᵀ Q x_j` — the effective sample size left for `x_j`,
//! * `β̃_j = x_jᵀ Q y / ñ_j` — the debiased (relaxed) estimate.
//!
//! One Cholesky factorization of `X_SᵀX_S` serves every coordinate: for
//! `j ∈ S` the pair is read off the full least-squares fit on `X_S`
//! (`β̃_j` is its j-th coefficient and `ñ_j = 1/[(X_SᵀX_S)⁻¹]_jj`), and for
//! `j ∉ S` the column is residualized against `X_S` directly. Selected
//! columns that are linearly dependent on earlier ones are dropped from the
//! factor with a warning entry; their own statistics, like those of any
//! coordinate with vanishing `ñ`, are flagged degenerate.

use nalgebra::{DMatrix, DVector};

use crate::data::StandardizedDesign;
use crate::error::{Error, Result};

/// Relative pivot threshold for dropping a dependent column from the factor.
const RANK_TOL: f64 = 1e-10;

/// Relative threshold (× n) under which `ñ` is treated as zero.
const DEGENERATE_TOL: f64 = 1e-8;

/// Conditional summary for one coordinate.
#[derive(Clone, Copy, Debug)]
pub struct ConditionalStats {
    pub index: usize,
    /// Relaxed estimate `β̃_j`; 0 when degenerate.
    pub beta_tilde: f64,
    /// Effective sample size `ñ_j ∈ [0, n]`.
    pub n_tilde: f64,
    /// True when `x_j` lies (numerically) in the span of the other selected
    /// columns, so the data carry no information about this coordinate.
    pub degenerate: bool,
}

/// Conditional statistics for every coordinate, plus any selected columns
/// dropped from the factorization for collinearity.
#[derive(Clone, Debug)]
pub struct ConditionalStatsSet {
    pub stats: Vec<ConditionalStats>,
    pub dropped: Vec<usize>,
}

/// Incremental Cholesky factor of `X_KᵀX_K` for an ordered subset `K`.
struct SubsetFactor<'a> {
    xs: &'a DMatrix<f64>,
    kept: Vec<usize>,
    dropped: Vec<usize>,
    /// Lower-triangular factor, top-left `kept.len()` block valid.
    l: DMatrix<f64>,
}

impl<'a> SubsetFactor<'a> {
    fn build(xs: &'a DMatrix<f64>, subset: &[usize]) -> Result<Self> {
        let p = xs.ncols();
        let s = subset.len();
        let mut f = SubsetFactor {
            xs,
            kept: Vec::with_capacity(s),
            dropped: Vec::new(),
            l: DMatrix::zeros(s, s),
        };
        for &j in subset {
            if j >= p {
                return Err(Error::invalid(format!("selected index {j} out of range (p = {p})")));
            }
            let k = f.kept.len();
            let xj = xs.column(j);
            let gjj = xj.norm_squared();
            // Row of the Gram matrix against the already-kept columns, then
            // one forward-substitution step to extend the factor.
            let mut w = DVector::zeros(k);
            for (i, &ki) in f.kept.iter().enumerate() {
                w[i] = xs.column(ki).dot(&xj);
            }
            f.forward_solve_in_place(&mut w, k);
            let d2 = gjj - w.norm_squared();
            if d2 <= RANK_TOL * gjj {
                f.dropped.push(j);
                continue;
            }
            for i in 0..k {
                f.l[(k, i)] = w[i];
            }
            f.l[(k, k)] = d2.sqrt();
            f.kept.push(j);
        }
        Ok(f)
    }

    /// Solve `L v = b` in place over the leading `k × k` block.
    fn forward_solve_in_place(&self, b: &mut DVector<f64>, k: usize) {
        for i in 0..k {
            let mut acc = b[i];
            for m in 0..i {
                acc -= self.l[(i, m)] * b[m];
            }
            b[i] = acc / self.l[(i, i)];
        }
    }

    /// Solve `Lᵀ v = b` in place over the leading `k × k` block.
    fn backward_solve_in_place(&self, b: &mut DVector<f64>, k: usize) {
        for i in (0..k).rev() {
            let mut acc = b[i];
            for m in i + 1..k {
                acc -= self.l[(m, i)] * b[m];
            }
            b[i] = acc / self.l[(i, i)];
        }
    }

    /// Least-squares coefficients of `rhs` on the kept columns.
    fn ols(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let k = self.kept.len();
        let mut b = DVector::zeros(k);
        for (i, &ki) in self.kept.iter().enumerate() {
            b[i] = self.xs.column(ki).dot(rhs);
        }
        self.forward_solve_in_place(&mut b, k);
        self.backward_solve_in_place(&mut b, k);
        b
    }

    /// `[(X_KᵀX_K)⁻¹]_kk` for the kept column at position `k`.
    fn inverse_gram_diagonal(&self, k: usize) -> f64 {
        let kk = self.kept.len();
        // L v = e_k, then the diagonal entry is ‖v‖².
        let mut v = DVector::zeros(kk);
        v[k] = 1.0 / self.l[(k, k)];
        for i in k + 1..kk {
            let mut acc = 0.0;
            for m in k..i {
                acc -= self.l[(i, m)] * v[m];
            }
            v[i] = acc / self.l[(i, i)];
        }
        v.norm_squared()
    }

    /// Residual of column `j` against the kept columns.
    fn residualize(&self, j: usize) -> DVector<f64> {
        let k = self.kept.len();
        let xj = self.xs.column(j).clone_owned();
        if k == 0 {
            return xj;
        }
        let mut t = DVector::zeros(k);
        for (i, &ki) in self.kept.iter().enumerate() {
            t[i] = self.xs.column(ki).dot(&xj);
        }
        self.forward_solve_in_place(&mut t, k);
        self.backward_solve_in_place(&mut t, k);
        let mut u = xj;
        for (i, &ki) in self.kept.iter().enumerate() {
            u.axpy(-t[i], &self.xs.column(ki), 1.0);
        }
        u
    }
}

/// Conditional statistics for every coordinate given the selected set.
pub fn conditional_stats_all(sd: &StandardizedDesign, selected: &[usize]) -> Result<ConditionalStatsSet> {
    let n = sd.n() as f64;
    let p = sd.p();
    let factor = SubsetFactor::build(&sd.xs, selected)?;
    let ols = factor.ols(&sd.ys);

    let mut stats = Vec::with_capacity(p);
    for j in 0..p {
        let st = if let Some(k) = factor.kept.iter().position(|&ki| ki == j) {
            let n_tilde = 1.0 / factor.inverse_gram_diagonal(k);
            degenerate_or(j, ols[k], n_tilde, n)
        } else {
            let u = factor.residualize(j);
            let n_tilde = u.norm_squared();
            if n_tilde < DEGENERATE_TOL * n {
                ConditionalStats { index: j, beta_tilde: 0.0, n_tilde, degenerate: true }
            } else {
                ConditionalStats {
                    index: j,
                    beta_tilde: u.dot(&sd.ys) / n_tilde,
                    n_tilde,
                    degenerate: false,
                }
            }
        };
        stats.push(st);
    }

    Ok(ConditionalStatsSet { stats, dropped: factor.dropped })
}

fn degenerate_or(index: usize, beta_tilde: f64, n_tilde: f64, n: f64) -> ConditionalStats {
    if n_tilde < DEGENERATE_TOL * n {
        ConditionalStats { index, beta_tilde: 0.0, n_tilde, degenerate: true }
    } else {
        ConditionalStats { index, beta_tilde, n_tilde, degenerate: false }
    }
}

/// Conditional statistics for a single coordinate (builds the factorization
/// for just this query; use [`conditional_stats_all`] for whole-vector work).
pub fn conditional_stats(sd: &StandardizedDesign, selected: &[usize], j: usize) -> Result<ConditionalStats> {
    if j >= sd.p() {
        return Err(Error::invalid(format!("index {j} out of range (p = {})", sd.p())));
    }
    // Resolve collinearity drops on the full selected set first so this
    // agrees with `conditional_stats_all` even on degenerate selections.
    let full = SubsetFactor::build(&sd.xs, selected)?;
    let others: Vec<usize> = full.kept.iter().copied().filter(|&i| i != j).collect();
    let factor = SubsetFactor::build(&sd.xs, &others)?;
    let u = factor.residualize(j);
    let n_tilde = u.norm_squared();
    let n = sd.n() as f64;
    if n_tilde < DEGENERATE_TOL * n {
        return Ok(ConditionalStats { index: j, beta_tilde: 0.0, n_tilde, degenerate: true });
    }
    Ok(ConditionalStats {
        index: j,
        beta_tilde: u.dot(&sd.ys) / n_tilde,
        n_tilde,
        degenerate: false,
    })
}
