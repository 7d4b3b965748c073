//! The piecewise-normal conditional posterior and its interval inversion.
//!
//! Conditioning a Laplace-type prior on the selection event leaves, for each
//! coordinate, a posterior assembled from two normal pieces that share a
//! variance `v = σ²/ñ` but differ in mean:
//!
//! * on `t < 0`:  `N(β̃ + λ, v)` with log-weight `+β̃λñ/σ²`,
//! * on `t ≥ 0`:  `N(β̃ − λ, v)` with log-weight `−β̃λñ/σ²`,
//!
//! each truncated to its half-line and renormalized jointly. The branch
//! probabilities can differ by thousands of orders of magnitude, so all
//! weight arithmetic lives in the log domain, and quantiles are taken with
//! [`crate::normal::quantile_from_log_p`] so that inversion stays accurate
//! when the within-branch tail probability underflows.
//!
//! At `λ = 0` the construction collapses exactly to `N(β̃, v)`; at `β̃ = 0`
//! it is symmetric with branch mass ½ each.

use crate::data::StandardizedDesign;
use crate::error::{Error, Result};
use crate::interval::{IntervalEntry, IntervalSet};
use crate::lasso::PathPoint;
use crate::normal::{log_add_exp, log_cdf, log_sigmoid, quantile_from_log_p};
use crate::projection::conditional_stats_all;

const LN_HALF: f64 = -std::f64::consts::LN_2;

/// One coordinate's conditional posterior, with branch quantities precomputed.
#[derive(Clone, Copy, Debug)]
pub struct ConditionalPosterior {
    beta_tilde: f64,
    n_tilde: f64,
    lambda: f64,
    sigma2: f64,
    /// Branch variance σ²/ñ and its square root.
    v: f64,
    s: f64,
    mu_minus: f64,
    mu_plus: f64,
    /// ln Φ(−μ₋/s): within-branch mass of the negative piece.
    log_pr_minus: f64,
    /// ln Φ(μ₊/s): within-branch mass of the positive piece.
    log_pr_plus: f64,
    /// ln(1 − Pr₋) and ln(1 − Pr₊), kept for the complementary inversions.
    log_sf_minus: f64,
    log_a_plus: f64,
    /// ln of the posterior probability of each half-line.
    log_post_minus: f64,
    log_post_plus: f64,
}

impl ConditionalPosterior {
    pub fn new(beta_tilde: f64, n_tilde: f64, lambda: f64, sigma2: f64) -> Result<Self> {
        if !beta_tilde.is_finite() || !n_tilde.is_finite() || !lambda.is_finite() || !sigma2.is_finite() {
            return Err(Error::invalid("posterior parameters must be finite"));
        }
        if n_tilde <= 0.0 || sigma2 <= 0.0 || lambda < 0.0 {
            return Err(Error::invalid(
                "posterior requires n_tilde > 0, sigma2 > 0, lambda >= 0",
            ));
        }
        let v = sigma2 / n_tilde;
        let s = v.sqrt();
        let log_c_minus = beta_tilde * lambda / v; // = β̃λñ/σ²
        if !v.is_finite() || v <= 0.0 || !log_c_minus.is_finite() {
            return Err(Error::numerical("posterior parameters are out of numerical range"));
        }
        let mu_minus = beta_tilde + lambda;
        let mu_plus = beta_tilde - lambda;
        let log_pr_minus = log_cdf(-mu_minus / s);
        let log_pr_plus = log_cdf(mu_plus / s);
        let log_sf_minus = log_cdf(mu_minus / s);
        let log_a_plus = log_cdf(-mu_plus / s);
        // Δ = (logC₋ + logPr₋) − (logC₊ + logPr₊); Post₋ = σ(Δ).
        let delta = 2.0 * log_c_minus + log_pr_minus - log_pr_plus;
        let log_post_minus = log_sigmoid(delta);
        let log_post_plus = log_sigmoid(-delta);
        Ok(ConditionalPosterior {
            beta_tilde,
            n_tilde,
            lambda,
            sigma2,
            v,
            s,
            mu_minus,
            mu_plus,
            log_pr_minus,
            log_pr_plus,
            log_sf_minus,
            log_a_plus,
            log_post_minus,
            log_post_plus,
        })
    }

    pub fn beta_tilde(&self) -> f64 {
        self.beta_tilde
    }

    pub fn n_tilde(&self) -> f64 {
        self.n_tilde
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Branch variance σ²/ñ.
    pub fn branch_variance(&self) -> f64 {
        self.v
    }

    /// Log posterior mass of the two half-lines, `(ln P(t<0), ln P(t≥0))`.
    pub fn log_weights(&self) -> (f64, f64) {
        (self.log_post_minus, self.log_post_plus)
    }

    /// Posterior probability that the coordinate is negative.
    pub fn prob_negative(&self) -> f64 {
        self.log_post_minus.exp()
    }

    /// Posterior CDF.
    pub fn cdf(&self, t: f64) -> f64 {
        if t.is_nan() {
            return f64::NAN;
        }
        if t < 0.0 {
            let z = (t - self.mu_minus) / self.s;
            (self.log_post_minus + log_cdf(z) - self.log_pr_minus).exp().min(1.0)
        } else {
            let z = (t - self.mu_plus) / self.s;
            // Upper-tail form keeps precision as the CDF approaches 1.
            let upper = (self.log_post_plus + log_cdf(-z) - self.log_pr_plus).exp();
            (1.0 - upper).clamp(0.0, 1.0)
        }
    }

    /// Posterior quantile for `p ∈ (0, 1)`.
    ///
    /// The branch is chosen by comparing `p` with the negative half-line
    /// mass; the within-branch probability is then rebuilt in whichever of
    /// the lower/upper-tail representations is numerically small, and the
    /// normal quantile is taken from its log.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid(format!("quantile requires p in (0,1), got {p}")));
        }
        let lp = p.ln();
        let l1p = libm::log1p(-p);
        if lp <= self.log_post_minus {
            // Negative branch: solve Φ((t−μ₋)/s) = q*, q* = p·Pr₋/Post₋.
            let log_qstar = (lp + self.log_pr_minus - self.log_post_minus).min(0.0);
            let t = if log_qstar <= LN_HALF {
                self.mu_minus + self.s * quantile_from_log_p(log_qstar)
            } else {
                // 1 − q* = [(Post₋ − p) + p·(1 − Pr₋)] / Post₋, all terms ≥ 0.
                let gap = self.log_post_minus.exp() - p;
                let log_gap = if gap > 0.0 { gap.ln() } else { f64::NEG_INFINITY };
                let log_1mq = (log_add_exp(log_gap, lp + self.log_sf_minus) - self.log_post_minus).min(0.0);
                self.mu_minus - self.s * quantile_from_log_p(log_1mq)
            };
            Ok(t.min(0.0))
        } else {
            // Positive branch: solve Φ((t−μ₊)/s) = q with
            // 1 − q = (1 − p)·Pr₊/Post₊ (uses Post₋ + Post₊ = 1).
            let log_1mq = (l1p + self.log_pr_plus - self.log_post_plus).min(0.0);
            let t = if log_1mq <= LN_HALF {
                self.mu_plus - self.s * quantile_from_log_p(log_1mq)
            } else {
                // q = (1 − Pr₊) + (p − Post₋)·Pr₊/Post₊, all terms ≥ 0.
                let gap = p - self.log_post_minus.exp();
                let log_gap = if gap > 0.0 { gap.ln() } else { f64::NEG_INFINITY };
                let log_q = (log_add_exp(self.log_a_plus, log_gap + self.log_pr_plus - self.log_post_plus)).min(0.0);
                self.mu_plus + self.s * quantile_from_log_p(log_q)
            };
            Ok(t.max(0.0))
        }
    }

    /// Equal-tailed interval at the given level.
    pub fn central_interval(&self, level: f64) -> Result<(f64, f64)> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::invalid(format!("level must lie in (0,1), got {level}")));
        }
        let alpha = 1.0 - level;
        Ok((self.quantile(alpha / 2.0)?, self.quantile(1.0 - alpha / 2.0)?))
    }
}

/// Intervals for every coordinate at a solved path point.
///
/// Degenerate coordinates (no effective sample size left after projection)
/// get infinite intervals rather than an error; collinear selected columns
/// dropped during factorization are reported in the result.
pub fn rlp_intervals(
    sd: &StandardizedDesign,
    point: &PathPoint,
    sigma2: f64,
    level: f64,
) -> Result<IntervalSet> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::invalid("sigma2 must be positive and finite"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("level must lie in (0,1)"));
    }
    let cs = conditional_stats_all(sd, &point.selected)?;
    let mut entries = Vec::with_capacity(sd.p());
    for st in &cs.stats {
        let j = st.index;
        let selected = point.beta[j] != 0.0;
        if st.degenerate {
            entries.push(IntervalEntry {
                index: j,
                lasso_estimate: point.beta[j],
                beta_tilde: st.beta_tilde,
                lower: f64::NEG_INFINITY,
                upper: f64::INFINITY,
                selected,
                n_tilde: st.n_tilde,
                degenerate: true,
            });
            continue;
        }
        let post = ConditionalPosterior::new(st.beta_tilde, st.n_tilde, point.lambda, sigma2)?;
        let (lower, upper) = post.central_interval(level)?;
        entries.push(IntervalEntry {
            index: j,
            lasso_estimate: point.beta[j],
            beta_tilde: st.beta_tilde,
            lower,
            upper,
            selected,
            n_tilde: st.n_tilde,
            degenerate: false,
        });
    }
    Ok(IntervalSet {
        level,
        lambda: point.lambda,
        sigma2,
        dropped: cs.dropped,
        entries,
    })
}
