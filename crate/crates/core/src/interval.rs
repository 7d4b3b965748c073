//! Interval containers and scale conversion.

use crate::data::StandardizedDesign;

/// Interval for one coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntervalEntry {
    pub index: usize,
    /// Penalized point estimate at the fitted penalty.
    pub lasso_estimate: f64,
    /// Relaxed (debiased) estimate the interval is centered around.
    pub beta_tilde: f64,
    pub lower: f64,
    pub upper: f64,
    pub selected: bool,
    /// Effective sample size after projecting off the other selected columns.
    pub n_tilde: f64,
    /// No usable information for this coordinate; endpoints are ±∞.
    pub degenerate: bool,
}

impl IntervalEntry {
    pub fn covers(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Intervals for all coordinates of one fit.
#[derive(Clone, Debug)]
pub struct IntervalSet {
    pub level: f64,
    pub lambda: f64,
    pub sigma2: f64,
    /// Selected columns dropped from the projection for collinearity.
    pub dropped: Vec<usize>,
    pub entries: Vec<IntervalEntry>,
}

/// Map a standardized-scale interval set back to raw predictor units.
///
/// Standardized coefficient `b` corresponds to `b / scale_j` on the raw
/// scale; scales are positive, so endpoints map monotonically.
pub fn destandardize(set: &IntervalSet, sd: &StandardizedDesign) -> IntervalSet {
    let entries = set
        .entries
        .iter()
        .map(|e| {
            let s = sd.col_scale[e.index];
            IntervalEntry {
                index: e.index,
                lasso_estimate: e.lasso_estimate / s,
                beta_tilde: e.beta_tilde / s,
                lower: e.lower / s,
                upper: e.upper / s,
                selected: e.selected,
                n_tilde: e.n_tilde,
                degenerate: e.degenerate,
            }
        })
        .collect();
    IntervalSet {
        level: set.level,
        lambda: set.lambda,
        sigma2: set.sigma2,
        dropped: set.dropped.clone(),
        entries,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{standardize, Dataset};
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn destandardize_divides_by_column_scale() {
        let x = DMatrix::from_row_slice(4, 1, &[10.0, 20.0, 30.0, 40.0]);
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        let sd = standardize(&Dataset::new(x, y).unwrap()).unwrap();
        let set = IntervalSet {
            level: 0.8,
            lambda: 0.1,
            sigma2: 1.0,
            dropped: vec![],
            entries: vec![IntervalEntry {
                index: 0,
                lasso_estimate: 1.0,
                beta_tilde: 1.2,
                lower: 0.5,
                upper: 2.0,
                selected: true,
                n_tilde: 4.0,
                degenerate: false,
            }],
        };
        let raw = destandardize(&set, &sd);
        let s = sd.col_scale[0];
        assert_relative_eq!(raw.entries[0].lower, 0.5 / s);
        assert_relative_eq!(raw.entries[0].upper, 2.0 / s);
        assert_relative_eq!(raw.entries[0].beta_tilde, 1.2 / s);
        assert!(raw.entries[0].upper > raw.entries[0].lower);
    }

    #[test]
    fn covers_and_width() {
        let e = IntervalEntry {
            index: 0,
            lasso_estimate: 0.0,
            beta_tilde: 0.0,
            lower: -1.0,
            upper: 2.0,
            selected: false,
            n_tilde: 1.0,
            degenerate: false,
        };
        assert!(e.covers(0.0));
        assert!(e.covers(-1.0) && e.covers(2.0));
        assert!(!e.covers(2.1));
        assert_relative_eq!(e.width(), 3.0);
    }
}
