//! Penalized-regression inference toolkit.
//!
//! The library fits lasso and ridge regressions on standardized designs and
//! produces per-coordinate confidence intervals from a piecewise-normal
//! conditional posterior built around the relaxed (debiased) lasso estimate.
//! Interval calibration is *average-coverage*: across coordinates drawn from
//! the implicit prior, intervals cover at the nominal rate, trading wider
//! intervals on small effects for sharper ones on large effects.
//!
//! A seeded simulation laboratory ([`sim`]) reproduces the coverage,
//! bootstrap-bias, and stability-selection experiments used to validate the
//! method, with deterministic output independent of thread count.

pub mod bootstrap;
pub mod cv;
pub mod data;
pub mod error;
pub mod interval;
pub mod lasso;
pub mod manifest;
pub mod normal;
pub mod posterior;
pub mod projection;
pub mod report;
pub mod ridge;
pub mod rng;
pub mod scenario;
pub mod sim;

pub use error::{Error, Result};
