//! Simulation scenario descriptions and dataset generation.
//!
//! A [`ScenarioSpec`] describes one data-generating mechanism: coefficient
//! construction (a distribution whose evenly spaced quantiles become the
//! true β, or an explicit vector), predictor correlation structure, noise
//! level, and an optional signal-to-noise normalization. Generation is a
//! pure function of the description and an [`RngStream`], so replications
//! are reproducible regardless of scheduling.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::ContinuousCDF;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::normal;
use crate::rng::RngStream;

/// Law from which true coefficients are built.
///
/// Distribution variants set `β_j` to the `j/(p+1)` quantile of the law for
/// `j = 1..p`; sparse variants fix a short leading block and leave the rest
/// zero; `Custom` supplies leading values verbatim (zero-padded to `p`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaLaw {
    Laplace,
    T3,
    Normal,
    Uniform,
    /// Quantiles of Beta(0.1, 0.1) shifted by −½: a bimodal law at ±½.
    Beta01,
    /// First ten coefficients `±(0.5, 0.5, 0.5, 1, 2)`, rest zero.
    Sparse1,
    /// First 31 coefficients set to evenly spaced standard-normal quantiles.
    Sparse2,
    /// First 51 coefficients set to evenly spaced standard-normal quantiles.
    Sparse3,
    Custom(Vec<f64>),
}

/// Correlation structure of the predictor matrix (unit marginal variances).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrKind {
    /// Autoregressive: `cor(x_i, x_j) = ρ^|i−j|`.
    Ar1,
    /// Banded: correlation ρ at lag 1, zero beyond. Errors when the implied
    /// covariance matrix is not positive definite.
    Banded,
    /// Only the first two columns are correlated (at ρ); the rest are independent.
    FirstPair,
}

fn default_corr() -> CorrKind {
    CorrKind::Ar1
}

fn default_one() -> f64 {
    1.0
}

fn default_snr() -> Option<f64> {
    Some(1.0)
}

/// Complete description of a data-generating mechanism.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub n: usize,
    pub p: usize,
    pub beta_law: BetaLaw,
    /// Correlation parameter; 0 gives independent columns.
    #[serde(default)]
    pub rho: f64,
    #[serde(default = "default_corr")]
    pub corr: CorrKind,
    /// Multiplier applied to the law's raw values before normalization
    /// (matters only when `snr` is `None`, which preserves absolute scale).
    #[serde(default = "default_one")]
    pub beta_scale: f64,
    /// When set, β is rescaled so that `βᵀβ = snr · σ²`.
    #[serde(default = "default_snr")]
    pub snr: Option<f64>,
    #[serde(default = "default_one")]
    pub sigma2: f64,
}

impl ScenarioSpec {
    /// The standard coverage-study scenario: iid predictors, coefficients
    /// from `law`, SNR 1.
    pub fn standard(n: usize, p: usize, beta_law: BetaLaw) -> Self {
        ScenarioSpec {
            n,
            p,
            beta_law,
            rho: 0.0,
            corr: CorrKind::Ar1,
            beta_scale: 1.0,
            snr: Some(1.0),
            sigma2: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.p == 0 {
            return Err(Error::invalid("scenario needs n >= 2 and p >= 1"));
        }
        if !(self.sigma2 > 0.0) || !self.sigma2.is_finite() {
            return Err(Error::invalid("sigma2 must be positive and finite"));
        }
        if !self.rho.is_finite() || self.rho.abs() >= 1.0 {
            return Err(Error::invalid("rho must lie in (-1, 1)"));
        }
        if let Some(snr) = self.snr {
            if !(snr > 0.0) || !snr.is_finite() {
                return Err(Error::invalid("snr must be positive and finite"));
            }
        }
        Ok(())
    }
}

/// One generated replication.
#[derive(Clone, Debug)]
pub struct SimulatedData {
    pub data: Dataset,
    pub beta_true: DVector<f64>,
    pub eps: DVector<f64>,
}

fn laplace_quantile(u: f64) -> f64 {
    if u < 0.5 {
        (2.0 * u).ln()
    } else {
        -(2.0 * (1.0 - u)).ln()
    }
}

/// Evenly spaced quantiles `k/(count+1)`, `k = 1..count`, of a law.
fn even_quantiles(count: usize, q: impl Fn(f64) -> f64) -> Vec<f64> {
    (1..=count).map(|k| q(k as f64 / (count + 1) as f64)).collect()
}

/// True coefficient vector for a scenario.
pub fn build_beta(spec: &ScenarioSpec) -> Result<DVector<f64>> {
    spec.validate()?;
    let p = spec.p;
    let need = |min: usize, name: &str| -> Result<()> {
        if p < min {
            Err(Error::invalid(format!("{name} coefficients need p >= {min}, got {p}")))
        } else {
            Ok(())
        }
    };
    let mut beta: Vec<f64> = match &spec.beta_law {
        BetaLaw::Laplace => even_quantiles(p, laplace_quantile),
        BetaLaw::T3 => {
            let t = statrs::distribution::StudentsT::new(0.0, 1.0, 3.0)
                .map_err(|e| Error::numerical(e.to_string()))?;
            even_quantiles(p, |u| t.inverse_cdf(u))
        }
        BetaLaw::Normal => even_quantiles(p, normal::quantile),
        BetaLaw::Uniform => even_quantiles(p, |u| 2.0 * u - 1.0),
        BetaLaw::Beta01 => {
            let b = statrs::distribution::Beta::new(0.1, 0.1)
                .map_err(|e| Error::numerical(e.to_string()))?;
            even_quantiles(p, |u| b.inverse_cdf(u) - 0.5)
        }
        BetaLaw::Sparse1 => {
            need(10, "sparse1")?;
            let mut v = vec![0.0; p];
            let block = [0.5, 0.5, 0.5, 1.0, 2.0];
            for (i, &b) in block.iter().enumerate() {
                v[i] = b;
                v[i + block.len()] = -b;
            }
            v
        }
        BetaLaw::Sparse2 => {
            need(31, "sparse2")?;
            let mut v = vec![0.0; p];
            for (i, q) in even_quantiles(31, normal::quantile).into_iter().enumerate() {
                v[i] = q;
            }
            v
        }
        BetaLaw::Sparse3 => {
            need(51, "sparse3")?;
            let mut v = vec![0.0; p];
            for (i, q) in even_quantiles(51, normal::quantile).into_iter().enumerate() {
                v[i] = q;
            }
            v
        }
        BetaLaw::Custom(values) => {
            if values.len() > p {
                return Err(Error::invalid(format!(
                    "custom coefficient vector has {} entries but p = {p}",
                    values.len()
                )));
            }
            let mut v = vec![0.0; p];
            v[..values.len()].copy_from_slice(values);
            v
        }
    };

    for b in &mut beta {
        *b *= spec.beta_scale;
    }
    if let Some(snr) = spec.snr {
        let ss: f64 = beta.iter().map(|b| b * b).sum();
        if ss <= 0.0 {
            return Err(Error::invalid("cannot normalize an all-zero coefficient vector"));
        }
        let target = snr * spec.sigma2;
        let c = (target / ss).sqrt();
        for b in &mut beta {
            *b *= c;
        }
    }
    Ok(DVector::from_vec(beta))
}

/// Generate one replication. Draw order is fixed (the predictor matrix
/// column by column, then the noise vector), so output is a pure function
/// of `(spec, stream)`.
pub fn generate_dataset(spec: &ScenarioSpec, stream: RngStream) -> Result<SimulatedData> {
    spec.validate()?;
    let beta_true = build_beta(spec)?;
    let (n, p) = (spec.n, spec.p);
    let mut rng = stream.rng();

    let mut z = DMatrix::zeros(n, p);
    for j in 0..p {
        for i in 0..n {
            z[(i, j)] = rng.sample::<f64, _>(StandardNormal);
        }
    }
    let x = apply_correlation(z, spec)?;

    let sigma = spec.sigma2.sqrt();
    let eps = DVector::from_fn(n, |_, _| sigma * rng.sample::<f64, _>(StandardNormal));
    let y = &x * &beta_true + &eps;

    Ok(SimulatedData {
        data: Dataset::new(x, y)?,
        beta_true,
        eps,
    })
}

fn apply_correlation(mut z: DMatrix<f64>, spec: &ScenarioSpec) -> Result<DMatrix<f64>> {
    let rho = spec.rho;
    if rho == 0.0 {
        return Ok(z);
    }
    let (n, p) = (z.nrows(), z.ncols());
    match spec.corr {
        CorrKind::Ar1 => {
            let carry = (1.0 - rho * rho).sqrt();
            for j in 1..p {
                for i in 0..n {
                    z[(i, j)] = rho * z[(i, j - 1)] + carry * z[(i, j)];
                }
            }
            Ok(z)
        }
        CorrKind::FirstPair => {
            if p < 2 {
                return Err(Error::invalid("first-pair correlation needs p >= 2"));
            }
            let carry = (1.0 - rho * rho).sqrt();
            for i in 0..n {
                z[(i, 1)] = rho * z[(i, 0)] + carry * z[(i, 1)];
            }
            Ok(z)
        }
        CorrKind::Banded => {
            let mut sigma = DMatrix::identity(p, p);
            for j in 0..p - 1 {
                sigma[(j, j + 1)] = rho;
                sigma[(j + 1, j)] = rho;
            }
            let chol = sigma.cholesky().ok_or_else(|| {
                Error::invalid(format!(
                    "banded correlation with rho = {rho} is not positive definite at p = {p}"
                ))
            })?;
            Ok(z * chol.l().transpose())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn col_corr(x: &DMatrix<f64>, a: usize, b: usize) -> f64 {
        let n = x.nrows() as f64;
        let ca = x.column(a);
        let cb = x.column(b);
        let (ma, mb) = (ca.sum() / n, cb.sum() / n);
        let mut num = 0.0;
        let (mut va, mut vb) = (0.0, 0.0);
        for i in 0..x.nrows() {
            let da = ca[i] - ma;
            let db = cb[i] - mb;
            num += da * db;
            va += da * da;
            vb += db * db;
        }
        num / (va * vb).sqrt()
    }

    #[test]
    fn laplace_beta_is_symmetric_and_snr_normalized() {
        let spec = ScenarioSpec::standard(100, 101, BetaLaw::Laplace);
        let beta = build_beta(&spec).unwrap();
        assert_relative_eq!(beta.norm_squared(), 1.0, max_relative = 1e-12);
        for j in 0..101 {
            assert_relative_eq!(beta[j], -beta[100 - j], epsilon = 1e-12);
        }
        // Middle entry is the median of a symmetric law.
        assert_relative_eq!(beta[50], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn snr_scales_with_sigma2() {
        let mut spec = ScenarioSpec::standard(100, 50, BetaLaw::Normal);
        spec.sigma2 = 4.0;
        let beta = build_beta(&spec).unwrap();
        assert_relative_eq!(beta.norm_squared(), 4.0, max_relative = 1e-12);
    }

    #[test]
    fn sparse_laws_have_expected_support() {
        let spec = ScenarioSpec::standard(100, 101, BetaLaw::Sparse1);
        let beta = build_beta(&spec).unwrap();
        assert_eq!(beta.iter().filter(|b| **b != 0.0).count(), 10);
        // Pattern is preserved up to the common SNR rescaling.
        assert_relative_eq!(beta[4] / beta[0], 4.0, max_relative = 1e-12);
        assert_relative_eq!(beta[9], -beta[4], epsilon = 1e-12);

        let spec2 = ScenarioSpec::standard(100, 101, BetaLaw::Sparse2);
        assert_eq!(build_beta(&spec2).unwrap().iter().filter(|b| **b != 0.0).count(), 30);
        let spec3 = ScenarioSpec::standard(100, 101, BetaLaw::Sparse3);
        assert_eq!(build_beta(&spec3).unwrap().iter().filter(|b| **b != 0.0).count(), 50);

        // (Sparse 2/3 blocks include the law's median, which is exactly zero.)
        let tiny = ScenarioSpec::standard(100, 9, BetaLaw::Sparse1);
        assert!(build_beta(&tiny).is_err());
    }

    #[test]
    fn custom_law_preserves_values_when_unnormalized() {
        let mut spec = ScenarioSpec::standard(50, 500, BetaLaw::Custom(vec![0.25, 0.5, 1.0, 2.0]));
        spec.snr = None;
        let beta = build_beta(&spec).unwrap();
        assert_eq!(beta[0], 0.25);
        assert_eq!(beta[1], 0.5);
        assert_eq!(beta[2], 1.0);
        assert_eq!(beta[3], 2.0);
        assert!(beta.iter().skip(4).all(|b| *b == 0.0));
    }

    #[test]
    fn beta_scale_applies_before_normalization_is_skipped() {
        let mut spec = ScenarioSpec::standard(200, 20, BetaLaw::Normal);
        spec.snr = None;
        spec.beta_scale = 1.25f64.sqrt();
        let beta = build_beta(&spec).unwrap();
        let unscaled: Vec<f64> = even_quantiles(20, normal::quantile);
        for j in 0..20 {
            assert_relative_eq!(beta[j], 1.25f64.sqrt() * unscaled[j], max_relative = 1e-12);
        }
    }

    #[test]
    fn generation_is_deterministic_per_stream() {
        let spec = ScenarioSpec::standard(30, 10, BetaLaw::Laplace);
        let s = RngStream::root(9).stream(4);
        let a = generate_dataset(&spec, s).unwrap();
        let b = generate_dataset(&spec, s).unwrap();
        assert_eq!(a.data.x, b.data.x);
        assert_eq!(a.data.y, b.data.y);
        let c = generate_dataset(&spec, RngStream::root(9).stream(5)).unwrap();
        assert_ne!(a.data.x, c.data.x);
    }

    #[test]
    fn ar1_correlation_decays_geometrically() {
        let mut spec = ScenarioSpec::standard(20_000, 4, BetaLaw::Normal);
        spec.rho = 0.8;
        let sim = generate_dataset(&spec, RngStream::root(3).stream(0)).unwrap();
        let x = &sim.data.x;
        assert_relative_eq!(col_corr(x, 0, 1), 0.8, epsilon = 0.02);
        assert_relative_eq!(col_corr(x, 1, 2), 0.8, epsilon = 0.02);
        assert_relative_eq!(col_corr(x, 0, 2), 0.64, epsilon = 0.03);
        // Marginal variance stays 1.
        for j in 0..4 {
            let v = x.column(j).norm_squared() / 20_000.0;
            assert_relative_eq!(v, 1.0, epsilon = 0.05);
        }
    }

    #[test]
    fn first_pair_correlation_leaves_noise_independent() {
        let mut spec = ScenarioSpec::standard(20_000, 5, BetaLaw::Custom(vec![1.0]));
        spec.rho = 0.99;
        spec.corr = CorrKind::FirstPair;
        spec.snr = None;
        let sim = generate_dataset(&spec, RngStream::root(4).stream(0)).unwrap();
        let x = &sim.data.x;
        assert_relative_eq!(col_corr(x, 0, 1), 0.99, epsilon = 0.005);
        assert!(col_corr(x, 0, 2).abs() < 0.03);
        assert!(col_corr(x, 1, 3).abs() < 0.03);
        assert!(col_corr(x, 2, 3).abs() < 0.03);
    }

    #[test]
    fn banded_correlation_is_exact_at_lag_one_and_zero_beyond() {
        let mut spec = ScenarioSpec::standard(20_000, 6, BetaLaw::Normal);
        spec.rho = 0.4;
        spec.corr = CorrKind::Banded;
        let sim = generate_dataset(&spec, RngStream::root(5).stream(0)).unwrap();
        let x = &sim.data.x;
        assert_relative_eq!(col_corr(x, 0, 1), 0.4, epsilon = 0.03);
        assert_relative_eq!(col_corr(x, 2, 3), 0.4, epsilon = 0.03);
        assert!(col_corr(x, 0, 2).abs() < 0.03);
    }

    #[test]
    fn infeasible_banded_correlation_errors() {
        let mut spec = ScenarioSpec::standard(50, 20, BetaLaw::Normal);
        spec.rho = 0.9;
        spec.corr = CorrKind::Banded;
        assert!(generate_dataset(&spec, RngStream::root(1).stream(0)).is_err());
    }

    #[test]
    fn response_equals_signal_plus_recorded_noise() {
        let spec = ScenarioSpec::standard(40, 8, BetaLaw::Uniform);
        let sim = generate_dataset(&spec, RngStream::root(12).stream(0)).unwrap();
        let fitted = &sim.data.x * &sim.beta_true;
        for i in 0..40 {
            assert_relative_eq!(sim.data.y[i], fitted[i] + sim.eps[i], max_relative = 1e-12);
        }
    }

    #[test]
    fn serde_round_trip() {
        let spec = ScenarioSpec {
            n: 100,
            p: 101,
            beta_law: BetaLaw::Custom(vec![1.0, -2.0]),
            rho: 0.5,
            corr: CorrKind::Banded,
            beta_scale: 2.0,
            snr: None,
            sigma2: 1.5,
        };
        let json = serde_json::to_string(&spec).unwrap();
        let back: ScenarioSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back.beta_law, spec.beta_law);
        assert_eq!(back.corr, spec.corr);
        // Defaults fill in omitted fields.
        let minimal: ScenarioSpec =
            serde_json::from_str(r#"{"n": 10, "p": 5, "beta_law": "laplace"}"#).unwrap();
        assert_eq!(minimal.corr, CorrKind::Ar1);
        assert_eq!(minimal.snr, Some(1.0));
        assert_eq!(minimal.sigma2, 1.0);
        assert_eq!(minimal.rho, 0.0);
    }
}
