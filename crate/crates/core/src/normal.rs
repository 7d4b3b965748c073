//! Standard-normal numerics in the log domain.
//!
//! Interval inversion routinely visits normal tail probabilities far below
//! the smallest positive `f64` (log-probabilities of −10⁴ and beyond), so
//! alongside the usual `cdf`/`quantile` pair this module provides `log_cdf`
//! and `quantile_from_log_p`, both accurate over the whole tail:
//!
//! * `log_cdf` uses `erfc` where it does not underflow and switches to the
//!   continued asymptotic expansion of Mills' ratio in the deep tail;
//! * `quantile` is Wichura's PPND16 rational approximation (~1e-15 relative);
//! * `quantile_from_log_p` exponentiates when safe and otherwise solves
//!   `log_cdf(z) = log p` by Newton iteration on the asymptotic branch.

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_74;
const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Standard normal density.
pub fn pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Log of the standard normal density.
pub fn log_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

/// Standard normal CDF. Underflows to 0 below z ≈ −38.
pub fn cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Standard normal survival function, `1 − cdf(z)`, accurate in the upper tail.
pub fn sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

/// Threshold below which `erfc` underflows and the asymptotic series takes over.
const LOG_CDF_SERIES_CUTOFF: f64 = -36.0;

/// Log of the standard normal CDF, finite for all finite `z`.
pub fn log_cdf(z: f64) -> f64 {
    if z > LOG_CDF_SERIES_CUTOFF {
        let c = cdf(z);
        if c >= 1.0 {
            // ln Φ(z) = ln(1 − Q(z)) with Q the tiny upper tail.
            return -sf(z);
        }
        c.ln()
    } else {
        log_cdf_asymptotic(z)
    }
}

/// Log survival function, `ln(1 − Φ(z))`.
pub fn log_sf(z: f64) -> f64 {
    log_cdf(-z)
}

/// Asymptotic expansion of ln Φ(z) for z ≪ 0:
/// ln Φ(z) = −z²/2 − ln(−z) − ln√(2π) + ln(1 − 1/z² + 3/z⁴ − 15/z⁶ + …).
fn log_cdf_asymptotic(z: f64) -> f64 {
    debug_assert!(z < 0.0);
    let iz2 = 1.0 / (z * z);
    // Truncated at z⁻¹⁰; next term is ~1e-17 relative at the crossover.
    let series = iz2 * (-1.0 + iz2 * (3.0 + iz2 * (-15.0 + iz2 * (105.0 - iz2 * 945.0))));
    -0.5 * z * z - (-z).ln() - LN_SQRT_2PI + libm::log1p(series)
}

/// Derivative of `log_cdf`: the hazard-like ratio φ(z)/Φ(z).
fn d_log_cdf(z: f64) -> f64 {
    (log_pdf(z) - log_cdf(z)).exp()
}

/// Standard normal quantile (PPND16, Wichura 1988).
///
/// Returns ±∞ at p = 0 and p = 1, NaN outside [0, 1].
pub fn quantile(p: f64) -> f64 {
    if p.is_nan() || p < 0.0 || p > 1.0 {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&CENTRAL_NUM, r) / poly(&CENTRAL_DEN, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let x = if r <= 5.0 {
        r -= 1.6;
        poly(&MID_NUM, r) / poly(&MID_DEN, r)
    } else {
        r -= 5.0;
        poly(&FAR_NUM, r) / poly(&FAR_DEN, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

/// Quantile from a log-probability, usable when `p` itself underflows.
///
/// For moderate `log_p` this is `quantile(exp(log_p))`; deeper in the tail it
/// Newton-solves `log_cdf(z) = log_p` on the asymptotic branch, accurate even
/// for log-probabilities of order −10⁶.
pub fn quantile_from_log_p(log_p: f64) -> f64 {
    if log_p.is_nan() || log_p > 0.0 {
        return f64::NAN;
    }
    if log_p == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if log_p == 0.0 {
        return f64::INFINITY;
    }
    if log_p > -690.0 {
        // exp() stays comfortably inside normal range; PPND16 covers it.
        return quantile(log_p.exp());
    }
    // Initial guess from −z²/2 − ln(−z) − ln√(2π) ≈ log_p, refined by fixed
    // point, then polished by Newton on the full asymptotic log-CDF.
    let u = -log_p;
    let mut z = -(2.0 * u).sqrt();
    for _ in 0..4 {
        z = -(2.0 * (u - (-z).ln() - LN_SQRT_2PI)).sqrt();
    }
    for _ in 0..40 {
        let g = log_cdf(z) - log_p;
        let step = g / d_log_cdf(z);
        z -= step;
        if step.abs() <= 1e-14 * (1.0 + z.abs()) {
            break;
        }
    }
    z
}

/// `ln(exp(a) + exp(b))` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + libm::log1p((lo - hi).exp())
}

/// `ln(exp(a) − exp(b))` for a > b; −∞ when the difference vanishes.
pub fn log_sub_exp(a: f64, b: f64) -> f64 {
    debug_assert!(a >= b, "log_sub_exp requires a >= b (got {a}, {b})");
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a == b {
        return f64::NEG_INFINITY;
    }
    a + (-libm::expm1(b - a)).ln()
}

/// `ln σ(x)` for the logistic sigmoid, stable on both tails.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -libm::log1p((-x).exp())
    } else {
        x - libm::log1p(x.exp())
    }
}

fn poly(coef: &[f64], x: f64) -> f64 {
    // Highest-order coefficient first.
    coef.iter().fold(0.0, |acc, &c| acc * x + c)
}

const CENTRAL_NUM: [f64; 8] = [
    2.509_080_928_730_122_6e3,
    3.343_057_558_358_812_8e4,
    6.726_577_092_700_87e4,
    4.592_195_393_154_987e4,
    1.373_169_376_550_946_1e4,
    1.971_590_950_306_551_3e3,
    1.331_416_678_917_843_8e2,
    3.387_132_872_796_366_5,
];
const CENTRAL_DEN: [f64; 8] = [
    5.226_495_278_852_854_5e3,
    2.872_908_573_572_194_3e4,
    3.930_789_580_009_271e4,
    2.121_379_430_158_659_7e4,
    5.394_196_021_424_751e3,
    6.871_870_074_920_579e2,
    4.231_333_070_160_091e1,
    1.0,
];
const MID_NUM: [f64; 8] = [
    7.745_450_142_783_414e-4,
    2.272_384_498_926_918_4e-2,
    2.417_807_251_774_506e-1,
    1.270_458_252_452_368_4,
    3.647_848_324_763_204_5,
    5.769_497_221_460_691,
    4.630_337_846_156_546,
    1.423_437_110_749_683_5,
];
const MID_DEN: [f64; 8] = [
    1.050_750_071_644_416_9e-9,
    5.475_938_084_995_345e-4,
    1.519_866_656_361_645_7e-2,
    1.481_039_764_274_800_8e-1,
    6.897_673_349_851e-1,
    1.676_384_830_183_803_8,
    2.053_191_626_637_759,
    1.0,
];
const FAR_NUM: [f64; 8] = [
    2.010_334_399_292_288e-7,
    2.711_555_568_743_487_6e-5,
    1.242_660_947_388_078_4e-3,
    2.653_218_952_657_612_3e-2,
    2.965_605_718_285_048_9e-1,
    1.784_826_539_917_291_3,
    5.463_784_911_164_114,
    6.657_904_643_501_103,
];
const FAR_DEN: [f64; 8] = [
    2.044_263_103_389_939_7e-15,
    1.421_511_758_316_446e-7,
    1.846_318_317_510_054_8e-5,
    7.868_691_311_456_133e-4,
    1.487_536_129_085_061_5e-2,
    1.369_298_809_227_358e-1,
    5.998_322_065_558_88e-1,
    1.0,
];

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cdf_matches_reference_values() {
        // Reference values verified with two independent erfc implementations.
        assert_relative_eq!(cdf(0.0), 0.5, max_relative = 1e-15);
        assert_relative_eq!(cdf(-1.0), 0.158_655_253_931_457_05, max_relative = 1e-14);
        assert_relative_eq!(cdf(-2.0), 0.022_750_131_948_179_195, max_relative = 1e-14);
        assert_relative_eq!(cdf(1.0), 0.841_344_746_068_543, max_relative = 1e-14);
        assert_relative_eq!(cdf(-5.0), 2.866_515_718_791_939e-7, max_relative = 1e-13);
    }

    #[test]
    fn quantile_round_trips_through_cdf() {
        // Sweep p over ~300 orders of magnitude; Φ(Φ⁻¹(p)) must reproduce p.
        let mut p = 0.5f64;
        while p > 1e-290 {
            let z = quantile(p);
            // An error δz in the quantile inflates to |z|·δz relative error in p.
            assert_relative_eq!(cdf(z), p, max_relative = 5e-12);
            let z_hi = quantile(1.0 - p);
            if p > 1e-15 {
                assert_relative_eq!(sf(z_hi), p, max_relative = 2e-12);
            }
            p *= 0.37;
        }
    }

    #[test]
    fn quantile_known_points() {
        assert_relative_eq!(quantile(0.975), 1.959_963_984_540_054, max_relative = 1e-13);
        assert_relative_eq!(quantile(0.9), 1.281_551_565_544_600_5, max_relative = 1e-13);
        assert_relative_eq!(quantile(0.8), 0.841_621_233_572_914_3, max_relative = 1e-13);
        assert_relative_eq!(quantile(0.5), 0.0, epsilon = 1e-300);
        assert_relative_eq!(quantile(0.1), -1.281_551_565_544_600_5, max_relative = 1e-13);
    }

    #[test]
    fn log_cdf_agrees_with_direct_log_in_moderate_range() {
        let mut z = -35.9;
        while z < 8.0 {
            let direct = cdf(z).ln();
            assert_relative_eq!(log_cdf(z), direct, max_relative = 1e-12, epsilon = 1e-12);
            z += 0.37;
        }
    }

    #[test]
    fn log_cdf_branches_agree_at_crossover() {
        // erfc is still finite slightly below the cutoff; both branches must match.
        for &z in &[-37.0, -36.5, -36.05, -35.95, -35.5] {
            let series = log_cdf_asymptotic(z);
            let erfc_based = cdf(z).ln();
            assert_relative_eq!(series, erfc_based, max_relative = 1e-13);
        }
    }

    #[test]
    fn log_cdf_near_zero_from_above() {
        // ln Φ(z) → −Q(z) for large z; the naive ln(1.0) would return exactly 0.
        let v = log_cdf(9.0);
        assert!(v < 0.0);
        assert_relative_eq!(v, -sf(9.0), max_relative = 1e-10);
    }

    #[test]
    fn quantile_from_log_p_matches_quantile_in_overlap() {
        let mut p = 0.9f64;
        while p > 1e-280 {
            let z1 = quantile(p);
            let z2 = quantile_from_log_p(p.ln());
            assert_relative_eq!(z1, z2, max_relative = 1e-12, epsilon = 1e-12);
            p *= 0.29;
        }
    }

    #[test]
    fn quantile_from_log_p_deep_tail_round_trip() {
        // Far beyond the representable range of p itself.
        for &lp in &[-800.0, -5_000.0, -50_000.0, -1.0e6] {
            let z = quantile_from_log_p(lp);
            assert!(z < -37.0);
            assert_relative_eq!(log_cdf(z), lp, max_relative = 1e-12);
        }
    }

    #[test]
    fn quantile_from_log_p_is_monotone_across_branch_cut() {
        let mut prev = quantile_from_log_p(-720.0);
        let mut lp = -719.0;
        while lp < -660.0 {
            let z = quantile_from_log_p(lp);
            assert!(z > prev, "non-monotone at log_p = {lp}");
            prev = z;
            lp += 0.5;
        }
    }

    #[test]
    fn log_add_and_sub_exp() {
        assert_relative_eq!(log_add_exp(0.0, 0.0), std::f64::consts::LN_2, max_relative = 1e-15);
        assert_relative_eq!(log_add_exp(-1000.0, -1001.0), -1000.0 + (1.0f64 + (-1.0f64).exp()).ln(), max_relative = 1e-14);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, -3.0), -3.0);
        assert_relative_eq!(log_sub_exp(0.0, -1.0), (1.0 - (-1.0f64).exp()).ln(), max_relative = 1e-14);
        assert_eq!(log_sub_exp(-5.0, f64::NEG_INFINITY), -5.0);
    }

    #[test]
    fn log_sigmoid_is_stable_on_both_tails() {
        assert_relative_eq!(log_sigmoid(0.0), -std::f64::consts::LN_2, max_relative = 1e-15);
        assert_relative_eq!(log_sigmoid(-40_000.0), -40_000.0, max_relative = 1e-12);
        assert!(log_sigmoid(40_000.0) <= 0.0);
        assert_relative_eq!(log_sigmoid(40_000.0), 0.0, epsilon = 1e-300);
        // σ(x) + σ(−x) = 1.
        for &x in &[0.1, 1.0, 5.0, 30.0] {
            let s = log_sigmoid(x).exp() + log_sigmoid(-x).exp();
            assert_relative_eq!(s, 1.0, max_relative = 1e-14);
        }
    }
}
