//! Normal distribution helpers on top of `libm`.

use libm::erfc;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal CDF `Φ(x)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal upper tail `1 − Φ(x)`, accurate for large `x`.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// `N(0, sigma²)` density at `x`.
pub fn normal_pdf(x: f64, sigma: f64) -> f64 {
    INV_SQRT_2PI / sigma * (-0.5 * (x / sigma).powi(2)).exp()
}

/// `ln` of the `N(0, sigma²)` density at `x`.
pub fn normal_log_pdf(x: f64, sigma: f64) -> f64 {
    -0.5 * (x / sigma).powi(2) - sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

/// `P(lo < X < hi)` for `X ~ N(0, sigma²)`.
pub fn interval_prob(lo: f64, hi: f64, sigma: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if lo >= 0.0 {
        normal_sf(lo / sigma) - normal_sf(hi / sigma)
    } else {
        normal_cdf(hi / sigma) - normal_cdf(lo / sigma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((normal_sf(8.0) - 6.220_960_574_271_785e-16).abs() < 1e-27);
        assert!((normal_pdf(0.0, 0.5) - 0.797_884_560_802_865_4).abs() < 1e-15);
        assert!((normal_log_pdf(0.3, 0.7) - normal_pdf(0.3, 0.7).ln()).abs() < 1e-15);
    }
}
