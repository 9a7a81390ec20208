//! Gumbel distribution functions and the Bessel form of `Gum * Gum'`.

use crate::analytic::quadrature::{integrate, QuadratureSpec};
use crate::analytic::special::bessel_k1;
use crate::error::{invalid, Result};
use crate::real::Real;

/// `Gum(c y) = exp(-e^{-c y})`.
pub fn gumbel_cdf<T: Real>(y: T, c: T) -> T {
    gumbel_log_cdf(y, c).exp()
}

/// `ln Gum(c y) = -e^{-c y}`.
pub fn gumbel_log_cdf<T: Real>(y: T, c: T) -> T {
    -(-(c * y)).exp()
}

/// `1 - Gum(c y)`, accurate in the right tail.
pub fn gumbel_sf<T: Real>(y: T, c: T) -> T {
    -(gumbel_log_cdf(y, c)).exp_m1()
}

/// Density of `Gum(c ·)`.
pub fn gumbel_pdf<T: Real>(y: T, c: T) -> T {
    let cy = c * y;
    c * (-cy - (-cy).exp()).exp()
}

/// Solves `Gum(c y) = p`.
pub fn gumbel_quantile<T: Real>(p: T, c: T) -> T {
    -(-(p.ln())).ln() / c
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GumbelIdentity {
    /// `2 e^{-β x / 2} K₁(2 e^{-β x / 2})`
    pub bessel_form: f64,
    /// `∫ Gum(β x - u) Gum'(u) du`
    pub convolution: f64,
    pub difference: f64,
}

/// Evaluates both sides of `2e^{-βx/2} K₁(2e^{-βx/2}) = (Gum * Gum')(βx)`.
pub fn gum_conv_gumprime(x: f64, beta_c: f64) -> Result<GumbelIdentity> {
    if !(beta_c > 0.0) {
        return Err(invalid("beta_c must be positive"));
    }
    let z = 2.0 * (-beta_c * x / 2.0).exp();
    let bessel_form = z * bessel_k1(z)?;
    let convolution = gumbel_convolution_cdf(beta_c * x);
    Ok(GumbelIdentity {
        bessel_form,
        convolution,
        difference: bessel_form - convolution,
    })
}

/// Distribution function of the sum of two independent standard Gumbel variables at `s`.
pub fn gumbel_convolution_cdf(s: f64) -> f64 {
    // Integrand exp(-e^{u-s} - u - e^{-u}) is negligible (< e^{-2900}) outside
    // [min(s,0) - 8, max(s,0) + 8].
    let lo = s.min(0.0) - 8.0;
    let hi = s.max(0.0) + 8.0;
    let spec = QuadratureSpec::with_tol(1e-14, 1e-13);
    integrate(
        |u: f64| (-(u - s).exp() - u - (-u).exp()).exp(),
        lo,
        hi,
        &spec,
    )
    .value
}

/// Distribution function of `X' + X''` for i.i.d. `X', X''` with law `Gum(β ·)`,
/// in Bessel form. Valid while `2e^{-βx/2}` lies in the K₁ domain; clamps to
/// 0 / 1 beyond it.
pub fn gumbel_sum_cdf(x: f64, beta: f64) -> f64 {
    let z = 2.0 * (-beta * x / 2.0).exp();
    match bessel_k1(z) {
        Ok(k) => z * k,
        Err(_) if z > 1.0 => 0.0,
        Err(_) => 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_examples() {
        assert!((gumbel_cdf(0.0f64, 1.0) - (-1f64).exp()).abs() < 1e-16);
        let c = 2.5f64;
        let med = -(2f64.ln()).ln() / c;
        assert!((gumbel_cdf(med, c) - 0.5).abs() < 1e-15);
        assert!((gumbel_quantile(0.5f64, c) - med).abs() < 1e-15);
        let mut prev = 0.0;
        for i in 0..400 {
            let v = gumbel_cdf(-5.0 + i as f64 * 0.1, 1.0);
            assert!(v >= prev);
            prev = v;
        }
        assert_eq!(gumbel_cdf(100.0f64, 1.0), 1.0);
        assert!(gumbel_sf(40.0f64, 1.0) > 0.0);
        assert!((gumbel_sf(40.0f64, 1.0) / (-40f64).exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pdf_integrates_to_cdf() {
        let q = integrate(
            |u: f64| gumbel_pdf(u, 1.7),
            -10.0,
            0.4,
            &QuadratureSpec::default(),
        );
        assert!((q.value - gumbel_cdf(0.4, 1.7)).abs() < 1e-10);
    }

    #[test]
    fn identity_at_origin() {
        let id = gum_conv_gumprime(0.0, 1.0).unwrap();
        assert!((id.bessel_form - 2.0 * 0.139_865_881_816_522_4).abs() < 1e-12);
        assert!(id.difference.abs() < 1e-8);
    }

    #[test]
    fn identity_tends_to_one() {
        let id = gum_conv_gumprime(12.0, 1.0).unwrap();
        assert!((id.bessel_form - 1.0).abs() < 1e-4);
        assert!((id.convolution - 1.0).abs() < 1e-4);
    }

    #[test]
    fn sum_cdf_saturates() {
        assert_eq!(gumbel_sum_cdf(-60.0, 1.0), 0.0);
        assert_eq!(gumbel_sum_cdf(60.0, 1.0), 1.0);
    }
}
