//! Gumbel laws of different scales: `Gum(c₁ y) = E Gum(c₂ (y - S + τ))` with
//! `S = c₂⁻¹ log Σ e^{c₂ x_i}` over `PPP(e^{-c₁ x} dx)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::gumbel::{gumbel_cdf, gumbel_quantile};
use crate::analytic::quadrature::{integrate_range, QuadratureSpec};
use crate::analytic::special::ln_gamma;
use crate::error::{invalid, Error, Result};
use crate::samplers::{sample_zbeta_shift, zbeta_atom_low, DecorationSpec};
use crate::seed::SeedPath;

/// Largest admissible `c₁ / c₂`.
pub const MAX_SCALE_RATIO: f64 = 0.95;

/// Agreement required between the closed form and the quadrature oracle.
pub const ORACLE_TOLERANCE: f64 = 1e-6;

fn check_scales(c1: f64, c2: f64) -> Result<()> {
    if !(c1 > 0.0 && c2 > c1) {
        return Err(invalid(format!(
            "need c2 > c1 > 0, got c1 = {c1}, c2 = {c2}"
        )));
    }
    if c1 / c2 > MAX_SCALE_RATIO {
        return Err(invalid(format!(
            "c1 / c2 = {} too close to 1 (max {MAX_SCALE_RATIO})",
            c1 / c2
        )));
    }
    Ok(())
}

/// `τ = c₁⁻¹ log(Γ(1 - c₁/c₂) / c₁)`.
pub fn scale_tau_closed_form(c1: f64, c2: f64) -> Result<f64> {
    check_scales(c1, c2)?;
    Ok((ln_gamma(1.0 - c1 / c2) - c1.ln()) / c1)
}

/// `τ = c₁⁻¹ log K` with `K = ∫ (1 - exp(-e^{c₂ u})) e^{-c₁ u} du` by quadrature.
pub fn scale_tau_quadrature(c1: f64, c2: f64, quad: &QuadratureSpec<f64>) -> Result<f64> {
    check_scales(c1, c2)?;
    let integrand = |u: f64| {
        if u < 0.0 {
            // (1 - e^{-v}) / v · e^{(c₂-c₁)u} with v = e^{c₂u}, finite as u → -∞
            let v = (c2 * u).exp();
            let ratio = if v > 0.0 { -(-v).exp_m1() / v } else { 1.0 };
            ratio * ((c2 - c1) * u).exp()
        } else {
            -(-(c2 * u).exp()).exp_m1() * (-c1 * u).exp()
        }
    };
    let q = integrate_range(integrand, f64::NEG_INFINITY, 0.0, quad)
        + integrate_range(integrand, 0.0, f64::INFINITY, quad);
    if !(q.value > 0.0) {
        return Err(Error::DegenerateIntegral(q.value));
    }
    Ok(q.value.ln() / c1)
}

/// Shift of the curve `y ↦ E exp(-e^{-βy} Σ e^{β x})` for a decorated Poisson
/// process with atom intensity `e^{-cx}` and a deterministic or finitely
/// supported decoration: `c⁻¹ log(Γ(1 - c/β) E[W^{c/β}] / c)`, `W = Σ_j e^{β d_j}`.
pub fn freezing_tau(c: f64, beta: f64, decoration: &DecorationSpec) -> Result<f64> {
    check_scales(c, beta)?;
    let alpha = c / beta;
    let moment = decoration.power_of_exp_sum_moment(beta, alpha)?;
    Ok((ln_gamma(1.0 - alpha) + moment.ln() - c.ln()) / c)
}

#[derive(Clone, Debug, Serialize)]
pub struct ScaleRelation {
    pub c1: f64,
    pub c2: f64,
    pub tau_closed_form: f64,
    pub tau_quadrature: f64,
    pub atom_low: f64,
    pub n_draws: usize,
    pub grid_points: usize,
    /// `sup_y |mean Gum(c₂(y - S + τ)) - Gum(c₁ y)|`.
    pub sup_deviation: f64,
}

/// Validates the closed-form `τ` against quadrature, then measures the Monte
/// Carlo deviation of the mixture identity on a 201-point grid.
pub fn gumbel_scale_relation(
    c1: f64,
    c2: f64,
    n_draws: usize,
    truncation_tol: f64,
    seed: &SeedPath,
) -> Result<ScaleRelation> {
    let closed = scale_tau_closed_form(c1, c2)?;
    let quad = scale_tau_quadrature(c1, c2, &QuadratureSpec::with_tol(1e-13, 1e-13))?;
    if (closed - quad).abs() > ORACLE_TOLERANCE {
        return Err(Error::OracleMismatch {
            closed,
            quadrature: quad,
        });
    }
    if n_draws == 0 {
        return Err(Error::TooFewSamples { got: 0, min: 1 });
    }
    let atom_low = zbeta_atom_low(c1, c2, truncation_tol)?;
    let shifts: Vec<f64> = (0..n_draws as u64)
        .into_par_iter()
        .map(|i| sample_zbeta_shift(c1, c2, atom_low, &seed.child(i)).map(|z| z.compensated))
        .collect::<Result<_>>()?;
    let lo = gumbel_quantile(1e-3, c1);
    let hi = gumbel_quantile(1.0 - 1e-3, c1);
    let grid: Vec<f64> = (0..201)
        .map(|k| lo + (hi - lo) * k as f64 / 200.0)
        .collect();
    let sup_deviation = grid
        .par_iter()
        .map(|&y| {
            let mix = shifts
                .iter()
                .map(|&s| gumbel_cdf(y - s + closed, c2))
                .sum::<f64>()
                / n_draws as f64;
            (mix - gumbel_cdf(y, c1)).abs()
        })
        .reduce(|| 0.0, f64::max);
    Ok(ScaleRelation {
        c1,
        c2,
        tau_closed_form: closed,
        tau_quadrature: quad,
        atom_low,
        n_draws,
        grid_points: grid.len(),
        sup_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        let sqrt_pi_ln = 0.5 * std::f64::consts::PI.ln();
        assert!((scale_tau_closed_form(1.0, 2.0).unwrap() - sqrt_pi_ln).abs() < 1e-12);
        assert!(
            (scale_tau_closed_form(1.0, 3.0).unwrap() - 1.354_117_939_426_400_4f64.ln()).abs()
                < 1e-12
        );
        let want = 0.5 * (1.489_192_248_812_817f64 / 2.0).ln();
        assert!((scale_tau_closed_form(2.0, 5.0).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let quad = QuadratureSpec::with_tol(1e-13, 1e-13);
        for &(c1, c2) in &[(1.0, 2.0), (1.0, 3.0), (2.0, 5.0), (0.5, 4.0), (1.0, 1.1)] {
            let a = scale_tau_closed_form(c1, c2).unwrap();
            let b = scale_tau_quadrature(c1, c2, &quad).unwrap();
            assert!((a - b).abs() < 1e-8, "({c1}, {c2}): {a} vs {b}");
        }
    }

    #[test]
    fn rejects_bad_scales() {
        assert!(scale_tau_closed_form(1.0, 1.0).is_err());
        assert!(scale_tau_closed_form(2.0, 1.0).is_err());
        assert!(scale_tau_closed_form(0.99, 1.0).is_err());
    }

    #[test]
    fn freezing_tau_for_poisson() {
        let t = freezing_tau(1.0, 2.0, &DecorationSpec::Dirac).unwrap();
        assert!((t - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-12);
    }

    #[test]
    fn small_monte_carlo_run() {
        let r = gumbel_scale_relation(1.0, 3.0, 4000, 1e-6, &SeedPath::new(3)).unwrap();
        assert!(r.sup_deviation < 0.05, "{r:?}");
    }
}
