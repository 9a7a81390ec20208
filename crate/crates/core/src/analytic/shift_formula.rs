//! Shift of a decorated Poisson process from its decoration:
//! `τ_f = c⁻¹ log(-∫ e^{-ct} (L_D[f|-t] - 1) dt)`.

use crate::analytic::quadrature::{integrate_pieces, QuadratureSpec};
use crate::error::{invalid, Error, Result};
use crate::samplers::DecorationSpec;
use crate::test_function::TestFunction;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConverseShift {
    pub tau: f64,
    /// `∫ e^{-ct} (L_D[f|-t] - 1) dt`, always negative on success.
    pub integral: f64,
    pub quadrature_error: f64,
}

/// `decoration_laplace(y)` must return `L_D[f|y]`. With `f` supported in
/// `[a, b]` and the decoration in `[-radius, 0]`, `L_D[f|-t] = 1` unless some
/// `d + t` lands in `[a, b]`, so the integrand vanishes outside `[a, b + radius]`.
pub fn converse_shift<L: FnMut(f64) -> f64>(
    mut decoration_laplace: L,
    support: (f64, f64),
    radius: f64,
    c: f64,
    breaks: &[f64],
    quad: &QuadratureSpec<f64>,
) -> Result<ConverseShift> {
    if !(c > 0.0) {
        return Err(invalid("c must be positive"));
    }
    if !(radius >= 0.0) {
        return Err(invalid("support radius must be nonnegative"));
    }
    let (a, b) = support;
    if !(a < b) {
        return Err(invalid("empty test-function support"));
    }
    let q = integrate_pieces(
        |t: f64| {
            let l = decoration_laplace(-t);
            if l == 1.0 {
                0.0
            } else {
                (-c * t).exp() * (l - 1.0)
            }
        },
        a,
        b + radius,
        breaks,
        quad,
    );
    if !(q.value < 0.0) {
        return Err(Error::DegenerateIntegral(q.value));
    }
    Ok(ConverseShift {
        tau: (-q.value).ln() / c,
        integral: q.value,
        quadrature_error: q.error,
    })
}

/// [`converse_shift`] for a decoration family with an exactly computable
/// Laplace functional.
pub fn converse_shift_for(
    decoration: &DecorationSpec,
    f: &TestFunction,
    c: f64,
    quad: &QuadratureSpec<f64>,
) -> Result<ConverseShift> {
    f.validate()?;
    decoration.laplace_at(f, 0.0)?;
    let mut breaks = Vec::new();
    let offsets = decoration.known_offsets();
    for k in f.kinks() {
        for &d in &offsets {
            breaks.push(k - d);
        }
    }
    converse_shift(
        |y| decoration.laplace_at(f, y).expect("checked above"),
        (f.support_low(), f.support_high()),
        decoration.support_radius(),
        c,
        &breaks,
        quad,
    )
}
