//! Law-of-large-numbers and exponential-stability verdicts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analytic::{integrate_pieces, QuadratureSpec};
use crate::error::{invalid, Error, Result};
use crate::laplace::{estimate_curves, LaplaceCurve, BAND};
use crate::samplers::{DecorationSpec, Dppp, ProcessSample, Sampler};
use crate::seed::SeedPath;
use crate::stats::dependence::{mean_and_se, sample_sd};
use crate::stats::goodness::{ks_two_sample, ks_two_sample_threshold};
use crate::stats::VerificationReport;
use crate::test_function::TestFunction;

/// Largest admissible expected atom count `e^{cy}/c` per draw.
pub const LLN_BUDGET: f64 = 1e7;

/// Relative tolerance on the limit constant.
pub const LLN_REL_TOL: f64 = 0.05;

/// Normalization tolerance for `e^{ca} + e^{cb} = 1`.
pub const PAIR_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlnParams {
    pub c: f64,
    pub decoration: DecorationSpec,
    /// Ascending levels.
    pub ys: Vec<f64>,
    pub n_reps: usize,
}

/// `lim e^{-cy} c · #(points above -y) = ∫_0^∞ c e^{-cx} E D([-x, 0]) dx`.
pub fn lln_constant(decoration: &DecorationSpec, c: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid("c must be positive"));
    }
    decoration.validate()?;
    let mut breaks: Vec<f64> = decoration.known_offsets().iter().map(|d| -d).collect();
    breaks.push(decoration.support_radius());
    let quad = QuadratureSpec::with_tol(1e-12, 1e-12);
    let q = integrate_pieces(
        |x: f64| c * (-c * x).exp() * decoration.mean_count_within(x),
        0.0,
        f64::INFINITY,
        &breaks,
        &quad,
    );
    Ok(q.value)
}

/// Normalized counts `#(points in (-y, ∞)) / (e^{cy}/c)` at each level; PASS
/// when the mean at the largest level is within 5% of [`lln_constant`] and the
/// spread there is smaller than at the smallest level.
pub fn lln_check(params: &LlnParams, seed: &SeedPath) -> Result<VerificationReport> {
    let LlnParams {
        c,
        decoration,
        ys,
        n_reps,
    } = params;
    let c = *c;
    if ys.is_empty() || !ys.windows(2).all(|w| w[0] < w[1]) || ys.iter().any(|y| !y.is_finite()) {
        return Err(invalid("levels must be finite and ascending"));
    }
    if *n_reps < 2 {
        return Err(Error::TooFewSamples {
            got: *n_reps,
            min: 2,
        });
    }
    let y_max = ys[ys.len() - 1];
    let expected = (c * y_max).exp() / c;
    if !(expected <= LLN_BUDGET) {
        return Err(Error::BudgetExceeded(format!(
            "e^(c y)/c = {expected:.3e} atoms per draw exceeds {LLN_BUDGET:.0e}"
        )));
    }
    let constant = lln_constant(decoration, c)?;
    let closed = decoration.exp_moment(c);
    let sampler = Dppp::new(c, decoration.clone(), -y_max)?;
    let ratios: Vec<Vec<f64>> = (0..*n_reps as u64)
        .into_par_iter()
        .map(|i| {
            let s = sampler.sample(&seed.child(i));
            let pts = s.config.points();
            ys.iter()
                .map(|&y| {
                    let n = pts.len() - pts.partition_point(|&x| x <= -y);
                    n as f64 * c * (-c * y).exp()
                })
                .collect()
        })
        .collect();
    let mut report = VerificationReport::new("lln", seed);
    report.n_samples = *n_reps as u64;
    report.stat("constant_quadrature", constant);
    report.stat("constant_exp_moment", closed);
    let mut spreads = Vec::with_capacity(ys.len());
    for (k, &y) in ys.iter().enumerate() {
        let col: Vec<f64> = ratios.iter().map(|r| r[k]).collect();
        let (mean, se) = mean_and_se(&col);
        let sd = sample_sd(&col);
        report.stat(format!("mean[{y}]"), mean);
        report.stat(format!("se[{y}]"), se);
        report.stat(format!("spread[{y}]"), sd);
        report
            .rows
            .push(json!({ "y": y, "mean": mean, "se": se, "spread": sd }));
        spreads.push((mean, sd));
    }
    for k in 1..ys.len() {
        let t = ys[k] - ys[k - 1];
        let growth: Vec<f64> = ratios
            .iter()
            .filter(|r| r[k - 1] > 0.0)
            .map(|r| r[k] / r[k - 1])
            .collect();
        if !growth.is_empty() {
            report.stat(
                format!("count_growth[{}->{}]", ys[k - 1], ys[k]),
                growth.iter().sum::<f64>() / growth.len() as f64 * (c * t).exp(),
            );
        }
    }
    let (mean_top, sd_top) = spreads[spreads.len() - 1];
    report.at_most(
        "relative_error",
        (mean_top / constant - 1.0).abs(),
        LLN_REL_TOL,
    );
    if ys.len() > 1 {
        report.at_most("spread_ratio", sd_top / spreads[0].1, 1.0);
    }
    Ok(report.with_params(json!({ "c": c, "decoration": decoration, "ys": ys, "n_reps": n_reps })))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpStabilityParams {
    pub c: f64,
    /// Shift pairs with `e^{ca} + e^{cb} = 1`.
    pub pairs: Vec<(f64, f64)>,
    pub fs: Vec<TestFunction>,
    pub grid: Vec<f64>,
    pub n_reps: usize,
    /// Lowest faithful point of every compared configuration.
    pub observe_low: f64,
}

/// Checks `ξ = θ_a ξ' + θ_b ξ''` in law for independent copies. The factory
/// returns a sampler faithful on `(w, ∞)`; the copy shifted by `a` is observed
/// from `W - a`, so both sides are faithful on `(W, ∞)`.
pub fn exp_stability_check<F>(
    factory: F,
    params: &ExpStabilityParams,
    seed: &SeedPath,
) -> Result<VerificationReport>
where
    F: Fn(f64) -> Result<Box<dyn Sampler>>,
{
    let ExpStabilityParams {
        c,
        pairs,
        fs,
        grid,
        n_reps,
        observe_low,
    } = params;
    let (c, w) = (*c, *observe_low);
    if pairs.is_empty() {
        return Err(invalid("no shift pairs"));
    }
    for &(a, b) in pairs {
        let norm = (c * a).exp() + (c * b).exp();
        if !((norm - 1.0).abs() <= PAIR_TOL) {
            return Err(invalid(format!(
                "pair ({a}, {b}) gives e^(ca) + e^(cb) = {norm}"
            )));
        }
    }
    let mut all = fs.clone();
    all.push(TestFunction::MaxFunctional);
    let single = factory(w)?;
    let base_seed = seed.child(0);
    let base_curves = estimate_curves(single.as_ref(), &all, grid, *n_reps, &base_seed)?;
    let base_max = maxima(single.as_ref(), *n_reps, w, &base_seed);
    let mut report = VerificationReport::new("exp-stability", seed);
    report.n_samples = *n_reps as u64;
    for (p, &(a, b)) in pairs.iter().enumerate() {
        let left = factory(w - a)?;
        let right = factory(w - b)?;
        let composite = move |s: &SeedPath| -> ProcessSample {
            let x = left.sample(&s.child(1)).config.shift(a);
            let y = right.sample(&s.child(2)).config.shift(b);
            ProcessSample::from(x.superpose(&y))
        };
        let pair_seed = seed.child(1 + p as u64);
        let curves = estimate_curves(&composite, &all, grid, *n_reps, &pair_seed)?;
        let m = maxima(&composite, *n_reps, w, &pair_seed);
        let ks = ks_two_sample(&base_max, &m)?;
        let label = format!("({a:.6},{b:.6})");
        report.at_most(
            format!("max_ks{label}"),
            ks.statistic,
            ks_two_sample_threshold(base_max.len(), m.len()),
        );
        for (base, other) in base_curves.iter().zip(&curves) {
            let (sup, tol) = curve_gap(base, other);
            report.at_most(format!("curve{label}[{}]", base.f_descriptor), sup, tol);
        }
    }
    Ok(report.with_params(json!({
        "c": c, "pairs": pairs, "fs": fs, "grid_points": grid.len(), "n_reps": n_reps, "observe_low": w
    })))
}

/// Maxima, censored at the faithful level `w`.
fn maxima<S: Sampler + ?Sized>(sampler: &S, n: usize, w: f64, seed: &SeedPath) -> Vec<f64> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| sampler.sample(&seed.child(i)).config.maximum().max(w))
        .collect()
}

/// `sup |a - b|` on the effective points of `a`, and `4 · max se + 1e-6`.
fn curve_gap(a: &LaplaceCurve, b: &LaplaceCurve) -> (f64, f64) {
    let (mut sup, mut se) = (0.0f64, 0.0f64);
    for k in 0..a.len() {
        if (BAND.0..=BAND.1).contains(&a.values[k]) {
            sup = sup.max((a.values[k] - b.values[k]).abs());
            se = se.max((a.ses[k].powi(2) + b.ses[k].powi(2)).sqrt());
        }
    }
    (sup, 4.0 * se + 1e-6)
}
