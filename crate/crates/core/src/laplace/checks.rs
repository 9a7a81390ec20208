//! Curve-level verdicts: shared translation profile and freezing of `e^{βx}`.

use serde::Serialize;
use serde_json::json;

use crate::error::{invalid, Error, Result};
use crate::laplace::curve::{estimate_curves, LaplaceCurve};
use crate::laplace::fit::{fit_gumbel, fit_translation, ShiftEstimate};
use crate::samplers::Sampler;
use crate::seed::SeedPath;
use crate::stats::VerificationReport;
use crate::test_function::TestFunction;

/// Curve that every `L[f|·]` is compared against.
#[derive(Clone, Debug)]
pub enum SupportReference {
    /// `y ↦ P(max ≤ y)` estimated from the same replicates.
    Max,
    Curve(LaplaceCurve),
    /// `y ↦ exp(-e^{-c y})`.
    Gumbel {
        c: f64,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct FitRow {
    pub f: String,
    #[serde(flatten)]
    pub estimate: Option<ShiftEstimate>,
    pub error: Option<String>,
}

fn fit_against(
    reference: &SupportReference,
    max_curve: Option<&LaplaceCurve>,
    b: &LaplaceCurve,
) -> Result<ShiftEstimate> {
    match reference {
        SupportReference::Max => fit_translation(max_curve.expect("max curve"), b),
        SupportReference::Curve(a) => fit_translation(a, b),
        SupportReference::Gumbel { c } => fit_gumbel(*c, b),
    }
}

fn record(
    report: &mut VerificationReport,
    label: &str,
    f: &str,
    fit: Result<ShiftEstimate>,
) -> Result<FitRow> {
    match fit {
        Ok(e) => {
            report.at_most(format!("{label}[{f}]"), e.residual_sup, e.tol);
            report.stat(format!("tau[{f}]"), e.tau);
            report.stat(format!("tau_se[{f}]"), e.se);
            Ok(FitRow {
                f: f.to_string(),
                estimate: Some(e),
                error: None,
            })
        }
        Err(Error::NoOverlap) => {
            report.holds(format!("{label}[{f}]"), false);
            report.note(format!("{f}: curve does not overlap the reference"));
            Ok(FitRow {
                f: f.to_string(),
                estimate: None,
                error: Some(Error::NoOverlap.to_string()),
            })
        }
        Err(e) => Err(e),
    }
}

/// Checks that every `L[f|·]` is a translate of the reference curve, within
/// `4 · max_se + 1e-6` in sup norm over the effective points.
pub fn check_unique_support<S: Sampler + ?Sized>(
    sampler: &S,
    fs: &[TestFunction],
    reference: &SupportReference,
    grid: &[f64],
    n_reps: usize,
    seed: &SeedPath,
) -> Result<VerificationReport> {
    if fs.is_empty() {
        return Err(invalid("no test functions"));
    }
    if let Some(f) = fs.iter().find(|f| !f.is_compactly_supported()) {
        return Err(invalid(format!(
            "{} is not compactly supported",
            f.descriptor()
        )));
    }
    let mut all = fs.to_vec();
    if matches!(reference, SupportReference::Max) {
        all.push(TestFunction::MaxFunctional);
    }
    let mut curves = estimate_curves(sampler, &all, grid, n_reps, seed)?;
    let max_curve =
        matches!(reference, SupportReference::Max).then(|| curves.pop().expect("max curve"));
    let mut report = VerificationReport::new("unique-support", seed);
    report.n_samples = n_reps as u64;
    for curve in &curves {
        let fit = fit_against(reference, max_curve.as_ref(), curve);
        let row = record(&mut report, "residual", &curve.f_descriptor, fit)?;
        report.rows.push(serde_json::to_value(row).expect("row"));
    }
    let label = match reference {
        SupportReference::Max => "max".to_string(),
        SupportReference::Curve(c) => c.f_descriptor.clone(),
        SupportReference::Gumbel { c } => format!("gumbel({c})"),
    };
    Ok(report
        .with_params(json!({ "reference": label, "grid_points": grid.len(), "n_reps": n_reps })))
}

/// Lowest grid point `y_min` for which truncating a configuration at the
/// returned level perturbs `exp(-e^{-βy} Σ e^{βx})` by at most `tol` for
/// every `β`, given atom intensity `e^{-cx}` and at most `max_count` points per
/// cluster.
pub fn freezing_window(
    c: f64,
    betas: &[f64],
    y_min: f64,
    max_count: usize,
    tol: f64,
) -> Result<f64> {
    if betas.is_empty() || betas.iter().any(|&b| !(b > c)) {
        return Err(invalid("every beta must exceed c"));
    }
    let k = (max_count.max(1) as f64).powi(2);
    Ok(betas
        .iter()
        .map(|&b| ((2.0 * tol * (2.0 * b - c) / k).ln() + 2.0 * b * y_min) / (2.0 * b - c))
        .fold(f64::INFINITY, f64::min))
}

/// Checks that `y ↦ E exp(-e^{-βy} Σ e^{β x_i})` is a translate of the
/// maximum's law for each `β > c`.
pub fn check_freezing<S: Sampler + ?Sized>(
    sampler: &S,
    c: f64,
    betas: &[f64],
    grid: &[f64],
    n_reps: usize,
    seed: &SeedPath,
) -> Result<VerificationReport> {
    if betas.is_empty() || betas.iter().any(|&b| !(b > c && b.is_finite())) {
        return Err(invalid("every beta must be finite and exceed c"));
    }
    let mut fs = vec![TestFunction::MaxFunctional];
    fs.extend(betas.iter().map(|&b| TestFunction::exponential(b)));
    let curves = estimate_curves(sampler, &fs, grid, n_reps, seed)?;
    let max_curve = &curves[0];
    if max_curve.values.iter().all(|&v| v == 1.0) {
        return Err(Error::DegenerateInput(
            "maximum never observed on the grid".into(),
        ));
    }
    let mut report = VerificationReport::new("freezing", seed);
    report.n_samples = n_reps as u64;
    for (beta, curve) in betas.iter().zip(&curves[1..]) {
        let row = record(
            &mut report,
            "residual",
            &curve.f_descriptor,
            fit_translation(max_curve, curve),
        )?;
        let mut value = serde_json::to_value(row).expect("row");
        if let Ok(g) = fit_gumbel(c, curve) {
            report.stat(format!("tau_gumbel[{beta}]"), g.tau);
            report.stat(format!("tau_gumbel_se[{beta}]"), g.se);
            value["tau_gumbel"] = json!(g.tau);
            value["tau_gumbel_se"] = json!(g.se);
        }
        value["beta"] = json!(beta);
        report.rows.push(value);
    }
    Ok(report.with_params(
        json!({ "c": c, "betas": betas, "grid_points": grid.len(), "n_reps": n_reps }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplace::curve::linear_grid;
    use crate::point::{Configuration, Interval};
    use crate::samplers::{Dppp, ProcessSample};

    #[test]
    fn ppp_supports_are_shared() {
        let grid = linear_grid(-2.0, 4.0, 61);
        let s = Dppp::ppp(1.0, -4.0).unwrap();
        let fs = [
            TestFunction::bump(0.5, 0.5, 1.0),
            TestFunction::indicator(Interval::open(0.0, 1.0), 2.0),
        ];
        let r = check_unique_support(
            &s,
            &fs,
            &SupportReference::Max,
            &grid,
            4000,
            &SeedPath::new(5),
        )
        .unwrap();
        assert!(r.pass, "{:?}", r.failed_criteria());
    }

    #[test]
    fn deterministic_configuration_fails() {
        let grid = linear_grid(-2.0, 2.0, 81);
        let single = |_: &SeedPath| {
            ProcessSample::from(Configuration::new(vec![0.0], f64::NEG_INFINITY).unwrap())
        };
        let bump = TestFunction::bump(0.0, 1.0, 2.0);
        let two = TestFunction::sum(vec![
            TestFunction::bump(-0.5, 0.3, 2.0),
            TestFunction::bump(0.5, 0.3, 2.0),
        ]);
        let reference = estimate_curves(&single, &[bump], &grid, 100, &SeedPath::new(1))
            .unwrap()
            .remove(0);
        let r = check_unique_support(
            &single,
            &[two],
            &SupportReference::Curve(reference),
            &grid,
            100,
            &SeedPath::new(1),
        )
        .unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn non_compact_rejected() {
        let s = Dppp::ppp(1.0, -4.0).unwrap();
        let r = check_unique_support(
            &s,
            &[TestFunction::exponential(2.0)],
            &SupportReference::Max,
            &[0.0, 1.0],
            100,
            &SeedPath::new(1),
        );
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn window_is_below_grid() {
        let w = freezing_window(1.0, &[1.5, 2.0], -2.0, 1, 1e-6).unwrap();
        assert!(w < -2.0);
        assert!(freezing_window(1.0, &[1.0], 0.0, 1, 1e-6).is_err());
    }

    #[test]
    fn empty_process_is_degenerate() {
        let empty = |_: &SeedPath| ProcessSample::from(Configuration::empty(f64::NEG_INFINITY));
        let r = check_freezing(&empty, 1.0, &[2.0], &[0.0, 1.0], 100, &SeedPath::new(1));
        assert!(matches!(r, Err(Error::DegenerateInput(_))));
    }
}
