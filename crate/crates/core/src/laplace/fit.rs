//! Translation fits between Laplace curves: `b(y) ≈ a(y - τ)`.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{gumbel_cdf, gumbel_quantile};
use crate::error::{invalid, Error, Result};
use crate::laplace::curve::LaplaceCurve;
use crate::seed::SeedPath;
use crate::stats::dependence::sample_sd;

/// Curve values inside this band carry information about the shift.
pub const BAND: (f64, f64) = (0.02, 0.98);

/// Fraction of effective points that must be covered by the reference.
pub const MIN_COVERAGE: f64 = 0.8;

pub const BOOTSTRAP_RESAMPLES: usize = 200;

const BOOTSTRAP_SEED: u64 = 0xB0_07_57_4A;
const WEIGHT_FLOOR: f64 = 1e-12;
const GOLDEN_ITERATIONS: usize = 60;

/// A curve `y ↦ a(y)` to translate onto observations.
pub trait Reference: Sync {
    /// Value and standard error, `None` where the reference is unknown.
    fn eval(&self, y: f64) -> Option<(f64, f64)>;
    /// Interval where the reference lies inside [`BAND`].
    fn effective_range(&self) -> Option<(f64, f64)>;
    /// Resolution of the reference, if it is tabulated.
    fn step(&self) -> Option<f64> {
        None
    }
}

impl Reference for LaplaceCurve {
    fn eval(&self, y: f64) -> Option<(f64, f64)> {
        self.interpolate(y)
    }

    fn effective_range(&self) -> Option<(f64, f64)> {
        band_range(&self.grid, &self.values)
    }

    fn step(&self) -> Option<f64> {
        min_spacing(&self.grid)
    }
}

/// `y ↦ exp(-e^{-c y})`.
#[derive(Clone, Copy, Debug)]
pub struct GumbelReference {
    pub c: f64,
}

impl Reference for GumbelReference {
    fn eval(&self, y: f64) -> Option<(f64, f64)> {
        Some((gumbel_cdf(y, self.c), 0.0))
    }

    fn effective_range(&self) -> Option<(f64, f64)> {
        Some((
            gumbel_quantile(BAND.0, self.c),
            gumbel_quantile(BAND.1, self.c),
        ))
    }
}

/// An exact reference given by a closure.
pub struct FnReference<F> {
    pub f: F,
    pub range: (f64, f64),
}

impl<F: Fn(f64) -> f64 + Sync> Reference for FnReference<F> {
    fn eval(&self, y: f64) -> Option<(f64, f64)> {
        Some(((self.f)(y), 0.0))
    }

    fn effective_range(&self) -> Option<(f64, f64)> {
        Some(self.range)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShiftEstimate {
    pub tau: f64,
    pub se: f64,
    /// `max |b(y) - a(y - τ)|` over the covered effective points.
    pub residual_sup: f64,
    /// Largest combined standard error over the same points.
    pub max_se: f64,
    /// `4 · max_se + 1e-6`.
    pub tol: f64,
    pub n_points: usize,
}

impl ShiftEstimate {
    pub fn within_tolerance(&self) -> bool {
        self.residual_sup <= self.tol
    }
}

fn band_range(grid: &[f64], values: &[f64]) -> Option<(f64, f64)> {
    let mut it = grid
        .iter()
        .zip(values)
        .filter(|(_, v)| (BAND.0..=BAND.1).contains(*v))
        .map(|(y, _)| *y);
    let first = it.next()?;
    let last = it.next_back().unwrap_or(first);
    Some((first, last))
}

fn min_spacing(grid: &[f64]) -> Option<f64> {
    grid.windows(2).map(|w| w[1] - w[0]).reduce(f64::min)
}

struct Target<'a> {
    grid: &'a [f64],
    values: &'a [f64],
    ses: &'a [f64],
    effective: Vec<usize>,
    need: usize,
}

impl<'a> Target<'a> {
    fn new(grid: &'a [f64], values: &'a [f64], ses: &'a [f64], effective: Vec<usize>) -> Self {
        let need = 3.max((MIN_COVERAGE * effective.len() as f64).ceil() as usize);
        Target {
            grid,
            values,
            ses,
            effective,
            need,
        }
    }

    /// Weighted mean squared residual, `None` when coverage is too low.
    fn objective(&self, reference: &dyn Reference, tau: f64) -> Option<f64> {
        let (mut num, mut den, mut n) = (0.0, 0.0, 0usize);
        for &j in &self.effective {
            if let Some((a, sa)) = reference.eval(self.grid[j] - tau) {
                let w = 1.0 / (self.ses[j].powi(2) + sa * sa + WEIGHT_FLOOR);
                num += w * (self.values[j] - a).powi(2);
                den += w;
                n += 1;
            }
        }
        (n >= self.need).then(|| num / den)
    }

    fn residuals(&self, reference: &dyn Reference, tau: f64) -> (f64, f64, usize) {
        let (mut sup, mut max_se, mut n) = (0.0f64, 0.0f64, 0usize);
        for &j in &self.effective {
            if let Some((a, sa)) = reference.eval(self.grid[j] - tau) {
                sup = sup.max((self.values[j] - a).abs());
                max_se = max_se.max((self.ses[j].powi(2) + sa * sa).sqrt());
                n += 1;
            }
        }
        (sup, max_se, n)
    }

    /// Grid scan over `[lo, hi]` at spacing `h`, then golden-section refinement.
    fn minimise(&self, reference: &dyn Reference, lo: f64, hi: f64, h: f64) -> Option<f64> {
        let n = ((hi - lo) / h).ceil() as usize;
        let mut best: Option<(f64, f64)> = None;
        for k in 0..=n {
            let t = lo + k as f64 * h;
            if let Some(v) = self.objective(reference, t) {
                if best.is_none_or(|(_, bv)| v < bv) {
                    best = Some((t, v));
                }
            }
        }
        let (t0, _) = best?;
        let obj = |t: f64| self.objective(reference, t).unwrap_or(f64::INFINITY);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (t0 - h, t0 + h);
        let mut x1 = b - g * (b - a);
        let mut x2 = a + g * (b - a);
        let (mut f1, mut f2) = (obj(x1), obj(x2));
        for _ in 0..GOLDEN_ITERATIONS {
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = obj(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = obj(x2);
            }
        }
        let t = 0.5 * (a + b);
        Some(if obj(t) <= obj(t0) { t } else { t0 })
    }
}

fn effective_points(b: &LaplaceCurve) -> Result<Vec<usize>> {
    let eff: Vec<usize> = (0..b.len())
        .filter(|&j| (BAND.0..=BAND.1).contains(&b.values[j]))
        .collect();
    if eff.len() < 3 {
        return Err(Error::NoOverlap);
    }
    Ok(eff)
}

struct Fit {
    tau: f64,
    h: f64,
}

fn fit_point(reference: &dyn Reference, b: &LaplaceCurve, eff: &[usize]) -> Result<Fit> {
    let (ra, rb) = reference.effective_range().ok_or(Error::NoOverlap)?;
    let (ya, yb) = (b.grid[eff[0]], b.grid[eff[eff.len() - 1]]);
    let step = match (min_spacing(&b.grid), reference.step()) {
        (Some(x), Some(y)) => x.min(y),
        (Some(x), None) => x,
        (None, Some(y)) => y,
        (None, None) => 0.01,
    };
    let h = 0.5 * step;
    let target = Target::new(&b.grid, &b.values, &b.ses, eff.to_vec());
    let (lo, hi) = (ya - rb - 1.0, yb - ra + 1.0);
    let tau = target
        .minimise(reference, lo, hi, h)
        .ok_or(Error::NoOverlap)?;
    Ok(Fit { tau, h })
}

fn finish(
    reference: &dyn Reference,
    b: &LaplaceCurve,
    eff: Vec<usize>,
    tau: f64,
    se: f64,
) -> ShiftEstimate {
    let target = Target::new(&b.grid, &b.values, &b.ses, eff);
    let (residual_sup, max_se, n_points) = target.residuals(reference, tau);
    ShiftEstimate {
        tau,
        se,
        residual_sup,
        max_se,
        tol: 4.0 * max_se + 1e-6,
        n_points,
    }
}

/// Replicate values of a curve: batch resampling when batches are kept,
/// otherwise independent Gaussian noise at the reported standard errors.
fn perturbed(curve: &LaplaceCurve, idx: Option<&[usize]>, rng: &mut crate::seed::Rng) -> Vec<f64> {
    if let (false, Some(idx)) = (curve.batches.is_empty(), idx) {
        return curve.resampled_values(idx);
    }
    curve
        .values
        .iter()
        .zip(&curve.ses)
        .map(|(v, s)| {
            let z: f64 = StandardNormal.sample(rng);
            (v + s * z).clamp(0.0, 1.0)
        })
        .collect()
}

fn is_random(curve: &LaplaceCurve) -> bool {
    !curve.batches.is_empty() || curve.ses.iter().any(|&s| s > 0.0)
}

fn bootstrap_se(
    b: &LaplaceCurve,
    a: Option<&LaplaceCurve>,
    analytic: Option<&dyn Reference>,
    eff: &[usize],
    fit: &Fit,
) -> f64 {
    if !is_random(b) && !a.is_some_and(is_random) {
        return 0.0;
    }
    let joint = a.is_some_and(|a| !a.batches.is_empty() && a.batches.len() == b.batches.len());
    let seed = SeedPath::new(BOOTSTRAP_SEED);
    let taus: Vec<Option<f64>> = (0..BOOTSTRAP_RESAMPLES as u64)
        .into_par_iter()
        .map(|r| {
            use rand::Rng as _;
            let mut rng = seed.child_rng(r);
            let draw = |n: usize, rng: &mut crate::seed::Rng| -> Vec<usize> {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            };
            let idx_b = (!b.batches.is_empty()).then(|| draw(b.batches.len(), &mut rng));
            let bv = perturbed(b, idx_b.as_deref(), &mut rng);
            let target = Target::new(&b.grid, &bv, &b.ses, eff.to_vec());
            let (lo, hi) = (fit.tau - 40.0 * fit.h, fit.tau + 40.0 * fit.h);
            match a {
                Some(a) => {
                    let idx_a = if joint {
                        idx_b.clone()
                    } else {
                        (!a.batches.is_empty()).then(|| draw(a.batches.len(), &mut rng))
                    };
                    let av = LaplaceCurve {
                        values: perturbed(a, idx_a.as_deref(), &mut rng),
                        batches: Vec::new(),
                        ..a.clone()
                    };
                    target.minimise(&av, lo, hi, fit.h)
                }
                None => target.minimise(analytic.expect("reference"), lo, hi, fit.h),
            }
        })
        .collect();
    let ok: Vec<f64> = taus.into_iter().flatten().collect();
    if ok.len() * 2 < BOOTSTRAP_RESAMPLES {
        return f64::NAN;
    }
    sample_sd(&ok)
}

/// `τ` with `b(y) ≈ a(y - τ)`. Both curves must carry standard errors; the
/// standard error of `τ` comes from a bootstrap over replicate batches.
pub fn fit_translation(a: &LaplaceCurve, b: &LaplaceCurve) -> Result<ShiftEstimate> {
    a.validate()?;
    b.validate()?;
    let eff = effective_points(b)?;
    a.effective_range().ok_or(Error::NoOverlap)?;
    let fit = fit_point(a, b, &eff)?;
    let se = bootstrap_se(b, Some(a), None, &eff, &fit);
    Ok(finish(a, b, eff, fit.tau, se))
}

/// `τ` with `b(y) ≈ reference(y - τ)` for an exactly known reference.
pub fn fit_to_reference(reference: &dyn Reference, b: &LaplaceCurve) -> Result<ShiftEstimate> {
    b.validate()?;
    let eff = effective_points(b)?;
    let fit = fit_point(reference, b, &eff)?;
    let se = bootstrap_se(b, None, Some(reference), &eff, &fit);
    Ok(finish(reference, b, eff, fit.tau, se))
}

/// Fit against `y ↦ exp(-e^{-c y})`.
pub fn fit_gumbel(c: f64, b: &LaplaceCurve) -> Result<ShiftEstimate> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid("Gumbel rate must be positive"));
    }
    fit_to_reference(&GumbelReference { c }, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplace::curve::linear_grid;
    use proptest::prelude::*;

    fn gumbel_curve(grid: &[f64], c: f64, shift: f64) -> LaplaceCurve {
        LaplaceCurve::from_fn(grid, |y| gumbel_cdf(y - shift, c), "g").unwrap()
    }

    proptest! {
        #[test]
        fn recovers_exact_shift(shift in -1.5f64..1.5, c in 0.5f64..3.0) {
            let grid = linear_grid(-6.0, 8.0, 281);
            let a = gumbel_curve(&grid, c, 0.0);
            let b = gumbel_curve(&grid, c, shift);
            let e = fit_translation(&a, &b).unwrap();
            prop_assert!((e.tau - shift).abs() < 2e-3, "{} vs {}", e.tau, shift);
            prop_assert_eq!(e.se, 0.0);
            let g = fit_gumbel(c, &b).unwrap();
            prop_assert!((g.tau - shift).abs() < 1e-6);
            prop_assert!(g.within_tolerance());
        }
    }

    #[test]
    fn shape_mismatch_is_detected() {
        let grid = linear_grid(-4.0, 6.0, 201);
        let a = gumbel_curve(&grid, 1.0, 0.0);
        let b = gumbel_curve(&grid, 2.0, 0.0);
        let e = fit_translation(&a, &b).unwrap();
        assert!(!e.within_tolerance());
        assert!(e.residual_sup > 0.01);
    }

    #[test]
    fn flat_curve_has_no_overlap() {
        let grid = linear_grid(0.0, 1.0, 11);
        let a = gumbel_curve(&grid, 1.0, 0.0);
        let flat = LaplaceCurve::from_fn(&grid, |_| 1.0, "one").unwrap();
        assert!(matches!(fit_translation(&a, &flat), Err(Error::NoOverlap)));
    }

    #[test]
    fn disjoint_grids_have_no_overlap() {
        let b = gumbel_curve(&linear_grid(-4.0, 6.0, 101), 1.0, 0.0);
        let narrow = gumbel_curve(&linear_grid(5.0, 6.0, 11), 1.0, 0.0);
        assert!(matches!(
            fit_translation(&narrow, &b),
            Err(Error::NoOverlap)
        ));
    }

    #[test]
    fn parametric_bootstrap_scales_with_noise() {
        let grid = linear_grid(-4.0, 6.0, 101);
        let mut b = gumbel_curve(&grid, 1.0, 0.3);
        b.ses = vec![0.01; grid.len()];
        let e = fit_gumbel(1.0, &b).unwrap();
        assert!(e.se > 0.0 && e.se < 0.02, "{e:?}");
    }
}
