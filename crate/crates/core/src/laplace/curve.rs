//! Monte Carlo estimation of `L[f|y] = E exp(-Σ f(x_i - y))` on a grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::point::Configuration;
use crate::samplers::{ProcessSample, Sampler};
use crate::seed::SeedPath;
use crate::test_function::TestFunction;

/// Minimum replicate count for a curve estimate.
pub const MIN_REPS: usize = 100;

/// Number of replicate batches kept for resampling.
pub const BATCHES: usize = 100;

/// Per-batch sums of the replicate values at each grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub n: usize,
    pub sums: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplaceCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub ses: Vec<f64>,
    pub n_reps: usize,
    pub f_descriptor: String,
    #[serde(skip)]
    pub batches: Vec<Batch>,
}

impl LaplaceCurve {
    pub fn new(
        grid: Vec<f64>,
        values: Vec<f64>,
        ses: Vec<f64>,
        n_reps: usize,
        f_descriptor: impl Into<String>,
    ) -> Result<Self> {
        let c = LaplaceCurve {
            grid,
            values,
            ses,
            n_reps,
            f_descriptor: f_descriptor.into(),
            batches: Vec::new(),
        };
        c.validate()?;
        Ok(c)
    }

    /// An exact curve with zero standard errors.
    pub fn from_fn<F: Fn(f64) -> f64>(
        grid: &[f64],
        f: F,
        f_descriptor: impl Into<String>,
    ) -> Result<Self> {
        let values = grid.iter().map(|&y| f(y)).collect();
        LaplaceCurve::new(
            grid.to_vec(),
            values,
            vec![0.0; grid.len()],
            0,
            f_descriptor,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(invalid("empty grid"));
        }
        if self.values.len() != self.grid.len() || self.ses.len() != self.grid.len() {
            return Err(invalid("grid, values and ses differ in length"));
        }
        if !self.grid.windows(2).all(|w| w[0] < w[1]) || self.grid.iter().any(|y| !y.is_finite()) {
            return Err(invalid("grid must be finite and strictly ascending"));
        }
        if self.values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(invalid("curve values must lie in [0, 1]"));
        }
        if self.ses.iter().any(|s| !(*s >= 0.0)) {
            return Err(invalid("standard errors must be nonnegative"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Linear interpolation of value and standard error; `None` off the grid.
    pub fn interpolate(&self, y: f64) -> Option<(f64, f64)> {
        let g = &self.grid;
        if !(y >= g[0] && y <= g[g.len() - 1]) {
            return None;
        }
        let k = g.partition_point(|&x| x <= y);
        if k == g.len() {
            return Some((self.values[k - 1], self.ses[k - 1]));
        }
        let (x0, x1) = (g[k - 1], g[k]);
        let w = (y - x0) / (x1 - x0);
        Some((
            self.values[k - 1] * (1.0 - w) + self.values[k] * w,
            self.ses[k - 1] * (1.0 - w) + self.ses[k] * w,
        ))
    }

    /// Values recomputed from a multiset of batch indices.
    pub(crate) fn resampled_values(&self, idx: &[usize]) -> Vec<f64> {
        let mut sums = vec![0.0; self.grid.len()];
        let mut n = 0usize;
        for &b in idx {
            let batch = &self.batches[b];
            n += batch.n;
            for (s, v) in sums.iter_mut().zip(&batch.sums) {
                *s += v;
            }
        }
        sums.into_iter().map(|s| s / n as f64).collect()
    }

    /// Nondecreasing projection (weighted by inverse variance).
    pub fn isotonic(&self) -> LaplaceCurve {
        let w: Vec<f64> = self.ses.iter().map(|s| 1.0 / (s * s + 1e-12)).collect();
        LaplaceCurve {
            values: pava(&self.values, &w),
            batches: Vec::new(),
            ..self.clone()
        }
    }

    /// `max |value - isotonic(value)|`.
    pub fn monotonicity_violation(&self) -> f64 {
        let iso = self.isotonic();
        self.values
            .iter()
            .zip(&iso.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_se(&self) -> f64 {
        self.ses.iter().copied().fold(0.0, f64::max)
    }

    /// The same curve with the grid translated by `x`, i.e. `y ↦ self(y - x)`.
    pub fn translated(&self, x: f64) -> LaplaceCurve {
        LaplaceCurve {
            grid: self.grid.iter().map(|y| y + x).collect(),
            ..self.clone()
        }
    }
}

/// Pool-adjacent-violators: weighted least-squares nondecreasing fit.
pub fn pava(values: &[f64], weights: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() > 1 {
            let n = blocks.len();
            let (v2, w2, c2) = blocks[n - 1];
            let (v1, w1, c1) = blocks[n - 2];
            if v1 <= v2 {
                break;
            }
            let w = w1 + w2;
            blocks.truncate(n - 2);
            blocks.push(((v1 * w1 + v2 * w2) / w, w, c1 + c2));
        }
    }
    blocks
        .into_iter()
        .flat_map(|(v, _, c)| std::iter::repeat_n(v, c))
        .collect()
}

/// `Σ e^{β x_i}` over a sorted configuration, as a log.
pub(crate) fn log_exp_sum(points: &[f64], beta: f64, extra: f64) -> f64 {
    let Some(&top) = points.last() else {
        return extra.ln();
    };
    // Terms more than e^{-40} below the largest are dropped.
    let cut = top - 40.0 / beta;
    let start = points.partition_point(|&x| x < cut);
    let rel: f64 = points[start..]
        .iter()
        .map(|&x| (beta * (x - top)).exp())
        .sum();
    beta * top + (rel + extra * (-beta * top).exp()).ln()
}

/// Replicate count with per-grid sums and sums of squares.
type Partial = (usize, Vec<f64>, Vec<f64>);

enum Evaluator<'a> {
    Max,
    /// `e^{β x}` on the whole line.
    Exponential(f64),
    General(&'a TestFunction),
}

impl<'a> Evaluator<'a> {
    fn new(f: &'a TestFunction) -> Self {
        match f {
            TestFunction::MaxFunctional => Evaluator::Max,
            TestFunction::Exponential { beta, cutoff_low } if *cutoff_low == f64::NEG_INFINITY => {
                Evaluator::Exponential(*beta)
            }
            _ => Evaluator::General(f),
        }
    }

    fn accumulate(
        &self,
        f: &TestFunction,
        sample: &ProcessSample,
        grid: &[f64],
        sums: &mut [f64],
        squares: &mut [f64],
    ) -> Result<()> {
        let cfg: &Configuration<f64> = &sample.config;
        let mut put = |k: usize, v: f64| {
            sums[k] += v;
            squares[k] += v * v;
        };
        match self {
            Evaluator::Max => {
                check_faithful(cfg, grid[0] + f.support_low())?;
                let m = cfg.maximum();
                for (k, &y) in grid.iter().enumerate() {
                    put(k, if m > y { 0.0 } else { 1.0 });
                }
            }
            Evaluator::Exponential(beta) => {
                let extra = match (&sample.atom_tail, cfg.window_low() == f64::NEG_INFINITY) {
                    (_, true) => 0.0,
                    (Some(tail), false) => tail.exp_sum_mean(*beta)?,
                    (None, false) => {
                        return Err(Error::Faithfulness {
                            required: f64::NEG_INFINITY,
                            window: cfg.window_low(),
                        })
                    }
                };
                if cfg.is_empty() && extra == 0.0 {
                    for k in 0..grid.len() {
                        put(k, 1.0);
                    }
                } else {
                    let log_total = log_exp_sum(cfg.points(), *beta, extra);
                    for (k, &y) in grid.iter().enumerate() {
                        put(k, (-(log_total - beta * y).exp()).exp());
                    }
                }
            }
            Evaluator::General(f) => {
                check_faithful(cfg, grid[0] + f.support_low())?;
                for (k, &y) in grid.iter().enumerate() {
                    put(k, (-cfg.integral_at(f, y)).exp());
                }
            }
        }
        Ok(())
    }
}

fn check_faithful(cfg: &Configuration<f64>, required: f64) -> Result<()> {
    if cfg.window_low() > required {
        Err(Error::Faithfulness {
            required,
            window: cfg.window_low(),
        })
    } else {
        Ok(())
    }
}

/// Curves for every `f` from one set of replicates (common random numbers).
/// Replicate `i` uses `seed.child(i)`, so the result does not depend on the
/// number of worker threads.
pub fn estimate_curves<S: Sampler + ?Sized>(
    sampler: &S,
    fs: &[TestFunction],
    grid: &[f64],
    n_reps: usize,
    seed: &SeedPath,
) -> Result<Vec<LaplaceCurve>> {
    if n_reps < MIN_REPS {
        return Err(Error::TooFewSamples {
            got: n_reps,
            min: MIN_REPS,
        });
    }
    if fs.is_empty() {
        return Ok(Vec::new());
    }
    for f in fs {
        f.validate()?;
    }
    LaplaceCurve::new(
        grid.to_vec(),
        vec![0.5; grid.len()],
        vec![0.0; grid.len()],
        0,
        "",
    )?;
    let evals: Vec<Evaluator> = fs.iter().map(Evaluator::new).collect();
    let nb = BATCHES.min(n_reps);
    let g = grid.len();
    let batches: Vec<Result<Partial>> = (0..nb)
        .into_par_iter()
        .map(|b| {
            let lo = b * n_reps / nb;
            let hi = (b + 1) * n_reps / nb;
            let mut sums = vec![0.0; fs.len() * g];
            let mut squares = vec![0.0; fs.len() * g];
            for i in lo..hi {
                let sample = sampler.sample(&seed.child(i as u64));
                for (j, (e, f)) in evals.iter().zip(fs).enumerate() {
                    e.accumulate(
                        f,
                        &sample,
                        grid,
                        &mut sums[j * g..(j + 1) * g],
                        &mut squares[j * g..(j + 1) * g],
                    )?;
                }
            }
            Ok((hi - lo, sums, squares))
        })
        .collect();
    let batches: Vec<(usize, Vec<f64>, Vec<f64>)> = batches.into_iter().collect::<Result<_>>()?;
    let n = n_reps as f64;
    let curves = fs
        .iter()
        .enumerate()
        .map(|(j, f)| {
            let mut total = vec![0.0; g];
            let mut total_sq = vec![0.0; g];
            let mut kept = Vec::with_capacity(nb);
            for (count, sums, squares) in &batches {
                let s = &sums[j * g..(j + 1) * g];
                for k in 0..g {
                    total[k] += s[k];
                    total_sq[k] += squares[j * g + k];
                }
                kept.push(Batch {
                    n: *count,
                    sums: s.to_vec(),
                });
            }
            let values: Vec<f64> = total.iter().map(|s| (s / n).clamp(0.0, 1.0)).collect();
            let ses = values
                .iter()
                .zip(&total_sq)
                .map(|(m, sq)| ((sq / n - m * m).max(0.0) / (n - 1.0)).sqrt())
                .collect();
            LaplaceCurve {
                grid: grid.to_vec(),
                values,
                ses,
                n_reps,
                f_descriptor: f.descriptor(),
                batches: kept,
            }
        })
        .collect();
    Ok(curves)
}

pub fn estimate_curve<S: Sampler + ?Sized>(
    sampler: &S,
    f: &TestFunction,
    grid: &[f64],
    n_reps: usize,
    seed: &SeedPath,
) -> Result<LaplaceCurve> {
    Ok(estimate_curves(sampler, std::slice::from_ref(f), grid, n_reps, seed)?.remove(0))
}

/// `n` equally spaced points from `lo` to `hi`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::gumbel_cdf;
    use crate::point::Interval;
    use crate::samplers::Dppp;

    #[test]
    fn pava_examples() {
        assert_eq!(
            pava(&[1.0, 3.0, 2.0, 4.0], &[1.0; 4]),
            vec![1.0, 2.5, 2.5, 4.0]
        );
        assert_eq!(pava(&[3.0, 2.0, 1.0], &[1.0; 3]), vec![2.0, 2.0, 2.0]);
        assert_eq!(pava(&[0.0, 1.0], &[1.0; 2]), vec![0.0, 1.0]);
    }

    #[test]
    fn max_functional_is_gumbel() {
        let grid = linear_grid(-2.0, 4.0, 25);
        let s = Dppp::ppp(1.0, -2.0).unwrap();
        let c = estimate_curve(
            &s,
            &TestFunction::MaxFunctional,
            &grid,
            20_000,
            &SeedPath::new(8),
        )
        .unwrap();
        for ((&y, v), se) in grid.iter().zip(&c.values).zip(&c.ses) {
            let want = gumbel_cdf(y, 1.0);
            assert!((v - want).abs() <= 4.0 * se + 1e-12, "y = {y}");
        }
        assert!(c.monotonicity_violation() == 0.0);
    }

    #[test]
    fn empty_sampler_and_tiny_level() {
        let grid = linear_grid(-1.0, 1.0, 5);
        let empty = |_: &SeedPath| ProcessSample::from(Configuration::empty(f64::NEG_INFINITY));
        let f = TestFunction::bump(0.0, 1.0, 2.0);
        let c = estimate_curve(&empty, &f, &grid, 100, &SeedPath::new(1)).unwrap();
        assert!(c.values.iter().all(|&v| v == 1.0));
        let s = Dppp::ppp(1.0, -1.0).unwrap();
        let tiny = TestFunction::indicator(Interval::open(0.0, 1.0), 1e-6);
        let c = estimate_curve(&s, &tiny, &grid, 200, &SeedPath::new(1)).unwrap();
        assert!(c.values.iter().all(|&v| v > 1.0 - 1e-4));
    }

    #[test]
    fn faithfulness_enforced() {
        let grid = linear_grid(-3.0, 1.0, 5);
        let s = Dppp::ppp(1.0, 0.0).unwrap();
        let r = estimate_curve(
            &s,
            &TestFunction::MaxFunctional,
            &grid,
            100,
            &SeedPath::new(1),
        );
        assert!(matches!(r, Err(Error::Faithfulness { .. })));
        let bare = |seed: &SeedPath| {
            ProcessSample::from(crate::samplers::sample_ppp_exp(1.0, -5.0, seed).unwrap())
        };
        let r = estimate_curve(
            &bare,
            &TestFunction::exponential(2.0),
            &grid,
            100,
            &SeedPath::new(1),
        );
        assert!(matches!(r, Err(Error::Faithfulness { .. })));
    }

    #[test]
    fn worker_count_does_not_matter() {
        let grid = linear_grid(-1.0, 2.0, 7);
        let s = Dppp::ppp(1.0, -1.0).unwrap();
        let f = [TestFunction::bump(0.5, 0.5, 1.0)];
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = one.install(|| estimate_curves(&s, &f, &grid, 500, &SeedPath::new(2)).unwrap());
        let b = four.install(|| estimate_curves(&s, &f, &grid, 500, &SeedPath::new(2)).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn log_exp_sum_matches_direct() {
        let pts = [-3.0, -1.0, 0.5];
        let direct: f64 = pts.iter().map(|x: &f64| (2.0 * x).exp()).sum::<f64>() + 0.1;
        assert!((log_exp_sum(&pts, 2.0, 0.1) - direct.ln()).abs() < 1e-12);
        assert!((log_exp_sum(&[], 2.0, 0.1) - 0.1f64.ln()).abs() < 1e-15);
    }
}
