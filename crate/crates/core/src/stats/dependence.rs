//! Correlation measures and simple estimators.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::seed::SeedPath;

pub fn mean_and_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    if x.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn sample_sd(x: &[f64]) -> f64 {
    let (_, se) = mean_and_se(x);
    se * (x.len() as f64).sqrt()
}

/// Pearson correlation; 0 when either sample is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(invalid("samples differ in length"));
    }
    if x.len() < 2 {
        return Err(Error::TooFewSamples {
            got: x.len(),
            min: 2,
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(0.0);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

fn row_means(x: &[f64]) -> (Vec<f64>, f64) {
    let n = x.len() as f64;
    let rows: Vec<f64> = x
        .iter()
        .map(|&a| x.iter().map(|&b| (a - b).abs()).sum::<f64>() / n)
        .collect();
    let grand = rows.iter().sum::<f64>() / n;
    (rows, grand)
}

/// `n⁻² Σ |x_i - x_j| |y_i - y_j|`
fn cross_mean(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut acc = 0.0;
    for i in 0..n {
        let (xi, yi) = (x[i], y[i]);
        let mut row = 0.0;
        for j in 0..i {
            row += (xi - x[j]).abs() * (yi - y[j]).abs();
        }
        acc += 2.0 * row;
    }
    acc / (n * n) as f64
}

/// Squared V-statistic distance covariance from double-centred distances,
/// `n⁻² Σ a_ij b_ij - 2 n⁻¹ Σ ā_i b̄_i + ā b̄`, in O(n) memory.
fn dcov2(x: &[f64], y: &[f64], rx: &(Vec<f64>, f64), ry: &(Vec<f64>, f64)) -> f64 {
    let n = x.len() as f64;
    let cross: f64 = rx.0.iter().zip(&ry.0).map(|(a, b)| a * b).sum::<f64>() / n;
    cross_mean(x, y) - 2.0 * cross + rx.1 * ry.1
}

/// Distance correlation in `[0, 1]`; 0 when either sample is constant.
pub fn distance_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(invalid("samples differ in length"));
    }
    if x.len() < 2 {
        return Err(Error::TooFewSamples {
            got: x.len(),
            min: 2,
        });
    }
    let rx = row_means(x);
    let ry = row_means(y);
    let vx = dcov2(x, x, &rx, &rx);
    let vy = dcov2(y, y, &ry, &ry);
    if vx <= 0.0 || vy <= 0.0 {
        return Ok(0.0);
    }
    Ok((dcov2(x, y, &rx, &ry).max(0.0) / (vx * vy).sqrt()).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PermutationTest {
    pub statistic: f64,
    pub p_value: f64,
    pub permutations: usize,
    pub n: usize,
}

/// Distance correlation of the first `max_n` pairs with a permutation p-value.
pub fn distance_correlation_test(
    x: &[f64],
    y: &[f64],
    permutations: usize,
    max_n: usize,
    seed: &SeedPath,
) -> Result<PermutationTest> {
    if x.len() != y.len() {
        return Err(invalid("samples differ in length"));
    }
    let n = x.len().min(max_n);
    let (x, y) = (&x[..n], &y[..n]);
    let stat = distance_correlation(x, y)?;
    if stat == 0.0 {
        return Ok(PermutationTest {
            statistic: 0.0,
            p_value: 1.0,
            permutations: 0,
            n,
        });
    }
    let mut rng = seed.rng();
    let mut perm = y.to_vec();
    let mut exceed = 0usize;
    for _ in 0..permutations {
        perm.shuffle(&mut rng);
        if distance_correlation(x, &perm)? >= stat {
            exceed += 1;
        }
    }
    Ok(PermutationTest {
        statistic: stat,
        p_value: (1 + exceed) as f64 / (1 + permutations) as f64,
        permutations,
        n,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateEstimate {
    pub rate: f64,
    pub se: f64,
    pub n: usize,
}

/// Maximum likelihood rate of an exponential sample.
pub fn exp_rate_mle(x: &[f64]) -> Result<RateEstimate> {
    if x.is_empty() {
        return Err(Error::TooFewSamples { got: 0, min: 1 });
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    if !(mean > 0.0) {
        return Err(invalid("exponential sample must have positive mean"));
    }
    let rate = 1.0 / mean;
    Ok(RateEstimate {
        rate,
        se: rate / (x.len() as f64).sqrt(),
        n: x.len(),
    })
}

/// Bootstrap standard error of `stat` over resampled index sets.
pub fn bootstrap_se<F: FnMut(&[usize]) -> f64>(
    n: usize,
    resamples: usize,
    seed: &SeedPath,
    mut stat: F,
) -> f64 {
    if n == 0 || resamples < 2 {
        return f64::NAN;
    }
    let mut rng = seed.rng();
    let mut idx = vec![0usize; n];
    let vals: Vec<f64> = (0..resamples)
        .map(|_| {
            for v in idx.iter_mut() {
                *v = rng.random_range(0..n);
            }
            stat(&idx)
        })
        .collect();
    sample_sd(&vals)
}
