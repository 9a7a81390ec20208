//! Goodness-of-fit tests: Kolmogorov–Smirnov and chi-square.

use serde::Serialize;

use crate::analytic::special::gamma_q;
use crate::error::{invalid, Error, Result};

/// Minimum sample size for one-sample KS.
pub const KS_MIN_SAMPLES: usize = 50;

#[derive(Clone, Debug)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.iter().any(|x| x.is_nan()) {
            return Err(invalid("NaN in sample"));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Ecdf { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    pub m: usize,
}

/// `sup |F_n - F|` with the asymptotic p-value at `λ = (√n + 0.12 + 0.11/√n) D`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<KsResult> {
    if samples.len() < KS_MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            got: samples.len(),
            min: KS_MIN_SAMPLES,
        });
    }
    let e = Ecdf::new(samples)?;
    let n = e.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in e.sorted().iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let sn = n.sqrt();
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d),
        n: e.len(),
        m: 0,
    })
}

/// `1.63 √((n + m) / (n m))`, the two-sample band at level ≈ 0.01.
pub fn ks_two_sample_threshold(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.63 * ((n + m) / (n * m)).sqrt()
}

/// `sup |F_n - G_m|`, ties handled by stepping both ECDFs together.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::TooFewSamples { got: 0, min: 1 });
    }
    let ea = Ecdf::new(a)?;
    let eb = Ecdf::new(b)?;
    let (xa, xb) = (ea.sorted(), eb.sorted());
    let (n, m) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = n * m / (n + m);
    let se = ne.sqrt();
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf((se + 0.12 + 0.11 / se) * d),
        n: xa.len(),
        m: xb.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Bins after pooling sparse cells.
    pub bins: usize,
}

const MIN_EXPECTED: f64 = 5.0;

/// Groups consecutive cells until each group's weight reaches `min`; a light
/// final group joins its predecessor.
fn pool(weights: &[f64], min: f64) -> Vec<std::ops::Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    let mut acc = 0.0;
    for (k, w) in weights.iter().enumerate() {
        acc += w;
        if acc >= min {
            groups.push(start..k + 1);
            start = k + 1;
            acc = 0.0;
        }
    }
    if start < weights.len() {
        match groups.pop() {
            Some(last) => groups.push(last.start..weights.len()),
            None => groups.push(0..weights.len()),
        }
    }
    groups
}

/// Pearson goodness of fit of observed counts against cell probabilities.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> Result<ChiSquare> {
    if observed.len() != probs.len() || observed.is_empty() {
        return Err(invalid("observed and expected cells differ in length"));
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(Error::TooFewSamples { got: 0, min: 1 });
    }
    let psum: f64 = probs.iter().sum();
    if !(psum > 0.0) || probs.iter().any(|p| *p < 0.0) {
        return Err(invalid(
            "cell probabilities must be nonnegative with positive sum",
        ));
    }
    let expected: Vec<f64> = probs.iter().map(|p| p / psum * total as f64).collect();
    let groups = pool(&expected, MIN_EXPECTED);
    let mut stat = 0.0;
    for g in &groups {
        let o: f64 = observed[g.clone()].iter().map(|&x| x as f64).sum();
        let e: f64 = expected[g.clone()].iter().sum();
        if e > 0.0 {
            stat += (o - e).powi(2) / e;
        } else if o > 0.0 {
            stat = f64::INFINITY;
        }
    }
    let dof = groups.len().saturating_sub(1);
    Ok(ChiSquare {
        statistic: stat,
        dof,
        p_value: chi_square_sf(stat, dof),
        bins: groups.len(),
    })
}

/// Two-sample homogeneity test on count tables over the same cells.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> Result<ChiSquare> {
    let k = a.len().max(b.len());
    let get = |v: &[u64], i: usize| v.get(i).copied().unwrap_or(0) as f64;
    let (na, nb): (f64, f64) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::TooFewSamples { got: 0, min: 1 });
    }
    let n = na + nb;
    // Pool on the smaller expected count of each cell.
    let weight: Vec<f64> = (0..k)
        .map(|i| {
            let col = get(a, i) + get(b, i);
            col * na.min(nb) / n
        })
        .collect();
    let groups = pool(&weight, MIN_EXPECTED);
    let mut stat = 0.0;
    for g in &groups {
        let oa: f64 = g.clone().map(|i| get(a, i)).sum();
        let ob: f64 = g.clone().map(|i| get(b, i)).sum();
        let col = oa + ob;
        if col == 0.0 {
            continue;
        }
        let ea = col * na / n;
        let eb = col * nb / n;
        stat += (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb;
    }
    let dof = groups.len().saturating_sub(1);
    Ok(ChiSquare {
        statistic: stat,
        dof,
        p_value: chi_square_sf(stat, dof),
        bins: groups.len(),
    })
}

/// Upper tail of the chi-square law; a statistic with no degrees of freedom has p = 1.
pub fn chi_square_sf(stat: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    if !stat.is_finite() {
        return 0.0;
    }
    gamma_q(dof as f64 / 2.0, stat / 2.0)
}
