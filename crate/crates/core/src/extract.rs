//! Conditioned tail processes, overshoots, and decoration extraction at a
//! finite conditioning level, with the checks built on them.

use rand::Rng as _;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{invalid, Error, Result};
use crate::point::Configuration;
use crate::samplers::{sample_decoration, DecorationSpec, Dppp, ProcessSample, Sampler};
use crate::seed::SeedPath;
use crate::stats::{
    chi_square_homogeneity, distance_correlation_test, exp_rate_mle, ks_one_sample, ks_two_sample,
    pearson, VerificationReport,
};

/// Smallest admissible acceptance rate.
pub const MIN_ACCEPTANCE: f64 = 1e-4;

/// Attempts in the pilot run that estimates the acceptance rate.
pub const PILOT_ATTEMPTS: u64 = 1_000_000;

/// KS threshold for summary and overshoot laws.
pub const KS_THRESHOLD: f64 = 0.02;

/// Required chi-square p-value.
pub const CHI_SQUARE_P: f64 = 0.01;

/// Largest contamination bound accepted by the round trip.
pub const CONTAMINATION_LIMIT: f64 = 0.01;

/// Relative tolerance on the overshoot rate estimate.
pub const RATE_REL_TOL: f64 = 0.05;

pub const DCOR_PERMUTATIONS: usize = 199;
pub const DCOR_MAX_N: usize = 1000;

const CHUNK: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractionParams {
    /// Conditioning level.
    pub y: f64,
    /// Depth below the maximum that is retained.
    pub window_depth: f64,
    pub n_accept: usize,
    pub max_attempts: u64,
    pub c: f64,
}

impl ExtractionParams {
    /// `W = R + 1` when the decoration radius is known.
    pub fn for_decoration(c: f64, y: f64, decoration: &DecorationSpec, n_accept: usize) -> Self {
        ExtractionParams {
            y,
            window_depth: decoration.support_radius() + 1.0,
            n_accept,
            max_attempts: 1 << 32,
            c,
        }
    }

    /// Default depth `5 / c` when nothing is known about the decoration.
    pub fn default_depth(c: f64) -> f64 {
        5.0 / c
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(invalid("c must be positive"));
        }
        if !self.y.is_finite() {
            return Err(invalid("conditioning level must be finite"));
        }
        if !(self.window_depth > 0.0 && self.window_depth.is_finite()) {
            return Err(invalid("window depth must be positive"));
        }
        if self.max_attempts == 0 {
            return Err(invalid("max_attempts must be positive"));
        }
        Ok(())
    }

    /// Probability bound `e^{-c(y - W)}/c` for a second atom within `W` of the level.
    pub fn contamination_bound(&self) -> f64 {
        (-self.c * (self.y - self.window_depth)).exp() / self.c
    }

    /// Lowest point that must be observed.
    pub fn observe_low(&self) -> f64 {
        self.y - self.window_depth
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchHeader {
    pub y: f64,
    pub window_depth: f64,
    pub c: f64,
    pub contamination_bound: f64,
    pub seed: SeedPath,
    pub attempts: u64,
    pub accepted: usize,
    pub acceptance_rate: f64,
}

/// Accepted samples together with the rejection bookkeeping.
#[derive(Clone, Debug)]
pub struct Accepted<T> {
    pub items: Vec<T>,
    pub attempts: u64,
    /// Accepted attempts before truncation to the target count.
    pub passed: usize,
}

/// Runs attempt `i` with `seed.child(i)` until `n_accept` samples pass `accept`.
/// Samples are kept in attempt order, so the output is independent of the
/// number of worker threads.
pub fn rejection_sample<S, T, F>(
    sampler: &S,
    params: &ExtractionParams,
    seed: &SeedPath,
    accept: F,
) -> Result<Accepted<T>>
where
    S: Sampler + ?Sized,
    T: Send,
    F: Fn(ProcessSample) -> Result<Option<T>> + Sync,
{
    params.validate()?;
    let run = |lo: u64, hi: u64| -> Result<Vec<T>> {
        let out: Vec<Result<Option<T>>> = (lo..hi)
            .into_par_iter()
            .map(|i| {
                let s = sampler.sample(&seed.child(i));
                if s.config.window_low() > params.observe_low() {
                    return Err(Error::Faithfulness {
                        required: params.observe_low(),
                        window: s.config.window_low(),
                    });
                }
                accept(s)
            })
            .collect();
        out.into_iter().filter_map(|r| r.transpose()).collect()
    };
    let pilot = PILOT_ATTEMPTS.min(params.max_attempts);
    let mut items = run(0, pilot)?;
    let rate = items.len() as f64 / pilot as f64;
    if rate < MIN_ACCEPTANCE {
        return Err(Error::AcceptanceTooLow {
            rate,
            min: MIN_ACCEPTANCE,
        });
    }
    let mut attempts = pilot;
    while items.len() < params.n_accept {
        if attempts >= params.max_attempts {
            return Err(Error::MaxAttemptsExceeded {
                attempts,
                accepted: items.len(),
                wanted: params.n_accept,
            });
        }
        let hi = (attempts + CHUNK).min(params.max_attempts);
        items.extend(run(attempts, hi)?);
        attempts = hi;
    }
    let passed = items.len();
    items.truncate(params.n_accept);
    Ok(Accepted {
        items,
        attempts,
        passed,
    })
}

/// Overshoot `M - y` and the configuration shifted so its maximum sits at 0,
/// restricted to `[-W, 0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtractedPair {
    pub overshoot: f64,
    pub decoration: Configuration<f64>,
}

fn recenter(config: &Configuration<f64>, depth: f64) -> Configuration<f64> {
    let pts = config.points();
    let m = config.maximum();
    let start = pts.partition_point(|&x| x < m - depth);
    Configuration::from_sorted(pts[start..].iter().map(|&x| x - m).collect(), -depth)
}

/// Accepted (overshoot, decoration) pairs from one rejection run.
pub fn extract_pairs<S: Sampler + ?Sized>(
    sampler: &S,
    params: &ExtractionParams,
    seed: &SeedPath,
) -> Result<(Vec<ExtractedPair>, BatchHeader)> {
    let (y, w) = (params.y, params.window_depth);
    let acc = rejection_sample(sampler, params, seed, |s| {
        let m = s.config.maximum();
        Ok((m > y).then(|| ExtractedPair {
            overshoot: m - y,
            decoration: recenter(&s.config, w),
        }))
    })?;
    let header = header(params, seed, &acc);
    Ok((acc.items, header))
}

fn header<T>(params: &ExtractionParams, seed: &SeedPath, acc: &Accepted<T>) -> BatchHeader {
    BatchHeader {
        y: params.y,
        window_depth: params.window_depth,
        c: params.c,
        contamination_bound: params.contamination_bound(),
        seed: seed.clone(),
        attempts: acc.attempts,
        accepted: acc.items.len(),
        acceptance_rate: acc.passed as f64 / acc.attempts as f64,
    }
}

/// `θ_{-y}(ξ|_{(y,∞)})` conditioned on `ξ((y, ∞)) > 0`.
pub fn sample_conditioned_tail<S: Sampler + ?Sized>(
    sampler: &S,
    params: &ExtractionParams,
    seed: &SeedPath,
) -> Result<Vec<Configuration<f64>>> {
    let y = params.y;
    let acc = rejection_sample(sampler, params, seed, |s| {
        let pts = s.config.points();
        let start = pts.partition_point(|&x| x <= y);
        Ok((start < pts.len()).then(|| {
            Configuration::from_sorted(pts[start..].iter().map(|&x| x - y).collect(), 0.0)
        }))
    })?;
    Ok(acc.items)
}

/// `M(ξ) - y` given `M(ξ) > y`.
pub fn overshoot_samples<S: Sampler + ?Sized>(
    sampler: &S,
    params: &ExtractionParams,
    seed: &SeedPath,
) -> Result<Vec<f64>> {
    let y = params.y;
    let acc = rejection_sample(sampler, params, seed, |s| {
        let m = s.config.maximum();
        Ok((m > y).then_some(m - y))
    })?;
    Ok(acc.items)
}

/// Extracted decorations (maximum exactly 0, restricted to `[-W, 0]`) with the
/// batch header.
pub fn extract_decoration<S: Sampler + ?Sized>(
    sampler: &S,
    params: &ExtractionParams,
    seed: &SeedPath,
) -> Result<(BatchHeader, Vec<Configuration<f64>>)> {
    let (pairs, header) = extract_pairs(sampler, params, seed)?;
    Ok((header, pairs.into_iter().map(|p| p.decoration).collect()))
}

fn exp_cdf(c: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| if x <= 0.0 { 0.0 } else { -(-c * x).exp_m1() }
}

/// KS distance of the overshoot to `Exp(c)` and the rate estimate.
pub fn overshoot_check<S: Sampler + ?Sized>(
    sampler: &S,
    params: &ExtractionParams,
    seed: &SeedPath,
) -> Result<VerificationReport> {
    let x = overshoot_samples(sampler, params, seed)?;
    let ks = ks_one_sample(&x, exp_cdf(params.c))?;
    let rate = exp_rate_mle(&x)?;
    let mut report = VerificationReport::new("overshoot", seed);
    report.n_samples = x.len() as u64;
    report.at_most("ks_exp", ks.statistic, KS_THRESHOLD);
    report.at_most(
        "rate_relative_error",
        (rate.rate / params.c - 1.0).abs(),
        RATE_REL_TOL,
    );
    report.stat("rate", rate.rate);
    report.stat("rate_se", rate.se);
    report.stat("ks_p_value", ks.p_value);
    Ok(report.with_params(json!(params)))
}

/// Pearson and distance correlation between the overshoot and a statistic of
/// the extracted decoration. PASS when `|r| ≤ 3/√n` and the permutation
/// p-value of the distance correlation exceeds 0.01.
pub fn check_independence<S, F>(
    sampler: &S,
    params: &ExtractionParams,
    statistic: F,
    seed: &SeedPath,
) -> Result<VerificationReport>
where
    S: Sampler + ?Sized,
    F: Fn(&Configuration<f64>) -> f64,
{
    let (pairs, header) = extract_pairs(sampler, params, seed)?;
    let x: Vec<f64> = pairs.iter().map(|p| p.overshoot).collect();
    let s: Vec<f64> = pairs.iter().map(|p| statistic(&p.decoration)).collect();
    let n = x.len();
    let r = pearson(&x, &s)?;
    let d =
        distance_correlation_test(&x, &s, DCOR_PERMUTATIONS, DCOR_MAX_N, &seed.child(u64::MAX))?;
    let mut report = VerificationReport::new("independence", seed);
    report.n_samples = n as u64;
    report.at_most("pearson_abs", r.abs(), 3.0 / (n as f64).sqrt());
    report.at_least("dcor_p_value", d.p_value, CHI_SQUARE_P);
    report.stat("dcor", d.statistic);
    report.stat("dcor_n", d.n as f64);
    report.stat("contamination_bound", header.contamination_bound);
    Ok(report.with_params(json!(params)))
}

/// Summaries compared by the round trip.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Summary {
    /// Points in `[-W, 0]`.
    pub count: usize,
    /// Distance from 0 to the second point, `W` when there is none.
    pub gap: f64,
    /// Sum of the offsets.
    pub total: f64,
}

pub fn summarize(d: &Configuration<f64>, depth: f64) -> Summary {
    let pts = d.points();
    let start = pts.partition_point(|&x| x < -depth);
    let kept = &pts[start..];
    Summary {
        count: kept.len(),
        gap: if kept.len() >= 2 {
            -kept[kept.len() - 2]
        } else {
            depth
        },
        total: kept.iter().sum(),
    }
}

/// Exact law of the extraction output at finite `y` for a decorated Poisson
/// process: the top atom is drawn conditioned above `y`, the lower atoms
/// continue the ordered arrivals, and everything within `W` of the top is kept.
pub fn conditioned_decorations(
    decoration: &DecorationSpec,
    params: &ExtractionParams,
    n: usize,
    seed: &SeedPath,
) -> Result<Vec<(f64, Configuration<f64>)>> {
    params.validate()?;
    decoration.validate()?;
    let (c, y, w) = (params.c, params.y, params.window_depth);
    // Arrival time of the top atom lies in (0, q0).
    let q0 = (-c * y).exp() / c;
    let tail = -(-q0).exp_m1();
    Ok((0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.child_rng(i);
            let v: f64 = rng.random();
            let mut arrival = -(-v * tail).ln_1p();
            let top = -(c * arrival).ln() / c;
            let mut pts = Vec::new();
            decoration.sample_into(&mut rng, top, &mut pts);
            loop {
                let e: f64 = Exp1.sample(&mut rng);
                arrival += e;
                let atom = -(c * arrival).ln() / c;
                if atom < top - w {
                    break;
                }
                decoration.sample_into(&mut rng, atom, &mut pts);
            }
            pts.sort_by(f64::total_cmp);
            let start = pts.partition_point(|&x| x < top - w);
            let d = Configuration::from_sorted(pts[start..].iter().map(|&x| x - top).collect(), -w);
            (top - y, d)
        })
        .collect())
}

fn count_table(xs: &[Summary]) -> Vec<u64> {
    let k = xs.iter().map(|s| s.count).max().unwrap_or(0);
    let mut t = vec![0u64; k + 1];
    for s in xs {
        t[s.count] += 1;
    }
    t
}

fn compare_summaries(
    report: &mut VerificationReport,
    label: &str,
    got: &[Summary],
    want: &[Summary],
) -> Result<()> {
    let gap = |v: &[Summary]| v.iter().map(|s| s.gap).collect::<Vec<_>>();
    let total = |v: &[Summary]| v.iter().map(|s| s.total).collect::<Vec<_>>();
    let ks_gap = ks_two_sample(&gap(got), &gap(want))?;
    let ks_total = ks_two_sample(&total(got), &total(want))?;
    let chi = chi_square_homogeneity(&count_table(got), &count_table(want))?;
    report.at_most(format!("{label}_ks_gap"), ks_gap.statistic, KS_THRESHOLD);
    report.at_most(
        format!("{label}_ks_total"),
        ks_total.statistic,
        KS_THRESHOLD,
    );
    report.at_least(format!("{label}_count_chi2_p"), chi.p_value, CHI_SQUARE_P);
    report.stat(format!("{label}_count_chi2"), chi.statistic);
    Ok(())
}

/// Extracts decorations from `DPPP(e^{-cx}, spec)` and compares summary laws
/// with direct draws of `spec` (sample size `10 n`). The contamination bound
/// must not exceed [`CONTAMINATION_LIMIT`]. Agreement with the exact finite-`y`
/// extraction law is reported as a separate part.
pub fn roundtrip_check(
    spec: &DecorationSpec,
    c: f64,
    params: &ExtractionParams,
    seed: &SeedPath,
) -> Result<VerificationReport> {
    if (params.c - c).abs() > 0.0 {
        return Err(invalid("extraction rate differs from the process rate"));
    }
    let w = params.window_depth;
    if w < spec.support_radius() {
        return Err(invalid(format!(
            "window depth {w} is below the decoration radius {}",
            spec.support_radius()
        )));
    }
    let sampler = Dppp::new(c, spec.clone(), params.observe_low())?;
    let (header, extracted) = extract_decoration(&sampler, params, &seed.child(0))?;
    let n = extracted.len();
    let got: Vec<Summary> = extracted.iter().map(|d| summarize(d, w)).collect();
    let truth_seed = seed.child(1);
    let truth: Vec<Summary> = (0..10 * n as u64)
        .into_par_iter()
        .map(|i| sample_decoration(spec, &truth_seed.child(i)).map(|d| summarize(&d, w)))
        .collect::<Result<_>>()?;
    let exact: Vec<Summary> = conditioned_decorations(spec, params, 10 * n, &seed.child(2))?
        .iter()
        .map(|(_, d)| summarize(d, w))
        .collect();
    let mut report = VerificationReport::new("roundtrip", seed);
    report.n_samples = n as u64;
    report.stat("acceptance_rate", header.acceptance_rate);
    report.at_most(
        "contamination_bound",
        header.contamination_bound,
        CONTAMINATION_LIMIT,
    );
    report.holds(
        "maximum_is_zero",
        extracted.iter().all(|d| d.maximum() == 0.0),
    );
    compare_summaries(&mut report, "truth", &got, &truth)?;
    let mut part = VerificationReport::new("roundtrip-finite-level", &seed.child(2));
    part.n_samples = n as u64;
    compare_summaries(&mut part, "finite_level", &got, &exact)?;
    part.note("reference is the exact extraction law at the finite conditioning level");
    report.add_part(part);
    Ok(report.with_params(json!({ "decoration": spec, "c": c, "extraction": params })))
}

/// Counts of the level-`(y + t)` tail process in `(-W, ∞)` for each `t`,
/// compared with the `t = ts[0]` law by chi-square homogeneity.
pub fn tail_stationarity<S: Sampler + ?Sized>(
    sampler: &S,
    params: &ExtractionParams,
    ts: &[f64],
    seed: &SeedPath,
) -> Result<VerificationReport> {
    if ts.len() < 2 || ts.iter().any(|&t| !(t >= 0.0)) {
        return Err(invalid("need at least two nonnegative level offsets"));
    }
    let w = params.window_depth;
    let mut tables = Vec::with_capacity(ts.len());
    for (k, &t) in ts.iter().enumerate() {
        let level = ExtractionParams {
            y: params.y + t,
            window_depth: w + t,
            ..*params
        };
        let y = level.y;
        let acc = rejection_sample(sampler, &level, &seed.child(k as u64), |s| {
            let pts = s.config.points();
            Ok((s.config.maximum() > y).then(|| pts.len() - pts.partition_point(|&x| x <= y - w)))
        })?;
        let mut table = vec![0u64; acc.items.iter().copied().max().unwrap_or(0) + 1];
        for &n in &acc.items {
            table[n] += 1;
        }
        tables.push(table);
    }
    let mut report = VerificationReport::new("tail-stationarity", seed);
    report.n_samples = params.n_accept as u64;
    for (k, &t) in ts.iter().enumerate().skip(1) {
        let chi = chi_square_homogeneity(&tables[0], &tables[k])?;
        report.at_least(format!("count_chi2_p[{t}]"), chi.p_value, CHI_SQUARE_P);
    }
    Ok(report.with_params(json!({ "extraction": params, "ts": ts })))
}

/// `E exp{s · D((-ε, 0])}` over extracted decorations, with standard error.
pub fn exp_count_moment(decorations: &[Configuration<f64>], epsilon: f64, s: f64) -> (f64, f64) {
    let v: Vec<f64> = decorations
        .iter()
        .map(|d| {
            let pts = d.points();
            let n = pts.len() - pts.partition_point(|&x| x <= -epsilon);
            (s * n as f64).exp()
        })
        .collect();
    crate::stats::mean_and_se(&v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(y: f64, w: f64, n: usize, c: f64) -> ExtractionParams {
        ExtractionParams {
            y,
            window_depth: w,
            n_accept: n,
            max_attempts: 1 << 30,
            c,
        }
    }

    #[test]
    fn acceptance_rate_and_positive_tail() {
        let p = params(3.0, 1.0, 2000, 1.0);
        let s = Dppp::ppp(1.0, p.observe_low()).unwrap();
        let (pairs, h) = extract_pairs(&s, &p, &SeedPath::new(1)).unwrap();
        let want = -(-(-3f64).exp()).exp_m1();
        assert!(
            (h.acceptance_rate - want).abs() < 0.002,
            "{}",
            h.acceptance_rate
        );
        assert!(pairs.iter().all(|q| q.decoration.maximum() == 0.0));
        let tails = sample_conditioned_tail(&s, &p, &SeedPath::new(1)).unwrap();
        assert!(tails
            .iter()
            .all(|t| t.maximum() > 0.0 && t.points()[0] > 0.0));
    }

    #[test]
    fn acceptance_too_low() {
        let p = params(12.0, 1.0, 10, 1.0);
        let s = Dppp::ppp(1.0, p.observe_low()).unwrap();
        assert!(matches!(
            overshoot_samples(&s, &p, &SeedPath::new(1)),
            Err(Error::AcceptanceTooLow { .. })
        ));
    }

    #[test]
    fn max_attempts() {
        let mut p = params(3.0, 1.0, 1_000_000, 1.0);
        p.max_attempts = 10_000;
        let s = Dppp::ppp(1.0, p.observe_low()).unwrap();
        assert!(matches!(
            overshoot_samples(&s, &p, &SeedPath::new(1)),
            Err(Error::MaxAttemptsExceeded { .. })
        ));
    }

    #[test]
    fn window_must_be_faithful() {
        let p = params(3.0, 1.0, 10, 1.0);
        let s = Dppp::ppp(1.0, 2.5).unwrap();
        assert!(matches!(
            overshoot_samples(&s, &p, &SeedPath::new(1)),
            Err(Error::Faithfulness { .. })
        ));
    }

    #[test]
    fn overshoot_is_exponential() {
        let p = params(4.0, 1.0, 5000, 1.0);
        let s = Dppp::ppp(1.0, p.observe_low()).unwrap();
        let r = overshoot_check(&s, &p, &SeedPath::new(3)).unwrap();
        assert!(r.pass, "{:?}", r.criteria);
        let x = overshoot_samples(&s, &p, &SeedPath::new(3)).unwrap();
        assert!(ks_one_sample(&x, exp_cdf(2.0)).unwrap().statistic > 0.15);
    }

    #[test]
    fn constant_shift_cancels() {
        let p = params(6.0, 1.7, 1000, 1.0);
        let spec = DecorationSpec::finite_cluster(vec![0.0, -0.7]).unwrap();
        let plain = Dppp::new(1.0, spec.clone(), p.observe_low()).unwrap();
        let shifted = crate::samplers::Sdppp::new(
            1.0,
            spec,
            crate::samplers::ShiftSpec::Constant { z: 0.8 },
            p.observe_low(),
        )
        .unwrap();
        let clean = |s: &dyn Sampler| {
            let (_, a) = extract_decoration(s, &p, &SeedPath::new(4)).unwrap();
            a.iter()
                .filter(|d| d.len() == 2 && (d.points()[0] + 0.7).abs() < 1e-9)
                .count() as f64
                / a.len() as f64
        };
        assert!(clean(&plain) >= 0.97);
        assert!(clean(&shifted) >= 0.97);
    }

    #[test]
    fn exact_reference_matches_rejection() {
        let spec = DecorationSpec::finite_cluster(vec![0.0, -0.7]).unwrap();
        let p = params(2.0, 1.7, 4000, 1.0);
        let s = Dppp::new(1.0, spec.clone(), p.observe_low()).unwrap();
        let (pairs, _) = extract_pairs(&s, &p, &SeedPath::new(6)).unwrap();
        let exact = conditioned_decorations(&spec, &p, 20_000, &SeedPath::new(7)).unwrap();
        let a: Vec<f64> = pairs
            .iter()
            .map(|q| summarize(&q.decoration, 1.7).total)
            .collect();
        let b: Vec<f64> = exact.iter().map(|(_, d)| summarize(d, 1.7).total).collect();
        let ks = ks_two_sample(&a, &b).unwrap();
        assert!(ks.p_value > 0.001, "{ks:?}");
        let oa: Vec<f64> = pairs.iter().map(|q| q.overshoot).collect();
        let ob: Vec<f64> = exact.iter().map(|(o, _)| *o).collect();
        let ks = ks_two_sample(&oa, &ob).unwrap();
        assert!(ks.p_value > 0.001, "{ks:?}");
    }

    #[test]
    fn summaries() {
        let d = Configuration::new(vec![-2.5, -0.7, 0.0], -3.0).unwrap();
        let s = summarize(&d, 1.7);
        assert_eq!(s.count, 2);
        assert_eq!(s.gap, 0.7);
        assert_eq!(s.total, -0.7);
        let single = Configuration::new(vec![0.0], -1.0).unwrap();
        assert_eq!(summarize(&single, 1.0).gap, 1.0);
    }
}
