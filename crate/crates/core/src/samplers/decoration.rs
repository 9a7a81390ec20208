//! Decoration laws: clusters whose maximum is exactly 0 and whose points lie in `[-R, 0]`.

use rand::Rng as _;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::analytic::special::poisson_tail;
use crate::error::{invalid, Result};
use crate::point::Configuration;
use crate::seed::{Rng, SeedPath};
use crate::test_function::TestFunction;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "variant",
    rename_all = "snake_case",
    deny_unknown_fields,
    try_from = "DecorationRepr"
)]
pub enum DecorationSpec {
    /// A single point at 0.
    #[serde(alias = "dirac_at_zero")]
    Dirac,
    /// The fixed offsets, one of which is 0.
    FiniteCluster { offsets: Vec<f64> },
    /// A point at 0, then points at `-S_1 > -S_2 > ...` where `S_k` are partial
    /// sums of `Exp(gap_rate)` gaps. Each further point is kept with probability
    /// `1 - p`; the walk stops at the first `S_k > radius` and after
    /// `ceil(radius · gap_rate)` points below 0.
    GeometricCluster {
        p: f64,
        gap_rate: f64,
        #[serde(alias = "cap")]
        radius: f64,
    },
    /// Uniform choice among recorded decorations.
    Empirical { samples: Vec<Configuration<f64>> },
}

#[derive(Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
enum DecorationRepr {
    #[serde(alias = "dirac_at_zero")]
    Dirac {},
    FiniteCluster {
        offsets: Vec<f64>,
    },
    GeometricCluster {
        p: f64,
        gap_rate: f64,
        #[serde(alias = "cap")]
        radius: f64,
    },
    Empirical {
        samples: Vec<Configuration<f64>>,
    },
}

impl TryFrom<DecorationRepr> for DecorationSpec {
    type Error = crate::error::Error;

    fn try_from(r: DecorationRepr) -> Result<Self> {
        match r {
            DecorationRepr::Dirac {} => Ok(DecorationSpec::Dirac),
            DecorationRepr::FiniteCluster { offsets } => DecorationSpec::finite_cluster(offsets),
            DecorationRepr::GeometricCluster {
                p,
                gap_rate,
                radius,
            } => DecorationSpec::geometric_cluster(p, gap_rate, radius),
            DecorationRepr::Empirical { samples } => DecorationSpec::empirical(samples),
        }
    }
}

impl DecorationSpec {
    pub fn finite_cluster(mut offsets: Vec<f64>) -> Result<Self> {
        offsets.sort_by(f64::total_cmp);
        let spec = DecorationSpec::FiniteCluster { offsets };
        spec.validate()?;
        Ok(spec)
    }

    pub fn geometric_cluster(p: f64, gap_rate: f64, radius: f64) -> Result<Self> {
        let spec = DecorationSpec::GeometricCluster {
            p,
            gap_rate,
            radius,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn empirical(samples: Vec<Configuration<f64>>) -> Result<Self> {
        let spec = DecorationSpec::Empirical { samples };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DecorationSpec::Dirac => Ok(()),
            DecorationSpec::FiniteCluster { offsets } => check_cluster(offsets),
            DecorationSpec::GeometricCluster {
                p,
                gap_rate,
                radius,
            } => {
                if !(*p > 0.0 && *p <= 1.0) {
                    return Err(invalid(format!("geometric cluster: p = {p} not in (0, 1]")));
                }
                if !(gap_rate.is_finite() && *gap_rate > 0.0) {
                    return Err(invalid("geometric cluster: gap_rate must be positive"));
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(invalid("geometric cluster: radius must be positive"));
                }
                if radius * gap_rate > 1e6 {
                    return Err(invalid("geometric cluster: radius · gap_rate too large"));
                }
                Ok(())
            }
            DecorationSpec::Empirical { samples } => {
                if samples.is_empty() {
                    return Err(invalid("empirical decoration needs at least one sample"));
                }
                samples.iter().try_for_each(|s| check_cluster(s.points()))
            }
        }
    }

    /// `R` such that every realization lies in `[-R, 0]`.
    pub fn support_radius(&self) -> f64 {
        match self {
            DecorationSpec::Dirac => 0.0,
            DecorationSpec::FiniteCluster { offsets } => -offsets.first().copied().unwrap_or(0.0),
            DecorationSpec::GeometricCluster { radius, .. } => *radius,
            DecorationSpec::Empirical { samples } => samples
                .iter()
                .map(|s| -s.points().first().copied().unwrap_or(0.0))
                .fold(0.0, f64::max),
        }
    }

    pub fn max_count(&self) -> usize {
        match self {
            DecorationSpec::Dirac => 1,
            DecorationSpec::FiniteCluster { offsets } => offsets.len(),
            DecorationSpec::GeometricCluster {
                gap_rate, radius, ..
            } => geometric_cap(*gap_rate, *radius) + 1,
            DecorationSpec::Empirical { samples } => {
                samples.iter().map(|s| s.len()).max().unwrap_or(1)
            }
        }
    }

    /// Offsets that carry positive probability; only 0 for laws that are
    /// continuous below it.
    pub fn known_offsets(&self) -> Vec<f64> {
        let mut v = match self {
            DecorationSpec::Dirac | DecorationSpec::GeometricCluster { .. } => vec![0.0],
            DecorationSpec::FiniteCluster { offsets } => offsets.clone(),
            DecorationSpec::Empirical { samples } => samples
                .iter()
                .flat_map(|s| s.points().iter().copied())
                .collect(),
        };
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Appends `atom + d` for each point `d` of a fresh realization, ascending.
    pub(crate) fn sample_into(&self, rng: &mut Rng, atom: f64, out: &mut Vec<f64>) {
        match self {
            DecorationSpec::Dirac => out.push(atom),
            DecorationSpec::FiniteCluster { offsets } => {
                out.extend(offsets.iter().map(|d| atom + d))
            }
            DecorationSpec::GeometricCluster {
                p,
                gap_rate,
                radius,
            } => {
                let start = out.len();
                out.push(atom);
                let cap = geometric_cap(*gap_rate, *radius);
                let gap = Exp::new(*gap_rate).expect("validated rate");
                let mut depth = 0.0;
                for _ in 0..cap {
                    if rng.random::<f64>() < *p {
                        break;
                    }
                    depth += gap.sample(rng);
                    if depth > *radius {
                        break;
                    }
                    out.push(atom - depth);
                }
                out[start..].reverse();
            }
            DecorationSpec::Empirical { samples } => {
                let k = rng.random_range(0..samples.len());
                out.extend(samples[k].points().iter().map(|d| atom + d));
            }
        }
    }

    pub fn sample_with(&self, rng: &mut Rng) -> Configuration<f64> {
        let mut pts = Vec::with_capacity(self.max_count().min(64));
        self.sample_into(rng, 0.0, &mut pts);
        let r = self.support_radius();
        Configuration::from_sorted(pts, -r)
    }

    /// `P(count = k)` for `k = 0, 1, ..., max_count`.
    pub fn count_pmf(&self) -> Vec<f64> {
        let n = self.max_count();
        let mut pmf = vec![0.0; n + 1];
        match self {
            DecorationSpec::Dirac => pmf[1] = 1.0,
            DecorationSpec::FiniteCluster { offsets } => pmf[offsets.len()] = 1.0,
            DecorationSpec::GeometricCluster {
                p,
                gap_rate,
                radius,
            } => {
                // P(count - 1 >= m) = (1 - p)^m P(Poisson(gap_rate · radius) >= m), m <= cap.
                let cap = geometric_cap(*gap_rate, *radius);
                let tail = |m: usize| -> f64 {
                    if m > cap {
                        0.0
                    } else {
                        (1.0 - p).powi(m as i32) * poisson_tail(gap_rate * radius, m as u64)
                    }
                };
                for m in 0..=cap {
                    pmf[m + 1] = tail(m) - tail(m + 1);
                }
            }
            DecorationSpec::Empirical { samples } => {
                let w = 1.0 / samples.len() as f64;
                for s in samples {
                    pmf[s.len()] += w;
                }
            }
        }
        pmf
    }

    /// `E D([-x, 0])`, the mean number of points within distance `x` of the maximum.
    pub fn mean_count_within(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match self {
            DecorationSpec::Dirac => 1.0,
            DecorationSpec::FiniteCluster { offsets } => {
                offsets.iter().filter(|&&d| d >= -x).count() as f64
            }
            DecorationSpec::GeometricCluster {
                p,
                gap_rate,
                radius,
            } => {
                let cap = geometric_cap(*gap_rate, *radius);
                let lam = gap_rate * x.min(*radius);
                1.0 + (1..=cap)
                    .map(|k| (1.0 - p).powi(k as i32) * poisson_tail(lam, k as u64))
                    .sum::<f64>()
            }
            DecorationSpec::Empirical { samples } => {
                samples
                    .iter()
                    .map(|s| s.points().iter().filter(|&&d| d >= -x).count() as f64)
                    .sum::<f64>()
                    / samples.len() as f64
            }
        }
    }

    /// `E Σ_j e^{β d_j}`.
    pub fn exp_moment(&self, beta: f64) -> f64 {
        match self {
            DecorationSpec::Dirac => 1.0,
            DecorationSpec::FiniteCluster { offsets } => {
                offsets.iter().map(|d| (beta * d).exp()).sum()
            }
            DecorationSpec::GeometricCluster {
                p,
                gap_rate,
                radius,
            } => {
                // E[e^{-β S_k}; S_k <= R] = (λ/(λ+β))^k P(Gamma(k, λ+β) <= R).
                let cap = geometric_cap(*gap_rate, *radius);
                let ratio = gap_rate / (gap_rate + beta);
                let lam = (gap_rate + beta) * radius;
                1.0 + (1..=cap)
                    .map(|k| ((1.0 - p) * ratio).powi(k as i32) * poisson_tail(lam, k as u64))
                    .sum::<f64>()
            }
            DecorationSpec::Empirical { samples } => {
                samples
                    .iter()
                    .map(|s| s.points().iter().map(|d| (beta * d).exp()).sum::<f64>())
                    .sum::<f64>()
                    / samples.len() as f64
            }
        }
    }

    /// `E[(Σ_j e^{β d_j})^α]`, available for laws with finitely many realizations.
    pub fn power_of_exp_sum_moment(&self, beta: f64, alpha: f64) -> Result<f64> {
        let w = |pts: &[f64]| {
            pts.iter()
                .map(|d| (beta * d).exp())
                .sum::<f64>()
                .powf(alpha)
        };
        match self {
            DecorationSpec::Dirac => Ok(1.0),
            DecorationSpec::FiniteCluster { offsets } => Ok(w(offsets)),
            DecorationSpec::Empirical { samples } => {
                Ok(samples.iter().map(|s| w(s.points())).sum::<f64>() / samples.len() as f64)
            }
            DecorationSpec::GeometricCluster { .. } => Err(invalid(
                "no closed form for this moment of a geometric cluster",
            )),
        }
    }

    /// `L_D[f|y] = E exp(-Σ_j f(d_j - y))`, exact where the law allows it.
    pub fn laplace_at(&self, f: &TestFunction, y: f64) -> Result<f64> {
        let single = |pts: &[f64]| (-pts.iter().map(|d| f.eval(d - y)).sum::<f64>()).exp();
        match self {
            DecorationSpec::Dirac => Ok(single(&[0.0])),
            DecorationSpec::FiniteCluster { offsets } => Ok(single(offsets)),
            DecorationSpec::Empirical { samples } => {
                Ok(samples.iter().map(|s| single(s.points())).sum::<f64>() / samples.len() as f64)
            }
            DecorationSpec::GeometricCluster { .. } => match f {
                TestFunction::MaxFunctional => Ok(if y >= 0.0 { 1.0 } else { 0.0 }),
                _ => Err(invalid(format!(
                    "no exact Laplace functional of a geometric cluster for {}",
                    f.descriptor()
                ))),
            },
        }
    }
}

pub(crate) fn geometric_cap(gap_rate: f64, radius: f64) -> usize {
    (radius * gap_rate).ceil() as usize
}

fn check_cluster(points: &[f64]) -> Result<()> {
    if points.is_empty() {
        return Err(invalid("decoration realization is empty"));
    }
    if points.iter().any(|d| !d.is_finite() || *d > 0.0) {
        return Err(invalid("decoration offsets must be finite and <= 0"));
    }
    if !points.contains(&0.0) {
        return Err(invalid("decoration must contain a point at 0"));
    }
    Ok(())
}

/// One decoration draw.
pub fn sample_decoration(spec: &DecorationSpec, seed: &SeedPath) -> Result<Configuration<f64>> {
    spec.validate()?;
    Ok(spec.sample_with(&mut seed.rng()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draws(spec: &DecorationSpec, n: u64) -> Vec<Configuration<f64>> {
        let s = SeedPath::new(11);
        (0..n)
            .map(|i| sample_decoration(spec, &s.child(i)).unwrap())
            .collect()
    }

    #[test]
    fn deterministic_families() {
        assert_eq!(draws(&DecorationSpec::Dirac, 1)[0].points(), &[0.0]);
        let fc = DecorationSpec::finite_cluster(vec![0.0, -0.7]).unwrap();
        for d in draws(&fc, 5) {
            assert_eq!(d.points(), &[-0.7, 0.0]);
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(DecorationSpec::finite_cluster(vec![-0.5]).is_err());
        assert!(DecorationSpec::finite_cluster(vec![0.0, 0.5]).is_err());
        assert!(DecorationSpec::geometric_cluster(0.0, 1.0, 1.0).is_err());
        assert!(DecorationSpec::geometric_cluster(0.5, -1.0, 1.0).is_err());
        let bad = Configuration::new(vec![-1.0, -0.2], f64::NEG_INFINITY).unwrap();
        assert!(DecorationSpec::empirical(vec![bad]).is_err());
    }

    #[test]
    fn geometric_support_and_max() {
        let g = DecorationSpec::geometric_cluster(0.5, 2.0, 3.0).unwrap();
        for d in draws(&g, 20_000) {
            assert_eq!(d.maximum(), 0.0);
            assert!(d.points()[0] >= -3.0);
            assert!(d.len() <= 7);
        }
    }

    #[test]
    fn geometric_pmf_sums_to_one_and_matches_frequencies() {
        let g = DecorationSpec::geometric_cluster(0.5, 2.0, 3.0).unwrap();
        let pmf = g.count_pmf();
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let n = 40_000;
        let mut freq = vec![0.0; pmf.len()];
        for d in draws(&g, n) {
            freq[d.len()] += 1.0 / n as f64;
        }
        for k in 0..pmf.len() {
            let se = (pmf[k] * (1.0 - pmf[k]) / n as f64).sqrt();
            assert!((freq[k] - pmf[k]).abs() <= 5.0 * se + 1e-9, "k = {k}");
        }
    }

    #[test]
    fn geometric_moments_match_sampling() {
        let g = DecorationSpec::geometric_cluster(0.3, 1.5, 2.0).unwrap();
        let n = 40_000;
        let ds = draws(&g, n);
        for &beta in &[0.5, 1.0, 3.0] {
            let emp: Vec<f64> = ds
                .iter()
                .map(|d| d.points().iter().map(|x| (beta * x).exp()).sum())
                .collect();
            let mean = emp.iter().sum::<f64>() / n as f64;
            let var = emp.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            assert!((mean - g.exp_moment(beta)).abs() < 5.0 * (var / n as f64).sqrt());
        }
        for &x in &[0.3, 1.0, 5.0] {
            let mean = ds
                .iter()
                .map(|d| d.points().iter().filter(|&&p| p >= -x).count() as f64)
                .sum::<f64>()
                / n as f64;
            assert!((mean - g.mean_count_within(x)).abs() < 0.03);
        }
    }

    #[test]
    fn finite_cluster_moments() {
        let fc = DecorationSpec::finite_cluster(vec![0.0, -2f64.ln()]).unwrap();
        assert!((fc.exp_moment(1.0) - 1.5).abs() < 1e-15);
        assert_eq!(fc.mean_count_within(0.5), 1.0);
        assert_eq!(fc.mean_count_within(1.0), 2.0);
    }

    #[test]
    fn serde_variants() {
        let d: DecorationSpec =
            serde_json::from_str(r#"{"variant":"finite_cluster","offsets":[0,-0.7]}"#).unwrap();
        assert_eq!(
            d,
            DecorationSpec::FiniteCluster {
                offsets: vec![-0.7, 0.0]
            }
        );
        assert!(serde_json::from_str::<DecorationSpec>(
            r#"{"variant":"finite_cluster","offsets":[-1]}"#
        )
        .is_err());
        let g: DecorationSpec =
            serde_json::from_str(r#"{"variant":"geometric_cluster","p":0.5,"gap_rate":2,"cap":3}"#)
                .unwrap();
        assert_eq!(g.support_radius(), 3.0);
        assert!(serde_json::from_str::<DecorationSpec>(r#"{"variant":"dirac","x":1}"#).is_err());
    }
}
