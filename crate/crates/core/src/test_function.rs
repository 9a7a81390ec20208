//! Nonnegative test functions for Laplace functionals.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::point::{Checked, Configuration, Interval};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunction {
    /// `level · 1_I`; `level` may be `+inf`.
    IntervalIndicator {
        #[serde(with = "crate::ext_real")]
        lo: f64,
        #[serde(with = "crate::ext_real")]
        hi: f64,
        #[serde(default)]
        lo_closed: bool,
        #[serde(default)]
        hi_closed: bool,
        #[serde(with = "crate::ext_real")]
        level: f64,
    },
    /// Triangular bump of the given height, supported on `(center - half_width, center + half_width)`.
    Bump {
        center: f64,
        half_width: f64,
        height: f64,
    },
    /// `e^{beta x} 1_{x >= cutoff_low}`; `cutoff_low = -inf` means no cutoff.
    Exponential {
        beta: f64,
        #[serde(with = "crate::ext_real", default = "neg_inf")]
        cutoff_low: f64,
    },
    /// `∞ · 1_{(0, ∞)}`: its Laplace functional is the distribution function of the maximum.
    MaxFunctional,
    Sum {
        parts: Vec<TestFunction>,
    },
}

fn neg_inf() -> f64 {
    f64::NEG_INFINITY
}

impl TestFunction {
    pub fn sum(parts: Vec<TestFunction>) -> Self {
        TestFunction::Sum { parts }
    }

    pub fn indicator(interval: Interval<f64>, level: f64) -> Self {
        TestFunction::IntervalIndicator {
            lo: interval.lo,
            hi: interval.hi,
            lo_closed: interval.lo_closed,
            hi_closed: interval.hi_closed,
            level,
        }
    }

    pub fn bump(center: f64, half_width: f64, height: f64) -> Self {
        TestFunction::Bump {
            center,
            half_width,
            height,
        }
    }

    pub fn exponential(beta: f64) -> Self {
        TestFunction::Exponential {
            beta,
            cutoff_low: f64::NEG_INFINITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TestFunction::IntervalIndicator { lo, hi, level, .. } => {
                if !(lo < hi) {
                    return Err(invalid(format!(
                        "indicator needs lo < hi, got ({lo}, {hi})"
                    )));
                }
                if !(*level > 0.0) {
                    return Err(invalid("indicator level must be positive"));
                }
            }
            TestFunction::Bump {
                half_width,
                height,
                center,
            } => {
                if !(*half_width > 0.0 && *height > 0.0 && height.is_finite() && center.is_finite())
                {
                    return Err(invalid(
                        "bump needs finite center, positive half-width and height",
                    ));
                }
            }
            TestFunction::Exponential { beta, cutoff_low } => {
                if !(*beta > 0.0 && beta.is_finite()) {
                    return Err(invalid("exponential rate must be positive"));
                }
                if cutoff_low.is_nan() || *cutoff_low == f64::INFINITY {
                    return Err(invalid("exponential cutoff must be real or -inf"));
                }
            }
            TestFunction::MaxFunctional => {}
            TestFunction::Sum { parts } => {
                if parts.is_empty() {
                    return Err(invalid("empty sum of test functions"));
                }
                parts.iter().try_for_each(TestFunction::validate)?;
            }
        }
        Ok(())
    }

    pub fn interval(&self) -> Option<Interval<f64>> {
        match self {
            TestFunction::IntervalIndicator {
                lo,
                hi,
                lo_closed,
                hi_closed,
                ..
            } => Some(Interval::new(*lo, *hi, *lo_closed, *hi_closed).ok()?),
            _ => None,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::IntervalIndicator { level, .. } => {
                if self.interval().is_some_and(|iv| iv.contains(x)) {
                    *level
                } else {
                    0.0
                }
            }
            TestFunction::Bump {
                center,
                half_width,
                height,
            } => height * (1.0 - (x - center).abs() / half_width).max(0.0),
            TestFunction::Exponential { beta, cutoff_low } => {
                if x >= *cutoff_low {
                    (beta * x).exp()
                } else {
                    0.0
                }
            }
            TestFunction::MaxFunctional => {
                if x > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            TestFunction::Sum { parts } => parts.iter().map(|f| f.eval(x)).sum(),
        }
    }

    /// Lower end of the support (the function vanishes below it).
    pub fn support_low(&self) -> f64 {
        match self {
            TestFunction::IntervalIndicator { lo, .. } => *lo,
            TestFunction::Bump {
                center, half_width, ..
            } => center - half_width,
            TestFunction::Exponential { cutoff_low, .. } => *cutoff_low,
            TestFunction::MaxFunctional => 0.0,
            TestFunction::Sum { parts } => parts
                .iter()
                .map(|f| f.support_low())
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Upper end of the support.
    pub fn support_high(&self) -> f64 {
        match self {
            TestFunction::IntervalIndicator { hi, .. } => *hi,
            TestFunction::Bump {
                center, half_width, ..
            } => center + half_width,
            TestFunction::Exponential { .. } | TestFunction::MaxFunctional => f64::INFINITY,
            TestFunction::Sum { parts } => parts
                .iter()
                .map(|f| f.support_high())
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Finite-level indicators, bumps and finite sums of those.
    pub fn is_compactly_supported(&self) -> bool {
        match self {
            TestFunction::IntervalIndicator { lo, hi, level, .. } => {
                lo.is_finite() && hi.is_finite() && level.is_finite()
            }
            TestFunction::Bump { .. } => true,
            TestFunction::Sum { parts } => parts.iter().all(TestFunction::is_compactly_supported),
            _ => false,
        }
    }

    /// Points where the function may jump; used as quadrature breakpoints.
    pub fn kinks(&self) -> Vec<f64> {
        let mut k = match self {
            TestFunction::IntervalIndicator { lo, hi, .. } => vec![*lo, *hi],
            TestFunction::Bump {
                center, half_width, ..
            } => vec![center - half_width, *center, center + half_width],
            TestFunction::Exponential { cutoff_low, .. } => vec![*cutoff_low],
            TestFunction::MaxFunctional => vec![0.0],
            TestFunction::Sum { parts } => parts.iter().flat_map(|f| f.kinks()).collect(),
        };
        k.retain(|x| x.is_finite());
        k
    }

    pub fn descriptor(&self) -> String {
        match self {
            TestFunction::IntervalIndicator { lo, hi, level, .. } => {
                format!("indicator({lo},{hi};{level})")
            }
            TestFunction::Bump {
                center,
                half_width,
                height,
            } => format!("bump({center},{half_width};{height})"),
            TestFunction::Exponential { beta, cutoff_low } => {
                if cutoff_low.is_finite() {
                    format!("exp({beta};{cutoff_low})")
                } else {
                    format!("exp({beta})")
                }
            }
            TestFunction::MaxFunctional => "max".to_string(),
            TestFunction::Sum { parts } => {
                let inner: Vec<String> = parts.iter().map(|f| f.descriptor()).collect();
                format!("sum[{}]", inner.join("+"))
            }
        }
    }
}

impl Configuration<f64> {
    /// `⟨f, cfg⟩ = Σ f(x_i)`.
    pub fn integrate(&self, f: &TestFunction) -> Checked<f64> {
        self.integrate_shifted(f, 0.0)
    }

    /// `⟨θ_y f, cfg⟩ = Σ f(x_i - y)`, without materialising the shifted configuration.
    pub fn integrate_shifted(&self, f: &TestFunction, y: f64) -> Checked<f64> {
        Checked {
            value: self.integral_at(f, y),
            warning: self.check_window(f.support_low() + y),
        }
    }

    pub(crate) fn integral_at(&self, f: &TestFunction, y: f64) -> f64 {
        let pts = self.points();
        match f {
            TestFunction::MaxFunctional => {
                if self.maximum() > y {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            TestFunction::IntervalIndicator { level, .. } => {
                let iv = f.interval().expect("validated");
                let n = self.count_in(&iv.shifted(y)).value;
                if n == 0 {
                    0.0
                } else {
                    level * n as f64
                }
            }
            TestFunction::Bump { .. } | TestFunction::Exponential { .. } => {
                let lo = f.support_low() + y;
                let start = if lo.is_finite() {
                    self.lower_index(lo, false)
                } else {
                    0
                };
                let hi = f.support_high() + y;
                let end = if hi.is_finite() {
                    self.lower_index(hi, true)
                } else {
                    pts.len()
                };
                pts[start..end.max(start)]
                    .iter()
                    .map(|&x| f.eval(x - y))
                    .sum()
            }
            TestFunction::Sum { parts } => parts.iter().map(|g| self.integral_at(g, y)).sum(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(p: &[f64]) -> Configuration<f64> {
        Configuration::new(p.to_vec(), f64::NEG_INFINITY).unwrap()
    }

    #[test]
    fn integrate_examples() {
        let f = TestFunction::indicator(Interval::open(0.5, 2.0), 3.0);
        assert_eq!(cfg(&[0.0, 1.0]).integrate(&f).value, 3.0);
        let m = TestFunction::MaxFunctional;
        assert_eq!(cfg(&[-1.0]).integrate(&m).value, 0.0);
        assert_eq!(cfg(&[0.5]).integrate(&m).value, f64::INFINITY);
        assert_eq!(cfg(&[0.0]).integrate(&m).value, 0.0);
    }

    #[test]
    fn infinite_level_indicator() {
        let f = TestFunction::indicator(Interval::open(0.0, 1.0), f64::INFINITY);
        assert_eq!(cfg(&[2.0]).integrate(&f).value, 0.0);
        assert_eq!(cfg(&[0.5]).integrate(&f).value, f64::INFINITY);
    }

    #[test]
    fn bump_and_shift() {
        let f = TestFunction::bump(0.0, 1.0, 2.0);
        let c = cfg(&[0.5, 3.0]);
        assert!((c.integrate(&f).value - 1.0).abs() < 1e-15);
        // θ_3 f picks up the point at 3 with full height.
        assert!((c.integrate_shifted(&f, 3.0).value - 2.0).abs() < 1e-15);
    }

    #[test]
    fn exponential_cutoff() {
        let f = TestFunction::Exponential {
            beta: 2.0,
            cutoff_low: -1.0,
        };
        let c = cfg(&[-3.0, 0.0, 1.0]);
        let want = 1.0 + 2f64.exp();
        assert!((c.integrate(&f).value - want).abs() < 1e-12);
        let all = TestFunction::exponential(2.0);
        assert!((c.integrate(&all).value - want - (-6f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn faithfulness_flag() {
        let c = Configuration::new(vec![1.0], 0.0).unwrap();
        let f = TestFunction::bump(0.5, 0.25, 1.0);
        assert!(c.integrate(&f).is_faithful());
        assert!(!c.integrate_shifted(&f, -1.0).is_faithful());
        assert!(!c.integrate(&TestFunction::exponential(1.0)).is_faithful());
    }

    #[test]
    fn sum_is_additive() {
        let f1 = TestFunction::bump(0.0, 1.0, 1.0);
        let f2 = TestFunction::indicator(Interval::open(1.0, 2.0), 0.5);
        let s = TestFunction::sum(vec![f1.clone(), f2.clone()]);
        let c = cfg(&[-0.5, 0.2, 1.5, 1.7]);
        let lhs = c.integrate(&s).value;
        let rhs = c.integrate(&f1).value + c.integrate(&f2).value;
        assert!((lhs - rhs).abs() < 1e-14);
        assert_eq!(s.support_low(), -1.0);
        assert_eq!(s.support_high(), 2.0);
        assert!(s.is_compactly_supported());
    }

    #[test]
    fn integrate_is_additive_under_superpose() {
        let f = TestFunction::bump(0.3, 0.9, 1.5);
        let a = cfg(&[-0.2, 0.4, 1.0]);
        let b = cfg(&[0.1, 0.5]);
        let lhs = a.superpose(&b).integrate(&f).value;
        let rhs = a.integrate(&f).value + b.integrate(&f).value;
        assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn validation() {
        assert!(TestFunction::bump(0.0, 0.0, 1.0).validate().is_err());
        assert!(TestFunction::indicator(Interval::open(0.0, 1.0), 0.0)
            .validate()
            .is_err());
        assert!(TestFunction::exponential(-1.0).validate().is_err());
        assert!(TestFunction::Sum { parts: vec![] }.validate().is_err());
        assert!(TestFunction::MaxFunctional.validate().is_ok());
    }

    #[test]
    fn serde_roundtrip() {
        let f = TestFunction::sum(vec![
            TestFunction::bump(0.0, 1.0, 2.0),
            TestFunction::MaxFunctional,
        ]);
        let s = serde_json::to_string(&f).unwrap();
        let back: TestFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }
}
