//! Laws of the random shift applied to a whole configuration.

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::seed::Rng;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShiftSpec {
    #[default]
    None,
    Constant {
        z: f64,
    },
    /// Law `Gum(c ·)`.
    Gumbel {
        c: f64,
    },
    Normal {
        mean: f64,
        sd: f64,
    },
    /// Uniform choice among recorded shifts.
    Empirical {
        samples: Vec<f64>,
    },
}

impl ShiftSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ShiftSpec::None => Ok(()),
            ShiftSpec::Constant { z } if z.is_finite() => Ok(()),
            ShiftSpec::Gumbel { c } if c.is_finite() && *c > 0.0 => Ok(()),
            ShiftSpec::Normal { mean, sd } if mean.is_finite() && sd.is_finite() && *sd >= 0.0 => {
                Ok(())
            }
            ShiftSpec::Empirical { samples }
                if !samples.is_empty() && samples.iter().all(|s| s.is_finite()) =>
            {
                Ok(())
            }
            other => Err(invalid(format!("invalid shift {other:?}"))),
        }
    }

    /// Whether sampling consumes randomness.
    pub fn is_random(&self) -> bool {
        !matches!(self, ShiftSpec::None | ShiftSpec::Constant { .. })
    }

    pub fn sample_with(&self, rng: &mut Rng) -> f64 {
        match self {
            ShiftSpec::None => 0.0,
            ShiftSpec::Constant { z } => *z,
            ShiftSpec::Gumbel { c } => {
                let u: f64 = rng.random();
                -(-(u.ln())).ln() / c
            }
            ShiftSpec::Normal { mean, sd } => {
                Normal::new(*mean, *sd).expect("validated").sample(rng)
            }
            ShiftSpec::Empirical { samples } => samples[rng.random_range(0..samples.len())],
        }
    }
}
