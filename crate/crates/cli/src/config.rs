//! Run configuration: JSON file keys overridden by command-line flags.

use std::path::{Path, PathBuf};

use dpplab::samplers::{DecorationSpec, ShiftSpec};
use dpplab::suite::Matrix;
use dpplab::{Interval, TestFunction};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.lo.is_finite() && self.hi.is_finite())
            || self.n == 0
            || (self.n > 1 && self.hi <= self.lo)
        {
            return Err("grid needs finite lo < hi and n >= 1".into());
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        dpplab::laplace::linear_grid(self.lo, self.hi, self.n)
    }
}

/// Every key is optional; absent keys take the command's default and the
/// resolved value is echoed in the output.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_reps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decoration: Option<DecorationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<ShiftSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observe_low: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<TestFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_depth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_attempts: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_particles: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Matrix>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field; } )*
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        if let Some(g) = &cfg.grid {
            g.validate()
                .map_err(|e| CliError::Usage(format!("config {}: grid: {e}", path.display())))?;
        }
        Ok(cfg)
    }

    /// `top` wins wherever it sets a key.
    pub fn overlay(mut self, top: RunConfig) -> Self {
        overlay!(self, top; command, seed, n_reps, n, c, decoration, shift, observe_low, f, grid, y,
            window_depth, max_attempts, t, betas, max_particles, matrix);
        self
    }

    pub fn check_command(&self, invoked: &str) -> Result<(), CliError> {
        match &self.command {
            Some(c) if c != invoked => Err(CliError::Usage(format!(
                "config is for command `{c}` but `{invoked}` was invoked"
            ))),
            _ => Ok(()),
        }
    }
}

/// Settings that shape where and how results are written, not what they are.
#[derive(Clone, Debug, Default)]
pub struct OutputOptions {
    pub out: Option<PathBuf>,
    pub force: bool,
}

fn numbers(s: &str, want: std::ops::RangeInclusive<usize>) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| parse_real(t.trim()))
        .collect::<Result<_, _>>()?;
    if !want.contains(&v.len()) {
        return Err(format!(
            "expected {}..={} numbers, got {}",
            want.start(),
            want.end(),
            v.len()
        ));
    }
    Ok(v)
}

fn parse_real(t: &str) -> Result<f64, String> {
    match t {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => t.parse().map_err(|_| format!("not a number: `{t}`")),
    }
}

fn json_or<T: for<'de> Deserialize<'de>>(
    s: &str,
    short: impl FnOnce(&str, &str) -> Result<T, String>,
) -> Result<T, String> {
    if s.trim_start().starts_with('{') {
        return serde_json::from_str(s).map_err(|e| e.to_string());
    }
    let (head, rest) = s.split_once(':').unwrap_or((s, ""));
    short(head, rest)
}

/// `dirac`, `finite:0,-0.7`, `geometric:p,gap_rate,radius`, or a JSON object.
pub fn parse_decoration(s: &str) -> Result<DecorationSpec, String> {
    json_or(s, |head, rest| {
        let spec = match head {
            "dirac" => Ok(DecorationSpec::Dirac),
            "finite" => DecorationSpec::finite_cluster(numbers(rest, 1..=usize::MAX)?),
            "geometric" => {
                let v = numbers(rest, 3..=3)?;
                DecorationSpec::geometric_cluster(v[0], v[1], v[2])
            }
            _ => {
                return Err(format!(
                    "unknown decoration `{head}` (dirac | finite:.. | geometric:p,rate,radius)"
                ))
            }
        };
        spec.map_err(|e| e.to_string())
    })
}

/// `none`, `constant:z`, `gumbel:c`, `normal:mean,sd`, or a JSON object.
pub fn parse_shift(s: &str) -> Result<ShiftSpec, String> {
    json_or(s, |head, rest| {
        let shift = match head {
            "none" => ShiftSpec::None,
            "constant" => ShiftSpec::Constant {
                z: numbers(rest, 1..=1)?[0],
            },
            "gumbel" => ShiftSpec::Gumbel {
                c: numbers(rest, 1..=1)?[0],
            },
            "normal" => {
                let v = numbers(rest, 2..=2)?;
                ShiftSpec::Normal {
                    mean: v[0],
                    sd: v[1],
                }
            }
            _ => {
                return Err(format!(
                    "unknown shift `{head}` (none | constant:z | gumbel:c | normal:mean,sd)"
                ))
            }
        };
        shift.validate().map_err(|e| e.to_string())?;
        Ok(shift)
    })
}

/// `max`, `exp:beta`, `indicator:lo,hi[,level]`, `bump:center,half_width,height`,
/// or a JSON object.
pub fn parse_function(s: &str) -> Result<TestFunction, String> {
    let f = json_or(s, |head, rest| match head {
        "max" => Ok(TestFunction::MaxFunctional),
        "exp" => Ok(TestFunction::exponential(numbers(rest, 1..=1)?[0])),
        "indicator" => {
            let v = numbers(rest, 2..=3)?;
            if v[0].partial_cmp(&v[1]) != Some(std::cmp::Ordering::Less) {
                return Err("indicator needs lo < hi".into());
            }
            let level = v.get(2).copied().unwrap_or(f64::INFINITY);
            Ok(TestFunction::indicator(Interval::open(v[0], v[1]), level))
        }
        "bump" => {
            let v = numbers(rest, 3..=3)?;
            Ok(TestFunction::bump(v[0], v[1], v[2]))
        }
        _ => Err(format!(
            "unknown test function `{head}` (max | exp:b | indicator:lo,hi[,level] | bump:c,w,h)"
        )),
    })?;
    f.validate().map_err(|e| e.to_string())?;
    Ok(f)
}

/// `lo,hi,n`.
pub fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [lo, hi, n] = parts[..] else {
        return Err("grid must be `lo,hi,n`".into());
    };
    let g = GridSpec {
        lo: parse_real(lo)?,
        hi: parse_real(hi)?,
        n: n.parse().map_err(|_| format!("not a count: `{n}`"))?,
    };
    g.validate()?;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_forms() {
        assert_eq!(parse_decoration("dirac").unwrap(), DecorationSpec::Dirac);
        assert!(matches!(
            parse_decoration("finite:0,-0.7"),
            Ok(DecorationSpec::FiniteCluster { .. })
        ));
        assert!(parse_decoration("finite:0.5").is_err());
        assert!(matches!(
            parse_decoration(r#"{"variant":"dirac"}"#),
            Ok(DecorationSpec::Dirac)
        ));
        assert_eq!(
            parse_shift("normal:0,1").unwrap(),
            ShiftSpec::Normal { mean: 0.0, sd: 1.0 }
        );
        assert_eq!(parse_function("max").unwrap(), TestFunction::MaxFunctional);
        assert!(parse_function("indicator:1,0").is_err());
        assert_eq!(parse_grid("-1,1,3").unwrap().points(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(parse_grid("2,2,1").unwrap().points(), vec![2.0]);
        assert!(parse_grid("1,2").is_err());
    }

    #[test]
    fn unknown_keys_rejected_with_position() {
        let err =
            serde_json::from_str::<RunConfig>("{\n  \"c\": 1,\n  \"colour\": 2\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("colour") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig {
            c: Some(1.0),
            y: Some(4.0),
            ..Default::default()
        };
        let flags = RunConfig {
            c: Some(2.0),
            ..Default::default()
        };
        let merged = file.overlay(flags);
        assert_eq!((merged.c, merged.y), (Some(2.0), Some(4.0)));
    }
}
