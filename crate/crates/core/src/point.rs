//! Finite point configurations on the real line.
//!
//! A [`Configuration`] is a sorted multiset of positions together with a
//! `window_low` level. Only the restriction of a sample to `(window_low, ∞)` is
//! guaranteed to follow the law of the process it was drawn from; points below
//! the window (decoration overhang) are kept but carry no such guarantee.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl<T: Real> Interval<T> {
    pub fn new(lo: T, hi: T, lo_closed: bool, hi_closed: bool) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(invalid(format!("interval bounds {lo} > {hi}")));
        }
        Ok(Interval {
            lo,
            hi,
            lo_closed: lo_closed && lo.is_finite(),
            hi_closed: hi_closed && hi.is_finite(),
        })
    }

    /// `(lo, hi)`
    pub fn open(lo: T, hi: T) -> Self {
        Self::new(lo, hi, false, false).expect("lo <= hi")
    }

    /// `[lo, hi]`
    pub fn closed(lo: T, hi: T) -> Self {
        Self::new(lo, hi, true, true).expect("lo <= hi")
    }

    /// `(lo, ∞)`
    pub fn above(lo: T) -> Self {
        Self::open(lo, T::infinity())
    }

    #[inline]
    pub fn contains(&self, x: T) -> bool {
        let above = if self.lo_closed {
            x >= self.lo
        } else {
            x > self.lo
        };
        let below = if self.hi_closed {
            x <= self.hi
        } else {
            x < self.hi
        };
        above && below
    }

    pub fn shifted(&self, x: T) -> Self {
        Interval {
            lo: self.lo + x,
            hi: self.hi + x,
            ..*self
        }
    }
}

/// A value computed from a configuration, flagged when the query reached below
/// the faithful window (the value is then only a lower bound).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Checked<V> {
    pub value: V,
    pub warning: Option<FaithfulnessWarning>,
}

impl<V> Checked<V> {
    pub fn is_faithful(&self) -> bool {
        self.warning.is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaithfulnessWarning {
    pub query_low: f64,
    pub window_low: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Configuration<T> {
    points: Vec<T>,
    window_low: T,
    tag: Option<String>,
}

impl<T: Real> Default for Configuration<T> {
    fn default() -> Self {
        Self::empty(T::neg_infinity())
    }
}

impl<T: Real> Configuration<T> {
    pub fn empty(window_low: T) -> Self {
        Configuration {
            points: Vec::new(),
            window_low,
            tag: None,
        }
    }

    /// Builds a configuration from unsorted positions. Positions must be finite.
    pub fn new(mut points: Vec<T>, window_low: T) -> Result<Self> {
        if let Some(bad) = points.iter().find(|p| !p.is_finite()) {
            return Err(invalid(format!("non-finite position {bad}")));
        }
        if window_low.is_nan() || window_low == T::infinity() {
            return Err(invalid("window_low must be a real or -inf"));
        }
        points.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        Ok(Configuration {
            points,
            window_low,
            tag: None,
        })
    }

    /// Wraps positions that are already sorted ascending and finite.
    pub(crate) fn from_sorted(points: Vec<T>, window_low: T) -> Self {
        debug_assert!(points.windows(2).all(|w| w[0] <= w[1]));
        Configuration {
            points,
            window_low,
            tag: None,
        }
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = Some(tag.into());
        self
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn into_points(self) -> Vec<T> {
        self.points
    }

    pub fn window_low(&self) -> T {
        self.window_low
    }

    pub fn tag(&self) -> Option<&str> {
        self.tag.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Translates every point and the window by `x`.
    pub fn shift(&self, x: T) -> Self {
        Configuration {
            points: self.points.iter().map(|&p| p + x).collect(),
            window_low: self.window_low + x,
            tag: self.tag.clone(),
        }
    }

    /// Multiset union. The faithful window is the more restrictive of the two.
    pub fn superpose(&self, other: &Self) -> Self {
        let (a, b) = (&self.points, &other.points);
        let mut merged = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                merged.push(a[i]);
                i += 1;
            } else {
                merged.push(b[j]);
                j += 1;
            }
        }
        merged.extend_from_slice(&a[i..]);
        merged.extend_from_slice(&b[j..]);
        Configuration {
            points: merged,
            window_low: self.window_low.max(other.window_low),
            tag: None,
        }
    }

    /// Rightmost particle; `-inf` for the empty configuration.
    pub fn maximum(&self) -> T {
        self.points.last().copied().unwrap_or(T::neg_infinity())
    }

    /// Index of the first point that is not below `x` (or strictly above when `strict`).
    #[inline]
    pub(crate) fn lower_index(&self, x: T, strict: bool) -> usize {
        if strict {
            self.points.partition_point(|&p| p <= x)
        } else {
            self.points.partition_point(|&p| p < x)
        }
    }

    pub fn count_in(&self, iv: &Interval<T>) -> Checked<usize> {
        let start = self.lower_index(iv.lo, !iv.lo_closed);
        let end = self.lower_index(iv.hi, iv.hi_closed);
        Checked {
            value: end.saturating_sub(start),
            warning: self.check_window(iv.lo),
        }
    }

    pub(crate) fn check_window(&self, query_low: T) -> Option<FaithfulnessWarning> {
        (query_low < self.window_low).then(|| FaithfulnessWarning {
            query_low: query_low.to_f64_lossy(),
            window_low: self.window_low.to_f64_lossy(),
        })
    }

    /// Restriction to an interval; the window becomes the interval's lower end
    /// when that is above the current window.
    pub fn restrict(&self, iv: &Interval<T>) -> Self {
        let start = self.lower_index(iv.lo, !iv.lo_closed);
        let end = self.lower_index(iv.hi, iv.hi_closed).max(start);
        Configuration {
            points: self.points[start..end].to_vec(),
            window_low: self.window_low.max(iv.lo),
            tag: self.tag.clone(),
        }
    }

    pub fn to_f64(&self) -> Configuration<f64> {
        Configuration {
            points: self.points.iter().map(|p| p.to_f64_lossy()).collect(),
            window_low: self.window_low.to_f64_lossy(),
            tag: self.tag.clone(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigurationRepr {
    points: Vec<f64>,
    window_low: Option<f64>,
    #[serde(default)]
    tag: Option<String>,
}

impl<T: Real> Serialize for Configuration<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let w = self.window_low.to_f64_lossy();
        ConfigurationRepr {
            points: self.points.iter().map(|p| p.to_f64_lossy()).collect(),
            window_low: w.is_finite().then_some(w),
            tag: Some(self.tag.clone().unwrap_or_default()),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for Configuration<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ConfigurationRepr::deserialize(d)?;
        let points = r.points.into_iter().map(T::lit).collect();
        let window = r.window_low.map(T::lit).unwrap_or(T::neg_infinity());
        let mut cfg = Configuration::new(points, window).map_err(serde::de::Error::custom)?;
        cfg.tag = r.tag.filter(|t| !t.is_empty());
        Ok(cfg)
    }
}

/// Writes one configuration per line.
pub fn write_ndjson<T: Real, W: Write>(
    out: &mut W,
    configs: &[Configuration<T>],
) -> std::io::Result<()> {
    for c in configs {
        serde_json::to_writer(&mut *out, c)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads configurations, one JSON object per non-empty line.
pub fn read_ndjson<T: Real, R: BufRead>(input: R) -> Result<Vec<Configuration<T>>> {
    let mut out = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line.map_err(|e| invalid(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let cfg = serde_json::from_str(&line)
            .map_err(|e| Error::InvalidParameter(format!("line {}: {e}", lineno + 1)))?;
        out.push(cfg);
    }
    Ok(out)
}
