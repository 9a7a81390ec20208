//! Structured pass/fail records.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::seed::SeedPath;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
    Holds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub relation: Relation,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub pass: bool,
    pub criteria: Vec<Criterion>,
    /// Informational values that do not affect the verdict.
    pub statistics: BTreeMap<String, f64>,
    pub n_samples: u64,
    pub seed: SeedPath,
    pub params: serde_json::Value,
    pub notes: Vec<String>,
    /// Set when the verdict rests on an asymptotic statement tested at finite size.
    pub approximate: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<VerificationReport>,
    /// A negative control: the enclosing report passes only if this one fails.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub control: bool,
}

impl VerificationReport {
    pub fn new(check: impl Into<String>, seed: &SeedPath) -> Self {
        VerificationReport {
            check: check.into(),
            pass: true,
            criteria: Vec::new(),
            statistics: BTreeMap::new(),
            n_samples: 0,
            seed: seed.clone(),
            params: serde_json::Value::Null,
            notes: Vec::new(),
            approximate: false,
            rows: Vec::new(),
            parts: Vec::new(),
            control: false,
        }
    }

    fn push(
        &mut self,
        name: impl Into<String>,
        statistic: f64,
        threshold: f64,
        relation: Relation,
        pass: bool,
    ) -> bool {
        self.criteria.push(Criterion {
            name: name.into(),
            statistic,
            threshold,
            relation,
            pass,
        });
        self.pass = self.pass && pass;
        pass
    }

    /// Records `statistic <= threshold`; NaN fails.
    pub fn at_most(&mut self, name: impl Into<String>, statistic: f64, threshold: f64) -> bool {
        self.push(
            name,
            statistic,
            threshold,
            Relation::AtMost,
            statistic <= threshold,
        )
    }

    /// Records `statistic >= threshold`; NaN fails.
    pub fn at_least(&mut self, name: impl Into<String>, statistic: f64, threshold: f64) -> bool {
        self.push(
            name,
            statistic,
            threshold,
            Relation::AtLeast,
            statistic >= threshold,
        )
    }

    pub fn holds(&mut self, name: impl Into<String>, ok: bool) -> bool {
        let v = if ok { 1.0 } else { 0.0 };
        self.push(name, v, 1.0, Relation::Holds, ok)
    }

    pub fn stat(&mut self, name: impl Into<String>, value: f64) {
        self.statistics.insert(name.into(), value);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn with_params(mut self, params: serde_json::Value) -> Self {
        self.params = params;
        self
    }

    /// Folds a sub-report in; the parent passes only if every part passes.
    pub fn add_part(&mut self, part: VerificationReport) {
        self.pass = self.pass && part.pass;
        self.n_samples += part.n_samples;
        self.approximate |= part.approximate;
        self.parts.push(part);
    }

    /// Attaches a negative control and records `control_fails[name]`.
    pub fn add_control(&mut self, name: impl Into<String>, mut part: VerificationReport) -> bool {
        let name = name.into();
        part.check = format!("control: {name}");
        part.control = true;
        let ok = self.holds(format!("control_fails[{name}]"), !part.pass);
        self.n_samples += part.n_samples;
        self.parts.push(part);
        ok
    }

    /// Failed criteria, excluding those inside negative controls.
    pub fn failed_criteria(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .criteria
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{}/{}", self.check, c.name))
            .collect();
        for p in self.parts.iter().filter(|p| !p.control) {
            out.extend(p.failed_criteria());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_all_criteria_pass() {
        let mut r = VerificationReport::new("demo", &SeedPath::new(1));
        assert!(r.at_most("ks", 0.01, 0.02));
        assert!(r.pass);
        assert!(!r.at_least("p", f64::NAN, 0.01));
        assert!(!r.pass);
        assert_eq!(r.failed_criteria(), vec!["demo/p".to_string()]);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["seed"]["master"], 1);
    }

    #[test]
    fn parts_propagate() {
        let mut top = VerificationReport::new("all", &SeedPath::new(0));
        let mut bad = VerificationReport::new("x", &SeedPath::new(0));
        bad.holds("ok", false);
        top.add_part(bad);
        assert!(!top.pass);
    }
}
