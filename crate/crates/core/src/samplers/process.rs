//! Poisson processes with intensity `e^{-cx} dx`, their decorated and shifted
//! versions, and the log-sum-exp shift built from them.

use std::sync::Arc;

use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::decoration::DecorationSpec;
use super::shift::ShiftSpec;
use crate::error::{invalid, Error, Result};
use crate::point::Configuration;
use crate::seed::{Rng, SeedPath};

/// Largest admissible expected atom count for a single draw.
pub const MAX_EXPECTED_ATOMS: f64 = 5e7;

const DECORATION_STREAM: u64 = 0xDEC0_2A7E;
const SHIFT_STREAM: u64 = 0x5A1F_7000;

fn check_rate(c: f64) -> Result<()> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!(
            "intensity rate c must be positive, got {c}"
        )))
    }
}

fn check_window(c: f64, low: f64) -> Result<()> {
    if !low.is_finite() {
        return Err(invalid("atom window must be finite"));
    }
    let mass = (-c * low).exp() / c;
    if mass > MAX_EXPECTED_ATOMS {
        return Err(Error::BudgetExceeded(format!(
            "{mass:.3e} expected atoms above {low} (max {MAX_EXPECTED_ATOMS:e})"
        )));
    }
    Ok(())
}

/// Atoms of `PPP(e^{-cx} dx)` on `[low, ∞)`, in decreasing order. The k-th
/// largest atom is `-log(c Γ_k)/c` with `Γ_k` the arrival times of a unit
/// Poisson process, stopping once `Γ_k` exceeds the mass `e^{-c low}/c`.
fn ppp_atoms_descending(c: f64, low: f64, rng: &mut Rng, out: &mut Vec<f64>) {
    let mass = (-c * low).exp() / c;
    let mut arrival = 0.0;
    loop {
        let e: f64 = Exp1.sample(rng);
        arrival += e;
        if arrival > mass {
            break;
        }
        out.push((-(c * arrival).ln() / c).max(low));
    }
}

/// `PPP(e^{-cx} dx)` restricted to `[atom_low, ∞)`.
pub fn sample_ppp_exp(c: f64, atom_low: f64, seed: &SeedPath) -> Result<Configuration<f64>> {
    check_rate(c)?;
    check_window(c, atom_low)?;
    let mut pts = Vec::new();
    ppp_atoms_descending(c, atom_low, &mut seed.rng(), &mut pts);
    pts.reverse();
    Ok(Configuration::from_sorted(pts, atom_low))
}

fn dppp_points(c: f64, decoration: &DecorationSpec, low: f64, seed: &SeedPath) -> Vec<f64> {
    let mut atoms = Vec::new();
    ppp_atoms_descending(c, low, &mut seed.rng(), &mut atoms);
    atoms.reverse();
    if matches!(decoration, DecorationSpec::Dirac) {
        return atoms;
    }
    let mut rng = seed.child_rng(DECORATION_STREAM);
    let mut pts = Vec::with_capacity(atoms.len() * decoration.max_count().min(8));
    for &a in &atoms {
        decoration.sample_into(&mut rng, a, &mut pts);
    }
    // Blocks are already ascending; the stable sort merges the runs.
    pts.sort_by(f64::total_cmp);
    pts
}

/// Decorated Poisson process: atoms on `[observe_low, ∞)`, each replaced by an
/// independent decoration. Atoms below the window cannot reach above it, so the
/// restriction to `(observe_low, ∞)` is exact.
pub fn sample_dppp(
    c: f64,
    decoration: &DecorationSpec,
    observe_low: f64,
    seed: &SeedPath,
) -> Result<Configuration<f64>> {
    check_rate(c)?;
    check_window(c, observe_low)?;
    decoration.validate()?;
    Ok(Configuration::from_sorted(
        dppp_points(c, decoration, observe_low, seed),
        observe_low,
    ))
}

/// Decorated Poisson process translated by one independent shift. The shift is
/// drawn from a child stream, so `ShiftSpec::None` reproduces [`sample_dppp`].
pub fn sample_sdppp(
    c: f64,
    decoration: &DecorationSpec,
    shift: &ShiftSpec,
    observe_low: f64,
    seed: &SeedPath,
) -> Result<Configuration<f64>> {
    let sampler = Sdppp::new(c, decoration.clone(), shift.clone(), observe_low)?;
    let s = sampler.draw_shift(seed);
    check_window(c, observe_low - s)?;
    Ok(sampler.sample_with_shift(seed, s).config)
}

/// Information about the atoms dropped below the sampling window, used to
/// compensate functionals that do not vanish there.
#[derive(Clone, Debug)]
pub struct AtomTail {
    pub c: f64,
    /// Lowest sampled atom position, before the shift.
    pub atom_low: f64,
    pub shift: f64,
    pub decoration: Arc<DecorationSpec>,
}

impl AtomTail {
    /// `E Σ_{dropped points x} e^{β x}`, finite for `β > c`.
    pub fn exp_sum_mean(&self, beta: f64) -> Result<f64> {
        if !(beta > self.c) {
            return Err(invalid(format!(
                "exponential functional with beta = {beta} <= c = {} diverges",
                self.c
            )));
        }
        let m = self.decoration.exp_moment(beta);
        Ok(m * (beta * self.shift + (beta - self.c) * self.atom_low).exp() / (beta - self.c))
    }

    /// Upper bound on `Var Σ_{dropped points x} e^{β x}`.
    pub fn exp_sum_variance_bound(&self, beta: f64) -> f64 {
        let k = (self.decoration.max_count() as f64).powi(2);
        k * (2.0 * beta * self.shift + (2.0 * beta - self.c) * self.atom_low).exp()
            / (2.0 * beta - self.c)
    }
}

#[derive(Clone, Debug)]
pub struct ProcessSample {
    pub config: Configuration<f64>,
    pub atom_tail: Option<AtomTail>,
}

impl From<Configuration<f64>> for ProcessSample {
    fn from(config: Configuration<f64>) -> Self {
        ProcessSample {
            config,
            atom_tail: None,
        }
    }
}

/// A point process law: a pure function from a seed to a realization.
pub trait Sampler: Sync {
    fn sample(&self, seed: &SeedPath) -> ProcessSample;
}

impl<F> Sampler for F
where
    F: Fn(&SeedPath) -> ProcessSample + Sync,
{
    fn sample(&self, seed: &SeedPath) -> ProcessSample {
        self(seed)
    }
}

/// Decorated Poisson process with a fixed observation window.
#[derive(Clone, Debug)]
pub struct Dppp {
    pub c: f64,
    pub decoration: Arc<DecorationSpec>,
    pub observe_low: f64,
}

impl Dppp {
    pub fn new(c: f64, decoration: DecorationSpec, observe_low: f64) -> Result<Self> {
        check_rate(c)?;
        check_window(c, observe_low)?;
        decoration.validate()?;
        Ok(Dppp {
            c,
            decoration: Arc::new(decoration),
            observe_low,
        })
    }

    pub fn ppp(c: f64, observe_low: f64) -> Result<Self> {
        Dppp::new(c, DecorationSpec::Dirac, observe_low)
    }
}

impl Sampler for Dppp {
    fn sample(&self, seed: &SeedPath) -> ProcessSample {
        ProcessSample {
            config: Configuration::from_sorted(
                dppp_points(self.c, &self.decoration, self.observe_low, seed),
                self.observe_low,
            ),
            atom_tail: Some(AtomTail {
                c: self.c,
                atom_low: self.observe_low,
                shift: 0.0,
                decoration: Arc::clone(&self.decoration),
            }),
        }
    }
}

/// Randomly shifted decorated Poisson process with a fixed observation window.
#[derive(Clone, Debug)]
pub struct Sdppp {
    pub c: f64,
    pub decoration: Arc<DecorationSpec>,
    pub shift: ShiftSpec,
    pub observe_low: f64,
}

impl Sdppp {
    pub fn new(
        c: f64,
        decoration: DecorationSpec,
        shift: ShiftSpec,
        observe_low: f64,
    ) -> Result<Self> {
        check_rate(c)?;
        check_window(c, observe_low)?;
        decoration.validate()?;
        shift.validate()?;
        Ok(Sdppp {
            c,
            decoration: Arc::new(decoration),
            shift,
            observe_low,
        })
    }

    fn draw_shift(&self, seed: &SeedPath) -> f64 {
        match self.shift {
            ShiftSpec::None => 0.0,
            ShiftSpec::Constant { z } => z,
            _ => self.shift.sample_with(&mut seed.child_rng(SHIFT_STREAM)),
        }
    }

    fn sample_with_shift(&self, seed: &SeedPath, s: f64) -> ProcessSample {
        // A shift pushing the atom window beyond the budget is clamped; the
        // probability of such shifts is negligible for the supported laws.
        let floor = -(self.c * MAX_EXPECTED_ATOMS).ln() / self.c;
        let low = (self.observe_low - s).max(floor);
        let pts = dppp_points(self.c, &self.decoration, low, seed);
        let config = if s == 0.0 {
            Configuration::from_sorted(pts, self.observe_low)
        } else {
            let window = if low > floor {
                self.observe_low
            } else {
                self.observe_low.max(low + s)
            };
            Configuration::from_sorted(pts.into_iter().map(|x| x + s).collect(), window)
        };
        ProcessSample {
            config,
            atom_tail: Some(AtomTail {
                c: self.c,
                atom_low: low,
                shift: s,
                decoration: Arc::clone(&self.decoration),
            }),
        }
    }
}

impl Sampler for Sdppp {
    fn sample(&self, seed: &SeedPath) -> ProcessSample {
        let s = self.draw_shift(seed);
        self.sample_with_shift(seed, s)
    }
}

/// Process description as read from a JSON run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessConfig {
    pub c: f64,
    #[serde(default = "dirac")]
    pub decoration: DecorationSpec,
    #[serde(default)]
    pub shift: ShiftSpec,
    pub observe_low: f64,
}

fn dirac() -> DecorationSpec {
    DecorationSpec::Dirac
}

impl ProcessConfig {
    pub fn sampler(&self) -> Result<Sdppp> {
        Sdppp::new(
            self.c,
            self.decoration.clone(),
            self.shift.clone(),
            self.observe_low,
        )
    }

    pub fn with_observe_low(&self, observe_low: f64) -> Self {
        ProcessConfig {
            observe_low,
            ..self.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZBetaShift {
    /// `c₂⁻¹ log Σ e^{c₂ x_i}` over the sampled atoms.
    pub value: f64,
    /// Same, with the mean of the dropped atoms' contribution added inside the log.
    pub compensated: f64,
    /// `E Σ_{x_i < L} e^{c₂ x_i} = e^{(c₂-c₁)L} / (c₂ - c₁)`.
    pub tail_mean: f64,
    pub n_atoms: usize,
}

/// Atom window `L` for which the standard deviation of the dropped part
/// `Σ_{x_i < L} e^{c₂ x_i}`, namely `√(e^{(2c₂-c₁)L} / (2c₂-c₁))`, equals `tol`.
pub fn zbeta_atom_low(c1: f64, c2: f64, tol: f64) -> Result<f64> {
    if !(c1 > 0.0 && c2 > c1) {
        return Err(invalid("need c2 > c1 > 0"));
    }
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let k = 2.0 * c2 - c1;
    Ok((tol * tol * k).ln() / k)
}

/// `c₂⁻¹ log Σ e^{c₂ x_i}` for `x` drawn from `PPP(e^{-c₁ x} dx)` on `[atom_low, ∞)`.
pub fn sample_zbeta_shift(c1: f64, c2: f64, atom_low: f64, seed: &SeedPath) -> Result<ZBetaShift> {
    check_rate(c1)?;
    if !(c2 > c1) {
        return Err(invalid(format!(
            "need c2 > c1 for a finite sum, got c1 = {c1}, c2 = {c2}"
        )));
    }
    check_window(c1, atom_low)?;
    let mass = (-c1 * atom_low).exp() / c1;
    let tail_mean = ((c2 - c1) * atom_low).exp() / (c2 - c1);
    let ratio = c2 / c1;
    let mut rng = seed.rng();
    let mut arrival = 0.0;
    let mut first = 0.0;
    let mut rel_sum = 0.0;
    let mut n = 0usize;
    loop {
        let e: f64 = Exp1.sample(&mut rng);
        arrival += e;
        if arrival > mass {
            break;
        }
        if n == 0 {
            first = arrival;
        }
        // e^{c₂(x_k - x_1)} = (Γ_k / Γ_1)^{-c₂/c₁}
        rel_sum += (arrival / first).powf(-ratio);
        n += 1;
    }
    if n == 0 {
        return Ok(ZBetaShift {
            value: f64::NEG_INFINITY,
            compensated: tail_mean.ln() / c2,
            tail_mean,
            n_atoms: 0,
        });
    }
    let top = -(c1 * first).ln() / c1;
    let value = top + rel_sum.ln() / c2;
    let compensated = top + (rel_sum + tail_mean * (-c2 * top).exp()).ln() / c2;
    Ok(ZBetaShift {
        value,
        compensated,
        tail_mean,
        n_atoms: n,
    })
}
