//! Command implementations. Each is a pure function of the resolved
//! configuration and seed.

use std::io::Write;

use dpplab::analytic::{converse_shift_for, QuadratureSpec};
use dpplab::bbm::{m_t, partition_waves, BbmParams, DEFAULT_MAX_PARTICLES};
use dpplab::extract::{extract_pairs, ExtractionParams};
use dpplab::laplace::{estimate_curve, fit_gumbel, LaplaceCurve};
use dpplab::samplers::{DecorationSpec, ProcessConfig, Sampler, ShiftSpec};
use dpplab::stats::VerificationReport;
use dpplab::suite::{run_all, run_check, CheckOptions, DEFAULT_SEED};
use dpplab::{SeedPath, TestFunction};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{GridSpec, OutputOptions, RunConfig};
use crate::output::{ensure_writable, open, sidecar_path, write_json};
use crate::CliError;

const SAMPLE_CHUNK: usize = 4096;

fn seed_of(cfg: &mut RunConfig) -> SeedPath {
    SeedPath::new(*cfg.seed.get_or_insert(DEFAULT_SEED))
}

/// Fills process keys with defaults; `observe_low` defaults to `low`.
fn process(cfg: &mut RunConfig, low: f64) -> ProcessConfig {
    ProcessConfig {
        c: *cfg.c.get_or_insert(1.0),
        decoration: cfg.decoration.get_or_insert(DecorationSpec::Dirac).clone(),
        shift: cfg.shift.get_or_insert(ShiftSpec::None).clone(),
        observe_low: *cfg.observe_low.get_or_insert(low),
    }
}

fn header(command: &str, cfg: &RunConfig) -> Value {
    json!({ "command": command, "config": cfg, "seed": cfg.seed })
}

fn write_line<T: Serialize>(w: &mut dyn Write, value: &T) -> Result<(), CliError> {
    serde_json::to_writer(&mut *w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Newline-delimited JSON: a header line, then one configuration per line.
pub fn sample(mut cfg: RunConfig, out: &OutputOptions) -> Result<bool, CliError> {
    let seed = seed_of(&mut cfg);
    let n = *cfg.n.get_or_insert(10);
    let sampler = process(&mut cfg, 0.0).sampler()?;
    let mut w = open(out)?;
    write_line(&mut *w, &header("sample", &cfg))?;
    for start in (0..n).step_by(SAMPLE_CHUNK) {
        let end = (start + SAMPLE_CHUNK).min(n);
        let lines: Vec<Value> = (start..end)
            .into_par_iter()
            .map(|i| {
                let s = sampler.sample(&seed.child(i as u64));
                json!({ "index": i, "points": s.config.points(), "window_low": s.config.window_low() })
            })
            .collect();
        for line in &lines {
            write_line(&mut *w, line)?;
        }
    }
    w.flush()?;
    Ok(true)
}

fn default_grid(cfg: &mut RunConfig) -> Vec<f64> {
    cfg.grid
        .get_or_insert(GridSpec {
            lo: -3.0,
            hi: 6.0,
            n: 91,
        })
        .points()
}

/// Estimates `L[f](y)` over the grid for the configured process.
fn curve_for(cfg: &mut RunConfig) -> Result<(LaplaceCurve, ProcessConfig, TestFunction), CliError> {
    let grid = default_grid(cfg);
    let f = cfg.f.get_or_insert(TestFunction::MaxFunctional).clone();
    let n_reps = *cfg.n_reps.get_or_insert(10_000);
    let seed = seed_of(cfg);
    let low = f.support_low();
    let window = if low.is_finite() {
        grid[0] + low
    } else {
        grid[0]
    };
    let pc = process(cfg, window);
    let curve = estimate_curve(&pc.sampler()?, &f, &grid, n_reps, &seed)?;
    Ok((curve, pc, f))
}

/// CSV `(y, value, se)` plus JSON metadata next to the output file.
pub fn curve(mut cfg: RunConfig, out: &OutputOptions) -> Result<bool, CliError> {
    if let Some(p) = &out.out {
        ensure_writable(p, out.force)?;
        ensure_writable(&sidecar_path(p), out.force)?;
    }
    let (curve, _, _) = curve_for(&mut cfg)?;
    let mut w = csv::Writer::from_writer(open(out)?);
    w.write_record(["y", "value", "se"])?;
    for ((y, v), se) in curve.grid.iter().zip(&curve.values).zip(&curve.ses) {
        w.write_record([y.to_string(), v.to_string(), se.to_string()])?;
    }
    w.flush()?;
    if let Some(p) = &out.out {
        let mut meta = header("curve", &cfg);
        meta["f"] = json!(curve.f_descriptor);
        meta["n_reps"] = json!(curve.n_reps);
        meta["max_se"] = json!(curve.max_se());
        meta["monotonicity_violation"] = json!(curve.monotonicity_violation());
        write_json(&sidecar_path(p), &meta)?;
    }
    Ok(true)
}

/// Fits the curve to `Gum(c ·)`; reports the quadrature shift alongside when
/// the process is unshifted.
pub fn tau_fit(mut cfg: RunConfig, out: &OutputOptions) -> Result<bool, CliError> {
    let (curve, pc, f) = curve_for(&mut cfg)?;
    let fit = fit_gumbel(pc.c, &curve)?;
    let mut report = header("tau-fit", &cfg);
    report["fit"] = json!(fit);
    report["within_tolerance"] = json!(fit.within_tolerance());
    if pc.shift == ShiftSpec::None {
        match converse_shift_for(
            &pc.decoration,
            &f,
            pc.c,
            &QuadratureSpec::with_tol(1e-12, 1e-12),
        ) {
            Ok(s) => report["tau_quadrature"] = json!(s.tau),
            Err(e) => report["tau_quadrature_error"] = json!(e.to_string()),
        }
    }
    let mut w = open(out)?;
    serde_json::to_writer_pretty(&mut w, &report)?;
    writeln!(w)?;
    w.flush()?;
    Ok(true)
}

/// Header line with the batch bookkeeping, then `(overshoot, decoration)` lines.
pub fn extract(mut cfg: RunConfig, out: &OutputOptions) -> Result<bool, CliError> {
    let seed = seed_of(&mut cfg);
    let c = *cfg.c.get_or_insert(1.0);
    let y = *cfg.y.get_or_insert(4.0);
    let n = *cfg.n.get_or_insert(1000);
    let radius = cfg
        .decoration
        .get_or_insert(DecorationSpec::Dirac)
        .support_radius();
    let depth = *cfg.window_depth.get_or_insert(radius + 1.0);
    let max_attempts = *cfg.max_attempts.get_or_insert(1 << 32);
    let params = ExtractionParams {
        y,
        window_depth: depth,
        n_accept: n,
        max_attempts,
        c,
    };
    let pc = process(&mut cfg, params.observe_low());
    let sampler = pc.sampler()?;
    let mut w = open(out)?;
    let mut head = header("extract", &cfg);
    if n == 0 {
        ExtractionParams {
            n_accept: 1,
            ..params
        }
        .validate()?;
        write_line(&mut *w, &head)?;
        w.flush()?;
        return Ok(true);
    }
    let (pairs, batch) = extract_pairs(&sampler, &params, &seed)?;
    head["batch"] = json!(batch);
    write_line(&mut *w, &head)?;
    for p in &pairs {
        write_line(
            &mut *w,
            &json!({ "overshoot": p.overshoot, "decoration": p.decoration.points() }),
        )?;
    }
    w.flush()?;
    Ok(true)
}

pub fn verify(check: &str, mut cfg: RunConfig, out: &OutputOptions) -> Result<bool, CliError> {
    let seed = seed_of(&mut cfg);
    let opts = CheckOptions {
        n_reps: cfg.n_reps,
        c: cfg.c,
        y: cfg.y,
        matrix: cfg.matrix,
    };
    if let Some(p) = &out.out {
        ensure_writable(p, out.force)?;
    }
    let report = if check == "all" {
        run_all(&opts, &seed)?
    } else {
        run_check(check, &opts, &seed)?
    };
    let mut value = json!(report);
    value["run_config"] = json!(cfg);
    let mut w = open(out)?;
    serde_json::to_writer_pretty(&mut w, &value)?;
    writeln!(w)?;
    w.flush()?;
    summarize(&report);
    Ok(report.pass)
}

fn summarize(report: &VerificationReport) {
    let verdict = if report.pass { "PASS" } else { "FAIL" };
    eprintln!("{}: {verdict}", report.check);
    for f in report.failed_criteria() {
        eprintln!("  failed: {f}");
    }
}

/// CSV `(beta, y, g_hat, se)` of median-centered waves plus JSON metadata.
pub fn bbm_wave(mut cfg: RunConfig, out: &OutputOptions) -> Result<bool, CliError> {
    if let Some(p) = &out.out {
        ensure_writable(p, out.force)?;
        ensure_writable(&sidecar_path(p), out.force)?;
    }
    let seed = seed_of(&mut cfg);
    let params = BbmParams {
        t: *cfg.t.get_or_insert(8.0),
        max_particles: *cfg.max_particles.get_or_insert(DEFAULT_MAX_PARTICLES),
    };
    let betas = cfg.betas.get_or_insert_with(|| vec![2.0, 3.0]).clone();
    let grid = cfg
        .grid
        .get_or_insert(GridSpec {
            lo: -4.0,
            hi: 4.0,
            n: 161,
        })
        .points();
    let n_reps = *cfg.n_reps.get_or_insert(20_000);
    let waves = partition_waves(&params, &betas, &grid, n_reps, &seed)?;
    let mut w = csv::Writer::from_writer(open(out)?);
    w.write_record(["beta", "y", "g_hat", "se"])?;
    for wave in &waves {
        let c = &wave.centered;
        for ((y, v), se) in c.grid.iter().zip(&c.values).zip(&c.ses) {
            w.write_record([
                wave.beta.to_string(),
                y.to_string(),
                v.to_string(),
                se.to_string(),
            ])?;
        }
    }
    w.flush()?;
    if let Some(p) = &out.out {
        let mut meta = header("bbm wave", &cfg);
        meta["m_t"] = json!(if params.t >= 1.0 { m_t(params.t) } else { 0.0 });
        meta["median_shift"] = json!(waves
            .iter()
            .map(|w| (w.beta.to_string(), json!(w.median_shift)))
            .collect::<serde_json::Map<_, _>>());
        write_json(&sidecar_path(p), &meta)?;
    }
    Ok(true)
}
