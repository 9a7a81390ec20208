//! Named verification checks with their default parameters.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analytic::{
    converse_shift_for, freezing_tau, gum_conv_gumprime, gumbel_scale_relation, gumbel_sum_cdf,
    QuadratureSpec,
};
use crate::bbm::{bbm_wave_check, tail_mass_diagnostic, BbmParams};
use crate::error::{Error, Result};
use crate::extract::{check_independence, overshoot_check, roundtrip_check, ExtractionParams};
use crate::laplace::{
    check_freezing, check_unique_support, estimate_curve, estimate_curves, fit_gumbel,
    freezing_window, linear_grid, SupportReference,
};
use crate::point::{Configuration, Interval};
use crate::samplers::{
    sample_ppp_exp, DecorationSpec, Dppp, ProcessSample, Sampler, Sdppp, ShiftSpec,
};
use crate::seed::SeedPath;
use crate::stats::{
    exp_stability_check, ks_one_sample, lln_check, ExpStabilityParams, LlnParams,
    VerificationReport,
};
use crate::test_function::TestFunction;

pub const CHECK_NAMES: [&str; 11] = [
    "unique-support",
    "freezing",
    "eq31",
    "overshoot",
    "roundtrip",
    "independence",
    "lln",
    "exp-stability",
    "gumbel-identity",
    "scale-relation",
    "bbm-wave",
];

pub const DEFAULT_SEED: u64 = 20_240_531;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Matrix {
    #[default]
    Default,
    /// One decoration and two test functions per rate.
    Small,
}

impl std::str::FromStr for Matrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(Matrix::Default),
            "small" => Ok(Matrix::Small),
            _ => Err(crate::error::invalid(format!(
                "unknown matrix `{s}` (default | small)"
            ))),
        }
    }
}

/// Overrides of the default parameters; absent fields keep the defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckOptions {
    #[serde(default)]
    pub n_reps: Option<usize>,
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub y: Option<f64>,
    #[serde(default)]
    pub matrix: Option<Matrix>,
}

pub fn run_check(name: &str, opts: &CheckOptions, seed: &SeedPath) -> Result<VerificationReport> {
    let mut report = match name {
        "unique-support" => unique_support(opts, seed),
        "freezing" => freezing(opts, seed),
        "eq31" => eq31(opts, seed),
        "overshoot" => overshoot(opts, seed),
        "roundtrip" => roundtrip(opts, seed),
        "independence" => independence(opts, seed),
        "lln" => lln(opts, seed),
        "exp-stability" => exp_stability(opts, seed),
        "gumbel-identity" => gumbel_identity(opts, seed),
        "scale-relation" => scale_relation(opts, seed),
        "bbm-wave" => bbm_wave(opts, seed),
        _ => return Err(Error::UnknownCheck(name.to_string())),
    }?;
    report.check = name.to_string();
    Ok(report)
}

/// Every check in [`CHECK_NAMES`]; passes when all of them pass.
pub fn run_all(opts: &CheckOptions, seed: &SeedPath) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("all", seed);
    for name in CHECK_NAMES {
        let part = run_check(name, opts, seed)?;
        report.holds(name, part.pass);
        report.add_part(part);
    }
    Ok(report)
}

fn quad() -> QuadratureSpec<f64> {
    QuadratureSpec::with_tol(1e-12, 1e-12)
}

fn cluster(offsets: &[f64]) -> DecorationSpec {
    DecorationSpec::finite_cluster(offsets.to_vec()).expect("valid offsets")
}

fn geometric() -> DecorationSpec {
    DecorationSpec::geometric_cluster(0.5, 2.0, 3.0).expect("valid geometric cluster")
}

fn empirical() -> DecorationSpec {
    let cfg = |p: &[f64]| Configuration::new(p.to_vec(), -1.0).expect("finite points");
    DecorationSpec::empirical(vec![
        cfg(&[0.0]),
        cfg(&[-0.5, 0.0]),
        cfg(&[-0.9, -0.2, 0.0]),
    ])
    .expect("valid sample")
}

fn label(spec: &DecorationSpec) -> String {
    match spec {
        DecorationSpec::Dirac => "dirac".into(),
        DecorationSpec::FiniteCluster { offsets } => format!("finite_cluster{offsets:?}"),
        DecorationSpec::GeometricCluster {
            p,
            gap_rate,
            radius,
        } => format!("geometric({p},{gap_rate},{radius})"),
        DecorationSpec::Empirical { samples } => format!("empirical({})", samples.len()),
    }
}

fn boxed<S: Sampler + 'static>(s: S) -> Box<dyn Sampler> {
    Box::new(s)
}

// Converse shift formula against Monte Carlo translation fits.

fn eq31_functions(matrix: Matrix) -> Vec<TestFunction> {
    let all = vec![
        TestFunction::MaxFunctional,
        TestFunction::indicator(Interval::open(0.0, 1.0), f64::INFINITY),
        TestFunction::bump(0.5, 0.5, 1.0),
        TestFunction::indicator(Interval::open(0.0, 0.6), 2.0),
        TestFunction::sum(vec![
            TestFunction::bump(0.3, 0.3, 1.0),
            TestFunction::bump(1.5, 0.5, 2.0),
        ]),
    ];
    match matrix {
        Matrix::Default => all,
        Matrix::Small => all.into_iter().skip(1).take(2).collect(),
    }
}

fn eq31_decorations(matrix: Matrix) -> Vec<DecorationSpec> {
    match matrix {
        Matrix::Default => vec![
            DecorationSpec::Dirac,
            cluster(&[0.0, -0.7]),
            cluster(&[0.0, -0.3, -1.1]),
            empirical(),
        ],
        Matrix::Small => vec![cluster(&[0.0, -0.7])],
    }
}

pub fn eq31(opts: &CheckOptions, seed: &SeedPath) -> Result<VerificationReport> {
    let n = opts.n_reps.unwrap_or(100_000);
    let matrix = opts.matrix.unwrap_or_default();
    let cs = opts.c.map_or(vec![1.0, 2.0], |c| vec![c]);
    let fs = eq31_functions(matrix);
    let mut report = VerificationReport::new("eq31", seed);
    for (ci, &c) in cs.iter().enumerate() {
        let grid = linear_grid(-5.0 / c, 7.0 / c, 121);
        for (k, dec) in eq31_decorations(matrix).into_iter().enumerate() {
            let sampler = Dppp::new(c, dec.clone(), grid[0])?;
            let curves = estimate_curves(
                &sampler,
                &fs,
                &grid,
                n,
                &seed.child(ci as u64).child(k as u64),
            )?;
            report.n_samples += n as u64;
            for (f, curve) in fs.iter().zip(&curves) {
                let exact = converse_shift_for(&dec, f, c, &quad())?;
                let fit = fit_gumbel(c, curve)?;
                let gap = (exact.tau - fit.tau).abs();
                let name = format!("c={c} {} {}", label(&dec), f.descriptor());
                let pass = report.at_most(name, gap, 3.0 * fit.se);
                report.rows.push(json!({
                    "c": c, "decoration": label(&dec), "f": f.descriptor(),
                    "tau_quadrature": exact.tau, "tau_fit": fit.tau, "se": fit.se,
                    "residual_sup": fit.residual_sup, "pass": pass
                }));
            }
        }
    }
    Ok(report.with_params(json!({ "n_reps": n, "cs": cs, "matrix": matrix })))
}

// Unique support of DPPP and SDPPP laws, with two negative controls.

fn support_functions() -> Vec<TestFunction> {
    vec![
        TestFunction::bump(0.5, 0.5, 1.0),
        TestFunction::indicator(Interval::open(0.0, 1.0), 2.0),
        TestFunction::indicator(Interval::open(0.0, 0.5), 3.0),
        TestFunction::bump(1.0, 1.0, 0.5),
        TestFunction::sum(vec![
            TestFunction::bump(0.3, 0.3, 1.0),
            TestFunction::bump(1.5, 0.5, 2.0),
        ]),
    ]
}

fn mixed_rate_sampler(low: f64) -> impl Sampler {
    move |s: &SeedPath| {
        let a = sample_ppp_exp(1.0, low, &s.child(1)).expect("valid window");
        let b = sample_ppp_exp(2.0, low, &s.child(2)).expect("valid window");
        ProcessSample::from(a.superpose(&b))
    }
}

pub fn unique_support(opts: &CheckOptions, seed: &SeedPath) -> Result<VerificationReport> {
    let n = opts.n_reps.unwrap_or(20_000);
    let c = opts.c.unwrap_or(1.0);
    let grid = linear_grid(-3.0 / c, 6.0 / c, 91);
    let low = grid[0];
    let fs = support_functions();
    let positives: Vec<(&str, Box<dyn Sampler>)> = vec![
        (
            "dppp finite_cluster[0,-0.7]",
            boxed(Dppp::new(c, cluster(&[0.0, -0.7]), low)?),
        ),
        (
            "dppp geometric(0.5,2,3)",
            boxed(Dppp::new(c, geometric(), low)?),
        ),
        (
            "sdppp finite_cluster[0,-0.3,-1.1] normal(0,0.5)",
            boxed(Sdppp::new(
                c,
                cluster(&[0.0, -0.3, -1.1]),
                ShiftSpec::Normal { mean: 0.0, sd: 0.5 },
                low,
            )?),
        ),
    ];
    let mut report = VerificationReport::new("unique-support", seed);
    for (k, (name, sampler)) in positives.iter().enumerate() {
        let mut part = check_unique_support(
            sampler.as_ref(),
            &fs,
            &SupportReference::Max,
            &grid,
            n,
            &seed.child(k as u64),
        )?;
        part.check = name.to_string();
        report.add_part(part);
    }

    let mixed_fs = [
        TestFunction::indicator(Interval::open(0.0, 0.2), 4.0),
        TestFunction::bump(1.5, 1.5, 0.3),
    ];
    let grid_mixed = linear_grid(-3.0, 6.0, 91);
    let part = check_unique_support(
        &mixed_rate_sampler(grid_mixed[0]),
        &mixed_fs,
        &SupportReference::Max,
        &grid_mixed,
        n,
        &seed.child(10),
    )?;
    report.add_control("ppp(1) + ppp(2)", part);

    let single = |_: &SeedPath| {
        ProcessSample::from(Configuration::new(vec![0.0], f64::NEG_INFINITY).expect("finite"))
    };
    let grid_det = linear_grid(-2.0, 2.0, 81);
    let reference = estimate_curve(
        &single,
        &TestFunction::bump(0.0, 1.0, 2.0),
        &grid_det,
        100,
        &seed.child(11),
    )?;
    let two = TestFunction::sum(vec![
        TestFunction::bump(-0.5, 0.3, 2.0),
        TestFunction::bump(0.5, 0.3, 2.0),
    ]);
    let part = check_unique_support(
        &single,
        &[two],
        &SupportReference::Curve(reference),
        &grid_det,
        100,
        &seed.child(11),
    )?;
    report.add_control("deterministic {0}", part);
    Ok(report.with_params(json!({ "n_reps": n, "c": c, "grid_points": grid.len() })))
}

// Freezing of exponential test functions.

pub fn freezing(opts: &CheckOptions, seed: &SeedPath) -> Result<VerificationReport> {
    let n = opts.n_reps.unwrap_or(20_000);
    let c = opts.c.unwrap_or(1.0);
    let betas = [1.5 * c, 2.0 * c, 3.0 * c, 40.0 * c];
    let grid = linear_grid(-1.5 / c, 5.5 / c, 141);
    let mut report = VerificationReport::new("freezing", seed);
    for (k, dec) in [DecorationSpec::Dirac, cluster(&[0.0, -0.7])]
        .into_iter()
        .enumerate()
    {
        let window = freezing_window(c, &betas, grid[0], dec.max_count(), 1e-6)?;
        let sampler = Dppp::new(c, dec.clone(), window)?;
        let mut part = check_freezing(&sampler, c, &betas, &grid, n, &seed.child(k as u64))?;
        part.check = label(&dec);
        part.stat("observe_low", window);
        let beta2 = 2.0 * c;
        let want = freezing_tau(c, beta2, &dec)?;
        let got = part
            .statistics
            .get(&format!("tau_gumbel[{beta2}]"))
            .copied()
            .unwrap_or(f64::NAN);
        let se = part
            .statistics
            .get(&format!("tau_gumbel_se[{beta2}]"))
            .copied()
            .unwrap_or(f64::NAN);
        part.stat(format!("tau_closed_form[{beta2}]"), want);
        part.at_most(
            format!("tau_matches_closed_form[{beta2}]"),
            (got - want).abs(),
            3.0 * se,
        );
        for &b in &betas {
            if let Ok(t) = freezing_tau(c, b, &dec) {
                part.stat(format!("tau_closed_form[{b}]"), t);
            }
        }
        report.add_part(part);
    }
    Ok(report
        .with_params(json!({ "n_reps": n, "c": c, "betas": betas, "grid_points": grid.len() })))
}

// Extraction checks.

pub fn overshoot(opts: &CheckOptions, seed: &SeedPath) -> Result<VerificationReport> {
    let n = opts.n_reps.unwrap_or(10_000);
    let y = opts.y.unwrap_or(4.0);
    let cases = match opts.c {
        Some(c) => vec![(c, DecorationSpec::Dirac)],
        None => vec![(1.0, DecorationSpec::Dirac), (2.0, cluster(&[0.0, -0.5]))],
    };
    let mut report = VerificationReport::new("overshoot", seed);
    for (k, (c, dec)) in cases.into_iter().enumerate() {
        let params = ExtractionParams::for_decoration(c, y, &dec, n);
        let sampler = Dppp::new(c, dec.clone(), params.observe_low())?;
        let mut part = overshoot_check(&sampler, &params, &seed.child(k as u64))?;
        part.check = format!("c={c} {}", label(&dec));
        report.add_part(part);
    }
    Ok(report.with_params(json!({ "n_accept": n, "y": y })))
}

pub fn roundtrip(opts: &CheckOptions, seed: &SeedPath) -> Result<VerificationReport> {
    let n = opts.n_reps.unwrap_or(10_000);
    let c = opts.c.unwrap_or(1.0);
    let y = opts.y.unwrap_or(6.0);
    let mut report = VerificationReport::new("roundtrip", seed);
    for (k, dec) in [DecorationSpec::Dirac, cluster(&[0.0, -0.7]), geometric()]
        .into_iter()
        .enumerate()
    {
        let params = ExtractionParams::for_decoration(c, y, &dec, n);
        let mut part = roundtrip_check(&dec, c, &params, &seed.child(k as u64))?;
        part.check = label(&dec);
        report.add_part(part);
    }
    Ok(report.with_params(json!({ "n_accept": n, "c": c, "y": y })))
}

/// Decoration size grows with the height of its atom above `level`.
fn height_dependent_sampler(c: f64, low: f64, level: f64) -> impl Sampler {
    move |s: &SeedPath| {
        let atoms = sample_ppp_exp(c, low, s).expect("valid window");
        let mut pts = Vec::with_capacity(atoms.len() * 2);
        for &a in atoms.points() {
            pts.push(a);
            let extra = ((4.0 * (a - level)).floor().max(0.0) as usize).min(6);
            pts.extend((1..=extra).map(|j| a - 0.2 * j as f64));
        }
        ProcessSample::from(Configuration::new(pts, low).expect("finite points"))
    }
}

pub fn independence(opts: &CheckOptions, seed: &SeedPath) -> Result<VerificationReport> {
    let n = opts.n_reps.unwrap_or(10_000);
    let c = opts.c.unwrap_or(1.0);
    let y = opts.y.unwrap_or(8.0);
    let mut report = VerificationReport::new("independence", seed);
    for (k, dec) in [DecorationSpec::Dirac, geometric()].into_iter().enumerate() {
        let params = ExtractionParams::for_decoration(c, y, &dec, n);
        let sampler = Dppp::new(c, dec.clone(), params.observe_low())?;
        // Points within the decoration radius.
        let support = Interval::closed(-dec.support_radius(), 0.0);
        let count = |d: &Configuration<f64>| d.count_in(&support).value as f64;
        let mut part = check_independence(&sampler, &params, count, &seed.child(k as u64))?;
        part.check = label(&dec);
        report.add_part(part);
    }
    let params = ExtractionParams {
        y: 4.0,
        window_depth: 2.5,
        n_accept: n.min(2000),
        max_attempts: 1 << 32,
        c,
    };
    let sampler = height_dependent_sampler(c, params.observe_low(), params.y);
    let count = |d: &Configuration<f64>| d.len() as f64;
    let part = check_independence(&sampler, &params, count, &seed.child(9))?;
    report.add_control("height-dependent decoration", part);
    Ok(report.with_params(json!({ "n_accept": n, "c": c, "y": y })))
}

// Stats verdicts.

pub fn lln(opts: &CheckOptions, seed: &SeedPath) -> Result<VerificationReport> {
    let n = opts.n_reps.unwrap_or(1000);
    let c = opts.c.unwrap_or(1.0);
    let y = opts.y.unwrap_or(8.0);
    let mut report = VerificationReport::new("lln", seed);
    for (k, dec) in [cluster(&[0.0, -(2f64.ln())]), geometric()]
        .into_iter()
        .enumerate()
    {
        let params = LlnParams {
            c,
            decoration: dec.clone(),
            ys: vec![y / 2.0, 0.75 * y, y],
            n_reps: n,
        };
        let mut part = lln_check(&params, &seed.child(k as u64))?;
        part.check = label(&dec);
        report.add_part(part);
    }
    Ok(report.with_params(json!({ "n_reps": n, "c": c, "y": y })))
}

pub fn exp_stability(opts: &CheckOptions, seed: &SeedPath) -> Result<VerificationReport> {
    let n = opts.n_reps.unwrap_or(20_000);
    let c = opts.c.unwrap_or(1.0);
    let pairs: Vec<(f64, f64)> = [(0.5, 0.5), (0.25, 0.75), (0.1, 0.9)]
        .iter()
        .map(|&(p, q): &(f64, f64)| (p.ln() / c, q.ln() / c))
        .collect();
    let params = ExpStabilityParams {
        c,
        pairs,
        fs: vec![
            TestFunction::bump(0.5, 0.5, 1.0),
            TestFunction::indicator(Interval::open(0.0, 1.0), 2.0),
        ],
        grid: linear_grid(-2.0 / c, 5.0 / c, 71),
        n_reps: n,
        observe_low: -2.0 / c,
    };
    let mut report = VerificationReport::new("exp-stability", seed);
    let fc = cluster(&[0.0, -0.7]);
    let cases: Vec<(String, DecorationSpec, ShiftSpec, bool)> = vec![
        ("ppp".into(), DecorationSpec::Dirac, ShiftSpec::None, true),
        (format!("dppp {}", label(&fc)), fc, ShiftSpec::None, true),
        (
            "sdppp normal(0,1)".into(),
            DecorationSpec::Dirac,
            ShiftSpec::Normal { mean: 0.0, sd: 1.0 },
            false,
        ),
    ];
    for (k, (name, dec, shift, should_pass)) in cases.into_iter().enumerate() {
        let factory = |w: f64| -> Result<Box<dyn Sampler>> {
            Ok(boxed(Sdppp::new(c, dec.clone(), shift.clone(), w)?))
        };
        let mut part = exp_stability_check(factory, &params, &seed.child(k as u64))?;
        if should_pass {
            part.check = name;
            report.add_part(part);
        } else {
            report.add_control(name, part);
        }
    }
    Ok(report.with_params(json!({ "n_reps": n, "c": c, "pairs": params.pairs })))
}

// Analytic identities.

pub fn gumbel_identity(opts: &CheckOptions, seed: &SeedPath) -> Result<VerificationReport> {
    let n = opts.n_reps.unwrap_or(1_000_000);
    let mut report = VerificationReport::new("gumbel-identity", seed);
    let xs = linear_grid(-5.0, 5.0, 201);
    for beta in [1.0, std::f64::consts::SQRT_2] {
        let mut sup = 0.0f64;
        for &x in &xs {
            sup = sup.max(gum_conv_gumprime(x, beta)?.difference.abs());
        }
        report.at_most(format!("sup_difference[{beta}]"), sup, 1e-8);
    }
    let chunks = n.div_ceil(10_000);
    let draws: Vec<f64> = (0..chunks as u64)
        .into_par_iter()
        .flat_map_iter(|k| {
            let mut rng = seed.child_rng(k);
            let m = (n - k as usize * 10_000).min(10_000);
            (0..m)
                .map(move |_| {
                    let mut g = || -(-(1.0 - rng.random::<f64>()).ln()).ln();
                    g() + g()
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let ks = ks_one_sample(&draws, |x| gumbel_sum_cdf(x, 1.0))?;
    report.at_most("ks_sum_of_gumbels", ks.statistic, 0.002);
    report.stat("ks_p_value", ks.p_value);
    report.n_samples = n as u64;
    Ok(report.with_params(json!({ "grid_points": xs.len(), "draws": n })))
}

pub fn scale_relation(opts: &CheckOptions, seed: &SeedPath) -> Result<VerificationReport> {
    let n = opts.n_reps.unwrap_or(100_000);
    let mut report = VerificationReport::new("scale-relation", seed);
    for (k, (c1, c2)) in [(1.0, 2.0), (1.0, 3.0), (2.0, 5.0)].into_iter().enumerate() {
        let r = gumbel_scale_relation(c1, c2, n, 1e-6, &seed.child(k as u64))?;
        report.at_most(format!("sup_deviation[{c1},{c2}]"), r.sup_deviation, 0.01);
        report.at_most(
            format!("tau_oracle_gap[{c1},{c2}]"),
            (r.tau_closed_form - r.tau_quadrature).abs(),
            1e-6,
        );
        report.stat(format!("tau_closed_form[{c1},{c2}]"), r.tau_closed_form);
        report.stat(format!("tau_quadrature[{c1},{c2}]"), r.tau_quadrature);
        report.rows.push(serde_json::to_value(&r).expect("row"));
        report.n_samples += n as u64;
    }
    Ok(report.with_params(json!({ "draws": n })))
}

pub fn bbm_wave(opts: &CheckOptions, seed: &SeedPath) -> Result<VerificationReport> {
    let n = opts.n_reps.unwrap_or(20_000);
    let t = opts.y.unwrap_or(8.0);
    let params = BbmParams::new(t);
    let grid = linear_grid(-4.0, 4.0, 161);
    let mut report = bbm_wave_check(&params, &[2.0, 3.0], &grid, n, &seed.child(0))?;
    let levels = [2.0, 4.0, 6.0, 8.0, 10.0];
    let tail = tail_mass_diagnostic(&params, 2.0, &levels, 0.1, n, &seed.child(1))?;
    let non_increasing = tail.probabilities.windows(2).all(|w| w[1] <= w[0]);
    report.holds("tail_mass_non_increasing", non_increasing);
    report.at_most("tail_mass[10]", tail.probabilities[levels.len() - 1], 0.05);
    for (l, p) in levels.iter().zip(&tail.probabilities) {
        report.stat(format!("tail_mass[{l}]"), *p);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_check() {
        assert!(matches!(
            run_check("nope", &CheckOptions::default(), &SeedPath::new(1)),
            Err(Error::UnknownCheck(_))
        ));
    }

    #[test]
    fn small_eq31_matrix() {
        let opts = CheckOptions {
            n_reps: Some(5000),
            c: Some(1.0),
            matrix: Some(Matrix::Small),
            ..Default::default()
        };
        let r = run_check("eq31", &opts, &SeedPath::new(3)).unwrap();
        assert_eq!(r.check, "eq31");
        assert_eq!(r.rows.len(), 2);
    }

    #[test]
    fn identity_check_passes() {
        let opts = CheckOptions {
            n_reps: Some(50_000),
            ..Default::default()
        };
        let r = run_check("gumbel-identity", &opts, &SeedPath::new(3)).unwrap();
        assert!(r.statistics["ks_p_value"] > 1e-3, "{:?}", r.statistics);
        let failed = r.failed_criteria();
        assert!(
            failed.iter().all(|c| c.ends_with("ks_sum_of_gumbels")),
            "{failed:?}"
        );
    }

    #[test]
    fn options_reject_unknown_keys() {
        assert!(serde_json::from_str::<CheckOptions>(r#"{"n_reps": 10, "bogus": 1}"#).is_err());
        let o: CheckOptions = serde_json::from_str(r#"{"matrix": "small"}"#).unwrap();
        assert_eq!(o.matrix, Some(Matrix::Small));
    }
}
