use dpplab::analytic::{converse_shift_for, freezing_tau, ln_gamma, QuadratureSpec};
use dpplab::extract::{check_independence, ExtractionParams};
use dpplab::laplace::{estimate_curve, fit_gumbel, linear_grid};
use dpplab::samplers::{
    sample_ppp_exp, DecorationSpec, Dppp, ProcessSample, Sampler, Sdppp, ShiftSpec,
};
use dpplab::stats::{ks_two_sample, ks_two_sample_threshold, pearson, VerificationReport};
use dpplab::{Interval, PointConfiguration, SeedPath, TestFunction};
use proptest::prelude::*;

fn quad() -> QuadratureSpec<f64> {
    QuadratureSpec::with_tol(1e-12, 1e-12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn converse_shift_moves_with_the_test_function(s in -2.0f64..2.0, c in 0.5f64..3.0) {
        let dec = DecorationSpec::finite_cluster(vec![0.0, -0.7]).unwrap();
        let base = converse_shift_for(&dec, &TestFunction::bump(0.5, 0.5, 1.0), c, &quad()).unwrap();
        let moved = converse_shift_for(&dec, &TestFunction::bump(0.5 + s, 0.5, 1.0), c, &quad()).unwrap();
        prop_assert!((moved.tau - base.tau + s).abs() < 1e-8);
    }

    #[test]
    fn ppp_freezing_shift_has_closed_form(c in 0.5f64..2.0, ratio in 1.2f64..20.0) {
        let beta = c * ratio;
        let tau = freezing_tau(c, beta, &DecorationSpec::Dirac).unwrap();
        let want = (ln_gamma(1.0 - c / beta) - c.ln()) / c;
        prop_assert!((tau - want).abs() < 1e-10);
    }

    #[test]
    fn sampling_is_a_function_of_the_seed(master in any::<u64>(), i in 0u64..1000) {
        let s = Dppp::new(1.0, DecorationSpec::geometric_cluster(0.5, 2.0, 3.0).unwrap(), -1.0).unwrap();
        let seed = SeedPath::new(master).child(i);
        prop_assert_eq!(s.sample(&seed).config, s.sample(&seed).config);
    }
}

#[test]
fn restriction_does_not_depend_on_the_window() {
    // Counts above 0.5 from windows starting at -1 and at 0.5.
    let dec = DecorationSpec::finite_cluster(vec![0.0, -0.3, -1.1]).unwrap();
    let deep = Dppp::new(1.0, dec.clone(), -1.0).unwrap();
    let shallow = Dppp::new(1.0, dec, 0.5).unwrap();
    let above = Interval::open(0.5, f64::INFINITY);
    let count = |s: &Dppp, seed: SeedPath| -> Vec<f64> {
        (0..20_000u64)
            .map(|i| s.sample(&seed.child(i)).config.count_in(&above).value as f64)
            .collect()
    };
    let ks = ks_two_sample(
        &count(&deep, SeedPath::new(1)),
        &count(&shallow, SeedPath::new(2)),
    )
    .unwrap();
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn superposed_thinned_copies_are_the_original_process() {
    let (a, b) = (0.25f64.ln(), 0.75f64.ln());
    let n = 100_000u64;
    let low = -1.0;
    let censor = |m: f64| m.max(low);
    let merged: Vec<f64> = (0..n)
        .map(|i| {
            let s = SeedPath::new(5).child(i);
            let x = sample_ppp_exp(1.0, low - a, &s.child(0)).unwrap().shift(a);
            let y = sample_ppp_exp(1.0, low - b, &s.child(1)).unwrap().shift(b);
            censor(x.superpose(&y).maximum())
        })
        .collect();
    let direct: Vec<f64> = (0..n)
        .map(|i| {
            censor(
                sample_ppp_exp(1.0, low, &SeedPath::new(6).child(i))
                    .unwrap()
                    .maximum(),
            )
        })
        .collect();
    let ks = ks_two_sample(&merged, &direct).unwrap();
    assert!(ks.statistic <= 0.02);
    assert!(
        ks.statistic <= ks_two_sample_threshold(n as usize, n as usize),
        "{ks:?}"
    );
}

#[test]
fn replicate_streams_are_uncorrelated() {
    let s = Dppp::ppp(1.0, -2.0).unwrap();
    let seed = SeedPath::new(11);
    let counts: Vec<f64> = (0..20_001u64)
        .map(|i| s.sample(&seed.child(i)).config.len() as f64)
        .collect();
    let r = pearson(&counts[..20_000], &counts[1..]).unwrap();
    assert!(
        r.abs() < 4.0 / (20_000f64).sqrt(),
        "lag-one correlation {r}"
    );
}

#[test]
fn constant_shift_adds_to_the_fitted_shift() {
    let dec = DecorationSpec::finite_cluster(vec![0.0, -0.3, -1.1]).unwrap();
    let f = TestFunction::indicator(Interval::open(0.0, 1.0), 2.0);
    let grid = linear_grid(-3.0, 6.0, 91);
    let z = 0.4;
    let sampler = Sdppp::new(1.0, dec.clone(), ShiftSpec::Constant { z }, -3.0).unwrap();
    let curve = estimate_curve(&sampler, &f, &grid, 20_000, &SeedPath::new(4)).unwrap();
    let fit = fit_gumbel(1.0, &curve).unwrap();
    let exact = converse_shift_for(&dec, &f, 1.0, &quad()).unwrap().tau + z;
    assert!(fit.within_tolerance(), "{fit:?}");
    assert!(
        (fit.tau - exact).abs() <= 3.0 * fit.se,
        "{fit:?} vs {exact}"
    );
}

#[test]
fn height_dependent_decorations_fail_independence() {
    let params = ExtractionParams {
        y: 4.0,
        window_depth: 2.5,
        n_accept: 1000,
        max_attempts: 1 << 32,
        c: 1.0,
    };
    let low = params.observe_low();
    let sampler = move |s: &SeedPath| {
        let atoms = sample_ppp_exp(1.0, low, s).unwrap();
        let mut pts = Vec::new();
        for &a in atoms.points() {
            pts.push(a);
            let extra = ((4.0 * (a - 4.0)).floor().max(0.0) as usize).min(6);
            pts.extend((1..=extra).map(|j| a - 0.2 * j as f64));
        }
        ProcessSample::from(PointConfiguration::new(pts, low).unwrap())
    };
    let r = check_independence(&sampler, &params, |d| d.len() as f64, &SeedPath::new(8)).unwrap();
    assert!(!r.pass);
}

#[test]
fn reports_round_trip_through_json() {
    let mut r = VerificationReport::new("demo", &SeedPath::new(3).child(2));
    r.at_most("x", 0.1, 0.2);
    r.stat("y", 1.5);
    let back: VerificationReport =
        serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(back, r);
}
