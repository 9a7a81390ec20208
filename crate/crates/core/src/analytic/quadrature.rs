//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    /// Maximum bisection depth of any subinterval.
    pub max_depth: u32,
}

impl<T: Real> Default for QuadratureSpec<T> {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: T::lit(1e-10),
            rel_tol: T::lit(1e-10),
            max_depth: 40,
        }
    }
}

impl<T: Real> QuadratureSpec<T> {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        QuadratureSpec {
            abs_tol: T::lit(abs_tol),
            rel_tol: T::lit(rel_tol),
            ..Self::default()
        }
    }

    /// Same spec with both tolerances halved.
    pub fn halved(&self) -> Self {
        let half = T::lit(0.5);
        QuadratureSpec {
            abs_tol: self.abs_tol * half,
            rel_tol: self.rel_tol * half,
            max_depth: self.max_depth,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    /// Sum of the local |K15 - G7| estimates.
    pub error: T,
    pub evaluations: usize,
    pub converged: bool,
}

impl<T: Real> std::ops::Add for Quadrature<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Quadrature {
            value: self.value + o.value,
            error: self.error + o.error,
            evaluations: self.evaluations + o.evaluations,
            converged: self.converged && o.converged,
        }
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_SEGMENTS: usize = 20_000;

#[derive(Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
    depth: u32,
}

fn gk15<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let radius = half * (b - a);
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for i in 0..7 {
        let dx = radius * T::lit(XGK[i]);
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + pair * T::lit(WGK[i]);
        if i % 2 == 1 {
            gauss = gauss + pair * T::lit(WG[i / 2]);
        }
    }
    let k = kronrod * radius;
    let g = gauss * radius;
    (k, (k - g).abs())
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    spec: &QuadratureSpec<T>,
) -> Quadrature<T> {
    if a == b {
        return Quadrature {
            value: T::zero(),
            error: T::zero(),
            evaluations: 0,
            converged: true,
        };
    }
    if a > b {
        let q = integrate(f, b, a, spec);
        return Quadrature {
            value: -q.value,
            ..q
        };
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut evaluations = 15;
    let mut active = vec![Segment {
        a,
        b,
        value: v,
        error: e,
        depth: 0,
    }];
    let mut frozen: Vec<Segment<T>> = Vec::new();
    let mut converged = true;
    loop {
        let total: T = active
            .iter()
            .chain(&frozen)
            .fold(T::zero(), |s, g| s + g.value);
        let err: T = active
            .iter()
            .chain(&frozen)
            .fold(T::zero(), |s, g| s + g.error);
        let target = spec.abs_tol.max(spec.rel_tol * total.abs());
        if err <= target || !err.is_finite() && !total.is_finite() {
            break;
        }
        if active.is_empty() || active.len() + frozen.len() >= MAX_SEGMENTS {
            converged = false;
            break;
        }
        let worst = active
            .iter()
            .enumerate()
            .max_by(|x, y| {
                x.1.error
                    .partial_cmp(&y.1.error)
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .map(|(i, _)| i)
            .expect("nonempty");
        let seg = active.swap_remove(worst);
        if seg.depth >= spec.max_depth {
            frozen.push(seg);
            continue;
        }
        let mid = T::lit(0.5) * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) {
            frozen.push(seg);
            continue;
        }
        for (lo, hi) in [(seg.a, mid), (mid, seg.b)] {
            let (v, e) = gk15(&mut f, lo, hi);
            evaluations += 15;
            active.push(Segment {
                a: lo,
                b: hi,
                value: v,
                error: e,
                depth: seg.depth + 1,
            });
        }
    }
    if !frozen.is_empty() {
        let target = spec.abs_tol.max(
            spec.rel_tol
                * active
                    .iter()
                    .chain(&frozen)
                    .fold(T::zero(), |s, g| s + g.value)
                    .abs(),
        );
        let err = active
            .iter()
            .chain(&frozen)
            .fold(T::zero(), |s, g| s + g.error);
        converged = converged && err <= target;
    }
    Quadrature {
        value: active
            .iter()
            .chain(&frozen)
            .fold(T::zero(), |s, g| s + g.value),
        error: active
            .iter()
            .chain(&frozen)
            .fold(T::zero(), |s, g| s + g.error),
        evaluations,
        converged,
    }
}

/// Integrates over `[a, b]` split at the given interior points. Either end may
/// be infinite.
pub fn integrate_pieces<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    breaks: &[T],
    spec: &QuadratureSpec<T>,
) -> Quadrature<T> {
    let mut knots: Vec<T> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    knots.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    knots.dedup();
    let pieces = knots.len() + 1;
    let share = QuadratureSpec {
        abs_tol: spec.abs_tol / T::lit(pieces as f64),
        ..*spec
    };
    let mut lo = a;
    let mut acc = Quadrature {
        value: T::zero(),
        error: T::zero(),
        evaluations: 0,
        converged: true,
    };
    for hi in knots.into_iter().chain(std::iter::once(b)) {
        acc = acc + integrate_range(&mut f, lo, hi, &share);
        lo = hi;
    }
    acc
}

/// Integrates over an interval whose ends may be infinite; infinite pieces are
/// mapped onto bounded ones by `t = a + u / (1 - u)`.
pub fn integrate_range<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    b: T,
    spec: &QuadratureSpec<T>,
) -> Quadrature<T> {
    let one = T::one();
    match (a.is_finite(), b.is_finite()) {
        (true, true) => integrate(f, a, b, spec),
        (true, false) => integrate(
            |u: T| {
                let s = one - u;
                f(a + u / s) / (s * s)
            },
            T::zero(),
            one,
            spec,
        ),
        (false, true) => integrate(
            |u: T| {
                let s = one - u;
                f(b - u / s) / (s * s)
            },
            T::zero(),
            one,
            spec,
        ),
        (false, false) => {
            let half = QuadratureSpec {
                abs_tol: spec.abs_tol * T::lit(0.5),
                ..*spec
            };
            let left = integrate(
                |u: T| {
                    let s = one - u;
                    f(-u / s) / (s * s)
                },
                T::zero(),
                one,
                &half,
            );
            let right = integrate(
                |u: T| {
                    let s = one - u;
                    f(u / s) / (s * s)
                },
                T::zero(),
                one,
                &half,
            );
            left + right
        }
    }
}
