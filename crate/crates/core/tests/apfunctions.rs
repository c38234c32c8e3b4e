use std::f64::consts::PI;

use avglab::apfunctions::spec::FunctionSpec;
use avglab::apfunctions::{
    fourier_bohr, mean, mollify, stepanov_norm, ApFunction, BohrSeries, Frequency,
    PeriodicFunction, PowerSingularity, SetSingularity, Shape, SingularPeriodic, StepanovFunction,
    TrigPolynomial,
};
use avglab::diophantine::UniformlyDiscreteSet;
use avglab::numeric::RealConst;
use avglab::AvgError;
use num_complex::Complex64;
use num_rational::Ratio;
use proptest::prelude::*;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn sine() -> ApFunction {
    ApFunction::Trig(TrigPolynomial::sine(1).unwrap())
}

/// `p + q sqrt 5` with rational `p`, `q`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Z5(Ratio<i64>, Ratio<i64>);

impl Z5 {
    fn new(p: (i64, i64), q: (i64, i64)) -> Self {
        Z5(Ratio::new(p.0, p.1), Ratio::new(q.0, q.1))
    }
    fn add(self, o: Z5) -> Z5 {
        Z5(self.0 + o.0, self.1 + o.1)
    }
    fn sub(self, o: Z5) -> Z5 {
        Z5(self.0 - o.0, self.1 - o.1)
    }
    fn mul(self, o: Z5) -> Z5 {
        Z5(self.0 * o.0 + self.1 * o.1 * 5, self.0 * o.1 + self.1 * o.0)
    }
    fn to_f64(self) -> f64 {
        let f = |r: Ratio<i64>| *r.numer() as f64 / *r.denom() as f64;
        f(self.0) + f(self.1) * 5f64.sqrt()
    }
}

#[test]
fn golden_density_mean_is_one() {
    let inv_tau = Z5::new((-1, 2), (1, 2));
    let hi = Z5::new((1, 2), (3, 10));
    let lo = Z5::new((1, 2), (1, 10));
    let one = Z5::new((1, 1), (0, 1));
    let total = hi.mul(inv_tau).add(lo.mul(one.sub(inv_tau)));
    assert_eq!(total, one);
    let spec: FunctionSpec = serde_json::from_str(&format!(
        r#"{{"type": "step", "breaks": ["1/tau"], "values": [{}, {}]}}"#,
        hi.to_f64(),
        lo.to_f64()
    ))
    .unwrap();
    let m = mean(&spec.build().unwrap(), 64.0, 1e-10).unwrap();
    assert!((m.value.re - total.to_f64()).abs() < 1e-14);
    let builtin: FunctionSpec = serde_json::from_str(r#"{"type": "renyi-parry-density"}"#).unwrap();
    let mb = mean(&builtin.build().unwrap(), 64.0, 1e-10).unwrap();
    assert!((mb.value.re - 1.0).abs() < 1e-14);
    // h_tau(1/tau) is the right-hand value
    assert!(
        (builtin.build().unwrap().eval(inv_tau.to_f64() + 1e-12).re - lo.to_f64()).abs() < 1e-15
    );
}

#[test]
fn mean_examples() {
    let p = ApFunction::Trig(
        TrigPolynomial::new(c(2.0), vec![(Frequency::integer(1), c(3.0))]).unwrap(),
    );
    let m = mean(&p, 64.0, 1e-10).unwrap();
    assert_eq!(m.value, c(2.0));
    assert_eq!(m.error, 0.0);
    let s = ApFunction::Singular(SingularPeriodic::frac_power(-0.25).unwrap());
    assert!((mean(&s, 64.0, 1e-10).unwrap().value.re - 4.0 / 3.0).abs() < 1e-14);
    assert!(mean(&p, 64.0, 0.0).is_err());
}

#[test]
fn fourier_bohr_examples() {
    let r2 = Frequency::new(RealConst::sqrt(2));
    let f = ApFunction::character(r2.clone()).unwrap();
    assert_eq!(fourier_bohr(&f, &r2, 64.0, 1e-10).unwrap().value, c(1.0));
    assert_eq!(
        fourier_bohr(&f, &Frequency::integer(1), 64.0, 1e-10)
            .unwrap()
            .value,
        c(0.0)
    );
    let p = ApFunction::Trig(
        TrigPolynomial::new(c(2.0), vec![(Frequency::integer(1), c(3.0))]).unwrap(),
    );
    assert_eq!(
        fourier_bohr(&p, &Frequency::integer(0), 64.0, 1e-10)
            .unwrap()
            .value,
        c(2.0)
    );
    // a translate picks up the phase exp(2 pi i k t)
    let t = fourier_bohr(&f.translate(0.125), &r2, 64.0, 1e-10)
        .unwrap()
        .value;
    let want = Complex64::from_polar(1.0, 2.0 * PI * 2f64.sqrt() * 0.125);
    assert!((t - want).norm() < 1e-12);
}

#[test]
fn singular_coefficients_match_closed_form() {
    // int_0^1 u^-1/4 e^{-2 pi i u} du against a series oracle:
    // sum_m (-2 pi i)^m / m! / (m + 3/4)
    let s = ApFunction::Singular(SingularPeriodic::frac_power(-0.25).unwrap());
    let got = fourier_bohr(&s, &Frequency::integer(1), 64.0, 1e-10)
        .unwrap()
        .value;
    let z = Complex64::new(0.0, -2.0 * PI);
    let mut term = c(1.0);
    let mut want = c(0.0);
    for m in 0..80 {
        want += term / (m as f64 + 0.75);
        term = term * z / (m as f64 + 1.0);
    }
    assert!((got - want).norm() < 1e-9, "{got} vs {want}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trig_mean_and_coefficients_are_lookups(
        a0 in -3.0f64..3.0,
        coeffs in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..5),
    ) {
        let freqs = [RealConst::integer(1), RealConst::sqrt(2), RealConst::golden_ratio(), RealConst::ratio(-5, 3), RealConst::sqrt(7)];
        let terms: Vec<_> = coeffs.iter().zip(freqs.iter())
            .map(|(&(re, im), k)| (Frequency::new(k.clone()), Complex64::new(re, im)))
            .collect();
        let p = ApFunction::Trig(TrigPolynomial::new(c(a0), terms.clone()).unwrap());
        prop_assert_eq!(mean(&p, 64.0, 1e-10).unwrap().value, c(a0));
        for (k, a) in &terms {
            let r = fourier_bohr(&p, k, 64.0, 1e-10).unwrap();
            prop_assert_eq!(r.value, *a);
            prop_assert_eq!(r.error, 0.0);
        }
        let absent = Frequency::new(RealConst::sqrt(3));
        prop_assert_eq!(fourier_bohr(&p, &absent, 64.0, 1e-10).unwrap().value, c(0.0));
    }
}

#[test]
fn stepanov_norm_examples() {
    let s = stepanov_norm(&sine(), 1.0 / 64.0).unwrap();
    assert!((s.lower - 2.0 / PI).abs() < 1e-8);
    assert_eq!(s.windows, 1);
    let k = stepanov_norm(&ApFunction::constant(-2.5), 1.0 / 64.0).unwrap();
    assert!((k.lower - 2.5).abs() < 1e-12);
    let f = ApFunction::Singular(SingularPeriodic::frac_power(-0.25).unwrap());
    assert!((stepanov_norm(&f, 1.0 / 64.0).unwrap().lower - 4.0 / 3.0).abs() < 1e-8);
    assert!(stepanov_norm(&sine(), 0.0).is_err());
}

#[test]
fn stepanov_norm_brackets_a_long_period() {
    // sin(2 pi x / 3): the best unit window is centred at the peak x = 3/4,
    // giving (3 / 2 pi)(cos(pi/6) - cos(5 pi/6)) = 3 sqrt 3 / (2 pi)
    let shape = Shape::Trig {
        a0: c(0.0),
        terms: vec![
            (1, Complex64::new(0.0, -0.5)),
            (-1, Complex64::new(0.0, 0.5)),
        ],
    };
    let f =
        ApFunction::Periodic(PeriodicFunction::new(Ratio::from_integer(3.into()), shape).unwrap());
    let want = 3.0 * 3f64.sqrt() / (2.0 * PI);
    let n = stepanov_norm(&f, 1.0 / 64.0).unwrap();
    assert_eq!(n.windows, 192);
    assert!(
        n.lower <= want + 1e-12 && want <= n.estimate + 1e-12,
        "{n:?} vs {want}"
    );
    assert!(want - n.lower < 1e-3);
}

#[test]
fn stepanov_norm_of_a_set_singularity() {
    // |x - y|^-1/4 near every integer with half-width 1/4: each unit window holds
    // exactly the mass of one model, 2 * (4/3) * (1/4)^(3/4)
    let set = UniformlyDiscreteSet::integers();
    let model = PowerSingularity::symmetric(0.0, 0.25, 1.0, 0.25);
    let f = ApFunction::Stepanov(
        StepanovFunction::new(None, Some(SetSingularity::new(set, model).unwrap())).unwrap(),
    );
    let want = 2.0 * (4.0 / 3.0) * 0.25f64.powf(0.75);
    let n = stepanov_norm(&f, 1.0 / 4.0).unwrap();
    assert!((n.lower - want).abs() < 1e-9, "{n:?}");
    let m = mean(&f, 1024.0, 1e-6).unwrap();
    assert!((m.value.re - want).abs() < 1e-6 && m.converged, "{m:?}");
}

#[test]
fn divergent_windows_are_reported() {
    let set = UniformlyDiscreteSet::integers();
    let model = PowerSingularity::symmetric(0.0, 0.25, 1.0, 0.25);
    assert!(SetSingularity::new(
        set,
        PowerSingularity {
            delta: 0.75,
            ..model
        }
    )
    .is_err());
    let bad = PowerSingularity::symmetric(0.0, 0.75, 1.0, 0.25);
    assert!(bad.validate().is_err());
}

#[test]
fn mollify_sine() {
    let q = mollify(&sine(), 0.25).unwrap();
    // the generic window-average path on the same function
    let shape = Shape::Trig {
        a0: c(0.0),
        terms: vec![
            (1, Complex64::new(0.0, -0.5)),
            (-1, Complex64::new(0.0, 0.5)),
        ],
    };
    let generic = mollify(
        &ApFunction::Periodic(PeriodicFunction::unit(shape).unwrap()),
        0.25,
    )
    .unwrap();
    assert!(matches!(generic, ApFunction::Mollified { .. }));
    let mut rng = 0x9e37_79b9_7f4a_7c15u64;
    for _ in 0..1000 {
        rng ^= rng << 13;
        rng ^= rng >> 7;
        rng ^= rng << 17;
        let x = (rng >> 11) as f64 / (1u64 << 53) as f64 * 20.0 - 10.0;
        let want = 2.0 / PI * (2.0 * PI * x).sin();
        assert!((q.eval(x).re - want).abs() < 1e-10);
        assert!((generic.eval(x).re - want).abs() < 1e-10);
    }
    let z = mollify(&sine(), 0.5).unwrap();
    for x in [0.0, 0.1, 0.37, 5.5] {
        assert!(z.eval(x).norm() < 1e-15);
    }
    let k = mollify(&ApFunction::constant(4.0), 0.3).unwrap();
    assert_eq!(k.eval(0.77), c(4.0));
    assert!(mollify(&sine(), 0.0).is_err());
}

#[test]
fn mollifier_converges_in_stepanov_norm() {
    // for the indicator of [0, 1/2), f - f_delta is two triangles of area
    // delta / 4 at each jump: ||f - f_delta||_S = delta
    let f = ApFunction::Periodic(
        PeriodicFunction::unit(Shape::Indicator { lo: 0.0, hi: 0.5 }).unwrap(),
    );
    let mut prev = f64::INFINITY;
    for delta in [0.25, 1.0 / 16.0, 1.0 / 64.0] {
        let diff = f.minus(&mollify(&f, delta).unwrap());
        let n = stepanov_norm(&diff, 1.0 / 64.0).unwrap();
        assert!((n.lower - delta).abs() < 1e-9, "{delta}: {n:?}");
        assert!(n.lower < prev);
        prev = n.lower;
    }
}

#[test]
fn almost_periods_transfer_to_the_mollifier() {
    // sqrt 2 * 99 = 140.007..., so t = 99 is a good almost period
    let f = ApFunction::Trig(
        TrigPolynomial::new(
            c(0.0),
            vec![
                (Frequency::integer(1), c(1.0)),
                (Frequency::new(RealConst::sqrt(2)), c(0.5)),
            ],
        )
        .unwrap(),
    );
    let t = 99.0;
    let delta = 0.25;
    let gap = stepanov_norm(&f.minus(&f.translate(t)), 1.0 / 64.0).unwrap();
    let eps = gap.estimate / (2.0 * delta) * 1.0001;
    let fd = mollify(&f, delta).unwrap();
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let x = -37.0 + i as f64 * 0.0731;
        worst = worst.max((fd.eval(x) - fd.eval(x + t)).norm());
    }
    assert!(worst < eps, "{worst} vs {eps}");
    assert!(eps < 0.2);
}

#[test]
fn bohr_truncations_respect_tails() {
    let s = BohrSeries::geometric(16).unwrap();
    let f = ApFunction::Bohr(s.clone());
    for m in 0..=16 {
        for m2 in 0..=16 {
            let (p, _) = s.truncate(m).unwrap();
            let (q, _) = s.truncate(m2).unwrap();
            let a = mean(&ApFunction::Trig(p), 64.0, 1e-10).unwrap().value;
            let b = mean(&ApFunction::Trig(q), 64.0, 1e-10).unwrap().value;
            assert!((a - b).norm() <= s.tail(m.min(m2)));
        }
        let (p, tail) = s.truncate(m).unwrap();
        let a0 = fourier_bohr(&f, &Frequency::integer(0), 64.0, 1e-10)
            .unwrap()
            .value;
        assert!((mean(&ApFunction::Trig(p), 64.0, 1e-10).unwrap().value - a0).norm() <= tail);
    }
    let (p, tail) = s.truncate(2).unwrap();
    assert_eq!(p.terms().len(), 2);
    assert_eq!(tail, 0.5);
    assert_eq!(s.truncate(0).unwrap().1, 2.0);
}

#[test]
fn variation_closed_form() {
    let f = SingularPeriodic::new(
        vec![PowerSingularity::symmetric(0.0, 0.25, 1.0, 0.5)],
        PeriodicFunction::constant(c(0.0)),
    )
    .unwrap();
    let v = f.variation(0.0, 1.0, 10_000).unwrap();
    let want = 2.0 * (10.0 - 2f64.powf(0.25));
    assert!((v - want).abs() <= 1e-8 * want);
    assert!((want - 17.6216).abs() < 1e-4);
    assert!(matches!(
        f.variation(0.0, 1.0, 2),
        Err(AvgError::DegenerateWindow { .. })
    ));
    assert!(f.variation(0.3, 1.0, 100).is_err());
}

#[test]
fn variation_of_smooth_function_is_bounded() {
    // a trig remainder only: V_N <= 2 M delta uniformly in N
    let shape = Shape::Trig {
        a0: c(0.0),
        terms: vec![
            (1, Complex64::new(0.0, -0.5)),
            (-1, Complex64::new(0.0, 0.5)),
        ],
    };
    let model = PowerSingularity::symmetric(0.0, 0.25, 0.0, 0.25);
    let f = SingularPeriodic::new(vec![model], PeriodicFunction::unit(shape).unwrap()).unwrap();
    let bound = 2.0 * 2.0 * PI * 0.25;
    for n in [10u64, 1_000, 100_000, 10_000_000] {
        let v = f.variation(0.0, 1.0, n).unwrap();
        assert!(v <= bound + 1e-12, "{n}: {v}");
    }
    // |sin| over (1/N, 1/4) on each side: 2 (1 - sin(2 pi / N))
    let v = f.variation(0.0, 1.0, 1000).unwrap();
    assert!((v - 2.0 * (1.0 - (2.0 * PI / 1000.0).sin())).abs() < 1e-10);
}

/// Adaptive Simpson on `[a, b]`.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// `int |f'|` over `N^-s < |x - z| < delta` for `f = c_l |t|^-a` (t < 0),
/// `c_r t^-a` (t > 0) plus `amp sin(2 pi x)`, integrated in `u = ln |t|`.
#[allow(clippy::too_many_arguments)]
fn variation_oracle(z: f64, a: f64, cl: f64, cr: f64, amp: f64, delta: f64, s: f64, n: u64) -> f64 {
    let cut = (n as f64).powf(-s);
    let mut total = 0.0;
    for (side, c) in [(-1.0, cl), (1.0, cr)] {
        let g = |u: f64| {
            let t = u.exp();
            let x = z + side * t;
            let model = -side * a * c * t.powf(-a - 1.0);
            let smooth = amp * 2.0 * PI * (2.0 * PI * x).cos();
            (model + smooth).abs() * t
        };
        let rough = simpson(&g, cut.ln(), delta.ln(), 1e-6);
        total += simpson(&g, cut.ln(), delta.ln(), 1e-13 * rough.abs());
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn variation_matches_quadrature(
        a in 0.05f64..0.45,
        delta in 0.05f64..0.5,
        s in 0.5f64..2.0,
        log_n in 2.0f64..6.0,
        cl in -2.0f64..2.0,
        cr in 0.1f64..2.0,
        z in 0.0f64..1.0,
        smooth in any::<bool>(),
    ) {
        let n = 10f64.powf(log_n) as u64;
        prop_assume!((n as f64).powf(-s) < 0.9 * delta);
        let model = PowerSingularity { z, a, c_left: cl, c_right: cr, delta };
        // 1 + 0.3 sin(2 pi x), or the constant 1/2
        let amp = if smooth { 0.3 } else { 0.0 };
        let remainder = if smooth {
            PeriodicFunction::unit(Shape::Trig {
                a0: c(1.0),
                terms: vec![(1, Complex64::new(0.0, -0.15)), (-1, Complex64::new(0.0, 0.15))],
            }).unwrap()
        } else {
            PeriodicFunction::constant(c(0.5))
        };
        let f = SingularPeriodic::new(vec![model], remainder).unwrap();
        let v = f.variation(z, s, n).unwrap();
        let w = variation_oracle(z, a, cl, cr, amp, delta, s, n);
        prop_assert!((v - w).abs() <= 1e-8 * w, "{} vs {}", v, w);
        if !smooth {
            let closed = (cl.abs() + cr.abs()) * ((n as f64).powf(s * a) - delta.powf(-a));
            prop_assert!((v - closed).abs() <= 1e-12 * closed);
        }
    }
}

#[test]
fn variation_counts_remainder_jumps() {
    // a step of height 2 at u = 0.1 inside the window adds 2
    let step = Shape::Step {
        breaks: vec![0.1, 0.5],
        values: vec![c(0.0), c(2.0), c(0.0)],
    };
    let model = PowerSingularity::symmetric(0.0, 0.25, 1.0, 0.2);
    let f = SingularPeriodic::new(vec![model], PeriodicFunction::unit(step).unwrap()).unwrap();
    let plain = model.variation(1.0, 1000).unwrap();
    let v = f.variation(0.0, 1.0, 1000).unwrap();
    assert!((v - plain - 2.0).abs() < 1e-9, "{v} vs {plain}");
}

#[test]
fn stepanov_variation_at_set_points() {
    let set = avglab::diophantine::parse_set("beatty:sqrt(2):1:0").unwrap();
    let model = PowerSingularity::symmetric(0.0, 0.25, 1.0, 0.4);
    let f = StepanovFunction::new(None, Some(SetSingularity::new(set, model).unwrap())).unwrap();
    // floor(3 sqrt 2) = 4 is a point of the set
    let v = f.variation(4.0, 1.0, 10_000).unwrap();
    let want = model.variation(1.0, 10_000).unwrap();
    assert!((v - want).abs() < 1e-12 * want);
    assert!(f.variation(4.5, 1.0, 10_000).is_err());
}
