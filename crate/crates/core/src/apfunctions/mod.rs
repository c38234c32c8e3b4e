//! Periodic, singular and almost periodic functions: means, Fourier–Bohr
//! coefficients, Stepanov norms, mollifiers and the variation functional.

mod bohr;
mod frequency;
mod periodic;
mod singular;
pub mod spec;
mod stepanov;
mod trig;

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

pub use bohr::BohrSeries;
pub use frequency::Frequency;
pub use periodic::{Evaluator, Interpolation, PeriodicFunction, Shape};
pub use singular::{PowerSingularity, SingularPeriodic};
pub use stepanov::{SetSingularity, StepanovFunction};
pub use trig::TrigPolynomial;

use crate::error::{invalid, AvgError, Result};
use crate::numeric::quad::{integrate_complex, integrate_singular, QuadOptions};
use crate::numeric::sum::ComplexSum;
use crate::numeric::{Fixed, RealConst};

/// A function on the real line from one of the supported classes.
#[derive(Clone, Debug)]
pub enum ApFunction {
    Trig(TrigPolynomial),
    Periodic(PeriodicFunction),
    Singular(SingularPeriodic),
    Bohr(BohrSeries),
    Stepanov(StepanovFunction),
    /// `sum c_i f_i`.
    Combination(Vec<(Complex64, ApFunction)>),
    /// `x -> f(x + shift)`.
    Translated {
        base: Box<ApFunction>,
        shift: f64,
    },
    /// `x -> (1 / 2 delta) int_{x - delta}^{x + delta} f`.
    Mollified {
        base: Box<ApFunction>,
        delta: f64,
    },
}

/// A mean or coefficient with an error estimate.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MeanEstimate {
    #[serde(serialize_with = "crate::report::complex17")]
    pub value: Complex64,
    #[serde(serialize_with = "crate::report::float17")]
    pub error: f64,
    pub converged: bool,
}

impl MeanEstimate {
    fn exact(value: Complex64) -> Self {
        Self {
            value,
            error: 0.0,
            converged: true,
        }
    }

    fn within(value: Complex64, error: f64, tolerance: f64) -> Self {
        Self {
            value,
            error,
            converged: error <= tolerance,
        }
    }
}

/// Default quadrature tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
/// Default largest window half-width for windowed means.
pub const DEFAULT_T_MAX: f64 = 4096.0;

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `sin(2 pi k delta) / (2 pi k delta)`, exactly 0 when `2 k delta` is a non-zero integer.
fn sinc_factor(k: f64, delta: f64) -> f64 {
    let t = 2.0 * k * delta;
    if t == 0.0 {
        return 1.0;
    }
    if t.fract() == 0.0 {
        return 0.0;
    }
    (PI * t).sin() / (PI * t)
}

impl ApFunction {
    pub fn constant(c: f64) -> Self {
        ApFunction::Trig(TrigPolynomial::constant(real(c)))
    }

    /// `exp(2 pi i k x)`.
    pub fn character(k: Frequency) -> Result<Self> {
        TrigPolynomial::character(k).map(ApFunction::Trig)
    }

    pub fn combination(parts: Vec<(Complex64, ApFunction)>) -> Self {
        ApFunction::Combination(parts)
    }

    /// `self - other`.
    pub fn minus(&self, other: &ApFunction) -> Self {
        ApFunction::Combination(vec![(real(1.0), self.clone()), (real(-1.0), other.clone())])
    }

    pub fn translate(&self, shift: f64) -> Self {
        ApFunction::Translated {
            base: Box::new(self.clone()),
            shift,
        }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        match self {
            ApFunction::Trig(p) => p.eval(x),
            ApFunction::Periodic(f) => f.eval(x),
            ApFunction::Singular(f) => f.eval(x),
            ApFunction::Bohr(b) => b.poly().eval(x),
            ApFunction::Stepanov(f) => f.eval(x),
            ApFunction::Combination(parts) => parts
                .iter()
                .map(|(c, f)| c * f.eval(x))
                .collect::<ComplexSum>()
                .value(),
            ApFunction::Translated { base, shift } => base.eval(x + shift),
            ApFunction::Mollified { base, delta } => {
                base.window_integral(x - delta, x + delta) / (2.0 * delta)
            }
        }
    }

    /// Evaluation at a high-precision argument (unreduced orbit values).
    ///
    /// Periodic classes reduce exactly; translated and mollified aperiodic
    /// functions fall back to the double nearest `x`.
    pub fn eval_fixed(&self, x: &Fixed) -> Complex64 {
        match self {
            ApFunction::Trig(p) => p.eval_fixed(x),
            ApFunction::Periodic(f) => f.eval_fixed(x),
            ApFunction::Singular(f) => f.eval_fixed(x),
            ApFunction::Bohr(b) => b.poly().eval_fixed(x),
            ApFunction::Stepanov(f) => f.eval_fixed(x),
            ApFunction::Combination(parts) => parts
                .iter()
                .map(|(c, f)| c * f.eval_fixed(x))
                .collect::<ComplexSum>()
                .value(),
            ApFunction::Translated { base, shift } => match Fixed::from_f64(*shift) {
                Some(s) => base.eval_fixed(&x.add(&s)),
                None => Complex64::new(f64::NAN, f64::NAN),
            },
            ApFunction::Mollified { .. } => match self.period() {
                Some(l) => {
                    let lf = RealConst::Rational(l.clone()).to_f64();
                    self.eval(x.frac_div(&l) * lf)
                }
                None => self.eval(x.to_f64()),
            },
        }
    }

    /// Exact period, when one is known.
    pub fn period(&self) -> Option<BigRational> {
        match self {
            ApFunction::Trig(p) => p.is_one_periodic().then(BigRational::one),
            ApFunction::Periodic(f) => Some(f.period().clone()),
            ApFunction::Singular(_) => Some(BigRational::one()),
            ApFunction::Bohr(b) => b.poly().is_one_periodic().then(BigRational::one),
            ApFunction::Stepanov(_) => None,
            ApFunction::Combination(parts) => {
                let periods: Option<Vec<BigRational>> =
                    parts.iter().map(|(_, f)| f.period()).collect();
                let periods = periods?;
                let first = periods.first()?.clone();
                if periods.iter().all(|p| *p == first) {
                    Some(first)
                } else if periods.iter().all(|p| p.recip().is_integer()) {
                    Some(BigRational::one())
                } else {
                    None
                }
            }
            ApFunction::Translated { base, .. } | ApFunction::Mollified { base, .. } => {
                base.period()
            }
        }
    }

    /// Whether `f(x + 1) = f(x)`, so orbit entries mod 1 suffice.
    pub fn is_one_periodic(&self) -> bool {
        self.period().is_some_and(|p| p.recip().is_integer())
    }

    /// `int_a^b f`.
    pub fn window_integral(&self, a: f64, b: f64) -> Complex64 {
        match self {
            ApFunction::Trig(p) => p.window_integral(a, b),
            ApFunction::Periodic(f) => f.window_integral(a, b),
            ApFunction::Singular(f) => f.window_integral(a, b),
            ApFunction::Bohr(s) => s.poly().window_integral(a, b),
            ApFunction::Stepanov(f) => f.window_integral(a, b),
            ApFunction::Combination(parts) => parts
                .iter()
                .map(|(c, f)| c * f.window_integral(a, b))
                .collect::<ComplexSum>()
                .value(),
            ApFunction::Translated { base, shift } => base.window_integral(a + shift, b + shift),
            ApFunction::Mollified { .. } => {
                let breaks = self.kinks(a, b);
                integrate_complex(|x| self.eval(x), a, b, &breaks, QuadOptions::default()).value
            }
        }
    }

    /// Points in `[a, b]` where `f` is unbounded.
    pub fn poles(&self, a: f64, b: f64) -> Vec<f64> {
        match self {
            ApFunction::Singular(f) => f.poles(a, b),
            ApFunction::Stepanov(f) => f.poles(a, b),
            ApFunction::Periodic(f) if !f.is_riemann() => f.kinks(a, b),
            ApFunction::Combination(parts) => {
                parts.iter().flat_map(|(_, f)| f.poles(a, b)).collect()
            }
            ApFunction::Translated { base, shift } => base
                .poles(a + shift, b + shift)
                .into_iter()
                .map(|x| x - shift)
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Points in `[a, b]` where `f` is not smooth (including poles).
    pub fn kinks(&self, a: f64, b: f64) -> Vec<f64> {
        let mut out = match self {
            ApFunction::Periodic(f) => f.kinks(a, b),
            ApFunction::Singular(f) => f.kinks(a, b),
            ApFunction::Stepanov(f) => f.kinks(a, b),
            ApFunction::Combination(parts) => {
                parts.iter().flat_map(|(_, f)| f.kinks(a, b)).collect()
            }
            ApFunction::Translated { base, shift } => base
                .kinks(a + shift, b + shift)
                .into_iter()
                .map(|x| x - shift)
                .collect(),
            ApFunction::Mollified { base, delta } => {
                let inner = base.kinks(a - delta, b + delta);
                inner.iter().flat_map(|k| [k - delta, k + delta]).collect()
            }
            _ => Vec::new(),
        };
        out.retain(|x| *x >= a && *x <= b);
        out
    }

    pub fn derivative(&self, x: f64) -> Complex64 {
        match self {
            ApFunction::Trig(p) => p.derivative(x),
            ApFunction::Periodic(f) => f.derivative(x),
            ApFunction::Bohr(s) => s.poly().derivative(x),
            ApFunction::Combination(parts) => parts
                .iter()
                .map(|(c, f)| c * f.derivative(x))
                .collect::<ComplexSum>()
                .value(),
            ApFunction::Translated { base, shift } => base.derivative(x + shift),
            _ => {
                let h = 1e-6 * x.abs().max(1e-2);
                (self.eval(x + h) - self.eval(x - h)) / (2.0 * h)
            }
        }
    }

    /// Upper bound on `sup |f|`, when finite and known.
    pub fn sup_bound(&self) -> Option<f64> {
        match self {
            ApFunction::Trig(p) => Some(p.sup_bound()),
            ApFunction::Periodic(f) => f.sup_bound(),
            ApFunction::Singular(_) => None,
            ApFunction::Bohr(s) => Some(s.poly().sup_bound() + s.residual()),
            ApFunction::Stepanov(f) => match f.singular() {
                Some(_) => None,
                None => f.regular().and_then(|r| r.sup_bound()),
            },
            ApFunction::Combination(parts) => parts
                .iter()
                .map(|(c, f)| f.sup_bound().map(|b| c.norm() * b))
                .sum(),
            ApFunction::Translated { base, .. } | ApFunction::Mollified { base, .. } => {
                base.sup_bound()
            }
        }
    }

    /// `int_a^b |f|`, by quadrature graded towards poles.
    pub fn abs_window_integral(&self, a: f64, b: f64) -> Result<f64> {
        if let ApFunction::Singular(f) = self {
            return f.abs_window_integral(a, b);
        }
        let breaks = self.kinks(a, b);
        let poles = self.poles(a, b);
        let opts = QuadOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-11,
            max_intervals: 20_000,
        };
        let r = integrate_singular(|x| real(self.eval(x).norm()), a, b, &poles, &breaks, opts);
        if !r.value.re.is_finite() || (!r.converged && !poles.is_empty()) {
            return Err(AvgError::DivergentWindow { start: a, end: b });
        }
        Ok(r.value.re)
    }

    /// `V_N(z, s)` for singular and Stepanov functions.
    pub fn variation(&self, z: f64, s: f64, n: u64) -> Result<f64> {
        match self {
            ApFunction::Singular(f) => f.variation(z, s, n),
            ApFunction::Stepanov(f) => f.variation(z, s, n),
            _ => Err(invalid(
                "variation is defined for singular and Stepanov functions",
            )),
        }
    }
}

/// `(1 / 2T) int_{-T}^{T} g` at `T_max`, `T_max / 2`, `T_max / 4` with one Richardson step.
fn windowed_mean(window: impl Fn(f64) -> Complex64, t_max: f64, tolerance: f64) -> MeanEstimate {
    let avg = |t: f64| window(t) / (2.0 * t);
    let (a0, a1, a2) = (avg(t_max), avg(t_max / 2.0), avg(t_max / 4.0));
    // A(T) = M + c/T + ... gives M = 2A(T) - A(T/2)
    let r0 = a0 * 2.0 - a1;
    let r1 = a1 * 2.0 - a2;
    let rich_err = (r0 - r1).norm();
    let plain_err = (a0 - a1).norm();
    if rich_err <= plain_err {
        MeanEstimate::within(r0, rich_err, tolerance)
    } else {
        MeanEstimate::within(a0, plain_err, tolerance)
    }
}

/// `M(f) = lim (1 / 2T) int_{-T}^{T} f`.
pub fn mean(f: &ApFunction, t_max: f64, tolerance: f64) -> Result<MeanEstimate> {
    if !(tolerance > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    if !(t_max >= 4.0) {
        return Err(invalid("T_max must be at least 4"));
    }
    Ok(match f {
        ApFunction::Trig(p) => MeanEstimate::exact(p.mean()),
        ApFunction::Periodic(p) => MeanEstimate::exact(p.mean()),
        ApFunction::Singular(s) => MeanEstimate::exact(s.mean()),
        ApFunction::Bohr(b) => {
            MeanEstimate::within(b.poly().mean(), b.residual(), tolerance.max(b.residual()))
        }
        ApFunction::Stepanov(s) => {
            let reg = match s.regular() {
                Some(r) => mean(r, t_max, tolerance)?,
                None => MeanEstimate::exact(real(0.0)),
            };
            match s.singular() {
                Some(sing) => {
                    let m = windowed_mean(|t| real(sing.window_integral(-t, t)), t_max, tolerance);
                    let err = reg.error + m.error;
                    MeanEstimate::within(reg.value + m.value, err, tolerance)
                }
                None => reg,
            }
        }
        ApFunction::Combination(parts) => {
            let mut v = ComplexSum::new();
            let mut e = 0.0;
            for (c, g) in parts {
                let m = mean(g, t_max, tolerance)?;
                v.add(c * m.value);
                e += c.norm() * m.error;
            }
            MeanEstimate::within(v.value(), e, tolerance)
        }
        // the mean is translation invariant and commutes with averaging
        ApFunction::Translated { base, .. } | ApFunction::Mollified { base, .. } => {
            mean(base, t_max, tolerance)?
        }
    })
}

/// `a(k) = M(exp(-2 pi i k .) f)`.
pub fn fourier_bohr(
    f: &ApFunction,
    k: &Frequency,
    t_max: f64,
    tolerance: f64,
) -> Result<MeanEstimate> {
    if k.is_zero() {
        return mean(f, t_max, tolerance);
    }
    if !(tolerance > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    Ok(match f {
        ApFunction::Trig(p) => MeanEstimate::exact(p.coefficient(k)),
        ApFunction::Bohr(b) => MeanEstimate::within(
            b.poly().coefficient(k),
            b.residual(),
            tolerance.max(b.residual()),
        ),
        ApFunction::Periodic(p) => MeanEstimate::exact(p.coefficient(k.exact())),
        ApFunction::Singular(s) => match k.as_integer() {
            Some(j) => MeanEstimate::exact(s.coefficient(j)),
            None if k.is_integer() => MeanEstimate::exact(real(0.0)),
            None => MeanEstimate::exact(real(0.0)),
        },
        ApFunction::Stepanov(s) => {
            let reg = match s.regular() {
                Some(r) => fourier_bohr(r, k, t_max, tolerance)?,
                None => MeanEstimate::exact(real(0.0)),
            };
            match s.singular() {
                Some(sing) => {
                    let d = sing.model.delta;
                    let kv = k.value();
                    let hat = integrate_singular(
                        |t| trig::cis(-kv * t) * sing.model.value(t),
                        -d,
                        d,
                        &[0.0],
                        &[],
                        QuadOptions::default(),
                    )
                    .value;
                    let window = |t: f64| {
                        sing.set
                            .points_in(-t, t)
                            .into_iter()
                            .map(|y| hat * trig::cis(k.phase_f64(-y)))
                            .collect::<ComplexSum>()
                            .value()
                    };
                    let m = windowed_mean(window, t_max, tolerance);
                    MeanEstimate::within(reg.value + m.value, reg.error + m.error, tolerance)
                }
                None => reg,
            }
        }
        ApFunction::Combination(parts) => {
            let mut v = ComplexSum::new();
            let mut e = 0.0;
            for (c, g) in parts {
                let m = fourier_bohr(g, k, t_max, tolerance)?;
                v.add(c * m.value);
                e += c.norm() * m.error;
            }
            MeanEstimate::within(v.value(), e, tolerance)
        }
        ApFunction::Translated { base, shift } => {
            let m = fourier_bohr(base, k, t_max, tolerance)?;
            MeanEstimate {
                value: m.value * trig::cis(k.phase_f64(*shift)),
                ..m
            }
        }
        ApFunction::Mollified { base, delta } => {
            let m = fourier_bohr(base, k, t_max, tolerance)?;
            let s = sinc_factor(k.value(), *delta);
            MeanEstimate {
                value: m.value * s,
                error: m.error * s.abs(),
                ..m
            }
        }
    })
}

/// Grid maximum of unit-window integrals of `|f|`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct StepanovNorm {
    /// Certified lower bound (maximum over the grid).
    pub lower: f64,
    /// Lipschitz upper estimate when `sup |f|` is known, otherwise the
    /// maximum after local grid refinement.
    pub estimate: f64,
    pub windows: usize,
}

/// Span of window starts scanned for functions without a known period.
pub const STEPANOV_SPAN: f64 = 64.0;

/// `sup_x int_x^{x+1} |f|` over a grid of window starts.
pub fn stepanov_norm(f: &ApFunction, grid_step: f64) -> Result<StepanovNorm> {
    if !(grid_step > 0.0 && grid_step <= 1.0) {
        return Err(invalid("grid step must lie in (0, 1]"));
    }
    if f.is_one_periodic() {
        let v = f.abs_window_integral(0.0, 1.0)?;
        return Ok(StepanovNorm {
            lower: v,
            estimate: v,
            windows: 1,
        });
    }
    let span = match f.period() {
        Some(l) => RealConst::Rational(l).to_f64(),
        None => STEPANOV_SPAN,
    };
    let count = (span / grid_step).ceil().max(1.0) as usize;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for j in 0..count {
        let x = j as f64 * grid_step;
        let v = f.abs_window_integral(x, x + 1.0)?;
        if v > best.0 {
            best = (v, x);
        }
    }
    let estimate = match f.sup_bound() {
        // W'(x) = |f(x+1)| - |f(x)| and every x is within step/2 of the grid
        Some(s) => best.0 + s * grid_step,
        None => {
            let mut m = best.0;
            for i in -4..=4 {
                let x = best.1 + i as f64 * grid_step / 8.0;
                m = m.max(f.abs_window_integral(x, x + 1.0)?);
            }
            m
        }
    };
    Ok(StepanovNorm {
        lower: best.0,
        estimate,
        windows: count,
    })
}

/// The sliding average `f_delta(x) = (1 / 2 delta) int_{x-delta}^{x+delta} f`.
///
/// Trigonometric polynomials and Bohr series are mollified coefficientwise
/// by `sin(2 pi k delta) / (2 pi k delta)`.
pub fn mollify(f: &ApFunction, delta: f64) -> Result<ApFunction> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid("mollifier half-width must be positive"));
    }
    Ok(match f {
        ApFunction::Trig(p) => ApFunction::Trig(p.map_coefficients(|k| sinc_factor(k, delta))),
        ApFunction::Bohr(b) => ApFunction::Bohr(b.map_coefficients(|k| sinc_factor(k, delta))?),
        ApFunction::Periodic(p) if matches!(p.shape(), Shape::Constant(_)) => f.clone(),
        ApFunction::Combination(parts) => ApFunction::Combination(
            parts
                .iter()
                .map(|(c, g)| Ok((*c, mollify(g, delta)?)))
                .collect::<Result<Vec<_>>>()?,
        ),
        _ => ApFunction::Mollified {
            base: Box::new(f.clone()),
            delta,
        },
    })
}
