use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed};

use super::trig::cis;
use crate::error::{invalid, Result};
use crate::numeric::quad::{integrate_complex, QuadOptions};
use crate::numeric::sum::ComplexSum;
use crate::numeric::{Fixed, RealConst};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interpolation {
    Linear,
    Nearest,
}

pub type Evaluator = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// One period of a periodic function, in the unit coordinate `u = x / L` in `[0, 1)`.
#[derive(Clone)]
pub enum Shape {
    Constant(Complex64),
    /// `a0 + sum a_j exp(2 pi i j u)`.
    Trig {
        a0: Complex64,
        terms: Vec<(i64, Complex64)>,
    },
    /// `values[i]` on `[breaks[i-1], breaks[i])` with implicit end points 0 and 1.
    Step {
        breaks: Vec<f64>,
        values: Vec<Complex64>,
    },
    Indicator {
        lo: f64,
        hi: f64,
    },
    /// `c u^p` on `[lo, hi)`, zero elsewhere; `p > -1`.
    FracPower {
        c: f64,
        p: f64,
        lo: f64,
        hi: f64,
    },
    /// Samples at `u = j / len`.
    Sampled {
        table: Vec<Complex64>,
        rule: Interpolation,
    },
    Sum(Vec<(Complex64, Shape)>),
    Custom {
        label: String,
        eval: Evaluator,
    },
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Constant(c) => write!(f, "Constant({c})"),
            Shape::Trig { a0, terms } => write!(f, "Trig({a0}, {terms:?})"),
            Shape::Step { breaks, values } => write!(f, "Step({breaks:?}, {values:?})"),
            Shape::Indicator { lo, hi } => write!(f, "Indicator[{lo}, {hi})"),
            Shape::FracPower { c, p, lo, hi } => write!(f, "{c} u^{p} on [{lo}, {hi})"),
            Shape::Sampled { table, rule } => {
                write!(f, "Sampled({} points, {rule:?})", table.len())
            }
            Shape::Sum(parts) => f.debug_list().entries(parts.iter()).finish(),
            Shape::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn overlap(u0: f64, u1: f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
    let a = u0.max(lo);
    let b = u1.min(hi);
    (a < b).then_some((a, b))
}

/// `int_a^b exp(-2 pi i j u) du`.
fn char_integral(j: i64, a: f64, b: f64) -> Complex64 {
    if j == 0 {
        return real(b - a);
    }
    let w = Complex64::new(0.0, -2.0 * PI * j as f64);
    (cis(-(j as f64) * b) - cis(-(j as f64) * a)) / w
}

impl Shape {
    fn pieces(&self) -> Option<Vec<(f64, f64, Complex64)>> {
        match self {
            Shape::Step { breaks, values } => {
                let mut pts = vec![0.0];
                pts.extend(breaks.iter().copied());
                pts.push(1.0);
                Some(
                    pts.windows(2)
                        .zip(values)
                        .map(|(w, v)| (w[0], w[1], *v))
                        .collect(),
                )
            }
            Shape::Indicator { lo, hi } => Some(vec![(*lo, *hi, real(1.0))]),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Shape::Step { breaks, values } => {
                if values.len() != breaks.len() + 1 {
                    return Err(invalid("a step function needs one more value than breaks"));
                }
                let mut prev = 0.0;
                for &b in breaks {
                    if !(b > prev && b < 1.0) {
                        return Err(invalid("step breaks must increase strictly inside (0, 1)"));
                    }
                    prev = b;
                }
            }
            Shape::Indicator { lo, hi } => {
                if !(0.0 <= *lo && lo < hi && *hi <= 1.0) {
                    return Err(invalid("indicator needs 0 <= lo < hi <= 1"));
                }
            }
            Shape::FracPower { p, lo, hi, .. } => {
                if !(*p > -1.0) || !(0.0 <= *lo && lo < hi && *hi <= 1.0) {
                    return Err(invalid("power shape needs p > -1 and 0 <= lo < hi <= 1"));
                }
            }
            Shape::Sampled { table, .. } => {
                if table.is_empty() {
                    return Err(invalid("sample table is empty"));
                }
            }
            Shape::Sum(parts) => {
                for (_, s) in parts {
                    s.validate()?;
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn eval(&self, u: f64) -> Complex64 {
        match self {
            Shape::Constant(c) => *c,
            Shape::Trig { a0, terms } => {
                let mut s = ComplexSum::new();
                s.add(*a0);
                for (j, a) in terms {
                    s.add(a * cis((*j as f64 * u).rem_euclid(1.0)));
                }
                s.value()
            }
            Shape::Step { breaks, values } => values[breaks.partition_point(|&b| b <= u)],
            Shape::Indicator { lo, hi } => real(if u >= *lo && u < *hi { 1.0 } else { 0.0 }),
            Shape::FracPower { c, p, lo, hi } => {
                if u >= *lo && u < *hi {
                    real(c * u.powf(*p))
                } else {
                    real(0.0)
                }
            }
            Shape::Sampled { table, rule } => {
                let n = table.len();
                let t = u * n as f64;
                match rule {
                    Interpolation::Nearest => table[(t.round() as usize) % n],
                    Interpolation::Linear => {
                        let i = (t.floor() as usize).min(n - 1);
                        let w = t - i as f64;
                        table[i] * (1.0 - w) + table[(i + 1) % n] * w
                    }
                }
            }
            Shape::Sum(parts) => parts
                .iter()
                .map(|(c, s)| c * s.eval(u))
                .collect::<ComplexSum>()
                .value(),
            Shape::Custom { eval, .. } => eval(u),
        }
    }

    /// `d/du`, zero on flat pieces; finite differences for custom shapes.
    pub fn derivative(&self, u: f64) -> Complex64 {
        match self {
            Shape::Constant(_) | Shape::Step { .. } | Shape::Indicator { .. } => real(0.0),
            Shape::Trig { terms, .. } => terms
                .iter()
                .map(|(j, a)| {
                    a * Complex64::new(0.0, 2.0 * PI * *j as f64)
                        * cis((*j as f64 * u).rem_euclid(1.0))
                })
                .collect::<ComplexSum>()
                .value(),
            Shape::FracPower { c, p, lo, hi } => {
                if u > *lo && u < *hi {
                    real(c * p * u.powf(p - 1.0))
                } else {
                    real(0.0)
                }
            }
            Shape::Sampled { table, rule } => match rule {
                Interpolation::Nearest => real(0.0),
                Interpolation::Linear => {
                    let n = table.len();
                    let i = ((u * n as f64).floor() as usize).min(n - 1);
                    (table[(i + 1) % n] - table[i]) * n as f64
                }
            },
            Shape::Sum(parts) => parts
                .iter()
                .map(|(c, s)| c * s.derivative(u))
                .collect::<ComplexSum>()
                .value(),
            Shape::Custom { eval, .. } => {
                let h = 1e-6 * u.abs().max(1e-3);
                (eval(u + h) - eval(u - h)) / (2.0 * h)
            }
        }
    }

    /// Points in `(0, 1)` where the shape is not smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            Shape::Step { breaks, .. } => breaks.clone(),
            Shape::Indicator { lo, hi } | Shape::FracPower { lo, hi, .. } => vec![*lo, *hi],
            Shape::Sampled { table, rule } => {
                let n = table.len() as f64;
                let off = if *rule == Interpolation::Nearest {
                    0.5
                } else {
                    0.0
                };
                (0..table.len()).map(|j| (j as f64 + off) / n).collect()
            }
            Shape::Sum(parts) => parts.iter().flat_map(|(_, s)| s.kinks()).collect(),
            _ => Vec::new(),
        }
        .into_iter()
        .filter(|u| *u > 0.0 && *u < 1.0)
        .collect()
    }

    /// `int_{u0}^{u1}` for `0 <= u0 <= u1 <= 1`.
    pub fn integral(&self, u0: f64, u1: f64) -> Complex64 {
        if u1 <= u0 {
            return real(0.0);
        }
        if let Some(pieces) = self.pieces() {
            return pieces
                .iter()
                .filter_map(|&(lo, hi, v)| overlap(u0, u1, lo, hi).map(|(a, b)| v * (b - a)))
                .collect::<ComplexSum>()
                .value();
        }
        match self {
            Shape::Constant(c) => c * (u1 - u0),
            Shape::Trig { a0, terms } => {
                let mut s = ComplexSum::new();
                s.add(a0 * (u1 - u0));
                for (j, a) in terms {
                    // exp(2 pi i j u) is the character at -j
                    s.add(a * char_integral(-j, u0, u1));
                }
                s.value()
            }
            Shape::FracPower { c, p, lo, hi } => match overlap(u0, u1, *lo, *hi) {
                Some((a, b)) => real(c * (b.powf(p + 1.0) - a.powf(p + 1.0)) / (p + 1.0)),
                None => real(0.0),
            },
            Shape::Sum(parts) => parts
                .iter()
                .map(|(c, s)| c * s.integral(u0, u1))
                .collect::<ComplexSum>()
                .value(),
            _ => {
                let kinks = self.kinks();
                integrate_complex(|u| self.eval(u), u0, u1, &kinks, QuadOptions::default()).value
            }
        }
    }

    /// `int_0^1 exp(-2 pi i j u) f(u) du`.
    pub fn coefficient(&self, j: i64) -> Complex64 {
        if j == 0 {
            return self.integral(0.0, 1.0);
        }
        if let Some(pieces) = self.pieces() {
            return pieces
                .iter()
                .map(|&(lo, hi, v)| v * char_integral(j, lo, hi))
                .collect::<ComplexSum>()
                .value();
        }
        match self {
            Shape::Constant(_) => real(0.0),
            Shape::Trig { terms, .. } => terms
                .iter()
                .find(|(i, _)| *i == j)
                .map(|(_, a)| *a)
                .unwrap_or_default(),
            Shape::Sum(parts) => parts
                .iter()
                .map(|(c, s)| c * s.coefficient(j))
                .collect::<ComplexSum>()
                .value(),
            _ => {
                let mut kinks = self.kinks();
                if let Shape::FracPower { lo, .. } = self {
                    if *lo == 0.0 {
                        kinks.extend(crate::numeric::quad::graded_breaks(0.0, 0.0, 1.0, 60));
                    }
                }
                integrate_complex(
                    |u| cis(-(j as f64) * u) * self.eval(u),
                    0.0,
                    1.0,
                    &kinks,
                    QuadOptions::default(),
                )
                .value
            }
        }
    }

    pub fn sup_bound(&self) -> Option<f64> {
        match self {
            Shape::Constant(c) => Some(c.norm()),
            Shape::Trig { a0, terms } => {
                Some(a0.norm() + terms.iter().map(|(_, a)| a.norm()).sum::<f64>())
            }
            Shape::Step { values, .. } => Some(values.iter().map(|v| v.norm()).fold(0.0, f64::max)),
            Shape::Indicator { .. } => Some(1.0),
            Shape::FracPower { c, p, lo, hi } => {
                if *p >= 0.0 {
                    Some(c.abs() * hi.powf(*p))
                } else if *lo > 0.0 {
                    Some(c.abs() * lo.powf(*p))
                } else {
                    None
                }
            }
            Shape::Sampled { table, .. } => {
                Some(table.iter().map(|v| v.norm()).fold(0.0, f64::max))
            }
            Shape::Sum(parts) => parts
                .iter()
                .map(|(c, s)| s.sup_bound().map(|b| c.norm() * b))
                .sum(),
            Shape::Custom { .. } => None,
        }
    }

    fn is_riemann(&self) -> bool {
        match self {
            Shape::FracPower { p, lo, .. } => *p >= 0.0 || *lo > 0.0,
            Shape::Sum(parts) => parts.iter().all(|(_, s)| s.is_riemann()),
            _ => true,
        }
    }
}

/// An `L`-periodic function given by its shape on one period.
#[derive(Clone, Debug)]
pub struct PeriodicFunction {
    period: BigRational,
    period_f64: f64,
    shape: Shape,
    riemann: bool,
}

impl PeriodicFunction {
    pub fn new(period: BigRational, shape: Shape) -> Result<Self> {
        if !period.is_positive() {
            return Err(invalid("period must be positive"));
        }
        shape.validate()?;
        let riemann = shape.is_riemann();
        let period_f64 = RealConst::Rational(period.clone()).to_f64();
        Ok(Self {
            period,
            period_f64,
            shape,
            riemann,
        })
    }

    /// Period one.
    pub fn unit(shape: Shape) -> Result<Self> {
        Self::new(BigRational::one(), shape)
    }

    pub fn constant(c: Complex64) -> Self {
        Self::unit(Shape::Constant(c)).expect("constant shape")
    }

    /// Declares a custom shape as only Lebesgue integrable.
    pub fn lebesgue_only(mut self) -> Self {
        self.riemann = false;
        self
    }

    pub fn period(&self) -> &BigRational {
        &self.period
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn is_riemann(&self) -> bool {
        self.riemann
    }

    pub fn eval_unit(&self, u: f64) -> Complex64 {
        self.shape.eval(u)
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let u = (x / self.period_f64).rem_euclid(1.0);
        self.shape.eval(if u >= 1.0 { 0.0 } else { u })
    }

    pub fn eval_fixed(&self, x: &Fixed) -> Complex64 {
        self.shape.eval(x.frac_div(&self.period))
    }

    pub fn derivative(&self, x: f64) -> Complex64 {
        let u = (x / self.period_f64).rem_euclid(1.0);
        self.shape.derivative(u) / self.period_f64
    }

    pub fn mean(&self) -> Complex64 {
        self.shape.integral(0.0, 1.0)
    }

    /// `int_a^b f(x) dx`.
    pub fn window_integral(&self, a: f64, b: f64) -> Complex64 {
        let l = self.period_f64;
        let whole = self.mean();
        let prim = |x: f64| {
            let t = x / l;
            let k = t.floor();
            let u = (t - k).clamp(0.0, 1.0);
            whole * k + self.shape.integral(0.0, u)
        };
        (prim(b) - prim(a)) * l
    }

    /// Fourier–Bohr coefficient at `k`: zero unless `k L` is an integer.
    pub fn coefficient(&self, k: &RealConst) -> Complex64 {
        let kl = match k {
            RealConst::Rational(r) => r * &self.period,
            RealConst::Quadratic(_) => return real(0.0),
        };
        if !kl.is_integer() {
            return real(0.0);
        }
        use num_traits::ToPrimitive;
        match kl.to_integer().to_i64() {
            Some(j) => self.shape.coefficient(j),
            None => real(0.0),
        }
    }

    pub fn sup_bound(&self) -> Option<f64> {
        self.shape.sup_bound()
    }

    /// Non-smooth points in `[a, b]`, including period boundaries.
    pub fn kinks(&self, a: f64, b: f64) -> Vec<f64> {
        let l = self.period_f64;
        let local = self.shape.kinks();
        let k0 = (a / l).floor() as i64;
        let k1 = (b / l).ceil() as i64;
        if k1 - k0 > 100_000 {
            return Vec::new();
        }
        let mut out = Vec::new();
        for k in k0..=k1 {
            let base = k as f64 * l;
            out.push(base);
            out.extend(local.iter().map(|u| base + u * l));
        }
        out.retain(|x| *x >= a && *x <= b);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn step_function_mean_and_coefficients() {
        let s = Shape::Step {
            breaks: vec![0.25, 0.75],
            values: vec![real(1.0), real(-1.0), real(1.0)],
        };
        let f = PeriodicFunction::unit(s).unwrap();
        assert!(f.mean().norm() < 1e-16);
        assert_eq!(f.eval(0.5).re, -1.0);
        assert_eq!(f.eval(3.9).re, 1.0);
        // int_0^1 f e^{-2 pi i u} = 2/pi
        let c = f.coefficient(&RealConst::integer(1));
        assert!((c.re - 2.0 / PI).abs() < 1e-15 && c.im.abs() < 1e-15);
        assert!(f.coefficient(&RealConst::ratio(1, 2)).norm() == 0.0);
    }

    #[test]
    fn window_integrals_across_periods() {
        let f = PeriodicFunction::new(r(3, 2), Shape::Indicator { lo: 0.0, hi: 0.5 }).unwrap();
        // ones on [0, 0.75) + 1.5 Z
        assert!((f.window_integral(0.0, 3.0) - real(1.5)).norm() < 1e-14);
        assert!((f.window_integral(-1.0, 0.5) - real(0.75)).norm() < 1e-14);
        assert!((f.mean() - real(0.5)).norm() < 1e-15);
        assert_eq!(f.eval(1.6).re, 1.0);
        assert_eq!(f.eval(1.4).re, 0.0);
    }

    #[test]
    fn frac_power_closed_forms() {
        let s = Shape::FracPower {
            c: 1.0,
            p: -0.25,
            lo: 0.0,
            hi: 1.0,
        };
        let f = PeriodicFunction::unit(s).unwrap();
        assert!(!f.is_riemann());
        assert!((f.mean().re - 4.0 / 3.0).abs() < 1e-15);
        assert!(f.sup_bound().is_none());
    }

    #[test]
    fn sampled_tables() {
        let table = vec![real(0.0), real(1.0), real(0.0), real(-1.0)];
        let lin = Shape::Sampled {
            table: table.clone(),
            rule: Interpolation::Linear,
        };
        assert!((lin.eval(0.125).re - 0.5).abs() < 1e-15);
        assert!(lin.integral(0.0, 1.0).norm() < 1e-14);
        let near = Shape::Sampled {
            table,
            rule: Interpolation::Nearest,
        };
        assert_eq!(near.eval(0.2).re, 1.0);
        assert_eq!(near.eval(0.9).re, 0.0);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(PeriodicFunction::unit(Shape::Step {
            breaks: vec![0.5],
            values: vec![real(1.0)]
        })
        .is_err());
        assert!(PeriodicFunction::unit(Shape::Indicator { lo: 0.6, hi: 0.5 }).is_err());
        assert!(PeriodicFunction::new(r(-1, 1), Shape::Constant(real(1.0))).is_err());
    }
}
