use num_complex::Complex64;
use num_traits::One;

use super::periodic::{PeriodicFunction, Shape};
use crate::error::{invalid, AvgError, Result};
use crate::numeric::quad::{integrate_complex, integrate_singular, QuadOptions};
use crate::numeric::Fixed;

/// Local model `c_left |t|^-a` on `(-delta, 0)` and `c_right t^-a` on `(0, delta)`
/// in the offset `t = x - z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerSingularity {
    pub z: f64,
    pub a: f64,
    pub c_left: f64,
    pub c_right: f64,
    pub delta: f64,
}

impl PowerSingularity {
    pub fn symmetric(z: f64, a: f64, c: f64, delta: f64) -> Self {
        Self {
            z,
            a,
            c_left: c,
            c_right: c,
            delta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a < 0.5) {
            return Err(invalid(format!(
                "singularity exponent {} must lie in (0, 1/2)",
                self.a
            )));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(invalid("singularity half-width must be positive"));
        }
        if !(self.c_left.is_finite() && self.c_right.is_finite()) {
            return Err(invalid("singularity coefficients must be finite"));
        }
        Ok(())
    }

    /// Model value at offset `t`; infinite at `t = 0` unless both coefficients vanish.
    pub fn value(&self, t: f64) -> f64 {
        if t > 0.0 && t < self.delta {
            self.c_right * t.powf(-self.a)
        } else if t < 0.0 && t > -self.delta {
            self.c_left * (-t).powf(-self.a)
        } else if t == 0.0 && (self.c_left != 0.0 || self.c_right != 0.0) {
            f64::INFINITY
        } else {
            0.0
        }
    }

    fn side_integral(&self, c: f64, u0: f64, u1: f64) -> f64 {
        let e = 1.0 - self.a;
        c * (u1.powf(e) - u0.powf(e)) / e
    }

    /// `int_{t0}^{t1}` of the model over offsets, closed form.
    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        if t1 <= t0 {
            return 0.0;
        }
        let mut s = 0.0;
        let (r0, r1) = (t0.max(0.0), t1.min(self.delta));
        if r0 < r1 {
            s += self.side_integral(self.c_right, r0, r1);
        }
        let (l0, l1) = ((-t1).max(0.0), (-t0).min(self.delta));
        if l0 < l1 {
            s += self.side_integral(self.c_left, l0, l1);
        }
        s
    }

    /// Same as `integral` for `|model|`.
    pub fn abs_integral(&self, t0: f64, t1: f64) -> f64 {
        let abs = Self {
            c_left: self.c_left.abs(),
            c_right: self.c_right.abs(),
            ..*self
        };
        abs.integral(t0, t1)
    }

    pub fn mass(&self) -> f64 {
        self.integral(-self.delta, self.delta)
    }

    /// `int |model'|` over `cutoff < |t| < delta` with `cutoff = N^-s`.
    pub fn variation(&self, s: f64, n: u64) -> Result<f64> {
        let cutoff = (n as f64).powf(-s);
        if cutoff >= self.delta {
            return Err(AvgError::DegenerateWindow {
                cutoff,
                delta: self.delta,
            });
        }
        // each side: c (N^{s a} - delta^{-a})
        let grow = (n as f64).powf(s * self.a) - self.delta.powf(-self.a);
        Ok((self.c_left.abs() + self.c_right.abs()) * grow)
    }
}

/// Signed offset of `u` from `z` on the unit circle, in `[-1/2, 1/2)`.
pub(crate) fn circle_offset(u: f64, z: f64) -> f64 {
    let d = (u - z).rem_euclid(1.0);
    if d >= 0.5 {
        d - 1.0
    } else {
        d
    }
}

/// A 1-periodic function with power-law singularities plus a remainder.
#[derive(Clone, Debug)]
pub struct SingularPeriodic {
    singularities: Vec<PowerSingularity>,
    remainder: PeriodicFunction,
}

impl SingularPeriodic {
    pub fn new(
        mut singularities: Vec<PowerSingularity>,
        remainder: PeriodicFunction,
    ) -> Result<Self> {
        if !remainder.period().is_one() {
            return Err(invalid("the remainder must have period 1"));
        }
        for s in &mut singularities {
            s.validate()?;
            if s.delta > 0.5 {
                return Err(invalid("singularity half-width must not exceed 1/2"));
            }
            s.z = s.z.rem_euclid(1.0);
        }
        for (i, a) in singularities.iter().enumerate() {
            for b in &singularities[i + 1..] {
                let d = circle_offset(a.z, b.z).abs();
                if d < a.delta + b.delta {
                    return Err(invalid(format!(
                        "singular windows around {} and {} overlap mod 1",
                        a.z, b.z
                    )));
                }
            }
        }
        Ok(Self {
            singularities,
            remainder,
        })
    }

    /// `<x>^p` for `p` in `(-1/2, 0)`: a one-sided model on `(0, 1/2)` and the
    /// plain power on `[1/2, 1)`.
    pub fn frac_power(p: f64) -> Result<Self> {
        let model = PowerSingularity {
            z: 0.0,
            a: -p,
            c_left: 0.0,
            c_right: 1.0,
            delta: 0.5,
        };
        let remainder = PeriodicFunction::unit(Shape::FracPower {
            c: 1.0,
            p,
            lo: 0.5,
            hi: 1.0,
        })?;
        Self::new(vec![model], remainder)
    }

    pub fn singularities(&self) -> &[PowerSingularity] {
        &self.singularities
    }

    pub fn remainder(&self) -> &PeriodicFunction {
        &self.remainder
    }

    pub fn eval_unit(&self, u: f64) -> Complex64 {
        let mut v = self.remainder.eval_unit(u);
        for s in &self.singularities {
            v += s.value(circle_offset(u, s.z));
        }
        v
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let u = x.rem_euclid(1.0);
        self.eval_unit(if u >= 1.0 { 0.0 } else { u })
    }

    pub fn eval_fixed(&self, x: &Fixed) -> Complex64 {
        self.eval_unit(x.frac_f64())
    }

    /// Mean over one period: closed-form model masses plus the remainder's mean.
    pub fn mean(&self) -> Complex64 {
        let mass: f64 = self.singularities.iter().map(|s| s.mass()).sum();
        self.remainder.mean() + mass
    }

    /// `int_a^b f(x) dx`.
    pub fn window_integral(&self, a: f64, b: f64) -> Complex64 {
        let mut v = self.remainder.window_integral(a, b);
        for s in &self.singularities {
            // all translates z + j meeting [a - delta, b + delta]
            let j0 = (a - s.delta - s.z).floor() as i64;
            let j1 = (b + s.delta - s.z).ceil() as i64;
            for j in j0..=j1 {
                let y = s.z + j as f64;
                v += s.integral(a - y, b - y);
            }
        }
        v
    }

    /// Singular points in `[a, b]`.
    pub fn poles(&self, a: f64, b: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for s in &self.singularities {
            let j0 = (a - s.z).floor() as i64;
            let j1 = (b - s.z).ceil() as i64;
            out.extend(
                (j0..=j1)
                    .map(|j| s.z + j as f64)
                    .filter(|y| *y >= a && *y <= b),
            );
        }
        out
    }

    /// Non-smooth points in `[a, b]`: poles, model window ends and remainder kinks.
    pub fn kinks(&self, a: f64, b: f64) -> Vec<f64> {
        let mut out = self.remainder.kinks(a, b);
        for y in self.poles(a - 0.5, b + 0.5) {
            for s in &self.singularities {
                if ((y - s.z).rem_euclid(1.0)).min(1.0 - (y - s.z).rem_euclid(1.0)) < 1e-12 {
                    out.extend([y - s.delta, y, y + s.delta]);
                }
            }
        }
        out.retain(|x| *x >= a && *x <= b);
        out
    }

    /// The declared singularity at `z` (mod 1).
    pub fn singularity_at(&self, z: f64) -> Result<&PowerSingularity> {
        self.singularities
            .iter()
            .find(|s| circle_offset(z.rem_euclid(1.0), s.z).abs() < 1e-12)
            .ok_or_else(|| invalid(format!("{z} is not a declared singularity")))
    }

    /// `V_N(z, s) = int |f'|` over `N^-s < |x - z| < delta_z`.
    ///
    /// Closed form when the remainder is constant; jumps of the remainder
    /// count towards the variation.
    pub fn variation(&self, z: f64, s: f64, n: u64) -> Result<f64> {
        if !(s > 0.0) || n < 2 {
            return Err(invalid("variation needs s > 0 and N >= 2"));
        }
        let sing = self.singularity_at(z)?;
        if matches!(self.remainder.shape(), Shape::Constant(_)) {
            return model_variation(sing, sing.z, s, n, None);
        }
        let r = &self.remainder;
        let g = |x: f64| r.eval(x);
        let dg = |x: f64| r.derivative(x);
        let kinks = r.kinks(sing.z - sing.delta, sing.z + sing.delta);
        model_variation(sing, sing.z, s, n, Some((&g, &dg, kinks)))
    }

    pub fn abs_window_integral(&self, a: f64, b: f64) -> Result<f64> {
        let breaks = self.kinks(a, b);
        let poles = self.poles(a, b);
        let opts = QuadOptions {
            max_intervals: 20_000,
            ..QuadOptions::default()
        };
        let r = integrate_singular(
            |x| Complex64::new(self.eval(x).norm(), 0.0),
            a,
            b,
            &poles,
            &breaks,
            opts,
        );
        if !r.converged || !r.value.re.is_finite() {
            return Err(AvgError::DivergentWindow { start: a, end: b });
        }
        Ok(r.value.re)
    }

    /// Fourier coefficient at integer `j` by graded quadrature.
    pub fn coefficient(&self, j: i64) -> Complex64 {
        let breaks = self.kinks(0.0, 1.0);
        let poles = self.poles(0.0, 1.0);
        let opts = QuadOptions {
            max_intervals: 20_000,
            ..QuadOptions::default()
        };
        integrate_singular(
            |u| super::trig::cis(-(j as f64) * u) * self.eval(u),
            0.0,
            1.0,
            &poles,
            &breaks,
            opts,
        )
        .value
    }
}

/// A remainder `(g, g', kinks)`.
pub(crate) type Remainder<'a> = (
    &'a dyn Fn(f64) -> Complex64,
    &'a dyn Fn(f64) -> Complex64,
    Vec<f64>,
);

/// `V_N` for a model at `z` plus a remainder `g` with derivative `dg`.
///
/// Without a remainder this is the closed form. Otherwise `|model' + g'|` is
/// integrated over each side in the variable `ln |x - z|`, and jumps of `g`
/// inside the windows are added.
pub(crate) fn model_variation(
    model: &PowerSingularity,
    z: f64,
    s: f64,
    n: u64,
    remainder: Option<Remainder<'_>>,
) -> Result<f64> {
    let closed = model.variation(s, n)?;
    let Some((g, dg, kinks)) = remainder else {
        return Ok(closed);
    };
    let cutoff = (n as f64).powf(-s);
    let (lo, hi) = (cutoff.ln(), model.delta.ln());
    let mut total = 0.0;
    for (side, c) in [(-1.0, model.c_left), (1.0, model.c_right)] {
        // x = z + side e^u; d/dx of c |x - z|^-a is -side a c |x - z|^(-a-1)
        let integrand = |u: f64| {
            let t = u.exp();
            let x = z + side * t;
            let m = -side * model.a * c * t.powf(-model.a - 1.0);
            Complex64::new((dg(x) + m).norm() * t, 0.0)
        };
        let breaks: Vec<f64> = kinks
            .iter()
            .map(|k| (k - z) * side)
            .filter(|t| *t > cutoff && *t < model.delta)
            .map(f64::ln)
            .collect();
        let opts = QuadOptions {
            max_intervals: 20_000,
            ..QuadOptions::default()
        };
        total += integrate_complex(integrand, lo, hi, &breaks, opts).value.re;
        for u in breaks {
            let k = z + side * u.exp();
            let h = 1e-13 * k.abs().max(1.0);
            total += (g(k + h) - g(k - h)).norm();
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frac_power_mean_is_four_thirds() {
        let f = SingularPeriodic::frac_power(-0.25).unwrap();
        assert!((f.mean().re - 4.0 / 3.0).abs() < 1e-14);
        assert!((f.eval(2.0625).re - 2.0).abs() < 1e-14);
        assert!((f.eval(0.75).re - 0.75f64.powf(-0.25)).abs() < 1e-15);
        assert!((f.window_integral(-3.0, 2.0).re - 5.0 * 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_variation_closed_form() {
        let model = PowerSingularity::symmetric(0.0, 0.25, 1.0, 0.5);
        let f = SingularPeriodic::new(
            vec![model],
            PeriodicFunction::constant(Complex64::new(0.0, 0.0)),
        )
        .unwrap();
        let v = f.variation(0.0, 1.0, 10_000).unwrap();
        let want = 2.0 * (10.0 - 2f64.powf(0.25));
        assert!((v - want).abs() < 1e-12 * want);
        // N' = 16 N doubles the N^{s/4} part
        let v2 = f.variation(0.0, 1.0, 160_000).unwrap();
        assert!((v2 - 2.0 * (20.0 - 2f64.powf(0.25))).abs() < 1e-11);
        assert!(matches!(
            f.variation(0.0, 1.0, 1),
            Err(AvgError::InvalidArgument(_))
        ));
        assert!(matches!(
            model.variation(0.1, 2),
            Err(AvgError::DegenerateWindow { .. })
        ));
    }

    #[test]
    fn rejects_overlapping_windows_and_bad_exponents() {
        let zero = PeriodicFunction::constant(Complex64::new(0.0, 0.0));
        let a = PowerSingularity::symmetric(0.1, 0.25, 1.0, 0.2);
        let b = PowerSingularity::symmetric(0.3, 0.25, 1.0, 0.2);
        assert!(SingularPeriodic::new(vec![a, b], zero.clone()).is_err());
        let c = PowerSingularity::symmetric(0.5, 0.25, 1.0, 0.05);
        assert!(SingularPeriodic::new(vec![a, c], zero.clone()).is_ok());
        let bad = PowerSingularity::symmetric(0.0, 0.5, 1.0, 0.1);
        assert!(SingularPeriodic::new(vec![bad], zero).is_err());
    }
}
