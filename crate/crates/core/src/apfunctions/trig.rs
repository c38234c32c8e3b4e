use std::f64::consts::PI;

use num_complex::Complex64;

use super::Frequency;
use crate::error::{invalid, Result};
use crate::numeric::sum::ComplexSum;
use crate::numeric::Fixed;

pub(crate) fn cis(turns: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * turns)
}

/// `a0 + sum a_l exp(2 pi i k_l x)` with distinct non-zero frequencies.
#[derive(Clone, Debug)]
pub struct TrigPolynomial {
    a0: Complex64,
    terms: Vec<(Frequency, Complex64)>,
}

impl TrigPolynomial {
    pub fn new(a0: Complex64, terms: Vec<(Frequency, Complex64)>) -> Result<Self> {
        for (i, (k, _)) in terms.iter().enumerate() {
            if k.is_zero() {
                return Err(invalid(
                    "frequencies must be non-zero; use a0 for the constant term",
                ));
            }
            if terms[..i].iter().any(|(j, _)| j == k) {
                return Err(invalid(format!("repeated frequency {k}")));
            }
        }
        Ok(Self { a0, terms })
    }

    pub fn constant(c: Complex64) -> Self {
        Self {
            a0: c,
            terms: Vec::new(),
        }
    }

    /// `exp(2 pi i k x)`.
    pub fn character(k: Frequency) -> Result<Self> {
        Self::new(
            Complex64::new(0.0, 0.0),
            vec![(k, Complex64::new(1.0, 0.0))],
        )
    }

    /// `sin(2 pi k x)`.
    pub fn sine(k: i64) -> Result<Self> {
        let half = Complex64::new(0.0, -0.5);
        Self::new(
            Complex64::new(0.0, 0.0),
            vec![
                (Frequency::integer(k), half),
                (Frequency::integer(-k), -half),
            ],
        )
    }

    pub fn a0(&self) -> Complex64 {
        self.a0
    }

    pub fn terms(&self) -> &[(Frequency, Complex64)] {
        &self.terms
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let mut s = ComplexSum::new();
        s.add(self.a0);
        for (k, a) in &self.terms {
            s.add(a * cis(k.phase_f64(x)));
        }
        s.value()
    }

    /// Evaluation at a high-precision argument; phases are reduced exactly.
    pub fn eval_fixed(&self, x: &Fixed) -> Complex64 {
        let mut s = ComplexSum::new();
        s.add(self.a0);
        for (k, a) in &self.terms {
            s.add(a * cis(k.phase(x)));
        }
        s.value()
    }

    pub fn derivative(&self, x: f64) -> Complex64 {
        let mut s = ComplexSum::new();
        for (k, a) in &self.terms {
            s.add(a * Complex64::new(0.0, 2.0 * PI * k.value()) * cis(k.phase_f64(x)));
        }
        s.value()
    }

    pub fn mean(&self) -> Complex64 {
        self.a0
    }

    /// Exact coefficient lookup: `a_l` at `k_l`, `a0` at 0, else 0.
    pub fn coefficient(&self, k: &Frequency) -> Complex64 {
        if k.is_zero() {
            return self.a0;
        }
        self.terms
            .iter()
            .find(|(j, _)| j == k)
            .map(|(_, a)| *a)
            .unwrap_or_default()
    }

    pub fn sup_bound(&self) -> f64 {
        self.a0.norm() + self.terms.iter().map(|(_, a)| a.norm()).sum::<f64>()
    }

    /// Whether every frequency is an integer.
    pub fn is_one_periodic(&self) -> bool {
        self.terms.iter().all(|(k, _)| k.is_integer())
    }

    /// `int_a^b` in closed form.
    pub fn window_integral(&self, a: f64, b: f64) -> Complex64 {
        let mut s = ComplexSum::new();
        s.add(self.a0 * (b - a));
        for (k, c) in &self.terms {
            let w = Complex64::new(0.0, 2.0 * PI * k.value());
            s.add(c * (cis(k.phase_f64(b)) - cis(k.phase_f64(a))) / w);
        }
        s.value()
    }

    /// Multiplies each `a_l` by `factor(k_l)`; `a0` is kept.
    pub fn map_coefficients(&self, factor: impl Fn(f64) -> f64) -> Self {
        Self {
            a0: self.a0,
            terms: self
                .terms
                .iter()
                .map(|(k, a)| (k.clone(), a * factor(k.value())))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_coefficients_are_exact() {
        let p = TrigPolynomial::new(
            Complex64::new(2.0, 0.0),
            vec![(Frequency::integer(1), Complex64::new(3.0, 0.0))],
        )
        .unwrap();
        assert_eq!(p.mean(), Complex64::new(2.0, 0.0));
        assert_eq!(
            p.coefficient(&Frequency::integer(0)),
            Complex64::new(2.0, 0.0)
        );
        assert_eq!(
            p.coefficient(&Frequency::integer(1)),
            Complex64::new(3.0, 0.0)
        );
        assert_eq!(
            p.coefficient(&Frequency::integer(2)),
            Complex64::new(0.0, 0.0)
        );
        assert!((p.eval(0.25) - Complex64::new(2.0, 3.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_frequencies() {
        let one = Complex64::new(1.0, 0.0);
        assert!(TrigPolynomial::new(one, vec![(Frequency::integer(0), one)]).is_err());
        assert!(TrigPolynomial::new(
            one,
            vec![(Frequency::integer(2), one), (Frequency::integer(2), one)]
        )
        .is_err());
    }

    #[test]
    fn sine_and_window_integral() {
        let s = TrigPolynomial::sine(1).unwrap();
        assert!((s.eval(0.25).re - 1.0).abs() < 1e-15);
        assert!(s.eval(0.25).im.abs() < 1e-15);
        // int_0^{1/2} sin(2 pi x) dx = 1/pi
        assert!((s.window_integral(0.0, 0.5).re - 1.0 / PI).abs() < 1e-15);
        assert!((s.derivative(0.0).re - 2.0 * PI).abs() < 1e-12);
    }
}
