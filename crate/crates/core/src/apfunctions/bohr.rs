use num_complex::Complex64;

use super::{Frequency, TrigPolynomial};
use crate::error::{invalid, Result};
use crate::numeric::sum::KahanSum;
use crate::numeric::RealConst;

/// An absolutely summable Bohr series given by its leading terms and a
/// certificate `residual >= sum of |a_l|` over all omitted terms.
#[derive(Clone, Debug)]
pub struct BohrSeries {
    poly: TrigPolynomial,
    residual: f64,
    // tails[m] = sum_{l > m} |a_l| + residual
    tails: Vec<f64>,
}

impl BohrSeries {
    pub fn new(a0: Complex64, terms: Vec<(Frequency, Complex64)>, residual: f64) -> Result<Self> {
        if !(residual >= 0.0 && residual.is_finite()) {
            return Err(invalid("tail certificate must be finite and non-negative"));
        }
        let poly = TrigPolynomial::new(a0, terms)?;
        let n = poly.terms().len();
        let mut tails = vec![residual; n + 1];
        let mut acc = KahanSum::new();
        acc.add(residual);
        for m in (0..n).rev() {
            acc.add(poly.terms()[m].1.norm());
            tails[m] = acc.value();
        }
        for m in (0..n).rev() {
            // keep the sequence non-increasing despite rounding
            tails[m] = tails[m].max(tails[m + 1]);
        }
        Ok(Self {
            poly,
            residual,
            tails,
        })
    }

    /// Frequencies `1, sqrt 2, tau, sqrt 3, sqrt 5, ...` with `a_l = 2^(1-l)`,
    /// listed up to `len` terms; the residual certifies the infinite remainder.
    pub fn geometric(len: usize) -> Result<Self> {
        let mut freqs = vec![
            RealConst::integer(1),
            RealConst::sqrt(2),
            RealConst::golden_ratio(),
        ];
        let mut d = 3u64;
        while freqs.len() < len {
            if crate::numeric::realconst::is_square_free(d) {
                freqs.push(RealConst::sqrt(d));
            }
            d += 1;
        }
        freqs.truncate(len);
        let terms = freqs
            .into_iter()
            .enumerate()
            .map(|(i, k)| {
                (
                    Frequency::new(k),
                    Complex64::new(2f64.powi(-(i as i32)), 0.0),
                )
            })
            .collect();
        Self::new(Complex64::new(0.0, 0.0), terms, 2f64.powi(1 - len as i32))
    }

    pub fn len(&self) -> usize {
        self.poly.terms().len()
    }

    pub fn is_empty(&self) -> bool {
        self.poly.terms().is_empty()
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// All listed terms; evaluates the series up to `residual`.
    pub fn poly(&self) -> &TrigPolynomial {
        &self.poly
    }

    /// `sum_{l > m} |a_l|` plus the residual.
    pub fn tail(&self, m: usize) -> f64 {
        self.tails[m.min(self.len())]
    }

    /// First `m` terms and the tail bound.
    pub fn truncate(&self, m: usize) -> Result<(TrigPolynomial, f64)> {
        if m > self.len() {
            return Err(invalid(format!(
                "truncation order {m} exceeds {} terms",
                self.len()
            )));
        }
        let p = TrigPolynomial::new(self.poly.a0(), self.poly.terms()[..m].to_vec())?;
        Ok((p, self.tail(m)))
    }

    /// Same frequencies with coefficients scaled by `factor(k)`, `|factor| <= 1`.
    pub fn map_coefficients(&self, factor: impl Fn(f64) -> f64) -> Result<Self> {
        let p = self.poly.map_coefficients(factor);
        Self::new(p.a0(), p.terms().to_vec(), self.residual)
    }
}

/// A finite series with zero residual.
impl From<TrigPolynomial> for BohrSeries {
    fn from(p: TrigPolynomial) -> Self {
        BohrSeries::new(p.a0(), p.terms().to_vec(), 0.0).expect("valid polynomial")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_tails() {
        let s = BohrSeries::geometric(12).unwrap();
        let (p, t) = s.truncate(2).unwrap();
        assert_eq!(p.terms().len(), 2);
        assert_eq!(t, 0.5);
        let (c, t0) = s.truncate(0).unwrap();
        assert!(c.terms().is_empty());
        assert_eq!(t0, 2.0);
        assert_eq!(s.truncate(12).unwrap().1, 2f64.powi(-11));
        assert!(s.truncate(13).is_err());
        let finite = BohrSeries::from(s.truncate(5).unwrap().0);
        assert_eq!(finite.truncate(5).unwrap().1, 0.0);
        for m in 0..12 {
            assert!(s.tail(m + 1) <= s.tail(m));
        }
    }
}
