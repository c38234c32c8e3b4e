use std::fmt;
use std::sync::RwLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;

use crate::error::Result;
use crate::numeric::fixed::{dyadic_fraction_to_f64, ratio_to_f64};
use crate::numeric::{Fixed, RealConst};

/// A real frequency `k`, carried exactly so that `k x` can be reduced mod 1
/// for very large `x`.
pub struct Frequency {
    exact: RealConst,
    approx: f64,
    // best fixed-point approximation computed so far (quadratic frequencies)
    cache: RwLock<Option<Fixed>>,
}

impl Frequency {
    pub fn new(exact: RealConst) -> Self {
        let approx = exact.to_f64();
        Self {
            exact,
            approx,
            cache: RwLock::new(None),
        }
    }

    pub fn integer(k: i64) -> Self {
        Self::new(RealConst::integer(k))
    }

    pub fn from_f64(k: f64) -> Option<Self> {
        RealConst::from_f64(k).map(Self::new)
    }

    pub fn parse(text: &str) -> Result<Self> {
        RealConst::parse(text).map(Self::new)
    }

    pub fn value(&self) -> f64 {
        self.approx
    }

    pub fn exact(&self) -> &RealConst {
        &self.exact
    }

    pub fn is_zero(&self) -> bool {
        self.exact.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.exact.as_rational().is_some_and(|r| r.is_integer())
    }

    /// Integer value, if the frequency is an integer that fits in `i64`.
    pub fn as_integer(&self) -> Option<i64> {
        use num_traits::ToPrimitive;
        self.exact
            .as_rational()
            .filter(|r| r.is_integer())
            .and_then(|r| r.to_integer().to_i64())
    }

    /// `frac(k x)` for a double `x`.
    pub fn phase_f64(&self, x: f64) -> f64 {
        match self.as_integer() {
            // frac(k x) = frac(k frac(x)) for integer k
            Some(k) => (k as f64 * x.rem_euclid(1.0)).rem_euclid(1.0),
            _ => (self.approx * x).rem_euclid(1.0),
        }
    }

    /// `frac(k x)` for a fixed-point `x`; exact for rational `k` up to the final rounding.
    pub fn phase(&self, x: &Fixed) -> f64 {
        let fb = x.frac_bits() as usize;
        match &self.exact {
            RealConst::Rational(r) => {
                let top = r.numer() * x.mantissa();
                let bottom = r.denom() << fb;
                ratio_to_f64(&top.mod_floor(&bottom), &bottom)
            }
            RealConst::Quadratic(_) => {
                let bits = (x.int_bits() + 64) as u32;
                let k = self.fixed_at(bits);
                let total = bits as usize + fb;
                let prod = k.mantissa() * x.mantissa();
                let modulus = BigInt::one() << total;
                dyadic_fraction_to_f64(&prod.mod_floor(&modulus), total as u32)
            }
        }
    }

    fn fixed_at(&self, bits: u32) -> Fixed {
        if let Some(f) = self.cache.read().expect("cache lock").as_ref() {
            if f.frac_bits() >= bits {
                return f.truncate(bits);
            }
        }
        let f = self.exact.fixed(bits.max(128));
        let out = f.truncate(bits);
        *self.cache.write().expect("cache lock") = Some(f);
        out
    }
}

impl Clone for Frequency {
    fn clone(&self) -> Self {
        Self {
            exact: self.exact.clone(),
            approx: self.approx,
            cache: RwLock::new(self.cache.read().expect("cache lock").clone()),
        }
    }
}

impl PartialEq for Frequency {
    fn eq(&self, other: &Self) -> bool {
        self.exact == other.exact
    }
}

impl fmt::Debug for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.exact)
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.exact)
    }
}

impl From<i64> for Frequency {
    fn from(k: i64) -> Self {
        Frequency::integer(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_of_large_arguments() {
        // x = 2^80 + 1/4
        let x = Fixed::new((BigInt::one() << 82) + 1, 2);
        let k = Frequency::integer(3);
        assert_eq!(k.phase(&x), 0.75);
        let half = Frequency::new(RealConst::ratio(1, 2));
        assert_eq!(half.phase(&x), 0.125);
        let zero = Frequency::new(RealConst::integer(0));
        assert!(zero.is_zero());
        assert_eq!(zero.phase(&x), 0.0);
    }

    #[test]
    fn quadratic_phase_matches_exact_floor() {
        let k = Frequency::new(RealConst::sqrt(2));
        for e in [10u32, 100, 300] {
            let m: BigInt = (BigInt::one() << e) + 12345;
            let x = Fixed::new(m.clone() << 20, 20);
            // frac(sqrt2 * m) from an exact floor at 64 extra bits
            let scaled = k.exact().floor_scaled(&(m << 64), &BigInt::one());
            let low = scaled.mod_floor(&(BigInt::one() << 64));
            let want = dyadic_fraction_to_f64(&low, 64);
            assert!((k.phase(&x) - want).abs() < 1e-15, "e = {e}");
        }
        assert!(!k.is_integer());
    }
}
