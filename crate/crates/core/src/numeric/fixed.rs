use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Binary fixed-point real: `mantissa / 2^frac_bits`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Fixed {
    mantissa: BigInt,
    frac_bits: u32,
}

impl Fixed {
    pub fn new(mantissa: BigInt, frac_bits: u32) -> Self {
        Self {
            mantissa,
            frac_bits,
        }
    }

    pub fn zero(frac_bits: u32) -> Self {
        Self::new(BigInt::zero(), frac_bits)
    }

    /// `floor(r * 2^frac_bits) / 2^frac_bits`, error below one unit in the last place.
    pub fn from_rational_floor(r: &BigRational, frac_bits: u32) -> Self {
        let num = r.numer() << frac_bits as usize;
        Self::new(num.div_floor(r.denom()), frac_bits)
    }

    /// Exact conversion of a finite double.
    pub fn from_f64(x: f64) -> Option<Self> {
        let r = BigRational::from_float(x)?;
        // Doubles are dyadic: the denominator is a power of two.
        let frac_bits = r.denom().bits().saturating_sub(1) as u32;
        Some(Self::from_rational_floor(&r, frac_bits))
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn ulp_log2(&self) -> f64 {
        -(self.frac_bits as f64)
    }

    /// Largest integer not above the value.
    pub fn floor(&self) -> BigInt {
        floor_shift(&self.mantissa, self.frac_bits as usize)
    }

    /// Fractional part in `[0, 1)`, truncated to 53 bits.
    pub fn frac_f64(&self) -> f64 {
        let fl = self.floor();
        let rem = &self.mantissa - (fl << self.frac_bits as usize);
        dyadic_fraction_to_f64(&rem, self.frac_bits)
    }

    pub fn to_f64(&self) -> f64 {
        let fl = self.floor();
        match fl.to_f64() {
            Some(v) if v.is_finite() && v.abs() < 9.0e15 => v + self.frac_f64(),
            Some(v) => v,
            None => f64::INFINITY,
        }
    }

    /// Bits needed for the integer part (0 for values in (-1, 1)).
    pub fn int_bits(&self) -> u64 {
        self.floor().bits()
    }

    /// Rounds down to a coarser grid; no-op when `frac_bits` is not smaller.
    pub fn truncate(&self, frac_bits: u32) -> Self {
        if frac_bits == self.frac_bits {
            return self.clone();
        }
        if frac_bits > self.frac_bits {
            return self.rescale(frac_bits);
        }
        let shift = (self.frac_bits - frac_bits) as usize;
        Self::new(floor_shift(&self.mantissa, shift), frac_bits)
    }

    /// Same value on a finer grid (exact); rounds down when the grid is coarser.
    pub fn rescale(&self, frac_bits: u32) -> Self {
        if frac_bits <= self.frac_bits {
            return self.truncate(frac_bits);
        }
        let shift = (frac_bits - self.frac_bits) as usize;
        Self::new(&self.mantissa << shift, frac_bits)
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(
            self.mantissa.clone(),
            BigInt::one() << self.frac_bits as usize,
        )
    }

    /// Fractional part of `self / modulus` in `[0, 1)` for a positive rational modulus.
    pub fn frac_div(&self, modulus: &BigRational) -> f64 {
        // self / L = mantissa * den / (num * 2^b)
        let top = &self.mantissa * modulus.denom();
        let bottom = modulus.numer() << self.frac_bits as usize;
        let rem = top.mod_floor(&bottom);
        ratio_to_f64(&rem, &bottom)
    }

    pub fn add(&self, other: &Fixed) -> Fixed {
        let bits = self.frac_bits.max(other.frac_bits);
        let a = self.rescale(bits);
        let b = other.rescale(bits);
        Fixed::new(a.mantissa + b.mantissa, bits)
    }

    pub fn sub(&self, other: &Fixed) -> Fixed {
        let bits = self.frac_bits.max(other.frac_bits);
        let a = self.rescale(bits);
        let b = other.rescale(bits);
        Fixed::new(a.mantissa - b.mantissa, bits)
    }

    /// Product rounded down to `frac_bits` (error below one ulp of the result).
    pub fn mul_floor(&self, other: &Fixed, frac_bits: u32) -> Fixed {
        let prod = &self.mantissa * &other.mantissa;
        Fixed::new(prod, self.frac_bits + other.frac_bits).truncate(frac_bits)
    }

    pub fn abs(&self) -> Fixed {
        Fixed::new(self.mantissa.abs(), self.frac_bits)
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.sign() == Sign::Minus
    }
}

impl fmt::Debug for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fixed({:e} @ {} bits)", self.to_f64(), self.frac_bits)
    }
}

/// `floor(x / 2^shift)` for signed `x`.
pub fn floor_shift(x: &BigInt, shift: usize) -> BigInt {
    if shift == 0 {
        return x.clone();
    }
    if x.sign() == Sign::Minus {
        // -(ceil(|x| / 2^shift))
        let mag = x.magnitude();
        let q = mag >> shift;
        let exact = (&q << shift) == *mag;
        let q = BigInt::from_biguint(Sign::Plus, q);
        if exact {
            -q
        } else {
            -(q + BigInt::one())
        }
    } else {
        x >> shift
    }
}

/// `rem / 2^bits` for `0 <= rem < 2^bits`, truncated to 53 bits so the result stays below 1.
pub fn dyadic_fraction_to_f64(rem: &BigInt, bits: u32) -> f64 {
    debug_assert!(rem.sign() != Sign::Minus);
    if rem.is_zero() {
        return 0.0;
    }
    if bits <= 53 {
        return rem.to_f64().unwrap_or(0.0) * 2f64.powi(-(bits as i32));
    }
    let top = (rem >> (bits as usize - 53)).to_u64().unwrap_or(0);
    top as f64 * 2f64.powi(-53)
}

/// `rem / den` for `0 <= rem < den`, truncated so the result is strictly below 1.
///
/// Absolute error is below `2^-52`.
pub fn ratio_to_f64(rem: &BigInt, den: &BigInt) -> f64 {
    debug_assert!(den.sign() == Sign::Plus);
    if rem.is_zero() {
        return 0.0;
    }
    let shift = den.bits().saturating_sub(64) as usize;
    let r = (rem >> shift).to_u128().unwrap_or(0);
    let d = (den >> shift).to_u128().unwrap_or(1).max(1);
    let q = ((r << 64) / d).min((1u128 << 64) - 1) as u64;
    let top = (q >> 11).min((1u64 << 53) - 1);
    top as f64 * 2f64.powi(-53)
}

/// `m / 2^frac_bits` to double precision with relative (not absolute) accuracy.
pub fn scaled_to_f64(m: &BigInt, frac_bits: u32) -> f64 {
    let shift = m.bits().saturating_sub(62);
    let top = floor_shift(m, shift as usize).to_f64().unwrap_or(0.0);
    top * 2f64.powf(shift as f64 - frac_bits as f64)
}

/// `num / den` for nonnegative `num` and positive `den`, with relative accuracy near `2^-60`.
pub fn big_ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    debug_assert!(den.sign() == Sign::Plus);
    if num.is_zero() {
        return 0.0;
    }
    let k = (den.bits() + 64).saturating_sub(num.bits());
    let q = (num << k as usize) / den;
    scaled_to_f64(&q, 0) * 2f64.powf(-(k as f64))
}

/// Circle distance between two points of `[0, 1)`.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_of_negative_values_rounds_down() {
        let v = Fixed::new(BigInt::from(-3), 1); // -1.5
        assert_eq!(v.floor(), BigInt::from(-2));
        assert!((v.frac_f64() - 0.5).abs() < 1e-15);
        let w = Fixed::new(BigInt::from(-4), 1); // -2
        assert_eq!(w.floor(), BigInt::from(-2));
        assert_eq!(w.frac_f64(), 0.0);
    }

    #[test]
    fn from_f64_is_exact() {
        for x in [0.1, -2.75, 1e-300, 12345.678] {
            let f = Fixed::from_f64(x).unwrap();
            assert_eq!(f.to_rational(), BigRational::from_float(x).unwrap());
        }
    }

    #[test]
    fn ratio_conversion_stays_below_one() {
        let den = BigInt::from(3u8) << 200;
        let rem = &den - 1;
        let v = ratio_to_f64(&rem, &den);
        assert!(v < 1.0 && v > 1.0 - 1e-15);
        let third = ratio_to_f64(&BigInt::from(1), &BigInt::from(3));
        assert!((third - 1.0 / 3.0).abs() < 2e-16);
    }

    #[test]
    fn frac_div_reduces_modulo_rational() {
        let v = Fixed::from_f64(7.25).unwrap();
        let l = BigRational::new(BigInt::from(3), BigInt::from(2));
        // 7.25 / 1.5 = 4.8333...
        assert!((v.frac_div(&l) - (7.25f64 / 1.5).fract()).abs() < 1e-15);
    }

    #[test]
    fn circle_distance_wraps() {
        assert!((circle_distance(0.95, 0.05) - 0.1).abs() < 1e-15);
        assert_eq!(circle_distance(0.3, 0.3), 0.0);
    }
}
