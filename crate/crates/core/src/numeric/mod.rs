//! Exact and high-precision arithmetic shared by the other modules.

pub mod fixed;
pub mod quad;
pub mod realconst;
pub mod stats;
pub mod sum;

pub use fixed::{circle_distance, Fixed};
pub use realconst::{QuadSurd, RealConst};

/// `log2(2^a + 2^b)` without overflow.
pub fn log2_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (1.0 + (lo - hi).exp2()).log2()
}

/// `log2` of a positive big integer, accurate for arbitrarily large values.
pub fn log2_bigint(n: &num_bigint::BigInt) -> f64 {
    use num_traits::ToPrimitive;
    let bits = n.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    let shift = bits.saturating_sub(60);
    let top = (num_traits::Signed::abs(n) >> shift as usize)
        .to_f64()
        .unwrap_or(1.0);
    top.log2() + shift as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log2_addition() {
        assert!((log2_add(3.0, 3.0) - 4.0).abs() < 1e-15);
        assert_eq!(log2_add(f64::NEG_INFINITY, -5.0), -5.0);
        assert!((log2_add(-1000.0, 0.0)).abs() < 1e-15);
    }

    #[test]
    fn log2_of_huge_integers() {
        let n = num_bigint::BigInt::from(3) << 5000usize;
        assert!((log2_bigint(&n) - (5000.0 + 3f64.log2())).abs() < 1e-9);
    }
}
