use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{AvgError, Result};
use crate::numeric::fixed::{floor_shift, scaled_to_f64};
use crate::numeric::{log2_bigint, QuadSurd, RealConst};

/// Default mantissa width for `float:` multipliers.
pub const DEFAULT_FLOAT_BITS: u32 = 128;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MultiplierValue {
    Rational(BigRational),
    Quadratic(QuadSurd),
    /// `mantissa * 2^exp`, rounded from a requested value at `bits` bits.
    BigFloat {
        mantissa: BigInt,
        exp: i64,
        bits: u32,
    },
}

/// The multiplier `alpha` of an exponential orbit, `|alpha| > 1`.
#[derive(Clone)]
pub struct Multiplier {
    value: MultiplierValue,
    abs_log2: f64,
    label: String,
}

impl Multiplier {
    pub fn rational(r: BigRational) -> Result<Self> {
        Self::build(MultiplierValue::Rational(r), None)
    }

    pub fn quadratic(q: QuadSurd) -> Result<Self> {
        Self::build(MultiplierValue::Quadratic(q), None)
    }

    pub fn from_const(c: RealConst) -> Result<Self> {
        match c {
            RealConst::Rational(r) => Self::rational(r),
            RealConst::Quadratic(q) => Self::quadratic(q),
        }
    }

    pub fn golden_ratio() -> Self {
        Self::quadratic(QuadSurd::golden_ratio()).expect("tau exceeds one")
    }

    /// Rounds `c` to a `bits`-bit binary float (nearest-below in magnitude).
    pub fn big_float(c: &RealConst, bits: u32) -> Result<Self> {
        if bits < 2 {
            return Err(AvgError::InvalidMultiplier(
                "float multipliers need at least 2 mantissa bits".into(),
            ));
        }
        if c.is_zero() {
            return Err(AvgError::InvalidMultiplier(format!(
                "|alpha| must exceed 1, got {c}"
            )));
        }
        // locate the binary exponent of |c|
        let probe = c.fixed(64);
        let approx = log2_bigint(probe.mantissa()) - 64.0;
        let e = approx.floor() as i64 - bits as i64 + 2;
        let (num, den) = if e >= 0 {
            (BigInt::one(), BigInt::one() << e as usize)
        } else {
            (BigInt::one() << (-e) as usize, BigInt::one())
        };
        let mut m = c.floor_scaled(&num, &den);
        if m.is_negative() && !c.scaled_is_integer(&num, &den) {
            // round towards zero so |alpha_float| <= |c|
            m += 1;
        }
        // trim to at most `bits` significant bits
        let extra = m.bits().saturating_sub(bits as u64);
        let m = if m.is_negative() {
            -(floor_shift(&(-m), extra as usize))
        } else {
            floor_shift(&m, extra as usize)
        };
        let value = MultiplierValue::BigFloat {
            mantissa: m,
            exp: e + extra as i64,
            bits,
        };
        Self::build(value, Some(format!("float{bits}:{c}")))
    }

    /// Parses `2`, `3/2`, `tau`, `1+sqrt(2)`, or `float<bits>:<expr>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if let Some(rest) = spec.strip_prefix("float") {
            let (bits, expr) = match rest.split_once(':') {
                Some((b, e)) => (b, e),
                None => {
                    return Err(AvgError::Parse {
                        input: spec.into(),
                        message: "expected float<bits>:<expr>".into(),
                    })
                }
            };
            let bits = if bits.is_empty() {
                DEFAULT_FLOAT_BITS
            } else {
                bits.parse().map_err(|_| AvgError::Parse {
                    input: spec.into(),
                    message: format!("bad mantissa width `{bits}`"),
                })?
            };
            let c = RealConst::parse(expr)?;
            let m = Self::big_float(&c, bits)?;
            return Ok(m.with_label(spec));
        }
        let c = RealConst::parse(spec)?;
        Ok(Self::from_const(c)?.with_label(spec))
    }

    fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    fn build(value: MultiplierValue, label: Option<String>) -> Result<Self> {
        let exact = match &value {
            MultiplierValue::Rational(r) => RealConst::Rational(r.clone()),
            MultiplierValue::Quadratic(q) => RealConst::Quadratic(q.clone()),
            MultiplierValue::BigFloat { mantissa, exp, .. } => {
                RealConst::Rational(dyadic(mantissa, *exp))
            }
        };
        if exact.abs_cmp_one() != std::cmp::Ordering::Greater {
            return Err(AvgError::InvalidMultiplier(format!(
                "|alpha| must exceed 1, got {exact} ~ {}",
                exact.to_f64()
            )));
        }
        let abs_log2 = abs_log2_of(&exact);
        let label = label.unwrap_or_else(|| exact.to_string());
        Ok(Self {
            value,
            abs_log2,
            label,
        })
    }

    pub fn value(&self) -> &MultiplierValue {
        &self.value
    }

    /// Exact value as a real constant (floats are dyadic rationals).
    pub fn as_const(&self) -> RealConst {
        match &self.value {
            MultiplierValue::Rational(r) => RealConst::Rational(r.clone()),
            MultiplierValue::Quadratic(q) => RealConst::Quadratic(q.clone()),
            MultiplierValue::BigFloat { mantissa, exp, .. } => {
                RealConst::Rational(dyadic(mantissa, *exp))
            }
        }
    }

    pub fn abs_log2(&self) -> f64 {
        self.abs_log2
    }

    pub fn to_f64(&self) -> f64 {
        self.as_const().to_f64()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_integer(&self) -> bool {
        matches!(&self.value, MultiplierValue::Rational(r) if r.is_integer())
    }

    /// `log2` of the rate at which rounding errors can grow per step.
    ///
    /// Equal to `log2|alpha|` except for quadratic multipliers, where the
    /// two-term recurrence lets errors grow like the larger root of
    /// `x^2 = |t| x + |s|` (`alpha^2 = t alpha - s`).
    pub fn growth_log2(&self) -> f64 {
        match &self.value {
            MultiplierValue::Quadratic(q) => {
                let (t, s) = q.trace_and_norm();
                let t = t.abs().to_f64().unwrap_or(f64::MAX);
                let s = s.abs().to_f64().unwrap_or(f64::MAX);
                let rho = 0.5 * (t + (t * t + 4.0 * s).sqrt());
                (rho * (1.0 + 1e-12)).log2().max(self.abs_log2)
            }
            _ => self.abs_log2,
        }
    }

    /// `alpha^k` as a new multiplier (exact for every variant).
    pub fn pow(&self, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(AvgError::InvalidArgument("stride must be positive".into()));
        }
        let value = match &self.value {
            MultiplierValue::BigFloat {
                mantissa,
                exp,
                bits,
            } => MultiplierValue::BigFloat {
                mantissa: num_traits::pow(mantissa.clone(), k as usize),
                exp: exp * k as i64,
                bits: *bits,
            },
            _ => match self.as_const().pow(k) {
                RealConst::Rational(r) => MultiplierValue::Rational(r),
                RealConst::Quadratic(q) => MultiplierValue::Quadratic(q),
            },
        };
        let label = if k == 1 {
            self.label.clone()
        } else {
            format!("({})^{k}", self.label)
        };
        Self::build(value, Some(label))
    }
}

impl fmt::Display for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl fmt::Debug for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Multiplier({} ~ {})", self.label, self.to_f64())
    }
}

pub(crate) fn dyadic(mantissa: &BigInt, exp: i64) -> BigRational {
    if exp >= 0 {
        BigRational::from_integer(mantissa << exp as usize)
    } else {
        BigRational::new(mantissa.clone(), BigInt::one() << (-exp) as usize)
    }
}

/// `log2|c|` for `|c| > 1`, relative accuracy well below `2^-40`.
fn abs_log2_of(c: &RealConst) -> f64 {
    let mut bits = 128u32;
    loop {
        let f = c.fixed(bits);
        let m = f.mantissa().abs();
        let one = BigInt::one() << bits as usize;
        let excess = &m - &one;
        if m >= (&one << 1usize) {
            return log2_bigint(&m) - bits as f64;
        }
        // |c| in (1, 2): log2(1 + u) with u resolved to ~60 significant bits
        if excess.bits() >= 64 || bits >= 1 << 16 {
            let u = scaled_to_f64(&excess, bits);
            return u.ln_1p() / std::f64::consts::LN_2;
        }
        bits *= 2;
    }
}
