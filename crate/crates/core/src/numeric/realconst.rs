//! Exact real constants: rationals and quadratic irrationals `a + b*sqrt(d)`.
//!
//! Quadratic values are held as `(A + B*sqrt(d)) / C` with integers `A, B, C`,
//! `C > 0` and `d >= 2` square-free, so floors of integer multiples are exact
//! (one integer square root per query).

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::fixed::Fixed;
use crate::error::{AvgError, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadSurd {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: u64,
}

impl QuadSurd {
    /// `a + b*sqrt(d)`; requires `b != 0` and `d >= 2` square-free.
    pub fn new(a: BigRational, b: BigRational, d: u64) -> Result<Self> {
        if b.is_zero() {
            return Err(AvgError::InvalidArgument(
                "quadratic irrational needs b != 0".into(),
            ));
        }
        if d < 2 || !is_square_free(d) {
            return Err(AvgError::InvalidArgument(format!(
                "quadratic irrational needs a square-free radicand >= 2, got {d}"
            )));
        }
        let c = a.denom().lcm(b.denom());
        let big_a = a.numer() * (&c / a.denom());
        let big_b = b.numer() * (&c / b.denom());
        let g = big_a.gcd(&big_b).gcd(&c);
        Ok(Self {
            a: big_a / &g,
            b: big_b / &g,
            c: c / &g,
            d,
        })
    }

    pub fn golden_ratio() -> Self {
        Self {
            a: BigInt::one(),
            b: BigInt::one(),
            c: BigInt::from(2),
            d: 5,
        }
    }

    pub fn rational_part(&self) -> BigRational {
        BigRational::new(self.a.clone(), self.c.clone())
    }

    pub fn surd_coefficient(&self) -> BigRational {
        BigRational::new(self.b.clone(), self.c.clone())
    }

    pub fn radicand(&self) -> u64 {
        self.d
    }

    /// Trace `t` and norm `s` of the minimal polynomial `v^2 = t*v - s`.
    pub fn trace_and_norm(&self) -> (BigRational, BigRational) {
        let a = self.rational_part();
        let b = self.surd_coefficient();
        let t = &a + &a;
        let s = &a * &a - &b * &b * BigRational::from_integer(BigInt::from(self.d));
        (t, s)
    }

    pub fn conjugate(&self) -> Self {
        Self {
            a: self.a.clone(),
            b: -&self.b,
            c: self.c.clone(),
            d: self.d,
        }
    }

    /// Exact `floor(value * num / den)` for `den > 0`.
    fn floor_scaled(&self, num: &BigInt, den: &BigInt) -> BigInt {
        let m = &self.b * num;
        let y = floor_times_sqrt(&m, self.d);
        (&self.a * num + y).div_floor(&(&self.c * den))
    }
}

/// `floor(m * sqrt(d))` for square-free `d >= 2`.
fn floor_times_sqrt(m: &BigInt, d: u64) -> BigInt {
    if m.is_zero() {
        return BigInt::zero();
    }
    let sq = m * m * BigInt::from(d);
    let root = sq.sqrt();
    if m.sign() == Sign::Minus {
        // never a perfect square because sqrt(d) is irrational
        -root - 1
    } else {
        root
    }
}

pub fn is_square_free(n: u64) -> bool {
    if n == 0 {
        return false;
    }
    let mut n = n;
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return false;
            }
        }
        p += 1;
    }
    true
}

/// Splits `n = k^2 * d` with `d` square-free.
fn square_free_split(n: u64) -> (u64, u64) {
    let mut k = 1u64;
    let mut d = 1u64;
    let mut rest = n;
    let mut p = 2u64;
    while p.saturating_mul(p) <= rest {
        let mut e = 0;
        while rest.is_multiple_of(p) {
            rest /= p;
            e += 1;
        }
        for _ in 0..e / 2 {
            k *= p;
        }
        if e % 2 == 1 {
            d *= p;
        }
        p += 1;
    }
    (k, d * rest)
}

/// An exactly representable real constant.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum RealConst {
    Rational(BigRational),
    Quadratic(QuadSurd),
}

impl RealConst {
    pub fn integer(n: i64) -> Self {
        RealConst::Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        RealConst::Rational(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    /// Exact value of a finite double.
    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(RealConst::Rational)
    }

    pub fn golden_ratio() -> Self {
        RealConst::Quadratic(QuadSurd::golden_ratio())
    }

    pub fn sqrt(n: u64) -> Self {
        let (k, d) = square_free_split(n);
        if d == 1 {
            RealConst::integer(k as i64)
        } else {
            RealConst::Quadratic(QuadSurd {
                a: BigInt::zero(),
                b: BigInt::from(k),
                c: BigInt::one(),
                d,
            })
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            RealConst::Rational(r) => r.is_zero(),
            RealConst::Quadratic(_) => false,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            RealConst::Rational(r) => Some(r),
            RealConst::Quadratic(_) => None,
        }
    }

    /// Exact `floor(value * num / den)`, `den > 0`.
    pub fn floor_scaled(&self, num: &BigInt, den: &BigInt) -> BigInt {
        match self {
            RealConst::Rational(r) => (r.numer() * num).div_floor(&(r.denom() * den)),
            RealConst::Quadratic(q) => q.floor_scaled(num, den),
        }
    }

    /// Whether `value * num / den` is an integer (only possible for rational values).
    pub fn scaled_is_integer(&self, num: &BigInt, den: &BigInt) -> bool {
        match self {
            RealConst::Rational(r) => (r.numer() * num).is_multiple_of(&(r.denom() * den)),
            RealConst::Quadratic(_) => num.is_zero(),
        }
    }

    /// Exact `floor(n * value)`.
    pub fn floor_mul(&self, n: &BigInt) -> BigInt {
        self.floor_scaled(n, &BigInt::one())
    }

    /// Fixed-point approximation from below with error under one ulp.
    pub fn fixed(&self, frac_bits: u32) -> Fixed {
        let scale = BigInt::one() << frac_bits as usize;
        Fixed::new(self.floor_scaled(&scale, &BigInt::one()), frac_bits)
    }

    /// `floor(value * x * 2^bits)` as a fixed-point number (error below one ulp).
    pub fn mul_rational_fixed(&self, x: &BigRational, frac_bits: u32) -> Fixed {
        let num = x.numer() << frac_bits as usize;
        Fixed::new(self.floor_scaled(&num, x.denom()), frac_bits)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            RealConst::Rational(r) => ratio_f64(r),
            RealConst::Quadratic(_) => self.fixed(160).to_f64(),
        }
    }

    pub fn signum(&self) -> i32 {
        match self {
            RealConst::Rational(r) => {
                if r.is_zero() {
                    0
                } else if r.is_positive() {
                    1
                } else {
                    -1
                }
            }
            RealConst::Quadratic(_) => {
                // irrational, so a fine enough grid separates it from 0
                let mut bits = 64;
                loop {
                    let f = self.fixed(bits);
                    let m = f.mantissa();
                    if m.is_positive() {
                        return 1;
                    }
                    if *m < BigInt::from(-1) {
                        return -1;
                    }
                    bits *= 2;
                }
            }
        }
    }

    /// Compares `|value|` with 1 exactly.
    pub fn abs_cmp_one(&self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match self {
            RealConst::Rational(r) => r.abs().cmp(&BigRational::one()),
            RealConst::Quadratic(_) => {
                let mut bits = 64u32;
                loop {
                    let f = self.fixed(bits);
                    let one = BigInt::one() << bits as usize;
                    let m = f.mantissa().abs();
                    // |value| lies within one ulp of |m| / 2^bits
                    if m > &one + 1 {
                        return Ordering::Greater;
                    }
                    if m + 1 < one {
                        return Ordering::Less;
                    }
                    bits *= 2;
                }
            }
        }
    }

    pub fn mul_rational(&self, r: &BigRational) -> RealConst {
        match self {
            RealConst::Rational(v) => RealConst::Rational(v * r),
            RealConst::Quadratic(q) => {
                if r.is_zero() {
                    return RealConst::Rational(BigRational::zero());
                }
                RealConst::Quadratic(
                    QuadSurd::new(q.rational_part() * r, q.surd_coefficient() * r, q.d)
                        .expect("scaling keeps a valid surd"),
                )
            }
        }
    }

    fn field(&self) -> FieldElem {
        match self {
            RealConst::Rational(r) => FieldElem::rational(r.clone()),
            RealConst::Quadratic(q) => FieldElem {
                a: q.rational_part(),
                b: q.surd_coefficient(),
                d: q.d,
            },
        }
    }

    fn lift_field(r: std::result::Result<FieldElem, String>) -> Result<Self> {
        r.and_then(FieldElem::into_const)
            .map_err(AvgError::InvalidArgument)
    }

    /// Exact sum; fails when the radicands differ.
    pub fn add(&self, other: &RealConst) -> Result<RealConst> {
        Self::lift_field(self.field().add(&other.field()))
    }

    pub fn neg(&self) -> RealConst {
        Self::lift_field(Ok(self.field().neg())).expect("negation stays in the field")
    }

    pub fn sub(&self, other: &RealConst) -> Result<RealConst> {
        self.add(&other.neg())
    }

    /// Exact product; fails when the radicands differ.
    pub fn mul(&self, other: &RealConst) -> Result<RealConst> {
        Self::lift_field(self.field().mul(&other.field()))
    }

    pub fn recip(&self) -> Result<RealConst> {
        Self::lift_field(FieldElem::rational(BigRational::one()).div(&self.field()))
    }

    pub fn pow(&self, k: u32) -> RealConst {
        let mut acc = RealConst::integer(1);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).expect("powers share the radicand");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("powers share the radicand");
            }
        }
        acc
    }

    pub fn parse(input: &str) -> Result<Self> {
        let mut p = Parser {
            src: input,
            chars: input.char_indices().collect(),
            pos: 0,
        };
        let v = p.expr()?;
        p.skip_ws();
        if p.pos != p.chars.len() {
            return Err(p.err("unexpected trailing input"));
        }
        v.into_const().map_err(|m| AvgError::Parse {
            input: input.into(),
            message: m,
        })
    }
}

impl FromStr for RealConst {
    type Err = AvgError;
    fn from_str(s: &str) -> Result<Self> {
        RealConst::parse(s)
    }
}

fn ratio_f64(r: &BigRational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() && d != 0.0 => {
            if n.abs() < 9.0e15 && d < 9.0e15 {
                n / d
            } else {
                Fixed::from_rational_floor(r, 128).to_f64()
            }
        }
        _ => Fixed::from_rational_floor(r, 128).to_f64(),
    }
}

impl fmt::Display for RealConst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealConst::Rational(r) => write!(f, "{r}"),
            RealConst::Quadratic(q) => {
                if q.c.is_one() {
                    write!(f, "{}+{}*sqrt({})", q.a, q.b, q.d)
                } else {
                    write!(f, "({}+{}*sqrt({}))/{}", q.a, q.b, q.d, q.c)
                }
            }
        }
    }
}

impl fmt::Debug for RealConst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RealConst({self} ~ {})", self.to_f64())
    }
}

// ---------------------------------------------------------------------------
// Expression parser over Q(sqrt(d)).

#[derive(Clone, Debug)]
struct FieldElem {
    a: BigRational,
    b: BigRational,
    d: u64, // 1 when b is zero
}

impl FieldElem {
    fn rational(a: BigRational) -> Self {
        Self {
            a,
            b: BigRational::zero(),
            d: 1,
        }
    }

    fn unify(&self, other: &Self) -> std::result::Result<u64, String> {
        match (self.b.is_zero(), other.b.is_zero()) {
            (true, true) => Ok(1),
            (false, true) => Ok(self.d),
            (true, false) => Ok(other.d),
            (false, false) if self.d == other.d => Ok(self.d),
            _ => Err("mixing different square roots is not supported".into()),
        }
    }

    fn add(&self, o: &Self) -> std::result::Result<Self, String> {
        let d = self.unify(o)?;
        Ok(Self {
            a: &self.a + &o.a,
            b: &self.b + &o.b,
            d,
        }
        .normalized())
    }

    fn neg(&self) -> Self {
        Self {
            a: -&self.a,
            b: -&self.b,
            d: self.d,
        }
    }

    fn mul(&self, o: &Self) -> std::result::Result<Self, String> {
        let d = self.unify(o)?;
        let dd = BigRational::from_integer(BigInt::from(d));
        Ok(Self {
            a: &self.a * &o.a + &self.b * &o.b * dd,
            b: &self.a * &o.b + &self.b * &o.a,
            d,
        }
        .normalized())
    }

    fn div(&self, o: &Self) -> std::result::Result<Self, String> {
        let dd = BigRational::from_integer(BigInt::from(o.d));
        let norm = &o.a * &o.a - &o.b * &o.b * dd;
        if norm.is_zero() {
            return Err("division by zero".into());
        }
        let conj = Self {
            a: &o.a / &norm,
            b: -&o.b / &norm,
            d: o.d,
        };
        self.mul(&conj)
    }

    fn normalized(mut self) -> Self {
        if self.b.is_zero() {
            self.d = 1;
        }
        self
    }

    fn into_const(self) -> std::result::Result<RealConst, String> {
        if self.b.is_zero() {
            Ok(RealConst::Rational(self.a))
        } else {
            QuadSurd::new(self.a, self.b, self.d)
                .map(RealConst::Quadratic)
                .map_err(|e| e.to_string())
        }
    }
}

struct Parser<'s> {
    src: &'s str,
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> AvgError {
        AvgError::Parse {
            input: self.src.into(),
            message: format!("{msg} at offset {}", self.pos),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn lift(&self, r: std::result::Result<FieldElem, String>) -> Result<FieldElem> {
        r.map_err(|m| self.err(&m))
    }

    fn expr(&mut self) -> Result<FieldElem> {
        let mut acc = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = self.lift(acc.add(&rhs))?;
                }
                Some('-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = self.lift(acc.add(&rhs.neg()))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<FieldElem> {
        let mut acc = self.unary()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = self.lift(acc.mul(&rhs))?;
                }
                Some('/') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = self.lift(acc.div(&rhs))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<FieldElem> {
        self.skip_ws();
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<FieldElem> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                self.skip_ws();
                if self.peek() != Some(')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_alphabetic() => self.ident(),
            _ => Err(self.err("expected a number, constant or `(`")),
        }
    }

    fn number(&mut self) -> Result<FieldElem> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        if matches!(self.peek(), Some('e') | Some('E')) {
            self.pos += 1;
            if matches!(self.peek(), Some('+') | Some('-')) {
                self.pos += 1;
            }
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        let text: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
        parse_decimal(&text)
            .map(FieldElem::rational)
            .ok_or_else(|| self.err("malformed number"))
    }

    fn ident(&mut self) -> Result<FieldElem> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        let name: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
        match name.as_str() {
            "tau" | "phi" | "golden" => {
                let half = BigRational::new(BigInt::one(), BigInt::from(2));
                Ok(FieldElem {
                    a: half.clone(),
                    b: half,
                    d: 5,
                })
            }
            "sqrt" => {
                self.skip_ws();
                if self.peek() != Some('(') {
                    return Err(self.err("expected `(` after sqrt"));
                }
                let arg = self.atom()?;
                if !arg.b.is_zero() || arg.a.is_negative() {
                    return Err(self.err("sqrt needs a non-negative rational argument"));
                }
                // sqrt(p/q) = sqrt(p*q)/q
                let pq = (arg.a.numer() * arg.a.denom())
                    .to_u64()
                    .ok_or_else(|| self.err("sqrt argument too large"))?;
                let (k, d) = square_free_split(pq);
                let scale = BigRational::new(BigInt::from(k), arg.a.denom().clone());
                if d == 1 {
                    Ok(FieldElem::rational(scale))
                } else {
                    Ok(FieldElem {
                        a: BigRational::zero(),
                        b: scale,
                        d,
                    })
                }
            }
            _ => Err(self.err(&format!("unknown constant `{name}`"))),
        }
    }
}

/// Exact rational value of a decimal literal such as `1.25` or `3e-2`.
pub fn parse_decimal(text: &str) -> Option<BigRational> {
    let (mant, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (int_part, frac_part) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let n = BigInt::parse_bytes(
        if digits.is_empty() {
            b"0"
        } else {
            digits.as_bytes()
        },
        10,
    )?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-scale) as usize))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_common_forms() {
        assert_eq!(RealConst::parse("3/2").unwrap(), RealConst::ratio(3, 2));
        assert_eq!(RealConst::parse("1.5").unwrap(), RealConst::ratio(3, 2));
        assert_eq!(RealConst::parse("-2").unwrap(), RealConst::integer(-2));
        assert_eq!(RealConst::parse("tau").unwrap(), RealConst::golden_ratio());
        assert_eq!(
            RealConst::parse("(1 + sqrt(5)) / 2").unwrap(),
            RealConst::golden_ratio()
        );
        assert_eq!(RealConst::parse("sqrt(8)").unwrap(), {
            let two = BigRational::from_integer(BigInt::from(2));
            RealConst::Quadratic(QuadSurd::new(BigRational::zero(), two, 2).unwrap())
        });
        assert_eq!(RealConst::parse("sqrt(9)").unwrap(), RealConst::integer(3));
        assert!(RealConst::parse("sqrt(2)+sqrt(3)").is_err());
        assert!(RealConst::parse("1/0").is_err());
        assert!(RealConst::parse("foo").is_err());
    }

    #[test]
    fn golden_ratio_floor_multiples_match_beatty_values() {
        let tau = RealConst::golden_ratio();
        // lower Wythoff sequence: floor(n * tau)
        let expect = [0, 1, 3, 4, 6, 8, 9, 11, 12, 14, 16];
        for (n, e) in expect.iter().enumerate() {
            assert_eq!(tau.floor_mul(&BigInt::from(n)), BigInt::from(*e));
        }
        let neg = tau.floor_mul(&BigInt::from(-1));
        assert_eq!(neg, BigInt::from(-2));
    }

    #[test]
    fn fixed_approximation_is_close() {
        let tau = RealConst::golden_ratio();
        let f = tau.fixed(80);
        assert!((f.to_f64() - 1.618_033_988_749_895).abs() < 1e-15);
        let conj = RealConst::Quadratic(QuadSurd::golden_ratio().conjugate());
        assert!((conj.to_f64() + 0.618_033_988_749_895).abs() < 1e-15);
    }

    #[test]
    fn sign_and_magnitude_comparisons() {
        use std::cmp::Ordering;
        assert_eq!(RealConst::golden_ratio().abs_cmp_one(), Ordering::Greater);
        assert_eq!(
            RealConst::parse("sqrt(2)/2").unwrap().abs_cmp_one(),
            Ordering::Less
        );
        assert_eq!(RealConst::parse("1-sqrt(2)").unwrap().signum(), -1);
        assert_eq!(RealConst::ratio(-1, 1).abs_cmp_one(), Ordering::Equal);
    }

    #[test]
    fn field_operations() {
        let tau = RealConst::golden_ratio();
        // tau^4 = 3 tau + 2
        let t4 = tau.pow(4);
        let expect = tau
            .mul(&RealConst::integer(3))
            .unwrap()
            .add(&RealConst::integer(2))
            .unwrap();
        assert_eq!(t4, expect);
        assert_eq!(
            tau.recip().unwrap(),
            tau.sub(&RealConst::integer(1)).unwrap()
        );
        assert!(tau.mul(&RealConst::sqrt(2)).is_err());
        assert!(RealConst::integer(0).recip().is_err());
    }

    #[test]
    fn square_free_detection() {
        assert!(is_square_free(2));
        assert!(is_square_free(30));
        assert!(!is_square_free(12));
        assert_eq!(square_free_split(72), (6, 2));
    }

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(
            parse_decimal("0.1").unwrap(),
            BigRational::new(BigInt::from(1), BigInt::from(10))
        );
        assert_eq!(
            parse_decimal("2.5e2").unwrap(),
            BigRational::from_integer(BigInt::from(250))
        );
    }
}
