//! Steppers that advance `alpha^n x` exactly or with tracked rounding error.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::multiplier::{Multiplier, MultiplierValue};
use crate::numeric::fixed::{dyadic_fraction_to_f64, floor_shift, ratio_to_f64};
use crate::numeric::{log2_add, log2_bigint, Fixed, RealConst};

/// Slack applied to `log2|alpha|` so propagated bounds stay upper bounds.
pub(crate) fn log2_upper(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        x
    } else {
        x + x.abs() * 1e-12 + 1e-12
    }
}

fn log2_abs_rational(r: &BigRational) -> f64 {
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    log2_bigint(r.numer()) - log2_bigint(r.denom())
}

/// Low `w` bits of `v`, i.e. `v mod 2^w` (two's complement semantics).
pub(crate) fn low_bits(v: &BigInt, mask: &BigInt) -> BigInt {
    v & mask
}

enum Kind {
    /// `Q + R/D` with `0 <= R < D`; multiplier `p/q`.
    Exact {
        int: BigInt,
        rem: BigInt,
        den: BigInt,
        p: BigInt,
        q: BigInt,
    },
    /// `V / 2^w`, advanced by `V <- floor(num * V / den)`.
    Scaled {
        v: BigInt,
        num: BigInt,
        den: BigInt,
        err: f64,
        step_log2: f64,
    },
    /// Two-term recurrence `E v_{n+2} = t v_{n+1} - s v_n` on `2^w`-scaled values.
    Pair {
        cur: BigInt,
        next: BigInt,
        t: BigInt,
        s: BigInt,
        e: BigInt,
        err_cur: f64,
        err_next: f64,
        t_log2: f64,
        s_log2: f64,
    },
}

/// `floor(x 2^w)` and `log2` of its error in ulps (`-inf` when exact).
pub(crate) fn init_scaled(x: &RealConst, w: u32) -> (BigInt, f64) {
    let pow = BigInt::one() << w as usize;
    let v = x.floor_scaled(&pow, &BigInt::one());
    let err = if x.scaled_is_integer(&pow, &BigInt::one()) {
        f64::NEG_INFINITY
    } else {
        0.0
    };
    (v, err)
}

/// `floor(alpha x 2^w)` with its error in ulps (log2).
pub(crate) fn init_times(alpha: &RealConst, x: &RealConst, w: u32) -> (BigInt, f64) {
    match alpha.mul(x) {
        Ok(ax) => init_scaled(&ax, w),
        Err(_) => {
            // radicands differ: product of two over-precise approximations
            let g = w + 64;
            let a = alpha.fixed(g);
            let b = x.fixed(g);
            (a.mul_floor(&b, w).mantissa().clone(), 1.0)
        }
    }
}

/// Cursor over `alpha^n x`, `n = 0, 1, ...`.
pub struct OrbitCursor {
    kind: Kind,
    w: u32,
    mask: BigInt,
    n: usize,
    seed_err_log2: f64,
    alpha_log2: f64,
}

impl OrbitCursor {
    /// `x` is the resolved seed, `seed_err_log2` its distance bound to the ideal point.
    pub fn new(m: &Multiplier, x: &RealConst, seed_err_log2: f64, w: u32) -> Self {
        let pow = BigInt::one() << w as usize;
        let kind = match (m.value(), x) {
            (MultiplierValue::Rational(a), RealConst::Rational(xr)) => {
                let (int, rem) = xr.numer().div_mod_floor(xr.denom());
                Kind::Exact {
                    int,
                    rem,
                    den: xr.denom().clone(),
                    p: a.numer().clone(),
                    q: a.denom().clone(),
                }
            }
            (MultiplierValue::Rational(a), _) => {
                Self::scaled(x, a.numer().clone(), a.denom().clone(), w)
            }
            (MultiplierValue::BigFloat { mantissa, exp, .. }, _) => {
                let (num, den) = if *exp >= 0 {
                    (mantissa << *exp as usize, BigInt::one())
                } else {
                    (mantissa.clone(), BigInt::one() << (-*exp) as usize)
                };
                Self::scaled(x, num, den, w)
            }
            (MultiplierValue::Quadratic(qs), _) => {
                let (t, s) = qs.trace_and_norm();
                let e = t.denom().lcm(s.denom());
                let ti = t.numer() * (&e / t.denom());
                let si = s.numer() * (&e / s.denom());
                let (cur, err_cur) = init_scaled(x, w);
                let (next, err_next) = init_times(&m.as_const(), x, w);
                let t_log2 = log2_abs_rational(&t);
                let s_log2 = log2_abs_rational(&s);
                Kind::Pair {
                    cur,
                    next,
                    t: ti,
                    s: si,
                    e,
                    err_cur,
                    err_next,
                    t_log2: log2_upper(t_log2),
                    s_log2: log2_upper(s_log2),
                }
            }
        };
        Self {
            kind,
            w,
            mask: pow - 1,
            n: 0,
            seed_err_log2,
            alpha_log2: log2_upper(m.abs_log2()),
        }
    }

    fn scaled(x: &RealConst, num: BigInt, den: BigInt, w: u32) -> Kind {
        let (v, err) = init_scaled(x, w);
        let step_log2 = log2_upper(log2_bigint(&num) - log2_bigint(&den));
        Kind::Scaled {
            v,
            num,
            den,
            err,
            step_log2,
        }
    }

    pub fn index(&self) -> usize {
        self.n
    }

    pub fn working_bits(&self) -> u32 {
        self.w
    }

    /// Whether values are computed without rounding.
    pub fn is_exact(&self) -> bool {
        match &self.kind {
            Kind::Exact { .. } => true,
            Kind::Scaled { err, .. } => *err == f64::NEG_INFINITY,
            Kind::Pair { err_cur, .. } => *err_cur == f64::NEG_INFINITY,
        }
    }

    /// `log2` of the absolute error bound of the current value.
    pub fn err_log2(&self) -> f64 {
        let ulps = match &self.kind {
            Kind::Exact { .. } => f64::NEG_INFINITY,
            Kind::Scaled { err, .. } => *err,
            Kind::Pair { err_cur, .. } => *err_cur,
        };
        let seed = if self.seed_err_log2 == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.seed_err_log2 + self.n as f64 * self.alpha_log2
        };
        log2_add(ulps - self.w as f64, seed)
    }

    /// Fractional part of the current value, truncated to a double.
    pub fn frac(&self) -> f64 {
        match &self.kind {
            Kind::Exact { rem, den, .. } => ratio_to_f64(rem, den),
            Kind::Scaled { v, .. } | Kind::Pair { cur: v, .. } => {
                dyadic_fraction_to_f64(&low_bits(v, &self.mask), self.w)
            }
        }
    }

    /// Fractional part of `value / l` for a positive rational `l`.
    pub fn frac_mod(&self, l: &BigRational) -> f64 {
        match &self.kind {
            Kind::Exact { int, rem, den, .. } => {
                let top = (int * den + rem) * l.denom();
                let bottom = den * l.numer();
                ratio_to_f64(&top.mod_floor(&bottom), &bottom)
            }
            Kind::Scaled { v, .. } | Kind::Pair { cur: v, .. } => {
                Fixed::new(v.clone(), self.w).frac_div(l)
            }
        }
    }

    /// Current value on a `frac_bits` grid (rounded down).
    pub fn value(&self, frac_bits: u32) -> Fixed {
        match &self.kind {
            Kind::Exact { int, rem, den, .. } => {
                let f = (rem << frac_bits as usize).div_floor(den);
                Fixed::new((int << frac_bits as usize) + f, frac_bits)
            }
            Kind::Scaled { v, .. } | Kind::Pair { cur: v, .. } => {
                Fixed::new(v.clone(), self.w).truncate(frac_bits)
            }
        }
    }

    /// Exact current value when the cursor is exact and rational.
    pub fn exact_value(&self) -> Option<BigRational> {
        match &self.kind {
            Kind::Exact { int, rem, den, .. } => {
                Some(BigRational::new(int * den + rem, den.clone()))
            }
            _ => None,
        }
    }

    /// Integer part `floor(value)` (exact cursors only; otherwise from the approximation).
    pub fn floor(&self) -> BigInt {
        match &self.kind {
            Kind::Exact { int, .. } => int.clone(),
            Kind::Scaled { v, .. } | Kind::Pair { cur: v, .. } => floor_shift(v, self.w as usize),
        }
    }

    pub fn step(&mut self) {
        self.n += 1;
        match &mut self.kind {
            Kind::Exact {
                int,
                rem,
                den,
                p,
                q,
            } => {
                // p(Q + R/D)/q = s + (r D + p R) / (q D) where pQ = s q + r
                let (s, r) = (&*p * &*int).div_mod_floor(q);
                let b = r * &*den + &*p * &*rem;
                *den = &*den * &*q;
                let (c, new_rem) = b.div_mod_floor(den);
                *rem = new_rem;
                *int = s + c;
            }
            Kind::Scaled {
                v,
                num,
                den,
                err,
                step_log2,
            } => {
                let prod = &*num * &*v;
                let (nv, r) = if den.is_one() {
                    (prod, BigInt::zero())
                } else {
                    prod.div_mod_floor(den)
                };
                *v = nv;
                let round = if r.is_zero() { f64::NEG_INFINITY } else { 0.0 };
                *err = log2_add(*err + *step_log2, round);
            }
            Kind::Pair {
                cur,
                next,
                t,
                s,
                e,
                err_cur,
                err_next,
                t_log2,
                s_log2,
            } => {
                let top = &*t * &*next - &*s * &*cur;
                let (nn, r) = if e.is_one() {
                    (top, BigInt::zero())
                } else {
                    top.div_mod_floor(e)
                };
                let round = if r.is_zero() { f64::NEG_INFINITY } else { 0.0 };
                let new_err = log2_add(log2_add(*err_next + *t_log2, *err_cur + *s_log2), round);
                *cur = std::mem::replace(next, nn);
                *err_cur = *err_next;
                *err_next = new_err;
            }
        }
    }

    /// Sign of the current value (from the approximation for inexact cursors).
    pub fn sign(&self) -> Sign {
        match &self.kind {
            Kind::Exact { int, rem, .. } => {
                if int.is_negative() {
                    Sign::Minus
                } else if int.is_zero() && rem.is_zero() {
                    Sign::NoSign
                } else {
                    Sign::Plus
                }
            }
            Kind::Scaled { v, .. } | Kind::Pair { cur: v, .. } => v.sign(),
        }
    }
}
