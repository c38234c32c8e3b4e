//! Orbits of the beta transformation `T y = alpha y mod 1`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::engine::{init_scaled, init_times, log2_upper, low_bits};
use super::fractional::{plan, FractionalOrbit, OrbitMode, OrbitOptions, ENTRY_ROUNDING};
use super::multiplier::{Multiplier, MultiplierValue};
use super::seed::SeedPoint;
use crate::error::{invalid, AvgError, Result};
use crate::numeric::fixed::{dyadic_fraction_to_f64, floor_shift, ratio_to_f64};
use crate::numeric::{log2_add, log2_bigint, RealConst};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BetaMode {
    /// Exact or error-tracked arithmetic; branch choices are verified.
    Certified,
    /// Double precision; the error stamp is `+inf` and entries are only
    /// meaningful statistically (no shadowing guarantee).
    Fast,
}

/// `T^n x`, `n = 0..N-1`, for `x` in `[0, 1)`.
pub fn beta_orbit(
    m: &Multiplier,
    x: &SeedPoint,
    n: usize,
    mode: BetaMode,
    opts: &OrbitOptions,
) -> Result<FractionalOrbit> {
    if n == 0 {
        return Err(invalid("orbit length must be at least 1"));
    }
    check_unit_interval(x)?;
    match mode {
        BetaMode::Fast => Ok(fast(m, x, n)),
        BetaMode::Certified => certified(m, x, n, opts),
    }
}

fn check_unit_interval(x: &SeedPoint) -> Result<()> {
    let zero = BigRational::zero();
    let one = BigRational::one();
    let ok = match x {
        SeedPoint::Explicit(c) => c.signum() >= 0 && c.floor_mul(&BigInt::one()).is_zero(),
        SeedPoint::Sampled { lo, hi, .. } => *lo >= zero && *hi <= one,
    };
    if ok {
        Ok(())
    } else {
        Err(invalid(format!("beta orbits need x in [0, 1), got {x}")))
    }
}

fn fast(m: &Multiplier, x: &SeedPoint, n: usize) -> FractionalOrbit {
    let a = m.to_f64();
    let mut y = x.resolve(64).0.to_f64();
    let mut entries = Vec::with_capacity(n);
    for _ in 0..n {
        entries.push(y);
        let v = (a * y).rem_euclid(1.0);
        y = if v >= 1.0 { 0.0 } else { v };
    }
    FractionalOrbit::assemble(
        entries,
        OrbitMode::Beta {
            alpha: m.clone(),
            certified: false,
        },
        Some(x.clone()),
        53,
        f64::INFINITY,
    )
}

enum State {
    /// `y = R / D` exactly; multiplier `p / q`.
    Exact {
        rem: BigInt,
        den: BigInt,
        p: BigInt,
        q: BigInt,
    },
    /// `Y ~ y 2^w`, `Z = floor(num Y / den) ~ alpha y 2^w`.
    Scaled {
        y: BigInt,
        num: BigInt,
        den: BigInt,
        ey: f64,
        step_log2: f64,
    },
    /// `Y ~ y 2^w`, `Z ~ alpha y 2^w` via `alpha^2 = T alpha - S`.
    Pair {
        y: BigInt,
        z: BigInt,
        ey: f64,
        ez: f64,
        t: BigInt,
        s: BigInt,
        e: BigInt,
        a: BigInt,
        t_log2: f64,
        s_log2: f64,
    },
}

/// Outcome of one certified attempt.
enum Attempt {
    Done(Vec<f64>, f64),
    Ambiguous(usize),
}

fn certified(
    m: &Multiplier,
    x: &SeedPoint,
    n: usize,
    opts: &OrbitOptions,
) -> Result<FractionalOrbit> {
    opts.validate()?;
    let base = plan(m, x, n, opts)?.bits;
    let attempts = 4u32;
    let mut last_n = 0;
    for attempt in 0..attempts {
        let w = base << attempt;
        let w = u32::try_from(w).map_err(|_| AvgError::PrecisionBudget {
            required_bits: w,
            required_bytes: w / 2,
            budget_bytes: opts.budget(),
        })?;
        if attempt > 0 {
            super::budget::check(w as u64, (4 * w as u64) / 8, opts.budget())?;
        }
        let (x0, seed_err) = x.resolve(w + 8);
        match run(m, &x0, seed_err, w, n) {
            Attempt::Done(entries, err_log2) => {
                let err = 2f64.powf(err_log2) + ENTRY_ROUNDING;
                if err <= opts.target_error {
                    return Ok(FractionalOrbit::assemble(
                        entries,
                        OrbitMode::Beta {
                            alpha: m.clone(),
                            certified: true,
                        },
                        Some(x.clone()),
                        w as u64,
                        err,
                    ));
                }
                last_n = n - 1;
            }
            Attempt::Ambiguous(k) => last_n = k,
        }
    }
    Err(AvgError::Indeterminate {
        n: last_n,
        attempts,
    })
}

fn run(m: &Multiplier, x: &RealConst, seed_err: f64, w: u32, n: usize) -> Attempt {
    let pow = BigInt::one() << w as usize;
    let mask = &pow - 1u32;
    let alpha_log2 = log2_upper(m.abs_log2());
    let mut state = match (m.value(), x) {
        (MultiplierValue::Rational(a), RealConst::Rational(xr)) => State::Exact {
            rem: xr.numer().clone(),
            den: xr.denom().clone(),
            p: a.numer().clone(),
            q: a.denom().clone(),
        },
        (MultiplierValue::Rational(a), _) => {
            let (y, ey) = init_scaled(x, w);
            State::Scaled {
                y,
                num: a.numer().clone(),
                den: a.denom().clone(),
                ey,
                step_log2: alpha_log2,
            }
        }
        (MultiplierValue::BigFloat { mantissa, exp, .. }, _) => {
            let (y, ey) = init_scaled(x, w);
            let (num, den) = if *exp >= 0 {
                (mantissa << *exp as usize, BigInt::one())
            } else {
                (mantissa.clone(), BigInt::one() << (-*exp) as usize)
            };
            State::Scaled {
                y,
                num,
                den,
                ey,
                step_log2: alpha_log2,
            }
        }
        (MultiplierValue::Quadratic(qs), _) => {
            let (t, s) = qs.trace_and_norm();
            let e = t.denom().lcm(s.denom());
            let ti = t.numer() * (&e / t.denom());
            let si = s.numer() * (&e / s.denom());
            let (y, ey) = init_scaled(x, w);
            let (z, ez) = init_times(&m.as_const(), x, w);
            let a = m.as_const().floor_scaled(&pow, &BigInt::one());
            let lg = |r: &BigRational| {
                if r.is_zero() {
                    f64::NEG_INFINITY
                } else {
                    log2_upper(log2_bigint(r.numer()) - log2_bigint(r.denom()))
                }
            };
            State::Pair {
                y,
                z,
                ey,
                ez,
                t: ti,
                s: si,
                e,
                a,
                t_log2: lg(&t),
                s_log2: lg(&s),
            }
        }
    };
    // error of the ideal seed, in ulps of 2^-w
    let seed_ulps = |k: usize| {
        if seed_err == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            seed_err + w as f64 + k as f64 * alpha_log2
        }
    };
    let mut entries = Vec::with_capacity(n);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..n {
        match &mut state {
            State::Exact { rem, den, p, q } => {
                entries.push(ratio_to_f64(rem, den));
                let err = seed_ulps(i);
                worst = worst.max(err);
                // T(R/D) = (pR mod qD) / (qD)
                let top = &*p * &*rem;
                let new_den = &*den * &*q;
                let r = top.mod_floor(&new_den);
                if err > f64::NEG_INFINITY {
                    // the ideal point must take the same branch
                    let e_next = seed_ulps(i + 1) - w as f64;
                    let margin = ratio_to_f64(&r, &new_den);
                    let e = 2f64.powf(e_next);
                    if margin <= e || margin >= 1.0 - e {
                        return Attempt::Ambiguous(i + 1);
                    }
                }
                *rem = r;
                *den = new_den;
            }
            State::Scaled {
                y,
                num,
                den,
                ey,
                step_log2,
            } => {
                entries.push(dyadic_fraction_to_f64(y, w));
                let total = log2_add(*ey, seed_ulps(i));
                worst = worst.max(total);
                let prod = &*num * &*y;
                let (z, r) = if den.is_one() {
                    (prod, BigInt::zero())
                } else {
                    prod.div_mod_floor(den)
                };
                let round = if r.is_zero() { f64::NEG_INFINITY } else { 0.0 };
                let ez = log2_add(*ey + *step_log2, round);
                let ez_total = log2_add(ez, seed_ulps(i + 1));
                let Some((_, frac)) = split(&z, &mask, w, ez_total) else {
                    return Attempt::Ambiguous(i + 1);
                };
                *y = frac;
                *ey = ez;
            }
            State::Pair {
                y,
                z,
                ey,
                ez,
                t,
                s,
                e,
                a,
                t_log2,
                s_log2,
            } => {
                entries.push(dyadic_fraction_to_f64(y, w));
                let total = log2_add(*ey, seed_ulps(i));
                worst = worst.max(total);
                let ez_total = log2_add(*ez, seed_ulps(i + 1));
                let Some((k, frac)) = split(z, &mask, w, ez_total) else {
                    return Attempt::Ambiguous(i + 1);
                };
                // alpha y' = T (alpha y) - S y - k alpha
                let top = &*t * &*z - &*s * &*y;
                let (q, r) = if e.is_one() {
                    (top, BigInt::zero())
                } else {
                    top.div_mod_floor(e)
                };
                let round = if r.is_zero() { f64::NEG_INFINITY } else { 0.0 };
                let k_err = if k.is_zero() {
                    f64::NEG_INFINITY
                } else {
                    log2_bigint(&k)
                };
                let new_z = q - &k * &*a;
                let new_ez = log2_add(
                    log2_add(*ez + *t_log2, *ey + *s_log2),
                    log2_add(round, k_err),
                );
                *y = frac;
                *ey = *ez;
                *z = new_z;
                *ez = new_ez;
            }
        }
    }
    Attempt::Done(entries, worst - w as f64)
}

/// Splits `Z / 2^w` into integer and fractional mantissa, or `None` when
/// the error band of `err_log2` ulps straddles an integer.
fn split(z: &BigInt, mask: &BigInt, w: u32, err_log2: f64) -> Option<(BigInt, BigInt)> {
    let frac = low_bits(z, mask);
    let k = floor_shift(z, w as usize);
    if err_log2 > f64::NEG_INFINITY {
        let band = BigInt::one() << (err_log2.ceil().max(0.0) as usize + 1);
        if frac <= band || (mask - &frac) < band {
            return None;
        }
    }
    Some((k, frac))
}
