//! Uniformly discrete point sets and the non-approximation scan.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{invalid, AvgError, Result};
use crate::numeric::fixed::big_ratio_to_f64;
use crate::numeric::{Fixed, RealConst};
use crate::orbit::{orbit_cursor, Multiplier, MultiplierValue, OrbitOptions, SeedPoint};

#[derive(Clone, Debug)]
pub enum SetKind {
    /// `offset + spacing * Z`.
    Lattice {
        offset: BigRational,
        spacing: BigRational,
    },
    /// Sorted, distinct points.
    Finite(Vec<BigRational>),
    /// `offset + scale * floor(j theta)` for `j` in `Z`, `theta > 1`.
    Beatty {
        theta: RealConst,
        scale: BigRational,
        offset: BigRational,
    },
    Union(Vec<UniformlyDiscreteSet>),
}

/// A point set `Y` with a certified positive minimum gap.
#[derive(Clone, Debug)]
pub struct UniformlyDiscreteSet {
    kind: SetKind,
    min_gap: f64,
}

fn rat_f64(r: &BigRational) -> f64 {
    RealConst::Rational(r.clone()).to_f64()
}

/// Smallest positive element of `t + g Z` in absolute value, `g > 0`.
fn min_positive_offset(t: &BigRational, g: &BigRational) -> BigRational {
    let q = (t / g).floor();
    let r = t - &q * g;
    if r.is_zero() {
        return g.clone();
    }
    let other = g - &r;
    if r < other {
        r
    } else {
        other
    }
}

fn rational_gcd(a: &BigRational, b: &BigRational) -> BigRational {
    let num = (a.numer() * b.denom()).gcd(&(b.numer() * a.denom()));
    BigRational::new(num, a.denom() * b.denom())
}

impl UniformlyDiscreteSet {
    pub fn integers() -> Self {
        Self::lattice(BigRational::zero(), BigRational::one()).expect("unit lattice")
    }

    pub fn lattice(offset: BigRational, spacing: BigRational) -> Result<Self> {
        if !spacing.is_positive() {
            return Err(invalid("lattice spacing must be positive"));
        }
        let min_gap = rat_f64(&spacing);
        Ok(Self {
            kind: SetKind::Lattice { offset, spacing },
            min_gap,
        })
    }

    pub fn finite(mut points: Vec<BigRational>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("point set must be non-empty"));
        }
        points.sort();
        points.dedup();
        let min_gap = points
            .windows(2)
            .map(|w| rat_f64(&(&w[1] - &w[0])))
            .fold(f64::INFINITY, f64::min);
        Ok(Self {
            kind: SetKind::Finite(points),
            min_gap,
        })
    }

    pub fn beatty(theta: RealConst, scale: BigRational, offset: BigRational) -> Result<Self> {
        if theta.abs_cmp_one() != std::cmp::Ordering::Greater || theta.signum() < 0 {
            return Err(invalid("Beatty slope must exceed 1"));
        }
        if !scale.is_positive() {
            return Err(invalid("Beatty scale must be positive"));
        }
        // consecutive values of floor(j theta) differ by floor(theta) or floor(theta) + 1
        let fl = theta.floor_mul(&BigInt::one());
        let min_gap = rat_f64(&(&scale * BigRational::from_integer(fl)));
        Ok(Self {
            kind: SetKind::Beatty {
                theta,
                scale,
                offset,
            },
            min_gap,
        })
    }

    pub fn union(parts: Vec<UniformlyDiscreteSet>) -> Result<Self> {
        if parts.is_empty() {
            return Err(invalid("union of no sets"));
        }
        let mut gap = parts
            .iter()
            .map(|p| p.min_gap)
            .fold(f64::INFINITY, f64::min);
        for (i, a) in parts.iter().enumerate() {
            for b in &parts[i + 1..] {
                gap = gap.min(cross_gap(a, b));
            }
        }
        if gap.is_nan() || gap <= 0.0 {
            return Err(invalid("union is not uniformly discrete"));
        }
        Ok(Self {
            kind: SetKind::Union(parts),
            min_gap: gap,
        })
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    /// Certified lower bound on the distance between distinct points.
    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    /// Enclosing lattice, used to bound cross gaps in unions.
    fn hull_lattice(&self) -> Option<(BigRational, BigRational)> {
        match &self.kind {
            SetKind::Lattice { offset, spacing } => Some((offset.clone(), spacing.clone())),
            SetKind::Beatty { scale, offset, .. } => Some((offset.clone(), scale.clone())),
            _ => None,
        }
    }

    /// Signed offset `x - y` to a nearest point `y`.
    pub fn nearest_offset(&self, x: &Fixed) -> f64 {
        match &self.kind {
            SetKind::Lattice { offset, spacing } => {
                let (a, b) = reduced_coordinate(x, offset, spacing);
                let r = a.mod_floor(&b);
                let other = &b - &r;
                let l = rat_f64(spacing);
                if r <= other {
                    big_ratio_to_f64(&r, &b) * l
                } else {
                    -big_ratio_to_f64(&other, &b) * l
                }
            }
            SetKind::Finite(points) => {
                let fb = x.frac_bits() as usize;
                let xm = x.mantissa();
                // first point above x
                let idx = points.partition_point(|p| p.numer() << fb <= xm * p.denom());
                let mut best: Option<(BigInt, BigInt)> = None;
                for p in points[idx.saturating_sub(1)..(idx + 1).min(points.len())].iter() {
                    let den = p.denom() << fb;
                    let num = xm * p.denom() - (p.numer() << fb);
                    let better = match &best {
                        None => true,
                        Some((bn, bd)) => (num.abs() * bd) < (bn.abs() * &den),
                    };
                    if better {
                        best = Some((num, den));
                    }
                }
                let (num, den) = best.expect("non-empty set");
                let mag = big_ratio_to_f64(&num.abs(), &den);
                if num.is_negative() {
                    -mag
                } else {
                    mag
                }
            }
            SetKind::Beatty {
                theta,
                scale,
                offset,
            } => {
                let (a, b) = reduced_coordinate(x, offset, scale);
                let inv = theta.recip().expect("theta is non-zero");
                let j0 = inv.floor_scaled(&a, &b);
                let mut best: Option<BigInt> = None;
                for dj in -1..=2 {
                    let j = &j0 + dj;
                    let y = theta.floor_mul(&j);
                    let num = &a - &y * &b;
                    if best.as_ref().is_none_or(|bn| num.abs() < bn.abs()) {
                        best = Some(num);
                    }
                }
                let num = best.expect("candidates");
                let mag = big_ratio_to_f64(&num.abs(), &b) * rat_f64(scale);
                if num.is_negative() {
                    -mag
                } else {
                    mag
                }
            }
            SetKind::Union(parts) => parts
                .iter()
                .map(|p| p.nearest_offset(x))
                .min_by(|a, b| a.abs().total_cmp(&b.abs()))
                .expect("non-empty union"),
        }
    }

    /// `dist(x, Y)`, exact up to the final rounding to a double.
    pub fn dist(&self, x: &Fixed) -> f64 {
        self.nearest_offset(x).abs()
    }

    pub fn dist_f64(&self, x: f64) -> f64 {
        match Fixed::from_f64(x) {
            Some(f) => self.dist(&f),
            None => f64::NAN,
        }
    }

    /// Distance from an exact constant: exactly 0 for members, otherwise
    /// evaluated on a grid of `2^-(int bits + 96)`.
    pub fn dist_const(&self, x: &RealConst) -> f64 {
        if self.contains(x) {
            return 0.0;
        }
        let mag = x.to_f64().abs().max(1.0).log2().ceil() as u32;
        self.dist(&x.fixed(mag + 96))
    }

    /// Exact membership.
    pub fn contains(&self, x: &RealConst) -> bool {
        let r = match x {
            RealConst::Rational(r) => r,
            // all points are rational
            RealConst::Quadratic(_) => return false,
        };
        match &self.kind {
            SetKind::Lattice { offset, spacing } => ((r - offset) / spacing).is_integer(),
            SetKind::Finite(points) => points.binary_search(r).is_ok(),
            SetKind::Beatty {
                theta,
                scale,
                offset,
            } => {
                let u = (r - offset) / scale;
                if !u.is_integer() {
                    return false;
                }
                let b = u.to_integer();
                let inv = theta.recip().expect("theta is non-zero");
                let j0 = inv.floor_mul(&b);
                (-1..=2).any(|dj| theta.floor_mul(&(&j0 + dj)) == b)
            }
            SetKind::Union(parts) => parts.iter().any(|p| p.contains(x)),
        }
    }

    /// Points in `[lo, hi]`, ascending.
    pub fn points_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out: Vec<f64> = match &self.kind {
            SetKind::Lattice { offset, spacing } => {
                let z = rat_f64(offset);
                let l = rat_f64(spacing);
                let k0 = ((lo - z) / l).ceil() as i64 - 1;
                let k1 = ((hi - z) / l).floor() as i64 + 1;
                (k0..=k1)
                    .map(|k| rat_f64(&(offset + spacing * BigRational::from_integer(k.into()))))
                    .collect()
            }
            SetKind::Finite(points) => points.iter().map(rat_f64).collect(),
            SetKind::Beatty {
                theta,
                scale,
                offset,
            } => {
                let th = theta.to_f64();
                let s = rat_f64(scale);
                let z = rat_f64(offset);
                let j0 = ((lo - z) / (s * th)).floor() as i64 - 2;
                let j1 = ((hi - z) / (s * th)).ceil() as i64 + 2;
                (j0..=j1)
                    .map(|j| {
                        let y = theta.floor_mul(&BigInt::from(j));
                        rat_f64(&(offset + scale * BigRational::from_integer(y)))
                    })
                    .collect()
            }
            SetKind::Union(parts) => parts.iter().flat_map(|p| p.points_in(lo, hi)).collect(),
        };
        out.retain(|&y| y >= lo && y <= hi);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

/// `(x - offset) / spacing` as an integer fraction `a / b` with `b > 0`.
fn reduced_coordinate(x: &Fixed, offset: &BigRational, spacing: &BigRational) -> (BigInt, BigInt) {
    let fb = x.frac_bits() as usize;
    let a = (x.mantissa() * offset.denom() - (offset.numer() << fb)) * spacing.denom();
    let b = (offset.denom() << fb) * spacing.numer();
    (a, b)
}

/// Lower bound on the smallest positive distance between a point of `a` and a point of `b`.
fn cross_gap(a: &UniformlyDiscreteSet, b: &UniformlyDiscreteSet) -> f64 {
    match (&a.kind, &b.kind) {
        (SetKind::Union(parts), _) => parts
            .iter()
            .map(|p| cross_gap(p, b))
            .fold(f64::INFINITY, f64::min),
        (_, SetKind::Union(parts)) => parts
            .iter()
            .map(|p| cross_gap(a, p))
            .fold(f64::INFINITY, f64::min),
        (SetKind::Finite(pa), SetKind::Finite(pb)) => {
            let mut best = f64::INFINITY;
            for p in pa {
                for q in pb {
                    if p != q {
                        best = best.min(rat_f64(&(p - q).abs()));
                    }
                }
            }
            best
        }
        (SetKind::Finite(pts), _) => finite_cross(pts, b),
        (_, SetKind::Finite(pts)) => finite_cross(pts, a),
        _ => {
            let (z1, l1) = a.hull_lattice().expect("lattice-like");
            let (z2, l2) = b.hull_lattice().expect("lattice-like");
            let g = rational_gcd(&l1, &l2);
            rat_f64(&min_positive_offset(&(z1 - z2), &g))
        }
    }
}

fn finite_cross(points: &[BigRational], other: &UniformlyDiscreteSet) -> f64 {
    let mut best = f64::INFINITY;
    for p in points {
        match &other.kind {
            SetKind::Lattice { offset, spacing } => {
                best = best.min(rat_f64(&min_positive_offset(&(p - offset), spacing)));
            }
            _ => {
                let x = Fixed::from_rational_floor(p, 0);
                let exact = Fixed::from_rational_floor(p, 256);
                let d = if x.to_rational() == *p || exact.to_rational() == *p {
                    other.dist(&exact)
                } else {
                    other.dist(&exact) - 2f64.powi(-255)
                };
                if d > 0.0 {
                    best = best.min(d);
                } else {
                    // p is a point of the other set: fall back to its own gap
                    best = best.min(other.min_gap);
                }
            }
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    FiniteViolations,
    SuspectExceptional,
}

#[derive(Clone, Debug, Serialize)]
pub struct DioScan {
    pub alpha: String,
    pub x: String,
    #[serde(serialize_with = "crate::report::float17")]
    pub epsilon: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub violations: Vec<usize>,
    pub hits: Vec<usize>,
    pub verdict: Verdict,
    #[serde(serialize_with = "crate::report::float17")]
    pub budget: f64,
}

/// Maximum number of precision doublings while resolving a comparison.
pub const MAX_REFINEMENTS: u32 = 3;

enum Outcome {
    Done(Vec<usize>, Vec<usize>),
    Indeterminate(usize),
}

/// Exact value of `alpha^k x` when both are exact constants.
fn exact_point(m: &Multiplier, x: &SeedPoint, k: usize) -> Option<RealConst> {
    let x = match x {
        SeedPoint::Explicit(c) => c,
        _ => return None,
    };
    match m.value() {
        MultiplierValue::BigFloat { .. } => None,
        _ => m.as_const().pow(k as u32).mul(x).ok(),
    }
}

fn scan_once(
    m: &Multiplier,
    x: &SeedPoint,
    y: &UniformlyDiscreteSet,
    epsilon: f64,
    n: usize,
    opts: &OrbitOptions,
) -> Result<Outcome> {
    let mut cursor = orbit_cursor(m, x, n, opts)?;
    let frac_bits = 64 + opts.extra_bits as u32;
    let mut violations = Vec::new();
    let mut hits = Vec::new();
    for i in 1..=n {
        if i > 1 {
            cursor.step();
        }
        let threshold = (i as f64).powf(-(1.0 + epsilon));
        let value = cursor.value(frac_bits);
        let d = y.dist(&value);
        let err = 2f64.powf(cursor.err_log2()) + 2f64.powi(-(frac_bits as i32)) + d * 1e-15;
        if d <= err {
            let exact = match cursor.exact_value() {
                Some(r) => Some(RealConst::Rational(r)),
                None => exact_point(m, x, i - 1),
            };
            if exact.is_some_and(|v| y.contains(&v)) {
                hits.push(i);
                continue;
            }
        }
        if (d - threshold).abs() <= err + threshold * 1e-14 {
            return Ok(Outcome::Indeterminate(i));
        }
        if d < threshold {
            violations.push(i);
        }
    }
    Ok(Outcome::Done(violations, hits))
}

/// Lists all `n <= N` with `dist(alpha^(n-1) x, Y) < n^-(1+eps)`, plus exact hits.
///
/// Comparisons closer than the certified orbit error are retried with more
/// precision, at most `MAX_REFINEMENTS` times.
pub fn dio_scan(
    m: &Multiplier,
    x: &SeedPoint,
    y: &UniformlyDiscreteSet,
    epsilon: f64,
    n: usize,
    opts: &OrbitOptions,
) -> Result<DioScan> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid("epsilon must be positive"));
    }
    if n == 0 {
        return Err(invalid("N must be at least 1"));
    }
    let mut attempt = 0;
    let (violations, hits) = loop {
        let mut o = opts.clone();
        o.extra_bits = opts.extra_bits + 64 * ((1u64 << attempt) - 1);
        match scan_once(m, x, y, epsilon, n, &o)? {
            Outcome::Done(v, h) => break (v, h),
            Outcome::Indeterminate(at) => {
                if attempt == MAX_REFINEMENTS {
                    return Err(AvgError::Indeterminate {
                        n: at,
                        attempts: MAX_REFINEMENTS,
                    });
                }
                attempt += 1;
            }
        }
    };
    let verdict = if violations.iter().any(|&v| 3 * v > 2 * n) {
        Verdict::SuspectExceptional
    } else {
        Verdict::FiniteViolations
    };
    Ok(DioScan {
        alpha: m.label().to_string(),
        x: x.to_string(),
        epsilon,
        n,
        violations,
        hits,
        verdict,
        budget: cantelli_budget(m, y, epsilon, n),
    })
}

/// Measure bound for the violation set at a single `n`.
pub fn cantelli_term(m: &Multiplier, y: &UniformlyDiscreteSet, epsilon: f64, n: usize) -> f64 {
    let delta = y.min_gap();
    let scale = 2.0 / (n as f64).powf(1.0 + epsilon);
    let growth_log2 = (n as f64 - 1.0) * m.abs_log2();
    if growth_log2 < 52.0 {
        let a = 2f64.powf(growth_log2);
        let bracket = if delta.is_infinite() {
            0.0
        } else {
            (a / delta).floor()
        };
        scale * (1.0 + bracket) / a
    } else {
        // (1 + [A/delta]) / A lies in (1/delta, 1/delta + 1/A]
        let inv_delta = if delta.is_infinite() {
            0.0
        } else {
            1.0 / delta
        };
        scale * (inv_delta + 2f64.powf(-growth_log2))
    }
}

/// Sum of the per-`n` measure bounds for `n = 1..=N` over a unit interval of seeds.
pub fn cantelli_budget(m: &Multiplier, y: &UniformlyDiscreteSet, epsilon: f64, n: usize) -> f64 {
    cantelli_range(m, y, epsilon, 1, n)
}

/// Sum of the per-`n` bounds over `n0..=n1`.
pub fn cantelli_range(
    m: &Multiplier,
    y: &UniformlyDiscreteSet,
    epsilon: f64,
    n0: usize,
    n1: usize,
) -> f64 {
    let terms: Vec<f64> = (n0.max(1)..=n1)
        .map(|n| cantelli_term(m, y, epsilon, n))
        .collect();
    crate::numeric::sum::compensated_sum(terms)
}

/// Parses `"Z"`, `"lattice:z:L"`, `"finite:p1,p2,..."` or `"beatty:theta:s:offset"`.
pub fn parse_set(text: &str) -> Result<UniformlyDiscreteSet> {
    let err = |msg: &str| AvgError::Parse {
        input: text.to_string(),
        message: msg.to_string(),
    };
    let rat = |s: &str| -> Result<BigRational> {
        match RealConst::parse(s)? {
            RealConst::Rational(r) => Ok(r),
            RealConst::Quadratic(_) => Err(err("expected a rational number")),
        }
    };
    let t = text.trim();
    if t == "Z" || t == "integers" {
        return Ok(UniformlyDiscreteSet::integers());
    }
    let (head, rest) = t.split_once(':').ok_or_else(|| err("unknown set"))?;
    match head {
        "lattice" => {
            let (z, l) = rest
                .split_once(':')
                .ok_or_else(|| err("expected lattice:z:L"))?;
            UniformlyDiscreteSet::lattice(rat(z)?, rat(l)?)
        }
        "finite" => {
            let pts = rest.split(',').map(rat).collect::<Result<Vec<_>>>()?;
            UniformlyDiscreteSet::finite(pts)
        }
        "beatty" => {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(err("expected beatty:theta:s:offset"));
            }
            UniformlyDiscreteSet::beatty(
                RealConst::parse(parts[0])?,
                rat(parts[1])?,
                rat(parts[2])?,
            )
        }
        _ => Err(err("unknown set")),
    }
}
