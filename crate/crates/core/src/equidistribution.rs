//! Discrepancy, Weyl sums and digit statistics of sequences in `[0, 1)`.

use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::numeric::sum::ComplexSum;
use crate::numeric::RealConst;
use crate::orbit::{FractionalOrbit, SeedPoint};
use crate::report::float17;

/// Deviation `|count/N - (hi - lo)|` of one interval.
///
/// Both the sweep and reference computations go through this expression so
/// that equal intervals produce bit-identical values.
#[inline]
pub fn interval_deviation(count: usize, n: usize, lo: f64, hi: f64) -> f64 {
    (count as f64 / n as f64 - (hi - lo)).abs()
}

fn sorted(entries: &[f64]) -> Vec<f64> {
    let mut v = entries.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Star discrepancy over anchored intervals `[0, a)`.
pub fn star_discrepancy_of(entries: &[f64]) -> Result<f64> {
    if entries.is_empty() {
        return Err(invalid("discrepancy of an empty sequence"));
    }
    let u = sorted(entries);
    let n = u.len() as f64;
    let mut best = 0.0f64;
    for (i, &v) in u.iter().enumerate() {
        let i = i as f64 + 1.0;
        best = best.max(i / n - v).max(v - (i - 1.0) / n);
    }
    Ok(best)
}

pub fn star_discrepancy(o: &FractionalOrbit) -> Result<f64> {
    star_discrepancy_of(o.entries())
}

/// A sweep position at `t` (possibly just after a sample point).
#[derive(Clone, Copy, Debug)]
struct Pos {
    t: f64,
    /// Points strictly before this position.
    below: usize,
}

/// Extreme discrepancy over all intervals `[a, b)` of `[0, 1]`.
///
/// With `G(t) = #{u < t}/N - t`, the supremum equals `max G - min G`
/// over the positions `0`, `1`, `u` and `u+`; the maximising pair is then
/// re-evaluated through [`interval_deviation`].
pub fn extreme_discrepancy_of(entries: &[f64]) -> Result<f64> {
    if entries.is_empty() {
        return Err(invalid("discrepancy of an empty sequence"));
    }
    let u = sorted(entries);
    let n = u.len();
    let mut pos = Vec::with_capacity(2 * n + 2);
    pos.push(Pos { t: 0.0, below: 0 });
    let mut i = 0;
    while i < n {
        let v = u[i];
        let mut j = i;
        while j < n && u[j] == v {
            j += 1;
        }
        pos.push(Pos { t: v, below: i });
        pos.push(Pos { t: v, below: j });
        i = j;
    }
    pos.push(Pos { t: 1.0, below: n });
    let nf = n as f64;
    let g: Vec<f64> = pos.iter().map(|p| p.below as f64 / nf - p.t).collect();
    let gmax = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let gmin = g.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = 8.0 * f64::EPSILON;
    let hi_idx: Vec<usize> = (0..pos.len()).filter(|&k| g[k] >= gmax - tol).collect();
    let lo_idx: Vec<usize> = (0..pos.len()).filter(|&k| g[k] <= gmin + tol).collect();
    if hi_idx.len().saturating_mul(lo_idx.len()) > 4_000_000 {
        // massive ties: fall back to the sweep value
        return Ok(gmax - gmin);
    }
    let mut best = 0.0f64;
    for &a in &hi_idx {
        for &b in &lo_idx {
            let (p, q) = if a <= b {
                (pos[a], pos[b])
            } else {
                (pos[b], pos[a])
            };
            best = best.max(interval_deviation(q.below - p.below, n, p.t, q.t));
        }
    }
    Ok(best)
}

pub fn extreme_discrepancy(o: &FractionalOrbit) -> Result<f64> {
    extreme_discrepancy_of(o.entries())
}

/// `(1/N) sum exp(2 pi i k e_n)`; exactly 1 for `k = 0`.
pub fn weyl_sum_of(entries: &[f64], k: i64) -> Complex64 {
    if k == 0 || entries.is_empty() {
        return Complex64::new(1.0, 0.0);
    }
    let kf = k as f64;
    let s: ComplexSum = entries
        .iter()
        .map(|&e| {
            let phase = (kf * e).rem_euclid(1.0);
            let (sn, cs) = (TAU * phase).sin_cos();
            Complex64::new(cs, sn)
        })
        .collect();
    s.value() / entries.len() as f64
}

pub fn weyl_sum(o: &FractionalOrbit, k: i64) -> Complex64 {
    weyl_sum_of(o.entries(), k)
}

/// `max_{1 <= |k| <= kmax} |weyl_sum(k)|`.
pub fn max_weyl(entries: &[f64], kmax: i64) -> f64 {
    (1..=kmax)
        .flat_map(|k| [k, -k])
        .map(|k| weyl_sum_of(entries, k).norm())
        .fold(0.0, f64::max)
}

/// Erdős–Turán upper bound `1/(K+1) + sum_{k<=K} (1/k - 1/(K+1)) |W_k|` (with the
/// classical constants 6 and 4/pi); a diagnostic companion to the Weyl sums.
pub fn erdos_turan_bound(entries: &[f64], kmax: u32) -> f64 {
    let kp = kmax as f64 + 1.0;
    let mut s = 6.0 / kp;
    for k in 1..=kmax {
        let w = weyl_sum_of(entries, k as i64).norm();
        s += 4.0 / std::f64::consts::PI * (1.0 / k as f64 - 1.0 / kp) * w;
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeylEntry {
    pub k: i64,
    #[serde(serialize_with = "float17")]
    pub re: f64,
    #[serde(serialize_with = "float17")]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TracePoint {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(serialize_with = "float17")]
    pub star: f64,
    #[serde(serialize_with = "float17")]
    pub extreme: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(serialize_with = "float17")]
    pub star: f64,
    #[serde(serialize_with = "float17")]
    pub extreme: f64,
    pub weyl: Vec<WeylEntry>,
    pub trace: Vec<TracePoint>,
}

/// Discrepancies of the full orbit, Weyl sums for `|k| <= kmax`, and a
/// trace over prefix lengths in `schedule` (strictly increasing, each `<= N`).
pub fn discrepancy_report(
    o: &FractionalOrbit,
    kmax: i64,
    schedule: &[usize],
) -> Result<DiscrepancyReport> {
    let e = o.entries();
    if schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("trace checkpoints must be strictly increasing"));
    }
    if let Some(&last) = schedule.last() {
        if last > e.len() || schedule[0] == 0 {
            return Err(invalid(format!(
                "trace checkpoints must lie in 1..={}",
                e.len()
            )));
        }
    }
    let trace = schedule
        .iter()
        .map(|&n| {
            Ok(TracePoint {
                n,
                star: star_discrepancy_of(&e[..n])?,
                extreme: extreme_discrepancy_of(&e[..n])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let weyl = (-kmax..=kmax)
        .map(|k| {
            let w = weyl_sum_of(e, k);
            WeylEntry {
                k,
                re: w.re,
                im: w.im,
            }
        })
        .collect();
    Ok(DiscrepancyReport {
        n: e.len(),
        star: star_discrepancy_of(e)?,
        extreme: extreme_discrepancy_of(e)?,
        weyl,
        trace,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UdFit {
    #[serde(serialize_with = "float17")]
    pub c_hat: f64,
    /// `(N_i, r_i)` with `r_i = star_i sqrt(N_i) / (ln N_i)^(3/2 + eps)`.
    pub ratios: Vec<(usize, f64)>,
    /// Heuristic: the largest ratio in the second half of the trace is at
    /// most twice the largest in the first half.
    pub pass: bool,
}

pub fn ud_bound_check(trace: &[TracePoint], epsilon: f64) -> Result<UdFit> {
    if trace.is_empty() {
        return Err(invalid("empty discrepancy trace"));
    }
    if !(epsilon > 0.0) {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if let Some(t) = trace.iter().find(|t| t.n < 3) {
        return Err(invalid(format!(
            "checkpoint N = {} is too small for the logarithmic envelope (need N >= 3)",
            t.n
        )));
    }
    let ratios: Vec<(usize, f64)> = trace
        .iter()
        .map(|t| {
            let nf = t.n as f64;
            (t.n, t.star * nf.sqrt() / nf.ln().powf(1.5 + epsilon))
        })
        .collect();
    let len = ratios.len();
    let first = ratios[..len.div_ceil(2)]
        .iter()
        .map(|r| r.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let last = ratios[len / 2..]
        .iter()
        .map(|r| r.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let c_hat = ratios.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(UdFit {
        c_hat,
        ratios,
        pass: last <= 2.0 * first,
    })
}

/// Sliding-window block counts of the base-`q` digits of `<x>`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockFrequencies {
    pub base: u32,
    pub block_length: u32,
    pub windows: usize,
    /// Indexed by the block read as a base-`q` number.
    pub counts: Vec<u64>,
}

impl BlockFrequencies {
    pub fn frequency(&self, block: &[u32]) -> f64 {
        let idx = block
            .iter()
            .fold(0usize, |acc, d| acc * self.base as usize + *d as usize);
        self.counts.get(idx).copied().unwrap_or(0) as f64 / self.windows as f64
    }

    /// `(block digits, frequency)` for every block, in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<u32>, f64)> + '_ {
        (0..self.counts.len()).map(move |mut idx| {
            let f = self.counts[idx] as f64 / self.windows as f64;
            let mut digits = vec![0u32; self.block_length as usize];
            for d in digits.iter_mut().rev() {
                *d = (idx % self.base as usize) as u32;
                idx /= self.base as usize;
            }
            (digits, f)
        })
    }

    /// `max |frequency - q^-l|` over all blocks.
    pub fn max_deviation(&self) -> f64 {
        let target = (self.base as f64).powi(-(self.block_length as i32));
        self.iter()
            .map(|(_, f)| (f - target).abs())
            .fold(0.0, f64::max)
    }
}

/// First `n` base-`q` digits of `<x>` (exact for explicit points; sampled
/// points are drawn with enough bits to fix every digit).
pub fn fractional_digits(x: &SeedPoint, q: u32, n: usize) -> Result<Vec<u8>> {
    if !(2..=256).contains(&q) {
        return Err(invalid(format!("digit base must lie in 2..=256, got {q}")));
    }
    let bits = (n as f64 * (q as f64).log2()).ceil() as u32 + 64;
    let (v, _) = x.resolve(bits);
    digits_of(&v, q, n)
}

fn digits_of(v: &RealConst, q: u32, n: usize) -> Result<Vec<u8>> {
    let scale = num_traits::pow(BigInt::from(q), n);
    let whole = v.floor_mul(&BigInt::one());
    let scaled = v.floor_scaled(&scale, &BigInt::one()) - whole * &scale;
    debug_assert!(!scaled.is_negative() && scaled < scale);
    let (_, mut digits) = scaled.to_radix_be(q);
    if digits == [0] {
        digits.clear();
    }
    if digits.len() > n {
        return Err(invalid("digit expansion overflowed"));
    }
    let mut out = vec![0u8; n - digits.len()];
    out.extend(digits);
    Ok(out)
}

pub fn digit_block_frequencies(
    x: &SeedPoint,
    q: u32,
    block_length: u32,
    n: usize,
) -> Result<BlockFrequencies> {
    if q < 2 {
        return Err(invalid("digit base must be at least 2"));
    }
    if block_length == 0 || n < block_length as usize {
        return Err(invalid(format!(
            "need 1 <= block length <= digits, got block length {block_length} with {n} digits"
        )));
    }
    let blocks = (q as f64).powi(block_length as i32);
    if blocks > (1u64 << 24) as f64 {
        return Err(invalid(format!("{blocks} distinct blocks is too many")));
    }
    let digits = fractional_digits(x, q, n)?;
    let blocks = blocks as usize;
    let mut counts = vec![0u64; blocks];
    let l = block_length as usize;
    let mut idx = 0usize;
    for (i, &d) in digits.iter().enumerate() {
        idx = (idx * q as usize + d as usize) % blocks;
        if i + 1 >= l {
            counts[idx] += 1;
        }
    }
    Ok(BlockFrequencies {
        base: q,
        block_length,
        windows: n - l + 1,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_examples() {
        assert_eq!(
            star_discrepancy_of(&[0.125, 0.375, 0.625, 0.875]).unwrap(),
            0.125
        );
        assert_eq!(star_discrepancy_of(&[0.0, 0.25, 0.5, 0.75]).unwrap(), 0.25);
        assert_eq!(star_discrepancy_of(&[0.0]).unwrap(), 1.0);
        assert!(star_discrepancy_of(&[]).is_err());
    }

    #[test]
    fn extreme_examples() {
        assert_eq!(
            extreme_discrepancy_of(&[0.125, 0.375, 0.625, 0.875]).unwrap(),
            0.25
        );
        assert_eq!(extreme_discrepancy_of(&[0.5]).unwrap(), 1.0);
        assert_eq!(extreme_discrepancy_of(&[0.3, 0.3, 0.3]).unwrap(), 1.0);
    }

    #[test]
    fn weyl_examples() {
        assert_eq!(weyl_sum_of(&[0.3, 0.9], 0), Complex64::new(1.0, 0.0));
        assert!(weyl_sum_of(&[0.0, 0.5, 0.0, 0.5], 1).norm() < 1e-15);
        assert!((weyl_sum_of(&[0.25, 0.25], 2) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn ud_fit_examples() {
        let ns = [10usize, 100, 1000, 10_000, 100_000];
        let ideal: Vec<TracePoint> = ns
            .iter()
            .map(|&n| {
                let nf = n as f64;
                let s = nf.ln().powf(1.6) / nf.sqrt();
                TracePoint {
                    n,
                    star: s,
                    extreme: s,
                }
            })
            .collect();
        let fit = ud_bound_check(&ideal, 0.1).unwrap();
        assert!((fit.c_hat - 1.0).abs() < 1e-12);
        assert!(fit.pass);
        let slow: Vec<TracePoint> = ns
            .iter()
            .map(|&n| TracePoint {
                n,
                star: (n as f64).powf(-0.1),
                extreme: 0.0,
            })
            .collect();
        assert!(!ud_bound_check(&slow, 0.1).unwrap().pass);
        let constant: Vec<TracePoint> = ns
            .iter()
            .map(|&n| TracePoint {
                n,
                star: 1.0,
                extreme: 1.0,
            })
            .collect();
        assert!(!ud_bound_check(&constant, 0.1).unwrap().pass);
        let tiny = [TracePoint {
            n: 2,
            star: 0.5,
            extreme: 0.5,
        }];
        assert!(ud_bound_check(&tiny, 0.1).is_err());
    }

    #[test]
    fn third_in_binary() {
        let x = SeedPoint::parse("1/3").unwrap();
        let f1 = digit_block_frequencies(&x, 2, 1, 1000).unwrap();
        assert_eq!(f1.frequency(&[0]), 0.5);
        assert_eq!(f1.frequency(&[1]), 0.5);
        let f2 = digit_block_frequencies(&x, 2, 2, 1001).unwrap();
        assert_eq!(f2.frequency(&[0, 1]), 0.5);
        assert_eq!(f2.frequency(&[1, 0]), 0.5);
        assert_eq!(f2.frequency(&[0, 0]), 0.0);
        assert_eq!(f2.frequency(&[1, 1]), 0.0);
        let z = digit_block_frequencies(&SeedPoint::parse("0").unwrap(), 7, 1, 50).unwrap();
        assert_eq!(z.frequency(&[0]), 1.0);
        let total: f64 = f2.iter().map(|(_, f)| f).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn decimal_digits_of_rationals() {
        let x = SeedPoint::parse("22/7").unwrap();
        let d = fractional_digits(&x, 10, 6).unwrap();
        assert_eq!(d, vec![1, 4, 2, 8, 5, 7]);
    }
}
