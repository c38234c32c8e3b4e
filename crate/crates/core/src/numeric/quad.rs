//! Adaptive Gauss–Kronrod (7/15) quadrature for real and complex integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use super::sum::ComplexSum;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_intervals: 4000,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub intervals: usize,
    pub converged: bool,
}

struct Piece {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    let k = kron * h;
    let g = gauss * h;
    (k, (k - g).norm())
}

/// Integrates a complex integrand over `[a, b]`, splitting first at `breaks`.
pub fn integrate_complex<F>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: QuadOptions,
) -> QuadResult<Complex64>
where
    F: FnMut(f64) -> Complex64,
{
    if a == b {
        return QuadResult {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            intervals: 0,
            converged: true,
        };
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut points = vec![lo];
    let mut inner: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|p| *p > lo && *p < hi)
        .collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    points.extend(inner);
    points.push(hi);

    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        let (value, error) = gk15(&mut f, w[0], w[1]);
        heap.push(Piece {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }
    let total = |heap: &BinaryHeap<Piece>| -> (Complex64, f64) {
        let mut s = ComplexSum::new();
        let mut e = 0.0;
        for p in heap.iter() {
            s.add(p.value);
            e += p.error;
        }
        (s.value(), e)
    };
    let (mut value, mut error) = total(&heap);
    let mut converged = false;
    while heap.len() < opts.max_intervals {
        if error <= opts.abs_tol.max(opts.rel_tol * value.norm()) {
            converged = true;
            break;
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further in double precision
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    let (v, e) = total(&heap);
    if !converged {
        converged = e <= opts.abs_tol.max(opts.rel_tol * v.norm());
    }
    QuadResult {
        value: v * sign,
        error: e,
        intervals: heap.len(),
        converged,
    }
}

pub fn integrate<F>(mut f: F, a: f64, b: f64, breaks: &[f64], opts: QuadOptions) -> QuadResult<f64>
where
    F: FnMut(f64) -> f64,
{
    let r = integrate_complex(|x| Complex64::new(f(x), 0.0), a, b, breaks, opts);
    QuadResult {
        value: r.value.re,
        error: r.error,
        intervals: r.intervals,
        converged: r.converged,
    }
}

/// Integrates over `[a, b]` with algebraic singularities at `poles`.
///
/// The range is split at each pole with geometric grading towards it, and
/// nodes that round onto a pole are moved to the adjacent double inside the
/// panel, so `f` is never evaluated at a pole.
pub fn integrate_singular<F>(
    mut f: F,
    a: f64,
    b: f64,
    poles: &[f64],
    breaks: &[f64],
    opts: QuadOptions,
) -> QuadResult<Complex64>
where
    F: FnMut(f64) -> Complex64,
{
    let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = poles
        .iter()
        .copied()
        .filter(|p| *p > lo && *p < hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut ends = vec![lo];
    ends.extend(cuts);
    ends.push(hi);
    let is_pole = |x: f64| poles.contains(&x);
    let mut sum = ComplexSum::new();
    let mut error = 0.0;
    let mut intervals = 0;
    let mut converged = true;
    for w in ends.windows(2) {
        let (p, q) = (w[0], w[1]);
        if p >= q {
            continue;
        }
        let mut local: Vec<f64> = breaks
            .iter()
            .copied()
            .filter(|x| *x > p && *x < q)
            .collect();
        if is_pole(p) {
            local.extend(graded_breaks(p, p, q, 60));
        }
        if is_pole(q) {
            local.extend(graded_breaks(q, p, q, 60));
        }
        let (inner_lo, inner_hi) = (p.next_up(), q.next_down());
        let r = integrate_complex(|x| f(x.clamp(inner_lo, inner_hi)), p, q, &local, opts);
        sum.add(r.value);
        error += r.error;
        intervals += r.intervals;
        converged &= r.converged;
    }
    QuadResult {
        value: sum.value() * sign,
        error,
        intervals,
        converged,
    }
}

/// Breakpoints `z ± w 2^-k` for `k = 1..=levels`, clipped to `[a, b]`.
///
/// Geometric grading towards an algebraic singularity at `z` keeps each
/// panel smooth relative to its length.
pub fn graded_breaks(z: f64, a: f64, b: f64, levels: u32) -> Vec<f64> {
    let w = (b - a).abs();
    let mut out = Vec::with_capacity(2 * levels as usize + 1);
    if z > a && z < b {
        out.push(z);
    }
    let mut h = w;
    for _ in 0..levels {
        h *= 0.5;
        for p in [z - h, z + h] {
            if p > a && p < b {
                out.push(p);
            }
        }
    }
    out
}
