//! Birkhoff averages `S_N(f, x) = (1/N) sum_{n<N} f(alpha^n x)` along orbits.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::apfunctions::{self, ApFunction, PeriodicFunction, Shape};
use crate::equidistribution::extreme_discrepancy_of;
use crate::error::{invalid, AvgError, Result};
use crate::numeric::stats::{iqr, median, quantile};
use crate::numeric::sum::ComplexSum;
use crate::numeric::{QuadSurd, RealConst};
use crate::orbit::{
    beta_orbit, generate_orbit, BetaMode, FractionalOrbit, Multiplier, MultiplierValue,
    OrbitOptions, SeedPoint,
};
use crate::report::{complex17, float17};

/// Default checkpoints.
pub const DEFAULT_SCHEDULE: [usize; 4] = [100, 1_000, 10_000, 100_000];

enum Access<'a> {
    /// `f(entry * L)` with `L` the orbit scale, valid when `L` is a period of `f`.
    Entries(f64),
    Unreduced(&'a [crate::numeric::Fixed]),
}

fn access<'a>(f: &ApFunction, orbit: &'a FractionalOrbit) -> Result<Access<'a>> {
    let scale = orbit.scale();
    let periodic_fit = match f.period() {
        // f(y) = f(<y / L> L) whenever L is a multiple of the period
        Some(p) => (scale / &p).is_integer(),
        None => false,
    };
    if periodic_fit {
        return Ok(Access::Entries(RealConst::Rational(scale.clone()).to_f64()));
    }
    orbit
        .unreduced()
        .map(Access::Unreduced)
        .ok_or(AvgError::MissingUnreduced)
}

fn term(f: &ApFunction, orbit: &FractionalOrbit, how: &Access<'_>, i: usize) -> Complex64 {
    match how {
        Access::Entries(l) if *l == 1.0 => f.eval(orbit.entries()[i]),
        Access::Entries(l) => f.eval(orbit.entries()[i] * l),
        Access::Unreduced(u) => f.eval_fixed(&u[i]),
    }
}

/// `S_N(f)` over the first `N` entries of `orbit`.
///
/// Functions whose period divides the orbit modulus use the reduced
/// entries; anything else needs unreduced values retained at generation.
pub fn birkhoff_average(f: &ApFunction, orbit: &FractionalOrbit, n: usize) -> Result<Complex64> {
    if n == 0 || n > orbit.len() {
        return Err(invalid(format!("N = {n} must lie in 1..={}", orbit.len())));
    }
    let how = access(f, orbit)?;
    let sum: ComplexSum = (0..n).map(|i| term(f, orbit, &how, i)).collect();
    Ok(sum.value() / n as f64)
}

/// `S_N(f)` over an explicit sequence of arguments.
pub fn birkhoff_average_of(f: &ApFunction, values: &[f64]) -> Result<Complex64> {
    if values.is_empty() {
        return Err(invalid("average of an empty sequence"));
    }
    let sum: ComplexSum = values.iter().map(|&x| f.eval(x)).collect();
    Ok(sum.value() / values.len() as f64)
}

fn check_schedule(schedule: &[usize], len: usize) -> Result<()> {
    if schedule.is_empty() {
        return Err(invalid("schedule is empty"));
    }
    if schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("schedule must be strictly increasing"));
    }
    if schedule[0] == 0 || *schedule.last().unwrap() > len {
        return Err(invalid(format!("checkpoints must lie in 1..={len}")));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct Checkpoint {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(serialize_with = "complex17")]
    pub value: Complex64,
    #[serde(serialize_with = "float17")]
    pub abs_error: f64,
}

/// `S_{N_i}` at increasing checkpoints against a target.
#[derive(Clone, Debug, Serialize)]
pub struct AverageTrace {
    pub checkpoints: Vec<Checkpoint>,
    #[serde(serialize_with = "complex17")]
    pub target: Complex64,
}

impl AverageTrace {
    pub fn from_values(values: Vec<(usize, Complex64)>, target: Complex64) -> Result<Self> {
        if values.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(invalid("checkpoints must be strictly increasing"));
        }
        let checkpoints = values
            .into_iter()
            .map(|(n, value)| Checkpoint {
                n,
                value,
                abs_error: (value - target).norm(),
            })
            .collect();
        Ok(Self {
            checkpoints,
            target,
        })
    }

    pub fn last(&self) -> &Checkpoint {
        self.checkpoints.last().expect("non-empty trace")
    }

    pub fn abs_errors(&self) -> Vec<f64> {
        self.checkpoints.iter().map(|c| c.abs_error).collect()
    }
}

/// Running averages at `schedule` in a single pass.
pub fn running_averages(
    f: &ApFunction,
    orbit: &FractionalOrbit,
    schedule: &[usize],
) -> Result<Vec<(usize, Complex64)>> {
    check_schedule(schedule, orbit.len())?;
    let how = access(f, orbit)?;
    let mut sum = ComplexSum::new();
    let mut out = Vec::with_capacity(schedule.len());
    let mut next = 0;
    for i in 0..*schedule.last().unwrap() {
        sum.add(term(f, orbit, &how, i));
        if i + 1 == schedule[next] {
            out.push((i + 1, sum.value() / (i + 1) as f64));
            next += 1;
        }
    }
    Ok(out)
}

/// `S_N` at each checkpoint against `M(f)`.
pub fn convergence_trace(
    f: &ApFunction,
    orbit: &FractionalOrbit,
    schedule: &[usize],
) -> Result<AverageTrace> {
    let target = apfunctions::mean(
        f,
        apfunctions::DEFAULT_T_MAX,
        apfunctions::DEFAULT_TOLERANCE,
    )?;
    AverageTrace::from_values(running_averages(f, orbit, schedule)?, target.value)
}

#[derive(Clone, Debug, Serialize)]
pub struct SobolRow {
    #[serde(rename = "N")]
    pub n: usize,
    /// Extreme discrepancy of the first `N` entries.
    #[serde(serialize_with = "float17")]
    pub discrepancy: f64,
    /// `V_N(z, 1 + epsilon)`.
    #[serde(serialize_with = "float17")]
    pub variation: f64,
    #[serde(serialize_with = "float17")]
    pub product: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SobolReport {
    #[serde(serialize_with = "float17")]
    pub epsilon: f64,
    pub rows: Vec<SobolRow>,
    /// Product strictly decreasing over the final three checkpoints.
    pub decreasing: bool,
}

/// `eta = s (1/2 - a) / 2`.
pub fn sobol_eta(a: f64, s: f64) -> f64 {
    s * (0.5 - a) / 2.0
}

/// `min(0.1, eta)` with `eta` taken at `s = 1`.
pub fn default_sobol_epsilon(a: f64) -> f64 {
    0.1f64.min(sobol_eta(a, 1.0))
}

/// Exponent `a` of the power singularity of `f` at `z`.
pub fn singular_exponent(f: &ApFunction, z: f64) -> Result<f64> {
    match f {
        ApFunction::Singular(s) => Ok(s.singularity_at(z)?.a),
        ApFunction::Stepanov(s) => Ok(s
            .singular()
            .ok_or_else(|| invalid("function has no singular part"))?
            .model
            .a),
        _ => Err(invalid("the criterion needs a singular function")),
    }
}

/// `D_N * V_N(z, 1 + epsilon)` at each checkpoint.
pub fn sobol_criterion(
    f: &ApFunction,
    orbit: &FractionalOrbit,
    z: f64,
    epsilon: f64,
    schedule: &[usize],
) -> Result<SobolReport> {
    if !(epsilon > 0.0) {
        return Err(invalid("epsilon must be positive"));
    }
    check_schedule(schedule, orbit.len())?;
    let a = singular_exponent(f, z)?;
    let s = 1.0 + epsilon;
    let eta = sobol_eta(a, s);
    if eta - epsilon / 2.0 <= 0.0 {
        return Err(invalid(format!(
            "epsilon = {epsilon} is too large for exponent {a}: need eta - epsilon/2 > 0 with eta = {eta}"
        )));
    }
    let rows = schedule
        .iter()
        .map(|&n| {
            let d = extreme_discrepancy_of(&orbit.entries()[..n])?;
            let v = f.variation(z, s, n as u64)?;
            Ok(SobolRow {
                n,
                discrepancy: d,
                variation: v,
                product: d * v,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let tail = &rows[rows.len().saturating_sub(3)..];
    let decreasing = tail.len() >= 2 && tail.windows(2).all(|w| w[1].product < w[0].product);
    Ok(SobolReport {
        epsilon,
        rows,
        decreasing,
    })
}

/// A piecewise-constant invariant density on `[0, 1)`.
#[derive(Clone, Debug)]
pub struct RenyiParryDensity {
    /// Interior breakpoints, increasing.
    pub breaks: Vec<RealConst>,
    pub values: Vec<RealConst>,
}

impl RenyiParryDensity {
    pub fn new(breaks: Vec<RealConst>, values: Vec<RealConst>) -> Result<Self> {
        if values.len() != breaks.len() + 1 {
            return Err(invalid("a density needs one more value than breakpoints"));
        }
        let b: Vec<f64> = breaks.iter().map(RealConst::to_f64).collect();
        if b.iter().any(|x| !(*x > 0.0 && *x < 1.0)) || b.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("breakpoints must increase inside (0, 1)"));
        }
        if values.iter().any(|v| v.signum() < 0) {
            return Err(invalid("density values must be non-negative"));
        }
        Ok(Self { breaks, values })
    }

    /// `h_tau`: `(5 + 3 sqrt 5)/10` on `[0, 1/tau)` and `(5 + sqrt 5)/10` on `[1/tau, 1)`.
    pub fn golden() -> Self {
        let q = |a: (i64, i64), b: (i64, i64)| {
            RealConst::Quadratic(
                QuadSurd::new(
                    BigRational::new(a.0.into(), a.1.into()),
                    BigRational::new(b.0.into(), b.1.into()),
                    5,
                )
                .expect("valid surd"),
            )
        };
        let inv_tau = q((-1, 2), (1, 2));
        Self::new(vec![inv_tau], vec![q((1, 2), (3, 10)), q((1, 2), (1, 10))])
            .expect("valid density")
    }

    /// Lebesgue measure is invariant for integer multipliers.
    pub fn uniform() -> Self {
        Self {
            breaks: Vec::new(),
            values: vec![RealConst::integer(1)],
        }
    }

    /// Built-in densities: integers and the golden ratio.
    pub fn for_multiplier(m: &Multiplier) -> Option<Self> {
        if m.is_integer() && m.to_f64() > 1.0 {
            return Some(Self::uniform());
        }
        match m.value() {
            MultiplierValue::Quadratic(q) if *q == QuadSurd::golden_ratio() => Some(Self::golden()),
            _ => None,
        }
    }

    fn edges(&self) -> Vec<RealConst> {
        let mut e = vec![RealConst::integer(0)];
        e.extend(self.breaks.iter().cloned());
        e.push(RealConst::integer(1));
        e
    }

    /// `int_0^1 h`, exactly.
    pub fn total_mass(&self) -> Result<RealConst> {
        let e = self.edges();
        let mut acc = RealConst::integer(0);
        for (i, v) in self.values.iter().enumerate() {
            acc = acc.add(&v.mul(&e[i + 1].sub(&e[i])?)?)?;
        }
        Ok(acc)
    }

    /// `int_0^1 f h`.
    pub fn integrate(&self, f: &ApFunction) -> Complex64 {
        let e: Vec<f64> = self.edges().iter().map(RealConst::to_f64).collect();
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| v.to_f64() * f.window_integral(e[i], e[i + 1]))
            .collect::<ComplexSum>()
            .value()
    }

    pub fn eval(&self, u: f64) -> f64 {
        let i = self.breaks.iter().take_while(|b| b.to_f64() <= u).count();
        self.values[i].to_f64()
    }

    pub fn to_function(&self) -> Result<ApFunction> {
        let shape = Shape::Step {
            breaks: self.breaks.iter().map(RealConst::to_f64).collect(),
            values: self
                .values
                .iter()
                .map(|v| Complex64::new(v.to_f64(), 0.0))
                .collect(),
        };
        Ok(ApFunction::Periodic(PeriodicFunction::unit(shape)?))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleStats {
    #[serde(serialize_with = "float17")]
    pub median: f64,
    #[serde(serialize_with = "float17")]
    pub q25: f64,
    #[serde(serialize_with = "float17")]
    pub q75: f64,
    #[serde(serialize_with = "float17")]
    pub iqr: f64,
    #[serde(serialize_with = "crate::report::float17_vec")]
    pub values: Vec<f64>,
}

impl SampleStats {
    pub fn of(values: Vec<f64>) -> Result<Self> {
        let err = || invalid("statistics of an empty or NaN sample");
        Ok(Self {
            median: median(&values).ok_or_else(err)?,
            q25: quantile(&values, 0.25).ok_or_else(err)?,
            q75: quantile(&values, 0.75).ok_or_else(err)?,
            iqr: iqr(&values).ok_or_else(err)?,
            values,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RenyiParryReport {
    #[serde(serialize_with = "float17")]
    pub lebesgue_mean: f64,
    #[serde(serialize_with = "float17")]
    pub density_integral: f64,
    /// Real parts of `S_N` along `(alpha^n x)`.
    pub exp_orbit: SampleStats,
    /// Real parts of `S_N` along `(T^n <x>)`.
    pub beta_orbit: SampleStats,
    #[serde(rename = "N")]
    pub n: usize,
}

/// The point `<x>` in `[0, 1)` for a seed.
///
/// A sampled seed on `[k, k + w)` with integer `k` and `w <= 1` keeps its
/// random bits, so the exponential and beta orbits start from matching points.
pub fn unit_seed(x: &SeedPoint) -> Result<SeedPoint> {
    match x {
        SeedPoint::Explicit(c) => {
            let k = c.floor_mul(&BigInt::one());
            Ok(SeedPoint::Explicit(
                c.sub(&RealConst::Rational(BigRational::from_integer(k)))?,
            ))
        }
        SeedPoint::Sampled {
            seed,
            index,
            lo,
            hi,
        } => {
            let k = BigRational::from_integer(lo.floor().to_integer());
            let (lo, hi) = (lo - &k, hi - &k);
            if hi > BigRational::one() || lo < BigRational::zero() {
                return Err(invalid(format!(
                    "sampling interval of {x} does not fit in one unit cell"
                )));
            }
            SeedPoint::sampled_in(*seed, *index, lo, hi)
        }
    }
}

/// Exponential-orbit and beta-orbit averages of `f` against `M(f)` and `int f h`.
pub fn renyi_parry_compare(
    f: &ApFunction,
    alpha: &Multiplier,
    x_samples: &[SeedPoint],
    n: usize,
    beta_mode: BetaMode,
) -> Result<RenyiParryReport> {
    if !f.is_one_periodic() {
        return Err(invalid("the comparison needs a 1-periodic function"));
    }
    let h = RenyiParryDensity::for_multiplier(alpha)
        .ok_or_else(|| invalid(format!("no built-in invariant density for alpha = {alpha}")))?;
    let lebesgue = apfunctions::mean(
        f,
        apfunctions::DEFAULT_T_MAX,
        apfunctions::DEFAULT_TOLERANCE,
    )?;
    let opts = OrbitOptions::default();
    let mut exp = Vec::with_capacity(x_samples.len());
    let mut beta = Vec::with_capacity(x_samples.len());
    for x in x_samples {
        let o = generate_orbit(alpha, x, n, &opts)?;
        exp.push(birkhoff_average(f, &o, n)?.re);
        let b = beta_orbit(alpha, &unit_seed(x)?, n, beta_mode, &opts)?;
        beta.push(birkhoff_average(f, &b, n)?.re);
    }
    Ok(RenyiParryReport {
        lebesgue_mean: lebesgue.value.re,
        density_integral: h.integrate(f).re,
        exp_orbit: SampleStats::of(exp)?,
        beta_orbit: SampleStats::of(beta)?,
        n,
    })
}

/// One row of a trace CSV.
#[derive(Clone, Debug)]
pub struct TraceRow {
    pub experiment: String,
    pub alpha: String,
    pub x_index: u64,
    pub n: usize,
    pub stat: String,
    pub value: Complex64,
    pub target: Complex64,
}

pub const TRACE_HEADER: [&str; 10] = [
    "experiment",
    "alpha",
    "x_index",
    "N",
    "stat",
    "re",
    "im",
    "target_re",
    "target_im",
    "abs_err",
];

fn num(v: f64) -> String {
    crate::report::float17_string(v).unwrap_or_else(|| "NaN".into())
}

/// Writes rows under [`TRACE_HEADER`]; floats carry 17 significant digits.
pub fn write_trace_csv<W: std::io::Write>(out: W, rows: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in rows {
        w.write_record([
            r.experiment.clone(),
            r.alpha.clone(),
            r.x_index.to_string(),
            r.n.to_string(),
            r.stat.clone(),
            num(r.value.re),
            num(r.value.im),
            num(r.target.re),
            num(r.target.im),
            num((r.value - r.target).norm()),
        ])?;
    }
    w.flush()?;
    Ok(())
}
