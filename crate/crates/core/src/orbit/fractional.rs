use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use super::budget;
use super::engine::OrbitCursor;
use super::multiplier::Multiplier;
use super::seed::SeedPoint;
use crate::error::{invalid, AvgError, Result};
use crate::numeric::Fixed;

/// Error floor of a double-valued entry in `[0, 1)` after truncation.
pub const ENTRY_ROUNDING: f64 = 2.220_446_049_250_313e-16; // 2^-52

/// Fractional bits kept for retained unreduced values.
pub const UNREDUCED_FRAC_BITS: u32 = 128;

#[derive(Clone, Debug)]
pub enum OrbitMode {
    Exponential { alpha: Multiplier },
    Beta { alpha: Multiplier, certified: bool },
    General { description: String },
}

/// The normalised sequence `<u_n x / L>` together with its provenance.
///
/// Entries lie in `[0, 1)`; the modulus `L` is kept in `scale` and the
/// certified error is measured in the circle metric of the normalised
/// entries.
#[derive(Clone, Debug)]
pub struct FractionalOrbit {
    entries: Vec<f64>,
    mode: OrbitMode,
    seed: Option<SeedPoint>,
    precision_bits: u64,
    guaranteed_abs_error: f64,
    scale: BigRational,
    first_index: u64,
    stride: u64,
    unreduced: Option<Vec<Fixed>>,
    unreduced_error: f64,
}

#[derive(Clone, Debug)]
pub struct OrbitOptions {
    pub target_error: f64,
    pub retain_unreduced: bool,
    pub modulus: Option<BigRational>,
    pub allow_zero: bool,
    pub budget_bytes: Option<u64>,
    /// Extra working bits on top of the precision formula.
    pub extra_bits: u64,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        Self {
            target_error: 2f64.powi(-40),
            retain_unreduced: false,
            modulus: None,
            allow_zero: false,
            budget_bytes: None,
            extra_bits: 0,
        }
    }
}

impl OrbitOptions {
    pub fn with_target(mut self, target: f64) -> Self {
        self.target_error = target;
        self
    }

    pub fn retaining(mut self) -> Self {
        self.retain_unreduced = true;
        self
    }

    pub fn with_modulus(mut self, l: BigRational) -> Self {
        self.modulus = Some(l);
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let t = self.target_error;
        if !(t > 0.0 && t <= 2f64.powi(-20)) {
            return Err(invalid(format!(
                "target error must lie in (0, 2^-20], got {t:e}"
            )));
        }
        if t < 4.0 * ENTRY_ROUNDING {
            return Err(invalid(format!(
                "target error {t:e} is below the resolution of double-valued entries (2^-50)"
            )));
        }
        if let Some(l) = &self.modulus {
            if !l.is_positive() {
                return Err(invalid(format!("modulus must be positive, got {l}")));
            }
        }
        Ok(())
    }

    pub(crate) fn budget(&self) -> u64 {
        self.budget_bytes.unwrap_or_else(budget::budget_bytes)
    }
}

/// Working precision and memory estimate for an orbit request.
pub(crate) struct Plan {
    pub bits: u64,
}

pub(crate) fn plan(m: &Multiplier, x: &SeedPoint, n: usize, opts: &OrbitOptions) -> Result<Plan> {
    let l_log2 = opts
        .modulus
        .as_ref()
        .map(|l| (l.to_f64().unwrap_or(1.0)).log2().min(0.0))
        .unwrap_or(0.0);
    // dividing by L < 1 amplifies errors
    let target = opts.target_error * 2f64.powf(l_log2);
    let bits =
        budget::working_bits(m.growth_log2(), n, x.magnitude_log2(), target) + opts.extra_bits;
    let value_bits = bits as f64 + n as f64 * m.abs_log2() + x.magnitude_log2();
    // a handful of live big integers of about `value_bits` each
    let mut bytes = (4.0 * value_bits / 8.0).ceil() as u64;
    if opts.retain_unreduced {
        let avg = 0.5 * n as f64 * m.abs_log2() + x.magnitude_log2() + UNREDUCED_FRAC_BITS as f64;
        bytes = bytes.saturating_add((n as f64 * (avg / 8.0 + 32.0)).ceil() as u64);
    }
    budget::check(bits, bytes, opts.budget())?;
    Ok(Plan { bits })
}

/// `<alpha^n x>` for `n = 0..N-1` with certified absolute error.
pub fn generate_orbit(
    m: &Multiplier,
    x: &SeedPoint,
    n: usize,
    opts: &OrbitOptions,
) -> Result<FractionalOrbit> {
    if n == 0 {
        return Err(invalid("orbit length must be at least 1"));
    }
    opts.validate()?;
    if x.is_zero() && !opts.allow_zero {
        return Err(invalid(
            "x = 0 gives the constant orbit 0; set allow_zero to request it",
        ));
    }
    let plan = plan(m, x, n, opts)?;
    let modulus = opts.modulus.clone().unwrap_or_else(BigRational::one);
    let unit = modulus.is_one();
    let inv_l = 1.0 / modulus.to_f64().unwrap_or(1.0);
    let attempts = 4u32;
    for attempt in 0..attempts {
        let w = plan.bits + if attempt == 0 { 0 } else { 32u64 << attempt };
        let w = u32::try_from(w).map_err(|_| AvgError::PrecisionBudget {
            required_bits: w,
            required_bytes: w / 2,
            budget_bytes: opts.budget(),
        })?;
        let (x0, seed_err) = x.resolve(w + 8);
        let mut cur = OrbitCursor::new(m, &x0, seed_err, w);
        let mut entries = Vec::with_capacity(n);
        let mut unreduced = opts.retain_unreduced.then(|| Vec::with_capacity(n));
        let mut worst = f64::NEG_INFINITY;
        for i in 0..n {
            if i > 0 {
                cur.step();
            }
            entries.push(if unit {
                cur.frac()
            } else {
                cur.frac_mod(&modulus)
            });
            if let Some(u) = unreduced.as_mut() {
                u.push(cur.value(UNREDUCED_FRAC_BITS));
            }
            worst = worst.max(cur.err_log2());
        }
        let value_err = 2f64.powf(worst);
        let entry_err = value_err * inv_l + ENTRY_ROUNDING;
        if entry_err <= opts.target_error {
            let unreduced_error = value_err + 2f64.powi(-(UNREDUCED_FRAC_BITS as i32));
            return Ok(FractionalOrbit {
                entries,
                mode: OrbitMode::Exponential { alpha: m.clone() },
                seed: Some(x.clone()),
                precision_bits: w as u64,
                guaranteed_abs_error: entry_err,
                scale: modulus,
                first_index: 0,
                stride: 1,
                unreduced,
                unreduced_error,
            });
        }
    }
    Err(AvgError::Indeterminate { n: n - 1, attempts })
}

/// Cursor over `alpha^n x`, `n = 0..N-1`, at the precision `generate_orbit` would use.
///
/// `extra_bits` in the options raises the working precision; the seed is
/// resolved to match.
pub fn orbit_cursor(
    m: &Multiplier,
    x: &SeedPoint,
    n: usize,
    opts: &OrbitOptions,
) -> Result<OrbitCursor> {
    if n == 0 {
        return Err(invalid("orbit length must be at least 1"));
    }
    opts.validate()?;
    if x.is_zero() && !opts.allow_zero {
        return Err(invalid(
            "x = 0 gives the constant orbit 0; set allow_zero to request it",
        ));
    }
    let plan = plan(m, x, n, opts)?;
    let w = u32::try_from(plan.bits).map_err(|_| AvgError::PrecisionBudget {
        required_bits: plan.bits,
        required_bytes: plan.bits / 2,
        budget_bytes: opts.budget(),
    })?;
    let (x0, seed_err) = x.resolve(w + 8);
    Ok(OrbitCursor::new(m, &x0, seed_err, w))
}

impl FractionalOrbit {
    /// Wraps explicit entries (each must lie in `[0, 1)`).
    pub fn from_entries(entries: Vec<f64>) -> Result<Self> {
        if let Some(bad) = entries.iter().find(|e| !(0.0..1.0).contains(*e)) {
            return Err(invalid(format!("entry {bad} is outside [0, 1)")));
        }
        Ok(Self {
            entries,
            mode: OrbitMode::General {
                description: "explicit entries".into(),
            },
            seed: None,
            precision_bits: 53,
            guaranteed_abs_error: 0.0,
            scale: BigRational::one(),
            first_index: 0,
            stride: 1,
            unreduced: None,
            unreduced_error: 0.0,
        })
    }

    pub(crate) fn assemble(
        entries: Vec<f64>,
        mode: OrbitMode,
        seed: Option<SeedPoint>,
        precision_bits: u64,
        guaranteed_abs_error: f64,
    ) -> Self {
        Self {
            entries,
            mode,
            seed,
            precision_bits,
            guaranteed_abs_error,
            scale: BigRational::one(),
            first_index: 0,
            stride: 1,
            unreduced: None,
            unreduced_error: 0.0,
        }
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn mode(&self) -> &OrbitMode {
        &self.mode
    }

    pub fn seed(&self) -> Option<&SeedPoint> {
        self.seed.as_ref()
    }

    pub fn precision_bits(&self) -> u64 {
        self.precision_bits
    }

    pub fn guaranteed_abs_error(&self) -> f64 {
        self.guaranteed_abs_error
    }

    pub fn scale(&self) -> &BigRational {
        &self.scale
    }

    /// Original sequence index of entry 0 and the index step between entries.
    pub fn index_map(&self) -> (u64, u64) {
        (self.first_index, self.stride)
    }

    /// Retained values `u_n x` (not reduced), when requested at generation.
    pub fn unreduced(&self) -> Option<&[Fixed]> {
        self.unreduced.as_deref()
    }

    pub fn unreduced_error(&self) -> f64 {
        self.unreduced_error
    }

    pub(crate) fn set_mode(&mut self, mode: OrbitMode) {
        self.mode = mode;
    }

    /// First `n` entries as a new orbit.
    pub fn prefix(&self, n: usize) -> FractionalOrbit {
        let mut o = self.clone();
        o.entries.truncate(n);
        if let Some(u) = o.unreduced.as_mut() {
            u.truncate(n);
        }
        o
    }
}

/// Entries `k m + l`, `m = 0, 1, ...`, reduced modulo `L`.
///
/// With `L = 1` (and a unit-scale orbit) entries are picked directly;
/// any other modulus needs retained unreduced values.
pub fn subsample(
    o: &FractionalOrbit,
    k: usize,
    l: usize,
    modulus: &BigRational,
) -> Result<FractionalOrbit> {
    if k == 0 {
        return Err(invalid("stride must be positive"));
    }
    if l >= k {
        return Err(invalid(format!("offset {l} must be below the stride {k}")));
    }
    if !modulus.is_positive() {
        return Err(invalid(format!("modulus must be positive, got {modulus}")));
    }
    let picks: Vec<usize> = (l..o.len()).step_by(k).collect();
    let unreduced = o
        .unreduced
        .as_ref()
        .map(|u| picks.iter().map(|&i| u[i].clone()).collect::<Vec<_>>());
    let same_scale = *modulus == o.scale;
    let (entries, err) = if same_scale {
        (
            picks.iter().map(|&i| o.entries[i]).collect(),
            o.guaranteed_abs_error,
        )
    } else {
        let u = unreduced.as_ref().ok_or(AvgError::MissingUnreduced)?;
        let inv = 1.0 / modulus.to_f64().unwrap_or(1.0);
        (
            u.iter().map(|v| v.frac_div(modulus)).collect(),
            o.unreduced_error * inv + ENTRY_ROUNDING,
        )
    };
    Ok(FractionalOrbit {
        entries,
        mode: o.mode.clone(),
        seed: o.seed.clone(),
        precision_bits: o.precision_bits,
        guaranteed_abs_error: err,
        scale: modulus.clone(),
        first_index: o.first_index + l as u64 * o.stride,
        stride: o.stride * k as u64,
        unreduced,
        unreduced_error: o.unreduced_error,
    })
}
