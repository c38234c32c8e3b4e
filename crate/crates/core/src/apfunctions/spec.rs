//! Function descriptions for configs.
//!
//! A description is a record tagged by `type`. Complex numbers are written
//! as a plain number or a `[re, im]` pair; frequencies as an integer, a
//! float, or a constant string such as `"sqrt(2)"`, `"tau"`, `"3/2"`.
//!
//! | `type` | fields |
//! |---|---|
//! | `constant` | `value` |
//! | `trigpoly` | `a0` (default 0), `terms = [{k, a}]` |
//! | `step` | `breaks` (unit coordinates, increasing, inside (0, 1)), `values` (one more than `breaks`), `period` (default `"1"`) |
//! | `indicator` | `lo`, `hi` in unit coordinates, `period` |
//! | `singular` | `models = [{z, a, c}` or `{z, a, c_left, c_right}` plus `delta]`, optional periodic `remainder`; a single model may be given inline as `z, a, c, delta` |
//! | `frac-power` | `p` in (-1/2, 0): the function `<x>^p` |
//! | `bohr` | `a0`, `terms = [{k, a}]`, `residual` (bound on the omitted terms) |
//! | `geometric-bohr` | `len`: frequencies 1, sqrt 2, tau, sqrt 3, ... with `a_l = 2^(1-l)` |
//! | `stepanov` | `set` (e.g. `"beatty:sqrt(2):1:0"`), `a`, `c`, `delta`, optional `regular` |
//! | `sum` | `parts = [{c, f}]` |
//! | `mollified` | `base`, `delta` |
//! | `renyi-parry-density` | none: the golden-ratio density `h_tau` |
//!
//! ```toml
//! [function]
//! type = "trigpoly"
//! a0 = [2, 0]
//! terms = [{ k = 1, a = [3, 0] }]
//! ```

use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{
    mollify, ApFunction, BohrSeries, Frequency, PeriodicFunction, PowerSingularity, SetSingularity,
    Shape, SingularPeriodic, StepanovFunction, TrigPolynomial,
};
use crate::diophantine::parse_set;
use crate::error::{invalid, Result};
use crate::numeric::RealConst;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexSpec {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexSpec {
    pub fn value(&self) -> Complex64 {
        match *self {
            ComplexSpec::Real(r) => Complex64::new(r, 0.0),
            ComplexSpec::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

impl Default for ComplexSpec {
    fn default() -> Self {
        ComplexSpec::Real(0.0)
    }
}

/// A real constant written as a number or as text.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConstSpec {
    Int(i64),
    Float(f64),
    Text(String),
}

impl ConstSpec {
    pub fn constant(&self) -> Result<RealConst> {
        match self {
            ConstSpec::Int(k) => Ok(RealConst::integer(*k)),
            ConstSpec::Float(v) => RealConst::from_f64(*v)
                .ok_or_else(|| invalid(format!("{v} is not a finite number"))),
            ConstSpec::Text(s) => RealConst::parse(s),
        }
    }

    pub fn to_f64(&self) -> Result<f64> {
        Ok(match self {
            ConstSpec::Int(k) => *k as f64,
            ConstSpec::Float(v) => *v,
            ConstSpec::Text(s) => RealConst::parse(s)?.to_f64(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub k: ConstSpec,
    pub a: ComplexSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub z: f64,
    pub a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_left: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_right: Option<f64>,
    pub delta: f64,
}

impl ModelSpec {
    fn build(&self) -> Result<PowerSingularity> {
        let (l, r) = match (self.c, self.c_left, self.c_right) {
            (Some(c), None, None) => (c, c),
            (None, Some(l), Some(r)) => (l, r),
            _ => return Err(invalid("give either `c` or both `c_left` and `c_right`")),
        };
        let m = PowerSingularity {
            z: self.z,
            a: self.a,
            c_left: l,
            c_right: r,
            delta: self.delta,
        };
        m.validate()?;
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartSpec {
    pub c: ComplexSpec,
    pub f: FunctionSpec,
}

fn one() -> ConstSpec {
    ConstSpec::Int(1)
}

fn is_one(c: &ConstSpec) -> bool {
    *c == ConstSpec::Int(1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant {
        value: ComplexSpec,
    },
    Trigpoly {
        #[serde(default)]
        a0: ComplexSpec,
        #[serde(default)]
        terms: Vec<TermSpec>,
    },
    Step {
        breaks: Vec<ConstSpec>,
        values: Vec<ComplexSpec>,
        #[serde(default = "one", skip_serializing_if = "is_one")]
        period: ConstSpec,
    },
    Indicator {
        lo: ConstSpec,
        hi: ConstSpec,
        #[serde(default = "one", skip_serializing_if = "is_one")]
        period: ConstSpec,
    },
    Singular {
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        models: Vec<ModelSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        z: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        remainder: Option<Box<FunctionSpec>>,
    },
    FracPower {
        p: f64,
    },
    Bohr {
        #[serde(default)]
        a0: ComplexSpec,
        terms: Vec<TermSpec>,
        residual: f64,
    },
    GeometricBohr {
        len: usize,
    },
    Stepanov {
        set: String,
        a: f64,
        c: f64,
        delta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        regular: Option<Box<FunctionSpec>>,
    },
    Sum {
        parts: Vec<PartSpec>,
    },
    Mollified {
        base: Box<FunctionSpec>,
        delta: f64,
    },
    RenyiParryDensity,
}

fn terms(list: &[TermSpec]) -> Result<Vec<(Frequency, Complex64)>> {
    list.iter()
        .map(|t| Ok((Frequency::new(t.k.constant()?), t.a.value())))
        .collect()
}

fn period(p: &ConstSpec) -> Result<BigRational> {
    match p.constant()? {
        RealConst::Rational(r) => Ok(r),
        other => Err(invalid(format!("period must be rational, got {other}"))),
    }
}

impl FunctionSpec {
    pub fn build(&self) -> Result<ApFunction> {
        Ok(match self {
            FunctionSpec::Constant { value } => {
                ApFunction::Trig(TrigPolynomial::constant(value.value()))
            }
            FunctionSpec::Trigpoly { a0, terms: t } => {
                ApFunction::Trig(TrigPolynomial::new(a0.value(), terms(t)?)?)
            }
            FunctionSpec::Step {
                breaks,
                values,
                period: p,
            } => {
                let breaks = breaks
                    .iter()
                    .map(ConstSpec::to_f64)
                    .collect::<Result<Vec<_>>>()?;
                let values = values.iter().map(ComplexSpec::value).collect();
                ApFunction::Periodic(PeriodicFunction::new(
                    period(p)?,
                    Shape::Step { breaks, values },
                )?)
            }
            FunctionSpec::Indicator { lo, hi, period: p } => {
                let shape = Shape::Indicator {
                    lo: lo.to_f64()?,
                    hi: hi.to_f64()?,
                };
                ApFunction::Periodic(PeriodicFunction::new(period(p)?, shape)?)
            }
            FunctionSpec::Singular {
                models,
                z,
                a,
                c,
                delta,
                remainder,
            } => {
                let mut list = models
                    .iter()
                    .map(ModelSpec::build)
                    .collect::<Result<Vec<_>>>()?;
                match (z, a, c, delta) {
                    (Some(z), Some(a), Some(c), Some(d)) => list.push(
                        ModelSpec {
                            z: *z,
                            a: *a,
                            c: Some(*c),
                            c_left: None,
                            c_right: None,
                            delta: *d,
                        }
                        .build()?,
                    ),
                    (None, None, None, None) => {}
                    _ => {
                        return Err(invalid(
                            "an inline singular model needs all of z, a, c, delta",
                        ))
                    }
                }
                if list.is_empty() {
                    return Err(invalid("a singular function needs at least one model"));
                }
                let rem = match remainder {
                    Some(r) => match r.build()? {
                        ApFunction::Periodic(p) => p,
                        ApFunction::Trig(t) if t.terms().is_empty() => {
                            PeriodicFunction::constant(t.a0())
                        }
                        _ => {
                            return Err(invalid(
                                "the remainder must be a periodic step, indicator or constant",
                            ))
                        }
                    },
                    None => PeriodicFunction::constant(Complex64::new(0.0, 0.0)),
                };
                ApFunction::Singular(SingularPeriodic::new(list, rem)?)
            }
            FunctionSpec::FracPower { p } => {
                ApFunction::Singular(SingularPeriodic::frac_power(*p)?)
            }
            FunctionSpec::Bohr {
                a0,
                terms: t,
                residual,
            } => ApFunction::Bohr(BohrSeries::new(a0.value(), terms(t)?, *residual)?),
            FunctionSpec::GeometricBohr { len } => ApFunction::Bohr(BohrSeries::geometric(*len)?),
            FunctionSpec::Stepanov {
                set,
                a,
                c,
                delta,
                regular,
            } => {
                let set = parse_set(set)?;
                let model = PowerSingularity::symmetric(0.0, *a, *c, *delta);
                let regular = regular.as_ref().map(|r| r.build()).transpose()?;
                ApFunction::Stepanov(StepanovFunction::new(
                    regular,
                    Some(SetSingularity::new(set, model)?),
                )?)
            }
            FunctionSpec::Sum { parts } => ApFunction::Combination(
                parts
                    .iter()
                    .map(|p| Ok((p.c.value(), p.f.build()?)))
                    .collect::<Result<Vec<_>>>()?,
            ),
            FunctionSpec::Mollified { base, delta } => mollify(&base.build()?, *delta)?,
            FunctionSpec::RenyiParryDensity => {
                crate::averaging::RenyiParryDensity::golden().to_function()?
            }
        })
    }
}
