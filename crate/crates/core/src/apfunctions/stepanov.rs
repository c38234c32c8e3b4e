use num_complex::Complex64;

use super::singular::{model_variation, PowerSingularity};
use super::ApFunction;
use crate::diophantine::UniformlyDiscreteSet;
use crate::error::{invalid, Result};
use crate::numeric::Fixed;

/// The power-law model placed at every point of a uniformly discrete set.
#[derive(Clone, Debug)]
pub struct SetSingularity {
    pub set: UniformlyDiscreteSet,
    pub model: PowerSingularity,
}

impl SetSingularity {
    /// `model.z` is ignored; the model is centred at each point of `set`.
    pub fn new(set: UniformlyDiscreteSet, mut model: PowerSingularity) -> Result<Self> {
        model.z = 0.0;
        model.validate()?;
        if 2.0 * model.delta > set.min_gap() {
            return Err(invalid(format!(
                "half-width {} exceeds half the minimum gap {}",
                model.delta,
                set.min_gap()
            )));
        }
        Ok(Self { set, model })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match Fixed::from_f64(x) {
            Some(f) => self.model.value(self.set.nearest_offset(&f)),
            None => f64::NAN,
        }
    }

    pub fn eval_fixed(&self, x: &Fixed) -> f64 {
        self.model.value(self.set.nearest_offset(x))
    }

    pub fn window_integral(&self, a: f64, b: f64) -> f64 {
        let d = self.model.delta;
        self.set
            .points_in(a - d, b + d)
            .into_iter()
            .map(|y| self.model.integral(a - y, b - y))
            .sum()
    }
}

/// A locally integrable function: a regular part plus optional singularities
/// on a uniformly discrete set.
#[derive(Clone, Debug)]
pub struct StepanovFunction {
    regular: Option<Box<ApFunction>>,
    singular: Option<SetSingularity>,
}

impl StepanovFunction {
    pub fn new(regular: Option<ApFunction>, singular: Option<SetSingularity>) -> Result<Self> {
        if regular.is_none() && singular.is_none() {
            return Err(invalid(
                "a Stepanov function needs a regular or a singular part",
            ));
        }
        Ok(Self {
            regular: regular.map(Box::new),
            singular,
        })
    }

    pub fn regular(&self) -> Option<&ApFunction> {
        self.regular.as_deref()
    }

    pub fn singular(&self) -> Option<&SetSingularity> {
        self.singular.as_ref()
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let mut v = self.regular.as_ref().map(|r| r.eval(x)).unwrap_or_default();
        if let Some(s) = &self.singular {
            v += s.eval(x);
        }
        v
    }

    pub fn eval_fixed(&self, x: &Fixed) -> Complex64 {
        let mut v = self
            .regular
            .as_ref()
            .map(|r| r.eval_fixed(x))
            .unwrap_or_default();
        if let Some(s) = &self.singular {
            v += s.eval_fixed(x);
        }
        v
    }

    pub fn window_integral(&self, a: f64, b: f64) -> Complex64 {
        let mut v = self
            .regular
            .as_ref()
            .map(|r| r.window_integral(a, b))
            .unwrap_or_default();
        if let Some(s) = &self.singular {
            v += s.window_integral(a, b);
        }
        v
    }

    pub fn poles(&self, a: f64, b: f64) -> Vec<f64> {
        let mut out = self
            .regular
            .as_ref()
            .map(|r| r.poles(a, b))
            .unwrap_or_default();
        if let Some(s) = &self.singular {
            out.extend(s.set.points_in(a, b));
        }
        out
    }

    pub fn kinks(&self, a: f64, b: f64) -> Vec<f64> {
        let mut out = self
            .regular
            .as_ref()
            .map(|r| r.kinks(a, b))
            .unwrap_or_default();
        if let Some(s) = &self.singular {
            let d = s.model.delta;
            for y in s.set.points_in(a - d, b + d) {
                out.extend([y - d, y, y + d]);
            }
        }
        out.retain(|x| *x >= a && *x <= b);
        out
    }

    /// `V_N(z, s)` at a point `z` of the singular set.
    pub fn variation(&self, z: f64, s: f64, n: u64) -> Result<f64> {
        if !(s > 0.0) || n < 2 {
            return Err(invalid("variation needs s > 0 and N >= 2"));
        }
        let sing = self
            .singular
            .as_ref()
            .ok_or_else(|| invalid("function has no singular part"))?;
        if sing.set.dist_f64(z) > 1e-12 * z.abs().max(1.0) {
            return Err(invalid(format!("{z} is not a point of the singular set")));
        }
        match &self.regular {
            Some(r) => {
                let g = |x: f64| r.eval(x);
                let dg = |x: f64| r.derivative(x);
                let d = sing.model.delta;
                model_variation(&sing.model, z, s, n, Some((&g, &dg, r.kinks(z - d, z + d))))
            }
            None => model_variation(&sing.model, z, s, n, None),
        }
    }
}
