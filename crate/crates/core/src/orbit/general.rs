use num_rational::BigRational;
use num_traits::One;

use super::fractional::{generate_orbit, subsample, FractionalOrbit, OrbitMode, OrbitOptions};
use super::multiplier::Multiplier;
use super::seed::SeedPoint;
use crate::error::{invalid, Result};

/// The sequence `u_m = alpha^(k m + l)`, `m = 0, 1, ...`.
#[derive(Clone, Debug)]
pub struct GeneralSequence {
    alpha: Multiplier,
    stride: usize,
    offset: usize,
}

impl GeneralSequence {
    pub fn powers(alpha: Multiplier) -> Self {
        Self {
            alpha,
            stride: 1,
            offset: 0,
        }
    }

    pub fn subsampled(alpha: Multiplier, stride: usize, offset: usize) -> Result<Self> {
        if stride == 0 {
            return Err(invalid("stride must be positive"));
        }
        if offset >= stride {
            return Err(invalid(format!(
                "offset {offset} must be below the stride {stride}"
            )));
        }
        Ok(Self {
            alpha,
            stride,
            offset,
        })
    }

    pub fn describe(&self) -> String {
        if self.stride == 1 && self.offset == 0 {
            format!("powers({})", self.alpha)
        } else {
            format!(
                "powers({})[{} m + {}]",
                self.alpha, self.stride, self.offset
            )
        }
    }

    /// Lower bound on `inf_{n != m} |u_n - u_m|`.
    ///
    /// For `beta = alpha^k`: `beta - 1` when `beta > 1`, else
    /// `min(|beta| + 1, beta^2 - 1)`; the offset scales the gap by `|alpha|^l`.
    pub fn separation_gap(&self) -> f64 {
        let b = self.alpha.to_f64().powi(self.stride as i32);
        let base = if b > 1.0 {
            b - 1.0
        } else {
            (b.abs() + 1.0).min(b * b - 1.0)
        };
        let scale = 2f64.powf(self.offset as f64 * self.alpha.abs_log2());
        // shave a few ulps so the bound stays below the exact value
        base * scale * (1.0 - 1e-12)
    }

    /// `<u_m x / L>` for `m = 0..N-1`.
    pub fn generate(
        &self,
        x: &SeedPoint,
        n: usize,
        opts: &OrbitOptions,
    ) -> Result<FractionalOrbit> {
        let full = self.stride * (n.max(1) - 1) + self.offset + 1;
        let modulus = opts.modulus.clone().unwrap_or_else(BigRational::one);
        let mut base_opts = opts.clone();
        base_opts.modulus = None;
        base_opts.retain_unreduced = opts.retain_unreduced || !modulus.is_one();
        let o = generate_orbit(&self.alpha, x, full, &base_opts)?;
        let mut s = subsample(&o, self.stride, self.offset, &modulus)?;
        s.set_mode(OrbitMode::General {
            description: self.describe(),
        });
        Ok(s)
    }
}
