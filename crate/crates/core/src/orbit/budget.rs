use crate::error::{AvgError, Result};

pub const DEFAULT_BUDGET_MB: u64 = 256;
pub const BUDGET_ENV: &str = "AVGLAB_PRECISION_BUDGET_MB";

/// Memory budget per orbit in bytes (`AVGLAB_PRECISION_BUDGET_MB` overrides the default).
pub fn budget_bytes() -> u64 {
    std::env::var(BUDGET_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<u64>().ok())
        .unwrap_or(DEFAULT_BUDGET_MB)
        .saturating_mul(1 << 20)
}

/// Working precision in bits for `n` steps at growth `2^growth_log2` per step.
pub fn working_bits(growth_log2: f64, n: usize, x_mag_log2: f64, target_error: f64) -> u64 {
    let n = n.max(1) as f64;
    (n * growth_log2).ceil() as u64
        + x_mag_log2.ceil().max(0.0) as u64
        + n.log2().ceil() as u64
        + (-target_error.log2()).ceil().max(0.0) as u64
        + 32
}

pub fn check(required_bits: u64, required_bytes: u64, budget: u64) -> Result<()> {
    if required_bytes > budget {
        return Err(AvgError::PrecisionBudget {
            required_bits,
            required_bytes,
            budget_bytes: budget,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_formula() {
        // 4 * 1 + ceil(log2 3) + 2 + 40 + 32
        assert_eq!(
            working_bits(1.0, 4, 3f64.log2(), 2f64.powi(-40)),
            4 + 2 + 2 + 40 + 32
        );
    }

    #[test]
    fn budget_error_names_bits() {
        let e = check(1 << 40, 1 << 37, 1 << 28).unwrap_err();
        assert!(e.to_string().contains(&(1u64 << 40).to_string()));
    }
}
