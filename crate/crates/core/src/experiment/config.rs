//! Experiment configs (TOML).
//!
//! ```toml
//! experiment = "periodic-average"
//! alpha = ["2", "3/2", "tau"]
//! schedule = [100, 1000, 10000]
//! threads = 1
//!
//! [sampling]
//! lo = "1"
//! hi = "2"
//! count = 100
//! seed = 1
//!
//! [function]
//! type = "trigpoly"
//! a0 = 2
//! terms = [{ k = 1, a = 3 }]
//!
//! [params]
//! tolerance = 0.05
//! fraction = 0.9
//!
//! [output]
//! trace = "periodic-average.csv"
//! summary = "periodic-average.json"
//! ```
//!
//! `sampling.points` replaces the random draws by explicit constants. The
//! `[params]` keys and their defaults per experiment are listed on
//! [`Params`]; unknown keys anywhere are rejected.

use std::path::Path;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::apfunctions::spec::FunctionSpec;
use crate::error::{AvgError, Result};
use crate::numeric::RealConst;
use crate::orbit::{BetaMode, Multiplier, SeedPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    WeylUd,
    DiscrepancyBound,
    PeriodicAverage,
    SobolSingular,
    BohrAverage,
    StepanovAverage,
    DioScan,
    RenyiParry,
    Normality,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 9] = [
        ExperimentId::WeylUd,
        ExperimentId::DiscrepancyBound,
        ExperimentId::PeriodicAverage,
        ExperimentId::SobolSingular,
        ExperimentId::BohrAverage,
        ExperimentId::StepanovAverage,
        ExperimentId::DioScan,
        ExperimentId::RenyiParry,
        ExperimentId::Normality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::WeylUd => "weyl-ud",
            ExperimentId::DiscrepancyBound => "discrepancy-bound",
            ExperimentId::PeriodicAverage => "periodic-average",
            ExperimentId::SobolSingular => "sobol-singular",
            ExperimentId::BohrAverage => "bohr-average",
            ExperimentId::StepanovAverage => "stepanov-average",
            ExperimentId::DioScan => "dio-scan",
            ExperimentId::RenyiParry => "renyi-parry",
            ExperimentId::Normality => "normality",
        }
    }

    /// The statement an experiment reproduces.
    pub fn statement(self) -> &'static str {
        match self {
            ExperimentId::WeylUd => "Fact power-dist",
            ExperimentId::DiscrepancyBound => "Fact discrep",
            ExperimentId::PeriodicAverage => "Fact per-sample",
            ExperimentId::SobolSingular => "Theorem p-Sobol",
            ExperimentId::BohrAverage => "Theorem Bohr",
            ExperimentId::StepanovAverage => "Theorem ap-Sobol",
            ExperimentId::DioScan => "Lemma Dio",
            ExperimentId::RenyiParry => "Example Renyi-Parry density",
            ExperimentId::Normality => "Normal numbers remark",
        }
    }
}

impl std::fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Starting points: `count` draws from `[lo, hi)` on ChaCha20 streams
/// `(seed, 0..count)`, or the explicit `points`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    #[serde(default = "default_lo")]
    pub lo: String,
    #[serde(default = "default_hi")]
    pub hi: String,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<String>,
}

fn default_lo() -> String {
    "1".into()
}

fn default_hi() -> String {
    "2".into()
}

fn default_count() -> usize {
    100
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            lo: default_lo(),
            hi: default_hi(),
            count: default_count(),
            seed: 0,
            points: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaModeSpec {
    Certified,
    Fast,
}

impl From<BetaModeSpec> for BetaMode {
    fn from(m: BetaModeSpec) -> Self {
        match m {
            BetaModeSpec::Certified => BetaMode::Certified,
            BetaModeSpec::Fast => BetaMode::Fast,
        }
    }
}

/// Predicate thresholds and experiment knobs. All are calibration choices.
///
/// | key | used by | default |
/// |---|---|---|
/// | `fraction` | all | 0.9 (0.95 for `dio-scan`) |
/// | `tolerance` | averages: bound on `abs(S_N - M(f))`; `normality`: block frequency deviation | 0.05; 0.02 |
/// | `star_max` | `weyl-ud`: bound on the median `D*_N` | 0.02 |
/// | `weyl_max` | `weyl-ud`: bound on `max abs(weyl_sum)` over `1 <= abs(k) <= kmax` | 0.05 |
/// | `kmax` | `weyl-ud` | 5 |
/// | `epsilon` | `discrepancy-bound` envelope exponent `3/2 + eps`; `sobol-singular`; `dio-scan` | 0.1; `min(0.1, eta)`; 0.5 |
/// | `z` | `sobol-singular`: singularity location | 0 |
/// | `set` | `dio-scan` | `"Z"` |
/// | `truncations` | `bohr-average`: sandwich orders `m` | `[1, 2, 4, 8]` |
/// | `beta_mode` | `renyi-parry` | `certified` |
/// | `exp_tolerance`, `beta_tolerance`, `min_separation` | `renyi-parry` medians | 0.02, 0.03, 0.08 |
/// | `base`, `block_lengths` | `normality` | 2, `[1, 2]` |
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub star_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weyl_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kmax: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncations: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_mode: Option<BetaModeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exp_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_separation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_lengths: Option<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default = "default_trace")]
    pub trace: String,
    #[serde(default = "default_summary")]
    pub summary: String,
}

fn default_trace() -> String {
    "trace.csv".into()
}

fn default_summary() -> String {
    "summary.json".into()
}

impl Default for Output {
    fn default() -> Self {
        Self {
            trace: default_trace(),
            summary: default_summary(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    /// Multiplier specs such as `"2"`, `"3/2"`, `"tau"`, `"sqrt(2)"`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alpha: Vec<String>,
    pub schedule: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionSpec>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub output: Output,
}

fn config_error(path: impl Into<String>, message: impl std::fmt::Display) -> AvgError {
    AvgError::Config {
        path: path.into(),
        message: message.to_string(),
    }
}

fn rational(path: &str, text: &str) -> Result<BigRational> {
    match RealConst::parse(text).map_err(|e| config_error(path, e))? {
        RealConst::Rational(r) => Ok(r),
        RealConst::Quadratic(_) => Err(config_error(path, "sampling bounds must be rational")),
    }
}

impl ExperimentConfig {
    /// Parses TOML text; schema errors name the offending key path.
    pub fn parse(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| config_error("", e.message()))?;
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_error(path, e.into_inner().message())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_error("", e))
    }

    /// Checks everything the schema cannot: multipliers, sampling, schedule, function.
    pub fn validate(&self) -> Result<()> {
        self.multipliers()?;
        self.seeds(self.sampling.seed)?;
        if self.schedule.is_empty() {
            return Err(config_error(
                "schedule",
                "at least one checkpoint is required",
            ));
        }
        if self.schedule[0] == 0 || self.schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config_error(
                "schedule",
                "checkpoints must be positive and strictly increasing",
            ));
        }
        if self.threads == Some(0) {
            return Err(config_error("threads", "thread count must be positive"));
        }
        if let Some(f) = &self.function {
            f.build().map_err(|e| config_error("function", e))?;
        }
        let needs_alpha = self.experiment != ExperimentId::Normality;
        if needs_alpha && self.alpha.is_empty() {
            return Err(config_error("alpha", "at least one multiplier is required"));
        }
        Ok(())
    }

    pub fn multipliers(&self) -> Result<Vec<Multiplier>> {
        self.alpha
            .iter()
            .enumerate()
            .map(|(i, a)| Multiplier::parse(a).map_err(|e| config_error(format!("alpha[{i}]"), e)))
            .collect()
    }

    /// Starting points with their `x_index`, using `seed` for random draws.
    pub fn seeds(&self, seed: u64) -> Result<Vec<SeedPoint>> {
        let s = &self.sampling;
        if !s.points.is_empty() {
            return s
                .points
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    SeedPoint::parse(p)
                        .map_err(|e| config_error(format!("sampling.points[{i}]"), e))
                })
                .collect();
        }
        if s.count == 0 {
            return Err(config_error("sampling.count", "need at least one sample"));
        }
        let lo = rational("sampling.lo", &s.lo)?;
        let hi = rational("sampling.hi", &s.hi)?;
        (0..s.count as u64)
            .map(|i| {
                SeedPoint::sampled_in(seed, i, lo.clone(), hi.clone())
                    .map_err(|e| config_error("sampling", e))
            })
            .collect()
    }

    pub fn final_n(&self) -> usize {
        *self.schedule.last().expect("validated schedule")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
experiment = "periodic-average"
alpha = ["2", "tau"]
schedule = [10, 100]

[sampling]
count = 3
seed = 5

[function]
type = "trigpoly"
a0 = 2
terms = [{ k = 1, a = 3 }]
"#;

    #[test]
    fn parses_and_round_trips() {
        let c = ExperimentConfig::parse(BASIC).unwrap();
        assert_eq!(c.experiment, ExperimentId::PeriodicAverage);
        assert_eq!(c.sampling.lo, "1");
        assert_eq!(c.output.trace, "trace.csv");
        let again = ExperimentConfig::parse(&c.to_toml().unwrap()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn errors_name_the_key() {
        let bad = BASIC.replace("count = 3", "count = \"three\"");
        let e = ExperimentConfig::parse(&bad).unwrap_err().to_string();
        assert!(e.contains("sampling.count"), "{e}");
        let bad = BASIC.replace("seed = 5", "seed = 5\ncolour = 1");
        let e = ExperimentConfig::parse(&bad).unwrap_err().to_string();
        assert!(e.contains("colour"), "{e}");
        let bad = BASIC.replace("\"tau\"", "\"-1\"");
        let e = ExperimentConfig::parse(&bad).unwrap_err().to_string();
        assert!(
            e.contains("alpha[1]") && e.contains("|alpha| must exceed 1"),
            "{e}"
        );
        let bad = BASIC.replace("[10, 100]", "[100, 10]");
        assert!(ExperimentConfig::parse(&bad).is_err());
    }

    #[test]
    fn registry_names_round_trip() {
        for id in ExperimentId::ALL {
            let quoted = serde_json::to_string(&id).unwrap();
            assert_eq!(quoted, format!("\"{}\"", id.name()));
        }
    }
}
