//! Config-driven experiments, one per reproduced statement.
//!
//! A run draws its starting points, evaluates the experiment on every
//! sample in parallel (results are merged in sample order, so output is
//! independent of the thread count), and writes a trace CSV with the
//! averaging schema plus a summary JSON holding the predicate verdict.

pub mod config;
mod run;

pub use config::{BetaModeSpec, ExperimentConfig, ExperimentId, Output, Params, Sampling};
pub use run::{
    default_function, execute, list_experiments, run, write_orbit_csv, AverageGroup, BlockStats,
    DioGroup, EnvelopeGroup, Group, NormalityGroup, Outcome, RenyiGroup, SandwichSummary,
    SobolSummary, Summary, WeylGroup, Written,
};
