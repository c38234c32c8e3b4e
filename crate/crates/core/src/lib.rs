// Negated comparisons below deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apfunctions;
pub mod averaging;
pub mod diophantine;
pub mod equidistribution;
pub mod error;
pub mod experiment;
pub mod numeric;
pub mod orbit;
pub mod report;

pub use error::{AvgError, Result};
