//! Exponential and beta-transformation orbits.

pub mod beta;
pub mod budget;
pub mod engine;
pub mod fractional;
pub mod general;
pub mod multiplier;
pub mod seed;

pub use beta::{beta_orbit, BetaMode};
pub use engine::OrbitCursor;
pub use fractional::{
    generate_orbit, orbit_cursor, subsample, FractionalOrbit, OrbitMode, OrbitOptions,
};
pub use general::GeneralSequence;
pub use multiplier::{Multiplier, MultiplierValue};
pub use seed::SeedPoint;
