//! Parking process (random sequential adsorption) on Z^d.
//!
//! * [`field`]: counter-based i.i.d. uniform marks shared by every process.
//! * [`lattice`]: boxes, neighbours, boundaries.
//! * [`parking`]: finite-volume jamming with frozen boundary conditions.
//! * [`armour`]: armours and the exact sampler of the thermodynamic limit.
//! * [`estimators`]: Monte Carlo density, covariance, CLT/LIL diagnostics,
//!   concentration tails and the d = 1 boundary coupling.
//! * [`bounds`]: closed-form constants and inequality right-hand sides.
//! * [`exact1d`]: exact d = 1 armour calculus and a permutation oracle.
//! * [`cli`]: the `parkjam` command line.

pub mod armour;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod exact1d;
pub mod field;
pub mod lattice;
pub mod parking;
pub mod stats;

pub use error::{Error, Result};
pub use field::{Seed, Site, UniformField};
pub use lattice::BoxRegion;
