//! Crowd motion under the hard density constraint `ρ ≤ 1`.
//!
//! The crate is `no_std` (it needs `alloc`) and contains the numerical core:
//!
//! * [`grid`], [`field`], [`preset`]: box domains, cell-averaged fields and
//!   closed-form initial data / drifts.
//! * [`transport`]: exact discrete optimal transport (network simplex with
//!   Kantorovich potentials), the 1D quantile formula, Sinkhorn, optimal maps,
//!   displacement interpolation and the Wasserstein projection onto `{ρ ≤ 1}`.
//! * [`pressure`]: projection of a drift onto the admissible cone, producing
//!   the pressure `p ≥ 0` supported on the saturated set.
//! * [`dynamics`]: upwind transport, implicit diffusion, the first- and
//!   second-order splitting schemes and the weak-form residual.
//! * [`analysis`]: monotonicity constants, W₂ and L¹ contraction reports and
//!   the positivity / geodesic-derivative checks.
//!
//! IO, scenario files and the command line live in the `congested-crowd`
//! crate.
#![no_std]
#![deny(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod grid;
mod math;
pub mod operators;
pub mod preset;
pub mod pressure;
pub mod rng;
pub mod scenario;
pub mod transport;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use field::{l1_distance, DensityField, PressureField, VelocityField};
pub use grid::Grid;
pub use preset::{make_density, DensityPreset, VelocityPreset};
pub use scenario::{Order, Scenario};
