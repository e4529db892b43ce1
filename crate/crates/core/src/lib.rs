//! Discrete fractional-order predator-prey-parasite map.
//!
//! The map is obtained by freezing the right-hand side of a Caputo-type
//! fractional system over each step of length `s`, which gives an explicit
//! update with coefficient `rho = s^alpha / (alpha * Gamma(alpha))`:
//!
//! ```text
//! X' = X + rho X (r (1 - (X + Y)/K) - lambda Y)
//! Y' = Y + rho Y (lambda X - m Z/(a + Y) - mu)
//! Z' = Z + rho Z (theta Y/(a + Y) - d)
//! ```
//!
//! The crate provides the map itself, its four fixed points, Jury-criterion
//! stability analysis with the closed-form step-size thresholds, trajectory
//! simulation, and bifurcation / largest-Lyapunov-exponent sweeps.

pub mod analysis;
pub mod eigen;
mod error;
pub mod gamma;
pub mod model;
pub mod output;
pub mod simulation;
pub mod stability;
pub mod thresholds;

pub use error::{Error, Result};
pub use gamma::gamma_fn;
pub use model::{
    basic_reproduction_number, fixed_points, step, theta_threshold, Discretization, FixedPoint,
    FixedPointKind, ModelParams, State,
};
