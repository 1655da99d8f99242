//! Steady-state Gaussian steering of a nondegenerate three-level cascade
//! laser driven into a two-mode squeezed vacuum.
//!
//! The pipeline runs parameters ([`model`]) through steady-state moments
//! ([`steady_state`], cross-checked by [`dynamics`]) to the two-mode
//! covariance and its steerabilities ([`steering`]). [`sweep`] evaluates
//! grids of such points, and [`cli`] exposes everything on the command line.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod model;
pub mod plot;
pub mod steady_state;
pub mod steering;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use model::{LaserParams, ReservoirParams};
pub use steady_state::{SecondMoments, TwoModeCovariance};
pub use steering::{steering_report, Direction, MomentSource, Regime, SteeringReport};
pub use sweep::{figure_preset, run_sweep, run_sweep_with, Execution, SweepResult, SweepSpec};
