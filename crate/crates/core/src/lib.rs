//! Reinforcement-learning design of small conformal dipole arrays mounted on
//! conductive tubes.
//!
//! The crate is organized bottom-up:
//!
//! * [`geometry`]: design variables, the wire-grid tube, the three dipoles and
//!   NEC-2 deck export.
//! * [`em`]: a thin-wire method-of-moments solver producing input impedance,
//!   VSWR, impedance angle, front-to-back gain difference and far-field
//!   patterns.
//! * [`rl`]: the design environment and a deep Q-learning agent with
//!   experience replay and ADAM.
//! * [`harness`]: training, transfer runs, learning curves and checkpoints.

pub mod em;
pub mod geometry;
pub mod harness;
pub mod rl;
pub mod vec3;

pub use em::{evaluate_design, ComplexImpedance, EMReport, EMSummary, FarFieldPattern};
pub use geometry::{DesignBounds, DesignVariables, TubeSpec, WireModel};
pub use harness::{Checkpoint, RunConfig, RunMetrics};
pub use rl::{ActionId, EnvState, QNetworkParams, Transition};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default design frequency: 2.45 GHz.
pub const DEFAULT_FREQUENCY: f64 = 2.45e9;

pub fn wavelength(frequency: f64) -> f64 {
    SPEED_OF_LIGHT / frequency
}
