//! Design environment and deep Q-learning agent.
//!
//! The environment exposes the five antenna dimensions as a 15-feature state,
//! eleven step actions, and a reward of −1 per step until the design meets
//! the VSWR, gain-difference and impedance-angle thresholds. The agent is a
//! 15-100-100-11 ReLU network trained from an experience replay buffer with
//! ADAM, acting epsilon-greedily.

mod agent;
mod env;
mod network;

use thiserror::Error;

pub use agent::{
    argmax, epsilon_at, epsilon_schedule, q_targets, q_update, select_action, AgentConfig, ReplayBuffer, Transition,
};
pub use env::{
    apply_action, encode_state, env_reset, env_step, meets_thresholds, reward, ActionId, Assessment, DesignOracle,
    EmOracle, EnvState, StepOutcome, TargetOracle, ACTION_COUNT, MAX_IMPEDANCE_ANGLE_DEG, MAX_VSWR,
    MIN_GAIN_DIFFERENCE_DB, STATE_LEN,
};
pub use network::{QNetworkParams, LAYER_SIZES};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RlError {
    #[error("replay buffer is empty")]
    EmptyReplay,
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("network shape mismatch: {0}")]
    Shape(String),
    #[error("invalid agent configuration: {0}")]
    Config(String),
}
