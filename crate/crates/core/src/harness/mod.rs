//! Training, transfer and learning-curve experiments, plus checkpoints.

mod checkpoint;
mod metrics;
mod run;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use checkpoint::{load_checkpoint, save_checkpoint, shape_fingerprint, Checkpoint, RngState};
pub use metrics::{
    attempts_curve, quartile_medians, read_metrics_csv, sign_test_p, write_metrics_csv, RunMetrics, SuccessRecord,
    METRICS_HEADER,
};
pub use run::{build_evaluator, train, train_on, train_with, transfer_run, transfer_run_with};

use crate::em::{EmError, SolverOptions};
use crate::geometry::{DesignBounds, GeometryError, TubeSpec};
use crate::rl::{AgentConfig, RlError};
use crate::DEFAULT_FREQUENCY;

/// Simulation budgets sized for a desktop run.
pub const DESK_TRAIN_BUDGET: usize = 2_000;
pub const DESK_TRANSFER_BUDGET: usize = 300;
/// Budgets of the full-scale experiments.
pub const FULL_TRAIN_BUDGET: usize = 20_000;
pub const FULL_TRANSFER_BUDGET: usize = 1_250;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Em(#[from] EmError),
    #[error(transparent)]
    Rl(#[from] RlError),
    #[error("training diverged at simulation {simulation}: {source}")]
    Training { simulation: usize, source: RlError },
    #[error("incompatible checkpoint: {0}")]
    Incompatible(String),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("malformed metrics file: {0}")]
    Format(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Everything that determines a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub tube: TubeSpec,
    pub bounds: DesignBounds,
    /// Design frequency, Hz.
    pub frequency: f64,
    pub agent: AgentConfig,
    pub solver: SolverOptions,
    /// Simulations (environment steps) to run.
    pub budget: usize,
    pub seed: u64,
    /// Store the replay buffer in the final checkpoint.
    pub keep_replay: bool,
    /// Resume the replay buffer when warm-starting from a checkpoint that has one.
    pub restore_replay: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tube: TubeSpec::default(),
            bounds: DesignBounds::default(),
            frequency: DEFAULT_FREQUENCY,
            agent: AgentConfig::default(),
            solver: SolverOptions::default(),
            budget: DESK_TRAIN_BUDGET,
            seed: 0,
            keep_replay: false,
            restore_replay: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        self.tube.validate()?;
        self.bounds.validate()?;
        self.agent.validate()?;
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(HarnessError::Config(format!("frequency must be positive, got {}", self.frequency)));
        }
        Ok(())
    }
}
