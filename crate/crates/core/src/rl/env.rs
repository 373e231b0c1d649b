use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::em::{EMSummary, EmError, Evaluator};
use crate::geometry::{clamp_and_flag, snap, BoundaryFlags, DesignBounds, DesignVariables, Variable};

/// Number of state features: five normalized variables and ten flags.
pub const STATE_LEN: usize = 15;
/// Number of discrete actions.
pub const ACTION_COUNT: usize = 11;

/// Success thresholds on a solved design.
pub const MAX_VSWR: f64 = 2.0;
pub const MIN_GAIN_DIFFERENCE_DB: f64 = 10.0;
pub const MAX_IMPEDANCE_ANGLE_DEG: f64 = 15.0;

/// Discrete action: raise or lower one variable by its step, or do nothing.
///
/// Ids `2v` and `2v + 1` raise and lower variable `v` in the order D1, θ1,
/// L3,0, L3,1, L3,2; id 10 is the no-op.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActionId(u8);

impl ActionId {
    pub const NOOP: ActionId = ActionId(10);

    pub fn new(id: usize) -> Option<Self> {
        (id < ACTION_COUNT).then_some(Self(id as u8))
    }

    pub fn all() -> impl Iterator<Item = ActionId> {
        (0..ACTION_COUNT as u8).map(ActionId)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Variable touched and whether it is raised; `None` for the no-op.
    pub fn effect(self) -> Option<(Variable, bool)> {
        if self == Self::NOOP {
            return None;
        }
        Some((Variable::ALL[self.index() / 2], self.index() % 2 == 0))
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.effect() {
            None => write!(f, "noop"),
            Some((var, true)) => write!(f, "{var}+"),
            Some((var, false)) => write!(f, "{var}-"),
        }
    }
}

/// Agent observation of a design.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    /// `(v - min) / (max - min)` per variable.
    pub normalized: [f64; 5],
    pub flags: BoundaryFlags,
}

impl EnvState {
    pub fn features(&self) -> [f64; STATE_LEN] {
        let mut out = [0.0; STATE_LEN];
        out[..5].copy_from_slice(&self.normalized);
        for (o, &f) in out[5..].iter_mut().zip(&self.flags.0) {
            *o = if f { 1.0 } else { 0.0 };
        }
        out
    }
}

pub fn encode_state(vars: &DesignVariables, bounds: &DesignBounds) -> EnvState {
    let (clamped, flags) = clamp_and_flag(vars, bounds);
    let mut normalized = [0.0; 5];
    for var in Variable::ALL {
        let b = bounds.get(var);
        normalized[var.index()] = (clamped.get(var) - b.min) / b.span();
    }
    EnvState { normalized, flags }
}

/// Moves one variable by its fixed step and saturates into the bounds.
pub fn apply_action(vars: &DesignVariables, action: ActionId, bounds: &DesignBounds) -> DesignVariables {
    let mut next = *vars;
    if let Some((var, up)) = action.effect() {
        let b = bounds.get(var);
        let value = vars.get(var);
        let moved = if up { value + b.step_up } else { value - b.step_down };
        next.set(var, snap(moved));
    }
    clamp_and_flag(&next, bounds).0
}

/// True when all three success thresholds hold strictly.
pub fn meets_thresholds(summary: &EMSummary) -> bool {
    summary.vswr < MAX_VSWR && summary.g_diff_db > MIN_GAIN_DIFFERENCE_DB && summary.phi_deg < MAX_IMPEDANCE_ANGLE_DEG
}

/// `(success_reward, true)` on success, `(-1, false)` otherwise.
pub fn reward(summary: &EMSummary, success_reward: f64) -> (f64, bool) {
    if meets_thresholds(summary) {
        (success_reward, true)
    } else {
        (-1.0, false)
    }
}

/// Each variable uniform over its increment lattice.
pub fn env_reset<R: Rng + ?Sized>(bounds: &DesignBounds, rng: &mut R) -> (DesignVariables, EnvState) {
    let mut vars = bounds.center();
    for var in Variable::ALL {
        let lattice = bounds.get(var).lattice();
        vars.set(var, lattice[rng.gen_range(0..lattice.len())]);
    }
    (vars, encode_state(&vars, bounds))
}

/// What the environment learns about a design.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Assessment {
    /// Solved; success decided by the thresholds.
    Scored(EMSummary),
    /// Success decided directly, without a solve.
    Verdict(bool),
}

/// Source of design assessments: the EM solver or a surrogate.
pub trait DesignOracle {
    fn assess(&mut self, vars: &DesignVariables) -> Result<Assessment, EmError>;
}

/// EM-solver oracle with a per-design cache. Results are deterministic, so
/// caching only saves time.
#[derive(Clone)]
pub struct EmOracle {
    evaluator: Arc<Evaluator>,
    cache: HashMap<[u64; 5], Result<EMSummary, EmError>>,
    pub solves: usize,
    pub cache_hits: usize,
}

impl EmOracle {
    pub fn new(evaluator: Arc<Evaluator>) -> Self {
        Self { evaluator, cache: HashMap::new(), solves: 0, cache_hits: 0 }
    }

    pub fn evaluator(&self) -> &Arc<Evaluator> {
        &self.evaluator
    }
}

impl DesignOracle for EmOracle {
    fn assess(&mut self, vars: &DesignVariables) -> Result<Assessment, EmError> {
        let key = vars.key();
        if let Some(hit) = self.cache.get(&key) {
            self.cache_hits += 1;
            return hit.clone().map(Assessment::Scored);
        }
        self.solves += 1;
        let result = self.evaluator.summary(vars);
        self.cache.insert(key, result.clone());
        result.map(Assessment::Scored)
    }
}

/// Outcome of one environment step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    pub vars: DesignVariables,
    pub state: EnvState,
    pub reward: f64,
    pub done: bool,
    pub summary: Option<EMSummary>,
    /// The oracle failed; `vars` are the pre-action design.
    pub failed: bool,
}

/// Applies `action`, assesses the result, and scores it. A failed assessment
/// costs −1 and leaves the design where it was.
pub fn env_step<O: DesignOracle + ?Sized>(
    vars: &DesignVariables,
    action: ActionId,
    oracle: &mut O,
    bounds: &DesignBounds,
    success_reward: f64,
) -> StepOutcome {
    let next = apply_action(vars, action, bounds);
    match oracle.assess(&next) {
        Ok(assessment) => {
            let (summary, success) = match assessment {
                Assessment::Scored(s) => (Some(s), meets_thresholds(&s)),
                Assessment::Verdict(ok) => (None, ok),
            };
            let reward = if success { success_reward } else { -1.0 };
            StepOutcome { vars: next, state: encode_state(&next, bounds), reward, done: success, summary, failed: false }
        }
        Err(_) => StepOutcome {
            vars: *vars,
            state: encode_state(vars, bounds),
            reward: -1.0,
            done: false,
            summary: None,
            failed: true,
        },
    }
}

/// Solver-free surrogate: success exactly at one hidden lattice point.
#[derive(Clone, Debug)]
pub struct TargetOracle {
    target: [u64; 5],
}

impl TargetOracle {
    pub fn new(target: &DesignVariables) -> Self {
        Self { target: target.key() }
    }

    /// Target drawn uniformly from the lattice of `bounds`.
    pub fn random<R: Rng + ?Sized>(bounds: &DesignBounds, rng: &mut R) -> Self {
        Self::new(&env_reset(bounds, rng).0)
    }
}

impl DesignOracle for TargetOracle {
    fn assess(&mut self, vars: &DesignVariables) -> Result<Assessment, EmError> {
        Ok(Assessment::Verdict(vars.key() == self.target))
    }
}
