use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::checkpoint::{Checkpoint, RngState};
use super::metrics::{RunMetrics, SuccessRecord};
use super::{HarnessError, RunConfig};
use crate::em::Evaluator;
use crate::geometry::DesignVariables;
use crate::rl::{
    env_reset, env_step, epsilon_schedule, q_update, select_action, DesignOracle, EmOracle, EnvState, QNetworkParams,
    ReplayBuffer, Transition, LAYER_SIZES,
};

/// Agent state carried between simulations.
struct Agent {
    params: QNetworkParams,
    target: QNetworkParams,
    replay: ReplayBuffer,
    rng: ChaCha8Rng,
}

impl Agent {
    fn fresh(config: &RunConfig) -> Result<Self, HarnessError> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let params = QNetworkParams::init(&LAYER_SIZES, &mut rng);
        let target = params.clone();
        Ok(Self { params, target, replay: ReplayBuffer::new(config.agent.replay_capacity)?, rng })
    }

    /// Network (and optimizer) state from `ckpt`, everything else fresh from
    /// the run seed.
    fn warm(config: &RunConfig, ckpt: &Checkpoint) -> Result<Self, HarnessError> {
        ckpt.check_compatible(&LAYER_SIZES)?;
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        let params = ckpt.params.clone();
        let mut target = params.weights_only();
        target.theta.clone_from(&ckpt.target_theta);
        let replay = match (&ckpt.replay, config.restore_replay) {
            (Some(buf), true) if buf.capacity() == config.agent.replay_capacity => buf.clone(),
            _ => ReplayBuffer::new(config.agent.replay_capacity)?,
        };
        Ok(Self { params, target, replay, rng })
    }

    fn checkpoint(&self, keep_replay: bool, simulations: u64) -> Checkpoint {
        Checkpoint::new(
            self.params.clone(),
            self.target.theta.clone(),
            keep_replay.then(|| self.replay.clone()),
            RngState::capture(&self.rng),
            simulations,
        )
    }
}

/// Runs episodic deep Q-learning against `oracle` for `config.budget`
/// simulations.
fn run_agent<O: DesignOracle + ?Sized>(
    config: &RunConfig,
    oracle: &mut O,
    agent: &mut Agent,
) -> Result<RunMetrics, HarnessError> {
    let started = Instant::now();
    let hp = &config.agent;
    let bounds = &config.bounds;
    let mut metrics = RunMetrics::default();
    let mut episode: Option<(DesignVariables, EnvState, usize)> = None;
    for sim in 0..config.budget {
        let (vars, state, steps) = match episode {
            Some(e) => e,
            None => {
                metrics.episodes += 1;
                let (v, s) = env_reset(bounds, &mut agent.rng);
                (v, s, 0)
            }
        };
        let epsilon = epsilon_schedule(hp.epsilon_start, sim, config.budget);
        let action = select_action(&agent.params, &state, epsilon, &mut agent.rng);
        let out = env_step(&vars, action, oracle, bounds, hp.success_reward);
        if out.failed {
            metrics.solver_failures += 1;
        }
        agent.replay.push(Transition { state, action, reward: out.reward, next_state: out.state, done: out.done });
        if agent.replay.len() >= hp.batch_size {
            let batch = agent.replay.sample(hp.batch_size, &mut agent.rng)?;
            q_update(&mut agent.params, &batch, &agent.target, hp)
                .map_err(|e| HarnessError::Training { simulation: sim + 1, source: e })?;
        }
        if (sim + 1) % hp.target_sync == 0 {
            agent.target.theta.clone_from(&agent.params.theta);
        }
        if out.done {
            metrics.record_success(sim + 1, out.vars, out.summary);
        }
        let steps = steps + 1;
        episode = if out.done || steps >= hp.episode_cap { None } else { Some((out.vars, out.state, steps)) };
    }
    metrics.total_simulations = config.budget;
    metrics.wall_clock_s = started.elapsed().as_secs_f64();
    Ok(metrics)
}

/// Trains from scratch (or from `init`) against any oracle.
pub fn train_on<O: DesignOracle + ?Sized>(
    config: &RunConfig,
    oracle: &mut O,
    init: Option<&Checkpoint>,
) -> Result<(RunMetrics, Checkpoint), HarnessError> {
    config.validate()?;
    let mut agent = match init {
        Some(ckpt) => Agent::warm(config, ckpt)?,
        None => Agent::fresh(config)?,
    };
    let before = init.map_or(0, |c| c.simulations);
    let metrics = run_agent(config, oracle, &mut agent)?;
    let ckpt = agent.checkpoint(config.keep_replay, before + config.budget as u64);
    Ok((metrics, ckpt))
}

/// Builds the solver for the tube and frequency of `config`.
pub fn build_evaluator(config: &RunConfig) -> Result<Arc<Evaluator>, HarnessError> {
    Ok(Arc::new(Evaluator::new(&config.tube, config.frequency, config.solver)?))
}

/// Trains a fresh agent against the EM solver.
pub fn train(config: &RunConfig) -> Result<(RunMetrics, Checkpoint), HarnessError> {
    train_with(config, build_evaluator(config)?)
}

/// As [`train`], reusing an evaluator built for the same tube and frequency.
pub fn train_with(config: &RunConfig, evaluator: Arc<Evaluator>) -> Result<(RunMetrics, Checkpoint), HarnessError> {
    check_evaluator(config, &evaluator)?;
    train_on(config, &mut EmOracle::new(evaluator), None)
}

/// Cold start without a checkpoint, warm start from one. Returns the
/// success with the lowest VSWR (then lowest φ) as the best design.
pub fn transfer_run(
    checkpoint: Option<&Checkpoint>,
    config: &RunConfig,
) -> Result<(RunMetrics, Option<SuccessRecord>, Checkpoint), HarnessError> {
    transfer_run_with(checkpoint, config, build_evaluator(config)?)
}

pub fn transfer_run_with(
    checkpoint: Option<&Checkpoint>,
    config: &RunConfig,
    evaluator: Arc<Evaluator>,
) -> Result<(RunMetrics, Option<SuccessRecord>, Checkpoint), HarnessError> {
    check_evaluator(config, &evaluator)?;
    let (metrics, ckpt) = train_on(config, &mut EmOracle::new(evaluator), checkpoint)?;
    let best = metrics.best().copied();
    Ok((metrics, best, ckpt))
}

fn check_evaluator(config: &RunConfig, evaluator: &Evaluator) -> Result<(), HarnessError> {
    if evaluator.tube() != &config.tube || evaluator.frequency() != config.frequency || evaluator.options() != &config.solver {
        return Err(HarnessError::Config("evaluator was built for a different tube, frequency or solver setup".into()));
    }
    Ok(())
}
