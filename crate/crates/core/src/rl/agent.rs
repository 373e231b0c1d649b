use rand::Rng;
use serde::{Deserialize, Serialize};

use super::env::{ActionId, EnvState, ACTION_COUNT};
use super::network::QNetworkParams;
use super::RlError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: EnvState,
    pub action: ActionId,
    pub reward: f64,
    pub next_state: EnvState,
    pub done: bool,
}

/// Learning hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub epsilon_start: f64,
    /// Discount factor.
    pub gamma: f64,
    /// Blend between the current estimate and the bootstrapped target.
    pub alpha: f64,
    pub learning_rate: f64,
    pub replay_capacity: usize,
    pub batch_size: usize,
    /// Environment steps between target-network copies.
    pub target_sync: usize,
    pub episode_cap: usize,
    pub success_reward: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            epsilon_start: 0.5,
            gamma: 0.99,
            alpha: 0.5,
            learning_rate: 1e-4,
            replay_capacity: 10_000,
            batch_size: 32,
            target_sync: 250,
            episode_cap: 200,
            success_reward: 100.0,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), RlError> {
        let bad = |what: &str| Err(RlError::Config(what.to_string()));
        if !(0.0..=1.0).contains(&self.epsilon_start) {
            return bad("epsilon_start must lie in [0, 1]");
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad("alpha must lie in [0, 1]");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.replay_capacity == 0 || self.batch_size == 0 || self.target_sync == 0 || self.episode_cap == 0 {
            return bad("replay_capacity, batch_size, target_sync and episode_cap must be positive");
        }
        if !(self.success_reward > 0.0 && self.success_reward.is_finite()) {
            return bad("success_reward must be positive");
        }
        Ok(())
    }
}

/// Linear anneal from `start` at step 0 to zero at `total_steps`.
pub fn epsilon_schedule(start: f64, step: usize, total_steps: usize) -> f64 {
    if total_steps == 0 {
        return 0.0;
    }
    start * (1.0 - step.min(total_steps) as f64 / total_steps as f64)
}

/// The default schedule, 0.5 down to 0.
pub fn epsilon_at(step: usize, total_steps: usize) -> f64 {
    epsilon_schedule(0.5, step, total_steps)
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Epsilon-greedy choice. Always draws one uniform number, plus one action
/// index when exploring.
pub fn select_action<R: Rng + ?Sized>(params: &QNetworkParams, state: &EnvState, epsilon: f64, rng: &mut R) -> ActionId {
    let explore = rng.gen::<f64>() < epsilon;
    let id = if explore {
        rng.gen_range(0..ACTION_COUNT)
    } else {
        argmax(&params.forward(&state.features()))
    };
    ActionId::new(id).expect("action index in range")
}

/// Fixed-capacity ring buffer of transitions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    /// Slot overwritten by the next push once full.
    next: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Result<Self, RlError> {
        if capacity == 0 {
            return Err(RlError::Config("replay capacity must be positive".into()));
        }
        Ok(Self { capacity, items: Vec::with_capacity(capacity.min(1 << 16)), next: 0 })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    /// Rebuilds a buffer from its storage order and write cursor.
    pub fn from_parts(capacity: usize, items: Vec<Transition>, next: usize) -> Result<Self, RlError> {
        let full = items.len() == capacity;
        if capacity == 0 || items.len() > capacity || next >= capacity || (!full && next != items.len() % capacity) {
            return Err(RlError::Config("inconsistent replay buffer layout".into()));
        }
        Ok(Self { capacity, items, next })
    }

    /// Storage order, as used by sampling.
    pub fn raw_items(&self) -> &[Transition] {
        &self.items
    }

    pub fn next_slot(&self) -> usize {
        self.next
    }

    /// Oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        let split = if self.items.len() < self.capacity { 0 } else { self.next };
        self.items[split..].iter().chain(&self.items[..split])
    }

    /// Uniform sample with replacement.
    pub fn sample<R: Rng + ?Sized>(&self, batch_size: usize, rng: &mut R) -> Result<Vec<Transition>, RlError> {
        if self.items.is_empty() {
            return Err(RlError::EmptyReplay);
        }
        Ok((0..batch_size).map(|_| self.items[rng.gen_range(0..self.items.len())]).collect())
    }
}

/// Blended regression targets
/// `y = (1 − α)·Q(s, a) + α·(r + γ·max Q_target(s′, ·))`, bootstrap dropped
/// on terminal transitions.
pub fn q_targets(params: &QNetworkParams, target: &QNetworkParams, batch: &[Transition], gamma: f64, alpha: f64) -> Vec<f64> {
    batch
        .iter()
        .map(|t| {
            let q = params.forward(&t.state.features())[t.action.index()];
            let bootstrap = if t.done {
                0.0
            } else {
                target.forward(&t.next_state.features()).into_iter().fold(f64::NEG_INFINITY, f64::max)
            };
            (1.0 - alpha) * q + alpha * (t.reward + gamma * bootstrap)
        })
        .collect()
}

/// One ADAM step on the mean squared error against [`q_targets`]. Returns the
/// loss before the step.
pub fn q_update(
    params: &mut QNetworkParams,
    batch: &[Transition],
    target: &QNetworkParams,
    config: &AgentConfig,
) -> Result<f64, RlError> {
    if batch.is_empty() {
        return Err(RlError::EmptyReplay);
    }
    let targets = q_targets(params, target, batch, config.gamma, config.alpha);
    let inputs: Vec<Vec<f64>> = batch.iter().map(|t| t.state.features().to_vec()).collect();
    let actions: Vec<usize> = batch.iter().map(|t| t.action.index()).collect();
    let (loss, grad) = params.loss_and_gradient(&inputs, &actions, &targets);
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(RlError::NonFinite(format!("training loss {loss} after {} updates", params.t)));
    }
    params.adam_step(&grad, config.learning_rate);
    Ok(loss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BoundaryFlags, DesignBounds};
    use crate::rl::env::{encode_state, env_reset};
    use crate::rl::network::LAYER_SIZES;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn transition(rng: &mut ChaCha8Rng, done: bool, reward: f64) -> Transition {
        let bounds = DesignBounds::default();
        Transition {
            state: env_reset(&bounds, rng).1,
            action: ActionId::new(rng.gen_range(0..ACTION_COUNT)).unwrap(),
            reward,
            next_state: env_reset(&bounds, rng).1,
            done,
        }
    }

    #[test]
    fn epsilon_schedule_endpoints() {
        assert_eq!(epsilon_at(0, 2000), 0.5);
        assert_eq!(epsilon_at(2000, 2000), 0.0);
        assert_eq!(epsilon_at(1000, 2000), 0.25);
        assert_eq!(epsilon_at(0, 0), 0.0);
    }

    #[test]
    fn greedy_ties_pick_lowest_index() {
        let params = QNetworkParams::zeros(&LAYER_SIZES);
        let state = encode_state(&DesignBounds::default().center(), &DesignBounds::default());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            assert_eq!(select_action(&params, &state, 0.0, &mut rng).index(), 0);
        }
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 2.0]), 1);
    }

    #[test]
    fn full_exploration_is_uniform() {
        let params = QNetworkParams::zeros(&LAYER_SIZES);
        let state = EnvState { normalized: [0.5; 5], flags: BoundaryFlags::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 10_000;
        let mut counts = [0usize; ACTION_COUNT];
        for _ in 0..n {
            counts[select_action(&params, &state, 1.0, &mut rng).index()] += 1;
        }
        let p = 1.0 / ACTION_COUNT as f64;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 * p).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn ring_buffer_evicts_oldest() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut buf = ReplayBuffer::new(3).unwrap();
        for i in 0..4 {
            buf.push(transition(&mut rng, false, i as f64));
        }
        let rewards: Vec<f64> = buf.iter().map(|t| t.reward).collect();
        assert_eq!(rewards, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn empty_buffer_cannot_sample() {
        let buf = ReplayBuffer::new(4).unwrap();
        assert!(matches!(buf.sample(2, &mut ChaCha8Rng::seed_from_u64(0)), Err(RlError::EmptyReplay)));
        assert!(ReplayBuffer::new(0).is_err());
    }

    #[test]
    fn singleton_buffer_repeats() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut buf = ReplayBuffer::new(4).unwrap();
        let t = transition(&mut rng, true, 7.0);
        buf.push(t);
        assert_eq!(buf.sample(5, &mut rng).unwrap(), vec![t; 5]);
    }

    #[test]
    fn sampling_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut buf = ReplayBuffer::new(10).unwrap();
        for i in 0..10 {
            buf.push(transition(&mut rng, false, i as f64));
        }
        let n = 10_000;
        let mut counts = [0usize; 10];
        for t in buf.sample(n, &mut rng).unwrap() {
            counts[t.reward as usize] += 1;
        }
        let sigma = (n as f64 * 0.1 * 0.9).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 * 0.1).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn terminal_target_with_full_blend_is_reward() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let params = QNetworkParams::init(&LAYER_SIZES, &mut rng);
        let batch = [transition(&mut rng, true, 100.0), transition(&mut rng, true, -1.0)];
        assert_eq!(q_targets(&params, &params, &batch, 0.99, 1.0), vec![100.0, -1.0]);
    }

    #[test]
    fn zero_blend_leaves_params_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut params = QNetworkParams::init(&LAYER_SIZES, &mut rng);
        let before = params.theta.clone();
        let batch: Vec<Transition> = (0..8).map(|_| transition(&mut rng, false, -1.0)).collect();
        let target = params.clone();
        let config = AgentConfig { alpha: 0.0, ..AgentConfig::default() };
        let loss = q_update(&mut params, &batch, &target, &config).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(params.theta, before);
    }

    #[test]
    fn update_reduces_loss_on_fixed_batch() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut params = QNetworkParams::init(&LAYER_SIZES, &mut rng);
        let batch: Vec<Transition> = (0..16).map(|i| transition(&mut rng, true, if i % 2 == 0 { 5.0 } else { -1.0 })).collect();
        let config = AgentConfig { alpha: 1.0, learning_rate: 1e-3, ..AgentConfig::default() };
        let target = params.clone();
        let first = q_update(&mut params, &batch, &target, &config).unwrap();
        let mut last = first;
        for _ in 0..200 {
            last = q_update(&mut params, &batch, &target, &config).unwrap();
        }
        assert!(last < 0.5 * first, "{first} -> {last}");
    }

    #[test]
    fn config_validation() {
        AgentConfig::default().validate().unwrap();
        assert!(AgentConfig { gamma: 1.0, ..AgentConfig::default() }.validate().is_err());
        assert!(AgentConfig { batch_size: 0, ..AgentConfig::default() }.validate().is_err());
    }
}
