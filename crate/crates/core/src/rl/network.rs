use rand::Rng;
use serde::{Deserialize, Serialize};

use super::RlError;

/// Layer widths: 15 inputs, two hidden layers of 100, 11 outputs.
pub const LAYER_SIZES: [usize; 4] = [15, 100, 100, 11];

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Weights and biases of the fully connected Q-network plus ADAM state.
///
/// All parameters live in one flat vector, layer by layer, each layer as a
/// row-major `out × in` weight block followed by its `out` biases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QNetworkParams {
    pub sizes: Vec<usize>,
    pub theta: Vec<f64>,
    /// ADAM first moments.
    pub m: Vec<f64>,
    /// ADAM second moments.
    pub v: Vec<f64>,
    /// ADAM steps taken.
    pub t: u64,
}

fn parameter_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[1] * w[0] + w[1]).sum()
}

/// Per-layer activations kept for the backward pass.
struct Trace {
    /// Input of every layer, then the output of the last.
    layers: Vec<Vec<f64>>,
}

impl QNetworkParams {
    /// Weights uniform in `±1/sqrt(fan_in)`, biases zero.
    pub fn init<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Self {
        let n = parameter_count(sizes);
        let mut theta = Vec::with_capacity(n);
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            for _ in 0..fan_in * fan_out {
                theta.push(rng.gen_range(-bound..bound));
            }
            theta.extend(std::iter::repeat(0.0).take(fan_out));
        }
        Self { sizes: sizes.to_vec(), theta, m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    pub fn zeros(sizes: &[usize]) -> Self {
        let n = parameter_count(sizes);
        Self { sizes: sizes.to_vec(), theta: vec![0.0; n], m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    pub fn inputs(&self) -> usize {
        self.sizes[0]
    }

    pub fn outputs(&self) -> usize {
        *self.sizes.last().expect("network has layers")
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// Checks that every vector matches the layer sizes and holds finite values.
    pub fn validate(&self) -> Result<(), RlError> {
        if self.sizes.len() < 2 || self.sizes.iter().any(|&s| s == 0) {
            return Err(RlError::Shape(format!("bad layer sizes {:?}", self.sizes)));
        }
        let n = parameter_count(&self.sizes);
        if self.theta.len() != n || self.m.len() != n || self.v.len() != n {
            return Err(RlError::Shape(format!(
                "expected {n} parameters, found {}/{}/{}",
                self.theta.len(),
                self.m.len(),
                self.v.len()
            )));
        }
        if self.theta.iter().chain(&self.m).chain(&self.v).any(|x| !x.is_finite()) {
            return Err(RlError::NonFinite("network parameters".into()));
        }
        Ok(())
    }

    fn trace(&self, input: &[f64]) -> Trace {
        assert_eq!(input.len(), self.inputs(), "input width");
        let mut layers = vec![input.to_vec()];
        let mut offset = 0;
        let last = self.sizes.len() - 2;
        for (l, w) in self.sizes.windows(2).enumerate() {
            let (fan_in, fan_out) = (w[0], w[1]);
            let weights = &self.theta[offset..offset + fan_in * fan_out];
            let biases = &self.theta[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
            let x = layers.last().unwrap();
            let mut y: Vec<f64> = biases.to_vec();
            for (o, yo) in y.iter_mut().enumerate() {
                let row = &weights[o * fan_in..(o + 1) * fan_in];
                *yo += row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
                if l < last {
                    *yo = yo.max(0.0);
                }
            }
            layers.push(y);
            offset += fan_in * fan_out + fan_out;
        }
        Trace { layers }
    }

    /// Action values for one state.
    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        self.trace(input).layers.pop().unwrap()
    }

    /// Adds `d loss / d theta` to `grad` given `d loss / d output`.
    fn backward(&self, trace: &Trace, d_out: &[f64], grad: &mut [f64]) {
        let n_layers = self.sizes.len() - 1;
        let mut offsets = Vec::with_capacity(n_layers);
        let mut offset = 0;
        for w in self.sizes.windows(2) {
            offsets.push(offset);
            offset += w[0] * w[1] + w[1];
        }
        let mut delta = d_out.to_vec();
        for l in (0..n_layers).rev() {
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            let off = offsets[l];
            let x = &trace.layers[l];
            for o in 0..fan_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                let row = &mut grad[off + o * fan_in..off + (o + 1) * fan_in];
                for (g, xi) in row.iter_mut().zip(x) {
                    *g += d * xi;
                }
                grad[off + fan_in * fan_out + o] += d;
            }
            if l == 0 {
                break;
            }
            let weights = &self.theta[off..off + fan_in * fan_out];
            let mut prev = vec![0.0; fan_in];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                for (p, w) in prev.iter_mut().zip(&weights[o * fan_in..(o + 1) * fan_in]) {
                    *p += d * w;
                }
            }
            // ReLU derivative, taken as zero at the kink.
            for (p, &a) in prev.iter_mut().zip(&trace.layers[l]) {
                if a <= 0.0 {
                    *p = 0.0;
                }
            }
            delta = prev;
        }
    }

    /// Mean squared error of `Q(s_i, a_i)` against `targets` and its gradient.
    pub fn loss_and_gradient(&self, inputs: &[Vec<f64>], actions: &[usize], targets: &[f64]) -> (f64, Vec<f64>) {
        let b = inputs.len();
        assert!(b > 0 && actions.len() == b && targets.len() == b, "batch shape");
        let mut grad = vec![0.0; self.theta.len()];
        let mut loss = 0.0;
        let mut d_out = vec![0.0; self.outputs()];
        for ((x, &a), &y) in inputs.iter().zip(actions).zip(targets) {
            let trace = self.trace(x);
            let err = trace.layers.last().unwrap()[a] - y;
            loss += err * err;
            d_out.iter_mut().for_each(|d| *d = 0.0);
            d_out[a] = 2.0 * err / b as f64;
            self.backward(&trace, &d_out, &mut grad);
        }
        (loss / b as f64, grad)
    }

    /// One bias-corrected ADAM step along `grad`.
    pub fn adam_step(&mut self, grad: &[f64], lr: f64) {
        assert_eq!(grad.len(), self.theta.len(), "gradient length");
        self.t += 1;
        let c1 = 1.0 - BETA1.powi(self.t.min(i32::MAX as u64) as i32);
        let c2 = 1.0 - BETA2.powi(self.t.min(i32::MAX as u64) as i32);
        for i in 0..self.theta.len() {
            let g = grad[i];
            self.m[i] = BETA1 * self.m[i] + (1.0 - BETA1) * g;
            self.v[i] = BETA2 * self.v[i] + (1.0 - BETA2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            self.theta[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
        }
    }

    /// Copies the weights only, leaving the optimizer state fresh.
    pub fn weights_only(&self) -> Self {
        let n = self.theta.len();
        Self { sizes: self.sizes.clone(), theta: self.theta.clone(), m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }
}
