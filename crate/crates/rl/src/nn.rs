//! Small dense networks over a flat parameter slice, and Adam.
//!
//! Parameters for layer `l` are stored as a row-major weight matrix
//! (`out × in`) followed by the bias, layers back to back. Hidden layers use
//! tanh; the output layer is linear.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlpShape {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

/// Per-sample activations and deltas, reused across calls.
#[derive(Debug, Clone)]
pub struct Workspace {
    acts: Vec<Vec<f64>>,
    deltas: Vec<Vec<f64>>,
}

impl MlpShape {
    /// `sizes = [input, hidden.., output]`.
    pub fn new(sizes: &[usize]) -> Self {
        assert!(sizes.len() >= 2 && sizes.iter().all(|&s| s > 0), "invalid layer sizes {sizes:?}");
        let mut offsets = Vec::with_capacity(sizes.len() - 1);
        let mut offset = 0;
        for w in sizes.windows(2) {
            offsets.push(offset);
            offset += w[0] * w[1] + w[1];
        }
        Self {
            sizes: sizes.to_vec(),
            offsets,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("at least two layers")
    }

    fn layers(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.sizes.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn num_params(&self) -> usize {
        self.layers().map(|(i, o)| o * i + o).sum()
    }

    pub fn workspace(&self) -> Workspace {
        Workspace {
            acts: self.sizes.iter().map(|&s| vec![0.0; s]).collect(),
            deltas: self.sizes.iter().map(|&s| vec![0.0; s]).collect(),
        }
    }

    /// Gaussian init with std `1/√fan_in`, output layer scaled by `out_gain`, zero biases.
    pub fn init<R: Rng + ?Sized>(&self, rng: &mut R, out_gain: f64) -> Vec<f64> {
        let n_layers = self.sizes.len() - 1;
        let mut params = Vec::with_capacity(self.num_params());
        for (l, (fan_in, fan_out)) in self.layers().enumerate() {
            let gain = if l + 1 == n_layers { out_gain } else { 1.0 };
            let std = gain / (fan_in as f64).sqrt();
            for _ in 0..fan_in * fan_out {
                let z: f64 = StandardNormal.sample(rng);
                params.push(std * z);
            }
            params.extend(std::iter::repeat_n(0.0, fan_out));
        }
        params
    }

    /// Runs one input through the network; the output is `ws.output()`.
    pub fn forward(&self, params: &[f64], x: &[f64], ws: &mut Workspace) {
        debug_assert_eq!(params.len(), self.num_params());
        ws.acts[0].copy_from_slice(x);
        let n_layers = self.sizes.len() - 1;
        let mut offset = 0;
        for (l, (n_in, n_out)) in self.layers().enumerate() {
            let (w, rest) = params[offset..].split_at(n_in * n_out);
            let b = &rest[..n_out];
            offset += n_in * n_out + n_out;
            let (before, after) = ws.acts.split_at_mut(l + 1);
            let input = &before[l];
            let out = &mut after[0];
            for j in 0..n_out {
                let row = &w[j * n_in..(j + 1) * n_in];
                let z = b[j] + row.iter().zip(input).map(|(a, x)| a * x).sum::<f64>();
                out[j] = if l + 1 < n_layers { z.tanh() } else { z };
            }
        }
    }

    /// Accumulates `∂(d_out · output)/∂params` into `grad` for the input of
    /// the last `forward` call.
    pub fn backward(&self, params: &[f64], d_out: &[f64], ws: &mut Workspace, grad: &mut [f64]) {
        let n_layers = self.sizes.len() - 1;
        ws.deltas[n_layers].copy_from_slice(d_out);
        for l in (0..n_layers).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let off = self.offsets[l];
            let w = &params[off..off + n_in * n_out];
            let (gw, gb) = grad[off..off + n_in * n_out + n_out].split_at_mut(n_in * n_out);
            let (lower, upper) = ws.deltas.split_at_mut(l + 1);
            let delta = &upper[0];
            let input = &ws.acts[l];
            for j in 0..n_out {
                let d = delta[j];
                gb[j] += d;
                for (g, x) in gw[j * n_in..(j + 1) * n_in].iter_mut().zip(input) {
                    *g += d * x;
                }
            }
            if l > 0 {
                let d_in = &mut lower[l];
                d_in.iter_mut().for_each(|v| *v = 0.0);
                for j in 0..n_out {
                    let d = delta[j];
                    for (di, a) in d_in.iter_mut().zip(&w[j * n_in..(j + 1) * n_in]) {
                        *di += d * a;
                    }
                }
                // Through tanh: 1 − a².
                for (di, a) in d_in.iter_mut().zip(&ws.acts[l]) {
                    *di *= 1.0 - a * a;
                }
            }
        }
    }
}

impl Workspace {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("at least two layers")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(n_params: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + self.eps);
        }
    }
}
