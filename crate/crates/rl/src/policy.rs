//! Diagonal Gaussian actor with a separate value network.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::nn::{MlpShape, Workspace};

/// `½ ln(2π)`.
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Policy and value networks sharing one flat parameter vector laid out as
/// `[actor | log_std | critic]`. The log-std does not depend on the state.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorCritic {
    actor: MlpShape,
    critic: MlpShape,
    act_dim: usize,
    params: Vec<f64>,
}

/// Scratch space for one sample through both networks.
#[derive(Debug, Clone)]
pub struct ModelWorkspace {
    pub(crate) actor: Workspace,
    pub(crate) critic: Workspace,
}

impl ActorCritic {
    pub fn new<R: Rng + ?Sized>(obs_dim: usize, act_dim: usize, hidden: &[usize], rng: &mut R) -> Self {
        let sizes = |out: usize| {
            let mut s = vec![obs_dim];
            s.extend_from_slice(hidden);
            s.push(out);
            s
        };
        let actor = MlpShape::new(&sizes(act_dim));
        let critic = MlpShape::new(&sizes(1));
        let mut params = actor.init(rng, 0.01);
        params.extend(std::iter::repeat_n(0.0, act_dim));
        params.extend(critic.init(rng, 1.0));
        Self {
            actor,
            critic,
            act_dim,
            params,
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.actor.input_dim()
    }

    pub fn act_dim(&self) -> usize {
        self.act_dim
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn workspace(&self) -> ModelWorkspace {
        ModelWorkspace {
            actor: self.actor.workspace(),
            critic: self.critic.workspace(),
        }
    }

    fn split(&self) -> (&[f64], &[f64], &[f64]) {
        let (actor, rest) = self.params.split_at(self.actor.num_params());
        let (log_std, critic) = rest.split_at(self.act_dim);
        (actor, log_std, critic)
    }

    pub fn log_std(&self) -> &[f64] {
        self.split().1
    }

    /// Mean action for `obs`, written into the workspace and returned.
    pub fn mean<'w>(&self, obs: &[f64], ws: &'w mut ModelWorkspace) -> &'w [f64] {
        let (actor, _, _) = self.split();
        self.actor.forward(actor, obs, &mut ws.actor);
        ws.actor.output()
    }

    pub fn value(&self, obs: &[f64], ws: &mut ModelWorkspace) -> f64 {
        let (_, _, critic) = self.split();
        self.critic.forward(critic, obs, &mut ws.critic);
        ws.critic.output()[0]
    }

    /// Samples an (unclipped) action. Returns `(action, log_prob, value)`.
    pub fn act<R: Rng + ?Sized>(&self, obs: &[f64], rng: &mut R, ws: &mut ModelWorkspace) -> (Vec<f64>, f64, f64) {
        let value = self.value(obs, ws);
        let mean = self.mean(obs, ws).to_vec();
        let action: Vec<f64> = mean
            .iter()
            .zip(self.log_std())
            .map(|(m, ls)| {
                let z: f64 = StandardNormal.sample(rng);
                m + ls.exp() * z
            })
            .collect();
        let logp = gaussian_log_prob(&mean, self.log_std(), &action);
        (action, logp, value)
    }

    /// Entropy of the action distribution (the same for every state).
    pub fn entropy(&self) -> f64 {
        self.log_std().iter().map(|ls| ls + 0.5 + HALF_LN_2PI).sum()
    }

    /// Range of the actor parameters in the flat vector.
    pub(crate) fn actor_range(&self) -> std::ops::Range<usize> {
        0..self.actor.num_params()
    }

    pub(crate) fn log_std_range(&self) -> std::ops::Range<usize> {
        let start = self.actor.num_params();
        start..start + self.act_dim
    }

    pub(crate) fn critic_range(&self) -> std::ops::Range<usize> {
        let start = self.actor.num_params() + self.act_dim;
        start..self.params.len()
    }

    pub(crate) fn actor_shape(&self) -> &MlpShape {
        &self.actor
    }

    pub(crate) fn critic_shape(&self) -> &MlpShape {
        &self.critic
    }
}

pub fn gaussian_log_prob(mean: &[f64], log_std: &[f64], action: &[f64]) -> f64 {
    mean.iter()
        .zip(log_std)
        .zip(action)
        .map(|((m, ls), a)| {
            let z = (a - m) / ls.exp();
            -0.5 * z * z - ls - HALF_LN_2PI
        })
        .sum()
}

/// Clamps each component to `[-1, 1]`, the environment's action box.
pub fn clip_action(action: &[f64]) -> [f64; 2] {
    [action[0].clamp(-1.0, 1.0), action[1].clamp(-1.0, 1.0)]
}
