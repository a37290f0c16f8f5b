//! Interval-cached reward evaluation for online shaping.
//!
//! Potentials are expensive to compute (an encoder call per evaluation), so
//! the tracker only consumes a fresh potential on steps where
//! `env_step % invocation_interval == 0`. On the steps in between it emits a
//! zero reward and carries the cached potential and activation for
//! diagnostics.

use crate::reward::{completion_reward, RewardBreakdown, RewardConfig, RewardError};

/// One tracker per environment instance; it is never shared between envs.
#[derive(Debug, Clone)]
pub struct RewardTracker {
    cfg: RewardConfig,
    cached_phi: f64,
    last: RewardBreakdown,
    evaluations: u64,
}

impl RewardTracker {
    /// Starts an episode whose first potential is `phi_0`.
    pub fn new(cfg: RewardConfig, phi_0: f64) -> Result<Self, RewardError> {
        cfg.validate()?;
        let last = completion_reward(phi_0, phi_0, &cfg);
        Ok(Self {
            cfg,
            cached_phi: phi_0,
            last,
            evaluations: 0,
        })
    }

    pub fn config(&self) -> &RewardConfig {
        &self.cfg
    }

    pub fn reset(&mut self, phi_0: f64) {
        self.cached_phi = phi_0;
        self.last = completion_reward(phi_0, phi_0, &self.cfg);
        self.evaluations = 0;
    }

    pub fn is_recompute_step(&self, env_step: u64) -> bool {
        env_step % self.cfg.invocation_interval == 0
    }

    pub fn cached_phi(&self) -> f64 {
        self.cached_phi
    }

    /// Potentials consumed since the last reset.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// Advances the tracker by one environment step.
    ///
    /// `phi` is required on recomputation steps and ignored otherwise.
    pub fn step(&mut self, phi: Option<f64>, env_step: u64) -> Result<RewardBreakdown, RewardError> {
        if !self.is_recompute_step(env_step) {
            return Ok(RewardBreakdown {
                base: 0.0,
                progress: 0.0,
                total: 0.0,
                bonus_weight: 0.0,
                ..self.last
            });
        }
        let phi = phi.ok_or(RewardError::MissingPotential { step: env_step })?;
        let breakdown = completion_reward(phi, self.cached_phi, &self.cfg);
        self.cached_phi = phi;
        self.last = breakdown;
        self.evaluations += 1;
        Ok(breakdown)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reward::BaseMode;
    use proptest::prelude::*;

    fn cfg(interval: u64) -> RewardConfig {
        RewardConfig::default().with_interval(interval)
    }

    #[test]
    fn consumes_only_on_interval_steps() {
        let mut t = RewardTracker::new(cfg(25), 0.1).unwrap();
        let mut consumed = Vec::new();
        for step in 0..50u64 {
            let phi = if t.is_recompute_step(step) {
                consumed.push(step);
                Some(0.1 + step as f64 * 0.01)
            } else {
                None
            };
            t.step(phi, step).unwrap();
        }
        assert_eq!(consumed, vec![0, 25]);
        assert_eq!(t.evaluations(), 2);
    }

    #[test]
    fn first_step_has_no_progress() {
        let mut t = RewardTracker::new(cfg(25), 0.42).unwrap();
        let r = t.step(Some(0.42), 0).unwrap();
        assert_eq!(r.progress, 0.0);
        assert_eq!(r.base, 0.0);
    }

    #[test]
    fn missing_potential_is_an_error() {
        let mut t = RewardTracker::new(cfg(5), 0.0).unwrap();
        assert_eq!(t.step(None, 10), Err(RewardError::MissingPotential { step: 10 }));
        assert!(t.step(None, 11).is_ok());
    }

    #[test]
    fn held_steps_emit_nothing() {
        let mut t = RewardTracker::new(cfg(3), 0.2).unwrap();
        t.step(Some(0.2), 0).unwrap();
        let held = t.step(Some(0.9), 1).unwrap();
        assert_eq!(held.total, 0.0);
        assert_eq!(held.base, 0.0);
        assert_eq!(held.phi, 0.2);
        assert_eq!(t.cached_phi(), 0.2);
        let r = t.step(Some(0.5), 3).unwrap();
        assert!((r.base - 0.3).abs() < 1e-12);
    }

    #[test]
    fn invalid_config_rejected() {
        assert!(RewardTracker::new(cfg(0), 0.0).is_err());
    }

    proptest! {
        #[test]
        fn interval_one_matches_direct_evaluation(
            phis in prop::collection::vec(-1.0f64..1.0, 1..40),
            beta in 0.0f64..1.0,
            value_mode in any::<bool>(),
        ) {
            let mut c = cfg(1).with_beta(beta);
            if value_mode {
                c.base_mode = BaseMode::PotentialValue;
            }
            let mut t = RewardTracker::new(c, phis[0]).unwrap();
            let mut prev = phis[0];
            for (step, &phi) in phis.iter().enumerate() {
                let tracked = t.step(Some(phi), step as u64).unwrap();
                let direct = completion_reward(phi, prev, &c);
                prop_assert_eq!(tracked, direct);
                prev = phi;
            }
        }

        #[test]
        fn held_breakdowns_stay_consistent(
            phis in prop::collection::vec(-1.0f64..1.0, 1..60),
            interval in 1u64..10,
        ) {
            let mut t = RewardTracker::new(cfg(interval).with_beta(0.3), phis[0]).unwrap();
            for (step, &phi) in phis.iter().enumerate() {
                let r = t.step(Some(phi), step as u64).unwrap();
                let rebuilt = r.base + r.bonus_weight * r.activation * (1.0 + r.progress);
                prop_assert!((r.total - rebuilt).abs() < 1e-9);
                prop_assert!(r.progress >= 0.0);
            }
        }
    }
}
