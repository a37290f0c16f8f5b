//! Generalized advantage estimation.

/// Advantages and returns for one environment's rollout segment.
///
/// `dones[t]` marks that the episode ended at step `t`, so step `t + 1`
/// belongs to a fresh episode and is not bootstrapped from. `bootstrap` is
/// the value of the observation following the last step; it is ignored when
/// the last step ended an episode. Truncated episodes should fold
/// `γ·V(s_final)` into their last reward and be marked done.
///
/// Returns `(advantages, returns)` with `returns = advantages + values`.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap: f64,
    gamma: f64,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    assert!(values.len() == n && dones.len() == n, "rollout columns must have equal length");
    let mut advantages = vec![0.0; n];
    let mut running = 0.0;
    for t in (0..n).rev() {
        let (next_value, carry) = if dones[t] {
            (0.0, 0.0)
        } else if t + 1 == n {
            (bootstrap, 0.0)
        } else {
            (values[t + 1], running)
        };
        let delta = rewards[t] + gamma * next_value - values[t];
        running = delta + gamma * lambda * carry;
        advantages[t] = running;
    }
    let returns = advantages.iter().zip(values).map(|(a, v)| a + v).collect();
    (advantages, returns)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_monte_carlo() {
        let r = [1.0, 0.0, 2.0, 0.5];
        let v = [0.3, -0.2, 0.7, 0.1];
        let (adv, ret) = compute_gae(&r, &v, &[false, false, false, true], 99.0, 1.0, 1.0);
        let remaining = [3.5, 2.5, 2.5, 0.5];
        for t in 0..4 {
            assert!((adv[t] - (remaining[t] - v[t])).abs() < 1e-12);
            assert!((ret[t] - remaining[t]).abs() < 1e-12);
        }
    }

    #[test]
    fn lambda_zero_is_one_step_td() {
        let r = [0.5, -1.0, 0.25];
        let v = [0.1, 0.4, -0.3];
        let (adv, _) = compute_gae(&r, &v, &[false; 3], 0.8, 0.9, 0.0);
        let next = [0.4, -0.3, 0.8];
        for t in 0..3 {
            assert!((adv[t] - (r[t] + 0.9 * next[t] - v[t])).abs() < 1e-12);
        }
    }

    #[test]
    fn zeros_in_zeros_out() {
        let (adv, ret) = compute_gae(&[0.0; 5], &[0.0; 5], &[false, true, false, false, true], 0.0, 0.99, 0.95);
        assert!(adv.iter().chain(&ret).all(|&x| x == 0.0));
    }

    #[test]
    fn episode_boundary_blocks_bootstrap() {
        let (adv, _) = compute_gae(&[1.0, 0.0], &[0.0, 10.0], &[true, false], 5.0, 0.5, 1.0);
        assert_eq!(adv[0], 1.0);
        assert_eq!(adv[1], 0.5 * 5.0 - 10.0);
    }
}
