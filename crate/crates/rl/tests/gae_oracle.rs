//! GAE against the explicit discounted sum of TD errors.

use proptest::prelude::*;
use reward_zero_rl::compute_gae;

/// `A_t = Σ_l (γλ)^l δ_{t+l}`, truncated at the first episode end.
fn oracle(rewards: &[f64], values: &[f64], dones: &[bool], bootstrap: f64, gamma: f64, lambda: f64) -> Vec<f64> {
    let n = rewards.len();
    let next_value = |t: usize| if t + 1 < n { values[t + 1] } else { bootstrap };
    let delta: Vec<f64> = (0..n)
        .map(|t| {
            let alive = if dones[t] { 0.0 } else { 1.0 };
            rewards[t] + gamma * next_value(t) * alive - values[t]
        })
        .collect();
    (0..n)
        .map(|t| {
            let mut sum = 0.0;
            let mut weight = 1.0;
            for l in t..n {
                sum += weight * delta[l];
                if dones[l] {
                    break;
                }
                weight *= gamma * lambda;
            }
            sum
        })
        .collect()
}

fn rollout() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<bool>)> {
    (1usize..=16).prop_flat_map(|n| {
        (
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(prop::bool::weighted(0.2), n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn matches_explicit_sum(
        (rewards, values, dones) in rollout(),
        bootstrap in -5.0f64..5.0,
        gamma in 0.5f64..1.0,
        lambda in 0.0f64..=1.0,
    ) {
        let (adv, ret) = compute_gae(&rewards, &values, &dones, bootstrap, gamma, lambda);
        let expected = oracle(&rewards, &values, &dones, bootstrap, gamma, lambda);
        for t in 0..rewards.len() {
            prop_assert!((adv[t] - expected[t]).abs() <= 1e-9, "t={} {} vs {}", t, adv[t], expected[t]);
            prop_assert!((ret[t] - (expected[t] + values[t])).abs() <= 1e-9);
        }
    }
}
