use super::{BenchConfig, BenchError};
use crate::reward::completion_reward;

fn require_frames(n: usize) -> Result<(), BenchError> {
    if n < 2 {
        return Err(BenchError::TooFewFrames(n));
    }
    Ok(())
}

/// Counts consecutive pairs whose completion reward exceeds `epsilon`.
/// Returns `(hits, total)`.
pub fn forward_transition_accuracy(potentials: &[f64], cfg: &BenchConfig) -> Result<(usize, usize), BenchError> {
    require_frames(potentials.len())?;
    let hits = potentials
        .windows(2)
        .filter(|w| completion_reward(w[1], w[0], &cfg.reward).total > cfg.epsilon)
        .count();
    Ok((hits, potentials.len() - 1))
}

/// Fraction of strictly increasing consecutive pairs, and whether all are.
pub fn monotonicity(potentials: &[f64]) -> Result<(f64, bool), BenchError> {
    require_frames(potentials.len())?;
    let pairs = potentials.len() - 1;
    let up = potentials.windows(2).filter(|w| w[1] > w[0]).count();
    Ok((up as f64 / pairs as f64, up == pairs))
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub(crate) fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        // A constant sequence carries no rank information.
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// Spearman's ρ: Pearson correlation of average ranks.
pub fn spearman(completions: &[f64], potentials: &[f64]) -> Result<f64, BenchError> {
    if completions.len() != potentials.len() {
        return Err(BenchError::LengthMismatch {
            completions: completions.len(),
            potentials: potentials.len(),
        });
    }
    require_frames(potentials.len())?;
    Ok(pearson(&average_ranks(completions), &average_ranks(potentials)))
}

/// Whether the direct first → last transition is rewarded above `epsilon`.
pub fn jump_detection(phi_first: f64, phi_last: f64, cfg: &BenchConfig) -> bool {
    completion_reward(phi_last, phi_first, &cfg.reward).total > cfg.epsilon
}
