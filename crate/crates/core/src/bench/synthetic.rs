//! A synthetic benchmark with analytically known potentials.
//!
//! Six episodes mirror the real benchmark layout (five tasks, the drawer task
//! twice, keyframes at 0/33/66/100%). Each goal gets a random unit vector
//! `g`; each episode a random unit vector `u ⟂ g`. The frame at completion
//! `c` is `cos θ · u + sin θ · g` with `θ = c/100 · π/2`, so with the default
//! weighting the image/text potential is `0.7 sin θ − 0.3 cos θ`, strictly
//! increasing in completion. Reversing the frame order turns it into a
//! strictly decreasing sequence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cache::{encode_line, EmbeddingCacheEntry, EmbeddingKind};
use crate::embedding::EmbeddingVector;
use crate::manifest::{Episode, Keyframe, Manifest};

pub const SYNTHETIC_MODEL_TAG: &str = "synthetic-joint-64";
pub const SYNTHETIC_DIM: usize = 64;
pub const SYNTHETIC_SEED: u64 = 20_251_015;
pub const COMPLETIONS: [u32; 4] = [0, 33, 66, 100];

/// `(task_name, episode slug, end-state goal)` in benchmark order.
pub const TASKS: [(&str, &str, &str); 6] = [
    ("OpenCabinetDrawer", "open_cabinet_drawer_a", "The cabinet drawer is fully open"),
    ("OpenCabinetDrawer", "open_cabinet_drawer_b", "The cabinet drawer is fully open"),
    ("AnymalC-Reach", "anymal_c_reach", "The quadruped robot is at the target position"),
    ("PushCube", "push_cube", "The cube is at the target position"),
    ("PegInsertionSide", "peg_insertion_side", "The peg is fully inserted into the hole"),
    ("StackCube", "stack_cube", "The red cube is stacked on the green cube"),
];

/// Benchmark episodes whose frame references come from `frame_ref(slug, pct)`.
pub fn benchmark_layout(frame_ref: impl Fn(&str, u32) -> String) -> Manifest {
    let episodes = TASKS
        .iter()
        .map(|&(task, slug, goal)| Episode {
            task_name: task.to_string(),
            goal_text: goal.to_string(),
            keyframes: COMPLETIONS
                .iter()
                .map(|&pct| Keyframe {
                    frame_ref: frame_ref(slug, pct),
                    completion_pct: pct,
                })
                .collect(),
        })
        .collect();
    Manifest::new(episodes)
}

/// Layout for real rendered keyframes (`frames/<slug>/<pct>.png`).
pub fn image_manifest() -> Manifest {
    benchmark_layout(|slug, pct| format!("frames/{slug}/{pct:03}.png"))
}

pub fn synthetic_frame_ref(slug: &str, pct: u32) -> String {
    format!("synthetic/{slug}/{pct:03}")
}

pub struct SyntheticBenchmark {
    pub manifest: Manifest,
    pub entries: Vec<EmbeddingCacheEntry>,
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

fn unit(values: Vec<f64>) -> EmbeddingVector {
    EmbeddingVector::unit(values).expect("gaussian draws are nonzero")
}

pub fn monotone_benchmark(dim: usize, seed: u64, model_tag: &str) -> SyntheticBenchmark {
    assert!(dim >= 2, "synthetic embeddings need at least two dimensions");
    let manifest = benchmark_layout(synthetic_frame_ref);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut goals: Vec<(String, EmbeddingVector)> = Vec::new();
    let mut entries = Vec::new();
    let mk = |id: &str, kind, v| EmbeddingCacheEntry::new(id, kind, model_tag, v).expect("unit vectors are valid");

    for ep in &manifest.episodes {
        let goal = match goals.iter().find(|(text, _)| *text == ep.goal_text) {
            Some((_, g)) => g.clone(),
            None => {
                let g = unit(gaussian(&mut rng, dim));
                goals.push((ep.goal_text.clone(), g.clone()));
                entries.push(mk(&ep.goal_text, EmbeddingKind::Text, g.clone()));
                g
            }
        };
        let raw = gaussian(&mut rng, dim);
        let along: f64 = raw.iter().zip(goal.values()).map(|(a, b)| a * b).sum();
        let ortho = unit(raw.iter().zip(goal.values()).map(|(a, b)| a - along * b).collect());
        for kf in &ep.keyframes {
            let theta = f64::from(kf.completion_pct) / 100.0 * std::f64::consts::FRAC_PI_2;
            let (s, c) = theta.sin_cos();
            let v = unit(
                ortho
                    .values()
                    .iter()
                    .zip(goal.values())
                    .map(|(u, g)| c * u + s * g)
                    .collect(),
            );
            entries.push(mk(&kf.frame_ref, EmbeddingKind::Image, v));
        }
    }
    SyntheticBenchmark { manifest, entries }
}

/// Same annotations, frames in reverse order.
pub fn reversed(manifest: &Manifest) -> Manifest {
    let episodes = manifest
        .episodes
        .iter()
        .map(|ep| {
            let refs: Vec<String> = ep.keyframes.iter().rev().map(|k| k.frame_ref.clone()).collect();
            Episode {
                keyframes: ep
                    .keyframes
                    .iter()
                    .zip(refs)
                    .map(|(k, frame_ref)| Keyframe {
                        frame_ref,
                        completion_pct: k.completion_pct,
                    })
                    .collect(),
                ..ep.clone()
            }
        })
        .collect();
    Manifest::new(episodes)
}

/// Name and contents of each file shipped in `data/`, in a fixed order.
/// The cache holds the synthetic benchmark's embeddings under
/// [`SYNTHETIC_MODEL_TAG`].
pub fn data_files() -> Vec<(&'static str, String)> {
    let bench = monotone_benchmark(SYNTHETIC_DIM, SYNTHETIC_SEED, SYNTHETIC_MODEL_TAG);
    let json = |m: &Manifest| m.to_json().expect("generated manifests are valid");
    let cache: String = bench.entries.iter().map(|e| encode_line(e) + "\n").collect();
    vec![
        ("benchmark_manifest.json", json(&image_manifest())),
        ("synthetic_manifest.json", json(&bench.manifest)),
        ("synthetic_reversed_manifest.json", json(&reversed(&bench.manifest))),
        ("synthetic_cache.jsonl", cache),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn layout_counts() {
        let m = image_manifest();
        m.validate().unwrap();
        assert_eq!(m.episodes.len(), 6);
        assert_eq!(m.keyframe_count(), 24);
        assert_eq!(m.forward_transitions(), 18);
    }

    #[test]
    fn one_entry_per_unique_frame_and_goal() {
        let b = monotone_benchmark(16, 1, "m");
        let ids: BTreeSet<(EmbeddingKind, String)> = b
            .manifest
            .episodes
            .iter()
            .flat_map(|ep| {
                ep.keyframes
                    .iter()
                    .map(|k| (EmbeddingKind::Image, k.frame_ref.clone()))
                    .chain([(EmbeddingKind::Text, ep.goal_text.clone())])
            })
            .collect();
        assert_eq!(ids.len(), 29);
        assert_eq!(b.entries.len(), ids.len());
    }

    #[test]
    fn deterministic_per_seed() {
        let a = monotone_benchmark(8, 3, "m");
        let b = monotone_benchmark(8, 3, "m");
        assert_eq!(a.entries, b.entries);
        assert_ne!(a.entries, monotone_benchmark(8, 4, "m").entries);
    }

    #[test]
    fn reversal_keeps_annotations() {
        let m = image_manifest();
        let r = reversed(&m);
        r.validate().unwrap();
        assert_eq!(r.episodes[0].keyframes[0].frame_ref, m.episodes[0].keyframes[3].frame_ref);
        assert_eq!(r.episodes[0].completions(), m.episodes[0].completions());
        assert_eq!(reversed(&r), m);
    }
}
