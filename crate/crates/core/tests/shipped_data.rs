use std::collections::BTreeSet;
use std::path::PathBuf;

use reward_zero::bench::synthetic::{self, SYNTHETIC_MODEL_TAG};
use reward_zero::bench::{run_benchmark, BenchConfig};
use reward_zero::cache::{EmbeddingCache, EmbeddingKind};
use reward_zero::manifest::{read_manifest, Manifest};
use reward_zero::provider::CacheProvider;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn manifest(name: &str) -> Manifest {
    read_manifest(data(name)).unwrap()
}

fn provider() -> CacheProvider {
    let cache = EmbeddingCache::read(data("synthetic_cache.jsonl")).unwrap();
    CacheProvider::new(cache, SYNTHETIC_MODEL_TAG)
}

#[test]
fn shipped_files_match_the_generator() {
    for (name, expected) in synthetic::data_files() {
        let shipped = std::fs::read_to_string(data(name)).unwrap();
        assert!(shipped == expected, "{name} is stale; rerun the generate_data example");
    }
}

#[test]
fn benchmark_layout_counts() {
    for name in ["benchmark_manifest.json", "synthetic_manifest.json"] {
        let m = manifest(name);
        assert_eq!(m.episodes.len(), 6);
        assert_eq!(m.keyframe_count(), 24);
        assert_eq!(m.forward_transitions(), 18);
        let tasks: BTreeSet<_> = m.episodes.iter().map(|e| e.task_name.as_str()).collect();
        assert_eq!(tasks.len(), 5);
        // Unique frame refs plus unique goal texts.
        let mut ids: BTreeSet<String> = m.episodes.iter().flat_map(|e| e.frame_refs()).collect();
        ids.extend(m.episodes.iter().map(|e| e.goal_text.clone()));
        assert_eq!(ids.len(), 29);
    }
}

#[test]
fn cache_covers_the_synthetic_manifest() {
    let p = provider();
    let cache = p.cache();
    assert_eq!(cache.len(), 29);
    for ep in &manifest("synthetic_manifest.json").episodes {
        assert!(cache.contains(EmbeddingKind::Text, SYNTHETIC_MODEL_TAG, &ep.goal_text));
        for r in ep.frame_refs() {
            let v = cache.get(EmbeddingKind::Image, SYNTHETIC_MODEL_TAG, &r).unwrap();
            assert_eq!(v.dim(), 64);
            assert!(v.is_unit(1e-12));
        }
    }
}

#[test]
fn synthetic_benchmark_scores_perfectly() {
    let m = manifest("synthetic_manifest.json");
    let report = run_benchmark(&m.episodes, &provider(), &BenchConfig::default()).unwrap();
    assert_eq!(report.fta, (18, 18));
    assert_eq!(report.mono_episodes, (6, 6));
    assert_eq!(report.jump, (6, 6));
    assert_eq!(report.mean_spearman, 1.0);
    assert_eq!(report.mean_latency_ms, 0.0);
}

#[test]
fn reversed_benchmark_scores_zero() {
    let m = manifest("synthetic_reversed_manifest.json");
    let report = run_benchmark(&m.episodes, &provider(), &BenchConfig::default()).unwrap();
    assert_eq!(report.fta, (0, 18));
    assert_eq!(report.mono_episodes, (0, 6));
    assert_eq!(report.mean_spearman, -1.0);
}

#[test]
fn synthetic_potentials_follow_the_closed_form() {
    // Φ(c) = 0.7 sin θ − 0.3 cos θ with θ = c/100 · π/2.
    let m = manifest("synthetic_manifest.json");
    let report = run_benchmark(&m.episodes, &provider(), &BenchConfig::default()).unwrap();
    for ep in &report.per_episode {
        for (phi, pct) in ep.potentials.iter().zip([0.0f64, 33.0, 66.0, 100.0]) {
            let theta = pct / 100.0 * std::f64::consts::FRAC_PI_2;
            assert!((phi - (0.7 * theta.sin() - 0.3 * theta.cos())).abs() < 1e-12);
        }
    }
}
