use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use reward_zero::bench::{render_report, run_benchmark, BenchConfig, ReportFormat};
use reward_zero::cache::{EmbeddingCache, EmbeddingCacheEntry, EmbeddingKind};
use reward_zero::http::{HttpProvider, HttpProviderConfig};
use reward_zero::manifest::{read_manifest, Manifest};
use reward_zero::provider::{CacheProvider, EmbeddingProvider};
use reward_zero::{BaseMode, PotentialConfig};
use reward_zero_rl::{
    ablation_run, AblationParam, Combination, PpoConfig, ReachEnvConfig, RewardSetting, ShapingConfig, TrainConfig,
    TrainingLog,
};

use crate::{
    AblateArgs, BaseModeArg, BenchCommand, BenchRunArgs, CliError, CombinationArg, Command, EmbedCacheArgs, EnvArg,
    FormatArg, ModeArg, ParamArg, ProviderKind, RewardArg, RunArgs, TrainArgs,
};

pub fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Bench(BenchCommand::Run(args)) => bench_run(&args, out),
        Command::EmbedCache(args) => embed_cache(&args, out),
        Command::Train(args) => train(&args, out),
        Command::Ablate(args) => ablate(&args, out, err),
    }
}

fn manifest_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn bench_config(args: &BenchRunArgs) -> Result<BenchConfig, CliError> {
    let defaults = BenchConfig::default();
    let potential = match args.mode {
        ModeArg::Clip => PotentialConfig::clip_direct(args.alpha)?,
        ModeArg::Caption => PotentialConfig::caption_direct(),
    };
    let mut reward = defaults.reward.with_beta(args.beta);
    reward.base_mode = match args.base_mode {
        BaseModeArg::Difference => BaseMode::PotentialDifference,
        BaseModeArg::Value => BaseMode::PotentialValue,
    };
    let cfg = BenchConfig {
        epsilon: args.epsilon,
        potential,
        reward,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn http_provider(endpoint: &str, model_tag: Option<&str>, image_root: PathBuf) -> Result<HttpProvider, CliError> {
    let probe = HttpProvider::new(HttpProviderConfig::new(endpoint, model_tag.unwrap_or_default()));
    let tag = match model_tag {
        Some(tag) => tag.to_string(),
        None => probe.health()?.model,
    };
    let mut cfg = HttpProviderConfig::new(endpoint, tag);
    cfg.image_root = Some(image_root);
    let provider = HttpProvider::new(cfg);
    provider.ensure_healthy()?;
    Ok(provider)
}

fn bench_provider(args: &BenchRunArgs) -> Result<Box<dyn EmbeddingProvider>, CliError> {
    match args.provider {
        ProviderKind::Cache => {
            let path = args
                .cache
                .as_ref()
                .ok_or_else(|| CliError::usage("--provider cache needs --cache <FILE>"))?;
            let cache = EmbeddingCache::read(path)?;
            let provider = match &args.model_tag {
                Some(tag) => CacheProvider::new(cache, tag.clone()),
                None => CacheProvider::single_model(cache).ok_or_else(|| {
                    CliError::usage(format!(
                        "{} is empty or holds several models; pass --model-tag",
                        path.display()
                    ))
                })?,
            };
            Ok(Box::new(provider))
        }
        ProviderKind::Http => {
            let endpoint = args
                .endpoint
                .as_deref()
                .ok_or_else(|| CliError::usage(format!("--provider http needs --endpoint or {}", crate::ENDPOINT_ENV)))?;
            let root = args.image_root.clone().unwrap_or_else(|| manifest_dir(&args.manifest));
            Ok(Box::new(http_provider(endpoint, args.model_tag.as_deref(), root)?))
        }
    }
}

fn bench_run(args: &BenchRunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = bench_config(args)?;
    let manifest = read_manifest(&args.manifest)?;
    let provider = bench_provider(args)?;
    let report = run_benchmark(&manifest.episodes, provider.as_ref(), &cfg)?;
    if let Some(path) = &args.out {
        std::fs::write(path, render_report(&report, "", ReportFormat::Json))?;
    }
    let format = match args.format {
        FormatArg::Table => ReportFormat::Table,
        FormatArg::Json => ReportFormat::Json,
        FormatArg::Md => ReportFormat::Md,
    };
    let label = match args.mode {
        ModeArg::Clip => "clip-direct",
        ModeArg::Caption => "caption-direct",
    };
    write!(out, "{}", render_report(&report, label, format))?;
    Ok(())
}

/// Ids a manifest needs, deduplicated in first-seen order.
pub fn manifest_ids(manifest: &Manifest) -> (Vec<String>, Vec<String>) {
    let (mut texts, mut frames) = (Vec::new(), Vec::new());
    for ep in &manifest.episodes {
        if !texts.contains(&ep.goal_text) {
            texts.push(ep.goal_text.clone());
        }
        for r in ep.frame_refs() {
            if !frames.contains(&r) {
                frames.push(r);
            }
        }
    }
    (texts, frames)
}

fn embed_cache(args: &EmbedCacheArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let manifest = read_manifest(&args.manifest)?;
    let mut cache = if args.out.exists() {
        EmbeddingCache::read(&args.out)?
    } else {
        EmbeddingCache::new()
    };
    let root = args.image_root.clone().unwrap_or_else(|| manifest_dir(&args.manifest));
    let provider = http_provider(&args.endpoint, Some(&args.model_tag), root)?;
    let dim = provider.health()?.dim;

    let (texts, frames) = manifest_ids(&manifest);
    let missing = |kind, ids: Vec<String>| -> Vec<String> {
        ids.into_iter()
            .filter(|id| !cache.contains(kind, &args.model_tag, id))
            .collect()
    };
    let (texts, frames) = (missing(EmbeddingKind::Text, texts), missing(EmbeddingKind::Image, frames));
    let before = cache.len();
    for (kind, ids) in [(EmbeddingKind::Text, texts), (EmbeddingKind::Image, frames)] {
        if ids.is_empty() {
            continue;
        }
        let vectors = match kind {
            EmbeddingKind::Text => provider.embed_text(&ids)?,
            EmbeddingKind::Image => provider.embed_image(&ids)?,
        };
        for (id, v) in ids.into_iter().zip(vectors) {
            if v.dim() != dim {
                return Err(CliError::io(format!(
                    "service advertises dim {dim} but returned {} for `{id}`",
                    v.dim()
                )));
            }
            cache.insert(EmbeddingCacheEntry::new(id, kind, &args.model_tag, v)?)?;
        }
    }
    let added = cache.len() - before;
    if added > 0 || !args.out.exists() {
        cache.write(&args.out)?;
    }
    writeln!(out, "{added} embedded, {before} already cached, {} total", cache.len())?;
    Ok(())
}

fn train_config(run: &RunArgs, reward: RewardArg) -> Result<TrainConfig, CliError> {
    let mut shaping = ShapingConfig::default();
    shaping.reward = shaping.reward.with_beta(run.beta).with_interval(run.interval);
    shaping.combination = match run.combination {
        CombinationArg::Additive => Combination::Additive,
        CombinationArg::Replace => Combination::Replace,
    };
    let cfg = TrainConfig {
        env: match run.env {
            EnvArg::Reach => ReachEnvConfig::default(),
            EnvArg::ReachFar => ReachEnvConfig::far_start(),
        },
        ppo: PpoConfig {
            total_steps: run.total_steps,
            ..PpoConfig::default()
        },
        reward: match reward {
            RewardArg::Sparse => RewardSetting::Sparse,
            RewardArg::Zero => RewardSetting::Zero(shaping),
        },
        seed: run.seed,
        ..TrainConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Creates the log file up front so a bad path fails before training.
fn open_log(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", path.display())))
}

fn summarize(out: &mut dyn Write, label: &str, log: &TrainingLog) -> Result<(), CliError> {
    if let (Some(m), Some(e)) = (log.metrics.last(), log.final_eval()) {
        writeln!(
            out,
            "{label}: {} steps, success_once {:.3}, success_at_end {:.3}, eval return {:.2}",
            m.step, e.success_once, e.success_at_end, e.mean_return
        )?;
    }
    Ok(())
}

fn train(args: &TrainArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = train_config(&args.run, args.reward)?;
    let file = open_log(&args.run.log)?;
    let log = reward_zero_rl::train(&cfg)?;
    log.write_csv(file)?;
    summarize(out, &args.run.log.display().to_string(), &log)
}

/// `runs/log.csv` with `beta = 0.05` becomes `runs/log_beta0.05.csv`.
pub fn ablation_log_path(base: &Path, param: &str, value: f64) -> PathBuf {
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}_{param}{value}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{param}{value}"),
    };
    base.with_file_name(name)
}

fn ablate(args: &AblateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    if args.values.is_empty() {
        return Err(CliError::usage("--values needs at least one value"));
    }
    let base = train_config(&args.run, RewardArg::Zero)?;
    let param = match args.param {
        ParamArg::Beta => AblationParam::Beta,
        ParamArg::Interval => AblationParam::Interval,
    };
    for &v in &args.values {
        reward_zero_rl::ablation::ablation_config(&base, param, v)?;
    }
    let paths: Vec<PathBuf> = args
        .values
        .iter()
        .map(|&v| ablation_log_path(&args.run.log, &param.to_string(), v))
        .collect();
    let files = paths.iter().map(|p| open_log(p)).collect::<Result<Vec<_>, _>>()?;
    let runs = ablation_run(&base, param, &args.values)?;
    for ((run, file), path) in runs.iter().zip(files).zip(&paths) {
        run.log.write_csv(file)?;
        summarize(out, &format!("{param}={}", run.value), &run.log)?;
        writeln!(err, "wrote {}", path.display())?;
    }
    Ok(())
}
