use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{BenchError, EpisodeResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub per_episode: Vec<EpisodeResult>,
    /// (positive transitions, transitions)
    pub fta: (usize, usize),
    /// (positive jumps, episodes)
    pub jump: (usize, usize),
    /// (fully monotone episodes, episodes)
    pub mono_episodes: (usize, usize),
    pub mean_spearman: f64,
    pub mean_latency_ms: f64,
}

pub fn aggregate(results: Vec<EpisodeResult>) -> Result<BenchmarkReport, BenchError> {
    if results.is_empty() {
        return Err(BenchError::EmptyResults);
    }
    let n = results.len();
    let hits = results.iter().map(|r| r.forward_hits).sum();
    let total = results.iter().map(|r| r.forward_total).sum();
    let jumps = results.iter().filter(|r| r.jump_positive).count();
    let mono = results.iter().filter(|r| r.monotone).count();
    let mean_spearman = results.iter().map(|r| r.spearman_rho).sum::<f64>() / n as f64;
    let mean_latency_ms = results.iter().map(|r| r.latency_per_frame_ms).sum::<f64>() / n as f64;
    Ok(BenchmarkReport {
        per_episode: results,
        fta: (hits, total),
        jump: (jumps, n),
        mono_episodes: (mono, n),
        mean_spearman,
        mean_latency_ms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Json,
    Md,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(Self::Table),
            "json" => Ok(Self::Json),
            "md" => Ok(Self::Md),
            other => Err(format!("unknown report format `{other}` (expected table, json or md)")),
        }
    }
}

fn frac((a, b): (usize, usize)) -> String {
    format!("{a}/{b}")
}

fn latency(ms: f64) -> String {
    format!("{ms:.1} ms")
}

#[derive(Serialize)]
struct LabeledReport<'a> {
    label: &'a str,
    report: &'a BenchmarkReport,
}

/// Renders one report. The JSON form is the report itself and parses back to
/// an identical value.
pub fn render_report(report: &BenchmarkReport, label: &str, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports always serialize");
            s.push('\n');
            s
        }
        _ => render_reports(&[(label.to_string(), report.clone())], format),
    }
}

/// Renders several labelled reports (one row per method or configuration).
pub fn render_reports(rows: &[(String, BenchmarkReport)], format: ReportFormat) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Json => {
            let labeled: Vec<_> = rows
                .iter()
                .map(|(label, report)| LabeledReport { label, report })
                .collect();
            out = serde_json::to_string_pretty(&labeled).expect("reports always serialize");
            out.push('\n');
        }
        ReportFormat::Md => {
            out.push_str("| Method | FTA | J+ | Mono | Spearman | Latency |\n");
            out.push_str("|---|---|---|---|---|---|\n");
            for (label, r) in rows {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {:.3} | {} |",
                    label,
                    frac(r.fta),
                    frac(r.jump),
                    frac(r.mono_episodes),
                    r.mean_spearman,
                    latency(r.mean_latency_ms)
                );
            }
        }
        ReportFormat::Table => {
            let width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max(6);
            let _ = writeln!(
                out,
                "{:<width$}  {:>7}  {:>5}  {:>5}  {:>8}  {:>10}",
                "Method", "FTA", "J+", "Mono", "Spearman", "Latency"
            );
            for (label, r) in rows {
                let _ = writeln!(
                    out,
                    "{:<width$}  {:>7}  {:>5}  {:>5}  {:>8.3}  {:>10}",
                    label,
                    frac(r.fta),
                    frac(r.jump),
                    frac(r.mono_episodes),
                    r.mean_spearman,
                    latency(r.mean_latency_ms)
                );
            }
            for (label, r) in rows {
                let _ = writeln!(out, "\n{label}: per episode");
                for e in &r.per_episode {
                    let phis: Vec<String> = e.potentials.iter().map(|p| format!("{p:+.4}")).collect();
                    let _ = writeln!(
                        out,
                        "  {:<20} FTA {:>5}  mono {:.2}  rho {:+.3}  J+ {:<3}  [{}]",
                        e.task_name,
                        frac((e.forward_hits, e.forward_total)),
                        e.mono_fraction,
                        e.spearman_rho,
                        if e.jump_positive { "yes" } else { "no" },
                        phis.join(", ")
                    );
                }
            }
        }
    }
    out
}
