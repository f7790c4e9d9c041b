//! Command-line interface wiring the pipeline stages into per-stage and
//! end-to-end flows.
//!
//! Exit codes: 0 on success, 1 when some episodes failed, 2 on usage or
//! input errors.

pub mod config;
pub mod eval;
pub mod run;

use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};

use screenwright_core::ingest::{load_episode, validate_alignment};
use screenwright_core::metrics::aggregate;
use screenwright_core::{EvaluationReport, Stage};

use config::PipelineConfig;
use eval::{evaluate_summary, load_human_characters, EvalInputs, EvalWhich};
use run::{run_episodes, Pipeline};

#[derive(Debug, Parser)]
#[command(
    name = "screenwright",
    version,
    about = "Screenplay-based episode summarization and multimodal summary evaluation"
)]
pub struct Cli {
    /// Pipeline config file (JSON). Commands that call model backends
    /// require one.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Run identifier; artifacts live under `<output_dir>/<run-id>/`.
    #[arg(long, global = true, default_value = "default")]
    pub run_id: String,
    /// Override the config's artifact output directory.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Episode-level parallelism for `pipeline`.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    /// Print media-slicer argument vectors instead of executing them.
    #[arg(long, global = true)]
    pub dry_run: bool,
    /// Seed override for the random baseline.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Validate episode manifests and print alignment diagnostics.
    Ingest {
        #[arg(required = true)]
        episodes: Vec<PathBuf>,
    },
    /// Select dialogue-pause clips.
    Clips { episode: PathBuf },
    /// Build (and execute) media-slicer commands for the selected clips.
    Slice { episode: PathBuf },
    /// Caption the selected clips.
    Caption { episode: PathBuf },
    /// Assemble and render the screenplay document.
    Screenplay { episode: PathBuf },
    /// Summarize the screenplay.
    Summarize { episode: PathBuf },
    /// Score a candidate summary against the episode references.
    Eval {
        episode: PathBuf,
        /// Text file holding the candidate summary.
        #[arg(long)]
        candidate: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        which: EvalWhich,
        /// Per-clip human character annotations (JSON) for IoU scoring.
        #[arg(long)]
        human_characters: Option<PathBuf>,
    },
    /// Seeded random clip selection matched on the main selection's count
    /// and total duration.
    RandomBaseline { episode: PathBuf },
    /// Run the full pipeline: ingest, clips, slice, caption, screenplay,
    /// summarize, evaluate.
    Pipeline {
        #[arg(required = true)]
        episodes: Vec<PathBuf>,
    },
    /// Aggregate stored evaluation reports for a run.
    Report,
}

/// Entry point; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            2
        }
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(out_dir) = &cli.out_dir {
        cfg.output_dir = out_dir.clone();
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<i32> {
    let cfg = load_config(&cli)?;
    match &cli.command {
        Cmd::Ingest { episodes } => {
            let pipeline = Pipeline::new(cfg, &cli.run_id, cli.dry_run)?;
            let mut failed = 0usize;
            for manifest in episodes {
                match pipeline.stage_episode(manifest) {
                    Ok(ep) => {
                        let diags = validate_alignment(&ep);
                        println!(
                            "{}: {} utterances, {:.1} s, {} diagnostics",
                            ep.id,
                            ep.utterances.len(),
                            ep.duration_s,
                            diags.len()
                        );
                        for d in diags {
                            println!("  [{:?}] {}", d.kind, d.message);
                        }
                    }
                    Err(err) => {
                        eprintln!("{}: {err:#}", manifest.display());
                        failed += 1;
                    }
                }
            }
            Ok(if failed == 0 { 0 } else { 1 })
        }
        Cmd::Clips { episode } => {
            let pipeline = Pipeline::new(cfg, &cli.run_id, cli.dry_run)?;
            let ep = pipeline.stage_episode(episode)?;
            let clips = pipeline.stage_clips(&ep)?;
            let covered = screenwright_core::clips::coverage(&clips, ep.duration_s);
            println!("{}", serde_json::to_string_pretty(&clips)?);
            eprintln!(
                "{} clips, coverage {:.1}% of {:.1} s",
                clips.len(),
                covered * 100.0,
                ep.duration_s
            );
            Ok(0)
        }
        Cmd::Slice { episode } => {
            let pipeline = Pipeline::new(cfg, &cli.run_id, cli.dry_run)?;
            let ep = pipeline.stage_episode(episode)?;
            let clips = pipeline.stage_clips(&ep)?;
            let mut warnings = Vec::new();
            let commands = pipeline.stage_slice(&ep, &clips, true, &mut warnings)?;
            if !pipeline.dry_run {
                println!("{}", serde_json::to_string_pretty(&commands)?);
            }
            Ok(0)
        }
        Cmd::Caption { episode } => {
            let pipeline = Pipeline::new(cfg, &cli.run_id, cli.dry_run)?;
            let outcome = pipeline.run_episode(episode, Stage::Captions)?;
            for warning in &outcome.warnings {
                eprintln!("warning: {warning}");
            }
            let captions = pipeline.store.get(Stage::Captions, &outcome.episode_id)?;
            let count = String::from_utf8_lossy(&captions).lines().count();
            println!("captioned {count} clips for {}", outcome.episode_id);
            Ok(0)
        }
        Cmd::Screenplay { episode } => {
            let pipeline = Pipeline::new(cfg, &cli.run_id, cli.dry_run)?;
            let outcome = pipeline.run_episode(episode, Stage::Screenplay)?;
            let document = pipeline.store.get(Stage::Screenplay, &outcome.episode_id)?;
            println!("{}", String::from_utf8_lossy(&document));
            Ok(0)
        }
        Cmd::Summarize { episode } => {
            let pipeline = Pipeline::new(cfg, &cli.run_id, cli.dry_run)?;
            let outcome = pipeline.run_episode(episode, Stage::Summary)?;
            let summary = pipeline.store.get(Stage::Summary, &outcome.episode_id)?;
            println!("{}", String::from_utf8_lossy(&summary));
            Ok(0)
        }
        Cmd::Eval {
            episode,
            candidate,
            which,
            human_characters,
        } => {
            let judge = cfg
                .judge
                .as_ref()
                .map(screenwright_core::model::config::build_client)
                .transpose()
                .context("judge backend")?;
            let ep = load_episode(episode)?;
            let candidate_text = std::fs::read_to_string(candidate)
                .with_context(|| format!("failed to read candidate {}", candidate.display()))?;
            if candidate_text.trim().is_empty() {
                return Err(anyhow!("candidate summary {} is empty", candidate.display()));
            }
            let human = human_characters
                .as_ref()
                .map(|p| load_human_characters(p))
                .transpose()?;
            let out = evaluate_summary(EvalInputs {
                episode: &ep,
                candidate_text: &candidate_text,
                summary_style: None,
                judge: judge.as_ref(),
                which: *which,
                reference_filter: cfg.reference_filter.as_deref(),
                captions: None,
                human_characters: human.as_deref(),
                strict: true,
            })?;
            for warning in &out.warnings {
                eprintln!("warning: {warning}");
            }
            println!("{}", out.report.to_json_pretty());
            Ok(0)
        }
        Cmd::RandomBaseline { episode } => {
            let seed = cli.seed.unwrap_or(cfg.seed);
            let pipeline = Pipeline::new(cfg, &cli.run_id, cli.dry_run)?;
            let ep = pipeline.stage_episode(episode)?;
            let baseline = pipeline.stage_random_baseline(&ep, seed)?;
            println!("{}", serde_json::to_string_pretty(&baseline)?);
            Ok(0)
        }
        Cmd::Pipeline { episodes } => {
            let pipeline = Pipeline::new(cfg, &cli.run_id, cli.dry_run)?;
            let (outcomes, failures) = run_episodes(&pipeline, episodes, Stage::Report, cli.workers);
            for outcome in &outcomes {
                for warning in &outcome.warnings {
                    eprintln!("warning: {warning}");
                }
                if let Some(report) = &outcome.report {
                    println!("{}: {}", outcome.episode_id, report_line(report));
                } else {
                    println!("{}: done", outcome.episode_id);
                }
            }
            for (manifest, err) in &failures {
                eprintln!("failed {}: {err}", manifest.display());
            }
            eprintln!(
                "pipeline finished: {} ok, {} failed, {} backend calls, ${:.4} total cost",
                outcomes.len(),
                failures.len(),
                pipeline.backend_calls(),
                [&pipeline.captioner, &pipeline.summarizer, &pipeline.judge]
                    .into_iter()
                    .flatten()
                    .map(screenwright_core::ModelClient::total_cost_usd)
                    .sum::<f64>()
            );
            Ok(if failures.is_empty() { 0 } else { 1 })
        }
        Cmd::Report => {
            let pipeline = Pipeline::new(cfg, &cli.run_id, cli.dry_run)?;
            let manifest = pipeline.store.manifest_snapshot();
            let mut reports = Vec::new();
            for episode_id in manifest.episodes.keys() {
                if pipeline.store.has(Stage::Report, episode_id) {
                    let bytes = pipeline.store.get(Stage::Report, episode_id)?;
                    let report: EvaluationReport = serde_json::from_slice(&bytes)?;
                    println!("{episode_id}: {}", report_line(&report));
                    reports.push(report);
                }
            }
            for (episode_id, failure) in &manifest.failures {
                println!("{episode_id}: FAILED ({failure})");
            }
            if reports.is_empty() {
                println!("no reports stored for run {}", manifest.run_id);
                return Ok(0);
            }
            let avg_len = aggregate(&reports.iter().map(|r| r.avg_len).collect::<Vec<_>>())?;
            println!("episodes: {}", reports.len());
            println!("avg-len: {avg_len:.1}");
            for (label, values) in [
                ("vis-rec", collect(&reports, |f| f.vis_rec)),
                ("text-rec", collect(&reports, |f| f.text_rec)),
                ("mfs", collect(&reports, |f| f.mfs)),
                ("fact-rec", collect(&reports, |f| Some(f.fact_rec))),
            ] {
                if let Ok(mean) = aggregate(&values) {
                    println!("{label}: {mean:.2}");
                }
            }
            let rouge: Vec<&screenwright_core::report::RougeBlock> =
                reports.iter().filter_map(|r| r.rouge.as_ref()).collect();
            if !rouge.is_empty() {
                for (label, values) in [
                    ("r1", rouge.iter().map(|r| r.r1).collect::<Vec<_>>()),
                    ("r2", rouge.iter().map(|r| r.r2).collect::<Vec<_>>()),
                    ("rlsum", rouge.iter().map(|r| r.rlsum).collect::<Vec<_>>()),
                ] {
                    println!("{label}: {:.2}", aggregate(&values)?);
                }
            }
            Ok(0)
        }
    }
}

fn collect(
    reports: &[EvaluationReport],
    pick: impl Fn(&screenwright_core::report::FactMetricsBlock) -> Option<f64>,
) -> Vec<f64> {
    reports
        .iter()
        .filter_map(|r| r.facts.as_ref().and_then(&pick))
        .collect()
}

fn report_line(report: &EvaluationReport) -> String {
    let mut parts = vec![format!("avg-len {}", report.avg_len)];
    if let Some(facts) = &report.facts {
        if let (Some(v), Some(t), Some(m)) = (facts.vis_rec, facts.text_rec, facts.mfs) {
            parts.push(format!("vis-rec {v:.2} text-rec {t:.2} mfs {m:.2}"));
        }
        parts.push(format!("fact-rec {:.2}", facts.fact_rec));
    }
    if let Some(rouge) = &report.rouge {
        parts.push(format!(
            "r1 {:.2} r2 {:.2} rlsum {:.2}",
            rouge.r1, rouge.r2, rouge.rlsum
        ));
    }
    if let Some(iou) = report.iou {
        parts.push(format!("iou {iou:.2}"));
    }
    parts.join(", ")
}
