//! Stage orchestration: ingest → clips → slice → caption → screenplay →
//! summarize → evaluate, with store-backed resumability.
//!
//! Every stage first asks the run store for its artifact and only computes
//! (and calls backends) on a miss, so re-running a finished pipeline issues
//! zero model calls and rewrites nothing.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Mutex;

use anyhow::{anyhow, bail, Context, Result};

use screenwright_core::caption::{caption_clip, transcript_excerpt, CaptionJob};
use screenwright_core::clips::{
    build_clips, detect_pauses, normalize_speech_intervals, random_clips, slice_commands,
    speech_intervals, SpeechInterval,
};
use screenwright_core::ingest::load_episode;
use screenwright_core::model::config::build_client;
use screenwright_core::screenplay::{assemble, render, sidecar};
use screenwright_core::summarize::summarize;
use screenwright_core::{
    Caption, CaptionRecord, ClipOrigin, ClipSpan, Episode, EvaluationReport, ModelClient,
    RunStore, SliceCommand, Stage, Summary,
};

use crate::config::PipelineConfig;
use crate::eval::{evaluate_summary, EvalInputs, EvalWhich};

pub struct Pipeline {
    pub cfg: PipelineConfig,
    pub store: RunStore,
    pub captioner: Option<ModelClient>,
    pub summarizer: Option<ModelClient>,
    pub judge: Option<ModelClient>,
    pub dry_run: bool,
}

/// Result of running one episode.
pub struct EpisodeOutcome {
    pub episode_id: String,
    pub report: Option<EvaluationReport>,
    pub warnings: Vec<String>,
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig, run_id: &str, dry_run: bool) -> Result<Self> {
        let store = RunStore::open(&cfg.output_dir, run_id, cfg.snapshot())
            .context("failed to open the run store")?;
        let captioner = cfg
            .captioner
            .as_ref()
            .map(build_client)
            .transpose()
            .context("captioner backend")?;
        let summarizer = cfg
            .summarizer
            .as_ref()
            .map(build_client)
            .transpose()
            .context("summarizer backend")?;
        let judge = cfg
            .judge
            .as_ref()
            .map(build_client)
            .transpose()
            .context("judge backend")?;
        Ok(Self {
            cfg,
            store,
            captioner,
            summarizer,
            judge,
            dry_run,
        })
    }

    pub fn backend_calls(&self) -> u64 {
        [&self.captioner, &self.summarizer, &self.judge]
            .into_iter()
            .flatten()
            .map(ModelClient::backend_calls)
            .sum()
    }

    /// Run one episode up to and including `until`.
    pub fn run_episode(&self, manifest_path: &Path, until: Stage) -> Result<EpisodeOutcome> {
        let mut warnings = Vec::new();
        let ep = self.stage_episode(manifest_path)?;
        let mut outcome = EpisodeOutcome {
            episode_id: ep.id.clone(),
            report: None,
            warnings: Vec::new(),
        };
        if until == Stage::Episode {
            return Ok(outcome);
        }

        let clips = self.stage_clips(&ep)?;
        if until == Stage::Clips {
            return Ok(outcome);
        }

        // Sliced files only feed captioning; skip the stage once captions
        // exist so resumed runs never depend on the slicer binary.
        if until >= Stage::SliceCommands && !self.store.has(Stage::Captions, &ep.id) {
            self.stage_slice(&ep, &clips, until == Stage::SliceCommands, &mut warnings)?;
        }
        if until == Stage::SliceCommands {
            outcome.warnings = warnings;
            return Ok(outcome);
        }

        let captions = self.stage_captions(&ep, &clips)?;
        if until == Stage::Captions {
            outcome.warnings = warnings;
            return Ok(outcome);
        }

        let document = self.stage_screenplay(&ep, &captions)?;
        if until == Stage::Screenplay || until == Stage::ScreenplayEvents {
            outcome.warnings = warnings;
            return Ok(outcome);
        }

        let summary = self.stage_summary(&ep, &document)?;
        if until == Stage::Summary {
            outcome.warnings = warnings;
            return Ok(outcome);
        }

        let report = self.stage_evaluate(&ep, &summary, &captions, &mut warnings)?;
        outcome.report = Some(report);
        outcome.warnings = warnings;
        Ok(outcome)
    }

    pub fn stage_episode(&self, manifest_path: &Path) -> Result<Episode> {
        let ep = load_episode(manifest_path)
            .with_context(|| format!("failed to ingest {}", manifest_path.display()))?;
        if self.store.has(Stage::Episode, &ep.id) {
            let bytes = self.store.get(Stage::Episode, &ep.id)?;
            return Ok(serde_json::from_slice(&bytes)?);
        }
        self.store
            .put(Stage::Episode, &ep.id, ep.to_manifest_json().as_bytes())?;
        Ok(ep)
    }

    /// Externally computed speech intervals for an episode, when configured.
    fn speech_override(&self, episode_id: &str) -> Result<Option<Vec<SpeechInterval>>> {
        let Some(dir) = &self.cfg.speech_intervals_dir else {
            return Ok(None);
        };
        let path = dir.join(format!("{episode_id}.json"));
        if !path.exists() {
            return Ok(None);
        }
        let raw = std::fs::read_to_string(&path)
            .with_context(|| format!("failed to read {}", path.display()))?;
        let intervals: Vec<SpeechInterval> = serde_json::from_str(&raw)
            .with_context(|| format!("{} is not a speech-interval list", path.display()))?;
        Ok(Some(normalize_speech_intervals(&intervals)))
    }

    pub fn stage_clips(&self, ep: &Episode) -> Result<Vec<ClipSpan>> {
        if self.store.has(Stage::Clips, &ep.id) {
            let bytes = self.store.get(Stage::Clips, &ep.id)?;
            return Ok(serde_json::from_slice(&bytes)?);
        }
        let speech = match self.speech_override(&ep.id)? {
            Some(intervals) => intervals,
            None => speech_intervals(ep),
        };
        let pauses = detect_pauses(&speech, ep.duration_s, self.cfg.selection.pause_threshold_s);
        let clips = build_clips(&pauses, ep.duration_s, &self.cfg.selection)?;
        self.store.put(
            Stage::Clips,
            &ep.id,
            serde_json::to_string_pretty(&clips)?.as_bytes(),
        )?;
        Ok(clips)
    }

    /// Build (and unless dry-run, execute) the slicer commands. Episodes
    /// without a video path skip the stage in pipeline flows; an explicit
    /// `slice` invocation errors instead.
    pub fn stage_slice(
        &self,
        ep: &Episode,
        clips: &[ClipSpan],
        explicit: bool,
        warnings: &mut Vec<String>,
    ) -> Result<Vec<SliceCommand>> {
        let Some(video) = ep.video_path.as_deref() else {
            if explicit {
                bail!("episode {} has no video path; cannot slice", ep.id);
            }
            warnings.push(format!(
                "episode {}: no video path; slice skipped, captions use synthetic clip references",
                ep.id
            ));
            return Ok(Vec::new());
        };
        let commands = slice_commands(clips, Some(video))?;
        self.store.put(
            Stage::SliceCommands,
            &ep.id,
            serde_json::to_string_pretty(&commands)?.as_bytes(),
        )?;

        let slicer = self.cfg.slicer_bin();
        if self.dry_run {
            for cmd in &commands {
                println!("{} {}", slicer, cmd.args.join(" "));
            }
            return Ok(commands);
        }
        let out_dir = self.clips_dir(&ep.id);
        std::fs::create_dir_all(&out_dir)?;
        for cmd in &commands {
            if out_dir.join(&cmd.output_name).exists() {
                continue;
            }
            let status = Command::new(&slicer)
                .args(&cmd.args)
                .current_dir(&out_dir)
                .status()
                .with_context(|| format!("failed to launch slicer `{slicer}`"))?;
            if !status.success() {
                bail!("slicer returned {status} for {}", cmd.output_name);
            }
        }
        Ok(commands)
    }

    fn clips_dir(&self, episode_id: &str) -> PathBuf {
        self.store.run_dir().join(episode_id).join("clips")
    }

    /// Media reference for a clip: the sliced file (relative to the episode
    /// artifact dir) when it exists, otherwise a synthetic locator. Both are
    /// stable across runs, so request keys replay.
    fn clip_ref(&self, ep: &Episode, index: usize, clip: &ClipSpan) -> String {
        let name = format!(
            "clip_{index}_{start:.3}_{end:.3}.mp4",
            start = clip.start_s,
            end = clip.end_s
        );
        if self.clips_dir(&ep.id).join(&name).exists() {
            format!("clips/{name}")
        } else {
            format!("video:{}#{:.3}-{:.3}", ep.id, clip.start_s, clip.end_s)
        }
    }

    pub fn stage_captions(&self, ep: &Episode, clips: &[ClipSpan]) -> Result<Vec<Caption>> {
        if self.store.has(Stage::Captions, &ep.id) {
            let bytes = self.store.get(Stage::Captions, &ep.id)?;
            return captions_from_jsonl(&bytes);
        }
        let captioner = self
            .captioner
            .as_ref()
            .ok_or_else(|| anyhow!("no captioner backend configured"))?;
        let roster = ep.speaker_roster();
        let mut captions = Vec::with_capacity(clips.len());
        for (index, clip) in clips.iter().enumerate() {
            let job = CaptionJob {
                clip: clip.clone(),
                excerpt: transcript_excerpt(ep, clip, self.cfg.context_pad_s),
                with_characters: self.cfg.with_characters,
            };
            let clip_ref = self.clip_ref(ep, index, clip);
            let caption = caption_clip(captioner, &job, &clip_ref, &roster)
                .with_context(|| format!("captioning clip {index} of episode {}", ep.id))?;
            captions.push(caption);
        }
        let mut lines = String::new();
        for caption in &captions {
            lines.push_str(&serde_json::to_string(&CaptionRecord::from_caption(
                &ep.id, caption,
            ))?);
            lines.push('\n');
        }
        self.store.put(Stage::Captions, &ep.id, lines.as_bytes())?;
        Ok(captions)
    }

    pub fn stage_screenplay(&self, ep: &Episode, captions: &[Caption]) -> Result<String> {
        if self.store.has(Stage::Screenplay, &ep.id) {
            let bytes = self.store.get(Stage::Screenplay, &ep.id)?;
            return String::from_utf8(bytes).context("screenplay artifact is not UTF-8");
        }
        let screenplay = assemble(ep, captions)?;
        let text = render(&screenplay);
        self.store.put(Stage::Screenplay, &ep.id, text.as_bytes())?;
        self.store.put(
            Stage::ScreenplayEvents,
            &ep.id,
            serde_json::to_string_pretty(&sidecar(&screenplay))?.as_bytes(),
        )?;
        Ok(text)
    }

    pub fn stage_summary(&self, ep: &Episode, document: &str) -> Result<Summary> {
        if self.store.has(Stage::Summary, &ep.id) {
            let bytes = self.store.get(Stage::Summary, &ep.id)?;
            return Ok(serde_json::from_slice(&bytes)?);
        }
        let summarizer = self
            .summarizer
            .as_ref()
            .ok_or_else(|| anyhow!("no summarizer backend configured"))?;
        let summary = summarize(summarizer, &ep.id, document, self.cfg.summary_style)?;
        self.store.put(
            Stage::Summary,
            &ep.id,
            serde_json::to_string_pretty(&summary)?.as_bytes(),
        )?;
        Ok(summary)
    }

    pub fn stage_evaluate(
        &self,
        ep: &Episode,
        summary: &Summary,
        captions: &[Caption],
        warnings: &mut Vec<String>,
    ) -> Result<EvaluationReport> {
        if self.store.has(Stage::Report, &ep.id) {
            let bytes = self.store.get(Stage::Report, &ep.id)?;
            return Ok(serde_json::from_slice(&bytes)?);
        }
        let records: Vec<CaptionRecord> = captions
            .iter()
            .map(|c| CaptionRecord::from_caption(&ep.id, c))
            .collect();
        let out = evaluate_summary(EvalInputs {
            episode: ep,
            candidate_text: &summary.text,
            summary_style: Some(summary.style.to_string()),
            judge: self.judge.as_ref(),
            which: EvalWhich::All,
            reference_filter: self.cfg.reference_filter.as_deref(),
            captions: Some(&records),
            human_characters: None,
            strict: false,
        })?;
        warnings.extend(out.warnings);

        if let Some(facts) = &out.fact_evaluation {
            let mut fact_lines = String::new();
            for record in &facts.records {
                fact_lines.push_str(&serde_json::to_string(record)?);
                fact_lines.push('\n');
            }
            self.store.put(Stage::Facts, &ep.id, fact_lines.as_bytes())?;
            let mut judgment_lines = String::new();
            for judgment in &facts.judgments {
                judgment_lines.push_str(&serde_json::to_string(judgment)?);
                judgment_lines.push('\n');
            }
            self.store
                .put(Stage::Judgments, &ep.id, judgment_lines.as_bytes())?;
        }
        self.store.put(
            Stage::Report,
            &ep.id,
            out.report.to_json_pretty().as_bytes(),
        )?;
        Ok(out.report)
    }

    /// Seeded random baseline matched on the main selection's clip count and
    /// total duration.
    pub fn stage_random_baseline(&self, ep: &Episode, seed: u64) -> Result<Vec<ClipSpan>> {
        let clips = if self.store.has(Stage::Clips, &ep.id) {
            serde_json::from_slice(&self.store.get(Stage::Clips, &ep.id)?)?
        } else {
            self.stage_clips(ep)?
        };
        let pause_clips: Vec<&ClipSpan> = clips
            .iter()
            .filter(|c| c.origin == ClipOrigin::Pause)
            .collect();
        if pause_clips.is_empty() {
            bail!("episode {} has no selected clips to match", ep.id);
        }
        let total_s: f64 = pause_clips.iter().map(|c| c.length_s()).sum();
        let baseline = random_clips(pause_clips.len(), total_s, ep.duration_s, seed)?;
        self.store.put(
            Stage::RandomClips,
            &ep.id,
            serde_json::to_string_pretty(&baseline)?.as_bytes(),
        )?;
        Ok(baseline)
    }
}

pub fn captions_from_jsonl(bytes: &[u8]) -> Result<Vec<Caption>> {
    let text = std::str::from_utf8(bytes).context("captions artifact is not UTF-8")?;
    let mut captions = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let record: CaptionRecord = serde_json::from_str(line)?;
        captions.push(Caption {
            clip: ClipSpan {
                start_s: record.clip_start_s,
                end_s: record.clip_end_s,
                origin: ClipOrigin::Pause,
                source_pause: None,
            },
            text: record.text,
            raw_text: record.raw_text,
            characters: record.characters,
        });
    }
    Ok(captions)
}

/// Run a set of episodes with `workers` threads, recording per-episode
/// failures in the run manifest. Returns (succeeded, failed).
pub fn run_episodes(
    pipeline: &Pipeline,
    manifests: &[PathBuf],
    until: Stage,
    workers: usize,
) -> (Vec<EpisodeOutcome>, Vec<(PathBuf, String)>) {
    let queue = Mutex::new(manifests.iter().cloned().enumerate().collect::<Vec<_>>());
    let outcomes = Mutex::new(Vec::new());
    let failures = Mutex::new(Vec::new());
    let workers = workers.max(1).min(manifests.len().max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let next = queue.lock().expect("queue lock poisoned").pop();
                let Some((index, manifest)) = next else {
                    break;
                };
                match pipeline.run_episode(&manifest, until) {
                    Ok(outcome) => {
                        let _ = pipeline.store.record_failure(&outcome.episode_id, None);
                        outcomes
                            .lock()
                            .expect("outcomes lock poisoned")
                            .push((index, outcome));
                    }
                    Err(err) => {
                        let episode_id = manifest
                            .file_stem()
                            .map(|s| s.to_string_lossy().to_string())
                            .unwrap_or_else(|| format!("episode-{index}"));
                        let _ = pipeline
                            .store
                            .record_failure(&episode_id, Some(format!("{err:#}")));
                        failures
                            .lock()
                            .expect("failures lock poisoned")
                            .push((index, manifest, format!("{err:#}")));
                    }
                }
            });
        }
    });

    let mut outcomes = outcomes.into_inner().expect("outcomes lock poisoned");
    outcomes.sort_by_key(|(index, _)| *index);
    let mut failures = failures.into_inner().expect("failures lock poisoned");
    failures.sort_by_key(|(index, _, _)| *index);
    (
        outcomes.into_iter().map(|(_, o)| o).collect(),
        failures.into_iter().map(|(_, m, e)| (m, e)).collect(),
    )
}
