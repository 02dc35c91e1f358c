//! Benchmark harness: SR / SPL / SoftSPL metrics, deterministic parallel
//! episode fan-out across ablation variants, CSV and markdown reports, and
//! JSONL trajectory logs.
//!
//! Jobs are ordered (variant, scene, episode) and results keep that order
//! regardless of worker count, so reports and logs are byte-identical
//! between serial and parallel runs.

pub mod plot;

use crate::agent::{NavAgent, TraceRow, VariantFlags};
use crate::config::NavConfig;
use crate::par;
use crate::sim::{
    generate_scene, run_episode_with_oracle, sample_episodes, EpisodeGenConfig, EpisodeSpec,
    GeodesicOracle, Scene, SceneGenConfig, SimError,
};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("bad suite config: {0}")]
    Config(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Success weighted by path length: 0 on failure, otherwise the optimal
/// geodesic over the realized path, clamped so a shorter-than-optimal
/// realized path never scores above 1. The degenerate start-on-goal case
/// (both lengths zero) scores 1.
pub fn spl(success: bool, path_length: f64, optimal_length: f64) -> f64 {
    if !success {
        return 0.0;
    }
    let denom = path_length.max(optimal_length);
    if denom <= 0.0 {
        1.0
    } else {
        optimal_length / denom
    }
}

/// Progress-weighted variant that does not require a stop at the goal:
/// max(0, 1 - d_final / d_start) times the same path-efficiency ratio.
/// A start already at the goal counts as full progress only if it stayed
/// there.
pub fn soft_spl(d_start: f64, d_final: f64, path_length: f64, optimal_length: f64) -> f64 {
    let progress = if d_start <= 0.0 {
        if d_final <= 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - d_final / d_start).max(0.0)
    };
    let denom = path_length.max(optimal_length);
    let efficiency = if denom <= 0.0 { 1.0 } else { optimal_length / denom };
    progress * efficiency
}

/// A full benchmark suite: procedural scenes, sampled episodes, and the
/// ablation variants to run on them.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub name: String,
    pub scene_seed: u64,
    pub scene_count: usize,
    pub floors: usize,
    pub rooms: usize,
    pub size_m: f64,
    /// Decoy objects per floor.
    pub decoys: usize,
    pub episodes_per_scene: usize,
    pub episode_seed: u64,
    /// Some(true): targets only on other floors; Some(false): same floor.
    pub cross_floor: Option<bool>,
    pub success_distance: f64,
    pub step_budget: usize,
    pub min_geodesic: f64,
    /// Ablation tags, e.g. "abdf"; each char is one run of the suite.
    pub variants: String,
    pub workers: usize,
    pub record_traces: bool,
    pub nav: NavConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        let mut nav = NavConfig::default();
        nav.gain.hierarchy = crate::config::HierarchyLevels::ObjectAndRegion;
        SuiteConfig {
            name: "suite".into(),
            scene_seed: 1,
            scene_count: 10,
            floors: 2,
            rooms: 9,
            size_m: 18.0,
            decoys: 0,
            episodes_per_scene: 5,
            episode_seed: 7,
            cross_floor: Some(false),
            success_distance: 0.25,
            step_budget: 400,
            min_geodesic: 1.0,
            variants: "abdf".into(),
            workers: 8,
            record_traces: false,
            nav,
        }
    }
}

impl SuiteConfig {
    pub fn load(path: &Path) -> Result<SuiteConfig, BenchError> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("suite config serializes")
    }
}

/// One finished episode of one variant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub variant: char,
    pub scene_seed: u64,
    pub episode_id: u64,
    pub target: String,
    pub success: bool,
    pub stopped: bool,
    pub steps: usize,
    pub collisions: usize,
    pub path_length: f64,
    pub optimal_length: f64,
    pub d_start: f64,
    pub d_final: f64,
    pub spl: f64,
    pub soft_spl: f64,
}

/// All episodes of one variant plus the aggregate view.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub variant: char,
    /// Fingerprint of the navigation config the episodes ran with.
    pub config_fingerprint: String,
    pub rows: Vec<EpisodeRow>,
}

impl MetricsReport {
    pub fn success_rate(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().filter(|r| r.success).count() as f64 / self.rows.len() as f64
    }

    pub fn mean_spl(&self) -> f64 {
        mean(self.rows.iter().map(|r| r.spl))
    }

    pub fn mean_soft_spl(&self) -> f64 {
        mean(self.rows.iter().map(|r| r.soft_spl))
    }

    pub fn mean_steps(&self) -> f64 {
        mean(self.rows.iter().map(|r| r.steps as f64))
    }

    /// Stopped episodes that were not successes: the false-stop count used
    /// by the verification ablation.
    pub fn false_stops(&self) -> usize {
        self.rows.iter().filter(|r| r.stopped && !r.success).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "variant,scene_seed,episode_id,target,success,stopped,steps,collisions,\
             path_length,optimal_length,d_start,d_final,spl,soft_spl\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.variant,
                r.scene_seed,
                r.episode_id,
                r.target,
                r.success,
                r.stopped,
                r.steps,
                r.collisions,
                r.path_length,
                r.optimal_length,
                r.d_start,
                r.d_final,
                r.spl,
                r.soft_spl,
            ));
        }
        out
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values {
        sum += v;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn variant_label(tag: char) -> &'static str {
    match tag {
        'a' => "nearest frontier",
        'b' => "+ graph exploitation",
        'c' => "+ imagined completion",
        'd' => "+ exploration gain",
        'e' => "+ context verification",
        'f' => "oracle scene graph",
        _ => "unknown",
    }
}

/// Side-by-side aggregate table over all variants of one suite run.
pub fn comparison_markdown(suite: &SuiteConfig, reports: &[MetricsReport]) -> String {
    let mut out = String::new();
    out.push_str(&format!("# Benchmark: {}\n\n", suite.name));
    out.push_str(&format!(
        "{} scenes x {} episodes, {} floors, {} rooms, {:.0} m, budget {} steps\n\n",
        suite.scene_count,
        suite.episodes_per_scene,
        suite.floors,
        suite.rooms,
        suite.size_m,
        suite.step_budget,
    ));
    out.push_str("| variant | ablation | episodes | SR | SPL | SoftSPL | mean steps | config |\n");
    out.push_str("|---|---|---|---|---|---|---|---|\n");
    for r in reports {
        out.push_str(&format!(
            "| {} | {} | {} | {:.3} | {:.3} | {:.3} | {:.1} | {} |\n",
            r.variant,
            variant_label(r.variant),
            r.rows.len(),
            r.success_rate(),
            r.mean_spl(),
            r.mean_soft_spl(),
            r.mean_steps(),
            r.config_fingerprint,
        ));
    }
    out
}

/// One episode's decision log, tagged with its suite coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub variant: char,
    pub scene_seed: u64,
    pub episode_id: u64,
    pub rows: Vec<TraceRow>,
}

#[derive(Debug)]
pub struct BenchOutcome {
    pub reports: Vec<MetricsReport>,
    /// Present only when the suite records traces; job order.
    pub traces: Vec<EpisodeTrace>,
}

impl BenchOutcome {
    /// One JSON object per line, one line per trace step.
    pub fn traces_jsonl(&self) -> String {
        let mut out = String::new();
        for t in &self.traces {
            for row in &t.rows {
                let line = serde_json::json!({
                    "variant": t.variant.to_string(),
                    "scene_seed": t.scene_seed,
                    "episode_id": t.episode_id,
                    "row": row,
                });
                out.push_str(&line.to_string());
                out.push('\n');
            }
        }
        out
    }
}

struct SceneBundle {
    scene: Scene,
    oracle: GeodesicOracle,
    episodes: Vec<EpisodeSpec>,
}

struct Job {
    variant: char,
    bundle: Arc<SceneBundle>,
    episode_idx: usize,
}

fn scene_gen_config(suite: &SuiteConfig) -> SceneGenConfig {
    SceneGenConfig {
        floors: suite.floors,
        rooms: suite.rooms,
        size_m: suite.size_m,
        decoys: suite.decoys,
        ..SceneGenConfig::default()
    }
}

fn episode_gen_config(suite: &SuiteConfig) -> EpisodeGenConfig {
    EpisodeGenConfig {
        success_distance: suite.success_distance,
        step_budget: suite.step_budget,
        cross_floor: suite.cross_floor,
        min_geodesic: suite.min_geodesic,
    }
}

/// Generate the suite's scenes and episodes, run every (variant, episode)
/// pair, and fold the results into per-variant reports. Deterministic in the
/// suite config alone; `workers` only changes wall-clock time.
pub fn run_benchmark(suite: &SuiteConfig) -> Result<BenchOutcome, BenchError> {
    let mut variants = Vec::new();
    for tag in suite.variants.chars() {
        let flags = VariantFlags::from_tag(tag)
            .ok_or_else(|| BenchError::Config(format!("unknown variant '{tag}'")))?;
        variants.push((tag, flags));
    }
    if variants.is_empty() {
        return Err(BenchError::Config("no variants requested".into()));
    }

    let scene_cfg = scene_gen_config(suite);
    let ep_cfg = episode_gen_config(suite);
    let mut bundles = Vec::with_capacity(suite.scene_count);
    for i in 0..suite.scene_count {
        let scene = generate_scene(suite.scene_seed.wrapping_add(i as u64), &scene_cfg)?;
        let oracle = GeodesicOracle::build(&scene);
        let episodes = sample_episodes(
            &scene,
            suite.episode_seed.wrapping_add(i as u64),
            suite.episodes_per_scene,
            &ep_cfg,
        )?;
        bundles.push(Arc::new(SceneBundle { scene, oracle, episodes }));
    }

    let mut nav = suite.nav.clone();
    nav.agent.success_distance = suite.success_distance;
    nav.agent.step_budget = suite.step_budget;
    let fingerprint = nav.fingerprint();

    let mut jobs = Vec::new();
    for &(tag, _) in &variants {
        for bundle in &bundles {
            for episode_idx in 0..bundle.episodes.len() {
                jobs.push(Job { variant: tag, bundle: Arc::clone(bundle), episode_idx });
            }
        }
    }

    let record = suite.record_traces;
    let results = par::run_jobs(jobs, suite.workers, move |job| {
        let SceneBundle { scene, oracle, episodes } = &*job.bundle;
        let spec = &episodes[job.episode_idx];
        let flags = VariantFlags::from_tag(job.variant).expect("validated above");
        let mut agent = NavAgent::for_scene(scene, nav.clone(), flags).record_trace(record);
        let result = run_episode_with_oracle(scene, spec, &mut agent, oracle, None);
        let row = EpisodeRow {
            variant: job.variant,
            scene_seed: scene.seed,
            episode_id: spec.id,
            target: spec.target.clone(),
            success: result.success,
            stopped: result.stopped,
            steps: result.steps,
            collisions: result.collisions,
            path_length: result.path_length,
            optimal_length: result.optimal_length,
            d_start: result.d_start,
            d_final: result.d_final,
            spl: spl(result.success, result.path_length, result.optimal_length),
            soft_spl: soft_spl(
                result.d_start,
                result.d_final,
                result.path_length,
                result.optimal_length,
            ),
        };
        let trace = if record {
            Some(EpisodeTrace {
                variant: job.variant,
                scene_seed: scene.seed,
                episode_id: spec.id,
                rows: agent.take_trace(),
            })
        } else {
            None
        };
        (row, trace)
    });

    let mut reports: Vec<MetricsReport> = variants
        .iter()
        .map(|&(tag, _)| MetricsReport {
            variant: tag,
            config_fingerprint: fingerprint.clone(),
            rows: Vec::new(),
        })
        .collect();
    let per_variant: usize = bundles.iter().map(|b| b.episodes.len()).sum();
    let mut traces = Vec::new();
    for (i, (row, trace)) in results.into_iter().enumerate() {
        reports[i / per_variant.max(1)].rows.push(row);
        if let Some(t) = trace {
            traces.push(t);
        }
    }
    Ok(BenchOutcome { reports, traces })
}

/// Write per-variant CSVs, the markdown comparison, the resolved suite
/// config, and (when recorded) the JSONL trace log. Returns the paths
/// written, in order.
pub fn write_outputs(
    suite: &SuiteConfig,
    outcome: &BenchOutcome,
    dir: &Path,
) -> Result<Vec<PathBuf>, BenchError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for report in &outcome.reports {
        let path = dir.join(format!("variant_{}.csv", report.variant));
        std::fs::write(&path, report.to_csv())?;
        written.push(path);
    }
    let md = dir.join("comparison.md");
    std::fs::write(&md, comparison_markdown(suite, &outcome.reports))?;
    written.push(md);
    let cfg = dir.join("suite.toml");
    std::fs::write(&cfg, suite.to_toml())?;
    written.push(cfg);
    if suite.record_traces {
        let traces = dir.join("traces.jsonl");
        std::fs::write(&traces, outcome.traces_jsonl())?;
        written.push(traces);
    }
    Ok(written)
}
