//! Command-line front end: procedural scene generation, single-episode runs
//! with trace logging, benchmark suites, trace-to-PNG map dumps, and scene
//! graph precision/recall.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use semnav::agent::{NavAgent, TraceRow, VariantFlags};
use semnav::bench::{self, plot, EpisodeTrace, SuiteConfig};
use semnav::geom::WorldPoint;
use semnav::imagine::graph_precision_recall_at_k;
use semnav::sim::{
    episodes_from_jsonl, episodes_to_jsonl, generate_scene, run_episode, sample_episodes,
    scene_from_json, scene_to_json, EpisodeGenConfig, Scene, SceneGenConfig,
};
use semnav::NavConfig;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "semnav", about = "Semantic object-goal navigation toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate procedural multi-floor scenes and episode specs.
    GenScenes {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        floors: usize,
        #[arg(long, default_value_t = 9)]
        rooms: usize,
        #[arg(long, default_value_t = 18.0)]
        size_m: f64,
        #[arg(long, default_value_t = 0)]
        decoys: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Episode specs sampled per scene.
        #[arg(long, default_value_t = 5)]
        episodes: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one episode spec against one scene and report the result.
    RunEpisode {
        #[arg(long)]
        scene: PathBuf,
        /// JSONL file of episode specs, as written by gen-scenes.
        #[arg(long)]
        episode: PathBuf,
        /// Line index into the episode file.
        #[arg(long, default_value_t = 0)]
        index: usize,
        /// Navigation config TOML; defaults apply when omitted.
        #[arg(long)]
        agent_config: Option<PathBuf>,
        /// Ablation tag a..f.
        #[arg(long, default_value_t = 'd')]
        variant: char,
        /// Write the per-step decision log as JSONL.
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Run a benchmark suite across ablation variants.
    RunBenchmark {
        /// Suite TOML; the built-in default suite applies when omitted.
        #[arg(long)]
        suite: Option<PathBuf>,
        /// Override the suite's variant tags, e.g. "abdf".
        #[arg(long)]
        variants: Option<String>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render trace logs over their scene as PNG maps and gain curves.
    DumpMaps {
        /// JSONL trace log from run-episode or a recording benchmark.
        #[arg(long)]
        trace: PathBuf,
        /// The scene the trace was recorded on.
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Precision/recall of a predicted scene graph against region truth.
    GraphMetrics {
        /// Scene graph JSON.
        #[arg(long)]
        pred: PathBuf,
        /// Truth JSON: a list of {"label": .., "x": .., "y": ..} regions.
        #[arg(long)]
        truth: PathBuf,
        /// Match against the top-k caption labels.
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        floor: usize,
        /// Center match radius, meters.
        #[arg(long, default_value_t = 2.0)]
        radius: f64,
    },
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("missing file: {}", path.display()))
}

fn load_scene(path: &Path) -> Result<Scene> {
    let text = read_to_string(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("bad JSON in {}", path.display()))?;
    scene_from_json(&value).with_context(|| format!("bad scene in {}", path.display()))
}

fn gen_scenes(
    seed: u64,
    floors: usize,
    rooms: usize,
    size_m: f64,
    decoys: usize,
    count: usize,
    episodes: usize,
    out: &Path,
) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let cfg = SceneGenConfig { floors, rooms, size_m, decoys, ..SceneGenConfig::default() };
    for i in 0..count {
        let s = seed.wrapping_add(i as u64);
        let scene = generate_scene(s, &cfg)?;
        let scene_path = out.join(format!("scene_{s:04}.json"));
        std::fs::write(&scene_path, serde_json::to_string(&scene_to_json(&scene))?)?;
        println!("{}", scene_path.display());
        if episodes > 0 {
            let eps = sample_episodes(&scene, s, episodes, &EpisodeGenConfig::default())?;
            let ep_path = out.join(format!("episodes_{s:04}.jsonl"));
            std::fs::write(&ep_path, episodes_to_jsonl(&eps))?;
            println!("{}", ep_path.display());
        }
    }
    Ok(())
}

fn run_one_episode(
    scene_path: &Path,
    episode_path: &Path,
    index: usize,
    agent_config: Option<&Path>,
    variant: char,
    trace_out: Option<&Path>,
) -> Result<()> {
    let scene = load_scene(scene_path)?;
    let episodes = episodes_from_jsonl(&read_to_string(episode_path)?)
        .with_context(|| format!("bad episodes in {}", episode_path.display()))?;
    let spec = episodes
        .get(index)
        .with_context(|| format!("episode index {index} out of range ({})", episodes.len()))?;
    let cfg = match agent_config {
        Some(p) => NavConfig::load(p).map_err(|e| anyhow::anyhow!("{e}"))?,
        None => NavConfig::default(),
    };
    let flags = VariantFlags::from_tag(variant)
        .with_context(|| format!("unknown variant '{variant}' (expected a..f)"))?;
    let mut agent = NavAgent::for_scene(&scene, cfg, flags).record_trace(trace_out.is_some());
    let result = run_episode(&scene, spec, &mut agent, None);
    if let Some(path) = trace_out {
        let trace = EpisodeTrace {
            variant,
            scene_seed: scene.seed,
            episode_id: spec.id,
            rows: agent.take_trace(),
        };
        let outcome =
            bench::BenchOutcome { reports: Vec::new(), traces: vec![trace] };
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, outcome.traces_jsonl())?;
    }
    let spl = bench::spl(result.success, result.path_length, result.optimal_length);
    let soft = bench::soft_spl(
        result.d_start,
        result.d_final,
        result.path_length,
        result.optimal_length,
    );
    let mut v = serde_json::to_value(&result)?;
    v["spl"] = serde_json::json!(spl);
    v["soft_spl"] = serde_json::json!(soft);
    println!("{}", serde_json::to_string_pretty(&v)?);
    Ok(())
}

fn run_suite(
    suite_path: Option<&Path>,
    variants: Option<String>,
    workers: Option<usize>,
    out: &Path,
) -> Result<()> {
    let mut suite = match suite_path {
        Some(p) => SuiteConfig::load(p).map_err(|e| anyhow::anyhow!("{e}"))?,
        None => SuiteConfig::default(),
    };
    if let Some(v) = variants {
        suite.variants = v;
    }
    if let Some(w) = workers {
        suite.workers = w;
    }
    let outcome = bench::run_benchmark(&suite).map_err(|e| anyhow::anyhow!("{e}"))?;
    let written = bench::write_outputs(&suite, &outcome, out).map_err(|e| anyhow::anyhow!("{e}"))?;
    print!("{}", bench::comparison_markdown(&suite, &outcome.reports));
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

#[derive(Deserialize)]
struct TraceLine {
    variant: String,
    scene_seed: u64,
    episode_id: u64,
    row: TraceRow,
}

fn dump_maps(trace_path: &Path, scene_path: &Path, out: &Path) -> Result<()> {
    let scene = load_scene(scene_path)?;
    let text = read_to_string(trace_path)?;
    let mut grouped: BTreeMap<(String, u64, u64), Vec<TraceRow>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: TraceLine = serde_json::from_str(line)
            .with_context(|| format!("bad trace line {} in {}", i + 1, trace_path.display()))?;
        grouped
            .entry((parsed.variant, parsed.scene_seed, parsed.episode_id))
            .or_default()
            .push(parsed.row);
    }
    if grouped.is_empty() {
        bail!("no trace rows in {}", trace_path.display());
    }
    std::fs::create_dir_all(out)?;
    for ((variant, scene_seed, episode_id), rows) in &grouped {
        if *scene_seed != scene.seed {
            eprintln!(
                "warning: trace scene seed {} differs from scene file seed {}",
                scene_seed, scene.seed
            );
        }
        let stem = format!("{variant}_{scene_seed:04}_{episode_id:03}");
        for floor in 0..scene.floors.len() {
            if rows.iter().any(|r| r.floor == floor) {
                let canvas = plot::render_floor_map(&scene, floor, rows);
                let path = out.join(format!("{stem}_floor{floor}.png"));
                canvas.save(&path)?;
                println!("{}", path.display());
            }
        }
        let gains = plot::render_gain_curves(rows);
        let path = out.join(format!("{stem}_gains.png"));
        gains.save(&path)?;
        println!("{}", path.display());
    }
    Ok(())
}

#[derive(Deserialize)]
struct TruthRegion {
    label: String,
    x: f64,
    y: f64,
}

fn graph_metrics(pred: &Path, truth: &Path, k: usize, floor: usize, radius: f64) -> Result<()> {
    let pred_value: serde_json::Value = serde_json::from_str(&read_to_string(pred)?)
        .with_context(|| format!("bad JSON in {}", pred.display()))?;
    let graph = semnav::graph::graph_from_json(&pred_value)
        .with_context(|| format!("bad scene graph in {}", pred.display()))?;
    let truth_regions: Vec<TruthRegion> = serde_json::from_str(&read_to_string(truth)?)
        .with_context(|| format!("bad truth list in {}", truth.display()))?;
    let truth_pairs: Vec<(String, WorldPoint)> = truth_regions
        .into_iter()
        .map(|t| (t.label, WorldPoint::new(t.x, t.y)))
        .collect();
    let m = graph_precision_recall_at_k(&graph, &truth_pairs, floor, radius, k)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    println!(
        "{}",
        serde_json::json!({
            "matched": m.matched,
            "truth_count": m.truth_count,
            "predicted_count": m.predicted_count,
            "recall": m.recall,
            "precision": m.precision,
            "k": k,
        })
    );
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::GenScenes { seed, floors, rooms, size_m, decoys, count, episodes, out } => {
            gen_scenes(seed, floors, rooms, size_m, decoys, count, episodes, &out)
        }
        Cmd::RunEpisode { scene, episode, index, agent_config, variant, trace_out } => {
            run_one_episode(
                &scene,
                &episode,
                index,
                agent_config.as_deref(),
                variant,
                trace_out.as_deref(),
            )
        }
        Cmd::RunBenchmark { suite, variants, workers, out } => {
            run_suite(suite.as_deref(), variants, workers, &out)
        }
        Cmd::DumpMaps { trace, scene, out } => dump_maps(&trace, &scene, &out),
        Cmd::GraphMetrics { pred, truth, k, floor, radius } => {
            graph_metrics(&pred, &truth, k, floor, radius)
        }
    }
}
