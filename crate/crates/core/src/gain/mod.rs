//! Per-frontier gains: exploitation (semantic relevance of the frontier's
//! local subgraph to the target) and exploration (discounted, normalized
//! unknown area first visible along the path), plus the fallback selector.

use crate::config::{GainConfig, HierarchyLevels};
use crate::fixtures::cooccurrence;
use crate::geom::WorldPoint;
use crate::graph::{ObjectId, RegionId, SceneGraph};
use crate::grid::{raycast_visible_cells, CellState, OccupancyGrid};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GainError {
    #[error("waypoint path is empty")]
    EmptyPath,
    #[error("no gain records to select from")]
    NoRecords,
}

/// A scene-graph node the exploitation scorer can consult.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeRef {
    Object(ObjectId),
    Region(RegionId),
}

/// Gains computed for one frontier.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GainRecord {
    pub frontier_id: usize,
    pub s_s: f64,
    pub s_g: f64,
    pub contributing_node: Option<NodeRef>,
    /// Waypoints the exploration gain was evaluated on.
    pub path_cells: Vec<WorldPoint>,
    /// Geodesic distance from the agent, used only for tie-breaking.
    pub distance: f64,
}

/// Semantic scorers, all mapping (node, target) into [0, 1].
#[derive(Debug, Clone)]
pub enum ScorerKind {
    /// 1 / (1 + d / map-diagonal) on agent-to-node distance.
    Distance,
    /// Cosine similarity of character-trigram bags, a deterministic
    /// stand-in for text-embedding similarity.
    EmbeddingSim,
    /// Co-occurrence fixture: P(target | region label) weighted by caption
    /// confidence for regions, object-object profile similarity for objects.
    PriorTable,
    /// External chat-completion scorer; transport failure falls back to
    /// `PriorTable` with a warning.
    ExternalLlm {
        endpoint: String,
        model: String,
        api_key: String,
        timeout_secs: u64,
    },
}

/// Agent-relative context the scorers need.
#[derive(Debug, Clone, Copy)]
pub struct ScoreContext {
    pub agent: WorldPoint,
    pub map_diagonal: f64,
}

fn trigrams(s: &str) -> std::collections::BTreeMap<[char; 3], f64> {
    let padded: Vec<char> = format!("  {}  ", s.to_lowercase()).chars().collect();
    let mut counts = std::collections::BTreeMap::new();
    for w in padded.windows(3) {
        *counts.entry([w[0], w[1], w[2]]).or_insert(0.0) += 1.0;
    }
    counts
}

fn trigram_cosine(a: &str, b: &str) -> f64 {
    let (ta, tb) = (trigrams(a), trigrams(b));
    let dot: f64 = ta.iter().filter_map(|(k, v)| tb.get(k).map(|w| v * w)).sum();
    let na: f64 = ta.values().map(|v| v * v).sum::<f64>().sqrt();
    let nb: f64 = tb.values().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(0.0, 1.0)
    }
}

fn node_position(graph: &SceneGraph, node: NodeRef) -> WorldPoint {
    match node {
        NodeRef::Object(id) => graph.objects[&id].position,
        NodeRef::Region(id) => graph.regions[&id].center,
    }
}

fn prior_table_score(graph: &SceneGraph, node: NodeRef, q: &str) -> f64 {
    let co = cooccurrence();
    match node {
        NodeRef::Object(id) => co.object_object_score(&graph.objects[&id].category, q),
        NodeRef::Region(id) => {
            let r = &graph.regions[&id];
            let total: f64 = r.caption.iter().map(|(_, c)| c).sum();
            if total == 0.0 {
                return 0.0;
            }
            r.caption.iter().map(|(l, c)| c / total * co.prob(l, q)).sum()
        }
    }
}

fn node_description(graph: &SceneGraph, node: NodeRef) -> String {
    match node {
        NodeRef::Object(id) => format!("a {}", graph.objects[&id].category),
        NodeRef::Region(id) => {
            let r = &graph.regions[&id];
            let members: Vec<&str> = r
                .members
                .iter()
                .map(|m| graph.objects[m].category.as_str())
                .collect();
            format!(
                "a region captioned '{}' containing {}",
                r.top_caption().unwrap_or("unknown"),
                if members.is_empty() { "nothing".to_string() } else { members.join(", ") }
            )
        }
    }
}

impl ScorerKind {
    /// Score one node; the optional string is a warning (external scorer
    /// fallback).
    pub fn score(
        &self,
        graph: &SceneGraph,
        node: NodeRef,
        q: &str,
        ctx: &ScoreContext,
    ) -> (f64, Option<String>) {
        match self {
            ScorerKind::Distance => {
                let d = node_position(graph, node).distance(ctx.agent);
                let diag = ctx.map_diagonal.max(f64::EPSILON);
                (1.0 / (1.0 + d / diag), None)
            }
            ScorerKind::EmbeddingSim => {
                let s = match node {
                    NodeRef::Object(id) => trigram_cosine(&graph.objects[&id].category, q),
                    NodeRef::Region(id) => {
                        let r = &graph.regions[&id];
                        r.caption
                            .iter()
                            .map(|(l, c)| c * trigram_cosine(l, q))
                            .sum::<f64>()
                            .clamp(0.0, 1.0)
                    }
                };
                (s, None)
            }
            ScorerKind::PriorTable => (prior_table_score(graph, node, q), None),
            ScorerKind::ExternalLlm { endpoint, model, api_key, timeout_secs } => {
                let prompt = format!(
                    "On a scale 0-1, how likely is a {q} found near {}? Answer with a number.",
                    node_description(graph, node)
                );
                let body = serde_json::json!({
                    "model": model,
                    "messages": [{"role": "user", "content": prompt}],
                })
                .to_string();
                let reply = crate::imagine::http_post(endpoint, api_key, *timeout_secs, &body)
                    .and_then(|payload| {
                        let v: serde_json::Value =
                            serde_json::from_str(payload.trim()).map_err(|e| e.to_string())?;
                        v["choices"][0]["message"]["content"]
                            .as_str()
                            .and_then(|c| c.trim().parse::<f64>().ok())
                            .ok_or_else(|| "unparseable score".to_string())
                    });
                match reply {
                    Ok(s) => (s.clamp(0.0, 1.0), None),
                    Err(e) => (
                        prior_table_score(graph, node, q),
                        Some(format!("external scorer failed ({e}), using prior table")),
                    ),
                }
            }
        }
    }
}

/// All objects (observed and imagined) within `radius` of `frontier_point`
/// on `floor`, plus their parent regions.
pub fn extract_subgraph(
    graph: &SceneGraph,
    frontier_point: WorldPoint,
    floor: usize,
    radius: f64,
) -> Vec<NodeRef> {
    let mut nodes = BTreeSet::new();
    for o in graph.objects_on_floor(floor) {
        if o.position.distance(frontier_point) <= radius {
            nodes.insert(NodeRef::Object(o.id));
            if let Some(r) = graph.parent_region(o.id) {
                nodes.insert(NodeRef::Region(r.id));
            }
        }
    }
    nodes.into_iter().collect()
}

fn hierarchy_admits(node: NodeRef, hierarchy: HierarchyLevels) -> bool {
    match (node, hierarchy) {
        (NodeRef::Object(_), HierarchyLevels::ObjectOnly) => true,
        (NodeRef::Region(_), HierarchyLevels::RegionOnly) => true,
        (_, HierarchyLevels::ObjectAndRegion) => true,
        _ => false,
    }
}

/// S_s: maximum scorer value over the subgraph nodes the hierarchy setting
/// admits. Empty subgraph scores 0.
pub fn exploitation_gain(
    graph: &SceneGraph,
    subgraph: &[NodeRef],
    q: &str,
    scorer: &ScorerKind,
    hierarchy: HierarchyLevels,
    ctx: &ScoreContext,
) -> (f64, Option<NodeRef>, Vec<String>) {
    let mut best = 0.0;
    let mut best_node = None;
    let mut warnings = Vec::new();
    for &node in subgraph.iter().filter(|n| hierarchy_admits(**n, hierarchy)) {
        let (s, warn) = scorer.score(graph, node, q, ctx);
        warnings.extend(warn);
        if best_node.is_none() || s > best {
            best = s;
            best_node = Some(node);
        }
    }
    (best, best_node, warnings)
}

/// Keep at most `max_n` waypoints, always including the first and last,
/// uniformly spaced over the path indices.
pub fn subsample_waypoints(path: &[WorldPoint], max_n: usize) -> Vec<WorldPoint> {
    let max_n = max_n.max(1);
    if path.len() <= max_n {
        return path.to_vec();
    }
    let last = path.len() - 1;
    let mut picked: Vec<WorldPoint> = (0..max_n)
        .map(|i| path[(i * last) / (max_n - 1)])
        .collect();
    picked[max_n - 1] = path[last];
    picked
}

/// S_g along with the per-waypoint disjoint first-seen unknown-cell counts.
pub fn exploration_gain(
    grid: &OccupancyGrid,
    path: &[WorldPoint],
    gamma: f64,
    num_rays: usize,
    r_ray: f64,
) -> Result<(f64, Vec<usize>), GainError> {
    if path.is_empty() {
        return Err(GainError::EmptyPath);
    }
    let mut seen = BTreeSet::new();
    let mut counts = Vec::with_capacity(path.len());
    let mut total = 0.0;
    for (i, &p) in path.iter().enumerate() {
        let visible = raycast_visible_cells(grid, p, num_rays, r_ray);
        let mut new_unknown = 0usize;
        for cell in visible {
            if grid.state(cell) == CellState::Unknown && seen.insert(cell) {
                new_unknown += 1;
            }
        }
        counts.push(new_unknown);
        total += gamma.powi(i as i32) * new_unknown as f64;
    }
    let cell_area = grid.resolution * grid.resolution;
    let norm = path.len() as f64 * std::f64::consts::PI * r_ray * r_ray;
    Ok(((total * cell_area / norm).clamp(0.0, 1.0), counts))
}

/// Fallback rule: exploit when any S_s clears `lambda` (argmax S_s among
/// those), otherwise take the frontier with the largest S_g. Ties break by
/// geodesic distance, then lowest frontier id.
pub fn select_frontier(records: &[GainRecord], lambda: f64) -> Result<usize, GainError> {
    if records.is_empty() {
        return Err(GainError::NoRecords);
    }
    let exploit: Vec<&GainRecord> = records.iter().filter(|r| r.s_s > lambda).collect();
    let better = |a: &&GainRecord, b: &&GainRecord, key: fn(&GainRecord) -> f64| {
        key(a)
            .partial_cmp(&key(b))
            .unwrap()
            .then(b.distance.partial_cmp(&a.distance).unwrap())
            .then(b.frontier_id.cmp(&a.frontier_id))
    };
    let pick = if exploit.is_empty() {
        records.iter().max_by(|a, b| better(a, b, |r| r.s_g)).unwrap()
    } else {
        *exploit.iter().max_by(|a, b| better(a, b, |r| r.s_s)).unwrap()
    };
    Ok(pick.frontier_id)
}

/// Per-frontier inputs for `compute_gain_records`.
#[derive(Debug, Clone)]
pub struct FrontierInput {
    pub frontier_id: usize,
    pub representative: WorldPoint,
    /// Planned waypoints from the agent to the frontier, start and end
    /// included.
    pub path: Vec<WorldPoint>,
    pub distance: f64,
}

/// Compute both gains for every frontier; frontiers are independent and run
/// data-parallel over the shared snapshot.
pub fn compute_gain_records(
    graph: &SceneGraph,
    grid: &OccupancyGrid,
    frontiers: &[FrontierInput],
    q: &str,
    scorer: &ScorerKind,
    cfg: &GainConfig,
    agent: WorldPoint,
) -> (Vec<GainRecord>, Vec<String>) {
    let diag = ((grid.width as f64).hypot(grid.height_cells as f64)) * grid.resolution;
    let ctx = ScoreContext { agent, map_diagonal: diag };
    let results = crate::par::map_ref_ordered(frontiers, |f| {
        let subgraph = extract_subgraph(graph, f.representative, grid.floor_id, cfg.subgraph_radius);
        let (s_s, contributing_node, warnings) =
            exploitation_gain(graph, &subgraph, q, scorer, cfg.hierarchy, &ctx);
        let path = subsample_waypoints(&f.path, cfg.max_waypoints);
        let (s_g, _) = exploration_gain(grid, &path, cfg.gamma, cfg.num_rays, cfg.r_ray)
            .unwrap_or((0.0, Vec::new()));
        (
            GainRecord {
                frontier_id: f.frontier_id,
                s_s,
                s_g,
                contributing_node,
                path_cells: path,
                distance: f.distance,
            },
            warnings,
        )
    });
    let mut records = Vec::with_capacity(results.len());
    let mut warnings = Vec::new();
    for (r, w) in results {
        records.push(r);
        warnings.extend(w);
    }
    (records, warnings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Cell;
    use crate::graph::tests_support::bedroom_graph;
    use rand::{Rng, SeedableRng};

    fn open_grid(n: usize, state: CellState) -> OccupancyGrid {
        let mut g = OccupancyGrid::new(n, n, 0.05, WorldPoint::new(0.0, 0.0), 0);
        if state != CellState::Unknown {
            for r in 0..n {
                for c in 0..n {
                    g.set_state(Cell::new(r as i32, c as i32), state);
                }
            }
        }
        g
    }

    #[test]
    fn extract_subgraph_radius_boundary() {
        let graph = bedroom_graph();
        assert!(extract_subgraph(&SceneGraph::new(), WorldPoint::new(0.0, 0.0), 0, 3.0).is_empty());
        // Bed at (2, 2); frontier 2.9 m away picks it up with its region.
        let nodes = extract_subgraph(&graph, WorldPoint::new(2.0, 4.9), 0, 3.0);
        assert!(nodes.contains(&NodeRef::Object(ObjectId(0))));
        assert!(nodes.contains(&NodeRef::Region(RegionId(0))));
        // Frontier beyond the radius of everything: empty.
        let nodes = extract_subgraph(&graph, WorldPoint::new(30.0, 30.0), 0, 3.0);
        assert!(nodes.is_empty());
    }

    #[test]
    fn exploitation_empty_subgraph_is_zero() {
        let graph = SceneGraph::new();
        let ctx = ScoreContext { agent: WorldPoint::new(0.0, 0.0), map_diagonal: 10.0 };
        let (s, node, _) = exploitation_gain(
            &graph,
            &[],
            "bed",
            &ScorerKind::PriorTable,
            HierarchyLevels::RegionOnly,
            &ctx,
        );
        assert_eq!(s, 0.0);
        assert!(node.is_none());
    }

    #[test]
    fn prior_table_bedroom_scores_bed_with_table_maximum() {
        let mut graph = bedroom_graph();
        // Pure caption isolates the fixture entry.
        graph.regions.get_mut(&RegionId(0)).unwrap().caption = vec![("bedroom".into(), 1.0)];
        let ctx = ScoreContext { agent: WorldPoint::new(0.0, 0.0), map_diagonal: 10.0 };
        let nodes = vec![NodeRef::Region(RegionId(0))];
        let (s, node, _) = exploitation_gain(
            &graph,
            &nodes,
            "bed",
            &ScorerKind::PriorTable,
            HierarchyLevels::RegionOnly,
            &ctx,
        );
        let expected = cooccurrence().prob("bedroom", "bed");
        assert!((s - expected).abs() < 1e-12);
        assert_eq!(node, Some(NodeRef::Region(RegionId(0))));
        // That entry is the global maximum of P(bed | region).
        for label in cooccurrence().region_labels() {
            assert!(cooccurrence().prob(label, "bed") <= expected + 1e-12);
        }
    }

    #[test]
    fn all_scorers_stay_in_unit_interval() {
        let graph = bedroom_graph();
        let ctx = ScoreContext { agent: WorldPoint::new(1.0, 1.0), map_diagonal: 24.0 };
        let nodes = extract_subgraph(&graph, WorldPoint::new(2.0, 2.0), 0, 5.0);
        for scorer in [ScorerKind::Distance, ScorerKind::EmbeddingSim, ScorerKind::PriorTable] {
            for &n in &nodes {
                for q in ["bed", "toilet", "plant", "qqqq"] {
                    let (s, _) = scorer.score(&graph, n, q, &ctx);
                    assert!((0.0..=1.0).contains(&s), "{scorer:?} {q} -> {s}");
                }
            }
        }
    }

    #[test]
    fn external_scorer_unreachable_falls_back_to_prior() {
        let graph = bedroom_graph();
        let ctx = ScoreContext { agent: WorldPoint::new(0.0, 0.0), map_diagonal: 10.0 };
        let scorer = ScorerKind::ExternalLlm {
            endpoint: "http://127.0.0.1:1/v1/chat/completions".into(),
            model: "m".into(),
            api_key: "k".into(),
            timeout_secs: 1,
        };
        let node = NodeRef::Region(RegionId(0));
        let (s, warn) = scorer.score(&graph, node, "bed", &ctx);
        let (expected, _) = ScorerKind::PriorTable.score(&graph, node, "bed", &ctx);
        assert_eq!(s, expected);
        assert!(warn.unwrap().contains("prior table"));
    }

    #[test]
    fn exploration_empty_path_errors() {
        let g = open_grid(24, CellState::Free);
        assert!(matches!(
            exploration_gain(&g, &[], 0.8, 20, 4.0),
            Err(GainError::EmptyPath)
        ));
    }

    #[test]
    fn fully_known_map_zero_gain() {
        let g = open_grid(24, CellState::Free);
        let path = vec![WorldPoint::new(0.3, 0.3), WorldPoint::new(0.9, 0.9)];
        let (s, counts) = exploration_gain(&g, &path, 0.8, 20, 4.0).unwrap();
        assert_eq!(s, 0.0);
        assert!(counts.iter().all(|&c| c == 0));
    }

    #[test]
    fn single_waypoint_open_unknown_field_near_polygon_ratio() {
        // 12 m square, all unknown except the waypoint's own free cell;
        // expected ratio is the 20-gon / circle area ratio, about 0.9836.
        let mut g = OccupancyGrid::new(240, 240, 0.05, WorldPoint::new(0.0, 0.0), 0);
        let center = WorldPoint::new(6.0, 6.0);
        g.set_state(g.world_to_cell(center), CellState::Free);
        let (s, _) = exploration_gain(&g, &[center], 0.8, 20, 4.0).unwrap();
        assert!((s - 0.9836).abs() < 0.03, "got {s}");
    }

    /// Brute force: every unknown cell is credited to the first waypoint
    /// that sees it.
    fn oracle_counts(
        grid: &OccupancyGrid,
        path: &[WorldPoint],
        num_rays: usize,
        r_ray: f64,
    ) -> Vec<usize> {
        let visible: Vec<_> = path
            .iter()
            .map(|&p| raycast_visible_cells(grid, p, num_rays, r_ray))
            .collect();
        let mut counts = vec![0usize; path.len()];
        let mut all: BTreeSet<Cell> = BTreeSet::new();
        for v in &visible {
            all.extend(v.iter().copied());
        }
        for cell in all {
            if grid.state(cell) != CellState::Unknown {
                continue;
            }
            if let Some(i) = visible.iter().position(|v| v.contains(&cell)) {
                counts[i] += 1;
            }
        }
        counts
    }

    #[test]
    fn matches_first_visible_oracle_on_random_maps() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let mut g = open_grid(24, CellState::Free);
            let unknown_total = {
                let mut u = 0;
                for r in 0..24 {
                    for c in 0..24 {
                        match rng.gen_range(0..10) {
                            0..=3 => {
                                g.set_state(Cell::new(r, c), CellState::Unknown);
                                u += 1;
                            }
                            4 => g.set_state(Cell::new(r, c), CellState::Occupied),
                            _ => {}
                        }
                    }
                }
                u
            };
            let n = rng.gen_range(3..=12);
            let path: Vec<WorldPoint> = (0..n)
                .map(|_| WorldPoint::new(rng.gen_range(0.05..1.15), rng.gen_range(0.05..1.15)))
                .collect();
            let (_, counts) = exploration_gain(&g, &path, 0.8, 20, 1.0).unwrap();
            assert_eq!(counts, oracle_counts(&g, &path, 20, 1.0));
            assert!(counts.iter().sum::<usize>() <= unknown_total);
        }
    }

    #[test]
    fn gain_monotone_in_gamma() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut g = open_grid(24, CellState::Free);
        for r in 0..24 {
            for c in 12..24 {
                g.set_state(Cell::new(r, c), CellState::Unknown);
            }
        }
        let path: Vec<WorldPoint> = (0..6)
            .map(|_| WorldPoint::new(rng.gen_range(0.05..0.55), rng.gen_range(0.05..1.15)))
            .collect();
        let mut prev = 0.0;
        for gamma in [0.2, 0.5, 0.8, 1.0] {
            let (s, _) = exploration_gain(&g, &path, gamma, 20, 2.0).unwrap();
            assert!(s >= prev);
            prev = s;
        }
    }

    fn record(id: usize, s_s: f64, s_g: f64, distance: f64) -> GainRecord {
        GainRecord {
            frontier_id: id,
            s_s,
            s_g,
            contributing_node: None,
            path_cells: Vec::new(),
            distance,
        }
    }

    #[test]
    fn selector_branch_examples() {
        assert!(matches!(select_frontier(&[], 0.5), Err(GainError::NoRecords)));
        assert_eq!(select_frontier(&[record(3, 0.0, 0.0, 1.0)], 0.5).unwrap(), 3);
        // Exploitation branch active: argmax S_s despite larger S_g elsewhere.
        let recs = [record(0, 0.7, 0.1, 1.0), record(1, 0.6, 0.95, 1.0)];
        assert_eq!(select_frontier(&recs, 0.5).unwrap(), 0);
        // Fallback branch: argmax S_g.
        let recs = [record(0, 0.2, 0.4, 1.0), record(1, 0.3, 0.9, 1.0)];
        assert_eq!(select_frontier(&recs, 0.5).unwrap(), 1);
    }

    #[test]
    fn selector_ties_break_by_distance_then_id() {
        let recs = [record(2, 0.0, 0.5, 3.0), record(1, 0.0, 0.5, 2.0)];
        assert_eq!(select_frontier(&recs, 0.5).unwrap(), 1);
        let recs = [record(2, 0.0, 0.5, 2.0), record(1, 0.0, 0.5, 2.0)];
        assert_eq!(select_frontier(&recs, 0.5).unwrap(), 1);
    }

    #[test]
    fn selector_scale_invariances() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..1000 {
            let recs: Vec<GainRecord> = (0..rng.gen_range(1..6))
                .map(|i| record(i, rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(0.0..5.0)))
                .collect();
            let lambda = 0.5;
            let base = select_frontier(&recs, lambda).unwrap();
            let c: f64 = rng.gen_range(0.1..3.0);
            if recs.iter().any(|r| r.s_s > lambda) {
                // Exploitation active: S_g scaling is irrelevant.
                let scaled: Vec<GainRecord> = recs
                    .iter()
                    .map(|r| GainRecord { s_g: r.s_g * c, ..r.clone() })
                    .collect();
                assert_eq!(select_frontier(&scaled, lambda).unwrap(), base);
            } else {
                // Fallback active and scaling S_g preserves its argmax.
                let scaled: Vec<GainRecord> = recs
                    .iter()
                    .map(|r| GainRecord { s_g: r.s_g * c, ..r.clone() })
                    .collect();
                assert_eq!(select_frontier(&scaled, lambda).unwrap(), base);
            }
        }
    }

    #[test]
    fn subsample_keeps_endpoints_and_cap() {
        let path: Vec<WorldPoint> = (0..40).map(|i| WorldPoint::new(i as f64, 0.0)).collect();
        let s = subsample_waypoints(&path, 12);
        assert_eq!(s.len(), 12);
        assert_eq!(s[0].x, 0.0);
        assert_eq!(s[11].x, 39.0);
        assert!(s.windows(2).all(|w| w[0].x < w[1].x));
        assert_eq!(subsample_waypoints(&path[..5], 12).len(), 5);
    }

    #[test]
    fn compute_records_parallel_matches_expected_fields() {
        let mut g = open_grid(100, CellState::Free);
        for r in 0..100 {
            for c in 60..100 {
                g.set_state(Cell::new(r, c), CellState::Unknown);
            }
        }
        let graph = bedroom_graph();
        let frontiers: Vec<FrontierInput> = (0..4)
            .map(|i| FrontierInput {
                frontier_id: i,
                representative: WorldPoint::new(2.9, 0.5 + i as f64),
                path: vec![WorldPoint::new(1.0, 1.0), WorldPoint::new(2.9, 0.5 + i as f64)],
                distance: 2.0 + i as f64,
            })
            .collect();
        let cfg = GainConfig::default();
        let (records, warnings) = compute_gain_records(
            &graph,
            &g,
            &frontiers,
            "bed",
            &ScorerKind::PriorTable,
            &cfg,
            WorldPoint::new(1.0, 1.0),
        );
        assert!(warnings.is_empty());
        assert_eq!(records.len(), 4);
        for (i, r) in records.iter().enumerate() {
            assert_eq!(r.frontier_id, i);
            assert!((0.0..=1.0).contains(&r.s_s));
            assert!((0.0..=1.0).contains(&r.s_g));
        }
        // Frontiers near the bedroom carry its prior as S_s.
        assert!(records[0].s_s > 0.0);
    }
}
