//! Scene-graph completion over unexplored space: identify unknown regions,
//! build the bird's-eye-view context, run a pluggable predictor, and score
//! predicted graphs against ground truth.

mod bev;
mod metrics;
mod parse;
mod predict;

pub use bev::{build_bev, BevLayout, NearbyRegion, UnknownBlock};
pub use metrics::{graph_precision_recall, graph_precision_recall_at_k, MetricsError, PrMetrics};
pub use parse::{parse_prediction, serialize_predictions, ParseError};
pub use predict::{
    predict_scene_graph, AdjacencyPriorPredictor, HttpPredictor, PredictError, PredictOutcome,
    ScenePredictor, ScriptedPredictor,
};
pub(crate) use predict::http_post;

use crate::geom::{Cell, WorldPoint};
use crate::graph::SceneGraph;
use crate::grid::{CellState, OccupancyGrid};
use crate::graph::RegionId;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// An 8-connected component of unknown cells adjacent to free space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnknownRegion {
    pub id: usize,
    pub cells: Vec<Cell>,
    pub center: WorldPoint,
    /// Observed regions within the context radius, closest first.
    pub nearby_regions: Vec<(RegionId, f64)>,
}

/// An object predicted for an unknown region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedObject {
    pub category: String,
    pub center: WorldPoint,
    pub confidence: f64,
    pub corr_score: f64,
}

/// A predictor's answer for one unknown region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedRegion {
    pub target_unknown_region_id: usize,
    /// Top-2 labels, confidences summing to 1.
    pub caption: Vec<(String, f64)>,
    pub reasoning: String,
    pub predicted_objects: Vec<PredictedObject>,
}

/// Unknown components that touch the known-area boundary and are at least
/// `min_unknown_area` cells, ordered by center (row-major), with nearby
/// observed regions attached from the scene graph.
pub fn identify_unknown_regions(
    grid: &OccupancyGrid,
    graph: &SceneGraph,
    min_unknown_area: usize,
    context_radius: f64,
) -> Vec<UnknownRegion> {
    let mut visited = vec![false; grid.width * grid.height_cells];
    let mut found = Vec::new();
    for r in 0..grid.height_cells {
        for c in 0..grid.width {
            let i = r * grid.width + c;
            let start = Cell::new(r as i32, c as i32);
            if visited[i] || grid.state(start) != CellState::Unknown {
                continue;
            }
            let mut component = Vec::new();
            let mut touches_free = false;
            let mut queue = VecDeque::from([start]);
            visited[i] = true;
            while let Some(cur) = queue.pop_front() {
                component.push(cur);
                if cur
                    .neighbors4()
                    .iter()
                    .any(|&n| grid.in_bounds(n) && grid.state(n) == CellState::Free)
                {
                    touches_free = true;
                }
                for n in cur.neighbors8() {
                    if !grid.in_bounds(n) {
                        continue;
                    }
                    let j = n.row as usize * grid.width + n.col as usize;
                    if !visited[j] && grid.state(n) == CellState::Unknown {
                        visited[j] = true;
                        queue.push_back(n);
                    }
                }
            }
            if !touches_free || component.len() < min_unknown_area {
                continue;
            }
            component.sort();
            let cr = component.iter().map(|c| c.row as f64).sum::<f64>() / component.len() as f64;
            let cc = component.iter().map(|c| c.col as f64).sum::<f64>() / component.len() as f64;
            let center = grid.cell_center(Cell::new(cr.round() as i32, cc.round() as i32));
            found.push((component, center));
        }
    }
    found.sort_by(|a, b| (a.1.y, a.1.x).partial_cmp(&(b.1.y, b.1.x)).unwrap());

    found
        .into_iter()
        .enumerate()
        .map(|(id, (cells, center))| {
            let mut nearby: Vec<(RegionId, f64)> = graph
                .regions_on_floor(grid.floor_id)
                .filter(|r| r.provenance == crate::graph::Provenance::Observed)
                .map(|r| (r.id, r.center.distance(center)))
                .filter(|(_, d)| *d <= context_radius)
                .collect();
            nearby.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
            UnknownRegion {
                id,
                cells,
                center,
                nearby_regions: nearby,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::AgentPose;
    use crate::grid::{SweptCell, VisibilitySweep};

    fn grid_with(free: &[(i32, i32)], occupied: &[(i32, i32)]) -> OccupancyGrid {
        let mut g = OccupancyGrid::new(20, 20, 0.05, WorldPoint::new(0.0, 0.0), 0);
        let pose = AgentPose { x: 0.01, y: 0.01, z: 0.0, heading: 0.0, floor: 0 };
        let cells = free
            .iter()
            .map(|&(r, c)| SweptCell { cell: Cell::new(r, c), state: CellState::Free, height: 0.0 })
            .chain(occupied.iter().map(|&(r, c)| SweptCell {
                cell: Cell::new(r, c),
                state: CellState::Occupied,
                height: 0.5,
            }))
            .collect();
        g.integrate_observation(&pose, &VisibilitySweep { cells }).unwrap();
        g
    }

    #[test]
    fn fully_known_grid_has_no_unknown_regions() {
        let free: Vec<(i32, i32)> = (0..20).flat_map(|r| (0..20).map(move |c| (r, c))).collect();
        let g = grid_with(&free, &[]);
        assert!(identify_unknown_regions(&g, &SceneGraph::new(), 1, 4.0).is_empty());
    }

    #[test]
    fn unknown_block_adjacent_to_free_found() {
        // Left half free, right half unknown (200 cells).
        let free: Vec<(i32, i32)> = (0..20).flat_map(|r| (0..10).map(move |c| (r, c))).collect();
        let g = grid_with(&free, &[]);
        let regions = identify_unknown_regions(&g, &SceneGraph::new(), 40, 4.0);
        assert_eq!(regions.len(), 1);
        assert_eq!(regions[0].cells.len(), 200);
    }

    #[test]
    fn enclosed_unknown_component_excluded() {
        // Free everywhere except an occupied ring enclosing a 2x2 unknown
        // hole: the hole never touches free space.
        let mut free = Vec::new();
        let mut occ = Vec::new();
        for r in 0..20 {
            for c in 0..20 {
                let in_hole = (9..=10).contains(&r) && (9..=10).contains(&c);
                let in_ring = (8..=11).contains(&r) && (8..=11).contains(&c) && !in_hole;
                if in_ring {
                    occ.push((r, c));
                } else if !in_hole {
                    free.push((r, c));
                }
            }
        }
        let g = grid_with(&free, &occ);
        let regions = identify_unknown_regions(&g, &SceneGraph::new(), 1, 4.0);
        assert!(regions.is_empty(), "enclosed hole must be excluded");
    }

    #[test]
    fn nearby_regions_attached_within_radius() {
        let free: Vec<(i32, i32)> = (0..20).flat_map(|r| (0..10).map(move |c| (r, c))).collect();
        let g = grid_with(&free, &[]);
        let graph = crate::graph::tests_support::bedroom_graph();
        let regions = identify_unknown_regions(&g, &graph, 40, 10.0);
        assert_eq!(regions.len(), 1);
        assert_eq!(regions[0].nearby_regions.len(), 1);
        let regions = identify_unknown_regions(&g, &graph, 40, 0.1);
        assert!(regions[0].nearby_regions.is_empty());
    }
}
