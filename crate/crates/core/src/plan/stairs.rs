//! Three-stage stair climbing: approach the stair entrance, climb toward
//! the local height extreme, confirm arrival on the new level by counting
//! floor points at the agent's base height.

use crate::config::PlannerConfig;
use crate::geom::{AgentPose, Cell, WorldPoint};
use crate::grid::{CellState, DerivedLayers, OccupancyGrid};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StairDirection {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StairClimbState {
    Inactive,
    ApproachEntrance { entrance: Cell, direction: StairDirection },
    Climbing { direction: StairDirection, start_z: f64 },
    Confirming { direction: StairDirection },
}

/// One connected stair component.
#[derive(Debug, Clone)]
pub struct StairCandidate {
    pub cells: Vec<Cell>,
    pub mean_height: f64,
    pub direction: StairDirection,
    /// Lowest cell for up candidates, highest for down: the stair entrance.
    pub entrance: Cell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StairEvent {
    /// Confirmed arrival on an adjacent level.
    FloorChange(StairDirection),
    /// No frontiers and no stair candidates: the episode is exhausted.
    Exhausted,
}

#[derive(Debug, Clone)]
pub struct StairUpdate {
    pub state: StairClimbState,
    /// Local navigation goal while the machine is active.
    pub goal: Option<Cell>,
    pub event: Option<StairEvent>,
}

/// Connected stair components split into up/down by mean height against the
/// agent's base height above the current floor plane.
pub fn stair_candidates(
    grid: &OccupancyGrid,
    layers: &DerivedLayers,
    pose_z: f64,
    base_height: f64,
) -> Vec<StairCandidate> {
    let (w, h) = (grid.width, grid.height_cells);
    let mut visited = vec![false; w * h];
    let mut out = Vec::new();
    for r in 0..h as i32 {
        for c in 0..w as i32 {
            let start = Cell::new(r, c);
            let i = r as usize * w + c as usize;
            if visited[i] || !layers.is_stair(start) {
                continue;
            }
            visited[i] = true;
            let mut cells = Vec::new();
            let mut queue = VecDeque::from([start]);
            while let Some(cur) = queue.pop_front() {
                cells.push(cur);
                for n in cur.neighbors8() {
                    if !grid.in_bounds(n) {
                        continue;
                    }
                    let j = n.row as usize * w + n.col as usize;
                    if !visited[j] && layers.is_stair(n) {
                        visited[j] = true;
                        queue.push_back(n);
                    }
                }
            }
            cells.sort();
            let mean_height =
                cells.iter().map(|&c| grid.height_at(c)).sum::<f64>() / cells.len() as f64;
            let direction = if mean_height > pose_z + base_height {
                StairDirection::Up
            } else {
                StairDirection::Down
            };
            let entrance = *cells
                .iter()
                .min_by(|a, b| {
                    let (ha, hb) = (grid.height_at(**a), grid.height_at(**b));
                    let key = match direction {
                        StairDirection::Up => ha.partial_cmp(&hb).unwrap(),
                        StairDirection::Down => hb.partial_cmp(&ha).unwrap(),
                    };
                    key.then(a.cmp(b))
                })
                .unwrap();
            out.push(StairCandidate { cells, mean_height, direction, entrance });
        }
    }
    out
}

/// Observed cells within the tolerance of the agent's base height: the
/// new-level floor-point count.
pub fn floor_point_count(grid: &OccupancyGrid, pose_z: f64, tolerance: f64) -> usize {
    let mut count = 0;
    for r in 0..grid.height_cells as i32 {
        for c in 0..grid.width as i32 {
            let cell = Cell::new(r, c);
            if grid.state(cell) != CellState::Unknown && (grid.height_at(cell) - pose_z).abs() <= tolerance
            {
                count += 1;
            }
        }
    }
    count
}

fn climbing_goal(
    grid: &OccupancyGrid,
    layers: &DerivedLayers,
    pose: &AgentPose,
    direction: StairDirection,
    window: f64,
) -> Option<Cell> {
    let lo = grid.world_to_cell(WorldPoint::new(pose.x - window, pose.y - window));
    let hi = grid.world_to_cell(WorldPoint::new(pose.x + window, pose.y + window));
    let mut best: Option<(f64, Cell)> = None;
    for r in lo.row..=hi.row {
        for c in lo.col..=hi.col {
            let cell = Cell::new(r, c);
            if !grid.in_bounds(cell) || !(layers.is_traversable(cell) || layers.is_stair(cell)) {
                continue;
            }
            let h = grid.height_at(cell);
            let better = match (&best, direction) {
                (None, _) => true,
                (Some((bh, bc)), StairDirection::Up) => h > *bh || (h == *bh && cell < *bc),
                (Some((bh, bc)), StairDirection::Down) => h < *bh || (h == *bh && cell < *bc),
            };
            if better {
                best = Some((h, cell));
            }
        }
    }
    best.map(|(_, c)| c)
}

/// Advance the stair machine one step. Only consulted when navigation has
/// no verified goal; `frontier_count` gates activation.
pub fn update_stair_state(
    state: StairClimbState,
    grid: &OccupancyGrid,
    layers: &DerivedLayers,
    pose: &AgentPose,
    frontier_count: usize,
    cfg: &PlannerConfig,
) -> StairUpdate {
    match state {
        StairClimbState::Inactive => {
            if frontier_count > 0 {
                return StairUpdate { state, goal: None, event: None };
            }
            let candidates = stair_candidates(grid, layers, pose.z, cfg.base_height);
            if candidates.is_empty() {
                return StairUpdate { state, goal: None, event: Some(StairEvent::Exhausted) };
            }
            // Up beats down; nearest entrance breaks ties.
            let here = WorldPoint::new(pose.x, pose.y);
            let pick = candidates
                .iter()
                .min_by(|a, b| {
                    let rank = |c: &StairCandidate| match c.direction {
                        StairDirection::Up => 0,
                        StairDirection::Down => 1,
                    };
                    rank(a).cmp(&rank(b)).then(
                        grid.cell_center(a.entrance)
                            .distance(here)
                            .partial_cmp(&grid.cell_center(b.entrance).distance(here))
                            .unwrap(),
                    )
                })
                .unwrap();
            StairUpdate {
                state: StairClimbState::ApproachEntrance {
                    entrance: pick.entrance,
                    direction: pick.direction,
                },
                goal: Some(pick.entrance),
                event: None,
            }
        }
        StairClimbState::ApproachEntrance { entrance, direction } => {
            let d = grid.cell_center(entrance).distance(WorldPoint::new(pose.x, pose.y));
            if d <= cfg.arrival_radius {
                let state = StairClimbState::Climbing { direction, start_z: pose.z };
                let goal = climbing_goal(grid, layers, pose, direction, cfg.stair_window);
                StairUpdate { state, goal, event: None }
            } else {
                StairUpdate { state, goal: Some(entrance), event: None }
            }
        }
        StairClimbState::Climbing { direction, start_z } => {
            let climbed = match direction {
                StairDirection::Up => pose.z - start_z,
                StairDirection::Down => start_z - pose.z,
            };
            // Confirmation needs real elevation change plus enough observed
            // floor at the new base height.
            if climbed > 0.5
                && floor_point_count(grid, pose.z, cfg.base_height) > cfg.floor_points_threshold
            {
                return StairUpdate {
                    state: StairClimbState::Confirming { direction },
                    goal: None,
                    event: None,
                };
            }
            let goal = climbing_goal(grid, layers, pose, direction, cfg.stair_window);
            StairUpdate { state, goal, event: None }
        }
        StairClimbState::Confirming { direction } => StairUpdate {
            state: StairClimbState::Inactive,
            goal: None,
            event: Some(StairEvent::FloorChange(direction)),
        },
    }
}
