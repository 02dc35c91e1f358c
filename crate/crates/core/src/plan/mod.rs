//! Geodesic planning: fast-marching distance fields on an inflated
//! traversable mask, waypoint extraction, discrete action emission, and the
//! cross-floor stair-climbing state machine.

mod fmm;
mod stairs;

pub use fmm::{extract_dense_path, extract_waypoints, fmm_distance_field, DistanceField};
pub use stairs::{
    stair_candidates, update_stair_state, StairCandidate, StairClimbState, StairDirection,
    StairEvent, StairUpdate,
};

use crate::geom::{wrap_angle, AgentPose, Cell, WorldPoint};
use crate::grid::{DerivedLayers, OccupancyGrid};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Discrete action set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AgentAction {
    MoveForward,
    TurnLeft,
    TurnRight,
    LookUp,
    LookDown,
    Stop,
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("goal cell ({0}, {1}) has no traversable cell within the snap radius")]
    GoalNotTraversable(i32, i32),
    #[error("start cell ({0}, {1}) cannot reach the goal")]
    Unreachable(i32, i32),
}

/// Planning view of one floor: the traversable mask after inflating
/// obstacles by the agent radius, with the grid's geometry.
#[derive(Debug, Clone)]
pub struct PlanGrid {
    pub width: usize,
    pub height_cells: usize,
    pub resolution: f64,
    pub origin: WorldPoint,
    pub floor: usize,
    mask: Vec<bool>,
}

impl PlanGrid {
    pub fn from_layers(grid: &OccupancyGrid, layers: &DerivedLayers, agent_radius: f64) -> Self {
        let (w, h) = (grid.width, grid.height_cells);
        let mut mask: Vec<bool> = (0..h)
            .flat_map(|r| (0..w).map(move |c| Cell::new(r as i32, c as i32)))
            .map(|cell| layers.is_traversable(cell) || layers.is_stair(cell))
            .collect();
        // Inflate: cells within the agent radius of a blocked observed cell
        // become untraversable.
        let radius_cells = agent_radius / grid.resolution;
        let reach = radius_cells.ceil() as i32;
        if reach > 0 {
            let blocked: Vec<Cell> = (0..h as i32)
                .flat_map(|r| (0..w as i32).map(move |c| Cell::new(r, c)))
                .filter(|&cell| {
                    use crate::grid::CellState;
                    grid.state(cell) == CellState::Occupied || layers.is_wall(cell)
                })
                .collect();
            for cell in blocked {
                for dr in -reach..=reach {
                    for dc in -reach..=reach {
                        if ((dr * dr + dc * dc) as f64).sqrt() > radius_cells {
                            continue;
                        }
                        let n = Cell::new(cell.row + dr, cell.col + dc);
                        if n.row >= 0 && n.col >= 0 && (n.row as usize) < h && (n.col as usize) < w {
                            mask[n.row as usize * w + n.col as usize] = false;
                        }
                    }
                }
            }
        }
        PlanGrid {
            width: w,
            height_cells: h,
            resolution: grid.resolution,
            origin: grid.origin,
            floor: grid.floor_id,
            mask,
        }
    }

    /// Uninflated mask straight from a boolean raster, for tests and oracles.
    pub fn from_mask(width: usize, height_cells: usize, resolution: f64, mask: Vec<bool>) -> Self {
        assert_eq!(mask.len(), width * height_cells);
        PlanGrid {
            width,
            height_cells,
            resolution,
            origin: WorldPoint::new(0.0, 0.0),
            floor: 0,
            mask,
        }
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.row >= 0
            && cell.col >= 0
            && (cell.row as usize) < self.height_cells
            && (cell.col as usize) < self.width
    }

    pub fn traversable(&self, cell: Cell) -> bool {
        self.in_bounds(cell) && self.mask[cell.row as usize * self.width + cell.col as usize]
    }

    pub fn cell_center(&self, cell: Cell) -> WorldPoint {
        WorldPoint::new(
            self.origin.x + (cell.col as f64 + 0.5) * self.resolution,
            self.origin.y + (cell.row as f64 + 0.5) * self.resolution,
        )
    }

    pub fn world_to_cell(&self, p: WorldPoint) -> Cell {
        Cell::new(
            ((p.y - self.origin.y) / self.resolution).floor() as i32,
            ((p.x - self.origin.x) / self.resolution).floor() as i32,
        )
    }
}

const TURN_STEP_DEG: f64 = 30.0;
const HEADING_THRESHOLD_DEG: f64 = 15.0;

/// Emit the next discrete action toward `waypoint`. `stop_distance` is
/// `Some(threshold)` only when the waypoint is the verified goal.
pub fn next_action(pose: &AgentPose, waypoint: WorldPoint, stop_distance: Option<f64>) -> AgentAction {
    let d = WorldPoint::new(pose.x, pose.y).distance(waypoint);
    if let Some(threshold) = stop_distance {
        if d <= threshold {
            return AgentAction::Stop;
        }
    }
    let desired = (waypoint.y - pose.y).atan2(waypoint.x - pose.x);
    let diff = wrap_angle(desired - pose.heading);
    let threshold = HEADING_THRESHOLD_DEG.to_radians();
    if diff.abs() > threshold {
        // wrap_angle maps an exact reversal to +pi, so the tie goes left.
        if diff > 0.0 {
            AgentAction::TurnLeft
        } else {
            AgentAction::TurnRight
        }
    } else {
        AgentAction::MoveForward
    }
}

/// Turn angle per TURN action, radians.
pub fn turn_step() -> f64 {
    TURN_STEP_DEG.to_radians()
}

/// True when the straight segment a-b stays on traversable cells. Samples
/// within `slack` of `a` are exempt, so a pose that drifted onto an
/// inflated cell can still leave it.
pub fn segment_clear(pg: &PlanGrid, a: WorldPoint, b: WorldPoint, slack: f64) -> bool {
    let d = a.distance(b);
    let steps = (d / (pg.resolution / 2.0)).ceil() as usize;
    for s in 0..=steps {
        let t = s as f64 / steps.max(1) as f64;
        if t * d <= slack {
            continue;
        }
        let p = WorldPoint::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
        if !pg.traversable(pg.world_to_cell(p)) {
            return false;
        }
    }
    true
}

/// Advance a path cursor: consume waypoints already reached or safely
/// shortcut (straight segment clear, within the lookahead), returning the
/// index to steer toward.
pub fn advance_cursor(
    pg: &PlanGrid,
    path: &[WorldPoint],
    mut idx: usize,
    from: WorldPoint,
    lookahead: f64,
) -> usize {
    let last = path.len().saturating_sub(1);
    while idx < last {
        let reached = from.distance(path[idx]) < 0.15;
        let shortcut = from.distance(path[idx + 1]) <= lookahead
            && segment_clear(pg, from, path[idx + 1], 0.1);
        if reached || shortcut {
            idx += 1;
        } else {
            break;
        }
    }
    idx
}
