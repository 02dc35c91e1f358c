//! Per-floor occupancy/height grids, derived 2.5-D layers, frontier
//! detection, and raycast visibility. The geometric substrate for every
//! other module.

mod frontier;
mod io;
mod layers;
mod raycast;

pub use frontier::{detect_frontiers, Frontier};
pub use io::{export_float_raster, export_pgm, import_float_raster};
pub use layers::{
    compute_gradient_map, compute_traversable_and_stair, derive_layers, update_layers,
    DerivedLayers, LayerParams,
};
pub use raycast::raycast_visible_cells;

use crate::geom::{AgentPose, Cell, WorldPoint};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Occupancy state of a single cell. Every cell starts `Unknown`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellState {
    Unknown,
    Free,
    Occupied,
}

#[derive(Debug, Error)]
pub enum GridError {
    #[error("cell ({0}, {1}) out of grid bounds")]
    OutOfBounds(i32, i32),
    #[error("pose ({0:.2}, {1:.2}) outside grid")]
    PoseOutOfBounds(f64, f64),
    #[error("observation floor {observed} does not match grid floor {grid}")]
    FloorMismatch { observed: usize, grid: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad raster format: {0}")]
    BadFormat(String),
}

/// One cell revealed by an observation sweep.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SweptCell {
    pub cell: Cell,
    /// `Free` or `Occupied`; a sweep never reports `Unknown`.
    pub state: CellState,
    /// Surface height in meters at this cell.
    pub height: f64,
}

/// A batch of cells revealed by one observation.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct VisibilitySweep {
    pub cells: Vec<SweptCell>,
}

/// Per-floor 2-D occupancy lattice with a height layer.
///
/// `cells` and `height_map` are row-major; `height_map` is NaN wherever the
/// cell is still `Unknown`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OccupancyGrid {
    pub width: usize,
    pub height_cells: usize,
    pub resolution: f64,
    pub origin: WorldPoint,
    pub floor_id: usize,
    cells: Vec<CellState>,
    height_map: Vec<f64>,
}

pub const DEFAULT_MAP_SIZE: usize = 480;
pub const DEFAULT_RESOLUTION: f64 = 0.05;

impl OccupancyGrid {
    pub fn new(
        width: usize,
        height_cells: usize,
        resolution: f64,
        origin: WorldPoint,
        floor_id: usize,
    ) -> Self {
        assert!(resolution > 0.0, "resolution must be positive");
        OccupancyGrid {
            width,
            height_cells,
            resolution,
            origin,
            floor_id,
            cells: vec![CellState::Unknown; width * height_cells],
            height_map: vec![f64::NAN; width * height_cells],
        }
    }

    /// The default 480x480 map at 0.05 m/cell with origin at (0, 0).
    pub fn default_map(floor_id: usize) -> Self {
        Self::new(
            DEFAULT_MAP_SIZE,
            DEFAULT_MAP_SIZE,
            DEFAULT_RESOLUTION,
            WorldPoint::new(0.0, 0.0),
            floor_id,
        )
    }

    #[inline]
    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.row >= 0
            && cell.col >= 0
            && (cell.row as usize) < self.height_cells
            && (cell.col as usize) < self.width
    }

    #[inline]
    fn idx(&self, cell: Cell) -> usize {
        cell.row as usize * self.width + cell.col as usize
    }

    /// State of a cell; out-of-bounds reads as `Unknown`.
    #[inline]
    pub fn state(&self, cell: Cell) -> CellState {
        if self.in_bounds(cell) {
            self.cells[self.idx(cell)]
        } else {
            CellState::Unknown
        }
    }

    pub fn set_state(&mut self, cell: Cell, state: CellState) {
        if self.in_bounds(cell) {
            let i = self.idx(cell);
            self.cells[i] = state;
        }
    }

    /// Height at a cell, NaN if unobserved or out of bounds.
    #[inline]
    pub fn height_at(&self, cell: Cell) -> f64 {
        if self.in_bounds(cell) {
            self.height_map[self.idx(cell)]
        } else {
            f64::NAN
        }
    }

    pub fn set_height(&mut self, cell: Cell, h: f64) {
        if self.in_bounds(cell) {
            let i = self.idx(cell);
            self.height_map[i] = h;
        }
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    pub fn world_to_cell(&self, p: WorldPoint) -> Cell {
        Cell::new(
            ((p.y - self.origin.y) / self.resolution).floor() as i32,
            ((p.x - self.origin.x) / self.resolution).floor() as i32,
        )
    }

    /// World coordinates of a cell's center.
    pub fn cell_center(&self, cell: Cell) -> WorldPoint {
        WorldPoint::new(
            self.origin.x + (cell.col as f64 + 0.5) * self.resolution,
            self.origin.y + (cell.row as f64 + 0.5) * self.resolution,
        )
    }

    pub fn unknown_count(&self) -> usize {
        self.cells
            .iter()
            .filter(|&&s| s == CellState::Unknown)
            .count()
    }

    pub fn iter_cells(&self) -> impl Iterator<Item = (Cell, CellState)> + '_ {
        (0..self.height_cells).flat_map(move |r| {
            (0..self.width).map(move |c| {
                let cell = Cell::new(r as i32, c as i32);
                (cell, self.cells[r * self.width + c])
            })
        })
    }

    /// Fold one observation sweep into the grid.
    ///
    /// Swept cells transition `Unknown` to `Free`/`Occupied`; `Occupied`
    /// wins over `Free` on conflict within one sweep; later sweeps may flip
    /// Free/Occupied but nothing ever reverts to `Unknown`. Heights are
    /// written at every swept cell.
    pub fn integrate_observation(
        &mut self,
        pose: &AgentPose,
        sweep: &VisibilitySweep,
    ) -> Result<(), GridError> {
        let pose_cell = self.world_to_cell(pose.point());
        if !self.in_bounds(pose_cell) {
            return Err(GridError::PoseOutOfBounds(pose.x, pose.y));
        }
        if pose.floor != self.floor_id {
            return Err(GridError::FloorMismatch {
                observed: pose.floor,
                grid: self.floor_id,
            });
        }
        for sc in &sweep.cells {
            if !self.in_bounds(sc.cell) {
                return Err(GridError::OutOfBounds(sc.cell.row, sc.cell.col));
            }
        }
        // Free first, Occupied second: Occupied wins within the sweep.
        for pass in [CellState::Free, CellState::Occupied] {
            for sc in sweep.cells.iter().filter(|sc| sc.state == pass) {
                let i = self.idx(sc.cell);
                self.cells[i] = sc.state;
                self.height_map[i] = sc.height;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pose() -> AgentPose {
        AgentPose {
            x: 0.5,
            y: 0.5,
            z: 0.0,
            heading: 0.0,
            floor: 0,
        }
    }

    fn small_grid() -> OccupancyGrid {
        OccupancyGrid::new(20, 20, 0.05, WorldPoint::new(0.0, 0.0), 0)
    }

    #[test]
    fn empty_sweep_is_identity() {
        let mut g = small_grid();
        let before = g.clone();
        g.integrate_observation(&pose(), &VisibilitySweep::default())
            .unwrap();
        assert_eq!(before.cells, g.cells);
    }

    #[test]
    fn single_cell_sweep() {
        let mut g = small_grid();
        let sweep = VisibilitySweep {
            cells: vec![SweptCell {
                cell: Cell::new(5, 5),
                state: CellState::Free,
                height: 0.0,
            }],
        };
        g.integrate_observation(&pose(), &sweep).unwrap();
        let non_unknown = g
            .cells()
            .iter()
            .filter(|&&s| s != CellState::Unknown)
            .count();
        assert_eq!(non_unknown, 1);
        assert_eq!(g.state(Cell::new(5, 5)), CellState::Free);
        assert_eq!(g.height_at(Cell::new(5, 5)), 0.0);
    }

    #[test]
    fn occupied_wins_across_sweeps() {
        // Two sweeps marking (5,5) Free then Occupied: the later sweep wins.
        let mut g = small_grid();
        let free = VisibilitySweep {
            cells: vec![SweptCell {
                cell: Cell::new(5, 5),
                state: CellState::Free,
                height: 0.0,
            }],
        };
        let occ = VisibilitySweep {
            cells: vec![SweptCell {
                cell: Cell::new(5, 5),
                state: CellState::Occupied,
                height: 0.5,
            }],
        };
        g.integrate_observation(&pose(), &free).unwrap();
        g.integrate_observation(&pose(), &occ).unwrap();
        assert_eq!(g.state(Cell::new(5, 5)), CellState::Occupied);
    }

    #[test]
    fn occupied_wins_within_one_sweep() {
        let mut g = small_grid();
        let sweep = VisibilitySweep {
            cells: vec![
                SweptCell {
                    cell: Cell::new(3, 3),
                    state: CellState::Occupied,
                    height: 0.5,
                },
                SweptCell {
                    cell: Cell::new(3, 3),
                    state: CellState::Free,
                    height: 0.0,
                },
            ],
        };
        g.integrate_observation(&pose(), &sweep).unwrap();
        assert_eq!(g.state(Cell::new(3, 3)), CellState::Occupied);
    }

    #[test]
    fn pose_outside_grid_rejected() {
        let mut g = small_grid();
        let p = AgentPose {
            x: -5.0,
            y: 0.5,
            z: 0.0,
            heading: 0.0,
            floor: 0,
        };
        assert!(matches!(
            g.integrate_observation(&p, &VisibilitySweep::default()),
            Err(GridError::PoseOutOfBounds(..))
        ));
    }

    #[test]
    fn monotone_knowledge() {
        // Unknown count never increases over a sequence of random sweeps.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut g = small_grid();
        let mut last = g.unknown_count();
        for _ in 0..50 {
            let n = rng.gen_range(0..10);
            let cells = (0..n)
                .map(|_| SweptCell {
                    cell: Cell::new(rng.gen_range(0..20), rng.gen_range(0..20)),
                    state: if rng.gen_bool(0.5) {
                        CellState::Free
                    } else {
                        CellState::Occupied
                    },
                    height: 0.0,
                })
                .collect();
            g.integrate_observation(&pose(), &VisibilitySweep { cells })
                .unwrap();
            let now = g.unknown_count();
            assert!(now <= last);
            last = now;
        }
    }
}
