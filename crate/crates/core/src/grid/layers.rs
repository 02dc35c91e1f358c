//! Derived 2.5-D layers: gradient, wall, traversable, and stair masks.

use super::{CellState, OccupancyGrid};
use crate::geom::Cell;
use serde::{Deserialize, Serialize};

/// Thresholds for layer derivation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LayerParams {
    /// Gradient at or above this is a wall (meters).
    pub wall_threshold: f64,
    /// Gradient at or below this is traversable (meters).
    pub traversable_threshold: f64,
    /// Traversable cells with gradient above this count as stairs (meters).
    pub flat_epsilon: f64,
}

impl Default for LayerParams {
    fn default() -> Self {
        LayerParams {
            wall_threshold: 1.2,
            traversable_threshold: 0.3,
            flat_epsilon: 0.02,
        }
    }
}

/// Row-major rasters derived from the height map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DerivedLayers {
    pub width: usize,
    pub height_cells: usize,
    pub gradient: Vec<f64>,
    pub wall: Vec<bool>,
    pub traversable: Vec<bool>,
    pub stair: Vec<bool>,
}

impl DerivedLayers {
    #[inline]
    fn idx(&self, cell: Cell) -> Option<usize> {
        if cell.row >= 0
            && cell.col >= 0
            && (cell.row as usize) < self.height_cells
            && (cell.col as usize) < self.width
        {
            Some(cell.row as usize * self.width + cell.col as usize)
        } else {
            None
        }
    }

    pub fn gradient_at(&self, cell: Cell) -> f64 {
        self.idx(cell).map_or(0.0, |i| self.gradient[i])
    }

    pub fn is_wall(&self, cell: Cell) -> bool {
        self.idx(cell).is_some_and(|i| self.wall[i])
    }

    pub fn is_traversable(&self, cell: Cell) -> bool {
        self.idx(cell).is_some_and(|i| self.traversable[i])
    }

    pub fn is_stair(&self, cell: Cell) -> bool {
        self.idx(cell).is_some_and(|i| self.stair[i])
    }
}

/// Gradient map (max absolute height difference to any 8-neighbor with a
/// defined height) and the wall mask from the 1.2 m threshold. Cells without
/// a defined height or without any valid neighbor get gradient 0.
pub fn compute_gradient_map(grid: &OccupancyGrid, params: &LayerParams) -> DerivedLayers {
    let n = grid.width * grid.height_cells;
    let mut gradient = vec![0.0f64; n];
    let mut wall = vec![false; n];
    for r in 0..grid.height_cells {
        for c in 0..grid.width {
            let cell = Cell::new(r as i32, c as i32);
            let h = grid.height_at(cell);
            if h.is_nan() {
                continue;
            }
            let mut g = 0.0f64;
            for nb in cell.neighbors8() {
                let hn = grid.height_at(nb);
                if hn.is_nan() {
                    continue;
                }
                g = g.max((h - hn).abs());
            }
            let i = r * grid.width + c;
            gradient[i] = g;
            wall[i] = g >= params.wall_threshold;
        }
    }
    DerivedLayers {
        width: grid.width,
        height_cells: grid.height_cells,
        gradient,
        wall,
        traversable: vec![false; n],
        stair: vec![false; n],
    }
}

/// Fill the traversable and stair masks from the gradient map.
///
/// Traversable: observed, not occupied, and gradient within the climbable
/// band. Stair: traversable but not flat.
pub fn compute_traversable_and_stair(
    grid: &OccupancyGrid,
    layers: &mut DerivedLayers,
    params: &LayerParams,
) {
    for r in 0..grid.height_cells {
        for c in 0..grid.width {
            let cell = Cell::new(r as i32, c as i32);
            let i = r * grid.width + c;
            let observed = grid.state(cell) != CellState::Unknown;
            let occupied = grid.state(cell) == CellState::Occupied;
            let t = observed && !occupied && layers.gradient[i] <= params.traversable_threshold;
            layers.traversable[i] = t;
            layers.stair[i] = t && layers.gradient[i] > params.flat_epsilon;
        }
    }
}

/// Convenience: gradient + wall + traversable + stair in one pass.
pub fn derive_layers(grid: &OccupancyGrid, params: &LayerParams) -> DerivedLayers {
    let mut layers = compute_gradient_map(grid, params);
    compute_traversable_and_stair(grid, &mut layers, params);
    layers
}

/// Refresh the layers only where an observation changed the grid. A height
/// change at a cell can only move gradients at that cell and its
/// 8-neighbors, so recomputing that neighborhood matches a full rebuild.
pub fn update_layers(
    grid: &OccupancyGrid,
    layers: &mut DerivedLayers,
    changed: &[Cell],
    params: &LayerParams,
) {
    let mut affected = std::collections::BTreeSet::new();
    for &cell in changed {
        if grid.in_bounds(cell) {
            affected.insert(cell);
        }
        for n in cell.neighbors8() {
            if grid.in_bounds(n) {
                affected.insert(n);
            }
        }
    }
    for cell in affected {
        let i = cell.row as usize * grid.width + cell.col as usize;
        let h = grid.height_at(cell);
        let mut g = 0.0f64;
        if !h.is_nan() {
            for nb in cell.neighbors8() {
                let hn = grid.height_at(nb);
                if !hn.is_nan() {
                    g = g.max((h - hn).abs());
                }
            }
        }
        layers.gradient[i] = g;
        layers.wall[i] = !h.is_nan() && g >= params.wall_threshold;
        let observed = grid.state(cell) != CellState::Unknown;
        let occupied = grid.state(cell) == CellState::Occupied;
        let t = observed && !occupied && g <= params.traversable_threshold;
        layers.traversable[i] = t;
        layers.stair[i] = t && g > params.flat_epsilon;
    }
}
