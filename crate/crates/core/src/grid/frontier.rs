//! Frontier detection: boundary clusters between free and unknown space.

use super::{CellState, OccupancyGrid};
use crate::geom::{Cell, WorldPoint};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// A maximal 8-connected cluster of free cells that are 4-adjacent to
/// unknown space. The representative is the centroid snapped to the nearest
/// member cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Frontier {
    pub cells: Vec<Cell>,
    pub representative: Cell,
    pub size: usize,
}

impl Frontier {
    pub fn representative_world(&self, grid: &OccupancyGrid) -> WorldPoint {
        grid.cell_center(self.representative)
    }
}

fn is_frontier_cell(grid: &OccupancyGrid, cell: Cell) -> bool {
    grid.state(cell) == CellState::Free
        && cell
            .neighbors4()
            .iter()
            .any(|&n| grid.in_bounds(n) && grid.state(n) == CellState::Unknown)
}

/// All frontiers of size >= `min_frontier_size`, sorted by representative
/// (ascending row, then column).
pub fn detect_frontiers(grid: &OccupancyGrid, min_frontier_size: usize) -> Vec<Frontier> {
    let mut mask = vec![false; grid.width * grid.height_cells];
    for (cell, _) in grid.iter_cells() {
        if is_frontier_cell(grid, cell) {
            mask[cell.row as usize * grid.width + cell.col as usize] = true;
        }
    }

    let mut visited = vec![false; mask.len()];
    let mut frontiers = Vec::new();
    for r in 0..grid.height_cells {
        for c in 0..grid.width {
            let i = r * grid.width + c;
            if !mask[i] || visited[i] {
                continue;
            }
            // BFS over the 8-connected component.
            let mut component = Vec::new();
            let mut queue = VecDeque::from([Cell::new(r as i32, c as i32)]);
            visited[i] = true;
            while let Some(cur) = queue.pop_front() {
                component.push(cur);
                for n in cur.neighbors8() {
                    if !grid.in_bounds(n) {
                        continue;
                    }
                    let j = n.row as usize * grid.width + n.col as usize;
                    if mask[j] && !visited[j] {
                        visited[j] = true;
                        queue.push_back(n);
                    }
                }
            }
            if component.len() < min_frontier_size {
                continue;
            }
            component.sort();
            let cr = component.iter().map(|c| c.row as f64).sum::<f64>() / component.len() as f64;
            let cc = component.iter().map(|c| c.col as f64).sum::<f64>() / component.len() as f64;
            // Snap centroid to the nearest member; component is sorted so
            // distance ties resolve to the lowest (row, col).
            let representative = *component
                .iter()
                .min_by(|a, b| {
                    let da = (a.row as f64 - cr).powi(2) + (a.col as f64 - cc).powi(2);
                    let db = (b.row as f64 - cr).powi(2) + (b.col as f64 - cc).powi(2);
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap();
            let size = component.len();
            frontiers.push(Frontier {
                cells: component,
                representative,
                size,
            });
        }
    }
    frontiers.sort_by_key(|f| (f.representative.row, f.representative.col));
    frontiers
}
