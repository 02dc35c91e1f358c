//! First-order upwind fast-marching eikonal solve plus gradient-descent
//! path extraction.

use super::{PlanError, PlanGrid};
use crate::geom::{Cell, WorldPoint};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Geodesic distance to `goal` in meters; infinity off the reachable set.
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub goal: Cell,
    values: Vec<f64>,
    width: usize,
}

impl DistanceField {
    pub fn value(&self, cell: Cell) -> f64 {
        if cell.row < 0 || cell.col < 0 || cell.col as usize >= self.width {
            return f64::INFINITY;
        }
        self.values
            .get(cell.row as usize * self.width + cell.col as usize)
            .copied()
            .unwrap_or(f64::INFINITY)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(PartialEq)]
struct HeapKey(f64);
impl Eq for HeapKey {}
impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn snap_goal(pg: &PlanGrid, goal: Cell, snap_radius: f64) -> Result<Cell, PlanError> {
    if pg.traversable(goal) {
        return Ok(goal);
    }
    let reach = (snap_radius / pg.resolution).ceil() as i32;
    let mut best: Option<(f64, Cell)> = None;
    for dr in -reach..=reach {
        for dc in -reach..=reach {
            let cand = Cell::new(goal.row + dr, goal.col + dc);
            if !pg.traversable(cand) {
                continue;
            }
            let d = ((dr * dr + dc * dc) as f64).sqrt() * pg.resolution;
            if d <= snap_radius && best.map_or(true, |(bd, bc)| d < bd || (d == bd && cand < bc)) {
                best = Some((d, cand));
            }
        }
    }
    best.map(|(_, c)| c)
        .ok_or(PlanError::GoalNotTraversable(goal.row, goal.col))
}

/// Unit-speed eikonal solve over the traversable mask. A non-traversable
/// goal snaps to the nearest traversable cell within `snap_radius`.
pub fn fmm_distance_field(
    pg: &PlanGrid,
    goal: Cell,
    snap_radius: f64,
) -> Result<DistanceField, PlanError> {
    let goal = snap_goal(pg, goal, snap_radius)?;
    let (w, h) = (pg.width, pg.height_cells);
    let res = pg.resolution;
    let mut values = vec![f64::INFINITY; w * h];
    let mut frozen = vec![false; w * h];
    let idx = |c: Cell| c.row as usize * w + c.col as usize;
    let mut heap = BinaryHeap::new();
    // Exact Euclidean seeding in a small disk around the goal tames the
    // first-order scheme's near-source overestimate.
    const SEED_RADIUS: i32 = 3;
    for dr in -SEED_RADIUS..=SEED_RADIUS {
        for dc in -SEED_RADIUS..=SEED_RADIUS {
            let cell = Cell::new(goal.row + dr, goal.col + dc);
            if !pg.traversable(cell) {
                continue;
            }
            let d = ((dr * dr + dc * dc) as f64).sqrt();
            if d <= SEED_RADIUS as f64 {
                values[idx(cell)] = d * res;
                heap.push(Reverse((HeapKey(d * res), cell)));
            }
        }
    }

    while let Some(Reverse((HeapKey(t), cell))) = heap.pop() {
        let i = idx(cell);
        if frozen[i] || t > values[i] {
            continue;
        }
        frozen[i] = true;
        for n in cell.neighbors8() {
            if !pg.traversable(n) || frozen[idx(n)] {
                continue;
            }
            if n.row != cell.row
                && n.col != cell.col
                && !(pg.traversable(Cell::new(cell.row, n.col))
                    && pg.traversable(Cell::new(n.row, cell.col)))
            {
                continue;
            }
            // Upwind values along each axis.
            let value_at = |c: Cell| {
                if pg.traversable(c) { values[idx(c)] } else { f64::INFINITY }
            };
            let tx = value_at(Cell::new(n.row, n.col - 1)).min(value_at(Cell::new(n.row, n.col + 1)));
            let ty = value_at(Cell::new(n.row - 1, n.col)).min(value_at(Cell::new(n.row + 1, n.col)));
            let (a, b) = (tx.min(ty), tx.max(ty));
            let mut cand = if b - a >= res || !b.is_finite() {
                a + res
            } else {
                (a + b + (2.0 * res * res - (a - b) * (a - b)).sqrt()) / 2.0
            };
            // Chamfer candidates keep the field within the 8-connected
            // shortest-path bound even where the axis stencil is starved.
            for m in n.neighbors8() {
                if !pg.traversable(m) {
                    continue;
                }
                if m.row != n.row
                    && m.col != n.col
                    && !(pg.traversable(Cell::new(n.row, m.col))
                        && pg.traversable(Cell::new(m.row, n.col)))
                {
                    continue;
                }
                let step = if m.row != n.row && m.col != n.col {
                    res * std::f64::consts::SQRT_2
                } else {
                    res
                };
                cand = cand.min(values[idx(m)] + step);
            }
            let j = idx(n);
            if cand < values[j] {
                values[j] = cand;
                heap.push(Reverse((HeapKey(cand), n)));
            }
        }
    }

    Ok(DistanceField { goal, values, width: w })
}

/// Strictly field-decreasing cell path from `start` to the goal.
pub fn extract_dense_path(
    pg: &PlanGrid,
    field: &DistanceField,
    start: Cell,
) -> Result<Vec<Cell>, PlanError> {
    if !field.value(start).is_finite() {
        return Err(PlanError::Unreachable(start.row, start.col));
    }
    let mut path = vec![start];
    let mut current = start;
    while current != field.goal {
        let mut best: Option<(f64, Cell)> = None;
        for n in current.neighbors8() {
            if !pg.traversable(n) {
                continue;
            }
            // A diagonal move needs both orthogonal neighbors open so the
            // path never cuts a corner.
            if n.row != current.row && n.col != current.col {
                let open = pg.traversable(Cell::new(current.row, n.col))
                    && pg.traversable(Cell::new(n.row, current.col));
                if !open {
                    continue;
                }
            }
            let v = field.value(n);
            if v < field.value(current) && best.map_or(true, |(bv, bc)| v < bv || (v == bv && n < bc)) {
                best = Some((v, n));
            }
        }
        match best {
            Some((_, n)) => {
                path.push(n);
                current = n;
            }
            None => return Err(PlanError::Unreachable(start.row, start.col)),
        }
    }
    Ok(path)
}

/// World-space waypoints for the path from `start`: dense descent then
/// uniform subsampling to at most `n_max` points, endpoints kept.
pub fn extract_waypoints(
    pg: &PlanGrid,
    field: &DistanceField,
    start: Cell,
    n_max: usize,
) -> Result<Vec<WorldPoint>, PlanError> {
    let dense = extract_dense_path(pg, field, start)?;
    let world: Vec<WorldPoint> = dense.iter().map(|&c| pg.cell_center(c)).collect();
    Ok(crate::gain::subsample_waypoints(&world, n_max))
}
