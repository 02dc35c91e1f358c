//! Raycast visibility: cast rays at uniform angles, stop at the first
//! occupied cell, and rasterize the hit-point polygon.

use super::{CellState, OccupancyGrid};
use crate::geom::{Cell, WorldPoint};
use std::collections::BTreeSet;

/// Ray march step in cells.
const RAY_STEP: f64 = 0.25;

/// Cells visible from `point`: `num_rays` rays at uniform angles, each
/// stopped at the first occupied cell or at `r_ray` meters; the endpoints
/// form a polygon which is rasterized by even-odd scanline with boundary
/// cells included. A point sitting on an occupied cell sees nothing.
pub fn raycast_visible_cells(
    grid: &OccupancyGrid,
    point: WorldPoint,
    num_rays: usize,
    r_ray: f64,
) -> BTreeSet<Cell> {
    assert!(num_rays >= 3, "need at least 3 rays");
    let origin_cell = grid.world_to_cell(point);
    if !grid.in_bounds(origin_cell) || grid.state(origin_cell) == CellState::Occupied {
        return BTreeSet::new();
    }

    // Work in continuous cell coordinates: x along columns, y along rows.
    let ox = (point.x - grid.origin.x) / grid.resolution;
    let oy = (point.y - grid.origin.y) / grid.resolution;
    let max_r = r_ray / grid.resolution;

    let mut vertices = Vec::with_capacity(num_rays);
    for j in 0..num_rays {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / num_rays as f64;
        let (dy, dx) = theta.sin_cos();
        let mut end = (ox, oy);
        let mut t = RAY_STEP;
        while t <= max_r {
            let px = ox + dx * t;
            let py = oy + dy * t;
            let cell = Cell::new(py.floor() as i32, px.floor() as i32);
            if !grid.in_bounds(cell) || grid.state(cell) == CellState::Occupied {
                break;
            }
            end = (px, py);
            t += RAY_STEP;
        }
        vertices.push(end);
    }

    let mut cells = rasterize_polygon(&vertices);
    cells.insert(origin_cell);
    cells.retain(|c| grid.in_bounds(*c));
    cells
}

/// Even-odd scanline fill (cell centers) plus supercover traversal of the
/// polygon edges so boundary cells are included.
pub fn rasterize_polygon(vertices: &[(f64, f64)]) -> BTreeSet<Cell> {
    let mut out = BTreeSet::new();
    if vertices.len() < 3 {
        return out;
    }
    let min_row = vertices.iter().map(|v| v.1).fold(f64::INFINITY, f64::min).floor() as i32;
    let max_row = vertices.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max).ceil() as i32;

    for row in min_row..=max_row {
        let y = row as f64 + 0.5;
        let mut xs = Vec::new();
        for i in 0..vertices.len() {
            let (xa, ya) = vertices[i];
            let (xb, yb) = vertices[(i + 1) % vertices.len()];
            // Half-open rule so shared vertices are not double counted.
            if (ya <= y && y < yb) || (yb <= y && y < ya) {
                xs.push(xa + (y - ya) * (xb - xa) / (yb - ya));
            }
        }
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for pair in xs.chunks_exact(2) {
            // Fill cells whose center lies in [x0, x1].
            let c0 = (pair[0] - 0.5).ceil() as i32;
            let c1 = (pair[1] - 0.5).floor() as i32;
            for col in c0..=c1 {
                out.insert(Cell::new(row, col));
            }
        }
    }

    for i in 0..vertices.len() {
        let a = vertices[i];
        let b = vertices[(i + 1) % vertices.len()];
        supercover_line(a, b, &mut out);
    }
    out
}

/// All cells a segment passes through (grid traversal in cell coordinates).
pub fn supercover_line(a: (f64, f64), b: (f64, f64), out: &mut BTreeSet<Cell>) {
    let (x0, y0) = a;
    let (x1, y1) = b;
    let mut col = x0.floor() as i32;
    let mut row = y0.floor() as i32;
    let end_col = x1.floor() as i32;
    let end_row = y1.floor() as i32;
    let dx = x1 - x0;
    let dy = y1 - y0;
    let step_col: i32 = if dx > 0.0 { 1 } else { -1 };
    let step_row: i32 = if dy > 0.0 { 1 } else { -1 };
    // Parametric distance to the next vertical/horizontal cell boundary.
    let mut t_max_x = if dx != 0.0 {
        let next = if dx > 0.0 { col as f64 + 1.0 } else { col as f64 };
        (next - x0) / dx
    } else {
        f64::INFINITY
    };
    let mut t_max_y = if dy != 0.0 {
        let next = if dy > 0.0 { row as f64 + 1.0 } else { row as f64 };
        (next - y0) / dy
    } else {
        f64::INFINITY
    };
    let t_delta_x = if dx != 0.0 { (1.0 / dx).abs() } else { f64::INFINITY };
    let t_delta_y = if dy != 0.0 { (1.0 / dy).abs() } else { f64::INFINITY };

    out.insert(Cell::new(row, col));
    let mut guard = 0;
    while (col != end_col || row != end_row) && guard < 100_000 {
        if t_max_x < t_max_y {
            t_max_x += t_delta_x;
            col += step_col;
        } else {
            t_max_y += t_delta_y;
            row += step_row;
        }
        out.insert(Cell::new(row, col));
        guard += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::AgentPose;
    use crate::grid::{SweptCell, VisibilitySweep};

    fn open_grid(n: usize) -> OccupancyGrid {
        let mut g = OccupancyGrid::new(n, n, 0.05, WorldPoint::new(0.0, 0.0), 0);
        let pose = AgentPose {
            x: 0.01,
            y: 0.01,
            z: 0.0,
            heading: 0.0,
            floor: 0,
        };
        let cells = (0..n as i32)
            .flat_map(|r| {
                (0..n as i32).map(move |c| SweptCell {
                    cell: Cell::new(r, c),
                    state: CellState::Free,
                    height: 0.0,
                })
            })
            .collect();
        g.integrate_observation(&pose, &VisibilitySweep { cells })
            .unwrap();
        g
    }

    #[test]
    fn open_field_area_matches_analytic_polygon() {
        // 20 rays, r_ray = 4 m at 0.05 m/cell: a regular 20-gon of
        // circumradius 80 cells, area n/2 * R^2 * sin(2pi/n).
        let g = open_grid(400);
        let center = WorldPoint::new(10.0, 10.0);
        let cells = raycast_visible_cells(&g, center, 20, 4.0);
        let r = 4.0 / 0.05;
        let analytic = 0.5 * 20.0 * r * r * (2.0 * std::f64::consts::PI / 20.0).sin();
        let got = cells.len() as f64;
        assert!(
            (got - analytic).abs() / analytic < 0.10,
            "got {got}, analytic {analytic}"
        );
    }

    #[test]
    fn enclosed_by_ring_sees_almost_nothing() {
        let mut g = open_grid(40);
        let center = Cell::new(20, 20);
        for n in center.neighbors8() {
            g.set_state(n, CellState::Occupied);
        }
        let cells = raycast_visible_cells(&g, g.cell_center(center), 20, 4.0);
        assert!(cells.len() <= 9, "saw {} cells", cells.len());
        assert!(cells.contains(&center));
    }

    #[test]
    fn four_rays_make_a_diamond() {
        // A 4-gon with vertices at axis distance R is a diamond of diagonal
        // 2R; its area is 2 R^2.
        let g = open_grid(200);
        let center = WorldPoint::new(5.0, 5.0);
        let cells = raycast_visible_cells(&g, center, 4, 2.0);
        let r = 2.0 / 0.05;
        let analytic = 2.0 * r * r;
        let got = cells.len() as f64;
        assert!(
            (got - analytic).abs() / analytic < 0.10,
            "got {got}, analytic {analytic}"
        );
        // Diamond, not square: corners of the bounding square are excluded.
        let origin = g.world_to_cell(center);
        assert!(!cells.contains(&Cell::new(origin.row + 35, origin.col + 35)));
        assert!(cells.contains(&Cell::new(origin.row + 35, origin.col)));
    }

    #[test]
    fn point_on_occupied_cell_sees_nothing() {
        let mut g = open_grid(40);
        g.set_state(Cell::new(10, 10), CellState::Occupied);
        let cells = raycast_visible_cells(&g, g.cell_center(Cell::new(10, 10)), 20, 2.0);
        assert!(cells.is_empty());
    }

    #[test]
    fn raycast_contained_in_disk() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut g = open_grid(100);
        for _ in 0..120 {
            g.set_state(
                Cell::new(rng.gen_range(0..100), rng.gen_range(0..100)),
                CellState::Occupied,
            );
        }
        for _ in 0..10 {
            let p = WorldPoint::new(rng.gen_range(0.5..4.5), rng.gen_range(0.5..4.5));
            let r_ray = 1.5;
            let cells = raycast_visible_cells(&g, p, 20, r_ray);
            let limit = r_ray + g.resolution * std::f64::consts::SQRT_2;
            for c in cells {
                let d = g.cell_center(c).distance(p);
                assert!(d <= limit, "cell at {d} beyond {limit}");
            }
        }
    }
}
