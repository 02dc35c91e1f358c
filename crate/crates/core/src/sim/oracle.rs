//! Ground-truth geodesics: per-floor traversable masks built from the true
//! rasters, linked through stair strips, searched with a multi-floor
//! Dijkstra. Used for episode generation and the benchmark denominators.

use super::Scene;
use crate::geom::{AgentPose, Cell, WorldPoint};
use crate::grid::{derive_layers, CellState, LayerParams, OccupancyGrid};
use crate::plan::PlanGrid;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

pub struct GeodesicOracle {
    grids: Vec<PlanGrid>,
    /// Cells linked across consecutive floors (stair strips), by lower floor.
    links: Vec<std::collections::BTreeSet<Cell>>,
}

/// Heap key ordering f64 totally; the heap is a min-heap via `Reverse`.
#[derive(PartialEq)]
struct Key(f64);

impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl GeodesicOracle {
    pub fn build(scene: &Scene) -> Self {
        // The walkability mask must match the dynamics: forward motion
        // climbs at most MAX_CLIMB per cell, stricter than the default
        // traversable threshold.
        let params = LayerParams {
            traversable_threshold: super::MAX_CLIMB,
            ..LayerParams::default()
        };
        let agent_radius = 0.18;
        let mut grids = Vec::new();
        for (f, raster) in scene.floors.iter().enumerate() {
            let mut grid =
                OccupancyGrid::new(scene.n, scene.n, scene.resolution, WorldPoint::new(0.0, 0.0), f);
            for r in 0..scene.n as i32 {
                for c in 0..scene.n as i32 {
                    let cell = Cell::new(r, c);
                    let state = if raster.is_wall(cell) {
                        CellState::Occupied
                    } else {
                        CellState::Free
                    };
                    grid.set_state(cell, state);
                    grid.set_height(cell, raster.height_at(cell));
                }
            }
            let layers = derive_layers(&grid, &params);
            grids.push(PlanGrid::from_layers(&grid, &layers, agent_radius));
        }
        let mut links =
            vec![std::collections::BTreeSet::new(); scene.floors.len().saturating_sub(1)];
        for s in &scene.stairs {
            for r in s.rect.r0..s.rect.r1 {
                for c in s.rect.c0..s.rect.c1 {
                    let cell = Cell::new(r, c);
                    if grids[s.lower_floor].traversable(cell)
                        && grids[s.lower_floor + 1].traversable(cell)
                    {
                        links[s.lower_floor].insert(cell);
                    }
                }
            }
        }
        GeodesicOracle { grids, links }
    }

    pub fn walkable(&self, floor: usize, cell: Cell) -> bool {
        self.grids[floor].traversable(cell)
    }

    /// Ground-truth planning mask for one floor.
    pub fn plan_grid(&self, floor: usize) -> &PlanGrid {
        &self.grids[floor]
    }

    /// Shortest multi-floor distances from one pose to every cell. Row-major
    /// per floor, infinity where unreachable.
    pub fn distances_from(&self, scene: &Scene, pose: &AgentPose) -> Vec<Vec<f64>> {
        let n = scene.n;
        let floor = scene.floor_of_z(pose.z);
        let mut dist = vec![vec![f64::INFINITY; n * n]; self.grids.len()];
        let start = self.grids[floor].world_to_cell(WorldPoint::new(pose.x, pose.y));
        let start = match nearest_walkable(&self.grids[floor], start, 10) {
            Some(c) => c,
            None => return dist,
        };
        let res = scene.resolution;
        let mut heap = BinaryHeap::new();
        dist[floor][start.row as usize * n + start.col as usize] = 0.0;
        heap.push(Reverse((Key(0.0), floor, start)));
        while let Some(Reverse((Key(d), f, cell))) = heap.pop() {
            let i = cell.row as usize * n + cell.col as usize;
            if d > dist[f][i] {
                continue;
            }
            for dr in -1i32..=1 {
                for dc in -1i32..=1 {
                    if dr == 0 && dc == 0 {
                        continue;
                    }
                    let nb = Cell::new(cell.row + dr, cell.col + dc);
                    if !self.grids[f].traversable(nb) {
                        continue;
                    }
                    // Diagonal moves may not cut corners.
                    if dr != 0
                        && dc != 0
                        && !(self.grids[f].traversable(Cell::new(cell.row + dr, cell.col))
                            && self.grids[f].traversable(Cell::new(cell.row, cell.col + dc)))
                    {
                        continue;
                    }
                    let step = if dr != 0 && dc != 0 {
                        res * std::f64::consts::SQRT_2
                    } else {
                        res
                    };
                    let j = nb.row as usize * n + nb.col as usize;
                    if d + step < dist[f][j] {
                        dist[f][j] = d + step;
                        heap.push(Reverse((Key(d + step), f, nb)));
                    }
                }
            }
            // Zero-cost floor transfer at stair cells; the vertical travel
            // is already paid by walking the strip's footprint.
            for (lower, cells) in self.links.iter().enumerate() {
                if (f == lower || f == lower + 1) && cells.contains(&cell) {
                    let other = if f == lower { lower + 1 } else { lower };
                    let j = cell.row as usize * n + cell.col as usize;
                    if d < dist[other][j] {
                        dist[other][j] = d;
                        heap.push(Reverse((Key(d), other, cell)));
                    }
                }
            }
        }
        dist
    }

    /// Shortest multi-floor cell path from a pose to the nearest true
    /// instance of `target`, as (floor, cell center) waypoints, start
    /// first. None when unreachable.
    pub fn path_to(
        &self,
        scene: &Scene,
        pose: &AgentPose,
        target: &str,
    ) -> Option<Vec<(usize, WorldPoint)>> {
        let dist = self.distances_from(scene, pose);
        let n = scene.n;
        let mut goal: Option<(f64, usize, Cell)> = None;
        for o in scene.objects.iter().filter(|o| !o.is_decoy() && o.category == target) {
            let cell = scene.world_to_cell(o.position);
            if let Some(c) = nearest_walkable(&self.grids[o.floor], cell, 10) {
                let d = dist[o.floor][c.row as usize * n + c.col as usize];
                if d.is_finite() && goal.map_or(true, |(bd, _, _)| d < bd) {
                    goal = Some((d, o.floor, c));
                }
            }
        }
        let (_, mut floor, mut cell) = goal?;
        // Descend the distance field from the goal back to the start,
        // crossing floors wherever a linked cell is strictly cheaper.
        let mut rev = vec![(floor, cell)];
        loop {
            let here = dist[floor][cell.row as usize * n + cell.col as usize];
            if here <= 0.0 {
                break;
            }
            let mut best = (here, floor, cell);
            // Floor transfers at link cells are zero-cost, so a transfer
            // alone never strictly decreases the value; scan neighbors on
            // the current floor and, at link cells, on the linked floor.
            let mut scan_floors = vec![floor];
            for (lower, cells) in self.links.iter().enumerate() {
                if (floor == lower || floor == lower + 1) && cells.contains(&cell) {
                    scan_floors.push(if floor == lower { lower + 1 } else { lower });
                }
            }
            for f in scan_floors {
                for dr in -1i32..=1 {
                    for dc in -1i32..=1 {
                        if dr == 0 && dc == 0 {
                            continue;
                        }
                        let nb = Cell::new(cell.row + dr, cell.col + dc);
                        if !self.grids[f].traversable(nb) {
                            continue;
                        }
                        if dr != 0
                            && dc != 0
                            && !(self.grids[f].traversable(Cell::new(cell.row + dr, cell.col))
                                && self.grids[f].traversable(Cell::new(cell.row, cell.col + dc)))
                        {
                            continue;
                        }
                        let d = dist[f][nb.row as usize * n + nb.col as usize];
                        if d < best.0 {
                            best = (d, f, nb);
                        }
                    }
                }
            }
            if best.0 >= here {
                return None;
            }
            floor = best.1;
            cell = best.2;
            rev.push((floor, cell));
        }
        rev.reverse();
        Some(rev.into_iter().map(|(f, c)| (f, scene.cell_center(c))).collect())
    }

    /// Geodesic from a pose to the nearest true instance of a category.
    pub fn distance_to_target(&self, scene: &Scene, pose: &AgentPose, target: &str) -> f64 {
        let dist = self.distances_from(scene, pose);
        let mut best = f64::INFINITY;
        for o in scene.objects.iter().filter(|o| !o.is_decoy() && o.category == target) {
            let cell = scene.world_to_cell(o.position);
            // Objects occupy no cells but may sit on inflated ground near a
            // wall; snap to the nearest walkable cell.
            if let Some(c) = nearest_walkable(&self.grids[o.floor], cell, 10) {
                best = best.min(dist[o.floor][c.row as usize * scene.n + c.col as usize]);
            }
        }
        best
    }
}

fn nearest_walkable(grid: &PlanGrid, cell: Cell, max_radius: i32) -> Option<Cell> {
    if grid.traversable(cell) {
        return Some(cell);
    }
    for radius in 1..=max_radius {
        let mut best: Option<(f64, Cell)> = None;
        for dr in -radius..=radius {
            for dc in -radius..=radius {
                if dr.abs().max(dc.abs()) != radius {
                    continue;
                }
                let c = Cell::new(cell.row + dr, cell.col + dc);
                if grid.traversable(c) {
                    let d = ((dr * dr + dc * dc) as f64).sqrt();
                    if best.map_or(true, |(bd, bc)| d < bd || (d == bd && c < bc)) {
                        best = Some((d, c));
                    }
                }
            }
        }
        if let Some((_, c)) = best {
            return Some(c);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::gen::{generate_scene, SceneGenConfig};

    #[test]
    fn same_room_geodesic_close_to_euclidean() {
        let scene = generate_scene(2, &SceneGenConfig::default()).unwrap();
        let room = scene.rooms[0].rect;
        let a = scene.cell_center(Cell::new(room.r0 + 15, room.c0 + 15));
        let b = scene.cell_center(Cell::new(room.r0 + 15, room.c0 + 45));
        let pose = AgentPose { x: a.x, y: a.y, z: 0.0, heading: 0.0, floor: 0 };
        let oracle = GeodesicOracle::build(&scene);
        let dist = oracle.distances_from(&scene, &pose);
        let cell = scene.world_to_cell(b);
        let d = dist[0][cell.row as usize * scene.n + cell.col as usize];
        let euclid = a.distance(b);
        assert!(d >= euclid - 1e-9 && d <= euclid * 1.1 + 0.2, "d={d}, euclid={euclid}");
    }

    #[test]
    fn cross_floor_distance_is_finite_and_longer_than_planar() {
        let cfg = SceneGenConfig { floors: 2, ..Default::default() };
        let scene = generate_scene(4, &cfg).unwrap();
        let room = scene.rooms[scene.rooms.len() - 1].rect;
        let goal_cell = room.center_cell();
        let oracle = GeodesicOracle::build(&scene);
        // Start on floor 0 in the room farthest in the lattice.
        let start_room = scene.rooms[3].rect;
        let p = scene.cell_center(start_room.center_cell());
        let pose = AgentPose { x: p.x, y: p.y, z: 0.0, heading: 0.0, floor: 0 };
        let dist = oracle.distances_from(&scene, &pose);
        let upper = scene.floors.len() - 1;
        let d = dist[upper][goal_cell.row as usize * scene.n + goal_cell.col as usize];
        assert!(d.is_finite(), "upper floor must be reachable through the stairs");
        let g = scene.cell_center(goal_cell);
        assert!(d > p.distance(g) - 1e-9);
    }

    #[test]
    fn unreachable_when_no_stairs() {
        // Two floors, then sever the link by querying a scene rebuilt
        // without stair strips.
        let cfg = SceneGenConfig { floors: 2, ..Default::default() };
        let mut scene = generate_scene(4, &cfg).unwrap();
        scene.stairs.clear();
        scene.floors = crate::sim::gen::rasterize(
            &scene.config,
            scene.n,
            &scene.rooms,
            &scene.doors,
            &scene.stairs,
        );
        let oracle = GeodesicOracle::build(&scene);
        let p = scene.cell_center(scene.rooms[0].rect.center_cell());
        let pose = AgentPose { x: p.x, y: p.y, z: 0.0, heading: 0.0, floor: 0 };
        let dist = oracle.distances_from(&scene, &pose);
        assert!(dist[1].iter().all(|d| !d.is_finite()));
    }

    #[test]
    fn doors_connect_all_rooms_on_a_floor() {
        for seed in 0..8u64 {
            let scene = generate_scene(seed, &SceneGenConfig::default()).unwrap();
            let oracle = GeodesicOracle::build(&scene);
            let p = scene.cell_center(scene.rooms[0].rect.center_cell());
            let pose = AgentPose { x: p.x, y: p.y, z: 0.0, heading: 0.0, floor: 0 };
            let dist = oracle.distances_from(&scene, &pose);
            for room in &scene.rooms {
                let c = room.rect.center_cell();
                let d = dist[0][c.row as usize * scene.n + c.col as usize];
                assert!(d.is_finite(), "room at {:?} unreachable (seed {seed})", c);
            }
        }
    }
}
