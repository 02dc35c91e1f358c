//! Procedural house generation: a jittered room lattice repeated on every
//! floor, striped-height walls, doors between lattice neighbors, stair
//! strips between consecutive floors, and objects sampled from the shipped
//! semantic priors. Fully determined by the seed.

use super::{
    CellRect, DoorSpec, EpisodeSpec, FloorRaster, RoomSpec, Scene, SceneObject, SimError,
    StairSpec, FLOOR_HEIGHT,
};
use crate::config::SimConfig;
use crate::fixtures::{adjacency, cooccurrence, PREDICTOR_CHOICES};
use crate::geom::{Cell, WorldPoint};
use crate::graph::{make_object, Provenance, RegionNode, SceneGraph};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Wall thickness, cells. Thick enough that links across a wall accumulate
/// more crossings than the grouping cutoff tolerates.
const WALL_T: i32 = 6;
/// Door opening width, cells.
const DOOR_W: i32 = 14;
/// Stair strip footprint, cells: treads along the long axis.
const STAIR_LEN: i32 = 20;
const STAIR_W: i32 = 16;
/// Wall height above the floor plane, meters, striped by cell parity so
/// wall tops are never flat.
const WALL_BASE: f64 = 2.0;
const WALL_STRIPE: f64 = 1.3;

/// Decoy appearance pairs: (true category, reported category). The reported
/// category is a common navigation target that the surrounding room's
/// semantics contradict.
const DECOY_PAIRS: [(&str, &str); 3] = [("sofa", "bed"), ("cabinet", "fridge"), ("chair", "toilet")];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneGenConfig {
    pub floors: usize,
    /// Rooms per floor, arranged in a lattice.
    pub rooms: usize,
    /// Side length of the square map, meters.
    pub size_m: f64,
    pub resolution: f64,
    /// Inclusive range of non-decoy objects per room.
    pub objects_per_room: (usize, usize),
    /// Decoy objects per floor.
    pub decoys: usize,
    pub sensor: SimConfig,
}

impl Default for SceneGenConfig {
    fn default() -> Self {
        SceneGenConfig {
            floors: 1,
            rooms: 4,
            size_m: 12.0,
            resolution: 0.05,
            objects_per_room: (3, 5),
            decoys: 0,
            sensor: SimConfig::default(),
        }
    }
}

/// Near-square lattice factorization of the room count.
fn lattice_dims(rooms: usize) -> (usize, usize) {
    let mut best = (1, rooms);
    for a in 1..=rooms {
        if rooms % a == 0 {
            let b = rooms / a;
            if a <= b && b - a < best.1 - best.0 {
                best = (a, b);
            }
        }
    }
    best
}

fn weighted_choice<'a, R: Rng>(rng: &mut R, items: &[(&'a str, f64)]) -> &'a str {
    let total: f64 = items.iter().map(|(_, w)| w).sum();
    let mut t = rng.gen_range(0.0..total.max(1e-12));
    for (item, w) in items {
        t -= w;
        if t <= 0.0 {
            return item;
        }
    }
    items.last().expect("non-empty choice set").0
}

pub fn generate_scene(seed: u64, cfg: &SceneGenConfig) -> Result<Scene, SimError> {
    if !(1..=3).contains(&cfg.floors) {
        return Err(SimError::BadConfig(format!("floors {} not in 1..=3", cfg.floors)));
    }
    if !(2..=10).contains(&cfg.rooms) {
        return Err(SimError::BadConfig(format!("rooms {} not in 2..=10", cfg.rooms)));
    }
    if !(6.0..=24.0).contains(&cfg.size_m) {
        return Err(SimError::BadConfig(format!("size {} m not in 6..=24", cfg.size_m)));
    }
    let n = (cfg.size_m / cfg.resolution).round() as i32;
    let (rows_n, cols_n) = lattice_dims(cfg.rooms);
    let min_side = (n - WALL_T * 2) / cols_n.max(rows_n) as i32 - WALL_T;
    if min_side < STAIR_LEN + 2 * WALL_T + 16 {
        return Err(SimError::BadConfig(format!(
            "rooms too small: {} cells interior",
            min_side
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Jittered lattice boundaries shared by every floor.
    let jitter = |rng: &mut ChaCha8Rng, span: i32| rng.gen_range(-(span / 10)..=span / 10);
    let mut xs = vec![0];
    for i in 1..cols_n as i32 {
        let base = n * i / cols_n as i32;
        xs.push(base + jitter(&mut rng, n / cols_n as i32));
    }
    xs.push(n);
    let mut ys = vec![0];
    for j in 1..rows_n as i32 {
        let base = n * j / rows_n as i32;
        ys.push(base + jitter(&mut rng, n / rows_n as i32));
    }
    ys.push(n);

    let interior = |lines: &[i32], i: usize| -> (i32, i32) {
        let lo = if i == 0 { WALL_T } else { lines[i] + WALL_T / 2 };
        let hi = if i + 2 == lines.len() { n - WALL_T } else { lines[i + 1] - WALL_T / 2 };
        (lo, hi)
    };

    // Rooms: identical rects on every floor, labels sampled per floor with
    // weights from the adjacency priors of already-labeled lattice neighbors.
    let label_pool: Vec<&str> = PREDICTOR_CHOICES.iter().copied().filter(|l| *l != "unknown").collect();
    let mut rooms = Vec::new();
    for floor in 0..cfg.floors {
        let mut labels: Vec<Option<String>> = vec![None; cfg.rooms];
        for j in 0..rows_n {
            for i in 0..cols_n {
                let idx = j * cols_n + i;
                let mut weights = Vec::new();
                for l in &label_pool {
                    let mut w = 1.0;
                    let mut any = false;
                    if i > 0 {
                        if let Some(nb) = &labels[idx - 1] {
                            w *= adjacency().weight(l, nb) + 0.01;
                            any = true;
                        }
                    }
                    if j > 0 {
                        if let Some(nb) = &labels[idx - cols_n] {
                            w *= adjacency().weight(l, nb) + 0.01;
                            any = true;
                        }
                    }
                    weights.push((*l, if any { w } else { 1.0 }));
                }
                labels[idx] = Some(weighted_choice(&mut rng, &weights).to_string());
            }
        }
        for j in 0..rows_n {
            for i in 0..cols_n {
                let (c0, c1) = interior(&xs, i);
                let (r0, r1) = interior(&ys, j);
                rooms.push(RoomSpec {
                    floor,
                    rect: CellRect { r0, c0, r1, c1 },
                    label: labels[j * cols_n + i].clone().unwrap(),
                });
            }
        }
    }

    // Doors between lattice-adjacent rooms, one per shared boundary,
    // repeated on every floor so the layouts stay identical.
    let mut door_rects = Vec::new();
    for j in 0..rows_n {
        for i in 1..cols_n {
            let x = xs[i];
            let (r0, r1) = interior(&ys, j);
            let c = rng.gen_range(r0 + DOOR_W / 2 + 2..r1 - DOOR_W / 2 - 2);
            door_rects.push(CellRect {
                r0: c - DOOR_W / 2,
                r1: c + DOOR_W / 2,
                c0: x - WALL_T / 2,
                c1: x + WALL_T / 2,
            });
        }
    }
    for j in 1..rows_n {
        for i in 0..cols_n {
            let y = ys[j];
            let (c0, c1) = interior(&xs, i);
            let c = rng.gen_range(c0 + DOOR_W / 2 + 2..c1 - DOOR_W / 2 - 2);
            door_rects.push(CellRect {
                r0: y - WALL_T / 2,
                r1: y + WALL_T / 2,
                c0: c - DOOR_W / 2,
                c1: c + DOOR_W / 2,
            });
        }
    }
    let mut doors = Vec::new();
    for floor in 0..cfg.floors {
        for rect in &door_rects {
            doors.push(DoorSpec { floor, rect: *rect });
        }
    }

    // One stair strip per floor gap, rotated through the lattice rooms.
    let mut stairs = Vec::new();
    for f in 0..cfg.floors.saturating_sub(1) {
        let room = &rooms[f % cfg.rooms];
        let r = room.rect;
        let along_cols = (r.c1 - r.c0) >= (r.r1 - r.r0);
        let rect = if along_cols {
            CellRect {
                r0: r.r0 + 6,
                r1: r.r0 + 6 + STAIR_W,
                c0: r.c0 + 8,
                c1: r.c0 + 8 + STAIR_LEN,
            }
        } else {
            CellRect {
                r0: r.r0 + 8,
                r1: r.r0 + 8 + STAIR_LEN,
                c0: r.c0 + 6,
                c1: r.c0 + 6 + STAIR_W,
            }
        };
        stairs.push(StairSpec { lower_floor: f, rect, along_cols, reversed: false });
    }

    // Objects. Positions keep a margin from walls, the stair strips, and
    // each other; decoys go to rooms whose label makes the reported
    // category implausible.
    let mut objects = Vec::new();
    let mut next_id = 0u32;
    let stair_zone = |floor: usize, cell: Cell| -> bool {
        stairs.iter().any(|s| {
            (s.lower_floor == floor || s.lower_floor + 1 == floor)
                && CellRect {
                    r0: s.rect.r0 - 4,
                    r1: s.rect.r1 + 4,
                    c0: s.rect.c0 - 4,
                    c1: s.rect.c1 + 4,
                }
                .contains(cell)
        })
    };
    let place = |rng: &mut ChaCha8Rng,
                     objects: &mut Vec<SceneObject>,
                     room: &RoomSpec,
                     category: &str,
                     reported: &str,
                     next_id: &mut u32| {
        let margin = 10;
        for _ in 0..50 {
            let cell = Cell::new(
                rng.gen_range(room.rect.r0 + margin..room.rect.r1 - margin),
                rng.gen_range(room.rect.c0 + margin..room.rect.c1 - margin),
            );
            if stair_zone(room.floor, cell) {
                continue;
            }
            let p = WorldPoint::new(
                (cell.col as f64 + 0.5) * cfg.resolution,
                (cell.row as f64 + 0.5) * cfg.resolution,
            );
            let too_close = objects
                .iter()
                .any(|o: &SceneObject| o.floor == room.floor && o.position.distance(p) < 0.6);
            if too_close {
                continue;
            }
            objects.push(SceneObject {
                id: *next_id,
                category: category.to_string(),
                reported_category: reported.to_string(),
                floor: room.floor,
                position: p,
            });
            *next_id += 1;
            return true;
        }
        false
    };
    for room in &rooms {
        let dist = cooccurrence()
            .region_distribution(&room.label)
            .expect("labels come from the fixture vocabulary");
        let choices: Vec<(&str, f64)> = dist.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        let count = rng.gen_range(cfg.objects_per_room.0..=cfg.objects_per_room.1);
        for _ in 0..count {
            let cat = weighted_choice(&mut rng, &choices);
            place(&mut rng, &mut objects, room, cat, cat, &mut next_id);
        }
    }
    for floor in 0..cfg.floors {
        for d in 0..cfg.decoys {
            let (truth, reported) = DECOY_PAIRS[d % DECOY_PAIRS.len()];
            // Prefer rooms where the reported category is out of place.
            let host = rooms
                .iter()
                .filter(|r| r.floor == floor)
                .min_by(|a, b| {
                    let pa = cooccurrence().prob(&a.label, reported);
                    let pb = cooccurrence().prob(&b.label, reported);
                    pa.partial_cmp(&pb).unwrap()
                })
                .expect("floor has rooms");
            place(&mut rng, &mut objects, host, truth, reported, &mut next_id);
        }
    }

    let floors = rasterize(cfg, n as usize, &rooms, &doors, &stairs);
    let ground_truth = build_ground_truth(cfg, &rooms, &objects);

    Ok(Scene {
        seed,
        config: cfg.clone(),
        resolution: cfg.resolution,
        n: n as usize,
        rooms,
        doors,
        stairs,
        objects,
        floors,
        ground_truth,
    })
}

/// Rebuild the per-floor rasters from the declarative specs. Walls are
/// everything outside room interiors and door openings; stair strips
/// override heights on both adjacent floors.
pub(super) fn rasterize(
    cfg: &SceneGenConfig,
    n: usize,
    rooms: &[RoomSpec],
    doors: &[DoorSpec],
    stairs: &[StairSpec],
) -> Vec<FloorRaster> {
    let mut floors = Vec::with_capacity(cfg.floors);
    for f in 0..cfg.floors {
        let base = f as f64 * FLOOR_HEIGHT;
        let mut wall = vec![true; n * n];
        let mut height = vec![0.0f64; n * n];
        let mut room_id = vec![-1i32; n * n];
        for r in 0..n as i32 {
            for c in 0..n as i32 {
                let cell = Cell::new(r, c);
                let i = r as usize * n + c as usize;
                let room = rooms
                    .iter()
                    .position(|rm| rm.floor == f && rm.rect.contains(cell));
                let in_door = doors.iter().any(|d| d.floor == f && d.rect.contains(cell));
                if let Some(idx) = room {
                    wall[i] = false;
                    room_id[i] = idx as i32;
                    height[i] = base;
                } else if in_door {
                    wall[i] = false;
                    height[i] = base;
                } else {
                    height[i] = base + WALL_BASE + WALL_STRIPE * ((r + c) % 2) as f64;
                }
            }
        }
        for s in stairs {
            if s.lower_floor != f && s.lower_floor + 1 != f {
                continue;
            }
            for r in s.rect.r0..s.rect.r1 {
                for c in s.rect.c0..s.rect.c1 {
                    let i = r as usize * n + c as usize;
                    wall[i] = false;
                    height[i] = s.height_at(Cell::new(r, c));
                }
            }
        }
        floors.push(FloorRaster { n, wall, height, room_id });
    }
    floors
}

/// Ground-truth scene graph: one observed region per room with a certain
/// caption, members carrying true categories (decoys included as what they
/// really are).
pub(super) fn build_ground_truth(
    cfg: &SceneGenConfig,
    rooms: &[RoomSpec],
    objects: &[SceneObject],
) -> SceneGraph {
    let mut g = SceneGraph::new();
    for f in 0..cfg.floors {
        let base = f as f64 * FLOOR_HEIGHT;
        g.ensure_floor(f, (base, base + FLOOR_HEIGHT));
    }
    let mut region_ids = Vec::new();
    for room in rooms {
        let rid = g.alloc_region_id();
        let cc = room.rect.center_cell();
        g.regions.insert(
            rid,
            RegionNode {
                id: rid,
                caption: vec![(room.label.clone(), 1.0)],
                center: WorldPoint::new(
                    (cc.col as f64 + 0.5) * cfg.resolution,
                    (cc.row as f64 + 0.5) * cfg.resolution,
                ),
                members: Vec::new(),
                floor: room.floor,
                provenance: Provenance::Observed,
                imagined_for: None,
            },
        );
        region_ids.push(rid);
    }
    for obj in objects {
        let oid = g.alloc_object_id();
        g.objects.insert(
            oid,
            make_object(oid, &obj.category, obj.position, obj.floor, 1.0, Provenance::Observed),
        );
        // Host room lookup by containment.
        let cell = Cell::new(
            (obj.position.y / cfg.resolution).floor() as i32,
            (obj.position.x / cfg.resolution).floor() as i32,
        );
        if let Some(idx) = rooms
            .iter()
            .position(|rm| rm.floor == obj.floor && rm.rect.contains(cell))
        {
            let rid = region_ids[idx];
            g.object_parent.insert(oid, rid);
            g.regions.get_mut(&rid).unwrap().members.push(oid);
        }
    }
    g
}

/// How episode starts and targets are drawn.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeGenConfig {
    pub success_distance: f64,
    pub step_budget: usize,
    /// Some(true): target instances only on floors other than the start
    /// floor. Some(false): nearest instance on the start floor.
    pub cross_floor: Option<bool>,
    /// Reject episodes with a geodesic shorter than this, meters.
    pub min_geodesic: f64,
}

impl Default for EpisodeGenConfig {
    fn default() -> Self {
        EpisodeGenConfig {
            success_distance: 0.1,
            step_budget: 500,
            cross_floor: None,
            min_geodesic: 1.0,
        }
    }
}

/// Sample episodes on a scene. Deterministic in (scene, seed, count, cfg).
pub fn sample_episodes(
    scene: &Scene,
    seed: u64,
    count: usize,
    cfg: &EpisodeGenConfig,
) -> Result<Vec<EpisodeSpec>, SimError> {
    use crate::geom::AgentPose;
    let oracle = super::GeodesicOracle::build(scene);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0e15);
    let mut categories: Vec<&str> = scene
        .objects
        .iter()
        .filter(|o| !o.is_decoy())
        .map(|o| o.category.as_str())
        .collect();
    categories.sort_unstable();
    categories.dedup();
    if categories.is_empty() {
        return Err(SimError::BadConfig("scene has no objects".into()));
    }

    let mut episodes = Vec::new();
    let mut attempts = 0;
    while episodes.len() < count {
        attempts += 1;
        if attempts > count * 400 {
            return Err(SimError::BadConfig(format!(
                "could not sample {} episodes (got {})",
                count,
                episodes.len()
            )));
        }
        let floor = rng.gen_range(0..scene.floors.len());
        let cell = Cell::new(
            rng.gen_range(0..scene.n as i32),
            rng.gen_range(0..scene.n as i32),
        );
        if !oracle.walkable(floor, cell) {
            continue;
        }
        if scene.stairs.iter().any(|s| s.rect.contains(cell)) {
            continue;
        }
        let target = categories[rng.gen_range(0..categories.len())];
        let floors_with: Vec<usize> = scene
            .objects
            .iter()
            .filter(|o| !o.is_decoy() && o.category == target)
            .map(|o| o.floor)
            .collect();
        match cfg.cross_floor {
            Some(true) if floors_with.iter().any(|&f| f == floor) => continue,
            Some(false) if !floors_with.iter().any(|&f| f == floor) => continue,
            _ => {}
        }
        let p = scene.cell_center(cell);
        let start = AgentPose {
            x: p.x,
            y: p.y,
            z: floor as f64 * FLOOR_HEIGHT,
            heading: (rng.gen_range(0..12) as f64) * 30f64.to_radians(),
            floor,
        };
        let d = oracle.distance_to_target(scene, &start, target);
        if !d.is_finite() || d < cfg.min_geodesic {
            continue;
        }
        episodes.push(EpisodeSpec {
            id: episodes.len() as u64,
            start,
            target: target.to_string(),
            optimal_length: d,
            success_distance: cfg.success_distance,
            step_budget: cfg.step_budget,
        });
    }
    Ok(episodes)
}
