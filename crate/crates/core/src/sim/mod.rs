//! Deterministic multi-floor gridworld: procedural houses, a symbolic
//! FOV/occlusion sensor, discrete action dynamics with step climbing, and
//! the episode runner.

mod gen;
mod io;
mod oracle;

pub use gen::{generate_scene, sample_episodes, EpisodeGenConfig, SceneGenConfig};
pub use io::{episodes_from_jsonl, episodes_to_jsonl, scene_from_json, scene_to_json};
pub use oracle::GeodesicOracle;

use crate::config::SimConfig;
use crate::geom::{wrap_angle, AgentPose, Cell, WorldPoint};
use crate::graph::{Detection, SceneGraph};
use crate::grid::{CellState, SweptCell, VisibilitySweep};
use crate::plan::AgentAction;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Vertical distance between consecutive floor planes, meters.
pub const FLOOR_HEIGHT: f64 = 1.5;
/// Stair tread rise, meters.
pub const STEP_RISE: f64 = 0.15;
/// Maximum height difference a forward motion climbs, meters.
pub const MAX_CLIMB: f64 = 0.2;
/// Translation per MOVE_FORWARD, meters.
pub const FORWARD_STEP: f64 = 0.25;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("unsupported generation config: {0}")]
    BadConfig(String),
    #[error("scene json: {0}")]
    BadScene(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Inclusive-exclusive cell rectangle [r0, r1) x [c0, c1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRect {
    pub r0: i32,
    pub c0: i32,
    pub r1: i32,
    pub c1: i32,
}

impl CellRect {
    pub fn contains(&self, cell: Cell) -> bool {
        cell.row >= self.r0 && cell.row < self.r1 && cell.col >= self.c0 && cell.col < self.c1
    }

    pub fn center_cell(&self) -> Cell {
        Cell::new((self.r0 + self.r1) / 2, (self.c0 + self.c1) / 2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomSpec {
    pub floor: usize,
    pub rect: CellRect,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoorSpec {
    pub floor: usize,
    pub rect: CellRect,
}

/// A straight stair strip connecting `lower_floor` to the floor above.
/// Treads ascend along the strip's long axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StairSpec {
    pub lower_floor: usize,
    pub rect: CellRect,
    /// Treads rise along columns when true, along rows otherwise.
    pub along_cols: bool,
    /// Ascends toward decreasing axis coordinate when true.
    pub reversed: bool,
}

impl StairSpec {
    /// Absolute surface height at a cell inside the strip.
    pub fn height_at(&self, cell: Cell) -> f64 {
        let (pos, len) = if self.along_cols {
            (cell.col - self.rect.c0, self.rect.c1 - self.rect.c0)
        } else {
            (cell.row - self.rect.r0, self.rect.r1 - self.rect.r0)
        };
        let pos = if self.reversed { len - 1 - pos } else { pos };
        let steps = (FLOOR_HEIGHT / STEP_RISE) as i32;
        let tread_len = len / steps;
        let step = (pos / tread_len.max(1) + 1).min(steps);
        self.lower_floor as f64 * FLOOR_HEIGHT + step as f64 * STEP_RISE
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: u32,
    /// Ground-truth category.
    pub category: String,
    /// Category the sensor reports; differs only for decoys.
    pub reported_category: String,
    pub floor: usize,
    pub position: WorldPoint,
}

impl SceneObject {
    pub fn is_decoy(&self) -> bool {
        self.category != self.reported_category
    }
}

/// Rasterized ground truth for one floor.
#[derive(Debug, Clone)]
pub struct FloorRaster {
    pub n: usize,
    pub wall: Vec<bool>,
    /// Absolute surface height, meters.
    pub height: Vec<f64>,
    /// Room index into `Scene::rooms`, -1 on walls.
    pub room_id: Vec<i32>,
}

impl FloorRaster {
    fn idx(&self, cell: Cell) -> Option<usize> {
        if cell.row < 0 || cell.col < 0 || cell.row as usize >= self.n || cell.col as usize >= self.n
        {
            None
        } else {
            Some(cell.row as usize * self.n + cell.col as usize)
        }
    }

    pub fn is_wall(&self, cell: Cell) -> bool {
        self.idx(cell).map_or(true, |i| self.wall[i])
    }

    pub fn height_at(&self, cell: Cell) -> f64 {
        self.idx(cell).map_or(f64::INFINITY, |i| self.height[i])
    }

    pub fn room_at(&self, cell: Cell) -> i32 {
        self.idx(cell).map_or(-1, |i| self.room_id[i])
    }
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub seed: u64,
    pub config: gen::SceneGenConfig,
    pub resolution: f64,
    /// Cells per floor side.
    pub n: usize,
    pub rooms: Vec<RoomSpec>,
    pub doors: Vec<DoorSpec>,
    pub stairs: Vec<StairSpec>,
    pub objects: Vec<SceneObject>,
    pub floors: Vec<FloorRaster>,
    pub ground_truth: SceneGraph,
}

impl Scene {
    pub fn world_to_cell(&self, p: WorldPoint) -> Cell {
        Cell::new(
            (p.y / self.resolution).floor() as i32,
            (p.x / self.resolution).floor() as i32,
        )
    }

    pub fn cell_center(&self, cell: Cell) -> WorldPoint {
        WorldPoint::new(
            (cell.col as f64 + 0.5) * self.resolution,
            (cell.row as f64 + 0.5) * self.resolution,
        )
    }

    /// Floor plane index for a height, clamped to existing floors.
    pub fn floor_of_z(&self, z: f64) -> usize {
        let f = ((z + FLOOR_HEIGHT / 2.0) / FLOOR_HEIGHT).floor();
        (f.max(0.0) as usize).min(self.floors.len() - 1)
    }

    pub fn size_m(&self) -> f64 {
        self.n as f64 * self.resolution
    }
}

/// One sensor frame.
#[derive(Debug, Clone)]
pub struct Observation {
    /// Exact pose, floor set to the simulator's attribution.
    pub pose: AgentPose,
    pub sweep: VisibilitySweep,
    pub detections: Vec<Detection>,
    pub view_id: u64,
}

const RAY_SUBSTEP: f64 = 0.025;

/// Reveal the FOV cone with wall occlusion, and detect visible objects.
pub fn observe(scene: &Scene, pose: &AgentPose, cfg: &SimConfig, view_id: u64) -> Observation {
    let floor = scene.floor_of_z(pose.z);
    let raster = &scene.floors[floor];
    let origin = WorldPoint::new(pose.x, pose.y);
    let half_fov = cfg.fov_deg.to_radians() / 2.0;

    let mut cells: std::collections::BTreeMap<Cell, SweptCell> = Default::default();
    let own = scene.world_to_cell(origin);
    if !raster.is_wall(own) {
        cells.insert(
            own,
            SweptCell { cell: own, state: CellState::Free, height: raster.height_at(own) },
        );
    }
    // One ray per degree of FOV, endpoints included.
    let ray_count = cfg.fov_deg.round() as usize;
    for j in 0..=ray_count {
        let angle = pose.heading - half_fov + cfg.fov_deg.to_radians() * j as f64 / ray_count as f64;
        let (dx, dy) = (angle.cos(), angle.sin());
        let mut t = RAY_SUBSTEP;
        while t <= cfg.range {
            let p = WorldPoint::new(origin.x + t * dx, origin.y + t * dy);
            let cell = scene.world_to_cell(p);
            if raster.idx(cell).is_none() {
                break;
            }
            if raster.is_wall(cell) {
                cells.insert(
                    cell,
                    SweptCell {
                        cell,
                        state: CellState::Occupied,
                        height: raster.height_at(cell),
                    },
                );
                break;
            }
            cells.entry(cell).or_insert(SweptCell {
                cell,
                state: CellState::Free,
                height: raster.height_at(cell),
            });
            t += RAY_SUBSTEP;
        }
    }

    let mut detections = Vec::new();
    for o in scene.objects.iter().filter(|o| o.floor == floor) {
        let d = o.position.distance(origin);
        if d > cfg.range {
            continue;
        }
        let bearing = (o.position.y - origin.y).atan2(o.position.x - origin.x);
        if d > 1e-9 && wrap_angle(bearing - pose.heading).abs() > half_fov + 1e-9 {
            continue;
        }
        if !line_of_sight(raster, scene.resolution, origin, o.position) {
            continue;
        }
        let confidence = if o.is_decoy() {
            cfg.decoy_confidence
        } else {
            cfg.detection_confidence
        };
        detections.push(Detection {
            category: o.reported_category.clone(),
            position: o.position,
            floor,
            confidence,
            view_id,
        });
    }

    let mut pose = *pose;
    pose.floor = floor;
    Observation {
        pose,
        sweep: VisibilitySweep { cells: cells.into_values().collect() },
        detections,
        view_id,
    }
}

fn line_of_sight(raster: &FloorRaster, resolution: f64, a: WorldPoint, b: WorldPoint) -> bool {
    let d = a.distance(b);
    let steps = (d / (resolution / 2.0)).ceil() as usize;
    for s in 0..=steps {
        let t = s as f64 / steps.max(1) as f64;
        let p = WorldPoint::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
        if raster.is_wall(Cell::new(
            (p.y / resolution).floor() as i32,
            (p.x / resolution).floor() as i32,
        )) {
            return false;
        }
    }
    true
}

/// Apply one action. Forward motion advances in substeps, stopping at
/// walls and at height changes beyond the climbable limit; the returned
/// flag reports a collision.
pub fn apply_action(scene: &Scene, pose: &AgentPose, action: AgentAction) -> (AgentPose, bool) {
    let mut next = *pose;
    match action {
        AgentAction::TurnLeft => next.heading = wrap_angle(next.heading + crate::plan::turn_step()),
        AgentAction::TurnRight => next.heading = wrap_angle(next.heading - crate::plan::turn_step()),
        AgentAction::LookUp | AgentAction::LookDown | AgentAction::Stop => {}
        AgentAction::MoveForward => {
            let (dx, dy) = (next.heading.cos(), next.heading.sin());
            let substeps = 5;
            let mut collided = false;
            for _ in 0..substeps {
                let step = FORWARD_STEP / substeps as f64;
                let p = WorldPoint::new(next.x + step * dx, next.y + step * dy);
                let raster = &scene.floors[scene.floor_of_z(next.z)];
                let cell = scene.world_to_cell(p);
                if raster.idx(cell).is_none() || raster.is_wall(cell) {
                    collided = true;
                    break;
                }
                let h = raster.height_at(cell);
                if (h - next.z).abs() > MAX_CLIMB {
                    collided = true;
                    break;
                }
                next.x = p.x;
                next.y = p.y;
                next.z = h;
            }
            next.floor = scene.floor_of_z(next.z);
            return (next, collided);
        }
    }
    (next, false)
}

/// Episode definition; `optimal_length` is the multi-floor geodesic to the
/// nearest target instance, computed at generation time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSpec {
    pub id: u64,
    pub start: AgentPose,
    pub target: String,
    pub optimal_length: f64,
    pub success_distance: f64,
    pub step_budget: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub episode_id: u64,
    pub success: bool,
    /// The agent emitted STOP before exhausting the budget.
    pub stopped: bool,
    pub steps: usize,
    /// Sum of realized translations, meters.
    pub path_length: f64,
    pub collisions: usize,
    /// Geodesic distance to the nearest target at start and at the end.
    pub d_start: f64,
    pub d_final: f64,
    pub optimal_length: f64,
    pub final_pose: AgentPose,
}

/// An episode-scoped navigation policy.
pub trait Policy {
    fn act(&mut self, obs: &Observation, target: &str) -> AgentAction;
}

/// Per-step trace callback: (step index, pose after acting, action).
pub type TraceFn<'a> = dyn FnMut(usize, &AgentPose, AgentAction) + 'a;

pub fn run_episode(
    scene: &Scene,
    spec: &EpisodeSpec,
    policy: &mut dyn Policy,
    mut trace: Option<&mut TraceFn>,
) -> EpisodeResult {
    let oracle = GeodesicOracle::build(scene);
    run_episode_with_oracle(scene, spec, policy, &oracle, trace.as_deref_mut())
}

/// Variant reusing a prebuilt oracle across episodes on the same scene.
pub fn run_episode_with_oracle(
    scene: &Scene,
    spec: &EpisodeSpec,
    policy: &mut dyn Policy,
    oracle: &GeodesicOracle,
    mut trace: Option<&mut TraceFn>,
) -> EpisodeResult {
    let mut pose = spec.start;
    pose.floor = scene.floor_of_z(pose.z);
    let d_start = oracle.distance_to_target(scene, &pose, &spec.target);
    let mut path_length = 0.0;
    let mut collisions = 0;
    let mut stopped = false;
    let mut steps = 0;

    for step in 0..spec.step_budget {
        let obs = observe(scene, &pose, &scene_sim_config(scene), step as u64);
        let action = policy.act(&obs, &spec.target);
        steps = step + 1;
        if action == AgentAction::Stop {
            stopped = true;
            if let Some(t) = trace.as_deref_mut() {
                t(step, &pose, action);
            }
            break;
        }
        let before = WorldPoint::new(pose.x, pose.y);
        let (next, collided) = apply_action(scene, &pose, action);
        path_length += WorldPoint::new(next.x, next.y).distance(before);
        if collided {
            collisions += 1;
        }
        pose = next;
        if let Some(t) = trace.as_deref_mut() {
            t(step, &pose, action);
        }
    }

    let d_final = oracle.distance_to_target(scene, &pose, &spec.target);
    let euclid_final = scene
        .objects
        .iter()
        .filter(|o| !o.is_decoy() && o.category == spec.target && o.floor == pose.floor)
        .map(|o| o.position.distance(WorldPoint::new(pose.x, pose.y)))
        .fold(f64::INFINITY, f64::min);
    let success = stopped && euclid_final <= spec.success_distance;
    EpisodeResult {
        episode_id: spec.id,
        success,
        stopped,
        steps,
        path_length,
        collisions,
        d_start,
        d_final,
        optimal_length: spec.optimal_length,
        final_pose: pose,
    }
}

fn scene_sim_config(scene: &Scene) -> SimConfig {
    scene.config.sensor.clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn test_scene(seed: u64, floors: usize) -> Scene {
        generate_scene(
            seed,
            &SceneGenConfig { floors, rooms: 4, size_m: 12.0, ..Default::default() },
        )
        .unwrap()
    }

    #[test]
    fn same_seed_same_scene_bytes() {
        let a = scene_to_json(&test_scene(11, 2));
        let b = scene_to_json(&test_scene(11, 2));
        assert_eq!(serde_json::to_vec(&a).unwrap(), serde_json::to_vec(&b).unwrap());
        let c = scene_to_json(&test_scene(12, 2));
        assert_ne!(serde_json::to_vec(&a).unwrap(), serde_json::to_vec(&c).unwrap());
    }

    #[test]
    fn forward_into_free_space_advances_quarter_meter() {
        let scene = test_scene(1, 1);
        let room = scene.rooms[0].rect;
        let start = scene.cell_center(room.center_cell());
        let pose = AgentPose { x: start.x, y: start.y, z: 0.0, heading: 0.0, floor: 0 };
        let (next, collided) = apply_action(&scene, &pose, AgentAction::MoveForward);
        assert!(!collided);
        assert!((next.x - pose.x - FORWARD_STEP).abs() < 1e-9);
        assert_eq!(next.y, pose.y);
    }

    #[test]
    fn forward_into_wall_is_blocked() {
        let scene = test_scene(1, 1);
        // Face the outer wall from just inside it.
        let room = scene.rooms[0].rect;
        let inside = scene.cell_center(Cell::new(room.center_cell().row, room.c0 + 1));
        let pose = AgentPose { x: inside.x, y: inside.y, z: 0.0, heading: std::f64::consts::PI, floor: 0 };
        let (next, collided) = apply_action(&scene, &pose, AgentAction::MoveForward);
        assert!(collided);
        assert!(next.x >= inside.x - 0.1);
    }

    #[test]
    fn forward_climbs_stair_step() {
        let scene = test_scene(3, 2);
        let stair = &scene.stairs[0];
        // Stand just before the strip's ascending end, facing along it.
        let r = (stair.rect.r0 + stair.rect.r1) / 2;
        let (cell, heading) = if stair.along_cols {
            if stair.reversed {
                (Cell::new(r, stair.rect.c1), std::f64::consts::PI)
            } else {
                (Cell::new(r, stair.rect.c0 - 1), 0.0)
            }
        } else {
            let c = (stair.rect.c0 + stair.rect.c1) / 2;
            if stair.reversed {
                (Cell::new(stair.rect.r1, c), -std::f64::consts::FRAC_PI_2)
            } else {
                (Cell::new(stair.rect.r0 - 1, c), std::f64::consts::FRAC_PI_2)
            }
        };
        let p = scene.cell_center(cell);
        let pose = AgentPose { x: p.x, y: p.y, z: 0.0, heading, floor: 0 };
        let (next, collided) = apply_action(&scene, &pose, AgentAction::MoveForward);
        assert!(!collided, "stair entrance must be walkable");
        // One forward step crosses up to three treads; each substep stays
        // within the climb limit.
        assert!(next.z > 0.0 && next.z <= 3.0 * STEP_RISE + 1e-9, "climbed {}", next.z);
    }

    #[test]
    fn turns_rotate_thirty_degrees() {
        let scene = test_scene(1, 1);
        let pose = AgentPose { x: 3.0, y: 3.0, z: 0.0, heading: 0.0, floor: 0 };
        let (l, _) = apply_action(&scene, &pose, AgentAction::TurnLeft);
        assert!((l.heading - 30f64.to_radians()).abs() < 1e-12);
        let (r, _) = apply_action(&scene, &pose, AgentAction::TurnRight);
        assert!((r.heading + 30f64.to_radians()).abs() < 1e-12);
    }

    #[test]
    fn observation_occludes_behind_walls() {
        let scene = test_scene(2, 1);
        let room = scene.rooms[0].rect;
        let center = scene.cell_center(room.center_cell());
        let pose = AgentPose { x: center.x, y: center.y, z: 0.0, heading: 0.0, floor: 0 };
        let obs = observe(&scene, &pose, &SimConfig::default(), 0);
        assert!(!obs.sweep.cells.is_empty());
        // Rays reveal a cell by passing through any part of it, so the
        // check accepts line of sight to the center or any corner.
        for sc in &obs.sweep.cells {
            if sc.state != CellState::Free {
                continue;
            }
            let p = scene.cell_center(sc.cell);
            let h = scene.resolution / 2.0;
            let visible = [(0.0, 0.0), (-h, -h), (-h, h), (h, -h), (h, h)]
                .iter()
                .any(|(dx, dy)| {
                    line_of_sight(
                        &scene.floors[0],
                        scene.resolution,
                        center,
                        WorldPoint::new(p.x + dx, p.y + dy),
                    )
                });
            assert!(visible, "cell {:?} revealed without line of sight", sc.cell);
        }
    }

    #[test]
    fn detections_respect_range_fov_and_walls() {
        let scene = test_scene(2, 1);
        let cfg = SimConfig::default();
        // From each object's own position looking any way, the object is
        // detectable (distance 0).
        for o in scene.objects.iter().filter(|o| o.floor == 0) {
            let pose = AgentPose { x: o.position.x, y: o.position.y, z: 0.0, heading: 0.0, floor: 0 };
            let obs = observe(&scene, &pose, &cfg, 0);
            assert!(
                obs.detections.iter().any(|d| d.position == o.position),
                "object at own position must be detected"
            );
        }
        // Detections never cross walls and never exceed range.
        let room = scene.rooms[1].rect;
        let center = scene.cell_center(room.center_cell());
        let pose = AgentPose { x: center.x, y: center.y, z: 0.0, heading: 0.0, floor: 0 };
        let obs = observe(&scene, &pose, &cfg, 0);
        for d in &obs.detections {
            assert!(d.position.distance(center) <= cfg.range + 1e-9);
            assert!(line_of_sight(&scene.floors[0], scene.resolution, center, d.position));
        }
    }

    #[test]
    fn observation_soundness_every_detection_is_a_real_object() {
        let scene = test_scene(4, 2);
        let cfg = SimConfig::default();
        for room in scene.rooms.iter().filter(|r| r.floor == 0) {
            let c = scene.cell_center(room.rect.center_cell());
            let pose = AgentPose { x: c.x, y: c.y, z: 0.0, heading: 1.0, floor: 0 };
            for d in observe(&scene, &pose, &cfg, 0).detections {
                assert!(scene
                    .objects
                    .iter()
                    .any(|o| o.position == d.position && o.reported_category == d.category));
            }
        }
    }

    #[test]
    fn stop_next_to_target_succeeds_with_unit_spl() {
        let scene = test_scene(5, 1);
        let target = scene
            .objects
            .iter()
            .find(|o| !o.is_decoy())
            .expect("scene has objects");
        let spec = EpisodeSpec {
            id: 0,
            start: AgentPose {
                x: target.position.x,
                y: target.position.y,
                z: 0.0,
                heading: 0.0,
                floor: 0,
            },
            target: target.category.clone(),
            optimal_length: 0.0,
            success_distance: 0.1,
            step_budget: 10,
        };
        struct Stopper;
        impl Policy for Stopper {
            fn act(&mut self, _: &Observation, _: &str) -> AgentAction {
                AgentAction::Stop
            }
        }
        let r = run_episode(&scene, &spec, &mut Stopper, None);
        assert!(r.success);
        assert_eq!(r.steps, 1);
        assert_eq!(r.path_length, 0.0);
    }

    /// Follows a precomputed waypoint list, stopping at the end. Cursor
    /// advancement checks segments against the ground-truth planning mask
    /// so shortcuts never cut over stair sides or wall corners.
    struct PathFollower<'a> {
        oracle: &'a GeodesicOracle,
        waypoints: Vec<WorldPoint>,
        idx: usize,
    }

    impl Policy for PathFollower<'_> {
        fn act(&mut self, obs: &Observation, _target: &str) -> AgentAction {
            let here = WorldPoint::new(obs.pose.x, obs.pose.y);
            let pg = self.oracle.plan_grid(obs.pose.floor);
            self.idx = crate::plan::advance_cursor(pg, &self.waypoints, self.idx, here, 0.3);
            let last = self.waypoints.len() - 1;
            if self.idx == last && here.distance(self.waypoints[last]) <= 0.15 {
                return AgentAction::Stop;
            }
            crate::plan::next_action(&obs.pose, self.waypoints[self.idx], None)
        }
    }

    #[test]
    fn oracle_path_follower_is_near_optimal() {
        let scene = test_scene(8, 1);
        let target = scene.objects.iter().find(|o| !o.is_decoy()).unwrap();
        let start_room = scene
            .rooms
            .iter()
            .position(|r| {
                r.floor == 0 && !r.rect.contains(scene.world_to_cell(target.position))
            })
            .unwrap();
        let p = scene.cell_center(scene.rooms[start_room].rect.center_cell());
        let start = AgentPose { x: p.x, y: p.y, z: 0.0, heading: 0.0, floor: 0 };
        let oracle = GeodesicOracle::build(&scene);
        let path = oracle.path_to(&scene, &start, &target.category).unwrap();
        let spec = EpisodeSpec {
            id: 0,
            start,
            target: target.category.clone(),
            optimal_length: oracle.distance_to_target(&scene, &start, &target.category),
            success_distance: 0.25,
            step_budget: 500,
        };
        let mut follower =
            PathFollower { oracle: &oracle, waypoints: path.iter().map(|&(_, p)| p).collect(), idx: 0 };
        let r = run_episode(&scene, &spec, &mut follower, None);
        assert!(r.stopped, "follower must stop at the path end");
        assert_eq!(r.collisions, 0);
        // Turn quantization stretches the realized path a little; it still
        // tracks the oracle geodesic.
        assert!(
            r.path_length <= spec.optimal_length * 1.25 + 0.6,
            "path {} vs optimal {}",
            r.path_length,
            spec.optimal_length
        );
        assert!(r.d_final <= 0.6, "follower ends near the target, d_final {}", r.d_final);
    }

    #[test]
    fn oracle_path_follower_climbs_to_the_upper_floor() {
        let scene = test_scene(6, 2);
        // A target that exists only upstairs.
        let target = scene
            .objects
            .iter()
            .find(|o| {
                !o.is_decoy()
                    && o.floor == 1
                    && scene
                        .objects
                        .iter()
                        .all(|p| p.is_decoy() || p.category != o.category || p.floor == 1)
            })
            .expect("some category is exclusive to floor 1");
        let room = scene.rooms.iter().find(|r| r.floor == 0).unwrap();
        let p = scene.cell_center(room.rect.center_cell());
        let start = AgentPose { x: p.x, y: p.y, z: 0.0, heading: 0.0, floor: 0 };
        let oracle = GeodesicOracle::build(&scene);
        let path = oracle.path_to(&scene, &start, &target.category).unwrap();
        assert!(path.iter().any(|&(f, _)| f == 1), "path must cross to floor 1");
        let spec = EpisodeSpec {
            id: 0,
            start,
            target: target.category.clone(),
            optimal_length: oracle.distance_to_target(&scene, &start, &target.category),
            success_distance: 0.25,
            step_budget: 500,
        };
        let mut follower =
            PathFollower { oracle: &oracle, waypoints: path.iter().map(|&(_, p)| p).collect(), idx: 0 };
        let r = run_episode(&scene, &spec, &mut follower, None);
        assert!(r.stopped && r.collisions == 0, "stopped={} collisions={}", r.stopped, r.collisions);
        assert_eq!(r.final_pose.floor, 1, "follower must end on the upper floor");
        assert!(r.d_final <= 0.6, "d_final {}", r.d_final);
    }

    #[test]
    fn never_stopping_fails_at_budget() {
        let scene = test_scene(5, 1);
        let spec = EpisodeSpec {
            id: 1,
            start: AgentPose { x: 3.0, y: 3.0, z: 0.0, heading: 0.0, floor: 0 },
            target: "bed".into(),
            optimal_length: 1.0,
            success_distance: 0.1,
            step_budget: 25,
        };
        struct Spinner;
        impl Policy for Spinner {
            fn act(&mut self, _: &Observation, _: &str) -> AgentAction {
                AgentAction::TurnLeft
            }
        }
        let r = run_episode(&scene, &spec, &mut Spinner, None);
        assert!(!r.success && !r.stopped);
        assert_eq!(r.steps, 25);
    }
}
