use semnav::bench::{run_benchmark, SuiteConfig};
use semnav::geom::{Cell, WorldPoint};
use semnav::grid::{CellState, OccupancyGrid};
use semnav::imagine::{graph_precision_recall, predict_scene_graph, AdjacencyPriorPredictor};
use semnav::sim::{generate_scene, Scene, SceneGenConfig};

fn cross(stairs: bool) {
    let mut suite = SuiteConfig {
        scene_count: 10,
        episodes_per_scene: 5,
        cross_floor: Some(true),
        step_budget: 1000,
        variants: "e".into(),
        workers: 1,
        ..SuiteConfig::default()
    };
    suite.nav.agent.stairs_enabled = stairs;
    let t0 = std::time::Instant::now();
    let out = run_benchmark(&suite).unwrap();
    let r = &out.reports[0];
    println!(
        "cross stairs={} SR {:.3} ({} eps) in {:.0}s",
        stairs,
        r.success_rate(),
        r.rows.len(),
        t0.elapsed().as_secs_f64()
    );
}

fn decoy(verify: bool) {
    let mut suite = SuiteConfig {
        scene_count: 10,
        episodes_per_scene: 10,
        decoys: 4,
        variants: "e".into(),
        workers: 1,
        ..SuiteConfig::default()
    };
    suite.nav.agent.verify_enabled = verify;
    let t0 = std::time::Instant::now();
    let out = run_benchmark(&suite).unwrap();
    let r = &out.reports[0];
    println!(
        "decoy verify={} SR {:.3} false_stops {} ({} eps) in {:.0}s",
        verify,
        r.success_rate(),
        r.false_stops(),
        r.rows.len(),
        t0.elapsed().as_secs_f64()
    );
}

fn half_explored(scene: &Scene, hide_room: usize) -> (OccupancyGrid, semnav::graph::SceneGraph) {
    let raster = &scene.floors[0];
    let n = scene.n;
    let mut grid =
        OccupancyGrid::new(n, n, scene.resolution, WorldPoint::new(0.0, 0.0), 0);
    let hidden = &scene.rooms[hide_room];
    for r in 0..n as i32 {
        for c in 0..n as i32 {
            let cell = Cell::new(r, c);
            if hidden.rect.contains(cell) {
                continue;
            }
            let state = if raster.is_wall(cell) { CellState::Occupied } else { CellState::Free };
            grid.set_state(cell, state);
        }
    }
    let mut g = scene.ground_truth.clone();
    let remove: Vec<_> = g
        .regions
        .values()
        .filter(|r| r.floor == 0 && hidden.rect.contains(grid.world_to_cell(r.center)))
        .map(|r| r.id)
        .collect();
    for rid in remove {
        if let Some(region) = g.regions.remove(&rid) {
            for oid in region.members {
                g.objects.remove(&oid);
                g.object_parent.remove(&oid);
            }
        }
    }
    (grid, g)
}

fn halfx(radius: f64) {
    let cfg = SceneGenConfig::default();
    let mut imagine = semnav::config::ImagineConfig::default();
    imagine.context_radius = 8.0;
    let predictor = AdjacencyPriorPredictor;
    let (mut sum_base_r, mut sum_pred_r) = (0.0, 0.0);
    let (mut sum_base_p, mut sum_pred_p) = (0.0, 0.0);
    let mut n_p = 0usize;
    let count = 100;
    for i in 0..count {
        let scene = generate_scene(500 + i as u64, &cfg).unwrap();
        let floor0_rooms: Vec<usize> = (0..scene.rooms.len())
            .filter(|&k| scene.rooms[k].floor == 0)
            .collect();
        let hide = floor0_rooms[i % floor0_rooms.len()];
        let (grid, base) = half_explored(&scene, hide);
        let truth: Vec<(String, WorldPoint)> = scene
            .ground_truth
            .regions_on_floor(0)
            .map(|r| (r.top_caption().unwrap_or("unknown").to_string(), r.center))
            .collect();
        let mut pred = base.clone();
        let outcome = predict_scene_graph(&mut pred, &grid, &predictor, "bed", &imagine);
        if !outcome.warnings.is_empty() {
            println!("warn: {:?}", outcome.warnings);
        }
        if i < 5 {
            println!(
                "scene {i}: unknown {} preds {} inserted {} truth {:?} imagined {:?}",
                outcome.unknown_regions.len(),
                outcome.predictions.len(),
                outcome.inserted_regions.len(),
                truth.iter().map(|(l, c)| (l.as_str(), c.x, c.y)).collect::<Vec<_>>(),
                pred.regions_on_floor(0)
                    .filter(|r| r.provenance == semnav::graph::Provenance::Imagined)
                    .map(|r| (r.top_caption().unwrap_or("?").to_string(), r.center.x, r.center.y))
                    .collect::<Vec<_>>(),
            );
        }
        let mb = graph_precision_recall(&base, &truth, 0, radius).unwrap();
        let mp = graph_precision_recall(&pred, &truth, 0, radius).unwrap();
        sum_base_r += mb.recall;
        sum_pred_r += mp.recall;
        if let (Some(pb), Some(pp)) = (mb.precision, mp.precision) {
            sum_base_p += pb;
            sum_pred_p += pp;
            n_p += 1;
        }
    }
    println!(
        "halfx radius {}: base R@1 {:.4} pred R@1 {:.4} | base P@1 {:.4} pred P@1 {:.4}",
        radius,
        sum_base_r / count as f64,
        sum_pred_r / count as f64,
        sum_base_p / n_p as f64,
        sum_pred_p / n_p as f64,
    );
}

fn main() {
    let mode = std::env::args().nth(1).unwrap_or_default();
    match mode.as_str() {
        "cross" => {
            cross(true);
            cross(false);
        }
        "decoy" => {
            decoy(false);
            decoy(true);
        }
        "halfx" => {
            let radius: f64 =
                std::env::args().nth(2).map(|s| s.parse().unwrap()).unwrap_or(3.0);
            halfx(radius);
        }
        other => eprintln!("unknown mode {other}"),
    }
}
