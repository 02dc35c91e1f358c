use semnav::agent::{NavAgent, VariantFlags};
use semnav::config::NavConfig;
use semnav::sim::{generate_scene, run_episode, sample_episodes, EpisodeGenConfig, SceneGenConfig};

fn main() {
    let scene_cfg = SceneGenConfig { floors: 2, ..Default::default() };
    let scene = generate_scene(21, &scene_cfg).unwrap();
    let gen = EpisodeGenConfig { success_distance: 0.25, cross_floor: Some(true), step_budget: 1000, ..Default::default() };
    let spec = &sample_episodes(&scene, 9, 1, &gen).unwrap()[0];
    println!("start f{} ({:.2},{:.2}) target {} optimal {:.2}", spec.start.floor, spec.start.x, spec.start.y, spec.target, spec.optimal_length);
    for o in scene.objects.iter().filter(|o| o.reported_category == spec.target) {
        println!("  target obj f{} ({:.2},{:.2}) true {}", o.floor, o.position.x, o.position.y, o.category);
    }
    let mut cfg = NavConfig::default();
    cfg.agent.success_distance = 0.25;
    cfg.gain.hierarchy = semnav::config::HierarchyLevels::ObjectAndRegion;
    let mut agent = NavAgent::for_scene(&scene, cfg, VariantFlags::from_tag('d').unwrap()).record_trace(true);
    let r = run_episode(&scene, spec, &mut agent, None);
    println!("success {} stopped {} steps {} floor {} d_final {:.2}", r.success, r.stopped, r.steps, r.final_pose.floor, r.d_final);
    let trace = agent.take_trace();
    let mut counts = std::collections::BTreeMap::new();
    for row in &trace { *counts.entry(row.branch.clone()).or_insert(0usize) += 1; }
    println!("{counts:?}");
    for row in trace.iter().step_by(15) {
        println!("{:3} {:10} {:?} ({:.2},{:.2},z{:.2},f{}) cand {}", row.step, row.branch, row.action, row.x, row.y, row.z, row.floor, row.candidates);
    }
}
