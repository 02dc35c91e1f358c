use semnav::bench::{run_benchmark, SuiteConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let scenes: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(25);
    let eps: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(8);
    let suite = SuiteConfig {
        scene_count: scenes,
        episodes_per_scene: eps,
        workers: 8,
        ..SuiteConfig::default()
    };
    let t0 = std::time::Instant::now();
    let out = run_benchmark(&suite).unwrap();
    for r in &out.reports {
        println!(
            "variant {}: SR {:.3} spl {:.3} softspl {:.3} ({} eps)",
            r.variant,
            r.success_rate(),
            r.mean_spl(),
            r.mean_soft_spl(),
            r.rows.len()
        );
    }
    println!("elapsed {:.1}s", t0.elapsed().as_secs_f64());
}
