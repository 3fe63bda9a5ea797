use demnet::bvp::Schedule;
use demnet::elasticity::{build_elastic_benchmark, ElasticConfig};
use demnet::geometry::Sampling;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let name = args.get(1).map(|s| s.as_str()).unwrap_or("thick_cylinder");
    let n: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(80);
    let adam: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(300);
    let lbfgs: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(100);
    let t0 = std::time::Instant::now();
    let three_d = name == "hollow_sphere" || name == "cube_hole";
    let cfg = ElasticConfig {
        interior: if three_d { None } else { Some(Sampling::cells(&[n, n])) },
        ..Default::default()
    };
    let mut b = build_elastic_benchmark(name, &cfg).unwrap();
    let sched = Schedule {
        adam_steps: adam,
        adam_lr: 2e-3,
        lbfgs_steps: lbfgs,
        lbfgs_memory: 40,
        ..Default::default()
    };
    let out = b.train(&sched).unwrap();
    let rep = b.evaluate();
    println!(
        "{name}: loss {:.6e} rel {:?} t {:.0}s status {:?}",
        out.loss, rep.rel_l2, t0.elapsed().as_secs_f64(), out.lbfgs_status
    );
}
