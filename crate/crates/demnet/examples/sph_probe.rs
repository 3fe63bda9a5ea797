use demnet::bvp::Schedule;
use demnet::elasticity::{train_elastic_resampled, ElasticConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let segments: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(12);
    let steps: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(25);
    let lbfgs: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(0);
    let seed: u64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(0);
    let t0 = std::time::Instant::now();
    let cfg = ElasticConfig { seed, ..Default::default() };
    let (mut b, out) =
        train_elastic_resampled("hollow_sphere", &cfg, segments, steps, 2e-3).unwrap();
    let fixed_loss = b.problem.loss(&b.problem.flatten_params()).unwrap();
    let rep = b.evaluate();
    println!(
        "adam {}x{} seed {seed}: loss {:.4e} fixed {:.4e} rel {:?} energy {:?} t {:.0}s",
        segments,
        steps,
        out.loss,
        fixed_loss,
        rep.rel_l2,
        rep.energy_rel_error,
        t0.elapsed().as_secs_f64()
    );
    if lbfgs > 0 {
        let sched = Schedule { lbfgs_steps: lbfgs, lbfgs_memory: 40, ..Default::default() };
        let out = b.train(&sched).unwrap();
        let rep = b.evaluate();
        println!(
            "lbfgs {lbfgs}: loss {:.4e} rel {:?} energy {:?} t {:.0}s {:?}",
            out.loss,
            rep.rel_l2,
            rep.energy_rel_error,
            t0.elapsed().as_secs_f64(),
            out.lbfgs_status
        );
    }
}
