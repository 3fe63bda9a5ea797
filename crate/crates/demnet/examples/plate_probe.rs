//! Dev probe: train one plate benchmark and print its error report.
//! Usage: plate_probe <bench> <dem|dcm> <adam> <lbfgs> [seed]

use std::time::Instant;

use demnet::bvp::Schedule;
use demnet::plate::{build_plate, PlateBench, PlateConfig, PlateMethod};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let bench = PlateBench::parse(&args[1]).expect("bench name");
    let method = match args[2].as_str() {
        "dem" => PlateMethod::Dem,
        "dcm" => PlateMethod::Dcm,
        _ => panic!("method"),
    };
    let adam: usize = args[3].parse().unwrap();
    let lbfgs: usize = args[4].parse().unwrap();
    let seed: u64 = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(0);

    let cfg = PlateConfig { seed, ..Default::default() };
    let mat = bench.material();
    let mut b = build_plate(bench, method, &mat, &cfg);
    let t0 = Instant::now();
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
        "{} {:?} seed {}: loss {:e} rel_l2 {:.4} probe {:.6e} vs {:.6e} (err {:.4}) t {:.0}s {:?}",
        bench.name(),
        method,
        seed,
        out.loss,
        rep.rel_l2,
        rep.probe_pred,
        rep.probe_exact,
        rep.probe_rel_err,
        t0.elapsed().as_secs_f64(),
        out.lbfgs_status
    );
}
