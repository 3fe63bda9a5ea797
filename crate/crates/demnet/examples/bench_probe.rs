//! Dev probe for the non-elastic, non-plate benchmarks.
//! Usage: bench_probe <wave|cuboid|pf1d_dem|pf1d_dcm|piezo_mech|piezo_elec|sent> <adam> <lbfgs> [seed]

use std::time::Instant;

use demnet::bvp::Schedule;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args[1].as_str();
    let adam: usize = args[2].parse().unwrap();
    let lbfgs: usize = args[3].parse().unwrap();
    let seed: u64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(0);
    let sched = Schedule {
        adam_steps: adam,
        adam_lr: 2e-3,
        lbfgs_steps: lbfgs,
        lbfgs_memory: 40,
        ..Default::default()
    };
    let t0 = Instant::now();
    match which {
        "wave" => {
            use demnet::dynamics::*;
            let cfg = WaveConfig { seed, ..Default::default() };
            let mut b = build_wave_benchmark(&cfg);
            let out = b.problem.train(&sched).unwrap();
            let rep = b.evaluate(&default_wave_reference(&cfg));
            println!(
                "wave seed {seed}: loss {:e} rel {:?} t {:.0}s {:?}",
                out.loss,
                rep.rel_l2,
                t0.elapsed().as_secs_f64(),
                out.lbfgs_status
            );
        }
        "cuboid" => {
            use demnet::hyper::*;
            let cfg = HyperConfig { seed, ..Default::default() };
            let mut b = build_hyper_benchmark(&cfg);
            let out = b.train(&sched).unwrap();
            let (l2, h1) = b.norms();
            println!(
                "cuboid seed {seed}: loss {:e} L2 {:.5} (0.13275) H1 {:.5} (0.51407) t {:.0}s {:?}",
                out.loss,
                l2,
                h1,
                t0.elapsed().as_secs_f64(),
                out.lbfgs_status
            );
        }
        "pf1d_dem" | "pf1d_dcm" => {
            use demnet::phasefield::*;
            let method = if which == "pf1d_dem" { PfMethod::Dem } else { PfMethod::Dcm };
            let cfg = Bar1dConfig { seed, ..Default::default() };
            let mut b = build_1d_problem(method, &cfg);
            let out = b.train(&sched).unwrap();
            let rel = b.evaluate(10001);
            println!(
                "{which} seed {seed}: loss {:e} rel_l2 {:.4} t {:.0}s {:?}",
                out.loss,
                rel,
                t0.elapsed().as_secs_f64(),
                out.lbfgs_status
            );
        }
        "piezo_mech" | "piezo_elec" => {
            use demnet::piezo::*;
            let mat = PiezoMaterial::pzt_like();
            let cfg = PiezoConfig { seed, ..PiezoConfig::desk() };
            let case = if which == "piezo_mech" {
                LoadCase::Mechanical
            } else {
                LoadCase::Electrical
            };
            let mut b = build_cantilever(case, &mat, &cfg);
            let out = b.train(&sched).unwrap();
            println!(
                "{which} seed {seed}: loss {:e} tip {:e} top_pot {:e} t {:.0}s {:?}",
                out.loss,
                b.tip_deflection(),
                b.top_potential(),
                t0.elapsed().as_secs_f64(),
                out.lbfgs_status
            );
        }
        "sent" => {
            use demnet::phasefield::*;
            let cfg = SentConfig { seed, ..SentConfig::desk() };
            let mut s = build_sent_problem(&cfg);
            let out = s.train(&sched).unwrap();
            let ys: Vec<f64> = (0..81).map(|i| i as f64 / 80.0).collect();
            for x in [0.1, 0.3] {
                let prof = s.phi_profile(x, &ys);
                let exact: Vec<f64> = ys
                    .iter()
                    .map(|&y| phi_oracle_1d(y, 0.5, FractureMaterial::sent().l0))
                    .collect();
                let rel = demnet::validation::relative_l2(&prof, &exact);
                println!("  profile x={x}: rel_l2 {rel:.4}");
            }
            let crack_phi = s.phi_at(
                &(0..26).map(|i| [i as f64 * 0.02, 0.5, 0.0]).collect::<Vec<_>>(),
            );
            let min_phi = crack_phi.iter().cloned().fold(f64::INFINITY, f64::min);
            println!(
                "sent seed {seed}: loss {:e} min_phi_on_crack {:.4} t {:.0}s {:?}",
                out.loss,
                min_phi,
                t0.elapsed().as_secs_f64(),
                out.lbfgs_status
            );
        }
        other => panic!("unknown probe `{other}`"),
    }
}
