//! Quadrature sanity for the hollow-sphere benchmark: weight sums
//! against exact measures, and the discrete energy of the closed-form
//! field compared with its continuous value.

use demnet::elasticity::{sphere_oracle, ElasticMaterial, Regime};

const SPH_RA: f64 = 4.0;
const SPH_RB: f64 = 1.0;
const SPH_P: f64 = 1.0;
use demnet::geometry::{sample_boundary, sample_interior, DomainSpec, Sampling};

fn main() {
    let mat = ElasticMaterial::new(1e3, 0.3, Regime::Solid3d);
    let domain = DomainSpec::SphereOctantShell { ra: SPH_RB, rb: SPH_RA };

    let interior = sample_interior(&domain, &Sampling::cells(&[40, 40, 5]));
    let wsum: f64 = interior.weights.iter().sum();
    let vol = 4.0 * std::f64::consts::PI / 3.0 * (SPH_RA.powi(3) - SPH_RB.powi(3)) / 8.0;
    println!("interior weight sum {wsum:.6} exact volume {vol:.6}");

    let inner = sample_boundary(&domain, "inner", &Sampling::cells(&[40, 5]));
    let bsum: f64 = inner.weights.iter().sum();
    let area = 4.0 * std::f64::consts::PI * SPH_RB * SPH_RB / 8.0;
    println!("inner weight sum {bsum:.6} exact area {area:.6}");

    let u_disc: f64 = interior
        .points
        .iter()
        .zip(&interior.weights)
        .map(|(p, w)| sphere_oracle(*p, &mat, SPH_RA, SPH_RB, SPH_P).psi * w)
        .sum();
    let w_disc: f64 = inner
        .points
        .iter()
        .zip(&inner.weights)
        .map(|(p, w)| {
            let o = sphere_oracle(*p, &mat, SPH_RA, SPH_RB, SPH_P);
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            let ur = (o.u[0] * p[0] + o.u[1] * p[1] + o.u[2] * p[2]) / r;
            SPH_P * ur * w
        })
        .sum();
    let exact = 5.236e-4;
    println!("discrete U {u_disc:.6e} (exact {:.6e})", exact);
    println!("discrete W {w_disc:.6e} (exact {:.6e})", 2.0 * exact);
    println!("discrete loss {:.6e} (exact {:.6e})", u_disc - w_disc, -exact);
}
