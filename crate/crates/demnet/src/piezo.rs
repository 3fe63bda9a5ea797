//! Plane-strain linear piezoelectricity: electric-enthalpy energy
//! density coupling displacement and electric potential networks, and a
//! cantilever beam solved under a mechanical tip load or an applied
//! electrode voltage.

use crate::autodiff::Var;
use crate::bvp::{Problem, Schedule, Term, TrainError, TrainOutcome, TrialMap};
use crate::elasticity::{ElasticMaterial, Regime};
use crate::geometry::{sample_boundary, sample_interior, DomainSpec, Sampling};
use crate::network::{Activation, MlpParams};

/// Plane-strain piezoelectric material: elastic stiffness (Voigt
/// c11, c12, c22, c33), piezoelectric coupling (e31, e33, e15), and
/// diagonal dielectric permittivity (κ11, κ22). Poling is along y:
/// Dy couples to the normal strains, Dx to the engineering shear.
#[derive(Clone, Copy, Debug)]
pub struct PiezoMaterial {
    pub c: [f64; 4],
    pub e: [f64; 3],
    pub kappa: [f64; 2],
}

impl PiezoMaterial {
    pub fn new(c: [f64; 4], e: [f64; 3], kappa: [f64; 2]) -> PiezoMaterial {
        assert!(c[0] > 0.0 && c[2] > 0.0 && c[3] > 0.0, "stiffness diagonal must be positive");
        assert!(c[0] * c[2] > c[1] * c[1], "stiffness must be positive definite");
        assert!(kappa[0] > 0.0 && kappa[1] > 0.0, "permittivity must be positive definite");
        PiezoMaterial { c, e, kappa }
    }

    /// Nondimensional PZT-like default: stiffness from an isotropic
    /// E=100, ν=0.3 plane-strain law, coupling and permittivity of
    /// order one relative to the working strain/field scales.
    pub fn pzt_like() -> PiezoMaterial {
        let c = ElasticMaterial::new(100.0, 0.3, Regime::PlaneStrain).c2d();
        PiezoMaterial::new(c, [-0.010, 0.020, 0.015], [1.0, 1.0])
    }

    /// Same material with the piezoelectric coupling switched off.
    pub fn decoupled(&self) -> PiezoMaterial {
        PiezoMaterial { e: [0.0; 3], ..*self }
    }
}

/// Pointwise electro-mechanical state: strain (εxx, εyy, γxy) and
/// electric field E = −∇θ.
#[derive(Clone, Copy, Debug)]
pub struct ElectroState {
    pub strain: [f64; 3],
    pub e_field: [f64; 2],
}

impl ElectroState {
    /// Electric displacement D = e:ε + κ·E.
    pub fn electric_displacement(&self, mat: &PiezoMaterial) -> [f64; 2] {
        let [exx, eyy, gxy] = self.strain;
        let [ex, ey] = self.e_field;
        [
            mat.e[2] * gxy + mat.kappa[0] * ex,
            mat.e[0] * exx + mat.e[1] * eyy + mat.kappa[1] * ey,
        ]
    }

    /// Stress σ = ℂ:ε − eᵀ·E.
    pub fn stress(&self, mat: &PiezoMaterial) -> [f64; 3] {
        let [exx, eyy, gxy] = self.strain;
        let [ex, ey] = self.e_field;
        let [c11, c12, c22, c33] = mat.c;
        [
            c11 * exx + c12 * eyy - mat.e[0] * ey,
            c12 * exx + c22 * eyy - mat.e[1] * ey,
            c33 * gxy - mat.e[2] * ex,
        ]
    }
}

/// Electric enthalpy Ψ = ½ε:ℂ:ε − E·(e:ε) − ½E·κ·E. Stress and
/// electric displacement follow as σ = ∂Ψ/∂ε and D = −∂Ψ/∂E.
pub fn enthalpy_density(state: &ElectroState, mat: &PiezoMaterial) -> f64 {
    let [exx, eyy, gxy] = state.strain;
    let [ex, ey] = state.e_field;
    let [c11, c12, c22, c33] = mat.c;
    let elastic = 0.5 * c11 * exx * exx
        + c12 * exx * eyy
        + 0.5 * c22 * eyy * eyy
        + 0.5 * c33 * gxy * gxy;
    let coupling = ex * mat.e[2] * gxy + ey * (mat.e[0] * exx + mat.e[1] * eyy);
    let dielectric = 0.5 * (mat.kappa[0] * ex * ex + mat.kappa[1] * ey * ey);
    elastic - coupling - dielectric
}

fn enthalpy_on_tape<'t, const M: usize>(
    strain: [Var<'t, M>; 3],
    e_field: [Var<'t, M>; 2],
    mat: &PiezoMaterial,
) -> Var<'t, M> {
    let [exx, eyy, gxy] = strain;
    let [ex, ey] = e_field;
    let [c11, c12, c22, c33] = mat.c;
    let elastic = (exx * exx).scale(0.5 * c11)
        + (exx * eyy).scale(c12)
        + (eyy * eyy).scale(0.5 * c22)
        + (gxy * gxy).scale(0.5 * c33);
    let coupling =
        (ex * gxy).scale(mat.e[2]) + ey * (exx.scale(mat.e[0]) + eyy.scale(mat.e[1]));
    let dielectric = (ex * ex).scale(0.5 * mat.kappa[0]) + (ey * ey).scale(0.5 * mat.kappa[1]);
    elastic - coupling - dielectric
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoadCase {
    /// Downward traction on the free tip; potential grounded at the
    /// bottom, the top electrode floats.
    Mechanical,
    /// Potential fixed to `volt` on the top electrode, grounded bottom;
    /// no mechanical load.
    Electrical,
}

/// Cantilever configuration. Lengths and loads are nondimensional; the
/// characteristic displacement and potential scales are folded into the
/// trial maps so the networks train on order-one outputs.
#[derive(Clone, Debug)]
pub struct PiezoConfig {
    pub length: f64,
    pub height: f64,
    pub nx: usize,
    pub ny: usize,
    pub n_bound: usize,
    pub hidden: Vec<usize>,
    pub seed: u64,
    /// Tip traction magnitude (mechanical case, acts in −y).
    pub tip_load: f64,
    /// Top-electrode potential (electrical case).
    pub volt: f64,
    pub u_scale: f64,
    pub theta_scale: f64,
}

impl Default for PiezoConfig {
    fn default() -> PiezoConfig {
        PiezoConfig {
            length: 10.0,
            height: 1.0,
            nx: 80,
            ny: 12,
            n_bound: 40,
            hidden: vec![150, 150, 150],
            seed: 0,
            tip_load: 1e-3,
            volt: -100.0,
            u_scale: 0.05,
            theta_scale: 1.0,
        }
    }
}

impl PiezoConfig {
    /// Reduced network for quick runs on a laptop CPU.
    pub fn desk() -> PiezoConfig {
        PiezoConfig { hidden: vec![40, 40, 40], nx: 60, ny: 10, ..Default::default() }
    }
}

pub struct PiezoBenchmark {
    pub loadcase: LoadCase,
    pub mat: PiezoMaterial,
    pub cfg: PiezoConfig,
    pub problem: Problem<4>,
    pub trial: TrialMap<4>,
}

/// Trial map producing [u, v, θ]. The factor x clamps the left edge;
/// θ vanishes on the grounded bottom edge and, in the electrical case,
/// a lift carries the imposed electrode voltage on the top edge.
fn cantilever_trial(loadcase: LoadCase, cfg: &PiezoConfig) -> TrialMap<4> {
    let (h, su, st) = (cfg.height, cfg.u_scale, cfg.theta_scale);
    let volt = cfg.volt;
    TrialMap::new(move |ctx| {
        let x = ctx.input(0);
        let y = ctx.input(1);
        let out = ctx.net(0);
        let u = (x * out[0]).scale(su);
        let v = (x * out[1]).scale(su);
        let theta = match loadcase {
            LoadCase::Mechanical => (y * out[2]).scale(st),
            LoadCase::Electrical => {
                y.scale(volt / h) + (y * (y - ctx.constant(h)) * out[2]).scale(st)
            }
        };
        vec![u, v, theta]
    })
}

pub fn build_cantilever(loadcase: LoadCase, mat: &PiezoMaterial, cfg: &PiezoConfig) -> PiezoBenchmark {
    let domain = DomainSpec::Rectangle { lb: [0.0, 0.0], ub: [cfg.length, cfg.height] };
    let mut widths = vec![2usize];
    widths.extend_from_slice(&cfg.hidden);
    widths.push(3);
    let net = MlpParams::xavier_init(
        &widths,
        Activation::Tanh,
        &[0.0, 0.0],
        &[cfg.length, cfg.height],
        cfg.seed,
    );
    let mut problem: Problem<4> = Problem::new(2, 1, vec![net]);
    let trial = cantilever_trial(loadcase, cfg);

    let interior = sample_interior(&domain, &Sampling::cells(&[cfg.nx, cfg.ny]));
    let t = trial.clone();
    let m = *mat;
    problem.add_term(Term::quadrature("enthalpy", interior, move |ctx, _| {
        let f = t.eval(ctx);
        let strain = [
            ctx.partial(f[0], &[1, 0]),
            ctx.partial(f[1], &[0, 1]),
            ctx.partial(f[0], &[0, 1]) + ctx.partial(f[1], &[1, 0]),
        ];
        let e_field = [
            ctx.partial(f[2], &[1, 0]).scale(-1.0),
            ctx.partial(f[2], &[0, 1]).scale(-1.0),
        ];
        vec![enthalpy_on_tape(strain, e_field, &m)]
    }));

    if loadcase == LoadCase::Mechanical {
        let tip = sample_boundary(&domain, "right", &Sampling::grid(&[cfg.n_bound]));
        let t = trial.clone();
        let f_y = -cfg.tip_load;
        problem.add_term(
            Term::quadrature("tip_work", tip, move |ctx, _| {
                vec![t.eval(ctx)[1].scale(f_y)]
            })
            .scaled(-1.0),
        );
    }

    PiezoBenchmark { loadcase, mat: *mat, cfg: cfg.clone(), problem, trial }
}

impl PiezoBenchmark {
    pub fn train(&mut self, schedule: &Schedule) -> Result<TrainOutcome, TrainError> {
        self.problem.train(schedule)
    }

    /// (u, v, θ) at arbitrary points.
    pub fn predict(&self, pts: &[[f64; 3]]) -> Vec<[f64; 3]> {
        let t = self.trial.clone();
        self.problem.eval_at(pts, |ctx, _| {
            let f = t.eval(ctx);
            [f[0].value(), f[1].value(), f[2].value()]
        })
    }

    /// Vertical deflection at the tip mid-height.
    pub fn tip_deflection(&self) -> f64 {
        self.predict(&[[self.cfg.length, 0.5 * self.cfg.height, 0.0]])[0][1]
    }

    /// Potential at the top-edge midpoint.
    pub fn top_potential(&self) -> f64 {
        self.predict(&[[0.5 * self.cfg.length, self.cfg.height, 0.0]])[0][2]
    }

    /// Write x, y, u, v, θ on a uniform grid.
    pub fn write_fields_csv(&self, path: &std::path::Path, nx: usize, ny: usize) -> std::io::Result<()> {
        use std::io::Write;
        let domain =
            DomainSpec::Rectangle { lb: [0.0, 0.0], ub: [self.cfg.length, self.cfg.height] };
        let grid = sample_interior(&domain, &Sampling::cells(&[nx, ny]));
        let vals = self.predict(&grid.points);
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "x,y,u,v,theta")?;
        for (p, v) in grid.points.iter().zip(vals) {
            writeln!(f, "{},{},{},{},{}", p[0], p[1], v[0], v[1], v[2])?;
        }
        Ok(())
    }
}
