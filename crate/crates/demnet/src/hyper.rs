//! Finite-deformation Neo-Hookean elasticity and the twisted-cuboid
//! benchmark: a [0, 1.25] × [0, 1] × [0, 1] bar clamped at X1 = 0,
//! twisted 60° about the center of the far face, under a body force
//! and tractions on the four lateral faces.

use crate::autodiff::{Tape, Var};
use crate::bvp::{PointCtx, Problem, Schedule, Term, TrainOutcome, TrialMap};
use crate::geometry::{sample_box_face, sample_interior, DomainSpec, QuadratureSet, Sampling};
use crate::network::{Activation, MlpParams};

pub const BAR_LEN: f64 = 1.25;

#[derive(Clone, Copy, Debug)]
pub struct NeoHookeanMaterial {
    pub e: f64,
    pub nu: f64,
}

impl Default for NeoHookeanMaterial {
    fn default() -> NeoHookeanMaterial {
        NeoHookeanMaterial { e: 1e6, nu: 0.3 }
    }
}

impl NeoHookeanMaterial {
    pub fn lambda(&self) -> f64 {
        self.e * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu))
    }

    pub fn mu(&self) -> f64 {
        self.e / (2.0 * (1.0 + self.nu))
    }
}

#[derive(Debug, thiserror::Error)]
#[error("inadmissible deformation state at {x:?}: det F = {j}")]
pub struct InadmissibleState {
    pub x: [f64; 3],
    pub j: f64,
}

/// Deformation gradient with its invariants.
#[derive(Clone, Copy, Debug)]
pub struct DeformationState {
    pub f: [[f64; 3]; 3],
    pub j: f64,
    pub i1: f64,
}

pub fn det3(f: &[[f64; 3]; 3]) -> f64 {
    f[0][0] * (f[1][1] * f[2][2] - f[1][2] * f[2][1])
        - f[0][1] * (f[1][0] * f[2][2] - f[1][2] * f[2][0])
        + f[0][2] * (f[1][0] * f[2][1] - f[1][1] * f[2][0])
}

impl DeformationState {
    pub fn new(f: [[f64; 3]; 3], x: [f64; 3]) -> Result<DeformationState, InadmissibleState> {
        let j = det3(&f);
        if j <= 0.0 {
            return Err(InadmissibleState { x, j });
        }
        let i1 = f.iter().flatten().map(|v| v * v).sum();
        Ok(DeformationState { f, j, i1 })
    }
}

/// Ψ = ½ λ (log J)² − μ log J + ½ μ (I1 − 3).
pub fn neo_hookean_psi_f64(mat: &NeoHookeanMaterial, s: &DeformationState) -> f64 {
    let (la, mu) = (mat.lambda(), mat.mu());
    let lj = s.j.ln();
    0.5 * la * lj * lj - mu * lj + 0.5 * mu * (s.i1 - 3.0)
}

fn inv_transpose(f: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let j = det3(f);
    let cof = |r: usize, c: usize| {
        let (r1, r2) = ((r + 1) % 3, (r + 2) % 3);
        let (c1, c2) = ((c + 1) % 3, (c + 2) % 3);
        f[r1][c1] * f[r2][c2] - f[r1][c2] * f[r2][c1]
    };
    // F⁻ᵀ = cof(F) / det F
    core::array::from_fn(|i| core::array::from_fn(|k| cof(i, k) / j))
}

/// First Piola-Kirchhoff stress P = μ (F − F⁻ᵀ) + λ log(J) F⁻ᵀ.
pub fn first_piola(mat: &NeoHookeanMaterial, f: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let (la, mu) = (mat.lambda(), mat.mu());
    let fit = inv_transpose(f);
    let lj = det3(f).ln();
    core::array::from_fn(|i| {
        core::array::from_fn(|k| mu * (f[i][k] - fit[i][k]) + la * lj * fit[i][k])
    })
}

/// Ψ on the tape from the nine deformation-gradient entries.
pub fn neo_hookean_psi<'t, const M: usize>(
    mat: &NeoHookeanMaterial,
    tape: &'t Tape<M>,
    f: &[[Var<'t, M>; 3]; 3],
) -> Var<'t, M> {
    let (la, mu) = (mat.lambda(), mat.mu());
    let det = f[0][0] * (f[1][1] * f[2][2] - f[1][2] * f[2][1])
        - f[0][1] * (f[1][0] * f[2][2] - f[1][2] * f[2][0])
        + f[0][2] * (f[1][0] * f[2][1] - f[1][1] * f[2][0]);
    let lj = det.ln();
    let mut i1 = tape.constant(-3.0);
    for row in f {
        for v in row {
            i1 = i1 + *v * *v;
        }
    }
    (lj * lj).scale(0.5 * la) - lj.scale(mu) + i1.scale(0.5 * mu)
}

/// Prescribed displacement on the twisted face X1 = 1.25: rotation by
/// 60° about (0.5, 0.5) in the X2-X3 plane, scaled by 0.5.
pub fn twist_bc(x2: f64, x3: f64) -> [f64; 3] {
    let (s, c) = (std::f64::consts::PI / 3.0).sin_cos();
    [
        0.0,
        0.5 * (0.5 + (x2 - 0.5) * c - (x3 - 0.5) * s - x2),
        0.5 * (0.5 + (x2 - 0.5) * s + (x3 - 0.5) * c - x3),
    ]
}

#[derive(Clone, Debug)]
pub struct HyperConfig {
    /// Grid points per axis for the interior set.
    pub n: usize,
    /// Points per axis on each loaded face.
    pub n_face: usize,
    pub seed: u64,
    pub mat: NeoHookeanMaterial,
}

impl Default for HyperConfig {
    fn default() -> HyperConfig {
        HyperConfig { n: 20, n_face: 20, seed: 0, mat: NeoHookeanMaterial::default() }
    }
}

pub struct HyperBenchmark {
    pub cfg: HyperConfig,
    pub problem: Problem<4>,
    pub trial: TrialMap<4>,
    /// Interior quadrature kept for norm computation.
    pub interior: QuadratureSet,
}

fn cuboid() -> DomainSpec {
    DomainSpec::Box3 { lb: [0.0; 3], ub: [BAR_LEN, 1.0, 1.0] }
}

/// u = g(X)·X1/1.25 + (X1 − 1.25)·X1·û, which clamps X1 = 0 and matches
/// the twist on X1 = 1.25 exactly.
fn cuboid_trial() -> TrialMap<4> {
    TrialMap::new(move |ctx| {
        let (s, c) = (std::f64::consts::PI / 3.0).sin_cos();
        let x1 = ctx.input(0);
        let x2 = ctx.input(1);
        let x3 = ctx.input(2);
        let g2 = (x2.scale(c - 1.0) - x3.scale(s) + ctx.constant(0.5 * (1.0 - c + s))).scale(0.5);
        let g3 = (x2.scale(s) + x3.scale(c - 1.0) + ctx.constant(0.5 * (1.0 - c - s))).scale(0.5);
        let lift = x1.scale(1.0 / BAR_LEN);
        let bubble = (x1 - BAR_LEN) * x1;
        let out = ctx.net(0);
        vec![
            bubble * out[0],
            g2 * lift + bubble * out[1],
            g3 * lift + bubble * out[2],
        ]
    })
}

fn deformation_gradient<'a, 't>(
    ctx: &PointCtx<'a, 't, 4>,
    trial: &TrialMap<4>,
) -> [[Var<'t, 4>; 3]; 3] {
    let u = trial.eval(ctx);
    core::array::from_fn(|i| {
        core::array::from_fn(|k| {
            let mut alpha = [0usize; 3];
            alpha[k] = 1;
            let d = ctx.partial(u[i], &alpha);
            if i == k {
                d + 1.0
            } else {
                d
            }
        })
    })
}

pub const BODY_FORCE: [f64; 3] = [0.0, -0.5, 0.0];
pub const TRACTION: [f64; 3] = [1.0, 0.0, 0.0];

fn add_hyper_terms(problem: &mut Problem<4>, trial: &TrialMap<4>, cfg: &HyperConfig) {
    let interior = sample_interior(&cuboid(), &Sampling::grid(&[cfg.n; 3]));
    let mat = cfg.mat;
    let t = trial.clone();
    problem.add_term(Term::quadrature("internal_energy", interior.clone(), move |ctx, _| {
        let f = deformation_gradient(ctx, &t);
        vec![neo_hookean_psi(&mat, ctx.tape(), &f)]
    }));

    let t = trial.clone();
    problem.add_term(
        Term::quadrature("body_force_work", interior, move |ctx, _| {
            // f_b · φ with φ = X + u
            let u = t.eval(ctx);
            let mut acc = ctx.constant(0.0);
            for k in 0..3 {
                if BODY_FORCE[k] != 0.0 {
                    acc = acc + (u[k] + ctx.x()[k]).scale(BODY_FORCE[k]);
                }
            }
            vec![acc]
        })
        .scaled(-1.0),
    );

    for face in ["y0", "y1", "z0", "z1"] {
        let quad = sample_box_face([0.0; 3], [BAR_LEN, 1.0, 1.0], face, [cfg.n_face; 2]);
        let t = trial.clone();
        problem.add_term(
            Term::quadrature(&format!("traction_work_{face}"), quad, move |ctx, _| {
                let u = t.eval(ctx);
                let mut acc = ctx.constant(0.0);
                for k in 0..3 {
                    if TRACTION[k] != 0.0 {
                        acc = acc + (u[k] + ctx.x()[k]).scale(TRACTION[k]);
                    }
                }
                vec![acc]
            })
            .scaled(-1.0),
        );
    }
}

pub fn build_hyper_benchmark(cfg: &HyperConfig) -> HyperBenchmark {
    let net = MlpParams::xavier_init(
        &[3, 30, 30, 30, 3],
        Activation::Tanh,
        &[0.0; 3],
        &[BAR_LEN, 1.0, 1.0],
        cfg.seed,
    );
    let mut problem: Problem<4> = Problem::new(3, 1, vec![net]);
    let trial = cuboid_trial();
    add_hyper_terms(&mut problem, &trial, cfg);
    let interior = sample_interior(&cuboid(), &Sampling::grid(&[cfg.n; 3]));
    HyperBenchmark { cfg: cfg.clone(), problem, trial, interior }
}

/// Potential energy of an arbitrary injected displacement field on the
/// standard terms (for validation).
pub fn hyper_loss_of_field(cfg: &HyperConfig, field: TrialMap<4>) -> f64 {
    let net = MlpParams::xavier_init(&[3, 4, 3], Activation::Tanh, &[0.0; 3], &[BAR_LEN, 1.0, 1.0], 0);
    let mut problem: Problem<4> = Problem::new(3, 1, vec![net]);
    add_hyper_terms(&mut problem, &field, cfg);
    problem.loss(&problem.flatten_params()).unwrap()
}

impl HyperBenchmark {
    /// Recommended optimizer settings for this benchmark.
    pub fn default_schedule(&self) -> Schedule {
        Schedule { lbfgs_steps: 50, lbfgs_init_step: 0.5, ..Default::default() }
    }

    pub fn train(&mut self, schedule: &Schedule) -> Result<TrainOutcome, crate::bvp::TrainError> {
        self.problem.train(schedule)
    }

    /// (‖u‖_L2, |u|_H1) over the interior quadrature set.
    pub fn norms(&self) -> (f64, f64) {
        let trial = self.trial.clone();
        let rows = self.problem.eval_at(&self.interior.points, |ctx, _| {
            let u = trial.eval(ctx);
            let mag2: f64 = u.iter().map(|v| v.value() * v.value()).sum();
            let mut grad2 = 0.0;
            for ui in &u {
                for k in 0..3 {
                    let mut alpha = [0usize; 3];
                    alpha[k] = 1;
                    let d = ctx.partial(*ui, &alpha).value();
                    grad2 += d * d;
                }
            }
            (mag2, grad2)
        });
        let mut l2 = 0.0;
        let mut h1 = 0.0;
        for ((m, g), w) in rows.into_iter().zip(&self.interior.weights) {
            l2 += w * m;
            h1 += w * g;
        }
        (l2.sqrt(), h1.sqrt())
    }

    pub fn predict_displacement(&self, points: &[[f64; 3]]) -> Vec<[f64; 3]> {
        let trial = self.trial.clone();
        self.problem.eval_at(points, |ctx, _| {
            let u = trial.eval(ctx);
            [u[0].value(), u[1].value(), u[2].value()]
        })
    }
}
