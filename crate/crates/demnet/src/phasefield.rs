//! Phase-field brittle fracture: stress degradation, tensile energy
//! split, strain-history field, a 1D crack-profile benchmark solved by
//! both collocation and energy minimization, and a single-edge-notch
//! tension (SENT) plate solved monolithically under displacement
//! stepping.

use std::sync::{Arc, RwLock};

use crate::autodiff::Var;
use crate::bvp::{PointCtx, Problem, Schedule, Term, TrainError, TrainOutcome, TrialMap};
use crate::geometry::{sample_interior, DomainSpec, Sampling};
use crate::network::{Activation, MlpParams};
use crate::validation::relative_l2;

/// Isotropic material data for phase-field fracture. `gc` is the
/// critical energy release rate and `l0` the regularization length.
#[derive(Clone, Copy, Debug)]
pub struct FractureMaterial {
    pub lambda: f64,
    pub mu: f64,
    pub gc: f64,
    pub l0: f64,
}

impl FractureMaterial {
    pub fn new(lambda: f64, mu: f64, gc: f64, l0: f64) -> FractureMaterial {
        assert!(gc > 0.0 && l0 > 0.0, "Gc and l0 must be positive");
        FractureMaterial { lambda, mu, gc, l0 }
    }

    /// SENT plate material (units kN, mm).
    pub fn sent() -> FractureMaterial {
        FractureMaterial::new(121.15, 80.77, 2.7e-3, 0.0125)
    }

    /// 1D bar benchmark: only `l0` enters the solution profile.
    pub fn bar_1d() -> FractureMaterial {
        FractureMaterial::new(121.15, 80.77, 2.7e-3, 1.0)
    }
}

/// Length of the 1D bar.
pub const BAR_LEN_1D: f64 = 50.0;
/// Crack location in the 1D bar.
pub const CRACK_POS_1D: f64 = 25.0;
/// Magnitude factor for the initial strain-history field, 1/(1−φ) at
/// φ = 0.999 so that the initialized damage saturates near 1.
pub const HISTORY_B: f64 = 1000.0;

/// Stress-degradation factor g(φ) = (1−φ)².
pub fn degradation(phi: f64) -> f64 {
    (1.0 - phi) * (1.0 - phi)
}

/// dg/dφ = −2(1−φ).
pub fn degradation_prime(phi: f64) -> f64 {
    -2.0 * (1.0 - phi)
}

fn eig_2x2(e: [f64; 3]) -> (f64, f64) {
    // Strains (εxx, εyy, γxy) with engineering shear; principal strains
    // from the trace/deviator closed form.
    let m = 0.5 * (e[0] + e[1]);
    let r = f64::hypot(0.5 * (e[0] - e[1]), 0.5 * e[2]);
    (m + r, m - r)
}

/// Tensile part of the strain energy density,
/// Ψ₀⁺ = λ/2 ⟨tr ε⟩₊² + μ (⟨ε₁⟩₊² + ⟨ε₂⟩₊²).
pub fn psi0_plus(e: [f64; 3], mat: &FractureMaterial) -> f64 {
    let (e1, e2) = eig_2x2(e);
    let tr = e[0] + e[1];
    0.5 * mat.lambda * tr.max(0.0).powi(2)
        + mat.mu * (e1.max(0.0).powi(2) + e2.max(0.0).powi(2))
}

/// Compressive complement so that Ψ₀⁺ + Ψ₀⁻ equals the full isotropic
/// energy λ/2 (tr ε)² + μ (ε₁² + ε₂²).
pub fn psi0_minus(e: [f64; 3], mat: &FractureMaterial) -> f64 {
    let (e1, e2) = eig_2x2(e);
    let tr = e[0] + e[1];
    0.5 * mat.lambda * tr.min(0.0).powi(2)
        + mat.mu * (e1.min(0.0).powi(2) + e2.min(0.0).powi(2))
}

/// Distance from `p` to the segment `a`–`b`.
pub fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    };
    f64::hypot(p[0] - (a[0] + t * dx), p[1] - (a[1] + t * dy))
}

/// Initial strain-history value seeding a crack along segment `a`–`b`:
/// H = B·Gc/(2 l0)·(1 − 2 d/l0) inside the band d ≤ l0/2, else 0.
pub fn history_init(
    p: [f64; 2],
    a: [f64; 2],
    b: [f64; 2],
    mat: &FractureMaterial,
    b_scale: f64,
) -> f64 {
    let d = point_segment_distance(p, a, b);
    if d <= 0.5 * mat.l0 {
        b_scale * mat.gc / (2.0 * mat.l0) * (1.0 - 2.0 * d / mat.l0)
    } else {
        0.0
    }
}

/// Closed-form 1D crack profile exp(−|x−a|/l0) for a crack at `a`.
pub fn phi_oracle_1d(x: f64, a: f64, l0: f64) -> f64 {
    (-(x - a).abs() / l0).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PfMethod {
    /// Energy minimization of the regularized crack functional.
    Dem,
    /// Mean-squared residual of the strong-form ODE.
    Dcm,
}

/// 1D crack-profile benchmark on [0, 50] with the crack at x = 25.
pub struct Bar1d {
    pub method: PfMethod,
    pub mat: FractureMaterial,
    pub problem: Problem<4>,
    pub trial: TrialMap<4>,
}

fn bar_trial(crack: f64, len: f64) -> TrialMap<4> {
    // φ(x) = −x(x−L)/625 · [(x−a)·φ̂ + 1]; equals 1 at the crack and 0
    // at both ends for any network output.
    TrialMap::new(move |ctx| {
        let x = ctx.input(0);
        let phat = ctx.net(0)[0];
        let envelope = (x * (x - ctx.constant(len))).scale(-1.0 / 625.0);
        vec![envelope * ((x - ctx.constant(crack)) * phat + ctx.constant(1.0))]
    })
}

/// Configuration for the 1D benchmark; defaults follow the reference
/// setup (8000 points, 3×50 network).
#[derive(Clone, Debug)]
pub struct Bar1dConfig {
    pub n_points: usize,
    pub hidden: Vec<usize>,
    pub seed: u64,
}

impl Default for Bar1dConfig {
    fn default() -> Bar1dConfig {
        Bar1dConfig { n_points: 8000, hidden: vec![50, 50, 50], seed: 0 }
    }
}

pub fn build_1d_problem(method: PfMethod, cfg: &Bar1dConfig) -> Bar1d {
    let mat = FractureMaterial::bar_1d();
    let mut widths = vec![1usize];
    widths.extend_from_slice(&cfg.hidden);
    widths.push(1);
    let net = MlpParams::xavier_init(&widths, Activation::Tanh, &[0.0], &[BAR_LEN_1D], cfg.seed);
    let mut problem: Problem<4> = Problem::new(1, 2, vec![net]);
    let trial = bar_trial(CRACK_POS_1D, BAR_LEN_1D);
    let domain = DomainSpec::Interval { a: 0.0, b: BAR_LEN_1D };
    let quad = sample_interior(&domain, &Sampling::cells(&[cfg.n_points]));
    let l0 = mat.l0;
    match method {
        PfMethod::Dem => {
            let t = trial.clone();
            problem.add_term(Term::quadrature("crack_energy", quad, move |ctx, _| {
                let phi = t.eval(ctx)[0];
                let dphi = ctx.partial(phi, &[1]);
                vec![phi.square() + dphi.square().scale(l0 * l0)]
            }));
        }
        PfMethod::Dcm => {
            let t = trial.clone();
            problem.add_term(Term::mean_square("ode_residual", quad, move |ctx, _| {
                let phi = t.eval(ctx)[0];
                let ddphi = ctx.partial(phi, &[2]);
                vec![ddphi - phi.scale(1.0 / (l0 * l0))]
            }));
        }
    }
    Bar1d { method, mat, problem, trial }
}

impl Bar1d {
    pub fn train(&mut self, schedule: &Schedule) -> Result<TrainOutcome, TrainError> {
        self.problem.train(schedule)
    }

    pub fn predict(&self, xs: &[f64]) -> Vec<f64> {
        let pts: Vec<[f64; 3]> = xs.iter().map(|&x| [x, 0.0, 0.0]).collect();
        let trial = self.trial.clone();
        self.problem.eval_at(&pts, |ctx, _| trial.eval(ctx)[0].value())
    }

    /// Relative L2 error against the closed-form profile on a uniform
    /// evaluation grid.
    pub fn evaluate(&self, n_pred: usize) -> f64 {
        let xs: Vec<f64> = (0..n_pred)
            .map(|i| BAR_LEN_1D * (i as f64 + 0.5) / n_pred as f64)
            .collect();
        let pred = self.predict(&xs);
        let exact: Vec<f64> =
            xs.iter().map(|&x| phi_oracle_1d(x, CRACK_POS_1D, self.mat.l0)).collect();
        relative_l2(&pred, &exact)
    }
}

/// SENT configuration. The plate is the unit square with a horizontal
/// crack from (0, 0.5) to (0.5, 0.5); the interior is split into a
/// crack band |y−0.5| ≤ 2 l0 and the regions above and below it, each
/// sampled on its own nx × ny midpoint grid.
#[derive(Clone, Debug)]
pub struct SentConfig {
    pub nx: usize,
    pub ny: usize,
    pub hidden: Vec<usize>,
    pub seed: u64,
    pub b_scale: f64,
    pub delta_v: f64,
}

impl Default for SentConfig {
    fn default() -> SentConfig {
        SentConfig {
            nx: 300,
            ny: 81,
            hidden: vec![50, 50, 50, 50, 50],
            seed: 0,
            b_scale: HISTORY_B,
            delta_v: 1e-3,
        }
    }
}

impl SentConfig {
    /// Reduced size for quick runs on a laptop CPU.
    pub fn desk() -> SentConfig {
        SentConfig { nx: 80, ny: 21, hidden: vec![30, 30, 30], ..Default::default() }
    }
}

/// Monolithic SENT solver state: displacement and damage networks, one
/// strain-history vector per interior zone, and the accumulated applied
/// top-edge displacement.
pub struct Sent {
    pub cfg: SentConfig,
    pub mat: FractureMaterial,
    pub problem: Problem<4>,
    pub trial_u: TrialMap<4>,
    pub trial_phi: TrialMap<4>,
    /// Quadrature points per zone (bottom, crack band, top).
    pub zone_points: Vec<Vec<[f64; 3]>>,
    /// Strain-history values per zone, shared with the loss closures.
    pub history: Vec<Arc<RwLock<Vec<f64>>>>,
    total_v: Arc<RwLock<f64>>,
    pub step: usize,
}

/// Crack segment endpoints.
pub const SENT_CRACK: ([f64; 2], [f64; 2]) = ([0.0, 0.5], [0.5, 0.5]);

fn sent_trial_u(total_v: Arc<RwLock<f64>>, scale: f64) -> TrialMap<4> {
    TrialMap::new(move |ctx| {
        let x = ctx.input(0);
        let y = ctx.input(1);
        let out = ctx.net(0);
        let one = ctx.constant(1.0);
        let v_top = *total_v.read().unwrap();
        let u = (x * (one - x) * out[0]).scale(scale);
        let v = (y * (y - one) * out[1]).scale(scale) + y.scale(v_top);
        vec![u, v]
    })
}

fn strains_from<'a, 't>(
    ctx: &PointCtx<'a, 't, 4>,
    trial: &TrialMap<4>,
) -> [Var<'t, 4>; 3] {
    let uv = trial.eval(ctx);
    let ux = ctx.partial(uv[0], &[1, 0]);
    let uy = ctx.partial(uv[0], &[0, 1]);
    let vx = ctx.partial(uv[1], &[1, 0]);
    let vy = ctx.partial(uv[1], &[0, 1]);
    [ux, vy, uy + vx]
}

fn psi_split_tape<'t>(
    e: [Var<'t, 4>; 3],
    mat: &FractureMaterial,
) -> (Var<'t, 4>, Var<'t, 4>) {
    // Principal strains on the tape; the small offset keeps the square
    // root differentiable when the deviator vanishes.
    let m = (e[0] + e[1]).scale(0.5);
    let d = (e[0] - e[1]).scale(0.5);
    let g = e[2].scale(0.5);
    let r = (d.square() + g.square() + e[0].tape().constant(1e-30)).sqrt();
    let (e1, e2) = (m + r, m - r);
    let tr = e[0] + e[1];
    let plus = tr.relu_sq().scale(0.5 * mat.lambda)
        + (e1.relu_sq() + e2.relu_sq()).scale(mat.mu);
    let minus = tr.scale(-1.0).relu_sq().scale(0.5 * mat.lambda)
        + (e1.scale(-1.0).relu_sq() + e2.scale(-1.0).relu_sq()).scale(mat.mu);
    (plus, minus)
}

pub fn build_sent_problem(cfg: &SentConfig) -> Sent {
    let mat = FractureMaterial::sent();
    let l0 = mat.l0;
    let band = 2.0 * l0;
    let zones = [
        DomainSpec::Rectangle { lb: [0.0, 0.0], ub: [1.0, 0.5 - band] },
        DomainSpec::Rectangle { lb: [0.0, 0.5 - band], ub: [1.0, 0.5 + band] },
        DomainSpec::Rectangle { lb: [0.0, 0.5 + band], ub: [1.0, 1.0] },
    ];

    let mut widths_u = vec![2usize];
    widths_u.extend_from_slice(&cfg.hidden);
    widths_u.push(2);
    let mut widths_phi = vec![2usize];
    widths_phi.extend_from_slice(&cfg.hidden);
    widths_phi.push(1);
    let lb = [0.0, 0.0];
    let ub = [1.0, 1.0];
    let net_u = MlpParams::xavier_init(&widths_u, Activation::Tanh, &lb, &ub, cfg.seed);
    let net_phi =
        MlpParams::xavier_init(&widths_phi, Activation::Tanh, &lb, &ub, cfg.seed.wrapping_add(1));
    let mut problem: Problem<4> = Problem::new(2, 1, vec![net_u, net_phi]);

    let total_v = Arc::new(RwLock::new(0.0));
    let trial_u = sent_trial_u(total_v.clone(), cfg.delta_v);
    let trial_phi = TrialMap::new(|ctx| vec![ctx.net(1)[0]]);

    let mut zone_points = Vec::new();
    let mut history = Vec::new();
    for (z, spec) in zones.iter().enumerate() {
        let quad = sample_interior(spec, &Sampling::cells(&[cfg.nx, cfg.ny]));
        let pts = quad.points.clone();
        let h: Vec<f64> = pts
            .iter()
            .map(|p| history_init([p[0], p[1]], SENT_CRACK.0, SENT_CRACK.1, &mat, cfg.b_scale))
            .collect();
        let h = Arc::new(RwLock::new(h));

        let tu = trial_u.clone();
        let tp = trial_phi.clone();
        let m = mat;
        problem.add_term(Term::quadrature(
            &format!("elastic_{z}"),
            quad.clone(),
            move |ctx, _| {
                let e = strains_from(ctx, &tu);
                let (plus, minus) = psi_split_tape(e, &m);
                let phi = tp.eval(ctx)[0];
                let one = ctx.constant(1.0);
                let g = (one - phi).square();
                vec![g * plus + minus]
            },
        ));

        let tp = trial_phi.clone();
        let hh = h.clone();
        problem.add_term(Term::quadrature(
            &format!("fracture_{z}"),
            quad,
            move |ctx, i| {
                let phi = tp.eval(ctx)[0];
                let px = ctx.partial(phi, &[1, 0]);
                let py = ctx.partial(phi, &[0, 1]);
                let one = ctx.constant(1.0);
                let g = (one - phi).square();
                let crack = (phi.square() + (px.square() + py.square()).scale(l0 * l0))
                    .scale(mat.gc / (2.0 * l0));
                vec![crack + g.scale(hh.read().unwrap()[i])]
            },
        ));

        zone_points.push(pts);
        history.push(h);
    }

    Sent {
        cfg: cfg.clone(),
        mat,
        problem,
        trial_u,
        trial_phi,
        zone_points,
        history,
        total_v,
        step: 0,
    }
}

impl Sent {
    pub fn total_v(&self) -> f64 {
        *self.total_v.read().unwrap()
    }

    /// Solve at the current load level (used for the zero-load crack
    /// initialization).
    pub fn train(&mut self, schedule: &Schedule) -> Result<TrainOutcome, TrainError> {
        self.problem.train(schedule)
    }

    /// Current tensile energy density at the given points.
    fn psi_plus_at(&self, pts: &[[f64; 3]]) -> Vec<f64> {
        let tu = self.trial_u.clone();
        let mat = self.mat;
        self.problem.eval_at(pts, |ctx, _| {
            let e = strains_from(ctx, &tu);
            psi0_plus([e[0].value(), e[1].value(), e[2].value()], &mat)
        })
    }

    /// Fold the current tensile energy into the history field (running
    /// pointwise maximum, enforcing crack irreversibility).
    pub fn update_history(&mut self) {
        for (pts, h) in self.zone_points.iter().zip(&self.history) {
            let psi = self.psi_plus_at(pts);
            let mut h = h.write().unwrap();
            for (hv, pv) in h.iter_mut().zip(psi) {
                *hv = hv.max(pv);
            }
        }
    }

    /// One displacement increment: capture the converged tensile energy
    /// in the history field, raise the top-edge displacement by `dv`,
    /// and re-minimize.
    pub fn sent_step(&mut self, dv: f64, schedule: &Schedule) -> Result<TrainOutcome, TrainError> {
        assert!(dv > 0.0, "displacement increment must be positive");
        self.update_history();
        *self.total_v.write().unwrap() += dv;
        self.step += 1;
        self.problem.train(schedule)
    }

    /// Damage values at arbitrary points.
    pub fn phi_at(&self, pts: &[[f64; 3]]) -> Vec<f64> {
        let tp = self.trial_phi.clone();
        self.problem.eval_at(pts, |ctx, _| tp.eval(ctx)[0].value())
    }

    /// Displacements at arbitrary points.
    pub fn displacement_at(&self, pts: &[[f64; 3]]) -> Vec<[f64; 2]> {
        let tu = self.trial_u.clone();
        self.problem.eval_at(pts, |ctx, _| {
            let uv = tu.eval(ctx);
            [uv[0].value(), uv[1].value()]
        })
    }

    /// Damage profile along the vertical line x = `x` at heights `ys`.
    pub fn phi_profile(&self, x: f64, ys: &[f64]) -> Vec<f64> {
        let pts: Vec<[f64; 3]> = ys.iter().map(|&y| [x, y, 0.0]).collect();
        self.phi_at(&pts)
    }

    /// Write x, y, u, v, φ, H for every interior quadrature point.
    pub fn write_fields_csv(&self, path: &std::path::Path) -> std::io::Result<()> {
        use std::io::Write;
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "x,y,u,v,phi,H")?;
        for (pts, h) in self.zone_points.iter().zip(&self.history) {
            let uv = self.displacement_at(pts);
            let phi = self.phi_at(pts);
            let h = h.read().unwrap();
            for (i, p) in pts.iter().enumerate() {
                writeln!(
                    f,
                    "{},{},{},{},{},{}",
                    p[0], p[1], uv[i][0], uv[i][1], phi[i], h[i]
                )?;
            }
        }
        Ok(())
    }

    /// Write the deformed configuration (x + s·u, y + s·v, φ) with
    /// displacement magnification `s`.
    pub fn write_deformed_csv(&self, path: &std::path::Path, s: f64) -> std::io::Result<()> {
        use std::io::Write;
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "x,y,phi")?;
        for pts in &self.zone_points {
            let uv = self.displacement_at(pts);
            let phi = self.phi_at(pts);
            for (i, p) in pts.iter().enumerate() {
                writeln!(f, "{},{},{}", p[0] + s * uv[i][0], p[1] + s * uv[i][1], phi[i])?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn degradation_limits_and_slope() {
        assert_eq!(degradation(0.0), 1.0);
        assert_eq!(degradation(1.0), 0.0);
        assert_eq!(degradation_prime(0.0), -2.0);
    }

    #[test]
    fn degradation_prime_matches_autodiff() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        use rand::SeedableRng;
        for _ in 0..100 {
            let phi: f64 = rng.gen_range(-1.0..2.0);
            let d = crate::autodiff::nth_derivative(
                |t, xs| {
                    let one = t.constant(1.0);
                    (one - xs[0]).square()
                },
                &[phi],
                &[0],
            )
            .unwrap();
            assert!((d - degradation_prime(phi)).abs() < 1e-12);
        }
    }

    #[test]
    fn tensile_split_examples() {
        let mat = FractureMaterial::sent();
        // Pure compression: no tensile energy.
        assert_eq!(psi0_plus([-1e-3, -1e-3, 0.0], &mat), 0.0);
        // Uniaxial tension diag(δ, 0): eigenvalues (δ, 0).
        let d = 2e-3;
        let got = psi0_plus([d, 0.0, 0.0], &mat);
        let want = 0.5 * mat.lambda * d * d + mat.mu * d * d;
        assert!((got - want).abs() < 1e-15 * want.abs().max(1.0));
        // Pure shear γ: eigenvalues ±γ/2, Ψ⁺ = μ γ²/4.
        let g = 3e-3;
        let got = psi0_plus([0.0, 0.0, g], &mat);
        assert!((got - mat.mu * g * g / 4.0).abs() < 1e-15);
    }

    #[test]
    fn split_sums_to_full_energy() {
        use rand::SeedableRng;
        let mat = FractureMaterial::sent();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let e = [
                rng.gen_range(-1e-3..1e-3),
                rng.gen_range(-1e-3..1e-3),
                rng.gen_range(-1e-3..1e-3),
            ];
            let (e1, e2) = eig_2x2(e);
            let tr = e[0] + e[1];
            let full = 0.5 * mat.lambda * tr * tr + mat.mu * (e1 * e1 + e2 * e2);
            let sum = psi0_plus(e, &mat) + psi0_minus(e, &mat);
            assert!((full - sum).abs() < 1e-18 + 1e-12 * full.abs());
        }
    }

    #[test]
    fn history_init_profile() {
        let mat = FractureMaterial::sent();
        let (a, b) = SENT_CRACK;
        let on = history_init([0.25, 0.5], a, b, &mat, HISTORY_B);
        let peak = HISTORY_B * mat.gc / (2.0 * mat.l0);
        assert!((on - peak).abs() < 1e-12 * peak);
        // Support edge d = l0/2 and the linear midpoint d = l0/4.
        let edge = history_init([0.25, 0.5 + 0.5 * mat.l0], a, b, &mat, HISTORY_B);
        assert!(edge.abs() < 1e-9 * peak);
        let half = history_init([0.25, 0.5 + 0.25 * mat.l0], a, b, &mat, HISTORY_B);
        assert!((half - 0.5 * peak).abs() < 1e-9 * peak);
        // Outside the band and beyond the tip the history vanishes.
        assert_eq!(history_init([0.25, 0.6], a, b, &mat, HISTORY_B), 0.0);
        assert_eq!(history_init([0.5 + mat.l0, 0.5], a, b, &mat, HISTORY_B), 0.0);
    }

    #[test]
    fn point_segment_distance_cases() {
        let a = [0.0, 0.0];
        let b = [1.0, 0.0];
        assert!((point_segment_distance([0.5, 0.3], a, b) - 0.3).abs() < 1e-15);
        assert!((point_segment_distance([2.0, 0.0], a, b) - 1.0).abs() < 1e-15);
        assert!((point_segment_distance([-3.0, 4.0], a, b) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn bar_trial_pins_boundary_values() {
        let bar = build_1d_problem(PfMethod::Dem, &Bar1dConfig::default());
        let vals = bar.predict(&[0.0, 25.0, 50.0]);
        assert!(vals[0].abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        assert!(vals[2].abs() < 1e-12);
    }

    #[test]
    fn oracle_decay_length() {
        let v = phi_oracle_1d(25.0 + 1.0, 25.0, 1.0);
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
        assert!((phi_oracle_1d(24.0, 25.0, 1.0) - v).abs() < 1e-15);
        assert_eq!(phi_oracle_1d(25.0, 25.0, 1.0), 1.0);
    }

    /// With all parameters zero the trial reduces to the envelope
    /// p(x) = −x(x−50)/625; compare both losses against fine Simpson
    /// integration of the same closed-form expressions.
    #[test]
    fn zero_network_losses_match_quadrature_free_integrals() {
        let p = |x: f64| -x * (x - 50.0) / 625.0;
        let dp = |x: f64| (50.0 - 2.0 * x) / 625.0;
        let ddp = -2.0 / 625.0;

        let cfg = Bar1dConfig { n_points: 4000, ..Default::default() };
        let mut dem = build_1d_problem(PfMethod::Dem, &cfg);
        let zeros = vec![0.0; dem.problem.n_params()];
        dem.problem.unflatten_params(&zeros);
        let loss = dem.problem.loss(&zeros).unwrap();
        let n = 100_000;
        let simpson: f64 = {
            let h = 50.0 / n as f64;
            let f = |x: f64| p(x) * p(x) + dp(x) * dp(x);
            let mut s = f(0.0) + f(50.0);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * f(i as f64 * h);
            }
            s * h / 3.0
        };
        assert!((loss - simpson).abs() < 1e-3 * simpson);

        let mut dcm = build_1d_problem(PfMethod::Dcm, &cfg);
        let zeros = vec![0.0; dcm.problem.n_params()];
        dcm.problem.unflatten_params(&zeros);
        let loss = dcm.problem.loss(&zeros).unwrap();
        // Mean of (p'' − p)² over the bar.
        let mean: f64 = {
            let h = 50.0 / n as f64;
            let f = |x: f64| (ddp - p(x)) * (ddp - p(x));
            let mut s = f(0.0) + f(50.0);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * f(i as f64 * h);
            }
            s * h / 3.0 / 50.0
        };
        assert!((loss - mean).abs() < 1e-3 * mean);
    }

    #[test]
    fn sent_zone_measures_tile_unit_square() {
        let mat = FractureMaterial::sent();
        let sent = build_sent_problem(&SentConfig { nx: 4, ny: 3, ..SentConfig::desk() });
        let measures: Vec<f64> = sent.problem.terms.iter()
            .filter(|t| t.name.starts_with("fracture"))
            .map(|t| t.quad.measure)
            .collect();
        let band = 4.0 * mat.l0;
        assert!((measures[0] - (0.5 - 0.5 * band)).abs() < 1e-12);
        assert!((measures[1] - band).abs() < 1e-12);
        assert!((measures[2] - (0.5 - 0.5 * band)).abs() < 1e-12);
        let total: f64 = measures.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sent_trial_lift_applies_top_displacement() {
        let mut sent = build_sent_problem(&SentConfig { nx: 4, ny: 3, ..SentConfig::desk() });
        let sched = Schedule { adam_steps: 0, lbfgs_steps: 0, ..Default::default() };
        sent.sent_step(1e-3, &sched).unwrap();
        sent.sent_step(1e-3, &sched).unwrap();
        assert!((sent.total_v() - 2e-3).abs() < 1e-15);
        let uv = sent.displacement_at(&[[0.3, 1.0, 0.0], [0.0, 0.7, 0.0]]);
        // v(x, 1) equals the accumulated displacement; u(0, y) = 0.
        assert!((uv[0][1] - 2e-3).abs() < 1e-12);
        assert!(uv[1][0].abs() < 1e-15);
    }

    #[test]
    fn sent_history_is_non_decreasing() {
        let mut sent = build_sent_problem(&SentConfig { nx: 6, ny: 5, ..SentConfig::desk() });
        let sched = Schedule { adam_steps: 0, lbfgs_steps: 0, ..Default::default() };
        sent.sent_step(1e-3, &sched).unwrap();
        let snapshot: Vec<Vec<f64>> =
            sent.history.iter().map(|h| h.read().unwrap().clone()).collect();
        sent.sent_step(1e-3, &sched).unwrap();
        for (h, old) in sent.history.iter().zip(&snapshot) {
            for (now, before) in h.read().unwrap().iter().zip(old) {
                assert!(now >= before, "history must never decrease");
            }
        }
        // The crack midline carries the peak initial value.
        let mat = sent.mat;
        let peak = HISTORY_B * mat.gc / (2.0 * mat.l0);
        let mid = &sent.history[1].read().unwrap();
        assert!(mid.iter().cloned().fold(0.0, f64::max) > 0.5 * peak);
    }
}
