//! 1D elastic wave propagation solved by space-time collocation, with
//! an explicit finite-difference reference solution.
//!
//! Setup: u_tt = c² u_xx on (0, L) × (0, T], zero initial displacement
//! and velocity, a sinusoidal Neumann pulse u_x(0, t) = −sin(πt) for
//! t ≤ 1 (zero afterwards), and a fixed end u(L, t) = 0.

use crate::bvp::{Problem, Term, TrialMap};
use crate::geometry::{sample_boundary, sample_interior, DomainSpec, QuadratureSet, Sampling};
use crate::network::{Activation, MlpParams};
use crate::validation::{relative_l2, ErrorReport};

/// Jet capacity for (x, t) with second derivatives.
pub const WAVE_M: usize = 6;

#[derive(Clone, Debug)]
pub struct WaveConfig {
    pub c: f64,
    pub l: f64,
    pub t_final: f64,
    /// Space-time collocation counts (nx, nt).
    pub n_int: [usize; 2],
    pub n_init: usize,
    pub n_bnd: usize,
    pub seed: u64,
}

impl Default for WaveConfig {
    fn default() -> WaveConfig {
        WaveConfig { c: 1.0, l: 4.0, t_final: 2.0, n_int: [99, 99], n_init: 99, n_bnd: 100, seed: 0 }
    }
}

impl WaveConfig {
    pub fn paper_scale() -> WaveConfig {
        WaveConfig { n_int: [199, 199], n_init: 199, n_bnd: 200, ..Default::default() }
    }

    fn domain(&self) -> DomainSpec {
        DomainSpec::SpaceTimeRect { x: (0.0, self.l), t: (0.0, self.t_final) }
    }
}

/// Neumann pulse applied at x = 0.
pub fn wave_pulse(t: f64) -> f64 {
    if (0.0..=1.0).contains(&t) {
        -(std::f64::consts::PI * t).sin()
    } else {
        0.0
    }
}

/// Closed-form displacement and velocity of the traveling pulse, valid
/// while no reflection from the far end has arrived (the default
/// geometry satisfies this for all t ≤ T).
pub fn wave_exact(x: f64, t: f64, c: f64) -> (f64, f64) {
    let pi = std::f64::consts::PI;
    let s = t - x / c;
    if s <= 0.0 {
        (0.0, 0.0)
    } else if s <= 1.0 {
        (c * (1.0 - (pi * s).cos()) / pi, c * (pi * s).sin())
    } else {
        (2.0 * c / pi, 0.0)
    }
}

pub struct WaveBenchmark {
    pub cfg: WaveConfig,
    pub problem: Problem<WAVE_M>,
    pub trial: TrialMap<WAVE_M>,
    pub pred: QuadratureSet,
}

fn add_wave_terms(problem: &mut Problem<WAVE_M>, trial: &TrialMap<WAVE_M>, cfg: &WaveConfig) {
    let domain = cfg.domain();
    let c2 = cfg.c * cfg.c;

    let interior = sample_interior(&domain, &Sampling::grid(&cfg.n_int));
    let t = trial.clone();
    problem.add_term(Term::mean_square("residual", interior, move |ctx, _| {
        let u = t.eval(ctx)[0];
        vec![ctx.partial(u, &[0, 2]) - ctx.partial(u, &[2, 0]).scale(c2)]
    }));

    let init = sample_boundary(&domain, "t_lo", &Sampling::grid(&[cfg.n_init]));
    let t = trial.clone();
    problem.add_term(Term::mean_square("initial", init, move |ctx, _| {
        let u = t.eval(ctx)[0];
        vec![u, ctx.partial(u, &[0, 1])]
    }));

    let left = sample_boundary(&domain, "x_lo", &Sampling::grid(&[cfg.n_bnd]));
    let t = trial.clone();
    problem.add_term(Term::mean_square("neumann_pulse", left, move |ctx, _| {
        let u = t.eval(ctx)[0];
        let g = wave_pulse(ctx.x()[1]);
        vec![ctx.partial(u, &[1, 0]) - ctx.constant(g)]
    }));

    let right = sample_boundary(&domain, "x_hi", &Sampling::grid(&[cfg.n_bnd]));
    let t = trial.clone();
    problem.add_term(Term::mean_square("fixed_end", right, move |ctx, _| {
        vec![t.eval(ctx)[0]]
    }));
}

pub fn build_wave_benchmark(cfg: &WaveConfig) -> WaveBenchmark {
    let net = MlpParams::xavier_init(
        &[2, 50, 50, 50, 1],
        Activation::Tanh,
        &[0.0, 0.0],
        &[cfg.l, cfg.t_final],
        cfg.seed,
    );
    let mut problem: Problem<WAVE_M> = Problem::new(2, 2, vec![net]);
    let trial = TrialMap::new(|ctx| vec![ctx.net(0)[0]]);
    add_wave_terms(&mut problem, &trial, cfg);
    let pred = sample_interior(&cfg.domain(), &Sampling::cells(&[100, 100]));
    WaveBenchmark { cfg: cfg.clone(), problem, trial, pred }
}

/// Same loss terms evaluated on an arbitrary injected field instead of
/// the network; used to validate the loss assembly itself.
pub fn wave_loss_of_field(cfg: &WaveConfig, field: TrialMap<WAVE_M>) -> f64 {
    let net = MlpParams::xavier_init(
        &[2, 4, 1],
        Activation::Tanh,
        &[0.0, 0.0],
        &[cfg.l, cfg.t_final],
        0,
    );
    let mut problem: Problem<WAVE_M> = Problem::new(2, 2, vec![net]);
    add_wave_terms(&mut problem, &field, cfg);
    problem.loss(&problem.flatten_params()).unwrap()
}

impl WaveBenchmark {
    /// Displacement and velocity at the given (x, t, ·) points.
    pub fn predict(&self, points: &[[f64; 3]]) -> (Vec<f64>, Vec<f64>) {
        let trial = self.trial.clone();
        let rows = self.problem.eval_at(points, |ctx, _| {
            let u = trial.eval(ctx)[0];
            (u.value(), ctx.partial(u, &[0, 1]).value())
        });
        rows.into_iter().unzip()
    }

    pub fn evaluate(&self, reference: &WaveReference) -> ErrorReport {
        let (u, v) = self.predict(&self.pred.points);
        let ru: Vec<f64> = self.pred.points.iter().map(|p| reference.eval_u(p[0], p[1])).collect();
        let rv: Vec<f64> = self.pred.points.iter().map(|p| reference.eval_v(p[0], p[1])).collect();
        let mut rep = ErrorReport::default();
        rep.rel_l2.push(("u".into(), relative_l2(&u, &ru)));
        rep.rel_l2.push(("v".into(), relative_l2(&v, &rv)));
        rep
    }
}

/// Explicit central-difference solution on a uniform space-time grid.
/// The Neumann end uses a ghost node, the far end is clamped.
pub struct WaveReference {
    pub nx: usize,
    pub nt: usize,
    pub dx: f64,
    pub dt: f64,
    pub c: f64,
    /// u[n][i] = u(i·dx, n·dt)
    u: Vec<Vec<f64>>,
}

pub fn wave_reference(c: f64, l: f64, t_final: f64, nx: usize, nt: usize) -> WaveReference {
    let dx = l / nx as f64;
    let dt = t_final / nt as f64;
    let r = c * dt / dx;
    assert!(r <= 1.0, "explicit scheme unstable: c dt/dx = {r}");
    let r2 = r * r;
    let mut u = Vec::with_capacity(nt + 1);
    u.push(vec![0.0; nx + 1]);
    // first step from zero initial displacement and velocity
    u.push(vec![0.0; nx + 1]);
    for n in 1..nt {
        let t_n = n as f64 * dt;
        let (prev, cur) = (&u[n - 1], &u[n]);
        let mut next = vec![0.0; nx + 1];
        for i in 0..nx {
            let left = if i == 0 {
                // ghost node from u_x(0, t) = g(t)
                cur[1] - 2.0 * dx * wave_pulse(t_n)
            } else {
                cur[i - 1]
            };
            next[i] = 2.0 * cur[i] - prev[i] + r2 * (cur[i + 1] - 2.0 * cur[i] + left);
        }
        next[nx] = 0.0;
        u.push(next);
    }
    WaveReference { nx, nt, dx, dt, c, u }
}

impl WaveReference {
    pub fn eval_u(&self, x: f64, t: f64) -> f64 {
        self.bilinear(x, t, |n, i| self.u[n][i])
    }

    /// Velocity by central time differences of the stored field.
    pub fn eval_v(&self, x: f64, t: f64) -> f64 {
        self.bilinear(x, t, |n, i| {
            let lo = n.saturating_sub(1);
            let hi = (n + 1).min(self.nt);
            (self.u[hi][i] - self.u[lo][i]) / ((hi - lo) as f64 * self.dt)
        })
    }

    fn bilinear(&self, x: f64, t: f64, f: impl Fn(usize, usize) -> f64) -> f64 {
        let fx = (x / self.dx).clamp(0.0, self.nx as f64);
        let ft = (t / self.dt).clamp(0.0, self.nt as f64);
        let i = (fx as usize).min(self.nx - 1);
        let n = (ft as usize).min(self.nt - 1);
        let ax = fx - i as f64;
        let at = ft - n as f64;
        (1.0 - at) * ((1.0 - ax) * f(n, i) + ax * f(n, i + 1))
            + at * ((1.0 - ax) * f(n + 1, i) + ax * f(n + 1, i + 1))
    }
}

/// Default fine reference grid for the standard configuration.
pub fn default_wave_reference(cfg: &WaveConfig) -> WaveReference {
    wave_reference(cfg.c, cfg.l, cfg.t_final, 2000, 2500)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::{JetShape, Tape, Var};

    fn residual_at<F>(f: F, x: f64, t: f64, c: f64) -> f64
    where
        F: for<'t> Fn(&'t Tape<WAVE_M>, Var<'t, WAVE_M>, Var<'t, WAVE_M>) -> Var<'t, WAVE_M>,
    {
        let tape = Tape::<WAVE_M>::new(JetShape::get(2, 2));
        let xv = tape.input(x, 0);
        let tv = tape.input(t, 1);
        let u = f(&tape, xv, tv);
        (tape.partial(u, &[0, 2]) - tape.partial(u, &[2, 0]).scale(c * c)).value()
    }

    #[test]
    fn residual_examples() {
        // linear in x, constant in t
        assert_eq!(residual_at(|_, x, _| x, 0.7, 0.3, 1.0), 0.0);
        // traveling harmonic satisfies the equation
        let r = residual_at(|_, x, t| (x - t).sin(), 1.2, 0.4, 1.0);
        assert!(r.abs() < 1e-8, "{r}");
        // u = x² t² → u_tt − c² u_xx = 2x² − 2 c² t²
        for (x, t, c) in [(0.5, 0.25, 1.0), (1.5, 0.75, 2.0)] {
            let r = residual_at(|_, x, t| x * x * t * t, x, t, c);
            let want = 2.0 * x * x - 2.0 * c * c * t * t;
            assert!((r - want).abs() < 1e-10, "{r} vs {want}");
        }
    }

    #[test]
    fn loss_of_zero_field_is_pulse_energy() {
        let cfg = WaveConfig { n_int: [20, 20], n_init: 20, n_bnd: 40, ..Default::default() };
        let zero = TrialMap::new(|ctx| vec![ctx.constant(0.0)]);
        let loss = wave_loss_of_field(&cfg, zero);
        // only the Neumann term is nonzero: mean of sin²(πt) over the
        // sampled times within the pulse
        let pi = std::f64::consts::PI;
        let want: f64 = (0..40)
            .map(|k| {
                let t = cfg.t_final * k as f64 / 39.0;
                wave_pulse(t).powi(2)
            })
            .sum::<f64>()
            / 40.0;
        assert!((loss - want).abs() < 1e-12, "{loss} vs {want}");
        assert!(want > 0.1);
        let _ = pi;
    }

    #[test]
    fn loss_of_exact_field_vanishes() {
        let cfg = WaveConfig { n_int: [30, 30], n_init: 15, n_bnd: 25, ..Default::default() };
        let c = cfg.c;
        let exact = TrialMap::new(move |ctx| {
            let pi = std::f64::consts::PI;
            let [x, t, _] = ctx.x();
            let s = t - x / c;
            // the branch is chosen from the concrete point; each branch
            // is smooth, so on-tape derivatives are exact
            let u = if s <= 0.0 {
                ctx.constant(0.0)
            } else if s <= 1.0 {
                let sv = ctx.input(1) - ctx.input(0).scale(1.0 / c);
                (ctx.constant(1.0) - sv.scale(pi).cos()).scale(c / pi)
            } else {
                ctx.constant(2.0 * c / pi)
            };
            vec![u]
        });
        let loss = wave_loss_of_field(&cfg, exact);
        assert!(loss < 1e-20, "{loss}");
    }

    #[test]
    fn reference_initial_and_fixed_end() {
        let r = wave_reference(1.0, 4.0, 2.0, 200, 250);
        for i in 0..=200 {
            assert_eq!(r.u[0][i], 0.0);
        }
        for n in 0..=250 {
            assert_eq!(r.u[n][200], 0.0);
        }
    }

    #[test]
    fn reference_matches_closed_form() {
        let r = wave_reference(1.0, 4.0, 2.0, 2000, 2500);
        let mut worst = 0.0f64;
        for &x in &[0.25, 0.5, 1.0, 1.7, 2.5, 3.4] {
            for &t in &[0.3, 0.9, 1.4, 2.0] {
                let (ue, _) = wave_exact(x, t, 1.0);
                worst = worst.max((r.eval_u(x, t) - ue).abs());
            }
        }
        assert!(worst < 2e-3, "max FD deviation {worst}");
        // probe value: u(0.5, 1.0) = (1 − cos(π/2))/π = 1/π
        let probe = r.eval_u(0.5, 1.0);
        assert!((probe - 1.0 / std::f64::consts::PI).abs() < 1e-3, "{probe}");
    }

    #[test]
    fn reference_grid_convergence() {
        let a = wave_reference(1.0, 4.0, 2.0, 1000, 1250);
        let b = wave_reference(1.0, 4.0, 2.0, 2000, 2500);
        for &(x, t) in &[(0.5, 1.0), (1.3, 1.7), (2.2, 1.9), (3.1, 0.8)] {
            let d = (a.eval_u(x, t) - b.eval_u(x, t)).abs();
            assert!(d < 1e-4, "grid doubling changed u({x},{t}) by {d}");
        }
    }

    #[test]
    fn reference_causality() {
        let r = wave_reference(1.0, 4.0, 2.0, 2000, 2500);
        for &t in &[0.5, 1.0, 1.5] {
            for k in 0..40 {
                let x = t + 0.05 + k as f64 * (4.0 - t - 0.05) / 40.0;
                if x >= 4.0 {
                    break;
                }
                assert!(
                    r.eval_u(x, t).abs() <= 1e-3,
                    "acausal support: u({x},{t}) = {}",
                    r.eval_u(x, t)
                );
            }
        }
    }

    #[test]
    #[should_panic(expected = "unstable")]
    fn cfl_violation_panics() {
        wave_reference(1.0, 4.0, 2.0, 2000, 100);
    }

    #[test]
    fn velocity_of_reference() {
        let r = wave_reference(1.0, 4.0, 2.0, 2000, 2500);
        for &(x, t) in &[(0.3, 0.8), (0.9, 1.6), (1.5, 1.9)] {
            let (_, ve) = wave_exact(x, t, 1.0);
            assert!((r.eval_v(x, t) - ve).abs() < 5e-3, "v({x},{t})");
        }
    }

    #[test]
    fn benchmark_builds_and_loss_is_finite() {
        let cfg = WaveConfig { n_int: [12, 12], n_init: 10, n_bnd: 10, ..Default::default() };
        let b = build_wave_benchmark(&cfg);
        let comps = b.problem.loss_components(&b.problem.flatten_params()).unwrap();
        assert_eq!(comps.len(), 4);
        assert!(comps.iter().all(|(_, v)| v.is_finite() && *v >= 0.0));
    }
}
