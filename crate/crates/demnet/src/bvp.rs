//! Boundary-value-problem abstraction and the training driver.
//!
//! A [`Problem`] owns one or more networks and a list of loss terms.
//! Each term binds a quadrature set to a pointwise expression builder;
//! quadrature terms realize energy functionals (weighted sums), and
//! mean-square terms realize collocation residuals and penalties. Loss
//! assembly records every term on a jet-valued tape in fixed chunks, so
//! one backward sweep per chunk yields exact parameter gradients while
//! seeded inputs expose the spatial derivatives the expressions need.

use std::sync::Arc;
use std::time::Instant;

use crate::autodiff::{AdError, JetShape, Tape, Var};
use crate::geometry::QuadratureSet;
use crate::network::MlpParams;
use crate::optim::{AdamState, LbfgsOptions, LbfgsStatus, lbfgs_minimize};

/// Per-point evaluation context handed to loss terms and field
/// evaluators: the seeded input variables, the networks, and the tape.
pub struct PointCtx<'a, 't, const M: usize> {
    tape: &'t Tape<M>,
    nets: &'a [MlpParams],
    param_vars: &'a [Vec<Var<'t, M>>],
    x_vars: Vec<Var<'t, M>>,
    x: [f64; 3],
    weight: f64,
}

impl<'a, 't, const M: usize> PointCtx<'a, 't, M> {
    pub fn tape(&self) -> &'t Tape<M> {
        self.tape
    }

    /// Raw coordinates of the current point.
    pub fn x(&self) -> [f64; 3] {
        self.x
    }

    /// Quadrature weight of the current point.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Coordinate `i` as a seeded tape variable.
    pub fn input(&self, i: usize) -> Var<'t, M> {
        self.x_vars[i]
    }

    pub fn constant(&self, c: f64) -> Var<'t, M> {
        self.tape.constant(c)
    }

    /// Raw outputs of network `k` at the current point.
    pub fn net(&self, k: usize) -> Vec<Var<'t, M>> {
        let d_in = self.nets[k].d_in();
        self.nets[k].forward_on_tape(self.tape, &self.x_vars[..d_in], &self.param_vars[k])
    }

    /// Partial derivative of `v` with respect to the seeded inputs;
    /// `alpha` is a multi-index over the seeded dimensions.
    pub fn partial(&self, v: Var<'t, M>, alpha: &[usize]) -> Var<'t, M> {
        self.tape.partial(v, alpha)
    }
}

/// Composition u(x) = g(x) + D(x) * net(x) that satisfies Dirichlet
/// data exactly; built by each benchmark, shared between its loss terms
/// and its field predictions.
#[derive(Clone)]
pub struct TrialMap<const M: usize> {
    #[allow(clippy::type_complexity)]
    pub apply: Arc<dyn for<'a, 't> Fn(&PointCtx<'a, 't, M>) -> Vec<Var<'t, M>>>,
}

impl<const M: usize> TrialMap<M> {
    pub fn new(
        f: impl for<'a, 't> Fn(&PointCtx<'a, 't, M>) -> Vec<Var<'t, M>> + 'static,
    ) -> TrialMap<M> {
        TrialMap { apply: Arc::new(f) }
    }

    pub fn eval<'a, 't>(&self, ctx: &PointCtx<'a, 't, M>) -> Vec<Var<'t, M>> {
        (self.apply)(ctx)
    }
}

pub enum TermKind {
    /// scale * sum_i w_i * expr(x_i): energy functionals and work terms.
    Quadrature { scale: f64 },
    /// scale * mean_i sum_k expr_k(x_i)^2: residuals and penalties.
    MeanSquare { scale: f64 },
}

#[allow(clippy::type_complexity)]
pub struct Term<const M: usize> {
    pub name: String,
    pub quad: QuadratureSet,
    pub kind: TermKind,
    /// Expression(s) at point index `i`; for quadrature terms the
    /// components are summed, for mean-square terms they are squared
    /// and summed.
    pub f: Box<dyn for<'a, 't> Fn(&PointCtx<'a, 't, M>, usize) -> Vec<Var<'t, M>>>,
}

impl<const M: usize> Term<M> {
    pub fn quadrature(
        name: &str,
        quad: QuadratureSet,
        f: impl for<'a, 't> Fn(&PointCtx<'a, 't, M>, usize) -> Vec<Var<'t, M>> + 'static,
    ) -> Term<M> {
        Term { name: name.into(), quad, kind: TermKind::Quadrature { scale: 1.0 }, f: Box::new(f) }
    }

    pub fn mean_square(
        name: &str,
        quad: QuadratureSet,
        f: impl for<'a, 't> Fn(&PointCtx<'a, 't, M>, usize) -> Vec<Var<'t, M>> + 'static,
    ) -> Term<M> {
        Term { name: name.into(), quad, kind: TermKind::MeanSquare { scale: 1.0 }, f: Box::new(f) }
    }

    pub fn scaled(mut self, scale: f64) -> Term<M> {
        match &mut self.kind {
            TermKind::Quadrature { scale: s } | TermKind::MeanSquare { scale: s } => *s = scale,
        }
        self
    }
}

/// Networks plus loss terms; the jet shape (input dimension, derivative
/// order) is fixed per problem and must fit the capacity `M`.
pub struct Problem<const M: usize> {
    pub nets: Vec<MlpParams>,
    pub terms: Vec<Term<M>>,
    shape: &'static JetShape,
    chunk: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistoryEntry {
    pub phase: Phase,
    pub iter: usize,
    pub loss: f64,
    pub grad_inf: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Adam,
    Lbfgs,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Adam => "adam",
            Phase::Lbfgs => "lbfgs",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Schedule {
    pub adam_steps: usize,
    pub adam_lr: f64,
    pub lbfgs_steps: usize,
    pub lbfgs_init_step: f64,
    pub lbfgs_tol: f64,
    pub lbfgs_memory: usize,
}

impl Default for Schedule {
    fn default() -> Schedule {
        Schedule {
            adam_steps: 0,
            adam_lr: 1e-3,
            lbfgs_steps: 0,
            lbfgs_init_step: 1.0,
            lbfgs_tol: 1e-9,
            lbfgs_memory: 20,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub history: Vec<HistoryEntry>,
    pub loss: f64,
    pub wall_secs: f64,
    pub lbfgs_status: Option<LbfgsStatus>,
}

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("non-finite loss at {phase} iteration {iter}: {source}")]
    NonFiniteLoss { phase: &'static str, iter: usize, source: AdError },
}

impl<const M: usize> Problem<M> {
    pub fn new(dim: usize, order: usize, nets: Vec<MlpParams>) -> Problem<M> {
        let shape = JetShape::get(dim, order);
        assert!(shape.len() <= M, "jet shape ({dim},{order}) needs capacity {}", shape.len());
        Problem { nets, terms: Vec::new(), shape, chunk: 512 }
    }

    pub fn add_term(&mut self, term: Term<M>) {
        self.terms.push(term);
    }

    pub fn shape(&self) -> &'static JetShape {
        self.shape
    }

    pub fn n_params(&self) -> usize {
        self.nets.iter().map(MlpParams::n_params).sum()
    }

    pub fn flatten_params(&self) -> Vec<f64> {
        self.nets.iter().flat_map(|n| n.flatten()).collect()
    }

    pub fn unflatten_params(&mut self, flat: &[f64]) {
        let mut pos = 0;
        for net in &mut self.nets {
            let n = net.n_params();
            net.unflatten(&flat[pos..pos + n]);
            pos += n;
        }
        assert_eq!(pos, flat.len());
    }

    fn with_params<R>(
        &self,
        flat: &[f64],
        f: impl FnOnce(&[MlpParams]) -> R,
    ) -> R {
        // terms close over per-point data, not the nets, so a scratch
        // copy of the nets carries the candidate parameters
        let mut nets = self.nets.clone();
        let mut pos = 0;
        for net in &mut nets {
            let n = net.n_params();
            net.unflatten(&flat[pos..pos + n]);
            pos += n;
        }
        f(&nets)
    }

    /// Total loss and its gradient with respect to the flat parameter
    /// vector, evaluated by chunked tape recording with a fixed
    /// sequential reduction order.
    pub fn loss_and_grad(&self, flat: &[f64]) -> Result<(f64, Vec<f64>), AdError> {
        self.with_params(flat, |nets| self.assemble(nets, true)).map(|(l, g)| (l, g.unwrap()))
    }

    pub fn loss(&self, flat: &[f64]) -> Result<f64, AdError> {
        self.with_params(flat, |nets| self.assemble(nets, false)).map(|(l, _)| l)
    }

    /// Per-term loss values (for reporting).
    pub fn loss_components(&self, flat: &[f64]) -> Result<Vec<(String, f64)>, AdError> {
        self.with_params(flat, |nets| {
            let mut out = Vec::new();
            for term in &self.terms {
                let mut total = 0.0;
                for start in (0..term.quad.len()).step_by(self.chunk) {
                    let end = (start + self.chunk).min(term.quad.len());
                    let (v, _) = self.run_chunk(nets, term, start..end, false)?;
                    total += v;
                }
                out.push((term.name.clone(), total));
            }
            Ok(out)
        })
    }

    fn assemble(
        &self,
        nets: &[MlpParams],
        want_grad: bool,
    ) -> Result<(f64, Option<Vec<f64>>), AdError> {
        let mut loss = 0.0;
        let mut grad = if want_grad { Some(vec![0.0; self.n_params()]) } else { None };
        for term in &self.terms {
            for start in (0..term.quad.len()).step_by(self.chunk) {
                let end = (start + self.chunk).min(term.quad.len());
                let (v, g) = self.run_chunk(nets, term, start..end, want_grad)?;
                loss += v;
                if let (Some(total), Some(part)) = (grad.as_mut(), g) {
                    for (t, p) in total.iter_mut().zip(part) {
                        *t += p;
                    }
                }
            }
        }
        Ok((loss, grad))
    }

    fn run_chunk(
        &self,
        nets: &[MlpParams],
        term: &Term<M>,
        range: std::ops::Range<usize>,
        want_grad: bool,
    ) -> Result<(f64, Option<Vec<f64>>), AdError> {
        let tape = Tape::<M>::new(self.shape);
        let param_vars: Vec<Vec<Var<'_, M>>> = nets
            .iter()
            .map(|net| {
                let flat = net.flatten();
                flat.iter()
                    .map(|&v| if want_grad { tape.leaf(v) } else { tape.constant(v) })
                    .collect()
            })
            .collect();
        let dim = self.shape.dim();
        let mut root: Option<Var<'_, M>> = None;
        for i in range {
            let x = term.quad.points[i];
            let w = term.quad.weights[i];
            let x_vars: Vec<Var<'_, M>> =
                (0..3).map(|d| if d < dim { tape.input(x[d], d) } else { tape.constant(x[d]) }).collect();
            let ctx = PointCtx { tape: &tape, nets, param_vars: &param_vars, x_vars, x, weight: w };
            let exprs = (term.f)(&ctx, i);
            let contrib = match term.kind {
                TermKind::Quadrature { scale } => {
                    let mut s: Option<Var<'_, M>> = None;
                    for e in exprs {
                        s = Some(match s {
                            Some(acc) => acc + e,
                            None => e,
                        });
                    }
                    s.expect("quadrature term produced no components").scale(w * scale)
                }
                TermKind::MeanSquare { scale } => {
                    let mut s: Option<Var<'_, M>> = None;
                    for e in exprs {
                        let sq = e * e;
                        s = Some(match s {
                            Some(acc) => acc + sq,
                            None => sq,
                        });
                    }
                    s.expect("mean-square term produced no components")
                        .scale(scale / term.quad.len() as f64)
                }
            };
            root = Some(match root {
                Some(acc) => acc + contrib,
                None => contrib,
            });
        }
        let root = root.expect("empty chunk");
        tape.check()?;
        let grad = if want_grad {
            let adj = tape.backward(root);
            let mut g = Vec::with_capacity(self.n_params());
            for pv in &param_vars {
                g.extend(pv.iter().map(|&v| adj.grad(v)));
            }
            Some(g)
        } else {
            None
        };
        Ok((root.value(), grad))
    }

    /// Adam warm-up followed by L-BFGS; updates the problem's networks
    /// in place and returns the loss history with phase labels.
    pub fn train(&mut self, schedule: &Schedule) -> Result<TrainOutcome, TrainError> {
        let start = Instant::now();
        let mut flat = self.flatten_params();
        let mut history = Vec::new();

        let mut adam = AdamState::with_lr(flat.len(), schedule.adam_lr);
        for iter in 0..schedule.adam_steps {
            let (loss, grad) = self
                .loss_and_grad(&flat)
                .map_err(|e| TrainError::NonFiniteLoss { phase: "adam", iter, source: e })?;
            let grad_inf = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
            history.push(HistoryEntry { phase: Phase::Adam, iter, loss, grad_inf });
            adam.step(&mut flat, &grad);
        }

        let mut lbfgs_status = None;
        let mut final_loss = f64::NAN;
        if schedule.lbfgs_steps > 0 {
            let opts = LbfgsOptions {
                max_iters: schedule.lbfgs_steps,
                init_step: schedule.lbfgs_init_step,
                tol: schedule.lbfgs_tol,
                m_mem: schedule.lbfgs_memory,
                ..Default::default()
            };
            let res = lbfgs_minimize(
                |p| match self.loss_and_grad(p) {
                    Ok(v) => v,
                    Err(_) => (f64::INFINITY, vec![0.0; p.len()]),
                },
                &flat,
                &opts,
            );
            for (k, &(loss, grad_inf)) in res.history.iter().enumerate() {
                history.push(HistoryEntry { phase: Phase::Lbfgs, iter: k, loss, grad_inf });
            }
            flat = res.params;
            final_loss = res.loss;
            lbfgs_status = Some(res.status);
        }
        if !final_loss.is_finite() {
            final_loss = self
                .loss(&flat)
                .map_err(|e| TrainError::NonFiniteLoss { phase: "final", iter: 0, source: e })?;
        }
        self.unflatten_params(&flat);
        Ok(TrainOutcome {
            history,
            loss: final_loss,
            wall_secs: start.elapsed().as_secs_f64(),
            lbfgs_status,
        })
    }

    /// Evaluates `f` in a fresh point context at each given point, with
    /// the current (constant) parameters; used for field prediction.
    pub fn eval_at<R>(
        &self,
        points: &[[f64; 3]],
        mut f: impl for<'a, 't> FnMut(&PointCtx<'a, 't, M>, usize) -> R,
    ) -> Vec<R> {
        let dim = self.shape.dim();
        let mut out = Vec::with_capacity(points.len());
        for (i, &x) in points.iter().enumerate() {
            let tape = Tape::<M>::new(self.shape);
            let param_vars: Vec<Vec<Var<'_, M>>> = self
                .nets
                .iter()
                .map(|net| net.flatten().iter().map(|&v| tape.constant(v)).collect())
                .collect();
            let x_vars: Vec<Var<'_, M>> = (0..3)
                .map(|d| if d < dim { tape.input(x[d], d) } else { tape.constant(x[d]) })
                .collect();
            let ctx =
                PointCtx { tape: &tape, nets: &self.nets, param_vars: &param_vars, x_vars, x, weight: 0.0 };
            out.push(f(&ctx, i));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_interior, DomainSpec, Sampling};
    use crate::network::{Activation, MlpParams};

    fn bar_net(seed: u64) -> MlpParams {
        MlpParams::xavier_init(&[1, 10, 1], Activation::Tanh, &[0.0], &[1.0], seed)
    }

    /// 1D elastic bar with u(0)=0, unit end load: energy
    /// 0.5 int E (u')^2 dx - u(1). Exact solution u = x/E.
    fn bar_problem(seed: u64) -> Problem<2> {
        let e_mod = 10.0;
        let mut p: Problem<2> = Problem::new(1, 1, vec![bar_net(seed)]);
        let interior =
            sample_interior(&DomainSpec::Interval { a: 0.0, b: 1.0 }, &Sampling::cells(&[200]));
        let trial = TrialMap::<2>::new(move |ctx| {
            let u_hat = ctx.net(0)[0];
            vec![ctx.input(0) * u_hat]
        });
        let t2 = trial.clone();
        p.add_term(Term::quadrature("internal_energy", interior, move |ctx, _| {
            let u = t2.eval(ctx)[0];
            let ux = ctx.partial(u, &[1]);
            vec![(ux * ux).scale(0.5 * e_mod)]
        }));
        let end = sample_interior(&DomainSpec::Interval { a: 1.0, b: 1.0 + 1e-300 }, &Sampling::grid(&[1]));
        let mut end = end;
        end.points[0] = [1.0, 0.0, 0.0];
        end.weights[0] = 1.0;
        let t3 = trial.clone();
        p.add_term(Term::quadrature("end_load_work", end, move |ctx, _| {
            vec![-t3.eval(ctx)[0]]
        }));
        p
    }

    #[test]
    fn loss_gradient_matches_finite_differences() {
        let p = bar_problem(3);
        let flat = p.flatten_params();
        let (l0, g) = p.loss_and_grad(&flat).unwrap();
        assert!(l0.is_finite());
        for k in (0..flat.len()).step_by(7) {
            let h = 1e-6 * flat[k].abs().max(1.0);
            let mut fp = flat.clone();
            fp[k] += h;
            let mut fm = flat.clone();
            fm[k] -= h;
            let fd = (p.loss(&fp).unwrap() - p.loss(&fm).unwrap()) / (2.0 * h);
            assert!(
                (g[k] - fd).abs() < 1e-5 * fd.abs().max(1.0),
                "param {k}: ad {} fd {fd}",
                g[k]
            );
        }
    }

    #[test]
    fn trains_the_elastic_bar() {
        let mut p = bar_problem(5);
        let sched = Schedule { adam_steps: 200, lbfgs_steps: 100, ..Default::default() };
        let out = p.train(&sched).unwrap();
        // exact minimum of the functional is -0.5 * u(1) = -1/(2E)
        assert!((out.loss + 0.05).abs() < 1e-4, "loss {}", out.loss);
        // field check: u(x) = x / E
        let xs: Vec<[f64; 3]> = (0..11).map(|i| [i as f64 / 10.0, 0.0, 0.0]).collect();
        let trial_u = p.eval_at(&xs, |ctx, _| (ctx.input(0) * ctx.net(0)[0]).value());
        for (p_, x) in trial_u.iter().zip(&xs) {
            assert!((p_ - x[0] / 10.0).abs() < 2e-4, "u({}) = {}", x[0], p_);
        }
        // lbfgs phase of the history is non-increasing on accepted steps
        let lb: Vec<f64> = out
            .history
            .iter()
            .filter(|h| h.phase == Phase::Lbfgs)
            .map(|h| h.loss)
            .collect();
        for w in lb.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn empty_schedule_leaves_params_unchanged() {
        let mut p = bar_problem(7);
        let before = p.flatten_params();
        let out = p.train(&Schedule::default()).unwrap();
        assert_eq!(p.flatten_params(), before);
        assert!(out.history.is_empty());
        assert!(out.loss.is_finite());
    }

    #[test]
    fn training_is_deterministic() {
        let run = || {
            let mut p = bar_problem(11);
            let sched = Schedule { adam_steps: 20, lbfgs_steps: 10, ..Default::default() };
            p.train(&sched).unwrap();
            p.flatten_params()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn mean_square_term_semantics() {
        // residual of u'' with u = x^2 representable exactly: residual 2,
        // loss 4
        let mut p: Problem<3> = Problem::new(1, 2, vec![bar_net(1)]);
        let interior =
            sample_interior(&DomainSpec::Interval { a: 0.0, b: 1.0 }, &Sampling::grid(&[50]));
        p.add_term(Term::mean_square("residual", interior, |ctx, _| {
            let x = ctx.input(0);
            let u = x * x;
            vec![ctx.partial(u, &[2])]
        }));
        let loss = p.loss(&p.flatten_params()).unwrap();
        assert!((loss - 4.0).abs() < 1e-12, "loss {loss}");
    }

    #[test]
    fn dirichlet_exactness_for_arbitrary_params() {
        // u = x * net: u(0) must vanish for any parameters
        let p = bar_problem(42);
        for seed in [0u64, 1, 2] {
            let mut q = bar_problem(seed);
            let flat: Vec<f64> =
                q.flatten_params().iter().map(|v| v * 3.7 + 0.1).collect();
            q.unflatten_params(&flat);
            let u0 = q.eval_at(&[[0.0, 0.0, 0.0]], |ctx, _| {
                (ctx.input(0) * ctx.net(0)[0]).value()
            })[0];
            assert_eq!(u0, 0.0);
        }
        drop(p);
    }

    #[test]
    fn non_finite_loss_is_fatal_in_adam() {
        let mut p: Problem<2> = Problem::new(1, 1, vec![bar_net(2)]);
        let interior =
            sample_interior(&DomainSpec::Interval { a: 0.0, b: 1.0 }, &Sampling::grid(&[10]));
        p.add_term(Term::quadrature("log_trap", interior, |ctx, _| {
            // ln of a negative-going expression: poisoned tape
            vec![(ctx.net(0)[0] - 1e3).ln()]
        }));
        let err = p.train(&Schedule { adam_steps: 1, ..Default::default() }).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("adam iteration 0"), "{msg}");
    }
}
