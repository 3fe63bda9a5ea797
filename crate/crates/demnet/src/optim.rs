//! Optimizers for full-batch training: plain gradient descent, Adam,
//! and L-BFGS with a strong-Wolfe line search. The usual schedule runs
//! Adam for a warm-up phase and hands over to L-BFGS.

/// params <- params - lr * grad
pub fn gd_step(params: &mut [f64], grad: &[f64], lr: f64) {
    assert_eq!(params.len(), grad.len());
    assert!(grad.iter().all(|g| g.is_finite()), "non-finite gradient");
    for (p, g) in params.iter_mut().zip(grad) {
        *p -= lr * g;
    }
}

/// Adam with bias correction. Defaults: lr 1e-3, beta1 0.9, beta2 0.999,
/// eps 1e-8.
#[derive(Clone, Debug)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(n: usize) -> AdamState {
        AdamState::with_lr(n, 1e-3)
    }

    pub fn with_lr(n: usize, lr: f64) -> AdamState {
        AdamState { m: vec![0.0; n], v: vec![0.0; n], t: 0, lr, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        assert_eq!(params.len(), grad.len());
        assert_eq!(params.len(), self.m.len());
        assert!(grad.iter().all(|g| g.is_finite()), "non-finite gradient");
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let mhat = self.m[i] / bc1;
            let vhat = self.v[i] / bc2;
            params[i] -= self.lr * mhat / (vhat.sqrt() + self.eps);
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LbfgsOptions {
    pub m_mem: usize,
    pub c1: f64,
    pub c2: f64,
    /// Trial step length for the very first line search; later
    /// iterations start from the unit step.
    pub init_step: f64,
    pub max_iters: usize,
    /// Convergence threshold on the max-norm of the gradient.
    pub tol: f64,
}

impl Default for LbfgsOptions {
    fn default() -> LbfgsOptions {
        LbfgsOptions { m_mem: 20, c1: 1e-4, c2: 0.9, init_step: 1.0, max_iters: 100, tol: 1e-8 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LbfgsStatus {
    Converged,
    MaxIters,
    /// Line search could not find an acceptable step; the best iterate
    /// seen so far is returned.
    LineSearchFailed,
}

#[derive(Clone, Debug)]
pub struct LbfgsResult {
    pub params: Vec<f64>,
    pub loss: f64,
    pub iters: usize,
    pub status: LbfgsStatus,
    /// (loss, max-norm of gradient) after each accepted iterate,
    /// starting with the initial point.
    pub history: Vec<(f64, f64)>,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `f` (which returns loss and gradient) starting at `x0`.
/// Non-finite losses are treated as +inf, so the line search backs away
/// from inadmissible regions instead of aborting.
pub fn lbfgs_minimize<F>(mut f: F, x0: &[f64], opts: &LbfgsOptions) -> LbfgsResult
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let sanitize = |l: f64| if l.is_finite() { l } else { f64::INFINITY };
    let mut x = x0.to_vec();
    let (l0, mut g) = f(&x);
    let mut loss = sanitize(l0);
    let mut history = vec![(loss, inf_norm(&g))];
    let mut pairs: std::collections::VecDeque<(Vec<f64>, Vec<f64>)> = Default::default();
    let mut status = LbfgsStatus::MaxIters;
    let mut iters = 0;

    for it in 0..opts.max_iters {
        if inf_norm(&g) <= opts.tol {
            status = LbfgsStatus::Converged;
            break;
        }
        // Two-loop recursion for d = -H g.
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(pairs.len());
        for (s, y) in pairs.iter().rev() {
            let rho = 1.0 / dot(y, s);
            let a = rho * dot(s, &d);
            for i in 0..n {
                d[i] -= a * y[i];
            }
            alphas.push((a, rho));
        }
        if let Some((s, y)) = pairs.back() {
            let gamma = dot(s, y) / dot(y, y);
            for v in d.iter_mut() {
                *v *= gamma;
            }
        }
        for ((s, y), &(a, rho)) in pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            for i in 0..n {
                d[i] += (a - b) * s[i];
            }
        }
        let mut dg = dot(&d, &g);
        if !(dg < 0.0) {
            pairs.clear();
            d = g.iter().map(|v| -v).collect();
            dg = -dot(&g, &g);
            if !(dg < 0.0) {
                status = LbfgsStatus::Converged;
                break;
            }
        }

        let alpha0 = if it == 0 { opts.init_step } else { 1.0 };
        let mut eval_phi = |a: f64| -> (f64, f64, Vec<f64>) {
            let xa: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + a * di).collect();
            let (l, ga) = f(&xa);
            let slope = dot(&ga, &d);
            (sanitize(l), slope, ga)
        };
        match wolfe_search(&mut eval_phi, loss, dg, alpha0, opts.c1, opts.c2) {
            Some((alpha, new_loss, new_g)) => {
                let s: Vec<f64> = d.iter().map(|di| alpha * di).collect();
                let y: Vec<f64> = new_g.iter().zip(&g).map(|(a, b)| a - b).collect();
                if dot(&s, &y) > 1e-10 * inf_norm(&s) * inf_norm(&y) {
                    if pairs.len() == opts.m_mem {
                        pairs.pop_front();
                    }
                    pairs.push_back((s.clone(), y));
                }
                for i in 0..n {
                    x[i] += s[i];
                }
                loss = new_loss;
                g = new_g;
                iters = it + 1;
                history.push((loss, inf_norm(&g)));
            }
            None => {
                // retry once from a plain gradient step before giving
                // up; stale curvature pairs are the usual culprit
                if !pairs.is_empty() {
                    pairs.clear();
                    continue;
                }
                status = LbfgsStatus::LineSearchFailed;
                break;
            }
        }
        if status == LbfgsStatus::MaxIters && inf_norm(&g) <= opts.tol {
            status = LbfgsStatus::Converged;
            break;
        }
    }
    if status == LbfgsStatus::MaxIters && inf_norm(&g) <= opts.tol {
        status = LbfgsStatus::Converged;
    }
    LbfgsResult { params: x, loss, iters, status, history }
}

/// Strong-Wolfe line search (bracket then zoom). `phi` evaluates the
/// objective along the ray and returns (value, directional derivative,
/// gradient). `f0`, `g0` are the value and slope at step 0; `g0 < 0`.
fn wolfe_search<F>(
    phi: &mut F,
    f0: f64,
    g0: f64,
    alpha0: f64,
    c1: f64,
    c2: f64,
) -> Option<(f64, f64, Vec<f64>)>
where
    F: FnMut(f64) -> (f64, f64, Vec<f64>),
{
    let mut alpha_prev = 0.0;
    let mut f_prev = f0;
    let mut g_prev = g0;
    let mut alpha = alpha0;
    for i in 0..30 {
        let (fa, ga, grad) = phi(alpha);
        if fa > f0 + c1 * alpha * g0 || (i > 0 && fa >= f_prev) {
            return zoom(phi, f0, g0, c1, c2, alpha_prev, f_prev, g_prev, alpha, fa, ga);
        }
        if ga.abs() <= -c2 * g0 {
            return Some((alpha, fa, grad));
        }
        if ga >= 0.0 {
            return zoom(phi, f0, g0, c1, c2, alpha, fa, ga, alpha_prev, f_prev, g_prev);
        }
        alpha_prev = alpha;
        f_prev = fa;
        g_prev = ga;
        alpha *= 2.0;
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn zoom<F>(
    phi: &mut F,
    f0: f64,
    g0: f64,
    c1: f64,
    c2: f64,
    mut lo: f64,
    mut f_lo: f64,
    mut g_lo: f64,
    mut hi: f64,
    mut f_hi: f64,
    _g_hi: f64,
) -> Option<(f64, f64, Vec<f64>)>
where
    F: FnMut(f64) -> (f64, f64, Vec<f64>),
{
    for _ in 0..50 {
        // Quadratic interpolation using (lo, f_lo, g_lo) and (hi, f_hi),
        // safeguarded toward bisection.
        let mut alpha = {
            let dh = hi - lo;
            let denom = f_hi - f_lo - g_lo * dh;
            if denom.is_finite() && denom.abs() > 1e-300 {
                lo - 0.5 * g_lo * dh * dh / denom
            } else {
                0.5 * (lo + hi)
            }
        };
        let (a, b) = if lo < hi { (lo, hi) } else { (hi, lo) };
        let margin = 0.1 * (b - a);
        if !alpha.is_finite() || alpha < a + margin || alpha > b - margin {
            alpha = 0.5 * (lo + hi);
        }
        if (hi - lo).abs() < 1e-16 * lo.abs().max(1.0) {
            return None;
        }
        let (fa, ga, grad) = phi(alpha);
        if fa > f0 + c1 * alpha * g0 || fa >= f_lo {
            hi = alpha;
            f_hi = fa;
        } else {
            if ga.abs() <= -c2 * g0 {
                return Some((alpha, fa, grad));
            }
            if ga * (hi - lo) >= 0.0 {
                hi = lo;
                f_hi = f_lo;
            }
            lo = alpha;
            f_lo = fa;
            g_lo = ga;
        }
    }
    None
}
