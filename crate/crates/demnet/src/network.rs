//! Fully-connected feed-forward networks: the approximation spaces for
//! every solver in this crate. Inputs are affinely scaled into [-1, 1]
//! from a declared bounding box before the first layer. Also houses the
//! exact bridge between 1D piecewise-linear finite-element interpolants
//! and one-hidden-layer ReLU networks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    ReluSquared,
    Tanh,
    SinHalfPi,
    Linear,
}

impl Activation {
    pub fn apply<'t, const M: usize>(self, v: Var<'t, M>) -> Var<'t, M> {
        match self {
            Activation::Relu => v.relu(),
            Activation::ReluSquared => v.relu_sq(),
            Activation::Tanh => v.tanh(),
            Activation::SinHalfPi => v.sin_half_pi(),
            Activation::Linear => v,
        }
    }

    pub fn apply_f64(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::ReluSquared => x.max(0.0) * x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::SinHalfPi => (std::f64::consts::FRAC_PI_2 * x).sin(),
            Activation::Linear => x,
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "relu" => Ok(Activation::Relu),
            "relu_squared" => Ok(Activation::ReluSquared),
            "tanh" => Ok(Activation::Tanh),
            "sin_half_pi" => Ok(Activation::SinHalfPi),
            "linear" => Ok(Activation::Linear),
            _ => Err(format!("unknown activation `{s}`")),
        }
    }
}

/// Parameters of a multilayer perceptron. Weight matrices are stored
/// row-major, one row per output neuron. Hidden layers use the listed
/// activations; the output layer is linear.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub widths: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub activations: Vec<Activation>,
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
}

pub fn xavier_stddev(fan_in: usize, fan_out: usize) -> f64 {
    (2.0 / (fan_in + fan_out) as f64).sqrt()
}

impl MlpParams {
    /// Weights from a truncated normal (samples beyond two standard
    /// deviations rejected) with stddev sqrt(2 / (fan_in + fan_out));
    /// biases zero. Deterministic for a fixed seed.
    pub fn xavier_init(
        widths: &[usize],
        activation: Activation,
        lb: &[f64],
        ub: &[f64],
        seed: u64,
    ) -> MlpParams {
        assert!(widths.len() >= 2, "need at least input and output widths");
        assert!(widths.iter().all(|&w| w >= 1), "layer widths must be positive");
        assert_eq!(lb.len(), widths[0]);
        assert_eq!(ub.len(), widths[0]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in widths.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let sd = xavier_stddev(fan_in, fan_out);
            let w = (0..fan_in * fan_out)
                .map(|_| sd * truncated_standard_normal(&mut rng))
                .collect();
            weights.push(w);
            biases.push(vec![0.0; fan_out]);
        }
        MlpParams {
            widths: widths.to_vec(),
            weights,
            biases,
            activations: vec![activation; widths.len().saturating_sub(2)],
            lb: lb.to_vec(),
            ub: ub.to_vec(),
        }
    }

    pub fn set_activations(&mut self, acts: &[Activation]) {
        assert_eq!(acts.len(), self.widths.len() - 2, "one activation per hidden layer");
        self.activations = acts.to_vec();
    }

    pub fn d_in(&self) -> usize {
        self.widths[0]
    }

    pub fn d_out(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn n_params(&self) -> usize {
        self.widths.windows(2).map(|p| p[0] * p[1] + p[1]).sum()
    }

    /// Flat parameter vector: per layer, the row-major weight matrix
    /// followed by the bias vector.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
        out
    }

    pub fn unflatten(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.n_params());
        let mut pos = 0;
        for (w, b) in self.weights.iter_mut().zip(&mut self.biases) {
            let (nw, nb) = (w.len(), b.len());
            w.copy_from_slice(&flat[pos..pos + nw]);
            pos += nw;
            b.copy_from_slice(&flat[pos..pos + nb]);
            pos += nb;
        }
    }

    fn scale_input(&self, i: usize) -> (f64, f64) {
        let span = self.ub[i] - self.lb[i];
        // H = 2 (x - lb) / (ub - lb) - 1
        (2.0 / span, -2.0 * self.lb[i] / span - 1.0)
    }

    /// Plain evaluation; the reference implementation that the tape
    /// evaluation is checked against.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.d_in());
        let mut h: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let (a, b) = self.scale_input(i);
                a * v + b
            })
            .collect();
        let n_layers = self.weights.len();
        for l in 0..n_layers {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let mut next = vec![0.0; n_out];
            for o in 0..n_out {
                let row = &self.weights[l][o * n_in..(o + 1) * n_in];
                let mut s = self.biases[l][o];
                for (wi, hi) in row.iter().zip(&h) {
                    s += wi * hi;
                }
                next[o] = if l + 1 < n_layers {
                    self.activations[l].apply_f64(s)
                } else {
                    s
                };
            }
            h = next;
        }
        h
    }

    /// Tape evaluation with parameters supplied as tape variables in
    /// [`flatten`](Self::flatten) order, so the backward sweep yields
    /// parameter gradients and seeded inputs yield spatial derivatives.
    pub fn forward_on_tape<'t, const M: usize>(
        &self,
        tape: &'t Tape<M>,
        x: &[Var<'t, M>],
        params: &[Var<'t, M>],
    ) -> Vec<Var<'t, M>> {
        assert_eq!(x.len(), self.d_in());
        assert_eq!(params.len(), self.n_params());
        let mut h: Vec<Var<'t, M>> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let (a, b) = self.scale_input(i);
                v.scale(a) + b
            })
            .collect();
        let n_layers = self.weights.len();
        let mut pos = 0;
        for l in 0..n_layers {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let w = &params[pos..pos + n_in * n_out];
            pos += n_in * n_out;
            let b = &params[pos..pos + n_out];
            pos += n_out;
            let mut next = Vec::with_capacity(n_out);
            for o in 0..n_out {
                let s = tape.dot(&w[o * n_in..(o + 1) * n_in], &h) + b[o];
                next.push(if l + 1 < n_layers {
                    self.activations[l].apply(s)
                } else {
                    s
                });
            }
            h = next;
        }
        h
    }

    /// Convenience tape evaluation with constant (non-differentiable)
    /// parameters.
    pub fn forward_on_tape_const<'t, const M: usize>(
        &self,
        tape: &'t Tape<M>,
        x: &[Var<'t, M>],
    ) -> Vec<Var<'t, M>> {
        let flat = self.flatten();
        let params: Vec<Var<'t, M>> = flat.iter().map(|&v| tape.constant(v)).collect();
        self.forward_on_tape(tape, x, &params)
    }

    pub fn save_checkpoint(&self, path: &std::path::Path) -> std::io::Result<()> {
        let cp = Checkpoint { version: CHECKPOINT_VERSION, params: self.clone() };
        std::fs::write(path, serde_json::to_string_pretty(&cp).unwrap())
    }

    pub fn load_checkpoint(path: &std::path::Path) -> Result<MlpParams, String> {
        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        let cp: Checkpoint = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        if cp.version != CHECKPOINT_VERSION {
            return Err(format!(
                "checkpoint version {} unsupported (expected {CHECKPOINT_VERSION})",
                cp.version
            ));
        }
        let p = cp.params;
        for (l, pair) in p.widths.windows(2).enumerate() {
            if p.weights.get(l).map(Vec::len) != Some(pair[0] * pair[1])
                || p.biases.get(l).map(Vec::len) != Some(pair[1])
            {
                return Err(format!("checkpoint layer {l} has inconsistent shapes"));
            }
        }
        Ok(p)
    }
}

pub const CHECKPOINT_VERSION: u32 = 1;

/// On-disk layout: a JSON object `{"version", "params"}` where `params`
/// mirrors [`MlpParams`] (widths, per-layer row-major weight matrices,
/// per-layer bias vectors, hidden activations, input bounds).
#[derive(Serialize, Deserialize)]
struct Checkpoint {
    version: u32,
    params: MlpParams,
}

fn truncated_standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        // Box-Muller
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        if z.abs() <= 2.0 {
            return z;
        }
    }
}

/// A continuous piecewise-linear function written as a one-hidden-layer
/// ReLU network: u(x) = u0 + sum_i w_i max(0, x - x_i).
#[derive(Clone, Debug, PartialEq)]
pub struct ReluFeNet {
    pub u0: f64,
    pub break_points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ReluFeNet {
    pub fn eval(&self, x: f64) -> f64 {
        let mut u = self.u0;
        for (&xi, &wi) in self.break_points.iter().zip(&self.weights) {
            u += wi * (x - xi).max(0.0);
        }
        u
    }

    /// The same function as an [`MlpParams`] with one ReLU hidden layer
    /// (identity input scaling).
    pub fn as_mlp(&self) -> MlpParams {
        let n = self.break_points.len();
        MlpParams {
            widths: vec![1, n, 1],
            weights: vec![vec![1.0; n], self.weights.clone()],
            biases: vec![self.break_points.iter().map(|&x| -x).collect(), vec![self.u0]],
            activations: vec![Activation::Relu],
            lb: vec![-1.0],
            ub: vec![1.0],
        }
    }
}

/// Rewrites a 1D linear finite-element interpolant (nodal values on a
/// strictly increasing mesh) as a ReLU network with one kink per node:
/// with slopes s_i of each element, w_i = s_{i+1} - s_i (s_0 = 0).
pub fn fe_to_relu(nodes: &[f64], nodal_values: &[f64]) -> ReluFeNet {
    assert!(nodes.len() >= 2, "need at least two nodes");
    assert_eq!(nodes.len(), nodal_values.len());
    assert!(
        nodes.windows(2).all(|p| p[0] < p[1]),
        "nodes must be strictly increasing (no duplicates)"
    );
    let n = nodes.len();
    let mut weights = Vec::with_capacity(n - 1);
    let mut prev_slope = 0.0;
    for i in 0..n - 1 {
        let slope = (nodal_values[i + 1] - nodal_values[i]) / (nodes[i + 1] - nodes[i]);
        weights.push(slope - prev_slope);
        prev_slope = slope;
    }
    ReluFeNet { u0: nodal_values[0], break_points: nodes[..n - 1].to_vec(), weights }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::JetShape;

    fn box_bounds(d: usize) -> (Vec<f64>, Vec<f64>) {
        (vec![0.0; d], vec![1.0; d])
    }

    #[test]
    fn xavier_stddev_example() {
        assert_eq!(xavier_stddev(2, 30), 0.25);
    }

    #[test]
    fn xavier_init_properties() {
        let (lb, ub) = box_bounds(2);
        let p = MlpParams::xavier_init(&[2, 30, 30, 1], Activation::Tanh, &lb, &ub, 7);
        assert!(p.biases.iter().all(|b| b.iter().all(|&v| v == 0.0)));
        let q = MlpParams::xavier_init(&[2, 30, 30, 1], Activation::Tanh, &lb, &ub, 7);
        assert_eq!(p, q);
        let r = MlpParams::xavier_init(&[2, 30, 30, 1], Activation::Tanh, &lb, &ub, 8);
        assert_ne!(p, r);
        // truncation: first layer stddev 0.25, so |w| <= 0.5
        assert!(p.weights[0].iter().all(|&w| w.abs() <= 0.5));
        // sample stddev near the target (30x30 layer, sd = sqrt(2/60))
        let sd = xavier_stddev(30, 30);
        let var: f64 =
            p.weights[1].iter().map(|w| w * w).sum::<f64>() / p.weights[1].len() as f64;
        assert!((var.sqrt() - sd).abs() < 0.15 * sd, "sample sd {} target {sd}", var.sqrt());
    }

    #[test]
    fn forward_zero_weights_is_zero() {
        let (lb, ub) = box_bounds(3);
        let mut p = MlpParams::xavier_init(&[3, 10, 2], Activation::Relu, &lb, &ub, 1);
        for w in &mut p.weights {
            w.fill(0.0);
        }
        assert_eq!(p.forward(&[0.3, 0.4, 0.9]), vec![0.0, 0.0]);
    }

    #[test]
    fn single_linear_layer_identity() {
        let p = MlpParams {
            widths: vec![2, 2],
            weights: vec![vec![1.0, 0.0, 0.0, 1.0]],
            biases: vec![vec![0.0, 0.0]],
            activations: vec![],
            lb: vec![-1.0, -1.0],
            ub: vec![1.0, 1.0],
        };
        let y = p.forward(&[0.3, -0.7]);
        assert!((y[0] - 0.3).abs() < 1e-15 && (y[1] + 0.7).abs() < 1e-15);
    }

    /// Independent re-evaluation, deliberately structured differently
    /// from `MlpParams::forward`.
    fn forward_oracle(p: &MlpParams, x: &[f64]) -> Vec<f64> {
        let mut h: Vec<f64> = (0..x.len())
            .map(|i| 2.0 * (x[i] - p.lb[i]) / (p.ub[i] - p.lb[i]) - 1.0)
            .collect();
        for l in 0..p.weights.len() {
            let n_in = p.widths[l];
            let mut next = Vec::new();
            for (o, &b) in p.biases[l].iter().enumerate() {
                let s = b + (0..n_in).map(|i| p.weights[l][o * n_in + i] * h[i]).sum::<f64>();
                next.push(if l + 1 < p.weights.len() { p.activations[l].apply_f64(s) } else { s });
            }
            h = next;
        }
        h
    }

    #[test]
    fn forward_matches_independent_oracle_and_tape() {
        let (lb, ub) = box_bounds(2);
        let p = MlpParams::xavier_init(&[2, 15, 15, 3], Activation::Tanh, &lb, &ub, 42);
        let tape = Tape::<1>::scalar();
        for x in [[0.1, 0.9], [0.5, 0.5], [0.97, 0.03]] {
            let y = p.forward(&x);
            let o = forward_oracle(&p, &x);
            for (a, b) in y.iter().zip(&o) {
                assert!((a - b).abs() < 1e-15);
            }
            tape.reset();
            let xv: Vec<_> = x.iter().map(|&v| tape.leaf(v)).collect();
            let yt = p.forward_on_tape_const(&tape, &xv);
            for (a, b) in y.iter().zip(&yt) {
                assert!((a - b.value()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn spatial_derivative_matches_fd() {
        let (lb, ub) = box_bounds(2);
        for act in [Activation::Tanh, Activation::ReluSquared] {
            let p = MlpParams::xavier_init(&[2, 20, 20, 1], act, &lb, &ub, 3);
            let shape = JetShape::get(2, 1);
            let tape = Tape::<4>::new(shape);
            let x = [0.37, 0.61];
            for i in 0..2 {
                tape.reset();
                let xv: Vec<_> =
                    x.iter().enumerate().map(|(j, &v)| tape.input(v, j)).collect();
                let y = p.forward_on_tape_const(&tape, &xv)[0];
                let mut alpha = [0usize; 2];
                alpha[i] = 1;
                let d = tape.partial(y, &alpha).value();
                let h = 1e-6;
                let (mut xp, mut xm) = (x, x);
                xp[i] += h;
                xm[i] -= h;
                let fd = (p.forward(&xp)[0] - p.forward(&xm)[0]) / (2.0 * h);
                assert!((d - fd).abs() < 1e-6 * fd.abs().max(1.0), "{act:?} dx{i}: {d} vs {fd}");
            }
        }
    }

    #[test]
    fn relu_squared_output_is_c1() {
        let (lb, ub) = box_bounds(1);
        let p = MlpParams::xavier_init(&[1, 20, 20, 1], Activation::ReluSquared, &lb, &ub, 11);
        let h = 1e-7;
        for &x in &[0.13, 0.5, 0.77, 0.91] {
            let fwd = (p.forward(&[x + h])[0] - p.forward(&[x])[0]) / h;
            let bwd = (p.forward(&[x])[0] - p.forward(&[x - h])[0]) / h;
            assert!((fwd - bwd).abs() < 1e-6 * fwd.abs().max(1.0), "kink at {x}");
        }
    }

    #[test]
    fn parameter_gradient_matches_fd() {
        let (lb, ub) = box_bounds(1);
        let p = MlpParams::xavier_init(&[1, 8, 1], Activation::Tanh, &lb, &ub, 5);
        let flat = p.flatten();
        let x = [0.42];
        let loss = |flat: &[f64]| {
            let mut q = p.clone();
            q.unflatten(flat);
            let y = q.forward(&x)[0];
            y * y
        };
        let tape = Tape::<1>::scalar();
        let pv: Vec<_> = flat.iter().map(|&v| tape.leaf(v)).collect();
        let xv = [tape.leaf(x[0])];
        let y = p.forward_on_tape(&tape, &xv, &pv)[0];
        let adj = tape.backward(y * y);
        for (k, &v) in flat.iter().enumerate().step_by(3) {
            let h = 1e-6 * v.abs().max(1.0);
            let mut fp = flat.clone();
            fp[k] += h;
            let mut fm = flat.clone();
            fm[k] -= h;
            let fd = (loss(&fp) - loss(&fm)) / (2.0 * h);
            let g = adj.grad(pv[k]);
            assert!((g - fd).abs() < 1e-6 * fd.abs().max(1.0), "param {k}: {g} vs {fd}");
        }
    }

    #[test]
    fn flatten_roundtrip_and_checkpoint() {
        let (lb, ub) = box_bounds(2);
        let p = MlpParams::xavier_init(&[2, 7, 4], Activation::SinHalfPi, &lb, &ub, 99);
        let mut q = p.clone();
        let flat = p.flatten();
        assert_eq!(flat.len(), p.n_params());
        q.unflatten(&flat);
        assert_eq!(p, q);

        let dir = std::env::temp_dir().join("demnet_ckpt_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("net.json");
        p.save_checkpoint(&path).unwrap();
        let r = MlpParams::load_checkpoint(&path).unwrap();
        assert_eq!(p, r);

        let bad = dir.join("bad.json");
        std::fs::write(&bad, r#"{"version": 99, "params": null}"#).unwrap();
        assert!(MlpParams::load_checkpoint(&bad).is_err());
    }

    #[test]
    fn fe_to_relu_hat_example() {
        let net = fe_to_relu(&[0.0, 0.5, 1.0], &[0.0, 1.0, 0.0]);
        assert_eq!(net.u0, 0.0);
        assert_eq!(net.weights, vec![2.0, -4.0]);
        assert!((net.eval(0.5) - 1.0).abs() < 1e-15);
        assert!(net.eval(1.0).abs() < 1e-15);
    }

    #[test]
    fn fe_to_relu_constant_values() {
        let net = fe_to_relu(&[0.0, 1.0, 3.0], &[2.5, 2.5, 2.5]);
        assert_eq!(net.u0, 2.5);
        assert!(net.weights.iter().all(|&w| w == 0.0));
    }

    #[test]
    fn fe_to_relu_matches_linear_interpolant() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut nodes = vec![0.0];
        for _ in 0..19 {
            let last = *nodes.last().unwrap();
            nodes.push(last + rng.gen_range(0.05..1.0));
        }
        let values: Vec<f64> = (0..20).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let net = fe_to_relu(&nodes, &values);
        let mlp = net.as_mlp();
        let interp = |x: f64| {
            let i = nodes.partition_point(|&n| n <= x).clamp(1, nodes.len() - 1);
            let t = (x - nodes[i - 1]) / (nodes[i] - nodes[i - 1]);
            values[i - 1] * (1.0 - t) + values[i] * t
        };
        // exact at the nodes
        for (n, v) in nodes.iter().zip(&values) {
            assert!((net.eval(*n) - v).abs() < 1e-12);
        }
        let span = *nodes.last().unwrap();
        for _ in 0..1000 {
            let x = rng.gen_range(0.0..span);
            let want = interp(x);
            assert!((net.eval(x) - want).abs() < 1e-12);
            assert!((mlp.forward(&[x])[0] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn scaled_input_stays_in_unit_box() {
        let p = MlpParams::xavier_init(&[1, 2, 1], Activation::Tanh, &[3.0], &[7.0], 0);
        for &x in &[3.0, 4.2, 5.5, 7.0] {
            let (a, b) = p.scale_input(0);
            let h = a * x + b;
            assert!((-1.0..=1.0).contains(&h));
        }
    }
}
