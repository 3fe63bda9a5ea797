//! Truncated multivariate Taylor arithmetic ("jets").
//!
//! A jet carries the value of a quantity together with its partial
//! derivatives with respect to up to four seed variables, truncated at a
//! fixed total order. Recording tape operations over jet values gives
//! spatial derivatives of network outputs in the same sweep that later
//! yields parameter gradients.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

pub const MAX_VARS: usize = 4;
pub const MAX_ORDER: usize = 4;

/// Layout of a truncated Taylor expansion: the multi-index basis for a
/// given (number of seed variables, truncation order) pair, plus the
/// precomputed index triples used by truncated multiplication.
#[derive(Debug)]
pub struct JetShape {
    dim: usize,
    order: usize,
    exps: Vec<[u8; MAX_VARS]>,
    index: HashMap<[u8; MAX_VARS], usize>,
    /// (i, j, t) with exps[i] + exps[j] = exps[t]
    mul_triples: Vec<(u16, u16, u16)>,
    factorial: Vec<f64>,
}

impl JetShape {
    /// Interned shape for `dim` seed variables truncated at total `order`.
    pub fn get(dim: usize, order: usize) -> &'static JetShape {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), &'static JetShape>>> =
            OnceLock::new();
        assert!(dim <= MAX_VARS, "at most {MAX_VARS} seed variables");
        assert!(order <= MAX_ORDER, "truncation order above {MAX_ORDER} is unsupported");
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut cache = cache.lock().unwrap();
        cache
            .entry((dim, order))
            .or_insert_with(|| Box::leak(Box::new(JetShape::build(dim, order))))
    }

    fn build(dim: usize, order: usize) -> JetShape {
        let mut exps: Vec<[u8; MAX_VARS]> = Vec::new();
        // Graded ordering: total degree first, lexicographic inside a degree.
        for total in 0..=order {
            let mut stack = vec![([0u8; MAX_VARS], 0usize, total)];
            while let Some((cur, pos, rem)) = stack.pop() {
                if pos == dim {
                    if rem == 0 {
                        exps.push(cur);
                    }
                    continue;
                }
                // Push in reverse so that smaller leading exponents pop first.
                for e in (0..=rem).rev() {
                    let mut next = cur;
                    next[pos] = e as u8;
                    stack.push((next, pos + 1, rem - e));
                }
            }
        }
        // The stack enumeration above yields lexicographic order with the
        // first variable varying slowest; sort to make it canonical.
        exps.sort_by(|a, b| {
            let (ta, tb) = (deg(a), deg(b));
            ta.cmp(&tb).then_with(|| a.cmp(b))
        });
        let index: HashMap<_, _> = exps.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        let mut mul_triples = Vec::new();
        for (i, a) in exps.iter().enumerate() {
            for (j, b) in exps.iter().enumerate() {
                if deg(a) + deg(b) <= order {
                    let mut s = [0u8; MAX_VARS];
                    for v in 0..MAX_VARS {
                        s[v] = a[v] + b[v];
                    }
                    let t = index[&s];
                    mul_triples.push((i as u16, j as u16, t as u16));
                }
            }
        }
        let factorial = exps
            .iter()
            .map(|e| e.iter().map(|&k| fact(k as usize)).product())
            .collect();
        JetShape { dim, order, exps, index, mul_triples, factorial }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coefficient slot of the multi-index `alpha` (length = dim).
    pub fn slot(&self, alpha: &[usize]) -> usize {
        assert!(alpha.len() == self.dim, "multi-index length must equal shape dim");
        let mut key = [0u8; MAX_VARS];
        for (k, &a) in key.iter_mut().zip(alpha) {
            *k = a as u8;
        }
        *self
            .index
            .get(&key)
            .unwrap_or_else(|| panic!("multi-index {alpha:?} outside truncation order"))
    }

    /// alpha! for the multi-index stored at `slot`; converts a Taylor
    /// coefficient into the corresponding partial derivative.
    pub fn factorial(&self, slot: usize) -> f64 {
        self.factorial[slot]
    }

    pub fn exponents(&self, slot: usize) -> &[u8; MAX_VARS] {
        &self.exps[slot]
    }

    pub fn mul_triples(&self) -> &[(u16, u16, u16)] {
        &self.mul_triples
    }

    /// c += a ⊛ b (truncated convolution).
    pub fn mul_into(&self, c: &mut [f64], a: &[f64], b: &[f64]) {
        for &(i, j, t) in &self.mul_triples {
            c[t as usize] += a[i as usize] * b[j as usize];
        }
    }

    /// Adjoint of the convolution: given d(root)/d(c), accumulate
    /// d(root)/d(a) assuming c = a ⊛ b.
    pub fn mul_adjoint_into(&self, a_bar: &mut [f64], c_bar: &[f64], b: &[f64]) {
        for &(i, j, t) in &self.mul_triples {
            a_bar[i as usize] += c_bar[t as usize] * b[j as usize];
        }
    }

    /// Composition f(a) where `derivs[m]` = f^(m) evaluated at a's value,
    /// for m = 0..=order. Horner in the nilpotent part of `a`.
    pub fn compose<const M: usize>(&self, a: &[f64; M], derivs: &[f64]) -> [f64; M] {
        let n = self.len();
        let k = self.order;
        let mut hat = *a;
        hat[0] = 0.0;
        let mut r = [0.0; M];
        r[0] = derivs[k] / fact(k);
        for m in (0..k).rev() {
            let mut next = [0.0; M];
            self.mul_into(&mut next[..n], &r[..n], &hat[..n]);
            next[0] += derivs[m] / fact(m);
            r = next;
        }
        r
    }
}

fn deg(e: &[u8; MAX_VARS]) -> usize {
    e.iter().map(|&k| k as usize).sum()
}

pub fn fact(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Scalar derivative tables for the unary primitives, up to `k`-th order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnaryKind {
    Exp,
    Ln,
    Sin,
    Cos,
    Tanh,
    Sqrt,
    Recip,
    Relu,
    ReluSq,
}

impl UnaryKind {
    pub fn name(self) -> &'static str {
        match self {
            UnaryKind::Exp => "exp",
            UnaryKind::Ln => "ln",
            UnaryKind::Sin => "sin",
            UnaryKind::Cos => "cos",
            UnaryKind::Tanh => "tanh",
            UnaryKind::Sqrt => "sqrt",
            UnaryKind::Recip => "recip",
            UnaryKind::Relu => "relu",
            UnaryKind::ReluSq => "relu_sq",
        }
    }

    /// f(x0), f'(x0), ..., f^(k)(x0). `k` may be at most MAX_ORDER + 1
    /// (the extra order feeds the backward pass of composed nodes).
    pub fn derivs(self, x0: f64, k: usize, out: &mut [f64]) {
        debug_assert!(k <= MAX_ORDER + 1 && out.len() > k);
        match self {
            UnaryKind::Exp => {
                let e = x0.exp();
                out[..=k].fill(e);
            }
            UnaryKind::Ln => {
                out[0] = x0.ln();
                // d^m/dx^m ln x = (-1)^(m-1) (m-1)! x^-m
                let mut c = 1.0;
                for m in 1..=k {
                    out[m] = c * x0.powi(-(m as i32));
                    c *= -(m as f64);
                }
            }
            UnaryKind::Sin | UnaryKind::Cos => {
                let (s, c) = x0.sin_cos();
                let cycle = if self == UnaryKind::Sin {
                    [s, c, -s, -c]
                } else {
                    [c, -s, -c, s]
                };
                for m in 0..=k {
                    out[m] = cycle[m % 4];
                }
            }
            UnaryKind::Tanh => {
                let t = x0.tanh();
                let polys: [&[f64]; 6] = [
                    &[0.0, 1.0],
                    &[1.0, 0.0, -1.0],
                    &[0.0, -2.0, 0.0, 2.0],
                    &[-2.0, 0.0, 8.0, 0.0, -6.0],
                    &[0.0, 16.0, 0.0, -40.0, 0.0, 24.0],
                    &[16.0, 0.0, -136.0, 0.0, 240.0, 0.0, -120.0],
                ];
                for m in 0..=k {
                    let mut v = 0.0;
                    for &coef in polys[m].iter().rev() {
                        v = v * t + coef;
                    }
                    out[m] = v;
                }
            }
            UnaryKind::Sqrt => {
                out[0] = x0.sqrt();
                let mut c = 0.5;
                for m in 1..=k {
                    out[m] = c * x0.powf(0.5 - m as f64);
                    c *= 0.5 - m as f64;
                }
            }
            UnaryKind::Recip => {
                // d^m/dx^m x^-1 = (-1)^m m! x^-(m+1)
                let mut c = 1.0;
                for m in 0..=k {
                    out[m] = c * x0.powi(-(m as i32 + 1));
                    c *= -((m + 1) as f64);
                }
            }
            UnaryKind::Relu => {
                out[..=k].fill(0.0);
                if x0 > 0.0 {
                    out[0] = x0;
                    out[1] = 1.0;
                }
            }
            UnaryKind::ReluSq => {
                out[..=k].fill(0.0);
                if x0 > 0.0 {
                    out[0] = x0 * x0;
                    out[1] = 2.0 * x0;
                    if k >= 2 {
                        out[2] = 2.0;
                    }
                }
            }
        }
    }
}
