//! Reverse-mode tape over jet-valued scalars.
//!
//! The tape records a dynamic expression graph whose node values are
//! truncated Taylor expansions in the seeded input variables. A single
//! backward sweep from a scalar root then yields the gradient of that
//! root with respect to every leaf, while spatial derivatives are read
//! off the jet coefficients during the forward recording. Tapes are
//! confined to one thread; independent tapes may run concurrently.

use std::cell::RefCell;

use super::jet::{JetShape, UnaryKind, MAX_ORDER};
use super::AdError;

#[derive(Clone, Copy, Debug)]
enum Op {
    Leaf,
    Const,
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Neg(u32),
    Scale(u32, f64),
    AddC(u32),
    Unary(UnaryKind, u32),
    Powi(u32, u32),
    Dot { a: u32, b: u32, len: u32 },
    Extract(u32, u16),
}

impl Op {
    fn name(&self) -> &'static str {
        match self {
            Op::Leaf => "leaf",
            Op::Const => "const",
            Op::Add(..) => "add",
            Op::Sub(..) => "sub",
            Op::Mul(..) => "mul",
            Op::Div(..) => "div",
            Op::Neg(..) => "neg",
            Op::Scale(..) => "scale",
            Op::AddC(..) => "add_const",
            Op::Unary(k, _) => k.name(),
            Op::Powi(..) => "powi",
            Op::Dot { .. } => "dot",
            Op::Extract(..) => "extract",
        }
    }
}

struct Node<const M: usize> {
    op: Op,
    val: [f64; M],
}

pub struct Tape<const M: usize> {
    shape: &'static JetShape,
    nodes: RefCell<Vec<Node<M>>>,
    aux: RefCell<Vec<u32>>,
    poison: RefCell<Option<AdError>>,
}

/// Handle to a tape node. Cheap to copy; arithmetic operators record new
/// nodes on the owning tape.
#[derive(Clone, Copy)]
pub struct Var<'t, const M: usize> {
    tape: &'t Tape<M>,
    idx: u32,
}

impl<const M: usize> Tape<M> {
    pub fn new(shape: &'static JetShape) -> Self {
        assert!(shape.len() <= M, "jet shape needs {} slots, tape carries {M}", shape.len());
        Tape {
            shape,
            nodes: RefCell::new(Vec::new()),
            aux: RefCell::new(Vec::new()),
            poison: RefCell::new(None),
        }
    }

    /// Tape over plain scalars (no seeded derivatives).
    pub fn scalar() -> Self {
        Self::new(JetShape::get(0, 0))
    }

    pub fn shape(&self) -> &'static JetShape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.borrow().is_empty()
    }

    /// Drop all recorded nodes but keep allocations for reuse.
    pub fn reset(&self) {
        self.nodes.borrow_mut().clear();
        self.aux.borrow_mut().clear();
        *self.poison.borrow_mut() = None;
    }

    /// First non-finite value recorded since the last reset, if any.
    pub fn check(&self) -> Result<(), AdError> {
        match self.poison.borrow().clone() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    fn push(&self, op: Op, val: [f64; M]) -> Var<'_, M> {
        let n = self.shape.len();
        if !val[..n].iter().all(|v| v.is_finite()) && self.poison.borrow().is_none() {
            let idx = self.nodes.borrow().len();
            *self.poison.borrow_mut() = Some(AdError::NonFinite { op: op.name(), index: idx });
        }
        let mut nodes = self.nodes.borrow_mut();
        let idx = nodes.len() as u32;
        nodes.push(Node { op, val });
        Var { tape: self, idx }
    }

    pub fn constant(&self, v: f64) -> Var<'_, M> {
        let mut val = [0.0; M];
        val[0] = v;
        self.push(Op::Const, val)
    }

    /// Differentiable leaf (a parameter or an unseeded input).
    pub fn leaf(&self, v: f64) -> Var<'_, M> {
        let mut val = [0.0; M];
        val[0] = v;
        self.push(Op::Leaf, val)
    }

    /// Leaf seeded as Taylor variable number `seed` (0-based).
    pub fn input(&self, v: f64, seed: usize) -> Var<'_, M> {
        assert!(seed < self.shape.dim(), "seed variable out of range");
        let mut val = [0.0; M];
        val[0] = v;
        if self.shape.order() >= 1 {
            let mut alpha = vec![0usize; self.shape.dim()];
            alpha[seed] = 1;
            val[self.shape.slot(&alpha)] = 1.0;
        }
        self.push(Op::Leaf, val)
    }

    fn val(&self, idx: u32) -> [f64; M] {
        self.nodes.borrow()[idx as usize].val
    }

    pub fn dot(&self, a: &[Var<'_, M>], b: &[Var<'_, M>]) -> Var<'_, M> {
        assert_eq!(a.len(), b.len());
        let n = self.shape.len();
        let (a_start, b_start);
        {
            let mut aux = self.aux.borrow_mut();
            a_start = aux.len() as u32;
            aux.extend(a.iter().map(|v| v.idx));
            b_start = aux.len() as u32;
            aux.extend(b.iter().map(|v| v.idx));
        }
        let mut val = [0.0; M];
        {
            let nodes = self.nodes.borrow();
            for (x, y) in a.iter().zip(b) {
                self.shape.mul_into(
                    &mut val[..n],
                    &nodes[x.idx as usize].val[..n],
                    &nodes[y.idx as usize].val[..n],
                );
            }
        }
        self.push(Op::Dot { a: a_start, b: b_start, len: a.len() as u32 }, val)
    }

    /// Taylor coefficient `alpha` of `v` times alpha!: the mixed partial
    /// derivative of `v` with respect to the seeded inputs.
    pub fn partial(&self, v: Var<'_, M>, alpha: &[usize]) -> Var<'_, M> {
        let slot = self.shape.slot(alpha);
        let mut val = [0.0; M];
        val[0] = self.val(v.idx)[slot];
        let e = self.push(Op::Extract(v.idx, slot as u16), val);
        let f = self.shape.factorial(slot);
        if f == 1.0 {
            e
        } else {
            e.scale(f)
        }
    }

    fn unary(&self, kind: UnaryKind, a: Var<'_, M>) -> Var<'_, M> {
        let k = self.shape.order();
        let av = self.val(a.idx);
        let mut d = [0.0; MAX_ORDER + 2];
        kind.derivs(av[0], k, &mut d);
        let val = self.shape.compose(&av, &d[..=k]);
        self.push(Op::Unary(kind, a.idx), val)
    }

    fn jet_powi(&self, a: &[f64; M], n: u32) -> [f64; M] {
        let len = self.shape.len();
        let mut r = *a;
        for _ in 1..n {
            let mut next = [0.0; M];
            self.shape.mul_into(&mut next[..len], &r[..len], &a[..len]);
            r = next;
        }
        r
    }

    /// Reverse sweep from a scalar root; adjoints of every node with
    /// respect to the root's value component. Node values are untouched,
    /// so repeated sweeps from the same root agree exactly.
    pub fn backward(&self, root: Var<'_, M>) -> Adjoints<M> {
        let nodes = self.nodes.borrow();
        let aux = self.aux.borrow();
        let shape = self.shape;
        let n = shape.len();
        let k = shape.order();
        let mut bar = vec![[0.0f64; M]; nodes.len()];
        bar[root.idx as usize][0] = 1.0;
        for i in (0..nodes.len()).rev() {
            let b = bar[i];
            if b[..n].iter().all(|v| *v == 0.0) {
                continue;
            }
            match nodes[i].op {
                Op::Leaf | Op::Const => {}
                Op::Add(p, q) => {
                    axpy(&mut bar[p as usize][..n], 1.0, &b[..n]);
                    axpy(&mut bar[q as usize][..n], 1.0, &b[..n]);
                }
                Op::Sub(p, q) => {
                    axpy(&mut bar[p as usize][..n], 1.0, &b[..n]);
                    axpy(&mut bar[q as usize][..n], -1.0, &b[..n]);
                }
                Op::Mul(p, q) => {
                    let (pv, qv) = (nodes[p as usize].val, nodes[q as usize].val);
                    shape.mul_adjoint_into(&mut bar[p as usize][..n], &b[..n], &qv[..n]);
                    shape.mul_adjoint_into(&mut bar[q as usize][..n], &b[..n], &pv[..n]);
                }
                Op::Div(p, q) => {
                    let qv = nodes[q as usize].val;
                    let mut d = [0.0; MAX_ORDER + 2];
                    UnaryKind::Recip.derivs(qv[0], k, &mut d);
                    let r = shape.compose(&qv, &d[..=k]);
                    shape.mul_adjoint_into(&mut bar[p as usize][..n], &b[..n], &r[..n]);
                    // d(p/q)/dq = -(p/q)/q
                    let cv = nodes[i].val;
                    let mut t = [0.0; M];
                    shape.mul_into(&mut t[..n], &cv[..n], &r[..n]);
                    for v in t[..n].iter_mut() {
                        *v = -*v;
                    }
                    shape.mul_adjoint_into(&mut bar[q as usize][..n], &b[..n], &t[..n]);
                }
                Op::Neg(p) => axpy(&mut bar[p as usize][..n], -1.0, &b[..n]),
                Op::Scale(p, s) => axpy(&mut bar[p as usize][..n], s, &b[..n]),
                Op::AddC(p) => axpy(&mut bar[p as usize][..n], 1.0, &b[..n]),
                Op::Unary(kind, p) => {
                    let pv = nodes[p as usize].val;
                    let mut d = [0.0; MAX_ORDER + 2];
                    kind.derivs(pv[0], k + 1, &mut d);
                    // jet of f'(p)
                    let fp = shape.compose(&pv, &d[1..=k + 1]);
                    shape.mul_adjoint_into(&mut bar[p as usize][..n], &b[..n], &fp[..n]);
                }
                Op::Powi(p, m) => {
                    let pv = nodes[p as usize].val;
                    let mut g = self.jet_powi(&pv, m - 1);
                    for v in g[..n].iter_mut() {
                        *v *= m as f64;
                    }
                    shape.mul_adjoint_into(&mut bar[p as usize][..n], &b[..n], &g[..n]);
                }
                Op::Dot { a, b: bb, len } => {
                    for j in 0..len {
                        let pi = aux[(a + j) as usize] as usize;
                        let qi = aux[(bb + j) as usize] as usize;
                        let (pv, qv) = (nodes[pi].val, nodes[qi].val);
                        shape.mul_adjoint_into(&mut bar[pi][..n], &b[..n], &qv[..n]);
                        shape.mul_adjoint_into(&mut bar[qi][..n], &b[..n], &pv[..n]);
                    }
                }
                Op::Extract(p, slot) => {
                    bar[p as usize][slot as usize] += b[0];
                }
            }
        }
        Adjoints { bar }
    }
}

fn axpy(dst: &mut [f64], a: f64, src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += a * s;
    }
}

pub struct Adjoints<const M: usize> {
    bar: Vec<[f64; M]>,
}

impl<const M: usize> Adjoints<M> {
    /// d(root)/d(value of `v`).
    pub fn grad<'t>(&self, v: Var<'t, M>) -> f64 {
        self.bar[v.idx as usize][0]
    }
}

impl<'t, const M: usize> Var<'t, M> {
    pub fn value(self) -> f64 {
        self.tape.val(self.idx)[0]
    }

    pub fn jet(self) -> [f64; M] {
        self.tape.val(self.idx)
    }

    pub fn tape(self) -> &'t Tape<M> {
        self.tape
    }

    pub fn scale(self, s: f64) -> Var<'t, M> {
        let mut val = self.tape.val(self.idx);
        for v in val.iter_mut() {
            *v *= s;
        }
        self.tape.push(Op::Scale(self.idx, s), val)
    }

    pub fn exp(self) -> Var<'t, M> {
        self.tape.unary(UnaryKind::Exp, self)
    }

    pub fn ln(self) -> Var<'t, M> {
        self.tape.unary(UnaryKind::Ln, self)
    }

    pub fn sin(self) -> Var<'t, M> {
        self.tape.unary(UnaryKind::Sin, self)
    }

    pub fn cos(self) -> Var<'t, M> {
        self.tape.unary(UnaryKind::Cos, self)
    }

    pub fn tanh(self) -> Var<'t, M> {
        self.tape.unary(UnaryKind::Tanh, self)
    }

    pub fn sqrt(self) -> Var<'t, M> {
        self.tape.unary(UnaryKind::Sqrt, self)
    }

    pub fn recip(self) -> Var<'t, M> {
        self.tape.unary(UnaryKind::Recip, self)
    }

    pub fn relu(self) -> Var<'t, M> {
        self.tape.unary(UnaryKind::Relu, self)
    }

    /// max(0, x)^2 — C1 smooth, the activation used wherever second
    /// derivatives of the field are needed.
    pub fn relu_sq(self) -> Var<'t, M> {
        self.tape.unary(UnaryKind::ReluSq, self)
    }

    /// sin(pi x / 2)
    pub fn sin_half_pi(self) -> Var<'t, M> {
        self.scale(std::f64::consts::FRAC_PI_2).sin()
    }

    pub fn powi(self, n: i32) -> Var<'t, M> {
        match n {
            0 => self.tape.constant(1.0),
            1 => self,
            _ if n < 0 => self.powi(-n).recip(),
            _ => {
                let val = self.tape.jet_powi(&self.tape.val(self.idx), n as u32);
                self.tape.push(Op::Powi(self.idx, n as u32), val)
            }
        }
    }

    pub fn powf(self, p: f64) -> Var<'t, M> {
        (self.ln().scale(p)).exp()
    }

    pub fn square(self) -> Var<'t, M> {
        self.powi(2)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:ident, $combine:expr) => {
        impl<'t, const M: usize> std::ops::$trait for Var<'t, M> {
            type Output = Var<'t, M>;
            fn $method(self, rhs: Var<'t, M>) -> Var<'t, M> {
                let t = self.tape;
                let n = t.shape.len();
                let (av, bv) = (t.val(self.idx), t.val(rhs.idx));
                #[allow(clippy::redundant_closure_call)]
                let val = ($combine)(t, n, &av, &bv);
                t.push(Op::$op(self.idx, rhs.idx), val)
            }
        }
    };
}

binop!(Add, add, Add, |_t: &Tape<M>, n: usize, a: &[f64; M], b: &[f64; M]| {
    let mut v = *a;
    for i in 0..n {
        v[i] += b[i];
    }
    v
});
binop!(Sub, sub, Sub, |_t: &Tape<M>, n: usize, a: &[f64; M], b: &[f64; M]| {
    let mut v = *a;
    for i in 0..n {
        v[i] -= b[i];
    }
    v
});
binop!(Mul, mul, Mul, |t: &Tape<M>, n: usize, a: &[f64; M], b: &[f64; M]| {
    let mut v = [0.0; M];
    t.shape.mul_into(&mut v[..n], &a[..n], &b[..n]);
    v
});
binop!(Div, div, Div, |t: &Tape<M>, n: usize, a: &[f64; M], b: &[f64; M]| {
    let k = t.shape.order();
    let mut d = [0.0; MAX_ORDER + 2];
    UnaryKind::Recip.derivs(b[0], k, &mut d);
    let r = t.shape.compose(b, &d[..=k]);
    let mut v = [0.0; M];
    t.shape.mul_into(&mut v[..n], &a[..n], &r[..n]);
    v
});

impl<'t, const M: usize> std::ops::Neg for Var<'t, M> {
    type Output = Var<'t, M>;
    fn neg(self) -> Var<'t, M> {
        let mut val = self.tape.val(self.idx);
        for v in val.iter_mut() {
            *v = -*v;
        }
        self.tape.push(Op::Neg(self.idx), val)
    }
}

impl<'t, const M: usize> std::ops::Add<f64> for Var<'t, M> {
    type Output = Var<'t, M>;
    fn add(self, c: f64) -> Var<'t, M> {
        let mut val = self.tape.val(self.idx);
        val[0] += c;
        self.tape.push(Op::AddC(self.idx), val)
    }
}

impl<'t, const M: usize> std::ops::Sub<f64> for Var<'t, M> {
    type Output = Var<'t, M>;
    fn sub(self, c: f64) -> Var<'t, M> {
        self + (-c)
    }
}

impl<'t, const M: usize> std::ops::Mul<f64> for Var<'t, M> {
    type Output = Var<'t, M>;
    fn mul(self, c: f64) -> Var<'t, M> {
        self.scale(c)
    }
}

impl<'t, const M: usize> std::ops::Div<f64> for Var<'t, M> {
    type Output = Var<'t, M>;
    fn div(self, c: f64) -> Var<'t, M> {
        self.scale(1.0 / c)
    }
}

impl<'t, const M: usize> std::ops::Add<Var<'t, M>> for f64 {
    type Output = Var<'t, M>;
    fn add(self, v: Var<'t, M>) -> Var<'t, M> {
        v + self
    }
}

impl<'t, const M: usize> std::ops::Sub<Var<'t, M>> for f64 {
    type Output = Var<'t, M>;
    fn sub(self, v: Var<'t, M>) -> Var<'t, M> {
        -v + self
    }
}

impl<'t, const M: usize> std::ops::Mul<Var<'t, M>> for f64 {
    type Output = Var<'t, M>;
    fn mul(self, v: Var<'t, M>) -> Var<'t, M> {
        v.scale(self)
    }
}

impl<'t, const M: usize> std::ops::Div<Var<'t, M>> for f64 {
    type Output = Var<'t, M>;
    fn div(self, v: Var<'t, M>) -> Var<'t, M> {
        v.recip().scale(self)
    }
}
