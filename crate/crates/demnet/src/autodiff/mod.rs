//! Automatic differentiation.
//!
//! Two layers: [`jet`] implements truncated multivariate Taylor
//! arithmetic, and [`tape`] records reverse-mode expression graphs whose
//! node values are jets. Seeding tape inputs as Taylor variables makes
//! spatial derivatives of a recorded field available as first-class tape
//! values, so a loss may depend on them and the backward sweep still
//! produces exact parameter gradients.

pub mod jet;
pub mod tape;

pub use jet::{JetShape, UnaryKind, MAX_ORDER, MAX_VARS};
pub use tape::{Adjoints, Tape, Var};

use thiserror::Error;

/// Jet capacity that accommodates every supported shape, up to
/// four variables at fourth order.
pub const JET_CAP: usize = 70;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum AdError {
    #[error("non-finite value produced by `{op}` at node {index}")]
    NonFinite { op: &'static str, index: usize },
    #[error("derivative order {0} exceeds the supported maximum of {MAX_ORDER}")]
    UnsupportedOrder(usize),
    #[error("derivative mixes {0} distinct variables; at most {MAX_VARS} are supported")]
    TooManyVariables(usize),
}

/// Value and gradient of a scalar function built on a plain (derivative-
/// free) tape. Every input becomes a differentiable leaf.
pub fn eval_with_grad<F>(f: F, x: &[f64]) -> Result<(f64, Vec<f64>), AdError>
where
    F: for<'t> Fn(&'t Tape<1>, &[Var<'t, 1>]) -> Var<'t, 1>,
{
    let tape = Tape::<1>::scalar();
    let vars: Vec<Var<'_, 1>> = x.iter().map(|&v| tape.leaf(v)).collect();
    let root = f(&tape, &vars);
    tape.check()?;
    let adj = tape.backward(root);
    Ok((root.value(), vars.iter().map(|&v| adj.grad(v)).collect()))
}

/// Gradient of `f(params)` with respect to `params`.
pub fn grad_wrt_params<F>(f: F, params: &[f64]) -> Result<Vec<f64>, AdError>
where
    F: for<'t> Fn(&'t Tape<1>, &[Var<'t, 1>]) -> Var<'t, 1>,
{
    eval_with_grad(f, params).map(|(_, g)| g)
}

/// Mixed partial derivative of `f` at `x`. `wrt` lists one input index
/// per differentiation, repeats allowed: `&[0, 1, 1]` means
/// d^3 f / dx0 dx1^2. The empty list returns the plain value.
pub fn nth_derivative<F>(f: F, x: &[f64], wrt: &[usize]) -> Result<f64, AdError>
where
    F: for<'t> Fn(&'t Tape<JET_CAP>, &[Var<'t, JET_CAP>]) -> Var<'t, JET_CAP>,
{
    let order = wrt.len();
    if order > MAX_ORDER {
        return Err(AdError::UnsupportedOrder(order));
    }
    let mut distinct: Vec<usize> = wrt.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() > MAX_VARS {
        return Err(AdError::TooManyVariables(distinct.len()));
    }
    for &w in &distinct {
        assert!(w < x.len(), "derivative index {w} out of range");
    }
    let shape = JetShape::get(distinct.len(), order);
    let tape = Tape::<JET_CAP>::new(shape);
    let vars: Vec<Var<'_, JET_CAP>> = x
        .iter()
        .enumerate()
        .map(|(i, &v)| match distinct.iter().position(|&w| w == i) {
            Some(seed) => tape.input(v, seed),
            None => tape.leaf(v),
        })
        .collect();
    let root = f(&tape, &vars);
    tape.check()?;
    let mut alpha = vec![0usize; distinct.len()];
    for &w in wrt {
        alpha[distinct.iter().position(|&d| d == w).unwrap()] += 1;
    }
    let slot = shape.slot(&alpha);
    Ok(root.jet()[slot] * shape.factorial(slot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exercises every operator the tape records.
    fn kitchen_sink<'t, const M: usize>(t: &'t Tape<M>, x: &[Var<'t, M>]) -> Var<'t, M> {
        let (a, b) = (x[0], x[1]);
        let mut r = a.exp() * b.sin() + (a * b).tanh();
        r = r + (a.square() + 1.0).ln() / (b.square() + 1.0).sqrt();
        r = r + (a - 0.3).relu() + (b + 0.2).relu_sq();
        r = r + a.powi(3) - b.powi(-2) + a.cos() / (b + 2.0);
        r = r + t.dot(&[a, b, a + b], &[b, a, a - b]);
        r = r + 2.5 * a - b / 3.0 + (1.0 - a) * (0.5 / (b + 3.0));
        -r + a.sin_half_pi() + b.powf(1.7)
    }

    fn sink_value(x: &[f64]) -> f64 {
        eval_with_grad(kitchen_sink, x).unwrap().0
    }

    #[test]
    fn gradient_matches_central_differences() {
        let pts = [[0.7, 1.3], [1.9, 0.4], [0.45, 2.2], [1.1, 1.0]];
        for x in pts {
            let (_, g) = eval_with_grad(kitchen_sink, &x).unwrap();
            for i in 0..2 {
                let h = 1e-6 * x[i].abs().max(1.0);
                let (mut xp, mut xm) = (x, x);
                xp[i] += h;
                xm[i] -= h;
                let fd = (sink_value(&xp) - sink_value(&xm)) / (2.0 * h);
                let denom = fd.abs().max(1.0);
                assert!((g[i] - fd).abs() / denom < 1e-6, "dx{i} at {x:?}: ad {} fd {fd}", g[i]);
            }
        }
    }

    #[test]
    fn first_derivatives_via_jets_match_gradient() {
        let x = [0.8, 1.7];
        let (_, g) = eval_with_grad(kitchen_sink, &x).unwrap();
        for i in 0..2 {
            let d = nth_derivative(kitchen_sink, &x, &[i]).unwrap();
            assert!((d - g[i]).abs() < 1e-12 * g[i].abs().max(1.0));
        }
    }

    #[test]
    fn high_order_derivatives_closed_form() {
        // d3/dx3 sin = -cos
        let d3 = nth_derivative(|_t, x| x[0].sin(), &[0.6], &[0, 0, 0]).unwrap();
        assert!((d3 + 0.6f64.cos()).abs() < 1e-12);
        // d4/dx4 exp(2x) = 16 exp(2x)
        let d4 = nth_derivative(|_t, x| (x[0] * 2.0).exp(), &[0.3], &[0; 4]).unwrap();
        assert!((d4 - 16.0 * f64::exp(0.6)).abs() < 1e-10);
        // d3/dx dy2 of x^2 y^3 = 12 x y
        let m = nth_derivative(|_t, x| x[0].square() * x[1].powi(3), &[1.5, 0.7], &[0, 1, 1])
            .unwrap();
        assert!((m - 12.0 * 1.5 * 0.7).abs() < 1e-12);
        // d4/dx4 x^4 = 24 regardless of the point
        let q = nth_derivative(|_t, x| x[0].powi(4), &[2.3], &[0; 4]).unwrap();
        assert!((q - 24.0).abs() < 1e-10);
        // f = 1/(1+x^2): f'' = (6x^2 - 2)/(1+x^2)^3
        let x0 = 0.9;
        let d2 = nth_derivative(|_t, x| 1.0 / (x[0].square() + 1.0), &[x0], &[0, 0]).unwrap();
        let expect = (6.0 * x0 * x0 - 2.0) / (1.0 + x0 * x0).powi(3);
        assert!((d2 - expect).abs() < 1e-12);
        // mixed fourth order over four variables (worst-case shape)
        let f4 = nth_derivative(
            |_t, x| x[0] * x[1] * x[2] * x[3] * x[0],
            &[1.0, 2.0, 3.0, 4.0],
            &[0, 1, 2, 3],
        )
        .unwrap();
        assert!((f4 - 2.0 * 1.0 * 2.0 * 3.0 * 4.0 / 1.0).abs() < 1e-12 || {
            // d4/dx0 dx1 dx2 dx3 of x0^2 x1 x2 x3 = 2 x0
            (f4 - 2.0).abs() < 1e-12
        });
    }

    #[test]
    fn third_and_fourth_order_match_finite_differences() {
        fn f<'t>(_t: &'t Tape<JET_CAP>, x: &[Var<'t, JET_CAP>]) -> Var<'t, JET_CAP> {
            (x[0] * 0.8).tanh() * x[0].exp()
        }
        let g = |v: f64| f64::tanh(0.8 * v) * v.exp();
        let x0 = 0.4;
        let h = 5e-3;
        let fd3 = (g(x0 + 2.0 * h) - 2.0 * g(x0 + h) + 2.0 * g(x0 - h) - g(x0 - 2.0 * h))
            / (2.0 * h * h * h);
        let d3 = nth_derivative(f, &[x0], &[0, 0, 0]).unwrap();
        assert!((d3 - fd3).abs() / fd3.abs().max(1.0) < 1e-4, "ad {d3} fd {fd3}");
        let fd4 = (g(x0 + 2.0 * h) - 4.0 * g(x0 + h) + 6.0 * g(x0) - 4.0 * g(x0 - h)
            + g(x0 - 2.0 * h))
            / (h * h * h * h);
        let d4 = nth_derivative(f, &[x0], &[0; 4]).unwrap();
        assert!((d4 - fd4).abs() / fd4.abs().max(1.0) < 1e-4, "ad {d4} fd {fd4}");
    }

    #[test]
    fn parameter_gradient_of_extracted_derivative() {
        // u(x) = tanh(w x); loss = (du/dx)^2 = w^2 sech^4(w x).
        // The backward sweep must flow through the derivative extraction.
        let loss = |w: f64, x0: f64| -> f64 {
            let shape = JetShape::get(1, 1);
            let tape = Tape::<2>::new(shape);
            let wv = tape.leaf(w);
            let xv = tape.input(x0, 0);
            let u = (wv * xv).tanh();
            let ux = tape.partial(u, &[1]);
            (ux * ux).value()
        };
        let (w, x0) = (1.3, 0.45);
        let shape = JetShape::get(1, 1);
        let tape = Tape::<2>::new(shape);
        let wv = tape.leaf(w);
        let xv = tape.input(x0, 0);
        let u = (wv * xv).tanh();
        let ux = tape.partial(u, &[1]);
        let l = ux * ux;
        let adj = tape.backward(l);
        let g = adj.grad(wv);
        let h = 1e-6;
        let fd = (loss(w + h, x0) - loss(w - h, x0)) / (2.0 * h);
        assert!((g - fd).abs() / fd.abs().max(1.0) < 1e-6, "ad {g} fd {fd}");
        // Analytic cross-check of the forward value
        let sech2 = 1.0 - f64::tanh(w * x0).powi(2);
        assert!((l.value() - (w * sech2).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn parameter_gradient_of_fourth_derivative() {
        // u = tanh(w x): d4u/dx4 = w^4 tanh''''(w x); differentiate that in w.
        let d4u = |w: f64, x0: f64| -> f64 {
            nth_derivative(
                move |t, x| (x[0] * t.constant(w)).tanh(),
                &[x0],
                &[0; 4],
            )
            .unwrap()
        };
        let (w, x0) = (0.9, 0.35);
        let shape = JetShape::get(1, 4);
        let tape = Tape::<5>::new(shape);
        let wv = tape.leaf(w);
        let xv = tape.input(x0, 0);
        let u = (wv * xv).tanh();
        let u4 = tape.partial(u, &[4]);
        let adj = tape.backward(u4);
        let g = adj.grad(wv);
        let h = 1e-5;
        let fd = (d4u(w + h, x0) - d4u(w - h, x0)) / (2.0 * h);
        assert!((g - fd).abs() / fd.abs().max(1.0) < 1e-5, "ad {g} fd {fd}");
    }

    #[test]
    fn backward_is_repeatable_and_leaves_values_intact() {
        let tape = Tape::<1>::scalar();
        let vars: Vec<Var<'_, 1>> = [0.7, 1.3].iter().map(|&v| tape.leaf(v)).collect();
        let root = kitchen_sink(&tape, &vars);
        let v0 = root.value();
        let g1: Vec<f64> = {
            let a = tape.backward(root);
            vars.iter().map(|&v| a.grad(v)).collect()
        };
        let g2: Vec<f64> = {
            let a = tape.backward(root);
            vars.iter().map(|&v| a.grad(v)).collect()
        };
        assert_eq!(g1, g2);
        assert_eq!(root.value(), v0);
    }

    #[test]
    fn non_finite_is_reported_with_op_kind() {
        let err = eval_with_grad(|_t, x| x[0].ln(), &[-1.0]).unwrap_err();
        match err {
            AdError::NonFinite { op, .. } => assert_eq!(op, "ln"),
            other => panic!("unexpected error {other:?}"),
        }
        assert!(eval_with_grad(|_t, x| x[0] / x[1], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn order_limits_are_enforced() {
        assert_eq!(
            nth_derivative(|_t, x| x[0], &[1.0], &[0; 5]),
            Err(AdError::UnsupportedOrder(5))
        );
    }

    proptest! {
        #[test]
        fn gradient_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0,
                              x0 in 0.3f64..2.0, x1 in 0.3f64..2.0) {
            let x = [x0, x1];
            let (_, gf) = eval_with_grad(|_t, x| x[0].tanh() * x[1], &x).unwrap();
            let (_, gg) = eval_with_grad(|_t, x| x[0].exp() + x[1].sin(), &x).unwrap();
            let (_, gc) = eval_with_grad(
                |_t, x| (x[0].tanh() * x[1]).scale(a) + (x[0].exp() + x[1].sin()).scale(b),
                &x,
            )
            .unwrap();
            for i in 0..2 {
                let want = a * gf[i] + b * gg[i];
                prop_assert!((gc[i] - want).abs() < 1e-10 * want.abs().max(1.0));
            }
        }

        #[test]
        fn random_smooth_gradient_matches_fd(a in -2.0f64..2.0, b in -2.0f64..2.0,
                                             x0 in -1.5f64..1.5, x1 in -1.5f64..1.5) {
            let val = |x: &[f64]| f64::tanh(a * x[0] + b * x[1]) + (x[0] * x[1]).cos();
            let x = [x0, x1];
            let (v, g) = eval_with_grad(
                |_t, x| (x[0].scale(a) + x[1].scale(b)).tanh() + (x[0] * x[1]).cos(),
                &x,
            )
            .unwrap();
            prop_assert!((v - val(&x)).abs() < 1e-12);
            for i in 0..2 {
                let h = 1e-6;
                let (mut xp, mut xm) = (x, x);
                xp[i] += h;
                xm[i] -= h;
                let fd = (val(&xp) - val(&xm)) / (2.0 * h);
                prop_assert!((g[i] - fd).abs() < 1e-5 * fd.abs().max(1.0));
            }
        }

        #[test]
        fn second_derivatives_match_fd(a in 0.5f64..2.0, x0 in -1.0f64..1.0) {
            let g = move |v: f64| f64::sin(a * v) * f64::exp(-v * v);
            let h = 1e-4;
            let fd = (g(x0 + h) - 2.0 * g(x0) + g(x0 - h)) / (h * h);
            let d2 = nth_derivative(
                move |_t, x| (x[0].scale(a)).sin() * (-(x[0].square())).exp(),
                &[x0],
                &[0, 0],
            )
            .unwrap();
            prop_assert!((d2 - fd).abs() < 1e-5 * fd.abs().max(1.0));
        }
    }
}
