//! Error metrics and numerical-verification utilities shared by all
//! benchmarks.

use serde::Serialize;

use crate::autodiff::{self, AdError, Tape, Var, JET_CAP, MAX_ORDER};

/// Error summary embedded in a run's summary JSON.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ErrorReport {
    /// (component name, relative L2 error) pairs.
    pub rel_l2: Vec<(String, f64)>,
    pub energy_rel_error: Option<f64>,
    pub h1_seminorm: Option<f64>,
    /// Named probe values (e.g. a center deflection).
    pub probes: Vec<(String, f64)>,
}

/// sqrt(sum (exact - predicted)^2) / sqrt(sum exact^2) over aligned
/// sample sets.
pub fn relative_l2(predicted: &[f64], exact: &[f64]) -> f64 {
    assert_eq!(predicted.len(), exact.len());
    let num: f64 = predicted.iter().zip(exact).map(|(p, e)| (e - p) * (e - p)).sum();
    let den: f64 = exact.iter().map(|e| e * e).sum();
    assert!(den > 0.0, "relative L2 undefined: exact field is identically zero");
    (num / den).sqrt()
}

/// sqrt(sum_i w_i ||grad u(x_i)||^2); `grads` holds the gradient
/// components (all field components concatenated) per point.
pub fn h1_seminorm(grads: &[Vec<f64>], weights: &[f64]) -> f64 {
    assert_eq!(grads.len(), weights.len());
    grads
        .iter()
        .zip(weights)
        .map(|(g, w)| w * g.iter().map(|v| v * v).sum::<f64>())
        .sum::<f64>()
        .sqrt()
}

#[derive(Clone, Copy, Debug)]
pub struct FdReport {
    pub autodiff: f64,
    pub finite_difference: f64,
    pub rel_discrepancy: f64,
}

/// Compares the tape derivative of `f` against an iterated central
/// difference. `wrt` lists one input index per differentiation.
pub fn fd_check<F>(f: F, x: &[f64], wrt: &[usize]) -> Result<FdReport, AdError>
where
    F: for<'t> Fn(&'t Tape<JET_CAP>, &[Var<'t, JET_CAP>]) -> Var<'t, JET_CAP> + Copy,
{
    if wrt.len() > MAX_ORDER {
        return Err(AdError::UnsupportedOrder(wrt.len()));
    }
    let ad = autodiff::nth_derivative(f, x, wrt)?;
    // step balances truncation vs roundoff for the iterated stencil
    let h = 1e-2f64.max(f64::EPSILON.powf(1.0 / (wrt.len() as f64 + 2.0)));
    let value = |x: &[f64]| -> f64 {
        let tape = Tape::<JET_CAP>::scalar();
        let vars: Vec<Var<'_, JET_CAP>> = x.iter().map(|&v| tape.leaf(v)).collect();
        f(&tape, &vars).value()
    };
    fn central(
        value: &dyn Fn(&[f64]) -> f64,
        x: &[f64],
        wrt: &[usize],
        h: f64,
    ) -> f64 {
        match wrt.split_first() {
            None => value(x),
            Some((&i, rest)) => {
                let mut xp = x.to_vec();
                xp[i] += h;
                let mut xm = x.to_vec();
                xm[i] -= h;
                (central(value, &xp, rest, h) - central(value, &xm, rest, h)) / (2.0 * h)
            }
        }
    }
    let fd = central(&value, x, wrt, h);
    let rel = (ad - fd).abs() / ad.abs().max(fd.abs()).max(1.0);
    Ok(FdReport { autodiff: ad, finite_difference: fd, rel_discrepancy: rel })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_l2_examples() {
        let exact = vec![1.0, -2.0, 3.0];
        assert_eq!(relative_l2(&exact, &exact), 0.0);
        assert_eq!(relative_l2(&[0.0, 0.0, 0.0], &exact), 1.0);
        let scaled: Vec<f64> = exact.iter().map(|v| 1.01 * v).collect();
        assert!((relative_l2(&scaled, &exact) - 0.01).abs() < 1e-12);
    }

    #[test]
    fn relative_l2_rescaling_invariance() {
        let exact = vec![0.4, -1.3, 2.2, 0.9];
        let pred = vec![0.38, -1.35, 2.31, 0.88];
        let e1 = relative_l2(&pred, &exact);
        let s = 137.0;
        let pred_s: Vec<f64> = pred.iter().map(|v| s * v).collect();
        let exact_s: Vec<f64> = exact.iter().map(|v| s * v).collect();
        assert!((relative_l2(&pred_s, &exact_s) - e1).abs() < 1e-14);
    }

    #[test]
    fn h1_seminorm_examples() {
        let n = 10_000;
        let w = vec![1.0 / n as f64; n];
        // constant gradient (1, 0, 0) over the unit volume
        let grads = vec![vec![1.0, 0.0, 0.0]; n];
        assert!((h1_seminorm(&grads, &w) - 1.0).abs() < 1e-12);
        let zeros = vec![vec![0.0; 3]; n];
        assert_eq!(h1_seminorm(&zeros, &w), 0.0);
        // u = sin(pi x) on [0,1]: |u|_H1 = pi / sqrt(2)
        let grads: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let x = (i as f64 + 0.5) / n as f64;
                vec![std::f64::consts::PI * (std::f64::consts::PI * x).cos()]
            })
            .collect();
        let want = std::f64::consts::PI / 2f64.sqrt();
        assert!((h1_seminorm(&grads, &w) - want).abs() < 1e-3);
    }

    #[test]
    fn fd_check_examples() {
        // polynomial: both sides essentially exact
        let r = fd_check(|_t, x| x[0].powi(3) * x[1], &[1.2, 0.7], &[0, 0]).unwrap();
        assert!(r.rel_discrepancy <= 1e-10, "poly: {r:?}");
        let r = fd_check(|_t, x| (x[0] * x[1]).tanh(), &[0.8, 0.4], &[0]).unwrap();
        assert!(r.rel_discrepancy <= 1e-5, "tanh: {r:?}");
        let r = fd_check(|_t, x| x[0].sin(), &[0.5], &[0, 0, 0, 0]).unwrap();
        assert!(r.rel_discrepancy <= 1e-3, "sin o4: {r:?}");
        assert!(fd_check(|_t, x| x[0], &[0.0], &[0; 5]).is_err());
    }
}
