//! Kumaraswamy CDF input warping, `w = 1 - (1 - u^a)^b` per dimension.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs are clamped to `[WARP_CLAMP, 1 - WARP_CLAMP]` wherever derivatives are needed.
pub const WARP_CLAMP: f64 = 1e-6;

/// Per-dimension warp shape parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputWarp {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl InputWarp {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
        }
        if let Some(v) = a.iter().chain(&b).find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidArgument(format!("warp parameters must be positive, got {v}")));
        }
        Ok(InputWarp { a, b })
    }

    pub fn identity(d: usize) -> Self {
        InputWarp { a: vec![1.0; d], b: vec![1.0; d] }
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    fn check(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: u.len() });
        }
        Ok(())
    }
}

#[inline]
pub fn clamp_unit(u: f64) -> f64 {
    u.clamp(WARP_CLAMP, 1.0 - WARP_CLAMP)
}

#[inline]
pub(crate) fn warp_scalar(u: f64, a: f64, b: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    if a == 1.0 && b == 1.0 {
        return u;
    }
    let ua = (a * u.ln()).exp();
    -(b * (-ua).ln_1p()).exp_m1()
}

/// `(dw/da, dw/db)` at an interior point.
#[inline]
pub(crate) fn warp_partials(u: f64, a: f64, b: f64) -> (f64, f64) {
    let ln_u = u.ln();
    let ua = (a * ln_u).exp();
    let ln_1m = (-ua).ln_1p();
    let one_minus_pow_b = (b * ln_1m).exp();
    let d_a = b * one_minus_pow_b / (1.0 - ua) * ua * ln_u;
    let d_b = -one_minus_pow_b * ln_1m;
    (d_a, d_b)
}

/// Warp a point of the unit cube. Endpoints map to themselves.
pub fn kumaraswamy_warp(u: &[f64], warp: &InputWarp) -> Result<Vec<f64>> {
    warp.check(u)?;
    if let Some(v) = u.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Domain(format!("warp input {v} outside [0, 1]")));
    }
    Ok(u.iter().zip(warp.a.iter().zip(&warp.b)).map(|(&x, (&a, &b))| warp_scalar(x, a, b)).collect())
}

/// Partial derivatives of each warped coordinate with respect to its own `a_k` and `b_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpGrad {
    pub d_a: Vec<f64>,
    pub d_b: Vec<f64>,
}

/// Analytic warp derivatives, evaluated after clamping `u` into the open cube.
pub fn kumaraswamy_grad(u: &[f64], warp: &InputWarp) -> Result<WarpGrad> {
    warp.check(u)?;
    let (d_a, d_b) = u
        .iter()
        .zip(warp.a.iter().zip(&warp.b))
        .map(|(&x, (&a, &b))| warp_partials(clamp_unit(x), a, b))
        .unzip();
    Ok(WarpGrad { d_a, d_b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;
    use rand::Rng;

    #[test]
    fn unit_parameters_are_identity() {
        let w = InputWarp::identity(3);
        let u = [0.1, 0.5, 0.93];
        let out = kumaraswamy_warp(&u, &w).unwrap();
        for (a, b) in u.iter().zip(&out) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn endpoints_are_fixed() {
        let w = InputWarp::new(vec![0.3, 7.0], vec![4.0, 0.2]).unwrap();
        assert_eq!(kumaraswamy_warp(&[0.0, 0.0], &w).unwrap(), vec![0.0, 0.0]);
        assert_eq!(kumaraswamy_warp(&[1.0, 1.0], &w).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn direct_evaluation() {
        let w = InputWarp::new(vec![2.0], vec![3.0]).unwrap();
        // 1 - (1 - 0.25)^3
        assert!((kumaraswamy_warp(&[0.5], &w).unwrap()[0] - 0.578125).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(InputWarp::new(vec![1.0], vec![0.0]).is_err());
        assert!(InputWarp::new(vec![1.0, 1.0], vec![1.0]).is_err());
        let w = InputWarp::identity(2);
        assert!(matches!(kumaraswamy_warp(&[0.5], &w), Err(Error::DimensionMismatch { .. })));
        assert!(kumaraswamy_grad(&[0.5, 0.5, 0.5], &w).is_err());
    }

    #[test]
    fn gradient_closed_forms_at_unit_parameters() {
        let w = InputWarp::identity(1);
        let g = kumaraswamy_grad(&[0.5], &w).unwrap();
        // dw/db = -(1-u) ln(1-u); dw/da = u ln u when a = b = 1
        assert!((g.d_b[0] - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert!((g.d_b[0] - 0.346_573_590_279_972_6).abs() < 1e-15);
        assert!((g.d_a[0] - 0.5 * 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = rng_from(21, &[]);
        for _ in 0..200 {
            let u: f64 = rng.random_range(0.01..0.99);
            let a: f64 = rng.random_range(0.2..5.0);
            let b: f64 = rng.random_range(0.2..5.0);
            let (da, db) = warp_partials(u, a, b);
            let h = 1e-6;
            let fd_a = (warp_scalar(u, a + h, b) - warp_scalar(u, a - h, b)) / (2.0 * h);
            let fd_b = (warp_scalar(u, a, b + h) - warp_scalar(u, a, b - h)) / (2.0 * h);
            let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1e-3);
            assert!(rel(da, fd_a) < 1e-6, "d/da {da} vs {fd_a} at u={u} a={a} b={b}");
            assert!(rel(db, fd_b) < 1e-6, "d/db {db} vs {fd_b} at u={u} a={a} b={b}");
        }
    }

    #[test]
    fn symmetric_parameters_give_finite_gradients() {
        for s in [0.1, 1.0, 10.0] {
            let g = kumaraswamy_grad(&[0.5], &InputWarp::new(vec![s], vec![s]).unwrap()).unwrap();
            assert!(g.d_a[0].is_finite() && g.d_b[0].is_finite());
        }
        // clamping keeps the boundary finite as well
        let g = kumaraswamy_grad(&[0.0, 1.0], &InputWarp::new(vec![0.5, 3.0], vec![2.0, 0.5]).unwrap()).unwrap();
        assert!(g.d_a.iter().chain(&g.d_b).all(|v| v.is_finite()));
    }

    #[test]
    fn warp_is_strictly_increasing() {
        let mut rng = rng_from(4, &[]);
        for _ in 0..20 {
            let a: f64 = rng.random_range(0.1..10.0);
            let b: f64 = rng.random_range(0.1..10.0);
            let grid: Vec<f64> = (1..1000).map(|i| i as f64 / 1000.0).collect();
            let w: Vec<f64> = grid.iter().map(|&u| warp_scalar(u, a, b)).collect();
            assert!(w.windows(2).all(|p| p[0] <= p[1]), "a={a} b={b}");
            assert!(w.iter().all(|v| (0.0..=1.0).contains(v)));
        }
        // well inside the saturation range the map is strictly increasing
        let w: Vec<f64> = (1..1000).map(|i| warp_scalar(i as f64 / 1000.0, 0.7, 1.8)).collect();
        assert!(w.windows(2).all(|p| p[0] < p[1]));
    }
}
