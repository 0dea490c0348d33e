//! Matérn-5/2 ARD kernel on warped inputs and the exact marginal likelihood.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transforms::{clamp_unit, warp_partials, warp_scalar, InputWarp};

/// Lower bound on the noise variance after exponentiation.
pub const NOISE_FLOOR: f64 = 1e-6;

const SQRT5: f64 = 2.236_067_977_499_79;
const JITTER: [f64; 3] = [1e-8, 1e-6, 1e-4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub log_lengthscales: Vec<f64>,
    pub log_signal_variance: f64,
    pub log_noise_variance: f64,
}

impl KernelParams {
    pub fn new(lengthscales: &[f64], signal_variance: f64, noise_variance: f64) -> Self {
        KernelParams {
            log_lengthscales: lengthscales.iter().map(|l| l.ln()).collect(),
            log_signal_variance: signal_variance.ln(),
            log_noise_variance: noise_variance.ln(),
        }
    }

    pub fn dim(&self) -> usize {
        self.log_lengthscales.len()
    }

    pub fn signal_variance(&self) -> f64 {
        self.log_signal_variance.exp()
    }

    pub fn noise_variance(&self) -> f64 {
        self.log_noise_variance.exp().max(NOISE_FLOOR)
    }

    pub fn lengthscales(&self) -> Vec<f64> {
        self.log_lengthscales.iter().map(|v| v.exp()).collect()
    }
}

/// Row-major `n x d` block of warped coordinates.
pub(crate) struct Warped {
    pub n: usize,
    pub d: usize,
    pub w: Vec<f64>,
}

impl Warped {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.w[i * self.d..(i + 1) * self.d]
    }
}

/// Warped coordinates of encoded points. With a warp, inputs are clamped into
/// the open cube first; without one they pass through unchanged.
pub(crate) fn warp_rows(x: &[Vec<f64>], d: usize, warp: Option<&InputWarp>) -> Result<Warped> {
    let mut w = Vec::with_capacity(x.len() * d);
    for row in x {
        if row.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: row.len() });
        }
        push_warped(row, warp, &mut w);
    }
    Ok(Warped { n: x.len(), d, w })
}

#[inline]
pub(crate) fn push_warped(row: &[f64], warp: Option<&InputWarp>, out: &mut Vec<f64>) {
    match warp {
        Some(wp) => {
            for (k, &u) in row.iter().enumerate() {
                out.push(warp_scalar(clamp_unit(u), wp.a()[k], wp.b()[k]));
            }
        }
        None => out.extend_from_slice(row),
    }
}

#[inline]
fn matern(r: f64, s2: f64) -> f64 {
    let sr = SQRT5 * r;
    s2 * (1.0 + sr + sr * sr / 3.0) * (-sr).exp()
}

/// Kernel value between two warped points, with `inv_l2 = 1 / lengthscale^2`.
#[inline]
pub(crate) fn k_pair(a: &[f64], b: &[f64], inv_l2: &[f64], s2: f64) -> f64 {
    let r2: f64 = a.iter().zip(b).zip(inv_l2).map(|((x, y), il)| (x - y) * (x - y) * il).sum();
    matern(r2.sqrt(), s2)
}

/// Cross-covariance between encoded point sets `x` (n rows) and `z` (m rows).
pub fn kernel_eval(params: &KernelParams, warp: Option<&InputWarp>, x: &[Vec<f64>], z: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let d = params.dim();
    if let Some(wp) = warp {
        if wp.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: wp.dim() });
        }
    }
    let wx = warp_rows(x, d, warp)?;
    let wz = warp_rows(z, d, warp)?;
    let inv_l2: Vec<f64> = params.log_lengthscales.iter().map(|l| (-2.0 * l).exp()).collect();
    let s2 = params.signal_variance();
    Ok(DMatrix::from_fn(wx.n, wz.n, |i, j| k_pair(wx.row(i), wz.row(j), &inv_l2, s2)))
}

pub(crate) fn add_diagonal(m: &mut DMatrix<f64>, v: f64) {
    for i in 0..m.nrows().min(m.ncols()) {
        m[(i, i)] += v;
    }
}

/// Cholesky factor of `k`, retrying with escalating diagonal jitter.
pub(crate) fn robust_cholesky(k: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    if let Some(c) = Cholesky::new(k.clone()) {
        return Ok(c);
    }
    for j in JITTER {
        let mut kj = k.clone();
        add_diagonal(&mut kj, j);
        if let Some(c) = Cholesky::new(kj) {
            return Ok(c);
        }
    }
    Err(Error::IllConditioned)
}

/// Noisy Gram matrix of warped training points.
pub(crate) fn gram(w: &Warped, params: &KernelParams) -> DMatrix<f64> {
    let inv_l2: Vec<f64> = params.log_lengthscales.iter().map(|l| (-2.0 * l).exp()).collect();
    let s2 = params.signal_variance();
    let mut k = DMatrix::zeros(w.n, w.n);
    for i in 0..w.n {
        k[(i, i)] = s2;
        for j in 0..i {
            let v = k_pair(w.row(i), w.row(j), &inv_l2, s2);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    add_diagonal(&mut k, params.noise_variance());
    k
}

/// Negative log marginal likelihood of `t` and its gradient with respect to
/// `[log l_1..d, log s2, log noise, log a_1..d, log b_1..d]`; the warp block is
/// present only when `warp` is given.
pub fn neg_log_marginal_likelihood(
    params: &KernelParams,
    warp: Option<&InputWarp>,
    x: &[Vec<f64>],
    t: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let d = params.dim();
    let n = x.len();
    if t.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: t.len() });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("no training points".into()));
    }
    if let Some(wp) = warp {
        if wp.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: wp.dim() });
        }
    }
    let w = warp_rows(x, d, warp)?;
    let k = gram(&w, params);
    let chol = robust_cholesky(&k)?;
    let alpha = chol.solve(&DVector::from_column_slice(t));
    let log_det: f64 = chol.l_dirty().diagonal().iter().take(n).map(|v| v.ln()).sum();
    let value = 0.5 * alpha.dot(&DVector::from_column_slice(t)) + log_det + 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();

    // W = K^-1 - alpha alpha^T; dNLML/dp = 1/2 tr(W dK/dp)
    let mut wm = chol.inverse();
    for j in 0..n {
        for i in 0..n {
            wm[(i, j)] -= alpha[i] * alpha[j];
        }
    }

    let inv_l2: Vec<f64> = params.log_lengthscales.iter().map(|l| (-2.0 * l).exp()).collect();
    let s2 = params.signal_variance();
    let mut g_len = vec![0.0; d];
    let mut g_s2 = 0.0;
    // sum_j W_ij dK_ij/dw_ik, accumulated per (i, k)
    let mut g_w = if warp.is_some() { vec![0.0; n * d] } else { Vec::new() };
    let mut delta = vec![0.0; d];
    for i in 0..n {
        g_s2 += 0.5 * wm[(i, i)] * s2;
        let wi = w.row(i);
        for j in 0..i {
            let wj = w.row(j);
            let mut r2 = 0.0;
            for kk in 0..d {
                delta[kk] = wi[kk] - wj[kk];
                r2 += delta[kk] * delta[kk] * inv_l2[kk];
            }
            let sr = SQRT5 * r2.sqrt();
            let e = (-sr).exp();
            let kij = s2 * (1.0 + sr + sr * sr / 3.0) * e;
            let g = s2 * (5.0 / 3.0) * (1.0 + sr) * e;
            let wij = wm[(i, j)];
            // each off-diagonal pair appears twice in the trace
            g_s2 += wij * kij;
            for kk in 0..d {
                g_len[kk] += wij * g * delta[kk] * delta[kk] * inv_l2[kk];
            }
            if warp.is_some() {
                for kk in 0..d {
                    let dk = -g * delta[kk] * inv_l2[kk] * wij;
                    g_w[i * d + kk] += dk;
                    g_w[j * d + kk] -= dk;
                }
            }
        }
    }
    let noise = params.noise_variance();
    let noise_grad = if params.log_noise_variance.exp() >= NOISE_FLOOR {
        0.5 * noise * (0..n).map(|i| wm[(i, i)]).sum::<f64>()
    } else {
        0.0
    };

    let mut grad = g_len;
    grad.push(g_s2);
    grad.push(noise_grad);
    if let Some(wp) = warp {
        let mut ga = vec![0.0; d];
        let mut gb = vec![0.0; d];
        for (i, row) in x.iter().enumerate() {
            for kk in 0..d {
                let (da, db) = warp_partials(clamp_unit(row[kk]), wp.a()[kk], wp.b()[kk]);
                ga[kk] += da * g_w[i * d + kk];
                gb[kk] += db * g_w[i * d + kk];
            }
        }
        grad.extend(ga.iter().zip(wp.a()).map(|(g, a)| g * a));
        grad.extend(gb.iter().zip(wp.b()).map(|(g, b)| g * b));
    }
    Ok((value, grad))
}
