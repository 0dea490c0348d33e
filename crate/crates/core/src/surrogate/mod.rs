//! Gaussian-process surrogate on warped inputs and transformed labels.
//!
//! Training labels are mapped through an [`OutputTransform`] and modelled with
//! a zero-mean GP. Hyperparameters live in log space and are fitted jointly
//! (kernel and, optionally, warp) by box-constrained quasi-Newton descent on
//! the negative log marginal likelihood from several starting points.

mod kernel;

use nalgebra::DVector;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{minimize_box, BoxOptions};
use crate::rng::rng_from;
use crate::transforms::{InputWarp, OutputTransform};

pub use kernel::{kernel_eval, neg_log_marginal_likelihood, KernelParams, NOISE_FLOOR};
use kernel::{gram, k_pair, push_warped, robust_cholesky, warp_rows};

pub const LENGTHSCALE_BOUNDS: (f64, f64) = (1e-3, 10.0);
pub const SIGNAL_VARIANCE_BOUNDS: (f64, f64) = (1e-3, 1e2);
pub const NOISE_VARIANCE_BOUNDS: (f64, f64) = (NOISE_FLOOR, 1.0);
pub const WARP_BOUNDS: (f64, f64) = (0.1, 10.0);

const DEFAULT_LENGTHSCALE: f64 = 0.5;
const DEFAULT_SIGNAL_VARIANCE: f64 = 1.0;
const DEFAULT_NOISE_VARIANCE: f64 = 1e-2;
const RESTART_SPREAD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub seed: u64,
    /// Fit Kumaraswamy warp parameters alongside the kernel.
    pub warp: bool,
    /// Fit a power transform; otherwise labels are only standardised.
    pub output_transform: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { restarts: 3, max_iters: 200, grad_tol: 1e-5, seed: 0, warp: true, output_transform: true }
    }
}

/// Log-space box for the packed hyperparameter vector
/// `[log l_1..d, log s2, log noise, (log a_1..d, log b_1..d)]`.
pub fn param_bounds(d: usize, warp: bool) -> (Vec<f64>, Vec<f64>) {
    let mut lo = vec![LENGTHSCALE_BOUNDS.0.ln(); d];
    let mut hi = vec![LENGTHSCALE_BOUNDS.1.ln(); d];
    lo.push(SIGNAL_VARIANCE_BOUNDS.0.ln());
    hi.push(SIGNAL_VARIANCE_BOUNDS.1.ln());
    lo.push(NOISE_VARIANCE_BOUNDS.0.ln());
    hi.push(NOISE_VARIANCE_BOUNDS.1.ln());
    if warp {
        lo.extend(std::iter::repeat_n(WARP_BOUNDS.0.ln(), 2 * d));
        hi.extend(std::iter::repeat_n(WARP_BOUNDS.1.ln(), 2 * d));
    }
    (lo, hi)
}

/// Starting points: the defaults first, then Gaussian perturbations of them
/// in log space, clipped to the box.
pub fn restart_inits(d: usize, cfg: &FitConfig) -> Vec<Vec<f64>> {
    let mut base = vec![DEFAULT_LENGTHSCALE.ln(); d];
    base.push(DEFAULT_SIGNAL_VARIANCE.ln());
    base.push(DEFAULT_NOISE_VARIANCE.ln());
    if cfg.warp {
        base.extend(std::iter::repeat_n(0.0, 2 * d));
    }
    let (lo, hi) = param_bounds(d, cfg.warp);
    let mut rng = rng_from(cfg.seed, &[0x5eed]);
    let spread = Normal::new(0.0, RESTART_SPREAD).expect("valid normal");
    let mut inits = vec![base.clone()];
    for _ in 1..cfg.restarts.max(1) {
        inits.push(
            base.iter().zip(lo.iter().zip(&hi)).map(|(b, (l, h))| (b + spread.sample(&mut rng)).clamp(*l, *h)).collect(),
        );
    }
    inits
}

fn unpack(v: &[f64], d: usize, warp: bool) -> (KernelParams, Option<InputWarp>) {
    let params = KernelParams { log_lengthscales: v[..d].to_vec(), log_signal_variance: v[d], log_noise_variance: v[d + 1] };
    let w = warp.then(|| {
        InputWarp::new(v[d + 2..2 * d + 2].iter().map(|x| x.exp()).collect(), v[2 * d + 2..].iter().map(|x| x.exp()).collect())
            .expect("exponentiated warp parameters are positive")
    });
    (params, w)
}

/// A GP conditioned on its training data.
#[derive(Debug, Clone)]
pub struct FittedGP {
    pub kernel: KernelParams,
    /// `None` means the identity map with no input clamping.
    pub warp: Option<InputWarp>,
    pub out_transform: OutputTransform,
    pub x: Vec<Vec<f64>>,
    pub t: Vec<f64>,
    pub nlml: f64,
    alpha: Vec<f64>,
    /// Row-major lower Cholesky factor of the noisy Gram matrix.
    chol: Vec<f64>,
    warped: Vec<f64>,
    inv_l2: Vec<f64>,
}

impl FittedGP {
    /// Condition on transformed labels `t` at fixed hyperparameters.
    pub fn condition(
        kernel: KernelParams,
        warp: Option<InputWarp>,
        out_transform: OutputTransform,
        x: Vec<Vec<f64>>,
        t: Vec<f64>,
    ) -> Result<Self> {
        let d = kernel.dim();
        if x.len() != t.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), got: t.len() });
        }
        if x.is_empty() {
            return Err(Error::InvalidArgument("no training points".into()));
        }
        let w = warp_rows(&x, d, warp.as_ref())?;
        let k = gram(&w, &kernel);
        let chol = robust_cholesky(&k)?;
        let tv = DVector::from_column_slice(&t);
        let alpha = chol.solve(&tv);
        let n = x.len();
        let l = chol.l();
        let log_det: f64 = (0..n).map(|i| l[(i, i)].ln()).sum();
        let nlml = 0.5 * alpha.dot(&tv) + log_det + 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
        let mut rows = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                rows[i * n + j] = l[(i, j)];
            }
        }
        let inv_l2 = kernel.log_lengthscales.iter().map(|v| (-2.0 * v).exp()).collect();
        Ok(FittedGP {
            kernel,
            warp,
            out_transform,
            x,
            t,
            nlml,
            alpha: alpha.as_slice().to_vec(),
            chol: rows,
            warped: w.w,
            inv_l2,
        })
    }

    /// Fit the output transform, then the kernel (and warp) hyperparameters.
    pub fn fit(x: &[Vec<f64>], y_raw: &[f64], cfg: &FitConfig) -> Result<Self> {
        if x.len() != y_raw.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), got: y_raw.len() });
        }
        if x.len() < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 observations, got {}", x.len())));
        }
        let d = x[0].len();
        if d == 0 {
            return Err(Error::InvalidArgument("zero-dimensional inputs".into()));
        }
        let out_transform = if cfg.output_transform { OutputTransform::fit(y_raw)? } else { OutputTransform::standardize(y_raw)? };
        let t = out_transform.apply(y_raw)?;
        let (lo, hi) = param_bounds(d, cfg.warp);
        let opts = BoxOptions { max_iters: cfg.max_iters, grad_tol: cfg.grad_tol, ..BoxOptions::default() };

        let mut best: Option<(f64, Vec<f64>)> = None;
        for init in restart_inits(d, cfg) {
            let objective = |v: &[f64]| {
                let (p, w) = unpack(v, d, cfg.warp);
                neg_log_marginal_likelihood(&p, w.as_ref(), x, &t).ok()
            };
            let Some(m) = minimize_box(objective, &init, &lo, &hi, &opts) else { continue };
            if best.as_ref().is_none_or(|(f, _)| m.f < *f) {
                best = Some((m.f, m.x));
            }
        }
        let (_, v) = best.ok_or_else(|| Error::Fit("every restart was ill-conditioned".into()))?;
        let (kernel, warp) = unpack(&v, d, cfg.warp);
        Self::condition(kernel, warp, out_transform, x.to_vec(), t)
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    /// Latent posterior mean and variance at one encoded point, in transformed space.
    pub fn predict_one(&self, u: &[f64]) -> Result<(f64, f64)> {
        let d = self.dim();
        if u.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: u.len() });
        }
        let mut q = Vec::with_capacity(d);
        push_warped(u, self.warp.as_ref(), &mut q);
        let n = self.t.len();
        let s2 = self.kernel.signal_variance();
        let mut v: Vec<f64> = (0..n).map(|i| k_pair(&q, &self.warped[i * d..(i + 1) * d], &self.inv_l2, s2)).collect();
        let mu: f64 = v.iter().zip(&self.alpha).map(|(k, a)| k * a).sum();
        // forward substitution L v = k in place
        for i in 0..n {
            let row = &self.chol[i * n..i * n + i];
            let s: f64 = row.iter().zip(&v[..i]).map(|(l, x)| l * x).sum();
            v[i] = (v[i] - s) / self.chol[i * n + i];
        }
        let var = (s2 - v.iter().map(|x| x * x).sum::<f64>()).max(0.0);
        Ok((mu, var))
    }

    pub fn predict(&self, q: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut mu = Vec::with_capacity(q.len());
        let mut var = Vec::with_capacity(q.len());
        for u in q {
            let (m, v) = self.predict_one(u)?;
            mu.push(m);
            var.push(v);
        }
        Ok((mu, var))
    }

    /// Index of the largest transformed label.
    pub fn incumbent_index(&self) -> usize {
        self.t.iter().enumerate().fold(0, |b, (i, v)| if *v > self.t[b] { i } else { b })
    }
}
