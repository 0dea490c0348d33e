//! Box-Cox and Yeo-Johnson power transforms with profile-likelihood fitting.

use crate::error::{Error, Result};
use crate::optim::brent_minimize;

/// Search interval for the power parameter.
pub const ZETA_BOUNDS: (f64, f64) = (-5.0, 5.0);
const ZETA_TOL: f64 = 1e-6;
/// Distance from a branch point below which the series branch is used.
const BRANCH_EPS: f64 = 1e-8;

/// `expm1(zeta * l) / zeta` to second order in `zeta`; error `O(zeta^3 l^4)`.
#[inline]
fn expm1_ratio_series(l: f64, zeta: f64) -> f64 {
    l * (1.0 + zeta * l / 2.0 * (1.0 + zeta * l / 3.0))
}

fn check_len(y: &[f64]) -> Result<()> {
    if y.len() < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 labels, got {}", y.len())));
    }
    Ok(())
}

fn check_positive(y: &[f64]) -> Result<()> {
    match y.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        Some(v) => Err(Error::Domain(format!("Box-Cox requires strictly positive finite labels, got {v}"))),
        None => Ok(()),
    }
}

fn check_finite(y: &[f64]) -> Result<()> {
    match y.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(Error::Domain(format!("labels must be finite, got {v}"))),
        None => Ok(()),
    }
}

fn is_constant(y: &[f64]) -> bool {
    y.iter().all(|&v| v == y[0])
}

/// Sum of squared deviations from the mean; exactly zero for identical values.
fn centered_ss(t: &[f64]) -> f64 {
    if is_constant(t) {
        return 0.0;
    }
    let mean = t.iter().sum::<f64>() / t.len() as f64;
    t.iter().map(|v| (v - mean).powi(2)).sum()
}

#[inline]
pub(crate) fn boxcox_scalar(y: f64, zeta: f64) -> f64 {
    if zeta.abs() < BRANCH_EPS {
        expm1_ratio_series(y.ln(), zeta)
    } else {
        (zeta * y.ln()).exp_m1() / zeta
    }
}

#[inline]
pub(crate) fn yeojohnson_scalar(y: f64, zeta: f64) -> f64 {
    if y >= 0.0 {
        if zeta.abs() < BRANCH_EPS {
            expm1_ratio_series(y.ln_1p(), zeta)
        } else {
            (zeta * y.ln_1p()).exp_m1() / zeta
        }
    } else if (zeta - 2.0).abs() < BRANCH_EPS {
        -expm1_ratio_series((-y).ln_1p(), 2.0 - zeta)
    } else {
        ((2.0 - zeta) * (-y).ln_1p()).exp_m1() / (zeta - 2.0)
    }
}

pub fn boxcox_apply(y: &[f64], zeta: f64) -> Result<Vec<f64>> {
    check_positive(y)?;
    Ok(y.iter().map(|&v| boxcox_scalar(v, zeta)).collect())
}

/// Negative Box-Cox profile log-likelihood,
/// `(n/2) ln(SS/n) - (zeta - 1) sum ln y`. Returns `+inf` when the
/// transformed labels have zero variance.
pub fn boxcox_neg_loglik(y: &[f64], zeta: f64) -> Result<f64> {
    check_len(y)?;
    check_positive(y)?;
    let n = y.len() as f64;
    let t: Vec<f64> = y.iter().map(|&v| boxcox_scalar(v, zeta)).collect();
    let ss = centered_ss(&t);
    if !(ss > 0.0) || !ss.is_finite() {
        return Ok(f64::INFINITY);
    }
    let log_sum: f64 = y.iter().map(|v| v.ln()).sum();
    Ok(0.5 * n * (ss / n).ln() - (zeta - 1.0) * log_sum)
}

/// Maximum-likelihood Box-Cox parameter on [`ZETA_BOUNDS`].
pub fn boxcox_fit(y: &[f64]) -> Result<f64> {
    check_len(y)?;
    check_positive(y)?;
    if is_constant(y) {
        return Err(Error::Degenerate("Box-Cox fit on constant labels".into()));
    }
    let n = y.len() as f64;
    let log_sum: f64 = y.iter().map(|v| v.ln()).sum();
    let mut t = vec![0.0; y.len()];
    let objective = |zeta: f64| {
        for (ti, &v) in t.iter_mut().zip(y) {
            *ti = boxcox_scalar(v, zeta);
        }
        0.5 * n * (centered_ss(&t) / n).ln() - (zeta - 1.0) * log_sum
    };
    Ok(brent_minimize(objective, ZETA_BOUNDS.0, ZETA_BOUNDS.1, ZETA_TOL).0)
}

pub fn yeojohnson_apply(y: &[f64], zeta: f64) -> Vec<f64> {
    y.iter().map(|&v| yeojohnson_scalar(v, zeta)).collect()
}

/// Negative Yeo-Johnson log-likelihood,
/// `(n/2) ln(SS/(n-1)) - (zeta - 1) sum sign(y) ln(|y| + 1)`.
pub fn yeojohnson_neg_loglik(y: &[f64], zeta: f64) -> Result<f64> {
    check_len(y)?;
    check_finite(y)?;
    let n = y.len() as f64;
    let ss = centered_ss(&yeojohnson_apply(y, zeta));
    if !(ss > 0.0) || !ss.is_finite() {
        return Ok(f64::INFINITY);
    }
    let jac: f64 = y.iter().map(|&v| v.signum() * v.abs().ln_1p()).sum();
    Ok(0.5 * n * (ss / (n - 1.0)).ln() - (zeta - 1.0) * jac)
}

/// Maximum-likelihood Yeo-Johnson parameter on [`ZETA_BOUNDS`].
pub fn yeojohnson_fit(y: &[f64]) -> Result<f64> {
    check_len(y)?;
    check_finite(y)?;
    if is_constant(y) {
        return Err(Error::Degenerate("Yeo-Johnson fit on constant labels".into()));
    }
    let n = y.len() as f64;
    let jac: f64 = y.iter().map(|&v| v.signum() * v.abs().ln_1p()).sum();
    let mut t = vec![0.0; y.len()];
    let objective = |zeta: f64| {
        for (ti, &v) in t.iter_mut().zip(y) {
            *ti = yeojohnson_scalar(v, zeta);
        }
        0.5 * n * (centered_ss(&t) / (n - 1.0)).ln() - (zeta - 1.0) * jac
    };
    Ok(brent_minimize(objective, ZETA_BOUNDS.0, ZETA_BOUNDS.1, ZETA_TOL).0)
}
