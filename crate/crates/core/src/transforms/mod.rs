//! Output power transforms and input warping.
//!
//! Labels go through three steps before the GP sees them: division by their
//! sample standard deviation (keeps the power parameter well scaled), the
//! fitted power transform, and a z-score. Every step is strictly increasing,
//! so the argmax of the labels is preserved.

mod power;
mod warp;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use power::{
    boxcox_apply, boxcox_fit, boxcox_neg_loglik, yeojohnson_apply, yeojohnson_fit, yeojohnson_neg_loglik, ZETA_BOUNDS,
};
pub use warp::{clamp_unit, kumaraswamy_grad, kumaraswamy_warp, InputWarp, WarpGrad, WARP_CLAMP};
pub(crate) use warp::{warp_partials, warp_scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformFamily {
    /// Standardisation only.
    Identity,
    BoxCox,
    YeoJohnson,
}

impl TransformFamily {
    /// Box-Cox when every label is strictly positive, Yeo-Johnson otherwise.
    pub fn select(y: &[f64]) -> Self {
        if y.iter().all(|&v| v > 0.0) {
            TransformFamily::BoxCox
        } else {
            TransformFamily::YeoJohnson
        }
    }
}

/// A fitted label transform `t = (T_zeta(y / pre_scale) - post_mean) / post_std`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputTransform {
    pub family: TransformFamily,
    pub zeta: f64,
    pub pre_scale: f64,
    pub post_mean: f64,
    pub post_std: f64,
}

fn mean_std(t: &[f64]) -> (f64, f64) {
    let n = t.len() as f64;
    let mean = t.iter().sum::<f64>() / n;
    let var = t.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl OutputTransform {
    /// Plain z-scoring. Constant labels get `post_std = 1`.
    pub fn standardize(y: &[f64]) -> Result<Self> {
        if y.is_empty() || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("labels must be non-empty and finite".into()));
        }
        let (mean, std) = mean_std(y);
        Ok(OutputTransform {
            family: TransformFamily::Identity,
            zeta: 1.0,
            pre_scale: 1.0,
            post_mean: mean,
            post_std: if std > 0.0 { std } else { 1.0 },
        })
    }

    /// Select a family by the sign rule, fit its power parameter by maximum
    /// likelihood, then standardise. Falls back to [`OutputTransform::standardize`]
    /// when the labels are constant or the fitted transform is numerically unusable.
    pub fn fit(y: &[f64]) -> Result<Self> {
        let fallback = Self::standardize(y)?;
        if y.len() < 2 {
            return Ok(fallback);
        }
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let sd = (y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        if !(sd > 0.0) {
            return Ok(fallback);
        }
        let scaled: Vec<f64> = y.iter().map(|v| v / sd).collect();
        let family = TransformFamily::select(y);
        let (zeta, t) = match family {
            TransformFamily::BoxCox => {
                let zeta = boxcox_fit(&scaled)?;
                (zeta, boxcox_apply(&scaled, zeta)?)
            }
            _ => {
                let zeta = yeojohnson_fit(&scaled)?;
                (zeta, yeojohnson_apply(&scaled, zeta))
            }
        };
        let (post_mean, post_std) = mean_std(&t);
        if !(post_std > 0.0) || !post_std.is_finite() || t.iter().any(|v| !v.is_finite()) {
            return Ok(fallback);
        }
        Ok(OutputTransform { family, zeta, pre_scale: sd, post_mean, post_std })
    }

    fn power(&self, y: f64) -> Result<f64> {
        let z = y / self.pre_scale;
        match self.family {
            TransformFamily::Identity => Ok(z),
            TransformFamily::BoxCox if z > 0.0 => Ok(power::boxcox_scalar(z, self.zeta)),
            TransformFamily::BoxCox => Err(Error::Domain(format!("Box-Cox transform of non-positive label {y}"))),
            TransformFamily::YeoJohnson => Ok(power::yeojohnson_scalar(z, self.zeta)),
        }
    }

    pub fn apply_one(&self, y: f64) -> Result<f64> {
        Ok((self.power(y)? - self.post_mean) / self.post_std)
    }

    pub fn apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        y.iter().map(|&v| self.apply_one(v)).collect()
    }

    /// `ln |dt/dy|`, the change-of-variables term for densities in label space.
    pub fn log_abs_derivative(&self, y: f64) -> Result<f64> {
        let z = y / self.pre_scale;
        let inner = match self.family {
            TransformFamily::Identity => 0.0,
            TransformFamily::BoxCox if z > 0.0 => (self.zeta - 1.0) * z.ln(),
            TransformFamily::BoxCox => return Err(Error::Domain(format!("Box-Cox derivative at non-positive label {y}"))),
            TransformFamily::YeoJohnson if z >= 0.0 => (self.zeta - 1.0) * z.ln_1p(),
            TransformFamily::YeoJohnson => (1.0 - self.zeta) * (-z).ln_1p(),
        };
        Ok(inner - self.pre_scale.ln() - self.post_std.ln())
    }
}
