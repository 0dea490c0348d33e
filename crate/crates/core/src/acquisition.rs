//! Closed-form single-point acquisitions on GP posterior marginals, and the
//! additive-noise robust wrapper.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::special::{normal_cdf, normal_pdf, normal_quantile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AcquisitionKind {
    Ei,
    Pi,
    Ucb,
}

/// Everything an acquisition needs besides the posterior marginals.
/// `incumbent` lives in the transformed label space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionContext {
    pub incumbent: f64,
    pub beta: f64,
    pub sigma_n: f64,
    pub rho: f64,
    pub delta: f64,
}

impl AcquisitionContext {
    pub fn new(incumbent: f64, beta: f64, sigma_n: f64) -> Result<Self> {
        let ctx = AcquisitionContext { incumbent, beta, sigma_n, rho: 0.1, delta: 0.1 };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0) || !(self.sigma_n >= 0.0) {
            return Err(Error::InvalidArgument(format!("beta and sigma_n must be >= 0, got {} and {}", self.beta, self.sigma_n)));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) || !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidArgument("rho and delta must lie in (0, 1)".into()));
        }
        Ok(())
    }

    /// The deterministic acquisition value of `kind` at `(mu, sigma)`.
    pub fn value(&self, kind: AcquisitionKind, mu: f64, sigma: f64) -> f64 {
        match kind {
            AcquisitionKind::Ei => ei(mu, sigma, self.incumbent),
            AcquisitionKind::Pi => pi(mu, sigma, self.incumbent),
            AcquisitionKind::Ucb => ucb(mu, sigma, self.beta),
        }
    }
}

/// `E[max(0, f - f+)]` for `f ~ N(mu, sigma^2)`.
pub fn ei(mu: f64, sigma: f64, incumbent: f64) -> f64 {
    let diff = mu - incumbent;
    if !(sigma > 0.0) {
        return diff.max(0.0);
    }
    let z = diff / sigma;
    (sigma * (z * normal_cdf(z) + normal_pdf(z))).max(0.0)
}

/// `P(f > f+)` for `f ~ N(mu, sigma^2)`.
pub fn pi(mu: f64, sigma: f64, incumbent: f64) -> f64 {
    if !(sigma > 0.0) {
        return if mu > incumbent { 1.0 } else { 0.0 };
    }
    normal_cdf((mu - incumbent) / sigma)
}

pub fn ucb(mu: f64, sigma: f64, beta: f64) -> f64 {
    mu + beta.sqrt() * sigma
}

/// `alpha + eta * sigma_n` with a fresh standard normal `eta`.
pub fn robustify<R: Rng + ?Sized>(alpha: f64, sigma_n: f64, rng: &mut R) -> f64 {
    if sigma_n == 0.0 {
        return alpha;
    }
    let eta: f64 = StandardNormal.sample(rng);
    alpha + eta * sigma_n
}

/// `rho / (4 Phi^-1(1 - delta / (8 n_eps)))`.
pub fn robust_sigma_n(rho: f64, delta: f64, n_eps: u64) -> Result<f64> {
    if n_eps == 0 {
        return Err(Error::InvalidArgument("n_eps must be >= 1".into()));
    }
    Ok(rho / (4.0 * normal_quantile(1.0 - delta / (8.0 * n_eps as f64))?))
}

/// Noise-scale bookkeeping for the perturbed acquisition. Reporting only;
/// the optimiser uses a fixed `sigma_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustnessParams {
    pub n_eps: u64,
    pub sigma_n: f64,
    pub sigma_eps: f64,
}

/// `N = ceil(16 (A2 + beta pi/2 A3) / (delta rho^2))`,
/// `sigma_n = rho / (4 Phi^-1(1 - delta / (8N)))`,
/// `sigma_eps = min(1, rho / (8 (2 sqrt(p) + sqrt(ln(4N/delta))) A1))`.
pub fn robustness_params(rho: f64, delta: f64, a1: f64, a2: f64, a3: f64, beta: f64, p: usize) -> Result<RobustnessParams> {
    if !(rho > 0.0 && rho < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument("rho and delta must lie in (0, 1)".into()));
    }
    if !(a1 > 0.0 && a2 > 0.0 && a3 > 0.0) || !(beta >= 0.0) || p == 0 {
        return Err(Error::InvalidArgument("bounds must be positive, beta >= 0 and p >= 1".into()));
    }
    let n_eps = (16.0 * (a2 + beta * std::f64::consts::FRAC_PI_2 * a3) / (delta * rho * rho)).ceil();
    let sigma_n = robust_sigma_n(rho, delta, n_eps as u64)?;
    let denom = 8.0 * (2.0 * (p as f64).sqrt() + (4.0 * n_eps / delta).ln().sqrt()) * a1;
    Ok(RobustnessParams { n_eps: n_eps as u64, sigma_n, sigma_eps: (rho / denom).min(1.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;

    #[test]
    fn closed_form_points() {
        assert!((ei(0.3, 1.0, 0.3) - 0.398_942_280_401_432_7).abs() < 1e-12);
        assert_eq!(ei(-1.0, 0.0, 0.0), 0.0);
        assert_eq!(ei(2.0, 0.0, 0.5), 1.5);
        assert_eq!(pi(1.0, 2.0, 1.0), 0.5);
        assert!((pi(3.0, 1.0, 0.0) - 0.998_650_101_968_369_9).abs() < 1e-12);
        assert_eq!(pi(1.0, 0.0, 0.0), 1.0);
        assert_eq!(pi(0.0, 0.0, 0.0), 0.0);
        assert_eq!(ucb(0.7, 3.0, 0.0), 0.7);
        assert_eq!(ucb(0.0, 1.0, 4.0), 2.0);
    }

    #[test]
    fn monte_carlo_agreement() {
        let mut rng = rng_from(101, &[]);
        let (mu, sigma, inc) = (1.0, 0.5, 0.0);
        let n = 1_000_000;
        let (mut s_ei, mut s2_ei, mut s_pi) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            let f = mu + sigma * z;
            let imp = (f - inc).max(0.0);
            s_ei += imp;
            s2_ei += imp * imp;
            s_pi += if f > inc { 1.0 } else { 0.0 };
        }
        let nf = n as f64;
        let m_ei = s_ei / nf;
        let se_ei = ((s2_ei / nf - m_ei * m_ei) / nf).sqrt();
        assert!((m_ei - ei(mu, sigma, inc)).abs() < 3.0 * se_ei);
        let m_pi = s_pi / nf;
        let se_pi = (m_pi * (1.0 - m_pi) / nf).sqrt();
        assert!((m_pi - pi(mu, sigma, inc)).abs() < 3.0 * se_pi);
    }

    #[test]
    fn monotone_in_mean_and_spread() {
        let inc = 0.4;
        for i in 0..40 {
            let mu = -2.0 + 0.1 * i as f64;
            for j in 1..30 {
                let s = 0.05 * j as f64;
                assert!(ei(mu + 0.1, s, inc) >= ei(mu, s, inc));
                assert!(pi(mu + 0.1, s, inc) >= pi(mu, s, inc));
                assert!(ei(mu, s, inc) - ei(mu, s, inc + 0.3) >= 0.0);
                if mu < inc {
                    assert!(ei(mu, s + 0.05, inc) >= ei(mu, s, inc));
                    assert!(pi(mu, s + 0.05, inc) >= pi(mu, s, inc));
                }
            }
        }
    }

    #[test]
    fn robustify_moments() {
        let mut rng = rng_from(5, &[]);
        assert_eq!(robustify(1.25, 0.0, &mut rng), 1.25);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| robustify(2.0, 0.3, &mut rng)).collect();
        let m = draws.iter().sum::<f64>() / n as f64;
        let sd = (draws.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
        assert!((sd / 0.3 - 1.0).abs() < 0.02);
        assert!((m - 2.0).abs() < 3.0 * 0.3 / (n as f64).sqrt());
        let mut a = rng_from(9, &[]);
        let mut b = rng_from(9, &[]);
        assert_eq!(robustify(0.0, 1.0, &mut a), robustify(0.0, 1.0, &mut b));
    }

    #[test]
    fn robustness_parameter_arithmetic() {
        let r = robustness_params(0.1, 0.1, 1.0, 1.0, 1.0, 1.0, 2).unwrap();
        assert_eq!(r.n_eps, 41133);
        let lo = robustness_params(0.1, 0.1, 1.0, 1.0, 1.0, 1.0, 2).unwrap();
        let hi = robustness_params(0.2, 0.1, 1.0, 1.0, 1.0, 1.0, 2).unwrap();
        assert!(hi.sigma_n > lo.sigma_n);
        assert!(robustness_params(0.0, 0.1, 1.0, 1.0, 1.0, 1.0, 2).is_err());
        assert!(robustness_params(0.1, 1.0, 1.0, 1.0, 1.0, 1.0, 2).is_err());
        assert!(robustness_params(0.1, 0.1, -1.0, 1.0, 1.0, 1.0, 2).is_err());
        assert!(r.sigma_eps > 0.0 && r.sigma_eps <= 1.0);
        let mut last = 0.0;
        for d in [0.1, 0.5, 0.9, 0.99, 0.999] {
            let s = robust_sigma_n(0.1, d, 41133).unwrap();
            assert!(s > last);
            last = s;
        }
    }
}
