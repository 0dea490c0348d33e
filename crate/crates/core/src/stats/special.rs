//! Distribution functions needed for p-values.
//!
//! The complementary error function comes from `libm` and the regularised
//! incomplete beta/gamma functions from `statrs`; this module fixes the domains, the tail conventions
//! and the error type.

use statrs::function::{beta, erf, gamma};

use crate::error::{Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF, `Phi(x) = erfc(-x / sqrt 2) / 2`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Inverse of [`normal_cdf`] on `(0, 1)`; the endpoints map to `-inf` / `+inf`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
    }
    if p == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if p == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * p))
}

/// Regularised incomplete beta `I_x(a, b)`.
pub fn reg_incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    beta::checked_beta_reg(a, b, x).map_err(|e| Error::Domain(format!("I_{x}({a}, {b}): {e}")))
}

/// Regularised lower incomplete gamma `P(s, x)`.
pub fn reg_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() || x < 0.0 || x.is_nan() {
        return Err(Error::Domain(format!("P({s}, {x}) undefined")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    gamma::checked_gamma_lr(s, x).map_err(|e| Error::Domain(e.to_string()))
}

/// Regularised upper incomplete gamma `Q(s, x) = 1 - P(s, x)`, computed directly in the tail.
pub fn reg_upper_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() || x < 0.0 || x.is_nan() {
        return Err(Error::Domain(format!("Q({s}, {x}) undefined")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    gamma::checked_gamma_ur(s, x).map_err(|e| Error::Domain(e.to_string()))
}

fn check_dof(v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("degrees of freedom must be positive, got {v}")))
    }
}

pub fn student_t_cdf(t: f64, dof: f64) -> Result<f64> {
    check_dof(dof)?;
    if t.is_nan() {
        return Err(Error::Domain("t is NaN".into()));
    }
    if t.is_infinite() {
        return Ok(if t > 0.0 { 1.0 } else { 0.0 });
    }
    let tail = 0.5 * reg_incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t))?;
    Ok(if t > 0.0 { 1.0 - tail } else { tail })
}

/// Upper tail of Student's t, `P(T > t)`.
pub fn student_t_sf(t: f64, dof: f64) -> Result<f64> {
    student_t_cdf(-t, dof)
}

pub fn f_cdf(x: f64, d1: f64, d2: f64) -> Result<f64> {
    check_dof(d1)?;
    check_dof(d2)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    reg_incomplete_beta(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2))
}

/// Upper tail of the F distribution, evaluated without cancellation.
pub fn f_sf(x: f64, d1: f64, d2: f64) -> Result<f64> {
    check_dof(d1)?;
    check_dof(d2)?;
    if x <= 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    reg_incomplete_beta(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * x))
}

pub fn chisq_cdf(x: f64, k: f64) -> Result<f64> {
    check_dof(k)?;
    reg_incomplete_gamma(0.5 * k, 0.5 * x.max(0.0))
}

pub fn chisq_sf(x: f64, k: f64) -> Result<f64> {
    check_dof(k)?;
    reg_upper_incomplete_gamma(0.5 * k, 0.5 * x.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_reference_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        // mpmath ncdf at 30 digits
        assert!((normal_cdf(3.0) - 0.998_650_101_968_369_9).abs() < 1e-15);
        assert!((normal_cdf(-1.96) - 0.024_997_895_148_220_435).abs() < 1e-15);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((normal_cdf(-8.0) / 6.220_960_574_271_784e-16 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn normal_quantile_inverts_cdf() {
        for i in 0..=1200 {
            let x = -6.0 + i as f64 * 0.01;
            let back = normal_quantile(normal_cdf(x)).unwrap();
            // above 6 sigma the CDF itself loses relative precision near 1
            assert!((back - x).abs() < 1e-8, "{x} -> {back}");
        }
        assert!((normal_quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-12);
        assert_eq!(normal_quantile(0.0).unwrap(), f64::NEG_INFINITY);
        assert!(normal_quantile(1.5).is_err());
    }

    #[test]
    fn chisq_two_dof_closed_form() {
        for x in [0.5, 1.0, 5.0] {
            assert!((chisq_cdf(x, 2.0).unwrap() - (1.0 - (-x / 2.0f64).exp())).abs() < 1e-12);
            assert!((chisq_sf(x, 2.0).unwrap() - (-x / 2.0f64).exp()).abs() < 1e-12);
        }
        assert_eq!(chisq_cdf(0.0, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn student_t_closed_forms() {
        // one degree of freedom is Cauchy: 1/2 + atan(t)/pi
        for t in [-3.0, -0.5, 0.0, 0.7, 10.0] {
            let exact = 0.5 + f64::atan(t) / std::f64::consts::PI;
            assert!((student_t_cdf(t, 1.0).unwrap() - exact).abs() < 1e-12);
        }
        // two degrees of freedom: 1/2 + t / (2 sqrt(2 + t^2))
        for t in [-2.0, 0.3, 4.0] {
            let exact = 0.5 + t / (2.0 * (2.0 + t * t as f64).sqrt());
            assert!((student_t_cdf(t, 2.0).unwrap() - exact).abs() < 1e-12);
        }
        assert!((student_t_sf(1.5, 7.0).unwrap() + student_t_cdf(1.5, 7.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn f_distribution_relations() {
        // F(2, 2) has cdf x / (1 + x)
        for x in [0.1, 1.0, 3.0] {
            assert!((f_cdf(x, 2.0, 2.0).unwrap() - x / (1.0 + x)).abs() < 1e-12);
        }
        // T^2 with nu dof is F(1, nu)
        let (t, nu) = (1.7, 9.0);
        let two_sided = 2.0 * student_t_sf(t, nu).unwrap();
        assert!((f_sf(t * t, 1.0, nu).unwrap() - two_sided).abs() < 1e-12);
        assert!((f_sf(1.3, 49.0, 450.0).unwrap() + f_cdf(1.3, 49.0, 450.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn incomplete_functions_reference_values() {
        // mpmath: betainc(2.5, 4, 0, 0.3, regularized=True)
        assert!((reg_incomplete_beta(2.5, 4.0, 0.3).unwrap() - 0.352_197_585_906_767_2).abs() < 1e-8);
        // mpmath: gammainc(3.5, 0, 2.0, regularized=True)
        assert!((reg_incomplete_gamma(3.5, 2.0).unwrap() - 0.220_222_591_524_284_1).abs() < 1e-8);
        assert!(reg_incomplete_beta(-1.0, 1.0, 0.5).is_err());
        assert!(reg_incomplete_gamma(1.0, -1.0).is_err());
    }
}
