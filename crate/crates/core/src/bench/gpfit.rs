//! Paired held-out likelihood comparison of GP fits with one component toggled.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bench::functions::BlackBox;
use crate::error::{Error, Result};
use crate::rng::{name_hash, rng_from};
use crate::stats::{paired_t_test, Alternative, TestResult};
use crate::surrogate::{FitConfig, FittedGP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Toggle {
    /// Input warping on vs off, output transform off in both.
    Warp,
    /// Output transform on vs off, input warping off in both.
    Output,
}

impl std::str::FromStr for Toggle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "warp" => Ok(Toggle::Warp),
            "output" => Ok(Toggle::Output),
            other => Err(Error::Config(format!("unknown toggle `{other}`, expected warp or output"))),
        }
    }
}

impl Toggle {
    fn fit_config(self, on: bool, seed: u64) -> FitConfig {
        FitConfig {
            seed,
            warp: self == Toggle::Warp && on,
            output_transform: self == Toggle::Output && on,
            ..FitConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpFitConfig {
    pub n_train: usize,
    pub n_test: usize,
    /// Two-sided significance level of the paired t-test.
    pub alpha: f64,
}

impl Default for GpFitConfig {
    fn default() -> Self {
        GpFitConfig { n_train: 30, n_test: 200, alpha: 0.025 }
    }
}

/// Training and held-out data in encoded coordinates. Labels are maximised (`-loss`).
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x_train: Vec<Vec<f64>>,
    pub y_train: Vec<f64>,
    pub x_test: Vec<Vec<f64>>,
    pub y_test: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedComparison {
    pub seed: u64,
    /// Mean held-out log predictive density, component on.
    pub on: Option<f64>,
    pub off: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Better,
    SignificantlyBetter,
    Worse,
    SignificantlyWorse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpFitReport {
    pub function: String,
    pub toggle: Toggle,
    pub seeds: Vec<SeedComparison>,
    /// Seeds where either fit failed; excluded pairwise.
    pub failures: usize,
    /// Share of valid seeds where the component raised held-out density.
    pub fraction_improved: f64,
    pub mean_difference: f64,
    pub test: TestResult,
    pub verdict: Verdict,
}

/// Mean log density of `y_test` under the fitted GP, in label space.
/// The predictive variance includes the fitted noise.
pub fn heldout_log_density(gp: &FittedGP, x_test: &[Vec<f64>], y_test: &[f64]) -> Result<f64> {
    let (mu, var) = gp.predict(x_test)?;
    let noise = gp.kernel.noise_variance();
    let mut total = 0.0;
    for ((&y, m), v) in y_test.iter().zip(mu).zip(var) {
        let s2 = v + noise;
        let t = gp.out_transform.apply_one(y)?;
        total += -0.5 * ((2.0 * PI * s2).ln() + (t - m).powi(2) / s2) + gp.out_transform.log_abs_derivative(y)?;
    }
    Ok(total / y_test.len() as f64)
}

/// Uniform training and test sets with noisy labels.
pub fn sample_dataset(bb: &BlackBox, seed: u64, cfg: &GpFitConfig) -> Result<Dataset> {
    let mut rng = rng_from(seed, &[name_hash(&bb.name), name_hash("gpfit")]);
    let mut draw = |n: usize| -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let configs = bb.space.sample_uniform(n, &mut rng);
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for c in &configs {
            xs.push(bb.space.encode(c)?);
            ys.push(-bb.eval(c, &mut rng)?);
        }
        Ok((xs, ys))
    };
    let (x_train, y_train) = draw(cfg.n_train)?;
    let (x_test, y_test) = draw(cfg.n_test)?;
    Ok(Dataset { x_train, y_train, x_test, y_test })
}

fn fit_score(data: &Dataset, fit: &FitConfig) -> Option<f64> {
    let gp = FittedGP::fit(&data.x_train, &data.y_train, fit).ok()?;
    heldout_log_density(&gp, &data.x_test, &data.y_test).ok().filter(|v| v.is_finite())
}

/// Compare on pre-built datasets, one per seed.
pub fn compare_datasets(
    function: &str,
    toggle: Toggle,
    datasets: impl IntoIterator<Item = (u64, Dataset)>,
    alpha: f64,
) -> Result<GpFitReport> {
    let seeds: Vec<SeedComparison> = datasets
        .into_iter()
        .map(|(seed, data)| SeedComparison {
            seed,
            on: fit_score(&data, &toggle.fit_config(true, seed)),
            off: fit_score(&data, &toggle.fit_config(false, seed)),
        })
        .collect();
    let (on, off): (Vec<f64>, Vec<f64>) = seeds.iter().filter_map(|s| Some((s.on?, s.off?))).unzip();
    if on.len() < 2 {
        return Err(Error::Fit(format!("fewer than two seeds with both fits on `{function}`")));
    }
    let n = on.len() as f64;
    let diffs: Vec<f64> = on.iter().zip(&off).map(|(a, b)| a - b).collect();
    let mean_difference = diffs.iter().sum::<f64>() / n;
    let fraction_improved = diffs.iter().filter(|&&d| d > 0.0).count() as f64 / n;
    let test = paired_t_test(&on, &off, Alternative::TwoSided)?;
    let significant = test.p_value < alpha;
    let verdict = match (mean_difference > 0.0, significant) {
        (true, true) => Verdict::SignificantlyBetter,
        (true, false) => Verdict::Better,
        (false, true) => Verdict::SignificantlyWorse,
        (false, false) => Verdict::Worse,
    };
    Ok(GpFitReport {
        function: function.to_owned(),
        toggle,
        failures: seeds.len() - on.len(),
        seeds,
        fraction_improved,
        mean_difference,
        test,
        verdict,
    })
}

/// Sample one dataset per seed from `bb` and compare fits with `toggle` on and off.
pub fn gp_fit_comparison(bb: &BlackBox, seeds: &[u64], toggle: Toggle, cfg: &GpFitConfig) -> Result<GpFitReport> {
    if seeds.len() < 2 {
        return Err(Error::InvalidArgument("at least two seeds are required".into()));
    }
    let datasets = seeds.iter().map(|&s| sample_dataset(bb, s, cfg).map(|d| (s, d))).collect::<Result<Vec<_>>>()?;
    compare_datasets(&bb.name, toggle, datasets, cfg.alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::functions::lookup;
    use crate::surrogate::KernelParams;
    use crate::transforms::OutputTransform;

    #[test]
    fn density_matches_closed_form_for_identity_transform() {
        // Single training point: posterior at a far test point is the prior.
        let x = vec![vec![0.0]];
        let t = vec![0.0];
        let kernel = KernelParams::new(&[0.01], 1.0, 1e-4);
        let ot = OutputTransform::standardize(&[2.0]).unwrap();
        let gp = FittedGP::condition(kernel, None, ot.clone(), x, t).unwrap();
        let y = 2.5;
        let s2 = 1.0 + 1e-4;
        let z = ot.apply_one(y).unwrap();
        let want = -0.5 * ((2.0 * PI * s2).ln() + z * z / s2) - ot.post_std.ln() - ot.pre_scale.ln();
        let got = heldout_log_density(&gp, &[vec![1.0]], &[y]).unwrap();
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }

    #[test]
    fn report_shape_and_validation() {
        let bb = lookup("branin").unwrap();
        let cfg = GpFitConfig { n_train: 12, n_test: 20, alpha: 0.025 };
        assert!(gp_fit_comparison(&bb, &[0], Toggle::Output, &cfg).is_err());
        let r = gp_fit_comparison(&bb, &[0, 1, 2], Toggle::Output, &cfg).unwrap();
        assert_eq!(r.seeds.len(), 3);
        assert!((0.0..=1.0).contains(&r.fraction_improved));
        assert!("warp".parse::<Toggle>().is_ok() && "x".parse::<Toggle>().is_err());
    }
}
