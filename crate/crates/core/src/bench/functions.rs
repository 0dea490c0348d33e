//! Synthetic black boxes. Losses are minimised.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::design_space::{Configuration, DesignSpace, Parameter};
use crate::error::{Error, Result};
use crate::optim::brent_minimize;

#[derive(Debug, Clone, PartialEq)]
pub enum NoiseKind {
    None,
    Homoscedastic(f64),
    /// `sigma(x) = base + slope * distance` from `x` to the nearest of
    /// `minimizers`, all in encoded coordinates so the scale is unit-free.
    Heteroscedastic { base: f64, slope: f64, minimizers: Vec<Vec<f64>> },
}

#[derive(Debug, Clone)]
pub struct BlackBox {
    pub name: String,
    pub space: DesignSpace,
    /// Noiseless optimum `L*` when known.
    pub optimum_loss: Option<f64>,
    pub noise: NoiseKind,
    f: fn(&[f64]) -> f64,
}

impl BlackBox {
    fn new(name: &str, space: DesignSpace, f: fn(&[f64]) -> f64, optimum_loss: Option<f64>) -> Self {
        BlackBox { name: name.to_owned(), space, optimum_loss, noise: NoiseKind::None, f }
    }

    fn with_noise(mut self, name: &str, noise: NoiseKind) -> Self {
        self.name = name.to_owned();
        self.noise = noise;
        self
    }

    fn natural(&self, c: &Configuration) -> Result<Vec<f64>> {
        self.space.validate(c)?;
        Ok(self.space.params().iter().map(|p| c.get(&p.name).expect("validated")).collect())
    }

    pub fn eval_noiseless(&self, c: &Configuration) -> Result<f64> {
        Ok((self.f)(&self.natural(c)?))
    }

    /// Noise standard deviation at `c`.
    pub fn noise_std(&self, c: &Configuration) -> Result<f64> {
        Ok(match &self.noise {
            NoiseKind::None => 0.0,
            NoiseKind::Homoscedastic(s) => *s,
            NoiseKind::Heteroscedastic { base, slope, minimizers } => {
                let u = self.space.encode(c)?;
                let dist = minimizers
                    .iter()
                    .map(|m| m.iter().zip(&u).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
                    .fold(f64::INFINITY, f64::min);
                base + slope * dist
            }
        })
    }

    /// One noisy loss evaluation.
    pub fn eval<R: Rng + ?Sized>(&self, c: &Configuration, rng: &mut R) -> Result<f64> {
        let clean = self.eval_noiseless(c)?;
        let s = self.noise_std(c)?;
        if s == 0.0 {
            return Ok(clean);
        }
        let z: f64 = StandardNormal.sample(rng);
        Ok(clean + s * z)
    }
}

pub const BRANIN_MIN: f64 = 0.397_887_357_729_738;
const BRANIN_MINIMIZERS: [[f64; 2]; 3] = [[-PI, 12.275], [PI, 2.275], [9.424_777_960_769_38, 2.475]];

pub fn branin(x: &[f64]) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    let b = 5.1 / (4.0 * PI * PI);
    let c = 5.0 / PI;
    let t = 1.0 / (8.0 * PI);
    (x2 - b * x1 * x1 + c * x1 - 6.0).powi(2) + 10.0 * (1.0 - t) * x1.cos() + 10.0
}

const HARTMANN_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];
const HARTMANN_A: [[f64; 6]; 4] = [
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
];
const HARTMANN_P: [[f64; 6]; 4] = [
    [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
    [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
    [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
    [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
];
pub const HARTMANN6_ARGMIN: [f64; 6] = [0.201_689_52, 0.150_010_69, 0.476_873_98, 0.275_332_43, 0.311_651_62, 0.657_300_54];
/// Offset making the Hartmann-6 loss non-negative: `loss = H(x) + 3.32237`.
pub const HARTMANN6_OFFSET: f64 = 3.32237;

fn hartmann6_raw(x: &[f64]) -> f64 {
    -(0..4)
        .map(|i| HARTMANN_ALPHA[i] * (-(0..6).map(|j| HARTMANN_A[i][j] * (x[j] - HARTMANN_P[i][j]).powi(2)).sum::<f64>()).exp())
        .sum::<f64>()
}

pub fn hartmann6(x: &[f64]) -> f64 {
    hartmann6_raw(x) + HARTMANN6_OFFSET
}

pub fn levy(x: &[f64]) -> f64 {
    let w: Vec<f64> = x.iter().map(|v| 1.0 + (v - 1.0) / 4.0).collect();
    let d = w.len();
    let mut s = (PI * w[0]).sin().powi(2);
    for wi in &w[..d - 1] {
        s += (wi - 1.0).powi(2) * (1.0 + 10.0 * (PI * wi + 1.0).sin().powi(2));
    }
    s + (w[d - 1] - 1.0).powi(2) * (1.0 + (2.0 * PI * w[d - 1]).sin().powi(2))
}

/// Rapid oscillation near 0.9 and a gentle slope elsewhere.
pub fn nonstationary1d(x: &[f64]) -> f64 {
    let z = x[0] - 0.9;
    (30.0 * z.powi(4)).sin() * (2.0 * z).cos() + z / 2.0
}

/// Global minimum of [`nonstationary1d`] on `[0, 1]`: dense grid, then Brent around the best cell.
pub fn nonstationary1d_min() -> f64 {
    let n: usize = 100_000;
    let f = |x: f64| nonstationary1d(&[x]);
    let best = (0..=n).min_by(|&a, &b| f(a as f64 / n as f64).total_cmp(&f(b as f64 / n as f64))).expect("non-empty grid");
    let lo = (best.saturating_sub(1)) as f64 / n as f64;
    let hi = ((best + 1).min(n)) as f64 / n as f64;
    brent_minimize(f, lo, hi, 1e-12).1.min(f(best as f64 / n as f64))
}

pub const BRANIN_MIXED_LEVELS: i64 = 20;

fn branin_level(i: f64) -> f64 {
    -5.0 + 15.0 * i / (BRANIN_MIXED_LEVELS - 1) as f64
}

/// Branin with `x1` restricted to 20 evenly spaced levels.
pub fn branin_mixed(x: &[f64]) -> f64 {
    branin(&[branin_level(x[0]), x[1]])
}

/// Exact optimum of [`branin_mixed`]: for each level the quadratic in `x2`
/// is minimised in closed form (clamped to `[0, 15]`).
pub fn branin_mixed_min() -> f64 {
    let b = 5.1 / (4.0 * PI * PI);
    let c = 5.0 / PI;
    (0..BRANIN_MIXED_LEVELS)
        .map(|i| {
            let x1 = branin_level(i as f64);
            let x2 = (b * x1 * x1 - c * x1 + 6.0).clamp(0.0, 15.0);
            branin(&[x1, x2])
        })
        .fold(f64::INFINITY, f64::min)
}

fn space(params: Vec<Parameter>) -> DesignSpace {
    DesignSpace::new(params).expect("builtin spaces are valid")
}

fn hetero(space: &DesignSpace, minimizers: &[Vec<f64>]) -> NoiseKind {
    let encoded = minimizers
        .iter()
        .map(|m| m.iter().zip(space.params()).map(|(v, p)| p.encode_value(*v)).collect())
        .collect();
    NoiseKind::Heteroscedastic { base: 0.05, slope: 0.5, minimizers: encoded }
}

/// Every builtin function, in a fixed order.
pub fn builtin_functions() -> Vec<BlackBox> {
    let real = |n: &str, lo, hi| Parameter::real(n, lo, hi).expect("valid parameter");
    let branin_space = space(vec![real("x1", -5.0, 10.0), real("x2", 0.0, 15.0)]);
    let branin_bb = BlackBox::new("branin", branin_space.clone(), branin, Some(BRANIN_MIN));
    let branin_minimizers: Vec<Vec<f64>> = BRANIN_MINIMIZERS.iter().map(|m| m.to_vec()).collect();
    let branin_hetero = branin_bb.clone().with_noise("branin_hetero", hetero(&branin_space, &branin_minimizers));

    let h_space = space((1..=6).map(|i| real(&format!("x{i}"), 0.0, 1.0)).collect());
    let h_bb = BlackBox::new("hartmann6", h_space.clone(), hartmann6, Some(hartmann6(&HARTMANN6_ARGMIN)));
    let h_hetero = h_bb.clone().with_noise("hartmann6_hetero", hetero(&h_space, &[HARTMANN6_ARGMIN.to_vec()]));

    let levy_space = space((1..=10).map(|i| real(&format!("x{i}"), -10.0, 10.0)).collect());
    let ns_space = space(vec![real("x", 0.0, 1.0)]);
    let mixed_space =
        space(vec![Parameter::integer("level", 0, BRANIN_MIXED_LEVELS - 1).expect("valid parameter"), real("x2", 0.0, 15.0)]);

    vec![
        branin_bb,
        branin_hetero,
        h_bb,
        h_hetero,
        BlackBox::new("levy10", levy_space, levy, Some(0.0)),
        BlackBox::new("nonstationary1d", ns_space, nonstationary1d, Some(nonstationary1d_min())),
        BlackBox::new("branin_mixed", mixed_space, branin_mixed, Some(branin_mixed_min())),
    ]
}

pub fn lookup(name: &str) -> Result<BlackBox> {
    builtin_functions()
        .into_iter()
        .find(|b| b.name == name)
        .ok_or_else(|| Error::Config(format!("unknown function `{name}`")))
}
