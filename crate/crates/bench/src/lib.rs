//! Fixtures shared by the benchmarks.

use rand::Rng;

use hebo_core::rng::rng_from;
use hebo_core::{InputWarp, KernelParams};

/// `n` uniform points in `[0, 1]^d` labelled by a smooth, mildly anisotropic surface.
pub fn training_set(n: usize, d: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = rng_from(seed, &[]);
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
    let y = x.iter().map(|r| surface(r)).collect();
    (x, y)
}

pub fn surface(u: &[f64]) -> f64 {
    u.iter().enumerate().map(|(k, v)| ((k + 1) as f64 * 3.0 * v).sin() / (k + 1) as f64).sum()
}

pub fn kernel_fixture(d: usize) -> (KernelParams, InputWarp) {
    let ls: Vec<f64> = (0..d).map(|k| 0.3 + 0.1 * k as f64).collect();
    let warp = InputWarp::new(vec![1.5; d], vec![0.7; d]).expect("positive shapes");
    (KernelParams::new(&ls, 1.0, 1e-3), warp)
}

/// ZDT1 in maximisation form, `d >= 2`.
pub fn zdt1(x: &[f64]) -> Vec<f64> {
    let g = 1.0 + 9.0 * x[1..].iter().sum::<f64>() / (x.len() - 1) as f64;
    vec![-x[0], -g * (1.0 - (x[0] / g).sqrt())]
}
