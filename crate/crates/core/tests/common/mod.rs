#![allow(dead_code)]

use chebyshev_lowrank::{seed, Matrix};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn gaussian(rows: usize, cols: usize, seed_value: u64) -> Matrix {
    let mut rng = seed::rng(seed_value);
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vec(n: usize, seed_value: u64) -> Vec<f64> {
    let mut rng = seed::rng(seed_value);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn rel_diff(x: f64, y: f64) -> f64 {
    (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE)
}
