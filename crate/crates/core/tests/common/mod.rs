#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two Gaussian blobs in `dim` dimensions with labels in {-1, +1}; `flip` labels are inverted.
pub fn blobs(n: usize, dim: usize, shift: f64, flip: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        let y = if i % 3 == 0 { 1.0 } else { -1.0 };
        let x: Vec<f64> = (0..dim)
            .map(|d| {
                let g: f64 = rng.sample(rand_distr::StandardNormal);
                g + if d == 0 { y * shift } else { 0.0 }
            })
            .collect();
        let y = if rng.random_bool(flip) { -y } else { y };
        xs.push(x);
        ys.push(y);
    }
    (xs, ys)
}

pub fn rows(xs: &[Vec<f64>]) -> Vec<&[f64]> {
    xs.iter().map(Vec::as_slice).collect()
}
