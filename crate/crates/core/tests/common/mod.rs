#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};

/// GARCH(1,1): `s2_t = omega + alpha r_{t-1}^2 + beta s2_{t-1}`,
/// `r_t = sqrt(s2_t) z_t` with standard normal `z_t`. `omega` is chosen for
/// unit unconditional variance; the first 1000 draws are discarded.
pub fn garch(alpha: f64, beta: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = 1.0 - alpha - beta;
    let (mut s2, mut r) = (1.0f64, 0.0f64);
    let burn = 1000;
    let mut out = Vec::with_capacity(n);
    for i in 0..n + burn {
        s2 = omega + alpha * r * r + beta * s2;
        let z: f64 = StandardNormal.sample(&mut rng);
        r = s2.sqrt() * z;
        if i >= burn {
            out.push(r);
        }
    }
    out
}

pub fn gaussian(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

pub fn student_t(dof: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = StudentT::new(dof).unwrap();
    (0..n).map(|_| t.sample(&mut rng)).collect()
}

/// Fisher-Yates shuffle with its own seeded stream.
pub fn shuffled(x: &[f64], seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = x.to_vec();
    for i in (1..v.len()).rev() {
        let j = rng.random_range(0..=i);
        v.swap(i, j);
    }
    v
}
