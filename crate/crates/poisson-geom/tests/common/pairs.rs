//! Observable pairs and λ-samples shared by the Poisson-map checks.
#![allow(dead_code)]

use lie_core::mat::{CMat, C64};
use poisson_geom::{DualObservable, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Ten pairs of coordinates (and products of coordinates) of b₊ (lower
/// triangular) and b₋ (upper triangular), covering all four factor orders.
pub fn observable_pairs(n: usize) -> Vec<(DualObservable, DualObservable)> {
    let p = |i, j| DualObservable::coordinate(n, Side::Plus, i, j);
    let m = |i, j| DualObservable::coordinate(n, Side::Minus, i, j);
    let k = n - 1;
    vec![
        (p(1, 0), m(0, 1)),
        (m(0, 1), p(1, 0)),
        (p(0, 0), p(1, 0)),
        (m(0, 0), m(0, 1)),
        (p(1, 0), m(k, k)),
        (m(0, 1), p(0, 0)),
        (p(k, 0).mul(&m(0, k)).unwrap(), p(1, 1)),
        (p(1, 0), p(1, 0).mul(&m(0, 0)).unwrap()),
        (m(0, 1).mul(&m(0, 1)).unwrap(), p(k, k)),
        (p(1, 0).mul(&p(1, 1)).unwrap(), m(0, k)),
    ]
}

/// Complex λ with ‖L‖_F uniform in [0.05, max_norm].
pub fn samples(n: usize, count: usize, max_norm: f64, seed: u64) -> Vec<CMat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let l = CMat::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let target = rng.random_range(0.05..max_norm);
            &l * C64::new(target / l.norm(), 0.0)
        })
        .collect()
}
