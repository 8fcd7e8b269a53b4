//! Random (A, B) instances for the sweeps: A in the negated fundamental
//! chamber (increasing real entries, gaps ≥ 0.5), B complex with
//! ‖B‖_F ≤ 0.5 and non-resonant.
#![allow(dead_code)]

use lie_core::mat::{self, CMat, C64};
use lie_core::CartanElement;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_a<R: Rng>(rng: &mut R, n: usize) -> CartanElement {
    let mut a = Vec::with_capacity(n);
    let mut x = rng.random_range(-3.0..-1.0);
    for _ in 0..n {
        a.push(x);
        x += rng.random_range(0.5..1.5);
    }
    CartanElement::real(&a)
}

pub fn random_b<R: Rng>(rng: &mut R, n: usize, max_norm: f64) -> CMat {
    loop {
        let mut b = mat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                b[(i, j)] = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        let target = rng.random_range(0.1..max_norm);
        b *= C64::new(target / mat::frob(&b), 0.0);
        let ev = mat::eigenvalues(&b);
        let resonant = ev.iter().any(|x| ev.iter().any(|y| mat::near_nonzero_integer(x - y, 1e-3).is_some()));
        if !resonant {
            return b;
        }
    }
}
