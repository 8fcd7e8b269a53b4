//! Random truncated elements of U(gl_n)[[ħ]] for property sweeps.
#![allow(dead_code)]

use hbar_quantum::{PbwContext, PbwElement, PbwTensor, TensorSeries};
use lie_core::mat::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn coef(rng: &mut ChaCha8Rng) -> C64 {
    // small integers keep every reduction exact
    C64::new(rng.random_range(-3..=3) as f64, rng.random_range(-3..=3) as f64)
}

/// A random element of filtration degree ≤ `deg`, built from random words.
pub fn random_element(rng: &mut ChaCha8Rng, ctx: &PbwContext, deg: usize) -> PbwElement {
    let mut x = PbwElement::zero();
    for _ in 0..3 {
        let len = rng.random_range(0..=deg);
        let word: Vec<usize> = (0..len).map(|_| rng.random_range(0..ctx.num_generators())).collect();
        x = x.add(&ctx.normal_form(&word, coef(rng)).unwrap());
    }
    // make sure the top degree is present
    if deg > 0 && x.degree() < deg {
        let word: Vec<usize> = (0..deg).map(|_| rng.random_range(0..ctx.num_generators())).collect();
        x = x.add(&ctx.normal_form(&word, C64::new(1.0, 0.0)).unwrap());
    }
    x
}

/// Σ_{m≤order} ħ^m x_m with deg x_m drawn from `degs(m)`.
pub fn random_series(rng: &mut ChaCha8Rng, ctx: &PbwContext, order: usize, uprime: Option<bool>) -> TensorSeries {
    let coeffs = (0..=order)
        .map(|m| {
            let d = match uprime {
                Some(true) => rng.random_range(0..=m.min(ctx.cap)),
                _ => rng.random_range(0..=ctx.cap),
            };
            PbwTensor::from_element(&random_element(rng, ctx, d))
        })
        .collect();
    TensorSeries::from_hbar(ctx, coeffs).unwrap()
}
