//! First-order (Born) oracle for Stokes matrices when B is off-diagonal.
//!
//! To first order in B, column j of γ_θ is e^{−a_j/z}(e_j + x), where
//! e^{d/z}x_k(z) = B_kj ∫ e^{d/t} dt/t, d = a_k − a_j, integrated from t = 0
//! along the direction where e^{d/t} decays (the representative of arg(−d)
//! nearest θ) and then round an arc to z. Differences of these integrals give
//! the off-diagonal entries of S± to first order.
#![allow(dead_code)]

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

const GL_NODES: [f64; 10] = [
    -0.973_906_528_517_171_7,
    -0.865_063_366_688_984_5,
    -0.679_409_568_299_024_4,
    -0.433_395_394_129_247_2,
    -0.148_874_338_981_631_2,
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_WEIGHTS: [f64; 10] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
    0.295_524_224_714_752_87,
    0.269_266_719_309_996_35,
    0.219_086_362_515_982_04,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_14,
];

/// Composite 10-point Gauss–Legendre on [lo, hi] with `panels` panels.
pub fn gauss<F: Fn(f64) -> C64>(f: F, lo: f64, hi: f64, panels: usize) -> C64 {
    let h = (hi - lo) / panels as f64;
    let mut s = C64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * h;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
            s += f(mid + 0.5 * h * x) * (0.5 * h * w);
        }
    }
    s
}

fn rep_near(angle: f64, center: f64) -> f64 {
    angle + 2.0 * PI * ((center - angle) / (2.0 * PI)).round()
}

/// ∫ e^{d/t} dt/t from 0 (in the decaying direction chosen for the ray at
/// angle `phi`) out to radius `r`, then along the arc to argument `end_arg`.
pub fn born_integral(d: C64, phi: f64, r: f64, end_arg: f64) -> C64 {
    let theta0 = rep_near((-d).arg(), phi);
    // radial part in u = 1/ρ: ∫_{1/r}^∞ e^{c u} du/u with Re c = −|d|
    let c = d * C64::from_polar(1.0, -theta0);
    let u0 = 1.0 / r;
    let span = 45.0 / (-c.re);
    let radial = gauss(|v| (c * (u0 + v)).exp() / (u0 + v), 0.0, span, 400);
    // arc part: dt/t = i dφ
    let arc = gauss(|p| (d * C64::from_polar(1.0 / r, -p)).exp() * C64::new(0.0, 1.0), theta0, end_arg, 400);
    radial + arc
}

/// First-order S₊ and S₋ entries (k, j) for the default geometry (ray −π/2,
/// cut π): coefficients multiplying B_kj.
pub fn born_entries(ak: C64, aj: C64) -> (C64, C64) {
    let d = ak - aj;
    let r = 1.0;
    let plus = born_integral(d, -PI / 2.0, r, 0.0) - born_integral(d, PI / 2.0, r, 0.0);
    let minus = born_integral(d, PI / 2.0, r, PI) - born_integral(d, -PI / 2.0, r, -PI);
    (plus, minus)
}
