//! Numerical evaluation of canonical solutions on the universal cover.
//!
//! `gamma(phi, w)` is the solution asymptotic to ĥ e^{-A/z} z^{[B]} on the
//! half-plane bisected by the ray at angle `phi`, with log z read off the
//! continuous argument (so phi and phi + 2π differ by e^{2πi[B]} on the
//! right).
//!
//! Each column is seeded separately at small modulus in the direction where
//! it is most recessive relative to every other column, then transported in
//! the rescaled form u = y·e^{a_j/z}z^{-b_jj}. A column whose admissible seed
//! window is narrower than π would amplify rounding exponentially, so in that
//! case the adjoint system (−A, −Bᵀ), whose windows are the antipodal ones,
//! is solved instead and inverted.

use crate::StokesError;
use lie_core::mat::{self, CMat, C64};
use lie_core::CartanElement;
use path_ode::{eval_series_zero, formal_series_zero, integrate_linear, seed_modulus, IntegratorConfig, Path, PathPoint};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StokesConfig {
    pub integrator: IntegratorConfig,
    /// Truncation order of the seed at 0.
    pub seed_order: usize,
    /// Multiplier on the adaptive seed modulus (for self-consistency runs).
    pub seed_scale: f64,
}

impl Default for StokesConfig {
    fn default() -> Self {
        Self { integrator: IntegratorConfig::default(), seed_order: 8, seed_scale: 1.0 }
    }
}

/// Seed direction for column j and its conditioning: cos of half the window
/// width (≤ 0 means no exponential amplification).
pub(crate) fn column_window(a: &[C64], j: usize, phi: f64) -> (f64, f64) {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (k, ak) in a.iter().enumerate() {
        if k == j {
            continue;
        }
        let s = (ak - a[j]).arg();
        let l = s + 2.0 * PI * ((phi - s) / (2.0 * PI)).floor();
        lo = lo.max(l);
        hi = hi.min(l + 2.0 * PI);
    }
    if !lo.is_finite() {
        return (phi, -1.0);
    }
    (0.5 * (lo + hi), (0.5 * (hi - lo)).cos())
}

pub(crate) fn badness(a: &[C64], phi: f64) -> f64 {
    (0..a.len()).map(|j| column_window(a, j, phi).1).fold(f64::NEG_INFINITY, f64::max)
}

pub(crate) struct Engine {
    a: CartanElement,
    b: CMat,
    cfg: StokesConfig,
}

impl Engine {
    pub fn new(a: &CartanElement, b: &CMat, cfg: &StokesConfig) -> Self {
        Self { a: a.clone(), b: b.clone(), cfg: *cfg }
    }

    fn mid_radius(&self) -> f64 {
        let e = &self.a.entries;
        let mut r = 1.0f64;
        for x in e {
            for y in e {
                r = r.max((x - y).norm());
            }
        }
        r
    }

    /// Γ^φ(w) and the conditioning figure of the chosen scheme.
    pub fn gamma(&self, phi: f64, w: &PathPoint) -> Result<(CMat, f64), StokesError> {
        let direct = badness(&self.a.entries, phi);
        let neg: Vec<C64> = self.a.entries.iter().map(|x| -x).collect();
        let adjoint = badness(&neg, phi);
        if direct <= 1e-12 || direct <= adjoint {
            Ok((self.columns(&self.a, &self.b, phi, w)?, direct))
        } else {
            let a2 = CartanElement::new(neg);
            let b2 = -self.b.transpose();
            let g = self.columns(&a2, &b2, phi, w)?;
            let inv = mat::inv(&g).ok_or(StokesError::Singular)?;
            Ok((inv.transpose(), adjoint))
        }
    }

    fn columns(&self, a: &CartanElement, b: &CMat, phi: f64, w: &PathPoint) -> Result<CMat, StokesError> {
        let n = a.n();
        let h = formal_series_zero(a, b, self.cfg.seed_order)?;
        let am = a.to_matrix();
        let rho_mid = self.mid_radius();
        let mut out = mat::zeros(n);
        for j in 0..n {
            let (theta0, _) = column_window(&a.entries, j, phi);
            let rho0 = seed_modulus(&h, Some(j), self.cfg.integrator.abs_tol) * self.cfg.seed_scale;
            let z0 = PathPoint::new(rho0.min(rho_mid), theta0);
            let u0 = eval_series_zero(&h, z0.z()).columns(j, 1).into_owned();
            let path = Path::starting_at(z0).radial_to(rho_mid).arc_to(w.arg).radial_to(w.modulus);
            let aj = a.entries[j];
            let bj = b[(j, j)];
            let shift_a = &am - mat::eye(n) * aj;
            let shift_b = b - mat::eye(n) * bj;
            let m = |p: &PathPoint| {
                let z = p.z();
                Some(&shift_a / (z * z) + &shift_b / z)
            };
            let u = integrate_linear(m, &path, &u0, &self.cfg.integrator)?;
            let f = (-aj / w.z() + bj * w.ln()).exp();
            out.set_column(j, &(u.column(0) * f));
        }
        Ok(out)
    }

    /// γ_∞(w) = ĝ(w) w^B continued along the ray through w from large modulus.
    pub fn gamma_infinity(&self, w: &PathPoint) -> Result<CMat, StokesError> {
        let big = 4.0 * self.a.entries.iter().fold(1.0f64, |m, x| m.max(x.norm()));
        let r_inf = big.max(4.0 * w.modulus);
        let p0 = PathPoint::new(r_inf, w.arg);
        let y0 = path_ode::seed_regular_infinity(&self.a, &self.b, &p0)?;
        let am = self.a.to_matrix();
        let b = self.b.clone();
        let m = |p: &PathPoint| {
            let z = p.z();
            Some(&am / (z * z) + &b / z)
        };
        let path = Path::starting_at(p0).radial_to(w.modulus);
        Ok(integrate_linear(m, &path, &y0, &self.cfg.integrator)?)
    }

    pub fn rho_mid(&self) -> f64 {
        self.mid_radius()
    }
}
