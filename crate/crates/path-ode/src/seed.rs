//! Formal solutions used to seed transports.
//!
//! At z = 0 (irregular, A diagonal regular): Γ = ĥ(z) e^{-A/z} z^{[B]},
//! ĥ = Σ h_k z^k with h_0 = 1.
//! At z = ∞ (regular singular, non-resonant B): γ = ĝ(z) z^B,
//! ĝ = Σ g_k z^{-k} with g_0 = 1.

use crate::PathPoint;
use lie_core::mat::{self, CMat, C64};
use lie_core::CartanElement;
use nalgebra::DVector;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeedError {
    #[error("A is not regular: minimal eigenvalue gap {gap:e}")]
    NonRegularA { gap: f64 },
    #[error("formal recursion inconsistent at order {order}: diagonal residual {residual:e}")]
    RecursionInconsistent { order: usize, residual: f64 },
    #[error("B is resonant: eigenvalue difference {diff} is a nonzero integer")]
    ResonantB { diff: i64 },
    #[error("series at infinity did not converge at |z| = {modulus}")]
    NoConvergence { modulus: f64 },
}

const REGULARITY_TOL: f64 = 1e-12;
const RESONANCE_TOL: f64 = 1e-8;

/// Coefficients h_0..=h_m of the formal solution at 0.
pub fn formal_series_zero(a: &CartanElement, b: &CMat, m: usize) -> Result<Vec<CMat>, SeedError> {
    let n = a.n();
    let scale = a.entries.iter().fold(1.0f64, |s, x| s.max(x.norm()));
    let gap = a.min_gap();
    if n > 1 && gap <= REGULARITY_TOL * scale {
        return Err(SeedError::NonRegularA { gap });
    }
    let lam = mat::diag(&mat::diag_of(b));
    let bscale = mat::max_abs(b).max(1.0);
    let mut h = vec![mat::eye(n)];
    for k in 1..=m {
        let prev = &h[k - 1];
        let rhs = prev * C64::new((k - 1) as f64, 0.0) + prev * &lam - b * prev;
        let dres = (0..n).fold(0.0f64, |s, i| s.max(rhs[(i, i)].norm()));
        let size = mat::max_abs(prev).max(1.0) * bscale * k as f64;
        if dres > 1e-9 * size {
            return Err(SeedError::RecursionInconsistent { order: k, residual: dres });
        }
        let mut hk = CMat::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(0.0, 0.0)
            } else {
                rhs[(i, j)] / (a.entries[i] - a.entries[j])
            }
        });
        for i in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for l in 0..n {
                if l != i {
                    s += b[(i, l)] * hk[(l, i)];
                }
            }
            hk[(i, i)] = s / k as f64;
        }
        h.push(hk);
    }
    Ok(h)
}

/// Partial sum Σ_{k≤m} h_k z^k.
pub fn eval_series_zero(h: &[CMat], z: C64) -> CMat {
    let mut acc = h.last().unwrap().clone();
    for hk in h.iter().rev().skip(1) {
        acc = acc * z + hk;
    }
    acc
}

/// Modulus at which the last kept term of column `col` (or of the whole
/// series) drops below 1e-2·abs_tol, capped so that successive terms still
/// decrease.
pub fn seed_modulus(h: &[CMat], col: Option<usize>, abs_tol: f64) -> f64 {
    let norm = |m: &CMat| match col {
        Some(j) => m.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        None => mat::frob(m),
    };
    let m = h.len() - 1;
    if m == 0 {
        return 1.0;
    }
    let last = norm(&h[m]);
    let mut rho = if last > 0.0 { (1e-2 * abs_tol / last).powf(1.0 / m as f64) } else { 1.0 };
    for k in 1..=m {
        let (p, q) = (norm(&h[k - 1]), norm(&h[k]));
        if q > 0.0 && p > 0.0 {
            rho = rho.min(0.5 * p / q);
        }
    }
    rho.min(1.0)
}

/// ĥ_m(z0) e^{-A/z0} z0^{[B]} on the sheet of `z0`.
pub fn seed_irregular(a: &CartanElement, b: &CMat, z0: &PathPoint, m: usize) -> Result<CMat, SeedError> {
    let h = formal_series_zero(a, b, m)?;
    Ok(seed_irregular_with(&h, a, b, z0))
}

pub fn seed_irregular_with(h: &[CMat], a: &CartanElement, b: &CMat, z0: &PathPoint) -> CMat {
    let z = z0.z();
    let lz = z0.ln();
    let f: Vec<C64> = (0..a.n()).map(|i| (-a.entries[i] / z + b[(i, i)] * lz).exp()).collect();
    eval_series_zero(h, z) * mat::diag(&f)
}

fn check_resonance(b: &CMat) -> Result<(), SeedError> {
    let ev = mat::eigenvalues(b);
    for (i, x) in ev.iter().enumerate() {
        for y in ev.iter().skip(i + 1) {
            if let Some(k) = mat::near_nonzero_integer(x - y, RESONANCE_TOL) {
                return Err(SeedError::ResonantB { diff: k });
            }
        }
    }
    Ok(())
}

/// Coefficients g_0..=g_m of the convergent solution at ∞:
/// (ad_B + k) g_k = -A g_{k-1}.
pub fn formal_series_infinity(a: &CartanElement, b: &CMat, m: usize) -> Result<Vec<CMat>, SeedError> {
    check_resonance(b)?;
    let n = a.n();
    let am = a.to_matrix();
    let id = mat::eye(n);
    // column-major vec: vec(BX - XB) = (I⊗B - Bᵀ⊗I) vec X
    let adb = id.kronecker(b) - b.transpose().kronecker(&id);
    let mut g = vec![id.clone()];
    for k in 1..=m {
        let sys = &adb + CMat::identity(n * n, n * n) * C64::new(k as f64, 0.0);
        let rhs = -(&am * &g[k - 1]);
        let v = DVector::from_iterator(n * n, rhs.iter().copied());
        let x = sys.lu().solve(&v).ok_or(SeedError::ResonantB { diff: -(k as i64) })?;
        g.push(CMat::from_iterator(n, n, x.iter().copied()));
    }
    Ok(g)
}

/// ĝ(z0) z0^B, summing until terms fall below 1e-17 of the partial sum.
pub fn seed_regular_infinity(a: &CartanElement, b: &CMat, z0: &PathPoint) -> Result<CMat, SeedError> {
    check_resonance(b)?;
    let n = a.n();
    let am = a.to_matrix();
    let id = mat::eye(n);
    let adb = id.kronecker(b) - b.transpose().kronecker(&id);
    let w = C64::new(1.0, 0.0) / z0.z();
    let mut gk = id.clone();
    let mut sum = id.clone();
    let mut wk = C64::new(1.0, 0.0);
    let mut small = 0;
    for k in 1..2000 {
        let sys = &adb + CMat::identity(n * n, n * n) * C64::new(k as f64, 0.0);
        let rhs = -(&am * &gk);
        let v = DVector::from_iterator(n * n, rhs.iter().copied());
        let x = sys.lu().solve(&v).ok_or(SeedError::ResonantB { diff: -(k as i64) })?;
        gk = CMat::from_iterator(n, n, x.iter().copied());
        wk *= w;
        let term = &gk * wk;
        let tn = mat::frob(&term);
        sum += term;
        if tn <= 1e-17 * mat::frob(&sum) {
            small += 1;
            if small >= 3 {
                return Ok(sum * z0.mat_pow(b));
            }
        } else {
            small = 0;
        }
    }
    Err(SeedError::NoConvergence { modulus: z0.modulus })
}
