//! Small dense complex matrix helpers shared by every crate.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const TWO_PI_I: C64 = C64::new(0.0, 2.0 * std::f64::consts::PI);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

pub fn unit(n: usize, i: usize, j: usize) -> CMat {
    let mut m = zeros(n);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

pub fn from_rows(rows: &[Vec<C64>]) -> CMat {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMat::from_fn(n, m, |i, j| rows[i][j])
}

pub fn from_real_rows(rows: &[&[f64]]) -> CMat {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMat::from_fn(n, m, |i, j| C64::new(rows[i][j], 0.0))
}

pub fn diag(entries: &[C64]) -> CMat {
    let n = entries.len();
    CMat::from_fn(n, n, |i, j| if i == j { entries[i] } else { C64::new(0.0, 0.0) })
}

pub fn diag_of(m: &CMat) -> Vec<C64> {
    (0..m.nrows()).map(|i| m[(i, i)]).collect()
}

/// `exp(s * d)` for a diagonal given by its entries.
pub fn diag_exp(entries: &[C64], s: C64) -> CMat {
    let e: Vec<C64> = entries.iter().map(|&x| (s * x).exp()).collect();
    diag(&e)
}

pub fn frob(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

pub fn expm(m: &CMat) -> CMat {
    m.clone().exp()
}

pub fn inv(m: &CMat) -> Option<CMat> {
    m.clone().try_inverse()
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn trace(m: &CMat) -> C64 {
    m.trace()
}

/// Eigenvalues of a complex square matrix (QR iteration via Schur form).
pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    let s = nalgebra::linalg::Schur::new(m.clone());
    match s.eigenvalues() {
        Some(v) => v.iter().copied().collect(),
        None => {
            let (_, t) = s.unpack();
            (0..t.nrows()).map(|i| t[(i, i)]).collect()
        }
    }
}

/// True when `z` is within `tol` of a nonzero integer.
pub fn near_nonzero_integer(z: C64, tol: f64) -> Option<i64> {
    let k = z.re.round();
    if k != 0.0 && (z.re - k).abs() < tol && z.im.abs() < tol {
        Some(k as i64)
    } else {
        None
    }
}
