//! Transport of fundamental matrices of linear ODEs along paths in the
//! universal cover of ℂ×, plus formal seeds at z = 0 (irregular) and z = ∞
//! (regular).
//!
//! Points carry a continuous argument, so every branch factor z^c is computed
//! from arithmetic on that argument and never from a cut-plane convention.

mod dop853;
pub mod seed;

use lie_core::mat::{self, CMat, C64};
use thiserror::Error;

pub use seed::{
    eval_series_zero, formal_series_infinity, formal_series_zero, seed_irregular, seed_irregular_with, seed_modulus, seed_regular_infinity,
    SeedError,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathPoint {
    pub modulus: f64,
    pub arg: f64,
}

impl PathPoint {
    pub fn new(modulus: f64, arg: f64) -> Self {
        assert!(modulus > 0.0 && modulus.is_finite(), "modulus must be positive");
        Self { modulus, arg }
    }

    pub fn z(&self) -> C64 {
        C64::from_polar(self.modulus, self.arg)
    }

    /// log z on this sheet.
    pub fn ln(&self) -> C64 {
        C64::new(self.modulus.ln(), self.arg)
    }

    /// z^c on this sheet.
    pub fn pow(&self, c: C64) -> C64 {
        (c * self.ln()).exp()
    }

    /// z^M = exp(M log z) on this sheet.
    pub fn mat_pow(&self, m: &CMat) -> CMat {
        mat::expm(&(m * self.ln()))
    }

    pub fn rotated(&self, dphi: f64) -> Self {
        Self { modulus: self.modulus, arg: self.arg + dphi }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Segment {
    /// Fixed argument, modulus from r0 to r1 (log-uniform parametrisation).
    Radial { arg: f64, r0: f64, r1: f64 },
    /// Fixed modulus, argument from arg0 to arg1.
    Arc { modulus: f64, arg0: f64, arg1: f64 },
    /// Straight chord; must not pass through 0.
    Line { from: PathPoint, to: PathPoint },
}

impl Segment {
    pub fn start(&self) -> PathPoint {
        match *self {
            Segment::Radial { arg, r0, .. } => PathPoint::new(r0, arg),
            Segment::Arc { modulus, arg0, .. } => PathPoint::new(modulus, arg0),
            Segment::Line { from, .. } => from,
        }
    }

    pub fn end(&self) -> PathPoint {
        match *self {
            Segment::Radial { arg, r1, .. } => PathPoint::new(r1, arg),
            Segment::Arc { modulus, arg1, .. } => PathPoint::new(modulus, arg1),
            Segment::Line { to, .. } => to,
        }
    }

    /// Point at parameter s ∈ [0, 1] and dz/ds.
    pub fn eval(&self, s: f64) -> (PathPoint, C64) {
        match *self {
            Segment::Radial { arg, r0, r1 } => {
                let l = (r1 / r0).ln();
                let p = PathPoint::new(r0 * (s * l).exp(), arg);
                (p, p.z() * l)
            }
            Segment::Arc { modulus, arg0, arg1 } => {
                let p = PathPoint::new(modulus, arg0 + s * (arg1 - arg0));
                (p, p.z() * C64::new(0.0, arg1 - arg0))
            }
            Segment::Line { from, to } => {
                let za = from.z();
                let dz = to.z() - za;
                let z = za + dz * s;
                let arg = from.arg + (z / za).arg();
                (PathPoint::new(z.norm(), arg), dz)
            }
        }
    }

    fn valid(&self) -> bool {
        match *self {
            Segment::Radial { r0, r1, .. } => r0 > 0.0 && r1 > 0.0,
            Segment::Arc { modulus, .. } => modulus > 0.0,
            Segment::Line { from, to } => {
                // distance from 0 to the chord must be positive
                let a = from.z();
                let b = to.z();
                let d = b - a;
                let t = if d.norm_sqr() > 0.0 { (-(a.conj() * d).re / d.norm_sqr()).clamp(0.0, 1.0) } else { 0.0 };
                let closest = (a + d * t).norm();
                let swept = (b / a).arg() + from.arg - to.arg;
                closest > 0.0 && swept.abs() < 1e-9
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Path {
    pub segments: Vec<Segment>,
}

impl Path {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(mut self, seg: Segment) -> Self {
        self.segments.push(seg);
        self
    }

    pub fn end(&self) -> Option<PathPoint> {
        self.segments.last().map(|s| s.end())
    }

    /// Radial segment from the current end to modulus `r`.
    pub fn radial_to(self, r: f64) -> Self {
        let e = self.end().expect("path has no start");
        if (e.modulus - r).abs() <= 1e-15 * r {
            return self;
        }
        self.push(Segment::Radial { arg: e.arg, r0: e.modulus, r1: r })
    }

    /// Arc from the current end to argument `arg`.
    pub fn arc_to(self, arg: f64) -> Self {
        let e = self.end().expect("path has no start");
        if e.arg == arg {
            return self;
        }
        self.push(Segment::Arc { modulus: e.modulus, arg0: e.arg, arg1: arg })
    }

    /// Starts a path at `p` with a degenerate marker segment.
    pub fn starting_at(p: PathPoint) -> Self {
        Self { segments: vec![Segment::Arc { modulus: p.modulus, arg0: p.arg, arg1: p.arg }] }
    }

    pub fn concat(mut self, other: &Path) -> Self {
        self.segments.extend(other.segments.iter().copied());
        self
    }

    pub fn reversed(&self) -> Path {
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|s| match *s {
                Segment::Radial { arg, r0, r1 } => Segment::Radial { arg, r0: r1, r1: r0 },
                Segment::Arc { modulus, arg0, arg1 } => Segment::Arc { modulus, arg0: arg1, arg1: arg0 },
                Segment::Line { from, to } => Segment::Line { from: to, to: from },
            })
            .collect();
        Path { segments }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scheme {
    /// Embedded Dormand–Prince 8(5,3) with adaptive steps.
    Dop853,
    /// Classical fixed-step RK4 with the given number of steps per segment.
    Rk4 { steps: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest step in the segment parameter (each segment spans [0, 1]).
    pub max_step: f64,
    pub scheme: Scheme,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-13, abs_tol: 1e-15, max_step: 0.1, scheme: Scheme::Dop853 }
    }
}

impl IntegratorConfig {
    pub fn with_tol(rel_tol: f64, abs_tol: f64) -> Self {
        Self { rel_tol, abs_tol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), OdeError> {
        let ok = |t: f64| t > 0.0 && t <= 1e-3;
        if !ok(self.rel_tol) || !ok(self.abs_tol) || self.max_step <= 0.0 {
            return Err(OdeError::InvalidConfig);
        }
        if let Scheme::Rk4 { steps } = self.scheme {
            if steps == 0 {
                return Err(OdeError::InvalidConfig);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("adaptive step fell below representable size at s = {s} on segment {segment}")]
    StepUnderflow { segment: usize, s: f64 },
    #[error("coefficient map failed at z = {modulus}·e^(i·{arg})")]
    SingularOnPath { modulus: f64, arg: f64 },
    #[error("tolerances must lie in (0, 1e-3] and steps must be positive")]
    InvalidConfig,
    #[error("segment {0} passes through 0 or is malformed")]
    InvalidPath(usize),
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Transports Y along `path` for dY/dz = M(z) Y.
pub fn integrate_linear<F>(m: F, path: &Path, y0: &CMat, cfg: &IntegratorConfig) -> Result<CMat, OdeError>
where
    F: Fn(&PathPoint) -> Option<CMat>,
{
    integrate_linear_stats(m, path, y0, cfg).map(|(y, _)| y)
}

pub fn integrate_linear_stats<F>(m: F, path: &Path, y0: &CMat, cfg: &IntegratorConfig) -> Result<(CMat, Stats), OdeError>
where
    F: Fn(&PathPoint) -> Option<CMat>,
{
    cfg.validate()?;
    let mut y = y0.clone();
    let mut stats = Stats::default();
    for (k, seg) in path.segments.iter().enumerate() {
        if !seg.valid() {
            return Err(OdeError::InvalidPath(k));
        }
        if seg.start() == seg.end() {
            continue;
        }
        let rhs = |s: f64, y: &CMat| -> Result<CMat, OdeError> {
            let (p, dz) = seg.eval(s);
            let mz = m(&p).ok_or(OdeError::SingularOnPath { modulus: p.modulus, arg: p.arg })?;
            Ok((mz * dz) * y)
        };
        y = match cfg.scheme {
            Scheme::Dop853 => dop853_solve(rhs, 0.0, 1.0, y, cfg, k, &mut stats)?,
            Scheme::Rk4 { steps } => {
                let h = 1.0 / steps as f64;
                let mut y = y;
                for i in 0..steps {
                    y = rk4_step(&rhs, i as f64 * h, &y, h)?;
                }
                stats.accepted += steps;
                y
            }
        };
    }
    Ok((y, stats))
}

/// One classical RK4 step for a matrix-valued ODE.
pub fn rk4_step<F, E>(f: &F, t: f64, y: &CMat, h: f64) -> Result<CMat, E>
where
    F: Fn(f64, &CMat) -> Result<CMat, E>,
{
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &(y + &k1 * C64::new(0.5 * h, 0.0)))?;
    let k3 = f(t + 0.5 * h, &(y + &k2 * C64::new(0.5 * h, 0.0)))?;
    let k4 = f(t + h, &(y + &k3 * C64::new(h, 0.0)))?;
    let w = C64::new(h / 6.0, 0.0);
    Ok(y + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * w)
}

const MAX_ATTEMPTS: usize = 2_000_000;

/// Adaptive DOP853 on [t0, t1] for a matrix state.
pub fn dop853_solve<F>(
    f: F,
    t0: f64,
    t1: f64,
    y0: CMat,
    cfg: &IntegratorConfig,
    segment: usize,
    stats: &mut Stats,
) -> Result<CMat, OdeError>
where
    F: Fn(f64, &CMat) -> Result<CMat, OdeError>,
{
    use dop853::{A, B, C, E3, E5, STAGES};
    let span = t1 - t0;
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut k: Vec<CMat> = Vec::with_capacity(STAGES);
    let mut f0 = f(t, &y)?;
    let scale_of = |y: &CMat, yn: &CMat| -> CMat {
        CMat::from_fn(y.nrows(), y.ncols(), |i, j| {
            C64::new(cfg.abs_tol + cfg.rel_tol * y[(i, j)].norm().max(yn[(i, j)].norm()), 0.0)
        })
    };
    // initial step from the norms of y and f
    let d0 = mat::frob(&y).max(1e-300);
    let d1 = mat::frob(&f0).max(1e-300);
    let mut h = (0.01 * d0 / d1).min(cfg.max_step).min(span.abs()).max(1e-6 * span.abs());
    let size = (y.nrows() * y.ncols()) as f64;
    let mut attempts = 0usize;
    loop {
        attempts += 1;
        if attempts > MAX_ATTEMPTS {
            return Err(OdeError::StepUnderflow { segment, s: t });
        }
        let remaining = (t1 - t) * dir;
        if remaining <= 0.0 {
            break;
        }
        h = h.min(remaining).min(cfg.max_step);
        let min_step = 10.0 * f64::EPSILON * t.abs().max(1.0);
        if h < min_step {
            return Err(OdeError::StepUnderflow { segment, s: t });
        }
        let hs = h * dir;
        k.clear();
        k.push(f0.clone());
        for s in 1..STAGES {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                let a = A[s][j];
                if a != 0.0 {
                    ys += kj * C64::new(hs * a, 0.0);
                }
            }
            k.push(f(t + C[s] * hs, &ys)?);
        }
        let mut y_new = y.clone();
        let mut e3 = CMat::zeros(y.nrows(), y.ncols());
        let mut e5 = CMat::zeros(y.nrows(), y.ncols());
        for (s, ks) in k.iter().enumerate() {
            if B[s] != 0.0 {
                y_new += ks * C64::new(hs * B[s], 0.0);
            }
            if E3[s] != 0.0 {
                e3 += ks * C64::new(E3[s], 0.0);
            }
            if E5[s] != 0.0 {
                e5 += ks * C64::new(E5[s], 0.0);
            }
        }
        let sc = scale_of(&y, &y_new);
        let mut n5 = 0.0;
        let mut n3 = 0.0;
        for ((a5, a3), w) in e5.iter().zip(e3.iter()).zip(sc.iter()) {
            n5 += (a5.norm() / w.re).powi(2);
            n3 += (a3.norm() / w.re).powi(2);
        }
        let err = if n5 == 0.0 && n3 == 0.0 { 0.0 } else { h * n5 / ((n5 + 0.01 * n3) * size).sqrt() };
        if !err.is_finite() || y_new.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            h *= 0.2;
            stats.rejected += 1;
            continue;
        }
        if err <= 1.0 {
            t += hs;
            if (t1 - t) * dir < 1e-14 * span.abs() {
                t = t1;
            }
            y = y_new;
            f0 = f(t, &y)?;
            stats.accepted += 1;
            let fac = if err == 0.0 { 10.0 } else { (0.9 * err.powf(-1.0 / 8.0)).clamp(0.2, 10.0) };
            h *= fac;
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-1.0 / 8.0)).max(0.2);
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_coefficient_keeps_y() {
        let y0 = mat::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let path = Path::starting_at(PathPoint::new(1.0, 0.0)).arc_to(2.0).radial_to(5.0);
        let y1 = integrate_linear(|_| Some(mat::zeros(2)), &path, &y0, &IntegratorConfig::default()).unwrap();
        assert!(mat::frob(&(y1 - y0)) < 1e-15);
    }

    #[test]
    fn scalar_power_on_semicircle() {
        let c = C64::new(0.3, -0.2);
        let path = Path::starting_at(PathPoint::new(1.0, 0.0)).arc_to(PI);
        let y0 = mat::eye(2);
        let y1 = integrate_linear(|p| Some(mat::eye(2) * (c / p.z())), &path, &y0, &IntegratorConfig::default()).unwrap();
        let expect = (C64::new(0.0, PI) * c).exp();
        assert!((y1[(0, 0)] - expect).norm() < 1e-12);
        assert!((y1[(1, 1)] - expect).norm() < 1e-12);
    }

    #[test]
    fn irregular_exponential_on_real_axis() {
        // dY/dz = A/z² Y has Y = e^{-A/z} C; from z=1 to z=2: e^{-A/2} e^{A}.
        let a = mat::diag(&[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]);
        let path = Path::starting_at(PathPoint::new(1.0, 0.0)).radial_to(2.0);
        let y0 = mat::eye(2);
        let y1 = integrate_linear(|p| Some(&a / (p.z() * p.z())), &path, &y0, &IntegratorConfig::default()).unwrap();
        let expect = mat::expm(&(&a * C64::new(-0.5, 0.0))) * mat::expm(&a);
        assert!(mat::frob(&(y1 - expect)) < 1e-10);
    }

    #[test]
    fn full_circle_branch_is_exact() {
        let c = C64::new(0.25, 0.1);
        let p0 = PathPoint::new(0.7, -0.4);
        let p1 = p0.rotated(2.0 * PI);
        let path = Path::starting_at(p0).arc_to(p1.arg);
        let y0 = CMat::from_element(1, 1, p0.pow(c));
        let y1 = integrate_linear(|p| Some(CMat::from_element(1, 1, c / p.z())), &path, &y0, &IntegratorConfig::default()).unwrap();
        assert!((y1[(0, 0)] - p1.pow(c)).norm() < 1e-12);
        assert!((p1.pow(c) / p0.pow(c) - (C64::new(0.0, 2.0 * PI) * c).exp()).norm() < 1e-14);
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = IntegratorConfig { rel_tol: 0.1, ..IntegratorConfig::default() };
        let path = Path::starting_at(PathPoint::new(1.0, 0.0)).radial_to(2.0);
        assert_eq!(integrate_linear(|_| Some(mat::zeros(1)), &path, &mat::eye(1), &cfg), Err(OdeError::InvalidConfig));
    }

    #[test]
    fn singular_coefficient_reported() {
        let path = Path::starting_at(PathPoint::new(1.0, 0.0)).radial_to(2.0);
        let r = integrate_linear(|_| None, &path, &mat::eye(1), &IntegratorConfig::default());
        assert!(matches!(r, Err(OdeError::SingularOnPath { .. })));
    }

    #[test]
    fn rk4_scheme_converges() {
        let c = C64::new(0.5, 0.0);
        let path = Path::starting_at(PathPoint::new(1.0, 0.0)).radial_to(2.0);
        let cfg = IntegratorConfig { scheme: Scheme::Rk4 { steps: 200 }, ..IntegratorConfig::default() };
        let y = integrate_linear(|p| Some(CMat::from_element(1, 1, c / p.z())), &path, &mat::eye(1), &cfg).unwrap();
        assert!((y[(0, 0)] - 2f64.powf(0.5)).norm() < 1e-9);
    }
}
