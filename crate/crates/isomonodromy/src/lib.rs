//! Isomonodromic deformation of ∇ = d − (A/z² + B/z)dz as A = μ moves in
//! h_reg, and the classical PDE satisfied by the Stokes matrices.
//!
//! The flow is written on the g*-coordinate L = −2πι·B (so B = ν∨(λ)):
//!   dL/dt = −(1/2πι) Σ_{α>0} (α(μ′)/α(μ)) H_α(L),  H_α(L) = σ[dQ_α(L), L],
//! with Q_α(L) = trace(L x_α)·trace(L x_{−α}).

use lie_core::mat::{self, CMat, C64, TWO_PI_I};
use lie_core::{nu_check, CartanElement, Chamber, LieContext, Root};
use std::f64::consts::PI;
use std::io::Write;
use stokes_classical::{transition, ConnectionData, StokesConfig, StokesError};
use thiserror::Error;

/// Sign of the Hamiltonian field, fixed by the constancy test (with σ = −1,
/// H_α is the KKS Hamiltonian vector field of Q_α).
pub const SIGMA: f64 = -1.0;

#[derive(Debug, Error)]
pub enum IsoError {
    #[error("mu left its chamber at t = {t}")]
    LeftChamber { t: f64 },
    #[error("B became resonant at t = {t}")]
    ResonanceHit { t: f64 },
    #[error("invalid flow parameters: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Stokes(#[from] StokesError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// dQ_α(L) = trace(L x_{−α}) x_α + trace(L x_α) x_{−α}.
pub fn dq(alpha: &Root, l: &CMat) -> CMat {
    let n = l.nrows();
    let mut d = mat::zeros(n);
    d[(alpha.i, alpha.j)] = l[(alpha.i, alpha.j)];
    d[(alpha.j, alpha.i)] = l[(alpha.j, alpha.i)];
    d
}

pub fn hamiltonian_field_signed(alpha: &Root, l: &CMat, sigma: f64) -> CMat {
    mat::commutator(&dq(alpha, l), l) * C64::new(sigma, 0.0)
}

/// H_α(L) = σ[dQ_α(L), L].
pub fn hamiltonian_field(alpha: &Root, l: &CMat) -> CMat {
    hamiltonian_field_signed(alpha, l, SIGMA)
}

/// The straight path μ(t) = origin + t·velocity.
#[derive(Clone, Debug, PartialEq)]
pub struct MuPath {
    pub origin: CartanElement,
    pub velocity: Vec<C64>,
}

impl MuPath {
    pub fn new(origin: CartanElement, velocity: Vec<C64>) -> Self {
        Self { origin, velocity }
    }

    /// μ(t) = diag(−2−t, −1, 0).
    pub fn standard() -> Self {
        Self::new(CartanElement::real(&[-2.0, -1.0, 0.0]), vec![mat::c(-1.0, 0.0), mat::c(0.0, 0.0), mat::c(0.0, 0.0)])
    }

    pub fn at(&self, t: f64) -> CartanElement {
        CartanElement::new(self.origin.entries.iter().zip(&self.velocity).map(|(m, v)| m + v * t).collect())
    }
}

/// Σ_{α>0} (α(δ)/α(μ)) X_α for the weights of the PDE; returns the pairs
/// (α, α(δ)/α(μ)).
pub fn log_weights(mu: &CartanElement, delta: &[C64]) -> Vec<(Root, C64)> {
    let ch = Chamber::of(mu);
    ch.positive_roots()
        .into_iter()
        .map(|r| {
            let w = (delta[r.i] - delta[r.j]) / r.value_at(mu);
            (r, w)
        })
        .collect()
}

/// dL/dt at (μ, L) for velocity δ = μ′.
pub fn flow_field(mu: &CartanElement, delta: &[C64], l: &CMat, sigma: f64) -> CMat {
    let mut v = mat::zeros(l.nrows());
    for (r, w) in log_weights(mu, delta) {
        v += hamiltonian_field_signed(&r, l, sigma) * w;
    }
    v * (-1.0 / TWO_PI_I)
}

/// One logged point of the flow; `b` is the connection residue ν∨(L).
#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub mu: CartanElement,
    pub b: CMat,
}

pub fn b_to_l(b: &CMat) -> CMat {
    b * (-TWO_PI_I)
}

fn check_state(mu: &CartanElement, b: &CMat, chamber: &Chamber, t: f64) -> Result<(), IsoError> {
    if !mu.is_regular() || Chamber::of(mu) != *chamber {
        return Err(IsoError::LeftChamber { t });
    }
    let ev = mat::eigenvalues(b);
    for x in &ev {
        for y in &ev {
            if mat::near_nonzero_integer(x - y, 1e-6).is_some() {
                return Err(IsoError::ResonanceHit { t });
            }
        }
    }
    Ok(())
}

/// Fixed-step RK4 of the flow from t = 0 to `t_end`, logging every step.
pub fn iso_flow_signed(path: &MuPath, b0: &CMat, t_end: f64, steps: usize, sigma: f64) -> Result<Vec<FlowState>, IsoError> {
    if steps == 0 || !(t_end > 0.0) || path.velocity.len() != path.origin.n() || b0.nrows() != path.origin.n() {
        return Err(IsoError::InvalidInput(format!("steps {steps}, t_end {t_end}")));
    }
    let chamber = Chamber::of(&path.origin);
    check_state(&path.origin, b0, &chamber, 0.0)?;
    let h = t_end / steps as f64;
    let f = |t: f64, l: &CMat| flow_field(&path.at(t), &path.velocity, l, sigma);
    let mut l = b_to_l(b0);
    let mut out = vec![FlowState { t: 0.0, mu: path.origin.clone(), b: b0.clone() }];
    for k in 0..steps {
        let t = k as f64 * h;
        let k1 = f(t, &l);
        let k2 = f(t + 0.5 * h, &(&l + &k1 * C64::new(0.5 * h, 0.0)));
        let k3 = f(t + 0.5 * h, &(&l + &k2 * C64::new(0.5 * h, 0.0)));
        let k4 = f(t + h, &(&l + &k3 * C64::new(h, 0.0)));
        let two = C64::new(2.0, 0.0);
        l += (k1 + k2 * two + k3 * two + k4) * C64::new(h / 6.0, 0.0);
        let t1 = (k + 1) as f64 * h;
        let mu = path.at(t1);
        let b = nu_check(&l);
        check_state(&mu, &b, &chamber, t1)?;
        out.push(FlowState { t: t1, mu, b });
    }
    Ok(out)
}

pub fn iso_flow(path: &MuPath, b0: &CMat, t_end: f64, steps: usize) -> Result<Vec<FlowState>, IsoError> {
    iso_flow_signed(path, b0, t_end, steps, SIGMA)
}

/// (S₊, S₋) for A = μ and residue B in the default geometry.
pub fn stokes_pair(mu: &CartanElement, b: &CMat, cfg: &StokesConfig) -> Result<(CMat, CMat), IsoError> {
    let conn = ConnectionData::new(LieContext::gl(mu.n()), mu.clone(), b.clone())?;
    let r = conn.ray;
    Ok((transition(&conn, r, r + PI, cfg)?, transition(&conn, r + PI, r, cfg)?))
}

#[derive(Clone, Debug)]
pub struct ConstancyReport {
    /// (t, ‖S₊(t) − S₊(0)‖_F + ‖S₋(t) − S₋(0)‖_F) at each checkpoint.
    pub drifts: Vec<(f64, f64)>,
    pub max_drift: f64,
}

/// Recomputes S± at `checkpoints` evenly spaced states (always including
/// both ends) and reports the deviation from t = 0.
pub fn stokes_constancy(traj: &[FlowState], checkpoints: usize, cfg: &StokesConfig) -> Result<ConstancyReport, IsoError> {
    if traj.is_empty() {
        return Err(IsoError::InvalidInput("empty trajectory".into()));
    }
    let last = traj.len() - 1;
    let k = checkpoints.max(2);
    let mut idx: Vec<usize> = (0..k).map(|i| (i * last + (k - 1) / 2) / (k - 1)).collect();
    idx.dedup();
    let (p0, m0) = stokes_pair(&traj[0].mu, &traj[0].b, cfg)?;
    let mut drifts = Vec::with_capacity(idx.len());
    for &i in &idx {
        let s = &traj[i];
        let (p, m) = stokes_pair(&s.mu, &s.b, cfg)?;
        drifts.push((s.t, mat::frob(&(p - &p0)) + mat::frob(&(m - &m0))));
    }
    let max_drift = drifts.iter().fold(0.0f64, |a, d| a.max(d.1));
    Ok(ConstancyReport { drifts, max_drift })
}

/// Max over the trajectory of the change in the (sorted) eigenvalues of B.
pub fn spectral_drift(traj: &[FlowState]) -> f64 {
    let sorted = |b: &CMat| {
        let mut e = mat::eigenvalues(b);
        e.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap().then(x.im.partial_cmp(&y.im).unwrap()));
        e
    };
    let e0 = sorted(&traj[0].b);
    traj.iter().fold(0.0f64, |m, s| {
        let e = sorted(&s.b);
        m.max(e.iter().zip(&e0).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
    })
}

/// Central difference at h and h/2, Richardson-extrapolated once.
fn richardson<F>(f: F, h: f64) -> Result<Vec<CMat>, IsoError>
where
    F: Fn(f64) -> Result<Vec<CMat>, IsoError>,
{
    let diff = |h: f64| -> Result<Vec<CMat>, IsoError> {
        let p = f(h)?;
        let m = f(-h)?;
        Ok(p.iter().zip(&m).map(|(a, b)| (a - b) / C64::new(2.0 * h, 0.0)).collect())
    };
    let d1 = diff(h)?;
    let d2 = diff(0.5 * h)?;
    Ok(d1.iter().zip(&d2).map(|(a, b)| (b * C64::new(4.0, 0.0) - a) / C64::new(3.0, 0.0)).collect())
}

/// Residual of d_δ S± = (1/2πι) Σ_{α>0} (α(δ)/α(μ)) {Q_α, S±} at each μ, λ
/// and direction δ, with S± = S±(A = μ, B = ν∨(λ)). The KKS bracket
/// {Q_α, f}(L) is the derivative of f along [L, dQ_α(L)]. Each residual is
/// relative to the larger side (absolute when both are below 1e-12).
pub fn classical_pde_residual(
    mus: &[CartanElement],
    lambdas: &[CMat],
    directions: &[Vec<C64>],
    fd_step: f64,
    cfg: &StokesConfig,
) -> Result<f64, IsoError> {
    let mut worst = 0.0f64;
    for mu in mus {
        for l in lambdas {
            for delta in directions {
                let lhs = richardson(
                    |h| {
                        let m = CartanElement::new(mu.entries.iter().zip(delta).map(|(a, d)| a + d * h).collect());
                        let (p, q) = stokes_pair(&m, &nu_check(l), cfg)?;
                        Ok(vec![p, q])
                    },
                    fd_step,
                )?;
                let mut v = mat::zeros(l.nrows());
                for (r, w) in log_weights(mu, delta) {
                    v += mat::commutator(l, &dq(&r, l)) * w;
                }
                let v = v / TWO_PI_I;
                let rhs = richardson(
                    |h| {
                        let (p, q) = stokes_pair(mu, &nu_check(&(l + &v * C64::new(h, 0.0))), cfg)?;
                        Ok(vec![p, q])
                    },
                    fd_step,
                )?;
                for (a, b) in lhs.iter().zip(&rhs) {
                    let scale = mat::frob(a).max(mat::frob(b));
                    let e = mat::frob(&(a - b));
                    worst = worst.max(if scale > 1e-12 { e / scale } else { e });
                }
            }
        }
    }
    Ok(worst)
}

/// Trajectory CSV: t, Re/Im of μ entries, Re/Im of B entries (row-major),
/// drift (blank away from checkpoints).
pub fn write_trajectory_csv<W: Write>(w: W, traj: &[FlowState], report: Option<&ConstancyReport>) -> Result<(), IsoError> {
    let mut wr = csv::Writer::from_writer(w);
    let Some(first) = traj.first() else {
        return Ok(());
    };
    let n = first.mu.n();
    let mut header = vec!["t".to_string()];
    for i in 0..n {
        header.push(format!("mu{i}_re"));
        header.push(format!("mu{i}_im"));
    }
    for i in 0..n {
        for j in 0..n {
            header.push(format!("b{i}{j}_re"));
            header.push(format!("b{i}{j}_im"));
        }
    }
    header.push("drift".into());
    wr.write_record(&header)?;
    for s in traj {
        let mut row = vec![format!("{:.17e}", s.t)];
        for m in &s.mu.entries {
            row.push(format!("{:.17e}", m.re));
            row.push(format!("{:.17e}", m.im));
        }
        for i in 0..n {
            for j in 0..n {
                row.push(format!("{:.17e}", s.b[(i, j)].re));
                row.push(format!("{:.17e}", s.b[(i, j)].im));
            }
        }
        let drift = report.and_then(|r| r.drifts.iter().find(|d| d.0 == s.t)).map(|d| format!("{:.17e}", d.1));
        row.push(drift.unwrap_or_default());
        wr.write_record(&row)?;
    }
    wr.flush()?;
    Ok(())
}
