//! Stokes data of ∇ = d − (A/z² + B/z)dz: canonical solutions, Stokes
//! factors and matrices, the connection matrix to z = ∞, the monodromy
//! relation and the Stokes map into the dual group.

mod engine;

use engine::Engine;
pub use engine::StokesConfig;
use lie_core::mat::{self, CMat, C64, TWO_PI_I};
use lie_core::{cartan_project, root_data, CartanElement, LieContext};
use path_ode::{IntegratorConfig, OdeError, PathPoint, SeedError};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use thiserror::Error;

const TAU: f64 = 2.0 * PI;
/// Angular distance below which two directions count as equal.
const ANGLE_TOL: f64 = 1e-9;
/// Stokes rays closer than this trigger the widened-tolerance warning.
const COLLINEAR_GAP: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StokesError {
    #[error("A is not regular (minimal gap {gap:e})")]
    NonRegularA { gap: f64 },
    #[error("ray at angle {angle} is a Stokes ray")]
    NonAdmissibleRay { angle: f64 },
    #[error("point is outside the half-plane of the ray")]
    OutsideHalfPlane,
    #[error("invalid cut: {0}")]
    InvalidCut(String),
    #[error("ray at angle {angle} coincides with the cut")]
    CutHandling { angle: f64 },
    #[error("B is resonant (eigenvalue difference {diff})")]
    ResonantB { diff: i64 },
    #[error("shape mismatch: A has size {a}, B has size {b}")]
    Shape { a: usize, b: usize },
    #[error("singular matrix in solve")]
    Singular,
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("seed failed: {0}")]
    Seed(SeedError),
}

impl From<SeedError> for StokesError {
    fn from(e: SeedError) -> Self {
        match e {
            SeedError::NonRegularA { gap } => StokesError::NonRegularA { gap },
            SeedError::ResonantB { diff } => StokesError::ResonantB { diff },
            other => StokesError::Seed(other),
        }
    }
}

fn circ_dist(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(TAU);
    d.min(TAU - d)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionData {
    pub ctx: LieContext,
    pub a: CartanElement,
    pub b: CMat,
    /// Admissible ray angle.
    pub ray: f64,
    /// Angle of the log cut.
    pub cut: f64,
}

impl ConnectionData {
    /// Default geometry: ray −ι·ℝ₊ and cut ℝ₋.
    pub fn new(ctx: LieContext, a: CartanElement, b: CMat) -> Result<Self, StokesError> {
        Self::with_geometry(ctx, a, b, -PI / 2.0, PI)
    }

    pub fn with_geometry(ctx: LieContext, a: CartanElement, b: CMat, ray: f64, cut: f64) -> Result<Self, StokesError> {
        let c = Self { ctx, a, b, ray, cut };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), StokesError> {
        let n = self.a.n();
        if self.b.nrows() != n || self.b.ncols() != n || self.ctx.n != n {
            return Err(StokesError::Shape { a: n, b: self.b.nrows() });
        }
        let scale = self.a.entries.iter().fold(1.0f64, |s, x| s.max(x.norm()));
        if n > 1 && self.a.min_gap() <= 1e-12 * scale {
            return Err(StokesError::NonRegularA { gap: self.a.min_gap() });
        }
        self.check_admissible(self.ray)?;
        self.check_admissible(self.ray + PI)?;
        if circ_dist(self.ray, self.cut) < ANGLE_TOL || circ_dist(self.ray + PI, self.cut) < ANGLE_TOL {
            return Err(StokesError::InvalidCut("cut coincides with ±ray".into()));
        }
        // the cut must lie in the sector swept counterclockwise from −ray to ray
        let off = (self.cut - (self.ray + PI)).rem_euclid(TAU);
        if off >= PI {
            return Err(StokesError::InvalidCut("cut not in the sector from −ray to ray".into()));
        }
        Ok(())
    }

    pub fn check_admissible(&self, angle: f64) -> Result<(), StokesError> {
        if self.stokes_rays().iter().any(|&s| circ_dist(s, angle) < ANGLE_TOL) {
            return Err(StokesError::NonAdmissibleRay { angle });
        }
        Ok(())
    }

    /// Stokes ray angles in [0, 2π).
    pub fn stokes_rays(&self) -> Vec<f64> {
        root_data(&self.ctx, &self.a).stokes_rays
    }

    /// Representative of an angle in the determination (cut − 2π, cut).
    pub fn std_angle(&self, theta: f64) -> f64 {
        self.cut - TAU + (theta - (self.cut - TAU)).rem_euclid(TAU)
    }

    /// Smallest angular gap between distinct Stokes rays.
    pub fn min_ray_gap(&self) -> f64 {
        let rays = self.stokes_rays();
        if rays.len() < 2 {
            return TAU;
        }
        let mut g = TAU - rays[rays.len() - 1] + rays[0];
        for w in rays.windows(2) {
            g = g.min(w[1] - w[0]);
        }
        g
    }

    /// ×10 when Stokes rays are nearly collinear, 1 otherwise.
    pub fn tolerance_factor(&self) -> f64 {
        if self.min_ray_gap() < COLLINEAR_GAP {
            10.0
        } else {
            1.0
        }
    }

    /// Roots α_ij (as index pairs) whose value α(A) = a_i − a_j lies in the
    /// open sector swept counterclockwise from `from` to `to`.
    pub fn roots_in_sector(&self, from: f64, to: f64) -> Vec<(usize, usize)> {
        let span = (to - from).rem_euclid(TAU);
        let n = self.a.n();
        let mut v = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let off = ((self.a.entries[i] - self.a.entries[j]).arg() - from).rem_euclid(TAU);
                    if off > 0.0 && off < span {
                        v.push((i, j));
                    }
                }
            }
        }
        v
    }

    fn exp_cartan(&self, s: C64) -> CMat {
        mat::diag_exp(&mat::diag_of(&self.b), s)
    }
}

impl StokesConfig {
    /// Tighter tolerances and a longer seed for cross-checking runs.
    pub fn extended() -> Self {
        Self {
            integrator: IntegratorConfig { rel_tol: 2e-14, abs_tol: 1e-16, max_step: 0.05, ..IntegratorConfig::default() },
            seed_order: 12,
            seed_scale: 1.0,
        }
    }

    pub fn with_tol_scale(mut self, s: f64) -> Self {
        self.integrator.rel_tol = (self.integrator.rel_tol * s).min(1e-3);
        self.integrator.abs_tol = (self.integrator.abs_tol * s).min(1e-3);
        self
    }
}

/// Value of the canonical solution γ_ray at z, z in H_ray; log z is taken
/// from the argument carried by `z`, which must be within π/2 of the
/// representative of `ray` in the standard determination.
pub fn canonical_solution(conn: &ConnectionData, ray: f64, z: &PathPoint, cfg: &StokesConfig) -> Result<CMat, StokesError> {
    conn.validate()?;
    conn.check_admissible(ray)?;
    let phi = conn.std_angle(ray);
    if (z.arg - phi).abs() >= PI / 2.0 {
        return Err(StokesError::OutsideHalfPlane);
    }
    Ok(Engine::new(&conn.a, &conn.b, cfg).gamma(phi, z)?.0)
}

/// Canonical solution for the ray at angle `phi`, continued to any point of
/// the universal cover (no determination is imposed).
pub fn continued_solution(conn: &ConnectionData, phi: f64, z: &PathPoint, cfg: &StokesConfig) -> Result<CMat, StokesError> {
    conn.check_admissible(phi)?;
    Ok(Engine::new(&conn.a, &conn.b, cfg).gamma(phi, z)?.0)
}

/// S_{to,from}: the counterclockwise continuation of γ_from to `to` equals
/// γ_to·S·e^{2πi[B]ε}, ε = 1 iff the cut is swept.
pub fn transition(conn: &ConnectionData, from: f64, to: f64, cfg: &StokesConfig) -> Result<CMat, StokesError> {
    transition_with(conn, from, to, cfg).map(|(s, _)| s)
}

fn transition_with(conn: &ConnectionData, from: f64, to: f64, cfg: &StokesConfig) -> Result<(CMat, f64), StokesError> {
    conn.check_admissible(from)?;
    conn.check_admissible(to)?;
    for r in [from, to] {
        if circ_dist(r, conn.cut) < ANGLE_TOL {
            return Err(StokesError::CutHandling { angle: r });
        }
    }
    let n = conn.a.n();
    let theta = conn.std_angle(from);
    let delta = (to - from).rem_euclid(TAU);
    if delta < ANGLE_TOL {
        return Ok((mat::eye(n), f64::NEG_INFINITY));
    }
    let eps = if theta + delta > conn.cut { 1.0 } else { 0.0 };
    let eng = Engine::new(&conn.a, &conn.b, cfg);
    let w = PathPoint::new(eng.rho_mid(), theta + 0.5 * delta);
    let (g_from, c1) = eng.gamma(theta, &w)?;
    let (g_to, c2) = eng.gamma(theta + delta, &w)?;
    let s_cont = mat::inv(&g_to).ok_or(StokesError::Singular)? * g_from;
    let e = conn.exp_cartan(TWO_PI_I * eps);
    let e_inv = conn.exp_cartan(-TWO_PI_I * eps);
    Ok((e * s_cont * e_inv, c1.max(c2)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StokesData {
    pub s_plus: CMat,
    pub s_minus: CMat,
    pub cartan_b: CartanElement,
    /// Connection matrix; None when B is resonant.
    pub c: Option<CMat>,
    pub residuals: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

fn unipotence(s: &CMat) -> f64 {
    (0..s.nrows()).fold(0.0f64, |m, i| m.max((s[(i, i)] - 1.0).norm()))
}

/// Largest entry of s outside the diagonal and the allowed index pairs.
pub fn pattern_violation(s: &CMat, allowed: &[(usize, usize)]) -> f64 {
    let mut m = 0.0f64;
    for i in 0..s.nrows() {
        for j in 0..s.ncols() {
            if i != j && !allowed.contains(&(i, j)) {
                m = m.max(s[(i, j)].norm());
            }
        }
    }
    m
}

pub fn stokes_matrices(conn: &ConnectionData, cfg: &StokesConfig) -> Result<StokesData, StokesError> {
    conn.validate()?;
    let r = conn.ray;
    let (s_plus, c1) = transition_with(conn, r, r + PI, cfg)?;
    let (s_minus, c2) = transition_with(conn, r + PI, r, cfg)?;
    let mut residuals = BTreeMap::new();
    residuals.insert("unipotence_plus".to_string(), unipotence(&s_plus));
    residuals.insert("unipotence_minus".to_string(), unipotence(&s_minus));
    residuals.insert("pattern_plus".to_string(), pattern_violation(&s_plus, &conn.roots_in_sector(r, r + PI)));
    residuals.insert("pattern_minus".to_string(), pattern_violation(&s_minus, &conn.roots_in_sector(r + PI, r)));
    let mut warnings = Vec::new();
    if conn.tolerance_factor() > 1.0 {
        warnings.push(format!("nearly collinear Stokes rays (gap {:.3e}); tolerances widened ×10", conn.min_ray_gap()));
    }
    if c1.max(c2) > 1e-12 {
        warnings.push(format!("seed windows narrower than a half-turn (conditioning {:.3})", c1.max(c2)));
    }
    let c = match connection_matrix(conn, cfg) {
        Ok(c) => Some(c),
        Err(StokesError::ResonantB { .. }) => None,
        Err(e) => return Err(e),
    };
    if let Some(c) = &c {
        residuals.insert("monodromy".to_string(), monodromy_from(conn, &s_plus, &s_minus, c)?);
    }
    Ok(StokesData { s_plus, s_minus, cartan_b: cartan_project(&conn.b), c, residuals, warnings })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StokesFactor {
    /// Stokes ray angle in [0, 2π).
    pub ray: f64,
    pub factor: CMat,
}

/// One factor per Stokes ray in the sector swept counterclockwise from
/// `from` to `to`, in the order they are crossed.
pub fn stokes_factors(conn: &ConnectionData, from: f64, to: f64, cfg: &StokesConfig) -> Result<Vec<StokesFactor>, StokesError> {
    conn.validate()?;
    for r in [from, to] {
        conn.check_admissible(r)?;
        if circ_dist(r, conn.cut) < ANGLE_TOL {
            return Err(StokesError::CutHandling { angle: r });
        }
    }
    let rays = conn.stokes_rays();
    let span = (to - from).rem_euclid(TAU);
    // a Stokes ray on the cut has no well-defined single factor
    let cut_off = (conn.cut - from).rem_euclid(TAU);
    if cut_off < span && rays.iter().any(|&s| circ_dist(s, conn.cut) < ANGLE_TOL) {
        return Err(StokesError::CutHandling { angle: conn.cut });
    }
    let mut crossed: Vec<(f64, f64)> = rays
        .iter()
        .map(|&s| ((s - from).rem_euclid(TAU), s))
        .filter(|&(off, _)| off < span)
        .collect();
    crossed.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut out = Vec::with_capacity(crossed.len());
    for &(_, s) in &crossed {
        let mut half = PI / 4.0;
        for &t in &rays {
            if t != s {
                half = half.min(0.5 * circ_dist(s, t));
            }
        }
        half = half.min(0.5 * circ_dist(s, conn.cut));
        let factor = transition(conn, s - half, s + half, cfg)?;
        out.push(StokesFactor { ray: s, factor });
    }
    Ok(out)
}

/// Ordered product of the factors reproducing S_{to,from}: later rays on the
/// left, with e^{2πi[B]}·(…)·e^{−2πi[B]} around the part before the cut when
/// the cut is swept.
pub fn factor_product(conn: &ConnectionData, factors: &[StokesFactor], from: f64, to: f64) -> CMat {
    let n = conn.a.n();
    let span = (to - from).rem_euclid(TAU);
    let cut_off = (conn.cut - from).rem_euclid(TAU);
    let mut before = mat::eye(n);
    let mut after = mat::eye(n);
    for f in factors {
        let off = (f.ray - from).rem_euclid(TAU);
        if cut_off < span && off > cut_off {
            after = &f.factor * after;
        } else {
            before = &f.factor * before;
        }
    }
    if cut_off < span {
        let e = conn.exp_cartan(TWO_PI_I);
        let e_inv = conn.exp_cartan(-TWO_PI_I);
        after * e * before * e_inv
    } else {
        before
    }
}

/// C_r with γ_∞ = γ_r·C_r on the ray r (standard determination).
pub fn connection_matrix(conn: &ConnectionData, cfg: &StokesConfig) -> Result<CMat, StokesError> {
    conn.validate()?;
    let eng = Engine::new(&conn.a, &conn.b, cfg);
    let phi = conn.std_angle(conn.ray);
    let w = PathPoint::new(eng.rho_mid(), phi);
    let g_inf = eng.gamma_infinity(&w)?;
    let (g_r, _) = eng.gamma(phi, &w)?;
    Ok(mat::inv(&g_r).ok_or(StokesError::Singular)? * g_inf)
}

fn monodromy_from(conn: &ConnectionData, s_plus: &CMat, s_minus: &CMat, c: &CMat) -> Result<f64, StokesError> {
    let lhs = c * mat::expm(&(&conn.b * TWO_PI_I)) * mat::inv(c).ok_or(StokesError::Singular)?;
    let rhs = s_minus * conn.exp_cartan(TWO_PI_I) * s_plus;
    Ok(mat::frob(&(lhs - rhs)))
}

/// ‖C e^{2πiB} C⁻¹ − S₋ e^{2πi[B]} S₊‖_F.
pub fn monodromy_residual(conn: &ConnectionData, cfg: &StokesConfig) -> Result<f64, StokesError> {
    let d = stokes_matrices(conn, cfg)?;
    let c = d.c.ok_or(StokesError::ResonantB { diff: 0 })?;
    monodromy_from(conn, &d.s_plus, &d.s_minus, &c)
}

/// A point of the dual group G* ⊂ G × G. The triangularity of b₊ and b₋
/// follows the Stokes patterns N±(A, ray); for A in the negated fundamental
/// chamber and the default ray b₊ is lower and b₋ upper triangular.
#[derive(Clone, Debug, PartialEq)]
pub struct DualGroupElement {
    pub b_plus: CMat,
    pub b_minus: CMat,
}

impl DualGroupElement {
    /// b₊·b₋⁻¹.
    pub fn beta(&self) -> Result<CMat, StokesError> {
        Ok(&self.b_plus * mat::inv(&self.b_minus).ok_or(StokesError::Singular)?)
    }

    /// max |b₊,ii·b₋,ii − 1|.
    pub fn fibre_residual(&self) -> f64 {
        (0..self.b_plus.nrows()).fold(0.0f64, |m, i| m.max((self.b_plus[(i, i)] * self.b_minus[(i, i)] - 1.0).norm()))
    }
}

pub fn stokes_map_from(conn: &ConnectionData, s_plus: &CMat, s_minus: &CMat) -> Result<DualGroupElement, StokesError> {
    let i_pi = C64::new(0.0, PI);
    let b_plus = mat::inv(s_plus).ok_or(StokesError::Singular)? * conn.exp_cartan(-i_pi);
    let b_minus = s_minus * conn.exp_cartan(i_pi);
    // the diagonals are set exactly so the fibred-product constraint holds
    let mut out = DualGroupElement { b_plus, b_minus };
    let d = mat::diag_of(&conn.b);
    for (i, bi) in d.iter().enumerate() {
        out.b_plus[(i, i)] = (-i_pi * bi).exp();
        out.b_minus[(i, i)] = (i_pi * bi).exp();
    }
    Ok(out)
}

/// B ↦ (S₊⁻¹e^{−iπ[B]}, S₋e^{iπ[B]}).
pub fn stokes_map(conn: &ConnectionData, cfg: &StokesConfig) -> Result<DualGroupElement, StokesError> {
    conn.validate()?;
    let s_plus = transition(conn, conn.ray, conn.ray + PI, cfg)?;
    let s_minus = transition(conn, conn.ray + PI, conn.ray, cfg)?;
    stokes_map_from(conn, &s_plus, &s_minus)
}

/// ‖β(stokes_map(B)) − C e^{−2πiB} C⁻¹‖_F.
pub fn big_cell_check(conn: &ConnectionData, cfg: &StokesConfig) -> Result<f64, StokesError> {
    let d = stokes_matrices(conn, cfg)?;
    let c = d.c.ok_or(StokesError::ResonantB { diff: 0 })?;
    let beta = stokes_map_from(conn, &d.s_plus, &d.s_minus)?.beta()?;
    let rhs = &c * mat::expm(&(&conn.b * (-TWO_PI_I))) * mat::inv(&c).ok_or(StokesError::Singular)?;
    Ok(mat::frob(&(beta - rhs)))
}
