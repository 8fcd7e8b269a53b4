//! Order-sfh layer of the dynamical KZ equation
//!   dΥ/dz = (sfh·Ω/z + ad μ⊗1)Υ
//! and what it yields: the twist 1-jet, quantum Stokes matrices, the R-matrix
//! coefficient, the Casimir PDE, and semiclassical cross-checks.
//!
//! Writing H₀ = 1 + sfh·h₀ and H± = 1 + sfh·h±, the Ω_α component of each is
//! a scalar function times Ω_α, with α(μ) = a:
//!   h₀,α(z)        = ∫₀^z (e^{−at} − 1) dt/t
//!   e^{−az}h±,α(z) = −∫_z^∞ e^{−at} dt/t   (path to the decaying end inside H±)
//! The Cartan parts cancel against the z^{sfhΩ}, z^{sfhΩ₀} prefactors, so
//!   J¹_α = −log z − h₀,α(z) + e^{−az}h±,α(z)
//! which is independent of z. j± = J¹/(πι) since J = 1 + (ħ/2)j.

use crate::pbw::PbwContext;
use crate::series::{PbwTensor, TensorSeries, hbar_factor, scl_extract};
use crate::HbarError;
use gauss_quad::legendre::GaussLegendre;
use lie_core::mat::{self, CMat, C64};
use lie_core::{casimir_tensors, nu_check, omega_alpha, CartanElement, Chamber, LieContext, Root, TensorElement};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use stokes_classical::{stokes_matrices, ConnectionData, StokesConfig};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn i_pi() -> C64 {
    C64::new(0.0, PI)
}

#[derive(Clone, Debug)]
pub struct QuadConfig {
    /// Gauss–Legendre panels per path segment at the coarse level
    pub panels: usize,
    /// nodes per panel
    pub nodes: usize,
    /// length of the exponential tail, in units of 1/|α(μ)|
    pub tail: f64,
    /// |Im z| of the evaluation point for J±
    pub height: f64,
    /// coarse vs refined disagreement allowed
    pub tol: f64,
    /// allowed gap between the two quantum Stokes routes
    pub route_tol: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { panels: 24, nodes: 20, tail: 50.0, height: 1.0, tol: 1e-11, route_tol: 1e-6 }
    }
}

struct Quad {
    rule: Vec<(f64, f64)>,
    panels: usize,
}

impl Quad {
    fn new(nodes: usize, panels: usize) -> Self {
        let g = GaussLegendre::new(nodes.try_into().expect("nodes > 0"));
        Self { rule: g.as_node_weight_pairs().to_vec(), panels }
    }

    /// ∫₀^len f(s) ds.
    fn line<F: Fn(f64) -> C64>(&self, f: F, len: f64) -> C64 {
        let h = len / self.panels as f64;
        let mut s = C64::new(0.0, 0.0);
        for p in 0..self.panels {
            let mid = (p as f64 + 0.5) * h;
            for &(x, w) in &self.rule {
                s += f(mid + 0.5 * h * x) * (0.5 * h * w);
            }
        }
        s
    }

    /// ∫₀^z (e^{−at} − 1) dt/t along the segment [0, z].
    fn h0(&self, a: f64, z: C64) -> C64 {
        self.line(|s| ((-a * z * s).exp() - 1.0) / s, 1.0)
    }

    /// ∫ e^{−at} dt/t from z horizontally to sign(a)·∞ (Im z ≠ 0).
    fn tail(&self, a: f64, z: C64, tail: f64) -> C64 {
        let sg = a.signum();
        let len = tail / a.abs();
        self.line(|s| (-a * (z + sg * s)).exp() / (z + sg * s) * sg, len)
    }

    /// ∫ e^{−at} dt/t from real x₀ up (side = ±1) to x₀ + ι·side·height,
    /// then horizontally to sign(a)·∞.
    fn tail_via(&self, a: f64, x0: f64, side: f64, height: f64, tail: f64) -> C64 {
        let d = C64::new(0.0, side * height);
        let up = self.line(|s| {
            let t = x0 + d * s;
            (-a * t).exp() / t * d
        }, 1.0);
        up + self.tail(a, x0 + d, tail)
    }
}

/// J¹_α evaluated at z.
fn j1_alpha(q: &Quad, a: f64, z: C64, tail: f64) -> C64 {
    -z.ln() - q.h0(a, z) - q.tail(a, z, tail)
}

fn check_mu(mu: &CartanElement) -> Result<(), HbarError> {
    if !mu.is_real() || !mu.is_regular() {
        return Err(HbarError::InvalidInput("μ must be real and regular".into()));
    }
    Ok(())
}

fn root_value(r: &Root, mu: &CartanElement) -> f64 {
    r.value_at(mu).re
}

/// Closed form of the order-ħ twist
///   j± = ∓Ω₋ + (1/πι)Σ_{α>0}(log α(μ) + γ)(Ω_α + Ω_{−α}),
/// with positivity taken in the chamber of μ.
pub fn twist_closed_form(ctx: &LieContext, mu: &CartanElement) -> Result<(TensorElement, TensorElement), HbarError> {
    check_mu(mu)?;
    let ch = Chamber::of(mu);
    let ct = casimir_tensors(ctx, &ch);
    let mut sym = TensorElement::zeros(ctx.n);
    for r in ch.positive_roots() {
        let k = (root_value(&r, mu).ln() + EULER_GAMMA) / i_pi();
        sym = sym.add(&omega_alpha(ctx.n, &r).add(&omega_alpha(ctx.n, &r.neg())).scale(k));
    }
    Ok((sym.sub(&ct.omega_minus), sym.add(&ct.omega_minus)))
}

#[derive(Clone, Debug)]
pub struct TwistJet {
    /// J₊ = 1 + (ħ/2)·j_plus + O(ħ²)
    pub j_plus: TensorElement,
    pub j_minus: TensorElement,
    /// coarse vs refined quadrature gap
    pub quad_error: f64,
}

fn jet_at(ctx: &LieContext, mu: &CartanElement, q: &Quad, cfg: &QuadConfig) -> (TensorElement, TensorElement) {
    let n = ctx.n;
    let mut jp = TensorElement::zeros(n);
    let mut jm = TensorElement::zeros(n);
    for r in ctx.roots() {
        let a = root_value(&r, mu);
        let oa = omega_alpha(n, &r);
        let up = j1_alpha(q, a, C64::new(0.0, cfg.height), cfg.tail);
        let down = j1_alpha(q, a, C64::new(0.0, -cfg.height), cfg.tail);
        jp = jp.add(&oa.scale(up / i_pi()));
        jm = jm.add(&oa.scale(down / i_pi()));
    }
    (jp, jm)
}

/// The twist 1-jet from the order-sfh DKZ quadratures.
pub fn dkz_twist_order1(ctx: &LieContext, mu: &CartanElement, cfg: &QuadConfig) -> Result<TwistJet, HbarError> {
    check_mu(mu)?;
    let (p1, m1) = jet_at(ctx, mu, &Quad::new(cfg.nodes, cfg.panels), cfg);
    let (p2, m2) = jet_at(ctx, mu, &Quad::new(cfg.nodes, 2 * cfg.panels), cfg);
    let err = p1.sub(&p2).max_abs().max(m1.sub(&m2).max_abs());
    if !(err <= cfg.tol) {
        return Err(HbarError::QuadratureNotConverged { gap: err });
    }
    Ok(TwistJet { j_plus: p2, j_minus: m2, quad_error: err })
}

/// ħ-coefficient of R₊ = (J₊⁻¹)²¹ e^{ħΩ/2} J₊: ½Ω + ½(j₊ − j₊²¹).
pub fn r_plus_order1(ctx: &LieContext, j_plus: &TensorElement) -> TensorElement {
    let half = C64::new(0.5, 0.0);
    let omega = casimir_tensors(ctx, &Chamber::fundamental(ctx.n)).omega;
    omega.scale(half).add(&j_plus.sub(&j_plus.swap()).scale(half))
}

#[derive(Clone, Debug)]
pub struct QuantumStokes {
    /// S₊ = 1 + ħ·s_plus + O(ħ²), from the twist and R₊ = e^{πι sfhΩ₀}S₋⁻¹
    pub s_plus: TensorElement,
    pub s_minus: TensorElement,
    /// the same from direct quadrature of the Υ± continuation
    pub direct_plus: TensorElement,
    pub direct_minus: TensorElement,
    pub route_gap: f64,
}

/// s₋ from R₊: ħ-coefficient of e^{πι sfhΩ₀}S₋⁻¹ is ½Ω₀ − s₋.
fn stokes_from_twist(ctx: &LieContext, j_plus: &TensorElement) -> (TensorElement, TensorElement) {
    let omega0 = casimir_tensors(ctx, &Chamber::fundamental(ctx.n)).omega0;
    let s_minus = omega0.scale(C64::new(0.5, 0.0)).sub(&r_plus_order1(ctx, j_plus));
    (s_minus.swap(), s_minus)
}

/// Direct route. S₊ = Υ₋⁻¹Υ₊ at a point of ℝ_{>0}; S₋ = Υ₊⁻¹Υ₋e^{ħΩ₀} at a
/// point of ℝ_{<0}. At order sfh these are
///   S₊,α = ∫_{H₋ path} − ∫_{H₊ path},  S₋,α = ∫_{H₊ path} − ∫_{H₋ path}
/// of e^{−at}dt/t from x₀ to the decaying end.
fn stokes_direct(ctx: &LieContext, mu: &CartanElement, q: &Quad, cfg: &QuadConfig) -> (TensorElement, TensorElement) {
    let n = ctx.n;
    let mut sp = TensorElement::zeros(n);
    let mut sm = TensorElement::zeros(n);
    let f = C64::new(1.0, 0.0) / hbar_factor(1);
    for r in ctx.roots() {
        let a = root_value(&r, mu);
        let oa = omega_alpha(n, &r);
        let p = q.tail_via(a, 1.0, -1.0, cfg.height, cfg.tail) - q.tail_via(a, 1.0, 1.0, cfg.height, cfg.tail);
        let m = q.tail_via(a, -1.0, 1.0, cfg.height, cfg.tail) - q.tail_via(a, -1.0, -1.0, cfg.height, cfg.tail);
        sp = sp.add(&oa.scale(p * f));
        sm = sm.add(&oa.scale(m * f));
    }
    (sp, sm)
}

/// ħ-coefficients of the quantum Stokes matrices, by two routes.
pub fn quantum_stokes_order1(ctx: &LieContext, mu: &CartanElement, cfg: &QuadConfig) -> Result<QuantumStokes, HbarError> {
    let jet = dkz_twist_order1(ctx, mu, cfg)?;
    let (s_plus, s_minus) = stokes_from_twist(ctx, &jet.j_plus);
    let (direct_plus, direct_minus) = stokes_direct(ctx, mu, &Quad::new(cfg.nodes, 2 * cfg.panels), cfg);
    let gap = s_plus.sub(&direct_plus).max_abs().max(s_minus.sub(&direct_minus).max_abs());
    if !(gap <= cfg.route_tol) {
        return Err(HbarError::RouteMismatch { gap });
    }
    Ok(QuantumStokes { s_plus, s_minus, direct_plus, direct_minus, route_gap: gap })
}

/// ħ-coefficient of J₊⁻¹e^{ħΩ}J₊ − S₊⁻¹e^{ħΩ₀}S₋⁻¹. J drops out at this
/// order, leaving Ω − Ω₀ + s₊ + s₋.
pub fn monodromy_identity_order1(ctx: &LieContext, s_plus: &TensorElement, s_minus: &TensorElement) -> f64 {
    let ct = casimir_tensors(ctx, &Chamber::fundamental(ctx.n));
    ct.omega.sub(&ct.omega0).add(s_plus).add(s_minus).max_abs()
}

/// Order-ħ cocycle residual (Δ⊗id)j + j⊗1 − (id⊗Δ)j − 1⊗j for a two-leg j.
pub fn twist_cocycle_residual(j: &PbwTensor) -> Result<f64, HbarError> {
    if j.legs != 2 {
        return Err(HbarError::InvalidInput("the twist has two legs".into()));
    }
    let lhs = j.coproduct(0).add(&j.insert_unit(2));
    let rhs = j.coproduct(1).add(&j.insert_unit(0));
    Ok(lhs.sub(&rhs).max_abs())
}

pub fn twist_cocycle_residual_g(ctx: &LieContext, j: &TensorElement) -> f64 {
    let pc = PbwContext::new(ctx.n);
    twist_cocycle_residual(&PbwTensor::from_tensor_element(&pc, j)).expect("two legs")
}

/// ½(Δ(K_α) − K_α⊗1 − 1⊗K_α) for K_α = x_αx_{−α} + x_{−α}x_α, computed in
/// PBW form; it equals Ω_α + Ω_{−α}.
pub fn casimir_split(ctx: &LieContext, r: &Root) -> Result<TensorElement, HbarError> {
    let pc = PbwContext::new(ctx.n);
    let x = pc.generator(r.i, r.j);
    let y = pc.generator(r.j, r.i);
    let k = pc.mul(&x, &y)?.add(&pc.mul(&y, &x)?);
    let kt = PbwTensor::from_element(&k);
    let d = kt.coproduct(0).sub(&kt.insert_unit(1)).sub(&kt.insert_unit(0));
    d.scale(C64::new(0.5, 0.0)).to_tensor_element(&pc)
}

/// Where j₊(μ) comes from in the PDE check.
#[derive(Clone, Debug)]
pub enum TwistSource {
    ClosedForm,
    Quadrature(QuadConfig),
}

impl TwistSource {
    fn j_plus(&self, ctx: &LieContext, mu: &CartanElement) -> Result<TensorElement, HbarError> {
        match self {
            TwistSource::ClosedForm => Ok(twist_closed_form(ctx, mu)?.0),
            TwistSource::Quadrature(cfg) => Ok(dkz_twist_order1(ctx, mu, cfg)?.j_plus),
        }
    }
}

/// Max over grid points and coordinate directions of
///   |∂_δ j₊ − (1/πι)Σ_{α>0}(α(δ)/α(μ))·½(Δ(K_α) − K_α⁽¹⁾ − K_α⁽²⁾)|
/// with ∂_δ a central difference of step `step`.
pub fn casimir_pde_residual_order1(ctx: &LieContext, grid: &[CartanElement], step: f64, source: &TwistSource) -> Result<f64, HbarError> {
    let n = ctx.n;
    let mut worst = 0.0f64;
    for mu in grid {
        check_mu(mu)?;
        let ch = Chamber::of(mu);
        for k in 0..n {
            let shift = |s: f64| {
                let mut e = mu.entries.clone();
                e[k] += s;
                CartanElement::new(e)
            };
            let fwd = source.j_plus(ctx, &shift(step))?;
            let bwd = source.j_plus(ctx, &shift(-step))?;
            let fd = fwd.sub(&bwd).scale(C64::new(0.5 / step, 0.0));
            let mut rhs = TensorElement::zeros(n);
            for r in ch.positive_roots() {
                let da = (if r.i == k { 1.0 } else { 0.0 }) - (if r.j == k { 1.0 } else { 0.0 });
                if da == 0.0 {
                    continue;
                }
                let w = da / root_value(&r, mu);
                rhs = rhs.add(&casimir_split(ctx, &r)?.scale(C64::new(w, 0.0) / i_pi()));
            }
            worst = worst.max(fd.sub(&rhs).max_abs());
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug)]
pub struct SclReport {
    /// per direction: scl(S₊^ħ)(λ) vs d/dt Ŝ₊(tν∨(λ)), relative
    pub stokes_plus: Vec<f64>,
    pub stokes_minus: Vec<f64>,
    /// per direction: scl(J₊)(λ) vs d/dt Ĉ₋(tν∨(λ))⁻¹, relative
    pub twist: Vec<f64>,
    pub max: f64,
}

fn rel_gap(lhs: &CMat, rhs: &CMat, l: &CMat) -> f64 {
    mat::max_abs(&(lhs - rhs)) / mat::max_abs(rhs).max(mat::max_abs(l)).max(f64::MIN_POSITIVE)
}

/// First-order part of scl(1 + ħ·t)(λ), via `scl_extract`.
fn scl_linear(ctx: &LieContext, t: &TensorElement, l: &CMat) -> Result<CMat, HbarError> {
    let pc = PbwContext::new(ctx.n);
    let s = scl_extract(&TensorSeries::from_order1(&pc, t))?;
    Ok(s.eval_matrix(&pc, l) - mat::eye(ctx.n))
}

/// Compares the semiclassical limits of the order-ħ quantum data with
/// central differences of the classical engine at B = ±t·ν∨(λ), A = −μ,
/// default geometry (ray −π/2, so its canonical solution lives on H₋ and its
/// connection matrix is C₋).
pub fn scl_cross_check(
    ctx: &LieContext,
    mu: &CartanElement,
    lambdas: &[CMat],
    fd_step: f64,
    qcfg: &QuadConfig,
    scfg: &StokesConfig,
) -> Result<SclReport, HbarError> {
    let q = quantum_stokes_order1(ctx, mu, qcfg)?;
    let jet = dkz_twist_order1(ctx, mu, qcfg)?;
    // J₊ = 1 + ħ·(j₊/2)
    let j_half = jet.j_plus.scale(C64::new(0.5, 0.0));
    let a = CartanElement::new(mu.entries.iter().map(|x| -x).collect());
    let mut rep = SclReport { stokes_plus: vec![], stokes_minus: vec![], twist: vec![], max: 0.0 };
    for l in lambdas {
        let b = nu_check(l);
        let run = |s: f64| -> Result<(CMat, CMat, CMat), HbarError> {
            let conn = ConnectionData::new(*ctx, a.clone(), &b * C64::new(s, 0.0))?;
            let d = stokes_matrices(&conn, scfg)?;
            let c = d.c.ok_or_else(|| HbarError::InvalidInput("resonant direction".into()))?;
            Ok((d.s_plus, d.s_minus, c))
        };
        let (p1, m1, c1) = run(fd_step)?;
        let (p0, m0, c0) = run(-fd_step)?;
        let inv2h = C64::new(0.5 / fd_step, 0.0);
        let dsp = (p1 - p0) * inv2h;
        let dsm = (m1 - m0) * inv2h;
        // d/dt C⁻¹ = −dC/dt at C = 1
        let dcinv = (c0 - c1) * inv2h;
        let gp = rel_gap(&scl_linear(ctx, &q.s_plus, l)?, &dsp, l);
        let gm = rel_gap(&scl_linear(ctx, &q.s_minus, l)?, &dsm, l);
        let gj = rel_gap(&scl_linear(ctx, &j_half, l)?, &dcinv, l);
        rep.max = rep.max.max(gp).max(gm).max(gj);
        rep.stokes_plus.push(gp);
        rep.stokes_minus.push(gm);
        rep.twist.push(gj);
    }
    Ok(rep)
}

/// Closed-form twist coefficients serialised for regression.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistFixture {
    pub n: usize,
    pub mu: Vec<f64>,
    /// nonzero coefficients of j₊ as (i, j, k, l, [re, im]) for E_ij ⊗ E_kl
    pub j_plus: Vec<(usize, usize, usize, usize, [f64; 2])>,
}

impl TwistFixture {
    pub fn closed_form(ctx: &LieContext, mu: &[f64]) -> Result<Self, HbarError> {
        let (jp, _) = twist_closed_form(ctx, &CartanElement::real(mu))?;
        let n = ctx.n;
        let mut entries = Vec::new();
        for a in 0..n * n {
            for b in 0..n * n {
                let c = jp.coef[(a, b)];
                if c != C64::new(0.0, 0.0) {
                    entries.push((a / n, a % n, b / n, b % n, [c.re, c.im]));
                }
            }
        }
        Ok(Self { n, mu: mu.to_vec(), j_plus: entries })
    }

    pub fn tensor(&self) -> TensorElement {
        let mut t = TensorElement::zeros(self.n);
        for &(i, j, k, l, [re, im]) in &self.j_plus {
            t.coef[(i * self.n + j, k * self.n + l)] = C64::new(re, im);
        }
        t
    }
}
