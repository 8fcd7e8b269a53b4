//! The Kirillov–Kostant–Souriau bracket on g*, the quasitriangular bracket on
//! the dual group G* = B₊ ×_H B₋, and the numerical check that
//! λ ↦ stokes_map(A, ν∨(λ)) is a Poisson map up to one global scale κ.

mod poly;

pub use num_rational::Rational64 as Q;
pub use poly::Poly;

use lie_core::mat::{self, CMat, C64};
use lie_core::{nu_check, standard_r, CartanElement, Chamber, LieContext, TensorElement};
use num_traits::Zero;
use std::f64::consts::PI;
use stokes_classical::{stokes_map, ConnectionData, DualGroupElement, StokesConfig, StokesError};
use thiserror::Error;

pub const MAX_DEGREE: usize = 4;
/// Largest relative spread of per-sample κ accepted by the calibration.
pub const SPREAD_TOL: f64 = 1e-3;
/// Tolerance on diag(b₊)·diag(b₋) = 1.
const FIBRE_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum PoissonError {
    #[error("observable of degree {degree} exceeds {MAX_DEGREE}")]
    DegreeTooHigh { degree: usize },
    #[error("observable has {got} variables, expected {expected}")]
    Shape { expected: usize, got: usize },
    #[error("point is not in G* (fibre residual {residual:e})")]
    ConstraintViolated { residual: f64 },
    #[error("r-matrix coefficients must be real rationals for symbolic brackets")]
    NonRationalR,
    #[error("no consistent κ: relative spread {spread:e}")]
    NoConsistentScale { spread: f64 },
    #[error(transparent)]
    Stokes(#[from] StokesError),
}

fn coords(l: &CMat) -> Vec<C64> {
    let n = l.nrows();
    (0..n * n).map(|v| l[(v / n, v % n)]).collect()
}

/// A polynomial in the entries L_ij of the matrix representative of λ ∈ g*
/// (variable i·n + j).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolynomialObservable {
    pub n: usize,
    pub poly: Poly,
}

impl PolynomialObservable {
    pub fn new(n: usize, poly: Poly) -> Result<Self, PoissonError> {
        if poly.nvars != n * n {
            return Err(PoissonError::Shape { expected: n * n, got: poly.nvars });
        }
        if poly.degree() > MAX_DEGREE {
            return Err(PoissonError::DegreeTooHigh { degree: poly.degree() });
        }
        Ok(Self { n, poly })
    }

    /// L ↦ L_ij.
    pub fn coordinate(n: usize, i: usize, j: usize) -> Self {
        Self { n, poly: Poly::var(n * n, i * n + j) }
    }

    /// The linear function f_{E_ij}(L) = trace(L E_ij) = L_ji.
    pub fn linear(n: usize, i: usize, j: usize) -> Self {
        Self::coordinate(n, j, i)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { n: self.n, poly: self.poly.add(&other.poly) }
    }

    pub fn scale(&self, q: Q) -> Self {
        Self { n: self.n, poly: self.poly.scale(q) }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PoissonError> {
        Self::new(self.n, self.poly.mul(&other.poly))
    }

    pub fn eval(&self, l: &CMat) -> C64 {
        self.poly.eval(&coords(l))
    }

    /// d_L f ∈ g, defined by f(L + εX) = f(L) + ε·trace(X d_L f).
    pub fn differential(&self, l: &CMat) -> CMat {
        let n = self.n;
        let x = coords(l);
        let mut d = mat::zeros(n);
        for v in self.poly.support() {
            d[(v % n, v / n)] = self.poly.partial(v).eval(&x);
        }
        d
    }
}

/// {f, g}(L) = ⟨[d_L f, d_L g], L⟩.
pub fn kks_bracket(f: &PolynomialObservable, g: &PolynomialObservable, l: &CMat) -> C64 {
    let df = f.differential(l);
    let dg = g.differential(l);
    (l * mat::commutator(&df, &dg)).trace()
}

/// The KKS bracket as a polynomial, from {L_ab, L_cd} = δ_ad L_cb − δ_bc L_ad.
/// No degree limit is imposed on the inputs or the result.
pub fn kks_poly(f: &Poly, g: &Poly, n: usize) -> Poly {
    let mut out = Poly::zero(n * n);
    for u in f.support() {
        let fu = f.partial(u);
        let (a, b) = (u / n, u % n);
        for v in g.support() {
            let (c, d) = (v / n, v % n);
            let mut br = Poly::zero(n * n);
            if a == d {
                br = br.add(&Poly::var(n * n, c * n + b));
            }
            if b == c {
                br = br.sub(&Poly::var(n * n, a * n + d));
            }
            if !br.is_zero() {
                out = out.add(&fu.mul(&g.partial(v)).mul(&br));
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// Variable index of the (i, j) entry of b₊ or b₋.
pub fn dual_var(n: usize, side: Side, i: usize, j: usize) -> usize {
    let s = match side {
        Side::Plus => 0,
        Side::Minus => 1,
    };
    s * n * n + i * n + j
}

/// A polynomial in the matrix entries of b₊ and b₋.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualObservable {
    pub n: usize,
    pub poly: Poly,
}

impl DualObservable {
    pub fn new(n: usize, poly: Poly) -> Result<Self, PoissonError> {
        if poly.nvars != 2 * n * n {
            return Err(PoissonError::Shape { expected: 2 * n * n, got: poly.nvars });
        }
        if poly.degree() > MAX_DEGREE {
            return Err(PoissonError::DegreeTooHigh { degree: poly.degree() });
        }
        Ok(Self { n, poly })
    }

    pub fn coordinate(n: usize, side: Side, i: usize, j: usize) -> Self {
        Self { n, poly: Poly::var(2 * n * n, dual_var(n, side, i, j)) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { n: self.n, poly: self.poly.add(&other.poly) }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PoissonError> {
        Self::new(self.n, self.poly.mul(&other.poly))
    }

    pub fn eval(&self, pt: &DualGroupElement) -> C64 {
        self.poly.eval(&dual_coords(pt))
    }

    /// ∂F/∂x_u at pt for every variable.
    pub fn gradient(&self, pt: &DualGroupElement) -> Vec<C64> {
        let x = dual_coords(pt);
        let mut g = vec![C64::new(0.0, 0.0); x.len()];
        for v in self.poly.support() {
            g[v] = self.poly.partial(v).eval(&x);
        }
        g
    }
}

pub fn dual_coords(pt: &DualGroupElement) -> Vec<C64> {
    let mut x = coords(&pt.b_plus);
    x.extend(coords(&pt.b_minus));
    x
}

fn check_constraint(pt: &DualGroupElement) -> Result<(), PoissonError> {
    let residual = pt.fibre_residual();
    if residual > FIBRE_TOL {
        return Err(PoissonError::ConstraintViolated { residual });
    }
    Ok(())
}

/// The r-matrix used for {b_s ⊗, b_t}: r, except −r²¹ for {b₋ ⊗, b₊}, which
/// is what antisymmetry forces given {b₊ ⊗, b₋} = [r, b₊ ⊗ b₋].
fn r_for(r: &TensorElement, s: usize, t: usize) -> TensorElement {
    if s == 1 && t == 0 {
        r.swap().scale(C64::new(-1.0, 0.0))
    } else {
        r.clone()
    }
}

/// Matrix of coordinate brackets {x_u, x_v} at pt for κ = 1:
/// {b ⊗, b′} = [r, b ⊗ b′] for (b, b′) = (b₊, b₊), (b₋, b₋), (b₊, b₋), and
/// [−r²¹, b₋ ⊗ b₊] for (b₋, b₊).
pub fn coordinate_brackets(pt: &DualGroupElement, r: &TensorElement) -> CMat {
    let n = pt.b_plus.nrows();
    let nn = n * n;
    let parts = [&pt.b_plus, &pt.b_minus];
    let mut out = CMat::zeros(2 * nn, 2 * nn);
    for (s, b) in parts.iter().enumerate() {
        for (t, b2) in parts.iter().enumerate() {
            let rop = r_for(r, s, t).to_operator();
            let x = b.kronecker(b2);
            let c = &rop * &x - &x * &rop;
            // c[(i·n + k, j·n + l)] = {b_ij, b′_kl}
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            out[(s * nn + i * n + j, t * nn + k * n + l)] = c[(i * n + k, j * n + l)];
                        }
                    }
                }
            }
        }
    }
    out
}

/// κ·Σ ∂_uF ∂_vG {x_u, x_v} at pt.
pub fn dual_group_bracket(
    f: &DualObservable,
    g: &DualObservable,
    pt: &DualGroupElement,
    kappa: C64,
    r: &TensorElement,
) -> Result<C64, PoissonError> {
    check_constraint(pt)?;
    let p = coordinate_brackets(pt, r);
    let gf = f.gradient(pt);
    let gg = g.gradient(pt);
    let mut s = C64::new(0.0, 0.0);
    for (u, fu) in gf.iter().enumerate() {
        if fu.norm() == 0.0 {
            continue;
        }
        for (v, gv) in gg.iter().enumerate() {
            s += fu * gv * p[(u, v)];
        }
    }
    Ok(s * kappa)
}

fn rational(z: C64) -> Result<Q, PoissonError> {
    if z.im != 0.0 {
        return Err(PoissonError::NonRationalR);
    }
    let q = Q::approximate_float(z.re).ok_or(PoissonError::NonRationalR)?;
    if (poly::to_f64(&q) - z.re).abs() > 1e-15 {
        return Err(PoissonError::NonRationalR);
    }
    Ok(q)
}

/// The dual bracket (κ = 1) as a polynomial; r must have rational real
/// coefficients. Used for exact antisymmetry and Jacobi checks.
pub fn dual_bracket_poly(f: &Poly, g: &Poly, n: usize, r: &TensorElement) -> Result<Poly, PoissonError> {
    let nn = n * n;
    let mut rq = vec![vec![Q::zero(); nn * nn]; 4];
    for (st, table) in rq.iter_mut().enumerate() {
        let rop = r_for(r, st / 2, st % 2).to_operator();
        for p in 0..nn {
            for q in 0..nn {
                table[p * nn + q] = rational(rop[(p, q)])?;
            }
        }
    }
    let var = |u: usize| Poly::var(2 * nn, u);
    let mut out = Poly::zero(2 * nn);
    for u in f.support() {
        let (s, i, j) = (u / nn, (u % nn) / n, u % n);
        let fu = f.partial(u);
        for v in g.support() {
            let (t, k, l) = (v / nn, (v % nn) / n, v % n);
            let rq = &rq[2 * s + t];
            // [r, b ⊗ b′]_{(ik),(jl)}
            let mut br = Poly::zero(2 * nn);
            for a in 0..n {
                for b in 0..n {
                    let left = rq[(i * n + k) * nn + a * n + b];
                    if !left.is_zero() {
                        br = br.add(&var(s * nn + a * n + j).mul(&var(t * nn + b * n + l)).scale(left));
                    }
                    let right = rq[(a * n + b) * nn + j * n + l];
                    if !right.is_zero() {
                        br = br.sub(&var(s * nn + i * n + a).mul(&var(t * nn + k * n + b)).scale(right));
                    }
                }
            }
            if !br.is_zero() {
                out = out.add(&fu.mul(&g.partial(v)).mul(&br));
            }
        }
    }
    Ok(out)
}

/// The family λ ↦ ConnectionData(A, ν∨(λ)) for fixed A and geometry.
#[derive(Clone, Debug)]
pub struct StokesFamily {
    pub ctx: LieContext,
    pub a: CartanElement,
    pub ray: f64,
    pub cut: f64,
    pub cfg: StokesConfig,
}

impl StokesFamily {
    pub fn new(ctx: LieContext, a: CartanElement) -> Result<Self, PoissonError> {
        let n = a.n();
        ConnectionData::new(ctx.clone(), a.clone(), mat::zeros(n))?;
        Ok(Self { ctx, a, ray: -PI / 2.0, cut: PI, cfg: StokesConfig::default() })
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn connection(&self, l: &CMat) -> Result<ConnectionData, PoissonError> {
        Ok(ConnectionData::with_geometry(self.ctx.clone(), self.a.clone(), nu_check(l), self.ray, self.cut)?)
    }

    /// σ(λ) = stokes_map(A, ν∨(λ)).
    pub fn sigma(&self, l: &CMat) -> Result<DualGroupElement, PoissonError> {
        Ok(stokes_map(&self.connection(l)?, &self.cfg)?)
    }

    /// β∘σ(λ) = b₊b₋⁻¹.
    pub fn beta_sigma(&self, l: &CMat) -> Result<CMat, PoissonError> {
        Ok(self.sigma(l)?.beta()?)
    }

    /// The chamber in which A lies, whose positive Borel contains b₊.
    pub fn chamber(&self) -> Chamber {
        Chamber::of(&self.a)
    }

    pub fn r(&self) -> TensorElement {
        standard_r(&self.ctx, &self.chamber())
    }
}

/// Central difference at step h and h/2, Richardson-extrapolated once.
fn richardson<F>(f: F, h: f64) -> Result<Vec<C64>, PoissonError>
where
    F: Fn(f64) -> Result<Vec<C64>, PoissonError>,
{
    let diff = |h: f64| -> Result<Vec<C64>, PoissonError> {
        let p = f(h)?;
        let m = f(-h)?;
        Ok(p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * h)).collect())
    };
    let d1 = diff(h)?;
    let d2 = diff(0.5 * h)?;
    Ok(d1.iter().zip(&d2).map(|(a, b)| (4.0 * b - a) / 3.0).collect())
}

/// σ(λ) together with the differentials d(x_u∘σ) ∈ g of every coordinate.
#[derive(Clone, Debug)]
pub struct SigmaJet {
    pub l: CMat,
    pub point: DualGroupElement,
    pub grads: Vec<CMat>,
}

pub fn sigma_jet(fam: &StokesFamily, l: &CMat, fd_step: f64) -> Result<SigmaJet, PoissonError> {
    let n = fam.n();
    let point = fam.sigma(l)?;
    let mut grads = vec![mat::zeros(n); 2 * n * n];
    for i in 0..n {
        for j in 0..n {
            let e = mat::unit(n, i, j);
            let d = richardson(|h| Ok(dual_coords(&fam.sigma(&(l + &e * C64::new(h, 0.0)))?)), fd_step)?;
            for (u, du) in d.iter().enumerate() {
                grads[u][(j, i)] = *du;
            }
        }
    }
    Ok(SigmaJet { l: l.clone(), point, grads })
}

/// {F∘σ, G∘σ}_KKS(λ) from the jet.
pub fn pushforward_bracket(jet: &SigmaJet, f: &DualObservable, g: &DualObservable) -> C64 {
    let n = jet.l.nrows();
    let lift = |obs: &DualObservable| {
        let mut d = mat::zeros(n);
        for (u, c) in obs.gradient(&jet.point).iter().enumerate() {
            if c.norm() != 0.0 {
                d += &jet.grads[u] * *c;
            }
        }
        d
    };
    (&jet.l * mat::commutator(&lift(f), &lift(g))).trace()
}

/// Both sides of the Poisson-map identity at one sample, per observable pair:
/// the pushforward bracket and the dual bracket at κ = 1.
#[derive(Clone, Debug)]
pub struct SampleBrackets {
    pub l: CMat,
    pub pushforward: Vec<C64>,
    pub model: Vec<C64>,
}

pub fn sample_brackets(
    fam: &StokesFamily,
    samples: &[CMat],
    pairs: &[(DualObservable, DualObservable)],
    r: &TensorElement,
    fd_step: f64,
) -> Result<Vec<SampleBrackets>, PoissonError> {
    let one = C64::new(1.0, 0.0);
    samples
        .iter()
        .map(|l| {
            let jet = sigma_jet(fam, l, fd_step)?;
            let mut pushforward = Vec::with_capacity(pairs.len());
            let mut model = Vec::with_capacity(pairs.len());
            for (f, g) in pairs {
                pushforward.push(pushforward_bracket(&jet, f, g));
                model.push(dual_group_bracket(f, g, &jet.point, one, r)?);
            }
            Ok(SampleBrackets { l: l.clone(), pushforward, model })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct Calibration {
    pub kappa: C64,
    /// max over samples of |κ_sample − κ|/|κ|.
    pub spread: f64,
    /// Least-squares κ per sample (None where the model vanishes).
    pub per_sample: Vec<Option<C64>>,
    /// ‖pushforward − κ·model‖/‖pushforward‖ over all cells.
    pub fit_residual: f64,
}

fn lsq(p: &[C64], d: &[C64]) -> Option<C64> {
    let den: f64 = d.iter().map(|x| x.norm_sqr()).sum();
    if den == 0.0 {
        return None;
    }
    Some(d.iter().zip(p).map(|(d, p)| d.conj() * p).sum::<C64>() / den)
}

/// Least-squares κ with pushforward ≈ κ·model, globally and per sample.
pub fn fit_kappa(samples: &[SampleBrackets]) -> Result<Calibration, PoissonError> {
    let p: Vec<C64> = samples.iter().flat_map(|s| s.pushforward.iter().copied()).collect();
    let d: Vec<C64> = samples.iter().flat_map(|s| s.model.iter().copied()).collect();
    let kappa = lsq(&p, &d).ok_or(PoissonError::NoConsistentScale { spread: f64::INFINITY })?;
    let per_sample: Vec<Option<C64>> = samples.iter().map(|s| lsq(&s.pushforward, &s.model)).collect();
    let spread = per_sample.iter().flatten().fold(0.0f64, |m, k| m.max((k - kappa).norm() / kappa.norm()));
    let num: f64 = p.iter().zip(&d).map(|(p, d)| (p - kappa * d).norm_sqr()).sum();
    let den: f64 = p.iter().map(|x| x.norm_sqr()).sum();
    let fit_residual = if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
    if spread > SPREAD_TOL {
        return Err(PoissonError::NoConsistentScale { spread });
    }
    Ok(Calibration { kappa, spread, per_sample, fit_residual })
}

pub fn calibrate_kappa(
    fam: &StokesFamily,
    samples: &[CMat],
    pairs: &[(DualObservable, DualObservable)],
    r: &TensorElement,
    fd_step: f64,
) -> Result<Calibration, PoissonError> {
    fit_kappa(&sample_brackets(fam, samples, pairs, r, fd_step)?)
}

/// Max over samples and pairs of |pushforward − κ·model|, relative to the
/// largest bracket magnitude at that sample. Samples where every bracket
/// vanishes on both sides contribute their absolute residual (zero).
pub fn residual_at(samples: &[SampleBrackets], kappa: C64) -> f64 {
    let mut worst = 0.0f64;
    for s in samples {
        let scale = s.pushforward.iter().zip(&s.model).fold(0.0f64, |m, (p, d)| m.max(p.norm()).max((kappa * d).norm()));
        for (p, d) in s.pushforward.iter().zip(&s.model) {
            let e = (p - kappa * d).norm();
            worst = worst.max(if scale > 0.0 { e / scale } else { e });
        }
    }
    worst
}

pub fn poisson_map_residual(
    fam: &StokesFamily,
    samples: &[CMat],
    pairs: &[(DualObservable, DualObservable)],
    r: &TensorElement,
    kappa: C64,
    fd_step: f64,
) -> Result<f64, PoissonError> {
    Ok(residual_at(&sample_brackets(fam, samples, pairs, r, fd_step)?, kappa))
}

/// max over directions of ‖D(β∘σ)(0)[λ] − ν(λ)‖_F/‖ν(λ)‖_F.
pub fn linearization_check(fam: &StokesFamily, directions: &[CMat], fd_step: f64) -> Result<f64, PoissonError> {
    let mut worst = 0.0f64;
    for l in directions {
        let d = richardson(|t| Ok(coords(&fam.beta_sigma(&(l * C64::new(t, 0.0)))?)), fd_step)?;
        let target = coords(&lie_core::nu(l));
        let num: f64 = d.iter().zip(&target).map(|(a, b)| (a - b).norm_sqr()).sum();
        let den: f64 = target.iter().map(|x| x.norm_sqr()).sum();
        worst = worst.max((num / den.max(f64::MIN_POSITIVE)).sqrt());
    }
    Ok(worst)
}

/// Sum of the cyclic terms {F,{G,H}} + {G,{H,F}} + {H,{F,G}} as a polynomial.
pub fn jacobiator<B: Fn(&Poly, &Poly) -> Poly>(f: &Poly, g: &Poly, h: &Poly, bracket: B) -> Poly {
    bracket(f, &bracket(g, h)).add(&bracket(g, &bracket(h, f))).add(&bracket(h, &bracket(f, g)))
}
