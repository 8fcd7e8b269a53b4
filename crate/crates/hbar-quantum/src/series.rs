//! Multi-leg PBW tensors and sfh-truncated series of them.
//!
//! The series variable is sfh; ħ = 2πι·sfh. All conversions between the two
//! go through `hbar_factor`.

use crate::pbw::{PbwContext, PbwElement, Word};
use crate::HbarError;
use lie_core::mat::{CMat, C64, TWO_PI_I};
use lie_core::TensorElement;
use std::collections::BTreeMap;

/// (2πι)^m, the factor turning an ħ^m coefficient into an sfh^m one.
pub fn hbar_factor(m: usize) -> C64 {
    TWO_PI_I.powu(m as u32)
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// A k-fold tensor of PBW monomials: one normal-ordered word per leg.
#[derive(Clone, Debug, PartialEq)]
pub struct PbwTensor {
    pub legs: usize,
    pub terms: BTreeMap<Vec<Word>, C64>,
}

impl PbwTensor {
    pub fn zero(legs: usize) -> Self {
        Self { legs, terms: BTreeMap::new() }
    }

    pub fn unit(legs: usize) -> Self {
        Self::monomial(vec![Vec::new(); legs], C64::new(1.0, 0.0))
    }

    pub fn monomial(key: Vec<Word>, c: C64) -> Self {
        let legs = key.len();
        let mut t = Self::zero(legs);
        t.push(key, c);
        t
    }

    pub fn from_element(x: &PbwElement) -> Self {
        Self { legs: 1, terms: x.terms.iter().map(|(w, c)| (vec![w.clone()], *c)).collect() }
    }

    /// x₁ ⊗ x₂ ⊗ ….
    pub fn outer(parts: &[&PbwElement]) -> Self {
        let mut t = Self::unit(0);
        for p in parts {
            let mut next = Self::zero(t.legs + 1);
            for (k, a) in &t.terms {
                for (w, b) in &p.terms {
                    let mut key = k.clone();
                    key.push(w.clone());
                    next.push(key, a * b);
                }
            }
            t = next;
        }
        t
    }

    /// Coefficient of E_ij ⊗ E_kl read off a g⊗g tensor.
    pub fn from_tensor_element(ctx: &PbwContext, t: &TensorElement) -> Self {
        let n = t.n;
        let mut out = Self::zero(2);
        for a in 0..n * n {
            for b in 0..n * n {
                let c = t.coef[(a, b)];
                if c != zero() {
                    out.push(vec![vec![ctx.gen(a / n, a % n)], vec![ctx.gen(b / n, b % n)]], c);
                }
            }
        }
        out
    }

    /// Back to g⊗g; fails unless every term has degree one in both legs.
    pub fn to_tensor_element(&self, ctx: &PbwContext) -> Result<TensorElement, HbarError> {
        if self.legs != 2 {
            return Err(HbarError::InvalidInput(format!("expected 2 legs, got {}", self.legs)));
        }
        let n = ctx.n;
        let mut t = TensorElement::zeros(n);
        for (k, c) in &self.terms {
            if k[0].len() != 1 || k[1].len() != 1 {
                return Err(HbarError::InvalidInput("term outside g⊗g".into()));
            }
            let (i, j) = ctx.indices(k[0][0]);
            let (p, q) = ctx.indices(k[1][0]);
            t.coef[(i * n + j, p * n + q)] += c;
        }
        Ok(t)
    }

    fn push(&mut self, key: Vec<Word>, c: C64) {
        if c == zero() {
            return;
        }
        let e = self.terms.entry(key).or_insert(zero());
        *e += c;
        if *e == zero() {
            // exact cancellation
            self.terms.retain(|_, v| *v != zero());
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.legs, o.legs, "leg count mismatch");
        let mut t = self.clone();
        for (k, c) in &o.terms {
            t.push(k.clone(), *c);
        }
        t
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut t = Self::zero(self.legs);
        for (k, c) in &self.terms {
            t.push(k.clone(), c * s);
        }
        t
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Maximal word length in `leg`.
    pub fn leg_degree(&self, leg: usize) -> usize {
        self.terms.keys().map(|k| k[leg].len()).max().unwrap_or(0)
    }

    /// Maximal total word length.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|k| k.iter().map(|w| w.len()).sum()).max().unwrap_or(0)
    }

    /// Leg-wise product.
    pub fn mul(&self, ctx: &PbwContext, o: &Self) -> Result<Self, HbarError> {
        assert_eq!(self.legs, o.legs, "leg count mismatch");
        let mut out = Self::zero(self.legs);
        for (k1, a) in &self.terms {
            for (k2, b) in &o.terms {
                // product of normal forms leg by leg, expanded
                let mut acc = Self::monomial(Vec::new(), a * b);
                for leg in 0..self.legs {
                    let x = PbwElement { terms: BTreeMap::from([(k1[leg].clone(), C64::new(1.0, 0.0))]) };
                    let y = PbwElement { terms: BTreeMap::from([(k2[leg].clone(), C64::new(1.0, 0.0))]) };
                    let p = ctx.mul(&x, &y)?;
                    let mut next = Self::zero(leg + 1);
                    for (key, c) in &acc.terms {
                        for (w, d) in &p.terms {
                            let mut kk = key.clone();
                            kk.push(w.clone());
                            next.push(kk, c * d);
                        }
                    }
                    acc = next;
                }
                for (k, c) in acc.terms {
                    out.push(k, c);
                }
            }
        }
        Ok(out)
    }

    /// Leg swap for two legs.
    pub fn swap(&self) -> Self {
        assert_eq!(self.legs, 2);
        let mut t = Self::zero(2);
        for (k, c) in &self.terms {
            t.push(vec![k[1].clone(), k[0].clone()], *c);
        }
        t
    }

    /// Inserts a unit leg at position `at` (so j ⊗ 1 is `insert_unit(2)`).
    pub fn insert_unit(&self, at: usize) -> Self {
        let mut t = Self::zero(self.legs + 1);
        for (k, c) in &self.terms {
            let mut kk = k.clone();
            kk.insert(at, Vec::new());
            t.push(kk, *c);
        }
        t
    }

    /// Applies the n-fold coproduct to `leg` (n = 0 is the counit, n = 1
    /// the identity). Words split by assigning each letter to an output leg;
    /// subsequences of sorted words stay sorted.
    pub fn split_leg(&self, leg: usize, n: usize) -> Self {
        let mut t = Self::zero(self.legs + n - 1);
        for (k, c) in &self.terms {
            let w = &k[leg];
            if n == 0 {
                if w.is_empty() {
                    let mut kk = k.clone();
                    kk.remove(leg);
                    t.push(kk, *c);
                }
                continue;
            }
            let d = w.len();
            let total = n.pow(d as u32);
            for code in 0..total {
                let mut parts = vec![Vec::new(); n];
                let mut rest = code;
                for &g in w {
                    parts[rest % n].push(g);
                    rest /= n;
                }
                let mut kk = k[..leg].to_vec();
                kk.extend(parts);
                kk.extend_from_slice(&k[leg + 1..]);
                t.push(kk, *c);
            }
        }
        t
    }

    /// Δ on one leg.
    pub fn coproduct(&self, leg: usize) -> Self {
        self.split_leg(leg, 2)
    }

    /// π^{⊗k}: drops every term with a scalar leg.
    pub fn project_augmentation(&self) -> Self {
        let mut t = Self::zero(self.legs);
        for (k, c) in &self.terms {
            if k.iter().all(|w| !w.is_empty()) {
                t.push(k.clone(), *c);
            }
        }
        t
    }

    /// (id ⊗ λ) for two legs, λ(E_ij) = trace(L E_ij) = L_ji, as a matrix in
    /// the vector representation of the first leg. Second legs must have
    /// degree ≤ 1 (a scalar second leg is evaluated by the counit).
    pub fn contract_second(&self, ctx: &PbwContext, l: &CMat) -> CMat {
        let mut m = CMat::zeros(ctx.n, ctx.n);
        for (k, c) in &self.terms {
            let lam = match k[1].as_slice() {
                [] => C64::new(1.0, 0.0),
                [g] => {
                    let (i, j) = ctx.indices(*g);
                    l[(j, i)]
                }
                _ => panic!("second leg has degree > 1"),
            };
            let x = PbwElement { terms: BTreeMap::from([(k[0].clone(), C64::new(1.0, 0.0))]) };
            m += ctx.to_matrix(&x) * (c * lam);
        }
        m
    }
}

/// Σ_m sfh^m c_m truncated above order N, each c_m a k-leg PBW tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorSeries {
    pub ctx: PbwContext,
    pub legs: usize,
    /// coefficient of sfh^m
    pub coeffs: Vec<PbwTensor>,
}

impl TensorSeries {
    pub fn zero(ctx: &PbwContext, legs: usize, order: usize) -> Self {
        Self { ctx: ctx.clone(), legs, coeffs: vec![PbwTensor::zero(legs); order + 1] }
    }

    pub fn one(ctx: &PbwContext, legs: usize, order: usize) -> Self {
        let mut s = Self::zero(ctx, legs, order);
        s.coeffs[0] = PbwTensor::unit(legs);
        s
    }

    /// From coefficients of ħ^m.
    pub fn from_hbar(ctx: &PbwContext, hbar_coeffs: Vec<PbwTensor>) -> Result<Self, HbarError> {
        let legs = hbar_coeffs.first().map(|c| c.legs).unwrap_or(1);
        let mut s = Self::zero(ctx, legs, hbar_coeffs.len().saturating_sub(1));
        for (m, c) in hbar_coeffs.into_iter().enumerate() {
            if c.legs != legs {
                return Err(HbarError::InvalidInput("leg count differs between orders".into()));
            }
            for leg in 0..legs {
                if c.leg_degree(leg) > ctx.cap {
                    return Err(HbarError::DegreeOverflow { degree: c.leg_degree(leg), cap: ctx.cap });
                }
            }
            s.coeffs[m] = c.scale(hbar_factor(m));
        }
        Ok(s)
    }

    /// 1⊗1 + ħ·t for t ∈ g⊗g.
    pub fn from_order1(ctx: &PbwContext, t: &TensorElement) -> Self {
        let one = PbwTensor::unit(2);
        let c1 = PbwTensor::from_tensor_element(ctx, t).scale(hbar_factor(1));
        Self { ctx: ctx.clone(), legs: 2, coeffs: vec![one, c1] }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of ħ^m.
    pub fn hbar_coeff(&self, m: usize) -> PbwTensor {
        self.coeffs[m].scale(C64::new(1.0, 0.0) / hbar_factor(m))
    }

    /// Per-order, per-leg filtration degrees, recomputed on each call.
    pub fn filtration_degrees(&self) -> Vec<Vec<usize>> {
        self.coeffs.iter().map(|c| (0..self.legs).map(|l| c.leg_degree(l)).collect()).collect()
    }

    /// True iff the order-m coefficient has degree ≤ m in `leg` for every m.
    pub fn uprime_pattern(&self, leg: usize) -> bool {
        self.coeffs.iter().enumerate().all(|(m, c)| c.leg_degree(leg) <= m)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.order().min(o.order());
        let coeffs = (0..=n).map(|m| self.coeffs[m].add(&o.coeffs[m])).collect();
        Self { ctx: self.ctx.clone(), legs: self.legs, coeffs }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { ctx: self.ctx.clone(), legs: self.legs, coeffs: self.coeffs.iter().map(|c| c.scale(s)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Result<Self, HbarError> {
        let n = self.order().min(o.order());
        let mut out = Self::zero(&self.ctx, self.legs, n);
        for a in 0..=n {
            for b in 0..=(n - a) {
                if self.coeffs[a].is_zero() || o.coeffs[b].is_zero() {
                    continue;
                }
                let p = self.coeffs[a].mul(&self.ctx, &o.coeffs[b])?;
                out.coeffs[a + b] = out.coeffs[a + b].add(&p);
            }
        }
        Ok(out)
    }

    pub fn commutator(&self, o: &Self) -> Result<Self, HbarError> {
        Ok(self.mul(o)?.sub(&o.mul(self)?))
    }

    /// Division by ħ: requires a vanishing order-0 part; loses one order.
    pub fn divide_hbar(&self) -> Result<Self, HbarError> {
        if !self.coeffs[0].is_zero() || self.order() == 0 {
            return Err(HbarError::InvalidInput("series is not divisible by ħ".into()));
        }
        let f = C64::new(1.0, 0.0) / hbar_factor(1);
        let coeffs = self.coeffs[1..].iter().map(|c| c.scale(f)).collect();
        Ok(Self { ctx: self.ctx.clone(), legs: self.legs, coeffs })
    }

    /// Δ on one leg.
    pub fn coproduct(&self, leg: usize) -> Self {
        self.map(|c| c.coproduct(leg), self.legs + 1)
    }

    /// π^{⊗n}∘Δ^{(n)} of a one-leg series.
    pub fn pi_delta(&self, n: usize) -> Self {
        assert_eq!(self.legs, 1);
        self.map(|c| c.split_leg(0, n).project_augmentation(), n)
    }

    fn map<F: Fn(&PbwTensor) -> PbwTensor>(&self, f: F, legs: usize) -> Self {
        Self { ctx: self.ctx.clone(), legs, coeffs: self.coeffs.iter().map(f).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }
}

/// Largest n for which the Δ-criterion is evaluated.
pub const MAX_COPRODUCT_FOLD: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct UPrimeReport {
    /// π^{⊗n}Δ^{(n)}(x) ∈ ħ^n U^{⊗n} for n ≤ 3, up to the order checked
    pub delta_criterion: bool,
    /// the order-m coefficient has filtration degree ≤ m
    pub filtration_criterion: bool,
    /// first failure found, as (order, n) for the Δ-criterion
    pub delta_witness: Option<(usize, usize)>,
    /// first failure found, as (order, degree) for the filtration criterion
    pub filtration_witness: Option<(usize, usize)>,
}

impl UPrimeReport {
    pub fn member(&self) -> bool {
        self.delta_criterion && self.filtration_criterion
    }

    pub fn agree(&self) -> bool {
        self.delta_criterion == self.filtration_criterion
    }
}

/// Membership of a one-leg series in U′, checked up to order `up_to`.
pub fn uprime_membership(x: &TensorSeries, up_to: usize) -> Result<UPrimeReport, HbarError> {
    if x.legs != 1 {
        return Err(HbarError::InvalidInput("U′ membership needs a one-leg series".into()));
    }
    if up_to > x.order() {
        return Err(HbarError::InvalidInput(format!("order {up_to} exceeds truncation {}", x.order())));
    }
    let mut delta_witness = None;
    'outer: for n in 1..=MAX_COPRODUCT_FOLD {
        let p = x.pi_delta(n);
        for m in 0..n.min(up_to + 1) {
            if !p.coeffs[m].is_zero() {
                delta_witness = Some((m, n));
                break 'outer;
            }
        }
    }
    let filtration_witness = (0..=up_to).map(|m| (m, x.coeffs[m].degree())).find(|&(m, d)| d > m);
    Ok(UPrimeReport {
        delta_criterion: delta_witness.is_none(),
        filtration_criterion: filtration_witness.is_none(),
        delta_witness,
        filtration_witness,
    })
}

/// The components π^{⊗n}Δ^{(n)}(x)/ħ^n at ħ = 0, n = 0..=n_max.
pub fn i_delta(x: &TensorSeries, n_max: usize) -> Result<Vec<PbwTensor>, HbarError> {
    if n_max > x.order() {
        return Err(HbarError::InvalidInput(format!("n_max {n_max} exceeds truncation {}", x.order())));
    }
    let rep = uprime_membership(x, x.order())?;
    if !rep.member() {
        let (order, degree) = rep.filtration_witness.or(rep.delta_witness).unwrap_or((0, 0));
        return Err(HbarError::NotInUPrime { order, degree });
    }
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(PbwTensor::monomial(Vec::new(), x.coeffs[0].terms.get(&vec![Vec::new()]).copied().unwrap_or(zero())));
    for n in 1..=n_max {
        let c = x.pi_delta(n).hbar_coeff(n);
        debug_assert!(c.terms.keys().all(|k| k.iter().all(|w| w.len() == 1)));
        out.push(c);
    }
    Ok(out)
}

/// A polynomial map on g* with values in Ug: λ ↦ Σ u·Π λ(E_g).
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SclMap {
    /// sorted generator multiset of the λ-monomial ↦ its Ug coefficient
    pub terms: BTreeMap<Vec<usize>, PbwElement>,
}

impl SclMap {
    pub fn eval(&self, ctx: &PbwContext, l: &CMat) -> PbwElement {
        let mut out = PbwElement::zero();
        for (mono, u) in &self.terms {
            let mut s = C64::new(1.0, 0.0);
            for &g in mono {
                let (i, j) = ctx.indices(g);
                s *= l[(j, i)];
            }
            out = out.add(&u.scale(s));
        }
        out
    }

    pub fn eval_matrix(&self, ctx: &PbwContext, l: &CMat) -> CMat {
        ctx.to_matrix(&self.eval(ctx, l))
    }
}

/// Semiclassical limit of a two-leg series in U ⊗ U′: reduction mod
/// ħ·(U⊗U′), where ħ^m x₁⋯x_m in the second leg becomes Π λ(x_i).
pub fn scl_extract(x: &TensorSeries) -> Result<SclMap, HbarError> {
    if x.legs != 2 {
        return Err(HbarError::InvalidInput("scl needs a two-leg series".into()));
    }
    for (m, c) in x.coeffs.iter().enumerate() {
        let d = c.leg_degree(1);
        if d > m {
            return Err(HbarError::PatternViolation { order: m, degree: d });
        }
    }
    let mut out = SclMap::default();
    for (m, c) in x.coeffs.iter().enumerate() {
        let f = C64::new(1.0, 0.0) / hbar_factor(m);
        for (k, v) in &c.terms {
            // lower second-leg degree lies in ħ·(U⊗U′)
            if k[1].len() != m {
                continue;
            }
            let mut mono = k[1].clone();
            mono.sort_unstable();
            let u = PbwElement { terms: BTreeMap::from([(k[0].clone(), v * f)]) };
            let e = out.terms.entry(mono).or_default();
            *e = e.add(&u);
        }
    }
    out.terms.retain(|_, u| !u.is_zero());
    Ok(out)
}
