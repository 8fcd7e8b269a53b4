//! Root combinatorics and invariant tensors for gl_n (and sl_n) with the
//! diagonal Cartan subalgebra and the trace form (X, Y) = trace(XY).

pub mod mat;
pub mod tensor;

use std::f64::consts::PI;

pub use mat::{CMat, C64};
pub use tensor::TensorElement;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgebraKind {
    Gl,
    Sl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LieContext {
    pub n: usize,
    pub kind: AlgebraKind,
}

impl LieContext {
    pub fn gl(n: usize) -> Self {
        assert!(n >= 1, "n must be positive");
        Self { n, kind: AlgebraKind::Gl }
    }

    pub fn sl(n: usize) -> Self {
        assert!(n >= 1, "n must be positive");
        Self { n, kind: AlgebraKind::Sl }
    }

    pub fn roots(&self) -> Vec<Root> {
        let mut v = Vec::with_capacity(self.n * (self.n - 1));
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    v.push(Root { i, j });
                }
            }
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CartanElement {
    pub entries: Vec<C64>,
}

impl CartanElement {
    pub fn new(entries: Vec<C64>) -> Self {
        Self { entries }
    }

    pub fn real(entries: &[f64]) -> Self {
        Self { entries: entries.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn is_regular(&self) -> bool {
        let e = &self.entries;
        (0..e.len()).all(|i| (i + 1..e.len()).all(|j| e[i] != e[j]))
    }

    pub fn min_gap(&self) -> f64 {
        let e = &self.entries;
        let mut g = f64::INFINITY;
        for i in 0..e.len() {
            for j in i + 1..e.len() {
                g = g.min((e[i] - e[j]).norm());
            }
        }
        g
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }

    pub fn to_matrix(&self) -> CMat {
        mat::diag(&self.entries)
    }

    /// Removes the trace, for the sl_n subcase.
    pub fn project_sl(&self) -> Self {
        let n = self.entries.len() as f64;
        let m: C64 = self.entries.iter().sum::<C64>() / n;
        Self { entries: self.entries.iter().map(|&x| x - m).collect() }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { entries: self.entries.iter().map(|&x| x * s).collect() }
    }
}

/// The root α_ij(A) = a_i − a_j; its root vector is E_ij.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Root {
    pub i: usize,
    pub j: usize,
}

impl Root {
    pub fn value_at(&self, a: &CartanElement) -> C64 {
        a.entries[self.i] - a.entries[self.j]
    }

    pub fn neg(&self) -> Root {
        Root { i: self.j, j: self.i }
    }

    pub fn x(&self, n: usize) -> CMat {
        mat::unit(n, self.i, self.j)
    }
}

#[derive(Clone, Debug)]
pub struct RootData {
    pub values: Vec<(Root, C64)>,
    pub regular: bool,
    /// Stokes ray angles in [0, 2π), sorted and deduplicated.
    pub stokes_rays: Vec<f64>,
}

pub fn root_data(ctx: &LieContext, a: &CartanElement) -> RootData {
    let values: Vec<(Root, C64)> = ctx.roots().into_iter().map(|r| (r, r.value_at(a))).collect();
    let regular = a.is_regular();
    let mut rays: Vec<f64> = values
        .iter()
        .filter(|(_, v)| v.norm() > 0.0)
        .map(|(_, v)| v.arg().rem_euclid(2.0 * PI))
        .collect();
    rays.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut stokes_rays: Vec<f64> = Vec::new();
    for r in rays {
        let dup = stokes_rays.last().is_some_and(|&p| (r - p).abs() < 1e-12);
        if !dup {
            stokes_rays.push(r);
        }
    }
    if stokes_rays.len() > 1 && (stokes_rays[0] + 2.0 * PI - stokes_rays[stokes_rays.len() - 1]) < 1e-12 {
        stokes_rays.pop();
    }
    RootData { values, regular, stokes_rays }
}

pub fn cartan_project(b: &CMat) -> CartanElement {
    CartanElement::new(mat::diag_of(b))
}

/// A Weyl chamber encoded by an ordering: α_ij is positive iff i precedes j.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chamber {
    position: Vec<usize>,
}

impl Chamber {
    /// `order[p]` is the index placed at position p.
    pub fn from_order(order: &[usize]) -> Self {
        let mut position = vec![0; order.len()];
        for (p, &i) in order.iter().enumerate() {
            position[i] = p;
        }
        Self { position }
    }

    /// α_ij positive iff i < j.
    pub fn fundamental(n: usize) -> Self {
        Self { position: (0..n).collect() }
    }

    pub fn opposite(&self) -> Self {
        let n = self.position.len();
        Self { position: self.position.iter().map(|p| n - 1 - p).collect() }
    }

    /// The chamber {α : Re α(μ) > 0}; μ must have distinct real parts.
    pub fn of(mu: &CartanElement) -> Self {
        let mut order: Vec<usize> = (0..mu.n()).collect();
        order.sort_by(|&a, &b| mu.entries[b].re.partial_cmp(&mu.entries[a].re).unwrap());
        Self::from_order(&order)
    }

    pub fn is_positive(&self, r: &Root) -> bool {
        self.position[r.i] < self.position[r.j]
    }

    pub fn positive_roots(&self) -> Vec<Root> {
        let n = self.position.len();
        LieContext::gl(n).roots().into_iter().filter(|r| self.is_positive(r)).collect()
    }

    pub fn n(&self) -> usize {
        self.position.len()
    }
}

#[derive(Clone, Debug)]
pub struct CasimirTensors {
    pub omega: TensorElement,
    pub omega0: TensorElement,
    pub omega_alpha: Vec<(Root, TensorElement)>,
    pub omega_plus: TensorElement,
    pub omega_minus: TensorElement,
}

/// Ω_α = x_α ⊗ x_{−α} = E_ij ⊗ E_ji.
pub fn omega_alpha(n: usize, r: &Root) -> TensorElement {
    TensorElement::basis(n, r.i, r.j, r.j, r.i)
}

pub fn casimir_tensors(ctx: &LieContext, chamber: &Chamber) -> CasimirTensors {
    let n = ctx.n;
    let mut omega0 = TensorElement::zeros(n);
    for i in 0..n {
        omega0.coef[(i * n + i, i * n + i)] = C64::new(1.0, 0.0);
    }
    if ctx.kind == AlgebraKind::Sl {
        let s = C64::new(1.0 / n as f64, 0.0);
        for i in 0..n {
            for k in 0..n {
                omega0.coef[(i * n + i, k * n + k)] -= s;
            }
        }
    }
    let mut omega = omega0.clone();
    let mut omega_plus = TensorElement::zeros(n);
    let mut omega_minus = TensorElement::zeros(n);
    let mut oa = Vec::new();
    for r in ctx.roots() {
        let t = omega_alpha(n, &r);
        omega = omega.add(&t);
        if chamber.is_positive(&r) {
            omega_plus = omega_plus.add(&t);
        } else {
            omega_minus = omega_minus.add(&t);
        }
        oa.push((r, t));
    }
    CasimirTensors { omega, omega0, omega_alpha: oa, omega_plus, omega_minus }
}

/// r = Ω₊ + ½Ω₀, first leg in the positive Borel of `chamber`.
pub fn standard_r(ctx: &LieContext, chamber: &Chamber) -> TensorElement {
    let ct = casimir_tensors(ctx, chamber);
    ct.omega_plus.add(&ct.omega0.scale(C64::new(0.5, 0.0)))
}

/// ν(λ) = L.
pub fn nu(l: &CMat) -> CMat {
    l.clone()
}

/// ν∨(λ) = −L/(2πι).
pub fn nu_check(l: &CMat) -> CMat {
    l * (-C64::new(1.0, 0.0) / mat::TWO_PI_I)
}

/// λ(X) = trace(L X).
pub fn pair(l: &CMat, x: &CMat) -> C64 {
    (l * x).trace()
}

/// ‖[x⊗1 + 1⊗x, t]‖ as operators on V⊗V.
pub fn invariance_residual(t: &TensorElement, x: &CMat) -> f64 {
    let n = t.n;
    let id = mat::eye(n);
    let d = x.kronecker(&id) + id.kronecker(x);
    let op = t.to_operator();
    mat::frob(&(&d * &op - &op * &d))
}
