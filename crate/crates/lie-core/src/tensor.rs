//! Elements of g ⊗ g for g = gl_n, stored as coefficients in the basis E_ij ⊗ E_kl.
//!
//! `coef[(i*n + j, k*n + l)]` is the coefficient of `E_ij ⊗ E_kl`. The same
//! data read as an operator on V ⊗ V has entry `((i,k), (j,l))`.

use crate::mat::{CMat, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct TensorElement {
    pub n: usize,
    pub coef: CMat,
}

impl TensorElement {
    pub fn zeros(n: usize) -> Self {
        Self { n, coef: CMat::zeros(n * n, n * n) }
    }

    pub fn basis(n: usize, i: usize, j: usize, k: usize, l: usize) -> Self {
        let mut t = Self::zeros(n);
        t.coef[(i * n + j, k * n + l)] = C64::new(1.0, 0.0);
        t
    }

    /// x ⊗ y for matrices x, y.
    pub fn outer(x: &CMat, y: &CMat) -> Self {
        let n = x.nrows();
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if x[(i, j)] == C64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..n {
                    for l in 0..n {
                        t.coef[(i * n + j, k * n + l)] = x[(i, j)] * y[(k, l)];
                    }
                }
            }
        }
        t
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.coef[(i * self.n + j, k * self.n + l)]
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { n: self.n, coef: &self.coef + &other.coef }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { n: self.n, coef: &self.coef - &other.coef }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { n: self.n, coef: &self.coef * s }
    }

    /// Leg swap t ↦ t²¹.
    pub fn swap(&self) -> Self {
        Self { n: self.n, coef: self.coef.transpose() }
    }

    /// (id ⊗ λ)(t) with λ(X) = trace(L X).
    pub fn contract_second(&self, l: &CMat) -> CMat {
        let n = self.n;
        CMat::from_fn(n, n, |i, j| {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..n {
                for m in 0..n {
                    s += self.coef[(i * n + j, k * n + m)] * l[(m, k)];
                }
            }
            s
        })
    }

    /// (λ ⊗ id)(t) with λ(X) = trace(L X).
    pub fn contract_first(&self, l: &CMat) -> CMat {
        self.swap().contract_second(l)
    }

    pub fn to_operator(&self) -> CMat {
        let n = self.n;
        let mut op = CMat::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        op[(i * n + k, j * n + l)] = self.coef[(i * n + j, k * n + l)];
                    }
                }
            }
        }
        op
    }

    pub fn from_operator(n: usize, op: &CMat) -> Self {
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        t.coef[(i * n + j, k * n + l)] = op[(i * n + k, j * n + l)];
                    }
                }
            }
        }
        t
    }

    pub fn max_abs(&self) -> f64 {
        crate::mat::max_abs(&self.coef)
    }

    pub fn nonzero_count(&self, tol: f64) -> usize {
        self.coef.iter().filter(|z| z.norm() > tol).count()
    }
}

/// Which two legs of V⊗V⊗V a two-leg operator acts on.
#[derive(Clone, Copy, Debug)]
pub enum Legs {
    L12,
    L13,
    L23,
}

/// Embeds a two-leg tensor as an operator on V⊗V⊗V.
pub fn embed3(t: &TensorElement, legs: Legs) -> CMat {
    let n = t.n;
    let n3 = n * n * n;
    let mut op = CMat::zeros(n3, n3);
    let idx = |a: usize, b: usize, c: usize| (a * n + b) * n + c;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = t.coef[(i * n + j, k * n + l)];
                    if v == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for m in 0..n {
                        match legs {
                            Legs::L12 => op[(idx(i, k, m), idx(j, l, m))] += v,
                            Legs::L13 => op[(idx(i, m, k), idx(j, m, l))] += v,
                            Legs::L23 => op[(idx(m, i, k), idx(m, j, l))] += v,
                        }
                    }
                }
            }
        }
    }
    op
}

/// [r12,r13] + [r12,r23] + [r13,r23], computed on V⊗V⊗V.
pub fn cybe(r: &TensorElement) -> CMat {
    let r12 = embed3(r, Legs::L12);
    let r13 = embed3(r, Legs::L13);
    let r23 = embed3(r, Legs::L23);
    let br = |a: &CMat, b: &CMat| a * b - b * a;
    br(&r12, &r13) + br(&r12, &r23) + br(&r13, &r23)
}
