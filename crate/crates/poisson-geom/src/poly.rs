//! Sparse polynomials with rational coefficients in numbered variables.

use lie_core::mat::C64;
use num_rational::Rational64 as Q;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// Monomials are sorted variable lists (so x₀²x₃ is [0, 0, 3]).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<usize>, Q>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, q: Q) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Vec::new(), q);
        p
    }

    pub fn var(nvars: usize, v: usize) -> Self {
        assert!(v < nvars, "variable {v} out of range");
        let mut p = Self::zero(nvars);
        p.add_term(vec![v], Q::one());
        p
    }

    fn add_term(&mut self, mono: Vec<usize>, q: Q) {
        if q.is_zero() {
            return;
        }
        let e = self.terms.entry(mono.clone()).or_insert_with(Q::zero);
        *e += q;
        if e.is_zero() {
            self.terms.remove(&mono);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.len()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut p = self.clone();
        for (m, q) in &other.terms {
            p.add_term(m.clone(), *q);
        }
        p
    }

    pub fn scale(&self, s: Q) -> Self {
        let mut p = Self::zero(self.nvars);
        for (m, q) in &self.terms {
            p.add_term(m.clone(), q * s);
        }
        p
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-Q::one()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut p = Self::zero(self.nvars);
        for (m1, q1) in &self.terms {
            for (m2, q2) in &other.terms {
                let mut m: Vec<usize> = m1.iter().chain(m2.iter()).copied().collect();
                m.sort_unstable();
                p.add_term(m, q1 * q2);
            }
        }
        p
    }

    pub fn partial(&self, v: usize) -> Self {
        let mut p = Self::zero(self.nvars);
        for (m, q) in &self.terms {
            let k = m.iter().filter(|&&x| x == v).count();
            if k == 0 {
                continue;
            }
            let pos = m.iter().position(|&x| x == v).unwrap();
            let mut rest = m.clone();
            rest.remove(pos);
            p.add_term(rest, q * Q::from_integer(k as i64));
        }
        p
    }

    /// Variables that occur in some monomial.
    pub fn support(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.terms.keys().flatten().copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn eval(&self, x: &[C64]) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for (m, q) in &self.terms {
            let mut t = C64::new(to_f64(q), 0.0);
            for &v in m {
                t *= x[v];
            }
            s += t;
        }
        s
    }
}

pub fn to_f64(q: &Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}
