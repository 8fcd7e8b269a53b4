//! Normal-ordered PBW monomials in the generators E_ij of U(gl_n).
//!
//! Generator E_ij has index g = i·n + j. A `PbwContext` fixes a total order
//! on generators; a monomial is a word sorted by that order. Reduction uses
//! [E_ab, E_cd] = δ_bc E_ad − δ_da E_cb.

use crate::HbarError;
use lie_core::mat::{self, CMat, C64};
use std::collections::BTreeMap;

pub type Word = Vec<usize>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PbwContext {
    pub n: usize,
    /// rank[g] is the position of generator g in the total order
    rank: Vec<usize>,
    pub cap: usize,
}

impl PbwContext {
    /// Order E_11 < E_12 < … < E_nn (lexicographic in (i, j)), degree cap 2.
    pub fn new(n: usize) -> Self {
        Self { n, rank: (0..n * n).collect(), cap: 2 }
    }

    /// `order[p]` is the generator placed at position p.
    pub fn with_order(n: usize, order: &[usize]) -> Self {
        assert_eq!(order.len(), n * n);
        let mut rank = vec![0; n * n];
        for (p, &g) in order.iter().enumerate() {
            rank[g] = p;
        }
        Self { n, rank, cap: 2 }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn gen(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    pub fn indices(&self, g: usize) -> (usize, usize) {
        (g / self.n, g % self.n)
    }

    pub fn num_generators(&self) -> usize {
        self.n * self.n
    }

    fn bracket(&self, a: usize, b: usize) -> Vec<(usize, C64)> {
        let (i, j) = self.indices(a);
        let (k, l) = self.indices(b);
        let mut out = Vec::new();
        if j == k {
            out.push((self.gen(i, l), C64::new(1.0, 0.0)));
        }
        if l == i {
            out.push((self.gen(k, j), C64::new(-1.0, 0.0)));
        }
        out
    }

    fn accumulate(&self, word: Word, c: C64, out: &mut BTreeMap<Word, C64>) {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        let pos = word.windows(2).position(|w| self.rank[w[0]] > self.rank[w[1]]);
        match pos {
            None => *out.entry(word).or_insert(C64::new(0.0, 0.0)) += c,
            Some(p) => {
                let (a, b) = (word[p], word[p + 1]);
                let mut swapped = word.clone();
                swapped.swap(p, p + 1);
                self.accumulate(swapped, c, out);
                for (g, s) in self.bracket(a, b) {
                    let mut w = Vec::with_capacity(word.len() - 1);
                    w.extend_from_slice(&word[..p]);
                    w.push(g);
                    w.extend_from_slice(&word[p + 2..]);
                    self.accumulate(w, c * s, out);
                }
            }
        }
    }

    /// Normal form of coefficient·word.
    pub fn normal_form(&self, word: &[usize], coef: C64) -> Result<PbwElement, HbarError> {
        if word.len() > self.cap {
            return Err(HbarError::DegreeOverflow { degree: word.len(), cap: self.cap });
        }
        let mut terms = BTreeMap::new();
        self.accumulate(word.to_vec(), coef, &mut terms);
        Ok(PbwElement { terms }.pruned())
    }

    pub fn one(&self) -> PbwElement {
        PbwElement::scalar(C64::new(1.0, 0.0))
    }

    pub fn generator(&self, i: usize, j: usize) -> PbwElement {
        PbwElement { terms: BTreeMap::from([(vec![self.gen(i, j)], C64::new(1.0, 0.0))]) }
    }

    pub fn mul(&self, x: &PbwElement, y: &PbwElement) -> Result<PbwElement, HbarError> {
        let mut terms = BTreeMap::new();
        for (u, a) in &x.terms {
            for (v, b) in &y.terms {
                let mut w = u.clone();
                w.extend_from_slice(v);
                if w.len() > self.cap {
                    return Err(HbarError::DegreeOverflow { degree: w.len(), cap: self.cap });
                }
                self.accumulate(w, a * b, &mut terms);
            }
        }
        Ok(PbwElement { terms }.pruned())
    }

    pub fn commutator(&self, x: &PbwElement, y: &PbwElement) -> Result<PbwElement, HbarError> {
        Ok(self.mul(x, y)?.sub(&self.mul(y, x)?))
    }

    /// Image in the vector representation.
    pub fn to_matrix(&self, x: &PbwElement) -> CMat {
        let mut m = mat::zeros(self.n);
        for (w, c) in &x.terms {
            let mut p = mat::eye(self.n);
            for &g in w {
                let (i, j) = self.indices(g);
                p *= mat::unit(self.n, i, j);
            }
            m += p * *c;
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct PbwElement {
    pub terms: BTreeMap<Word, C64>,
}

impl PbwElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn scalar(c: C64) -> Self {
        Self { terms: BTreeMap::from([(Vec::new(), c)]) }.pruned()
    }

    fn pruned(mut self) -> Self {
        self.terms.retain(|_, c| *c != C64::new(0.0, 0.0));
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Filtration degree; −1 is not representable so zero has degree 0.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|w| w.len()).max().unwrap_or(0)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut t = self.terms.clone();
        for (w, c) in &o.terms {
            *t.entry(w.clone()).or_insert(C64::new(0.0, 0.0)) += c;
        }
        Self { terms: t }.pruned()
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { terms: self.terms.iter().map(|(w, c)| (w.clone(), c * s)).collect() }.pruned()
    }

    /// Counit: the constant term.
    pub fn counit(&self) -> C64 {
        self.terms.get(&Vec::new()).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.norm()))
    }
}
