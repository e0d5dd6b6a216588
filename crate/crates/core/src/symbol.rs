//! Finite symbols `sum_k c_k(t,x) xi^alpha_k <xi>^(-p_k)`.
//!
//! Weights are signed: `p = -1` stores the bare `<xi>` on the superdiagonal of the companion
//! matrix, and canonical forms of positive-order polynomials carry positive powers of
//! `<xi>`. Coefficients are [`Expr`] trees combined with the folding constructors.
//!
//! # Canonical form
//!
//! `<xi>^2 = 1 + |xi|^2`, so monomials are not independent functions. [`SymbolPoly::canonicalize`]
//! eliminates `xi1^2` in favour of `<xi>^2 - 1 - xi2^2 - ... - xin^2` until every term has
//! `alpha_1 <= 1`. In one dimension this is exactly `xi^2 -> <xi>^2 - 1`. The resulting
//! monomials `xi1^e xi'^beta <xi>^k` (`e <= 1`) are linearly independent functions, so a
//! canonical symbol vanishes iff all its coefficients vanish, and its order is the largest
//! nominal order `|alpha| - p` carrying a non-vanishing coefficient.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Bindings, DiffError, EvalError, Expr};
use crate::scalar::{czero, japanese_bracket, Real};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SymbolError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("weight shift by {shift} leaves a negative <xi>-weight {weight}")]
    NegativeWeight { shift: i32, weight: i32 },
    #[error(transparent)]
    Diff(#[from] DiffError),
}

/// Key of a term: `<xi>`-weight `p` first, then the multi-index. The derived ordering is the
/// stable serialization order (lexicographic in `(p, alpha)`).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TermKey {
    pub weight: i32,
    pub alpha: Vec<u32>,
}

impl TermKey {
    pub fn new(alpha: Vec<u32>, weight: i32) -> Self {
        Self { weight, alpha }
    }

    pub fn degree(&self) -> i32 {
        self.alpha.iter().sum::<u32>() as i32
    }

    /// `|alpha| - p`.
    pub fn nominal_order(&self) -> i32 {
        self.degree() - self.weight
    }

    pub fn eval<T: Real>(&self, xi: &[T], bracket: T) -> T {
        let mono = self
            .alpha
            .iter()
            .zip(xi)
            .fold(T::one(), |acc, (&a, &v)| acc * v.powi(a as i32));
        mono * bracket.powi(-self.weight)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymbolPoly {
    dim: usize,
    terms: BTreeMap<TermKey, Expr>,
}

impl SymbolPoly {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: Expr) -> Self {
        Self::monomial(dim, c, vec![0; dim], 0)
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, Expr::one())
    }

    pub fn monomial(dim: usize, c: Expr, alpha: Vec<u32>, weight: i32) -> Self {
        assert_eq!(alpha.len(), dim, "multi-index length must equal the dimension");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(TermKey::new(alpha, weight), c);
        }
        Self { dim, terms }
    }

    /// `<xi>` itself (weight `-1`).
    pub fn bracket(dim: usize) -> Self {
        Self::monomial(dim, Expr::one(), vec![0; dim], -1)
    }

    /// `xi_j`, 0-based axis.
    pub fn xi(dim: usize, axis: usize) -> Self {
        let mut alpha = vec![0; dim];
        alpha[axis] = 1;
        Self::monomial(dim, Expr::one(), alpha, 0)
    }

    /// `sum_j c_j xi_j`.
    pub fn linear_form(coeffs: &[Expr]) -> Self {
        let dim = coeffs.len();
        let mut out = Self::zero(dim);
        for (j, c) in coeffs.iter().enumerate() {
            let mut alpha = vec![0; dim];
            alpha[j] = 1;
            out.push_term(TermKey::new(alpha, 0), c.clone());
        }
        out
    }

    /// Build from explicit terms, merging repeated keys.
    pub fn from_terms<I: IntoIterator<Item = (TermKey, Expr)>>(dim: usize, terms: I) -> Self {
        let mut out = Self::zero(dim);
        for (k, c) in terms {
            assert_eq!(k.alpha.len(), dim, "multi-index length must equal the dimension");
            out.push_term(k, c);
        }
        out
    }

    fn push_term(&mut self, key: TermKey, c: Expr) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&key) {
            Some(old) => {
                let merged = Expr::add(old, c);
                if !merged.is_zero() {
                    self.terms.insert(key, merged);
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &Expr)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, key: &TermKey) -> Option<&Expr> {
        self.terms.get(key)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Structurally zero (empty term list).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest `|alpha| - p` over terms with a coefficient that is not the literal zero.
    pub fn nominal_order(&self) -> Option<i32> {
        self.terms.keys().map(TermKey::nominal_order).max()
    }

    fn check_dim(&self, other: &Self) -> Result<(), SymbolError> {
        if self.dim != other.dim {
            return Err(SymbolError::DimensionMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SymbolError> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.push_term(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SymbolError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.clone(), Expr::neg(c.clone())))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, SymbolError> {
        self.check_dim(other)?;
        let mut out = Self::zero(self.dim);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let alpha = ka.alpha.iter().zip(&kb.alpha).map(|(a, b)| a + b).collect();
                out.push_term(
                    TermKey::new(alpha, ka.weight + kb.weight),
                    Expr::mul(ca.clone(), cb.clone()),
                );
            }
        }
        Ok(out)
    }

    /// Multiply every coefficient by `c`.
    pub fn scale(&self, c: &Expr) -> Self {
        let mut out = Self::zero(self.dim);
        for (k, v) in &self.terms {
            out.push_term(k.clone(), Expr::mul(v.clone(), c.clone()));
        }
        out
    }

    /// Add `q` to every weight, i.e. multiply by `<xi>^(-q)`. Fails if a weight would become
    /// negative.
    pub fn shift_weight(&self, q: i32) -> Result<Self, SymbolError> {
        if let Some(k) = self.terms.keys().find(|k| k.weight + q < 0) {
            return Err(SymbolError::NegativeWeight {
                shift: q,
                weight: k.weight + q,
            });
        }
        Ok(self.with_bracket_power(-q))
    }

    /// Multiply by `<xi>^k` for any integer `k`; weights may become negative.
    pub fn with_bracket_power(&self, k: i32) -> Self {
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(key, c)| (TermKey::new(key.alpha.clone(), key.weight - k), c.clone()))
                .collect(),
        }
    }

    /// Real time derivative of every coefficient.
    pub fn partial_t(&self) -> Result<Self, SymbolError> {
        let mut out = Self::zero(self.dim);
        for (k, c) in &self.terms {
            out.push_term(k.clone(), c.d_dt()?);
        }
        Ok(out)
    }

    /// `D_t = -i d/dt`, termwise.
    pub fn d_t(&self) -> Result<Self, SymbolError> {
        Ok(self.partial_t()?.scale(&Expr::minus_i()))
    }

    pub fn depends_on_t(&self) -> bool {
        self.terms.values().any(Expr::depends_on_t)
    }

    pub fn depends_on_x(&self) -> bool {
        self.terms.values().any(Expr::depends_on_x)
    }

    /// Exact rewrite into the canonical basis described in the module docs.
    pub fn canonicalize(&self) -> Self {
        let mut out = Self::zero(self.dim);
        let mut stack: Vec<(TermKey, Expr)> =
            self.terms.iter().map(|(k, c)| (k.clone(), c.clone())).collect();
        while let Some((key, c)) = stack.pop() {
            if self.dim == 0 || key.alpha[0] < 2 {
                out.push_term(key, c);
                continue;
            }
            // xi1^2 = <xi>^2 - 1 - sum_{j>=2} xi_j^2
            let mut reduced = key.alpha.clone();
            reduced[0] -= 2;
            stack.push((TermKey::new(reduced.clone(), key.weight - 2), c.clone()));
            stack.push((TermKey::new(reduced.clone(), key.weight), Expr::neg(c.clone())));
            for j in 1..self.dim {
                let mut alpha = reduced.clone();
                alpha[j] += 2;
                stack.push((TermKey::new(alpha, key.weight), Expr::neg(c.clone())));
            }
        }
        out
    }

    /// Evaluate at `(t, x)` from `b` and frequency `xi`.
    pub fn eval<T: Real>(&self, b: &Bindings<T>, xi: &[T]) -> Result<Complex<T>, EvalError> {
        let bracket = japanese_bracket(xi);
        let mut acc = czero();
        for (k, c) in &self.terms {
            acc = acc + c.eval(b)? * k.eval(xi, bracket);
        }
        Ok(acc)
    }

    /// Keep only the terms accepted by `keep`.
    pub fn retain(&self, mut keep: impl FnMut(&TermKey, &Expr) -> bool) -> Self {
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(k, c)| keep(k, c))
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for SymbolPoly {
    /// `(<coeff>)*xi1^a1*...*<xi>^p` joined by ` + `, in key order; unit factors omitted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (k, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            let mut factors = Vec::new();
            if !c.is_one() {
                factors.push(format!("({c})"));
            }
            for (j, &a) in k.alpha.iter().enumerate() {
                match a {
                    0 => {}
                    1 => factors.push(format!("xi{}", j + 1)),
                    _ => factors.push(format!("xi{}^{a}", j + 1)),
                }
            }
            match -k.weight {
                0 => {}
                1 => factors.push("<xi>".into()),
                p => factors.push(format!("<xi>^({p})")),
            }
            if factors.is_empty() {
                f.write_str("1")?;
            } else {
                f.write_str(&factors.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Elementary symmetric polynomials `e_0..e_k` of the given symbols.
pub fn elementary_symmetric(roots: &[SymbolPoly], dim: usize) -> Result<Vec<SymbolPoly>, SymbolError> {
    // e_r(l_1..l_j) = e_r(l_1..l_{j-1}) + l_j e_{r-1}(l_1..l_{j-1})
    let mut e = vec![SymbolPoly::one(dim)];
    for root in roots {
        let mut next = e.clone();
        next.push(SymbolPoly::zero(dim));
        for r in 1..next.len() {
            next[r] = e.get(r).cloned().unwrap_or_else(|| SymbolPoly::zero(dim)).add(&root.mul(&e[r - 1])?)?;
        }
        e = next;
    }
    Ok(e)
}
