//! Symbols as operators on periodic fields.
//!
//! A term `c(t,x) xi^alpha <xi>^(-p)` acts as the multiplier `k^alpha <k>^(-p)` followed by
//! multiplication with `c`: a scalar for x-independent coefficients, pointwise on the nodes
//! otherwise.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex;

use super::{SpectralReal, TorusGrid};
use crate::expr::{Bindings, EvalError, Expr};
use crate::matrix::SymbolMatrix;
use crate::scalar::czero;
use crate::symbol::SymbolPoly;

#[derive(Clone, Debug)]
struct Term<T> {
    coeff: Expr,
    multiplier: Vec<T>,
}

/// A symbol with its multipliers tabulated on a grid.
#[derive(Clone, Debug)]
pub struct CompiledSymbol<T> {
    uniform: Vec<Term<T>>,
    varying: Vec<Term<T>>,
}

impl<T: SpectralReal> CompiledSymbol<T> {
    pub fn new(sym: &SymbolPoly, grid: &TorusGrid<T>) -> Self {
        let mut uniform = Vec::new();
        let mut varying = Vec::new();
        for (key, c) in sym.terms() {
            let multiplier = grid
                .freqs()
                .iter()
                .zip(grid.brackets())
                .map(|(k, &b)| key.eval(k, b))
                .collect();
            let term = Term {
                coeff: c.clone(),
                multiplier,
            };
            if c.depends_on_x() {
                varying.push(term);
            } else {
                uniform.push(term);
            }
        }
        Self { uniform, varying }
    }

    pub fn is_zero(&self) -> bool {
        self.uniform.is_empty() && self.varying.is_empty()
    }

    /// Accumulate `sym(t, x, D) v` into `out`, all in coefficient space.
    pub fn apply_add(
        &self,
        v: &[Complex<T>],
        out: &mut [Complex<T>],
        ctx: &ApplyContext<'_, T>,
    ) -> Result<(), EvalError> {
        let origin = Bindings::with_params(ctx.t, vec![T::zero(); ctx.grid.dim()], ctx.params.clone());
        for term in &self.uniform {
            let c = term.coeff.eval(&origin)?;
            for ((o, x), &mk) in out.iter_mut().zip(v).zip(&term.multiplier) {
                *o = *o + c * *x * mk;
            }
        }
        if self.varying.is_empty() {
            return Ok(());
        }
        let mut phys = vec![czero(); v.len()];
        for term in &self.varying {
            let mut w: Vec<Complex<T>> = v.iter().zip(&term.multiplier).map(|(x, &mk)| *x * mk).collect();
            if let Some(mask) = ctx.dealias {
                truncate(&mut w, mask);
            }
            let w = ctx.grid.inverse(&w);
            let c = ctx.grid.sample(&term.coeff, ctx.t, ctx.params)?;
            for ((p, wv), cv) in phys.iter_mut().zip(&w).zip(&c) {
                *p = *p + *wv * *cv;
            }
        }
        let mut back = ctx.grid.forward(&phys);
        if let Some(mask) = ctx.dealias {
            truncate(&mut back, mask);
        }
        for (o, b) in out.iter_mut().zip(&back) {
            *o = *o + *b;
        }
        Ok(())
    }
}

fn truncate<T: SpectralReal>(v: &mut [Complex<T>], mask: &[bool]) {
    for (x, &keep) in v.iter_mut().zip(mask) {
        if !keep {
            *x = czero();
        }
    }
}

/// Evaluation context of one operator application.
pub struct ApplyContext<'a, T: SpectralReal> {
    pub grid: &'a TorusGrid<T>,
    pub t: T,
    pub params: &'a Arc<BTreeMap<String, T>>,
    pub dealias: Option<&'a [bool]>,
}

/// `sym(t, x, D) v` for a field given by its coefficients.
pub fn apply_symbol<T: SpectralReal>(
    sym: &SymbolPoly,
    v_hat: &[Complex<T>],
    grid: &TorusGrid<T>,
    t: T,
    params: &Arc<BTreeMap<String, T>>,
) -> Result<Vec<Complex<T>>, EvalError> {
    let mut out = vec![czero(); v_hat.len()];
    let ctx = ApplyContext {
        grid,
        t,
        params,
        dealias: None,
    };
    CompiledSymbol::new(sym, grid).apply_add(v_hat, &mut out, &ctx)?;
    Ok(out)
}

/// A symbol matrix acting on `m` fields.
#[derive(Clone, Debug)]
pub struct CompiledMatrix<T> {
    size: usize,
    entries: Vec<Option<CompiledSymbol<T>>>,
}

impl<T: SpectralReal> CompiledMatrix<T> {
    pub fn new(mat: &SymbolMatrix, grid: &TorusGrid<T>) -> Self {
        let entries = mat
            .rows()
            .flatten()
            .map(|s| {
                let c = CompiledSymbol::new(s, grid);
                (!c.is_zero()).then_some(c)
            })
            .collect();
        Self {
            size: mat.size(),
            entries,
        }
    }

    /// `M(t, x, D) U`.
    pub fn apply(
        &self,
        u: &[Vec<Complex<T>>],
        ctx: &ApplyContext<'_, T>,
    ) -> Result<Vec<Vec<Complex<T>>>, EvalError> {
        let len = u[0].len();
        let mut out = vec![vec![czero(); len]; self.size];
        for i in 0..self.size {
            for j in 0..self.size {
                if let Some(sym) = &self.entries[i * self.size + j] {
                    sym.apply_add(&u[j], &mut out[i], ctx)?;
                }
            }
        }
        Ok(out)
    }
}
