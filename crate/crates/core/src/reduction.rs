//! Reduction of the order-`m` equation to the first-order system
//! `D_t U = A(t, D_x) U + B(t, x, D_x) U + F` through `u_k = D_t^{k-1} <D_x>^{m-k} u`.

use thiserror::Error;

use crate::expr::Expr;
use crate::matrix::SymbolMatrix;
use crate::problem::ProblemSpec;
use crate::symbol::{elementary_symmetric, SymbolError, SymbolPoly};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ReductionError {
    #[error("lower-order term dt={dt}, dx={dx:?} has total order above m-1")]
    LowerOrderKey { dt: usize, dx: Vec<u32> },
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}

/// `lambda_i = sum_j c_ij(t) xi_j`.
pub fn root_symbols(spec: &ProblemSpec) -> Vec<SymbolPoly> {
    spec.roots.iter().map(|row| SymbolPoly::linear_form(row)).collect()
}

/// Principal coefficients from the roots. Entry `r - 1` is `A_(r) = (-1)^(r+1) e_r(lambda)`, so
/// that `tau^m - sum_r A_(r) tau^(m-r) = prod_i (tau - lambda_i)`.
pub fn principal_from_roots(roots: &[SymbolPoly], dim: usize) -> Result<Vec<SymbolPoly>, SymbolError> {
    let e = elementary_symmetric(roots, dim)?;
    Ok(e.into_iter()
        .enumerate()
        .skip(1)
        .map(|(r, er)| if r % 2 == 1 { er } else { er.neg() })
        .collect())
}

/// `<D_x>^power g`, the spectral form of one Cauchy datum.
#[derive(Clone, Debug, PartialEq)]
pub struct DataDescriptor {
    pub bracket_power: usize,
    pub g: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompanionSystem {
    pub order: usize,
    pub dim: usize,
    /// `A_(1)..A_(m)`.
    pub principal: Vec<SymbolPoly>,
    pub a: SymbolMatrix,
    pub b: SymbolMatrix,
    /// `b_j - b_(j)`, `j = 1..m`: the last row of `B`.
    pub lower_row: Vec<SymbolPoly>,
    pub data: Vec<DataDescriptor>,
    /// Last component of `F`; the others vanish.
    pub forcing: Expr,
}

pub fn build_companion(spec: &ProblemSpec) -> Result<CompanionSystem, ReductionError> {
    let (m, n) = (spec.order, spec.dim);
    for (k, beta) in spec.lower_order.keys() {
        if k + beta.iter().map(|&b| b as usize).sum::<usize>() > m - 1 {
            return Err(ReductionError::LowerOrderKey {
                dt: *k,
                dx: beta.clone(),
            });
        }
    }
    let roots = root_symbols(spec);
    let principal = principal_from_roots(&roots, n)?;

    let mut a = SymbolMatrix::zeros(m, n);
    for i in 0..m - 1 {
        a.set(i, i + 1, SymbolPoly::bracket(n));
    }
    for j in 1..=m {
        // b_(j) = A_(m-j+1) <xi>^(j-m)
        a.set(m - 1, j - 1, principal[m - j].shift_weight((m - j) as i32)?);
    }

    let mut b = SymbolMatrix::zeros(m, n);
    let mut lower_row = Vec::with_capacity(m);
    for j in 1..=m {
        let mut poly = SymbolPoly::zero(n);
        for ((k, beta), c) in &spec.lower_order {
            if *k == j - 1 {
                let term = SymbolPoly::monomial(n, c.clone(), beta.clone(), 0);
                poly = poly.add(&term)?;
            }
        }
        let entry = poly.shift_weight((m - j) as i32)?;
        b.set(m - 1, j - 1, entry.clone());
        lower_row.push(entry);
    }

    let data = spec
        .data
        .iter()
        .enumerate()
        .map(|(k, g)| DataDescriptor {
            bracket_power: m - 1 - k,
            g: g.clone(),
        })
        .collect();

    Ok(CompanionSystem {
        order: m,
        dim: n,
        principal,
        a,
        b,
        lower_row,
        data,
        forcing: spec.forcing.clone(),
    })
}
