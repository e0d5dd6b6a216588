//! Explicit triangularization `T^-1 A T = J` of the companion matrix.
//!
//! `T = [omega_{j,k}]` is lower unitriangular with
//! `omega_{j,k} = h_{j-k}(lambda_1..lambda_k) <xi>^(k-j)`, `h_r` the complete homogeneous
//! symmetric polynomial, and `J` carries the roots on the diagonal and `<xi>` above it.

use nalgebra::DMatrix;
use num_complex::Complex;
use thiserror::Error;

use crate::expr::{Bindings, EvalError};
use crate::matrix::SymbolMatrix;
use crate::sampling::PhasePoint;
use crate::scalar::{japanese_bracket, Real};
use crate::symbol::{SymbolError, SymbolPoly};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SchurError {
    #[error("omega index ({j}, {k}) outside 1 <= k <= j <= {m}")]
    IndexOutOfRange { j: usize, k: usize, m: usize },
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error("evaluation failed at t={t}, xi={xi:?}: {source}")]
    Eval {
        t: f64,
        xi: Vec<f64>,
        source: EvalError,
    },
}

/// `h[k][r] = h_r(lambda_1..lambda_k)` for `k + r <= depth`, unweighted and not canonicalized.
fn complete_homogeneous(
    roots: &[SymbolPoly],
    dim: usize,
    depth: usize,
) -> Result<Vec<Vec<SymbolPoly>>, SymbolError> {
    let m = roots.len();
    let mut h = vec![vec![SymbolPoly::zero(dim); depth + 1]; m + 1];
    h[0][0] = SymbolPoly::one(dim);
    for k in 1..=m {
        h[k][0] = SymbolPoly::one(dim);
        for r in 1..=depth.saturating_sub(k) {
            // h_r(l_1..l_k) = h_r(l_1..l_{k-1}) + l_k h_{r-1}(l_1..l_k)
            h[k][r] = h[k - 1][r].add(&roots[k - 1].mul(&h[k][r - 1])?)?;
        }
    }
    Ok(h)
}

/// `omega_{j,k}`, 1-based, canonicalized.
pub fn omega(j: usize, k: usize, roots: &[SymbolPoly]) -> Result<SymbolPoly, SchurError> {
    let m = roots.len();
    if !(1 <= k && k <= j && j <= m) {
        return Err(SchurError::IndexOutOfRange { j, k, m });
    }
    let dim = roots[0].dim();
    let h = complete_homogeneous(&roots[..k], dim, j)?;
    Ok(h[k][j - k].shift_weight((j - k) as i32)?.canonicalize())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchurData {
    pub order: usize,
    pub dim: usize,
    pub roots: Vec<SymbolPoly>,
    /// `omega[j-1][k-1] = omega_{j,k}` for `k <= j`.
    pub omega: Vec<Vec<SymbolPoly>>,
    pub t: SymbolMatrix,
    pub tinv: SymbolMatrix,
    pub j: SymbolMatrix,
}

impl SchurData {
    pub fn new(roots: &[SymbolPoly]) -> Result<Self, SchurError> {
        let m = roots.len();
        let dim = roots[0].dim();
        let h = complete_homogeneous(roots, dim, m)?;
        let omega: Vec<Vec<SymbolPoly>> = (1..=m)
            .map(|j| {
                (1..=j)
                    .map(|k| Ok(h[k][j - k].shift_weight((j - k) as i32)?.canonicalize()))
                    .collect::<Result<Vec<_>, SymbolError>>()
            })
            .collect::<Result<_, _>>()?;
        let t = build_t(&omega, dim);
        let tinv = build_tinv(&omega, dim)?;
        let j = build_j(roots);
        Ok(Self {
            order: m,
            dim,
            roots: roots.to_vec(),
            omega,
            t,
            tinv,
            j,
        })
    }

    /// `omega_{j,k}`, 1-based.
    pub fn omega(&self, j: usize, k: usize) -> &SymbolPoly {
        &self.omega[j - 1][k - 1]
    }
}

pub fn build_t(omega: &[Vec<SymbolPoly>], dim: usize) -> SymbolMatrix {
    let m = omega.len();
    let mut t = SymbolMatrix::zeros(m, dim);
    for j in 0..m {
        for k in 0..=j {
            t.set(j, k, omega[j][k].clone());
        }
    }
    t
}

/// `(T^-1)_{i,j} = -omega_{i,j} - sum_{k=j+1}^{i-1} omega_{i,k} (T^-1)_{k,j}`.
pub fn build_tinv(omega: &[Vec<SymbolPoly>], dim: usize) -> Result<SymbolMatrix, SymbolError> {
    let m = omega.len();
    let mut tinv = SymbolMatrix::identity(m, dim);
    for i in 0..m {
        for j in (0..i).rev() {
            let mut acc = omega[i][j].neg();
            for k in j + 1..i {
                acc = acc.sub(&omega[i][k].mul(tinv.get(k, j))?)?;
            }
            tinv.set(i, j, acc.canonicalize());
        }
    }
    Ok(tinv)
}

pub fn build_j(roots: &[SymbolPoly]) -> SymbolMatrix {
    let m = roots.len();
    let dim = roots[0].dim();
    let mut j = SymbolMatrix::zeros(m, dim);
    for i in 0..m {
        j.set(i, i, roots[i].clone());
        if i + 1 < m {
            j.set(i, i + 1, SymbolPoly::bracket(dim));
        }
    }
    j
}

fn eval_at(
    mat: &SymbolMatrix,
    b: &Bindings<f64>,
    xi: &[f64],
) -> Result<DMatrix<Complex<f64>>, SchurError> {
    mat.eval(b, xi).map_err(|source| SchurError::Eval {
        t: b.t,
        xi: xi.to_vec(),
        source,
    })
}

/// Largest `|Tinv A T - J|_inf / (1 + <xi>)` over the samples.
pub fn verify_schur(
    a: &SymbolMatrix,
    data: &SchurData,
    samples: &[PhasePoint],
    params: &std::sync::Arc<std::collections::BTreeMap<String, f64>>,
) -> Result<f64, SchurError> {
    let mut worst = 0.0f64;
    for s in samples {
        let b = Bindings::with_params(s.t, s.x.clone(), params.clone());
        let lhs = eval_at(&data.tinv, &b, &s.xi)? * eval_at(a, &b, &s.xi)? * eval_at(&data.t, &b, &s.xi)?;
        let diff = lhs - eval_at(&data.j, &b, &s.xi)?;
        worst = worst.max(inf_norm(&diff) / (1.0 + japanese_bracket(&s.xi)));
    }
    Ok(worst)
}

/// Maximum absolute row sum.
pub fn inf_norm<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    m.row_iter()
        .map(|r| r.iter().fold(T::zero(), |acc, z| acc + z.norm()))
        .fold(T::zero(), T::max)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;
    use std::sync::Arc;

    use super::*;
    use crate::expr::parse;
    use crate::order::{terms_match, OrderGrid};
    use crate::reduction::principal_from_roots;

    fn lam(c: &str) -> SymbolPoly {
        SymbolPoly::linear_form(&[parse(c).unwrap()])
    }

    fn grid() -> OrderGrid {
        OrderGrid::new(1, 1.0, Arc::new(BTreeMap::new()))
    }

    fn weighted(s: &SymbolPoly, p: i32) -> SymbolPoly {
        s.shift_weight(p).unwrap()
    }

    #[test]
    fn omega_closed_forms() {
        let roots = [lam("t"), lam("2 - t"), lam("cos(t)"), lam("5")];
        let (l1, l2) = (&roots[0], &roots[1]);
        let g = grid();
        assert!(terms_match(&omega(2, 1, &roots).unwrap(), &weighted(l1, 1), &g).unwrap());
        let w42 = l1.mul(l1).unwrap().add(&l1.mul(l2).unwrap()).unwrap().add(&l2.mul(l2).unwrap()).unwrap();
        assert!(terms_match(&omega(4, 2, &roots).unwrap(), &weighted(&w42, 2), &g).unwrap());
        let w43 = roots[..3].iter().fold(SymbolPoly::zero(1), |acc, l| acc.add(l).unwrap());
        assert!(terms_match(&omega(4, 3, &roots).unwrap(), &weighted(&w43, 1), &g).unwrap());
        assert_eq!(omega(3, 3, &roots).unwrap(), SymbolPoly::one(1));
        assert!(matches!(omega(2, 3, &roots), Err(SchurError::IndexOutOfRange { .. })));
    }

    #[test]
    fn triangular_shapes() {
        let roots = [lam("t"), lam("-t"), lam("1")];
        let s = SchurData::new(&roots).unwrap();
        for i in 0..3 {
            assert_eq!(s.t.get(i, i), &SymbolPoly::one(1));
            assert_eq!(s.tinv.get(i, i), &SymbolPoly::one(1));
            for j in i + 1..3 {
                assert!(s.t.get(i, j).is_zero() && s.tinv.get(i, j).is_zero());
            }
            assert!(s.t.rows().flatten().all(|e| e.canonicalize().nominal_order().unwrap_or(0) <= 0));
        }
        assert!(s.j.get(0, 2).is_zero());
        assert_eq!(s.j.get(1, 2), &SymbolPoly::bracket(1));
    }

    #[test]
    fn tinv_third_row() {
        let roots = [lam("t"), lam("1 + t^2"), lam("3")];
        let s = SchurData::new(&roots).unwrap();
        let g = grid();
        let l12 = roots[0].mul(&roots[1]).unwrap();
        assert!(terms_match(s.tinv.get(2, 0), &weighted(&l12, 2), &g).unwrap());
        let sum = roots[0].add(&roots[1]).unwrap().neg();
        assert!(terms_match(s.tinv.get(2, 1), &weighted(&sum, 1), &g).unwrap());
    }

    #[test]
    fn schur_identity_with_multiplicity() {
        let roots = [lam("t"), lam("t"), lam("t"), lam("-2*t")];
        let s = SchurData::new(&roots).unwrap();
        let mut a = SymbolMatrix::zeros(4, 1);
        let p = principal_from_roots(&roots, 1).unwrap();
        for i in 0..3 {
            a.set(i, i + 1, SymbolPoly::bracket(1));
        }
        for j in 1..=4 {
            a.set(3, j - 1, p[4 - j].shift_weight((4 - j) as i32).unwrap());
        }
        let samples: Vec<PhasePoint> = [(0.0, 3.0), (0.4, -700.0), (1.0, 1e3)]
            .iter()
            .map(|&(t, xi)| PhasePoint { t, x: vec![0.0], xi: vec![xi] })
            .collect();
        let r = verify_schur(&a, &s, &samples, &Arc::new(BTreeMap::new())).unwrap();
        assert!(r <= 1e-9, "{r}");
    }
}
