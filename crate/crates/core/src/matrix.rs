//! Square matrices of symbols.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::expr::{Bindings, EvalError};
use crate::scalar::Real;
use crate::symbol::{SymbolError, SymbolPoly};

#[derive(Clone, Debug, PartialEq)]
pub struct SymbolMatrix {
    size: usize,
    dim: usize,
    entries: Vec<SymbolPoly>,
}

impl SymbolMatrix {
    pub fn zeros(size: usize, dim: usize) -> Self {
        Self {
            size,
            dim,
            entries: vec![SymbolPoly::zero(dim); size * size],
        }
    }

    pub fn identity(size: usize, dim: usize) -> Self {
        let mut m = Self::zeros(size, dim);
        for i in 0..size {
            m.set(i, i, SymbolPoly::one(dim));
        }
        m
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// 0-based entry.
    pub fn get(&self, i: usize, j: usize) -> &SymbolPoly {
        &self.entries[i * self.size + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: SymbolPoly) {
        assert_eq!(value.dim(), self.dim, "entry dimension");
        self.entries[i * self.size + j] = value;
    }

    pub fn map(&self, f: impl Fn(&SymbolPoly) -> SymbolPoly) -> Self {
        Self {
            size: self.size,
            dim: self.dim,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn try_map(
        &self,
        f: impl Fn(&SymbolPoly) -> Result<SymbolPoly, SymbolError>,
    ) -> Result<Self, SymbolError> {
        Ok(Self {
            size: self.size,
            dim: self.dim,
            entries: self.entries.iter().map(f).collect::<Result<_, _>>()?,
        })
    }

    fn check(&self, other: &Self) -> Result<(), SymbolError> {
        if self.dim != other.dim {
            return Err(SymbolError::DimensionMismatch(self.dim, other.dim));
        }
        assert_eq!(self.size, other.size, "matrix sizes");
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SymbolError> {
        self.check(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_, _>>()?;
        Ok(Self { entries, ..self.clone() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SymbolError> {
        self.add(&other.map(SymbolPoly::neg))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, SymbolError> {
        self.check(other)?;
        let n = self.size;
        let mut out = Self::zeros(n, self.dim);
        for i in 0..n {
            for j in 0..n {
                let mut acc = SymbolPoly::zero(self.dim);
                for k in 0..n {
                    let (a, b) = (self.get(i, k), other.get(k, j));
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(b)?)?;
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// `D_t` entrywise.
    pub fn d_t(&self) -> Result<Self, SymbolError> {
        self.try_map(SymbolPoly::d_t)
    }

    pub fn canonicalize(&self) -> Self {
        self.map(SymbolPoly::canonicalize)
    }

    /// Numeric matrix at `(t, x, xi)`.
    pub fn eval<T: Real>(&self, b: &Bindings<T>, xi: &[T]) -> Result<DMatrix<Complex<T>>, EvalError> {
        let n = self.size;
        let mut out = DMatrix::from_element(n, n, Complex::new(T::zero(), T::zero()));
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self.get(i, j).eval(b, xi)?;
            }
        }
        Ok(out)
    }

    /// Rows as vectors of entries.
    pub fn rows(&self) -> impl Iterator<Item = &[SymbolPoly]> {
        self.entries.chunks(self.size)
    }
}

impl fmt::Display for SymbolMatrix {
    /// One `[i,j] = <symbol>` line per entry, 1-based, row-major.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.size {
            for j in 0..self.size {
                writeln!(f, "[{},{}] = {}", i + 1, j + 1, self.get(i, j))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn product_and_identity() {
        let mut a = SymbolMatrix::zeros(2, 1);
        a.set(0, 1, SymbolPoly::bracket(1));
        a.set(1, 0, SymbolPoly::monomial(1, parse("t").unwrap(), vec![1], 0));
        let id = SymbolMatrix::identity(2, 1);
        assert_eq!(a.mul(&id).unwrap(), a);
        let sq = a.mul(&a).unwrap();
        let b = Bindings::new(0.5, vec![]);
        let v = sq.eval(&b, &[2.0]).unwrap();
        let expected = 0.5 * 2.0 * 5f64.sqrt();
        assert!((v[(0, 0)].re - expected).abs() < 1e-14);
        assert!((v[(1, 1)].re - expected).abs() < 1e-14);
        assert!(a.sub(&a).unwrap().rows().flatten().all(SymbolPoly::is_zero));
    }

    #[test]
    fn display_lines() {
        let s = SymbolMatrix::identity(2, 1).to_string();
        assert_eq!(s.lines().count(), 4);
        assert!(s.starts_with("[1,1] = 1\n"));
        assert!(s.contains("[1,2] = 0"));
    }
}
