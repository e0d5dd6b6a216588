//! Floating-point abstraction for the numeric layer.
//!
//! Symbolic objects ([`crate::Expr`], [`crate::SymbolPoly`]) are exact trees; only their
//! evaluation touches floating point, and that is generic over [`Real`].

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar usable by evaluation, the numeric oracles and the spectral solver.
pub trait Real:
    Float + FloatConst + FromPrimitive + Default + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Japanese bracket `(1 + |xi|^2)^(1/2)`.
pub fn japanese_bracket<T: Real>(xi: &[T]) -> T {
    let sq = xi.iter().fold(T::zero(), |acc, &v| acc + v * v);
    (T::one() + sq).sqrt()
}

pub(crate) fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

pub(crate) fn creal<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}
