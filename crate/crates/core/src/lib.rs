//! Symbolic-numeric analysis of weakly hyperbolic Cauchy problems whose principal part
//! depends on time only.
//!
//! The pipeline is:
//!
//! 1. [`expr`]: a small coefficient language in `t`, `x1..xn` and named parameters.
//! 2. [`symbol`]: finite symbols `sum c(t,x) xi^alpha <xi>^(-p)` with exact canonical forms
//!    and symbol-order decisions.
//! 3. [`reduction`]: the order-`m` equation rewritten as a first-order system in Sylvester form.
//! 4. [`schur`]: the explicit unitriangular conjugation `T^-1 A T = J`.
//! 5. [`levi`]: the lower-order matrices `D = T^-1 B T`, `E = T^-1 D_t T` and the Levi checks.
//! 6. [`spectral`]: a periodic pseudo-spectral RK4 solver used as an empirical probe.
//! 7. [`oracle`]: brute-force cross-checks shipped with the library.
//!
//! The numeric layer is generic over [`Real`]; the `*64` aliases below fix it to `f64`.

// Matrix code indexes by row and column; `Expr::add` and friends are smart constructors.
#![allow(clippy::needless_range_loop, clippy::should_implement_trait)]

pub mod expr;
pub mod levi;
pub mod matrix;
pub mod oracle;
pub mod order;
pub mod problem;
pub mod reduction;
pub mod sampling;
pub mod scalar;
pub mod schur;
pub mod spectral;
pub mod symbol;

pub use expr::{Bindings, EvalError, Expr, Func, ParseError};
pub use levi::{LeviReport, LeviVerdict, OleinikReport};
pub use matrix::SymbolMatrix;
pub use order::{OrderGrid, OrderMethod, OrderVerdict, Verdict};
pub use problem::{ProblemError, ProblemFile, ProblemSpec};
pub use reduction::CompanionSystem;
pub use scalar::Real;
pub use schur::SchurData;
pub use symbol::{SymbolError, SymbolPoly, TermKey};

/// Double-precision complex scalar.
pub type Complex64 = num_complex::Complex<f64>;
/// Bindings evaluated in double precision.
pub type Bindings64 = expr::Bindings<f64>;
/// Periodic grid in double precision.
pub type TorusGrid64 = spectral::TorusGrid<f64>;
/// Solver run record in double precision.
pub type RunResult64 = spectral::RunResult<f64>;
/// Single-precision variants, mostly useful for quick exploratory sweeps.
pub type TorusGrid32 = spectral::TorusGrid<f32>;
pub type RunResult32 = spectral::RunResult<f32>;
