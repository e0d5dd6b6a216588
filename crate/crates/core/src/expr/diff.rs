use thiserror::Error;

use super::{Expr, Func};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("`{0}` is not differentiable in t")]
    NotDifferentiable(String),
    #[error("`{0}`: exponent and base both depend on t")]
    VariableExponent(String),
}

impl Expr {
    /// Real time derivative `d/dt` (not `D_t`; the `-i` factor is applied by the symbol
    /// calculus).
    pub fn d_dt(&self) -> Result<Expr, DiffError> {
        if !self.depends_on_t() {
            return Ok(Expr::zero());
        }
        Ok(match self {
            Expr::Time => Expr::one(),
            Expr::Num(_) | Expr::Imag | Expr::Space(_) | Expr::Param(_) => Expr::zero(),
            Expr::Neg(a) => Expr::neg(a.d_dt()?),
            Expr::Add(a, b) => Expr::add(a.d_dt()?, b.d_dt()?),
            Expr::Sub(a, b) => Expr::sub(a.d_dt()?, b.d_dt()?),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.d_dt()?, (**b).clone()),
                Expr::mul((**a).clone(), b.d_dt()?),
            ),
            Expr::Div(a, b) => {
                let (a, b) = ((**a).clone(), (**b).clone());
                // (a'b - ab') / b^2
                let numerator = Expr::sub(
                    Expr::mul(a.d_dt()?, b.clone()),
                    Expr::mul(a, b.d_dt()?),
                );
                Expr::div(numerator, Expr::mul(b.clone(), b))
            }
            Expr::Pow(base, exponent) => {
                let (base, exponent) = ((**base).clone(), (**exponent).clone());
                match (base.depends_on_t(), exponent.depends_on_t()) {
                    (true, true) => return Err(DiffError::VariableExponent(self.to_string())),
                    (true, false) => {
                        let reduced = match exponent.as_num() {
                            Some(e) => Expr::num(e - 1.0),
                            None => Expr::sub(exponent.clone(), Expr::one()),
                        };
                        Expr::mul(
                            Expr::mul(exponent, Expr::pow(base.clone(), reduced)),
                            base.d_dt()?,
                        )
                    }
                    // b^e with constant b: b^e ln(b) e'
                    (false, _) => Expr::mul(
                        Expr::mul(self.clone(), Expr::call(Func::Log, base)),
                        exponent.d_dt()?,
                    ),
                }
            }
            Expr::Call(func, arg) => {
                let inner = arg.d_dt()?;
                let arg = (**arg).clone();
                let outer = match func {
                    Func::Sin => Expr::call(Func::Cos, arg),
                    Func::Cos => Expr::neg(Expr::call(Func::Sin, arg)),
                    Func::Exp => Expr::call(Func::Exp, arg),
                    // Infinite at a zero of the argument; surfaces as a division by zero
                    // when evaluated there.
                    Func::Sqrt => Expr::div(Expr::num(0.5), Expr::call(Func::Sqrt, arg)),
                    Func::Log => Expr::div(Expr::one(), arg),
                    Func::Abs => return Err(DiffError::NotDifferentiable(self.to_string())),
                };
                Expr::mul(outer, inner)
            }
        })
    }
}
