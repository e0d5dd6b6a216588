use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex;
use num_traits::Zero;
use thiserror::Error;

use super::{Expr, Func};
use crate::scalar::{creal, Real};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("`{0}` evaluated outside its domain")]
    Domain(String),
}

/// Values for `t`, `x1..xn` and the parameter table.
#[derive(Clone, Debug, PartialEq)]
pub struct Bindings<T> {
    pub t: T,
    pub x: Vec<T>,
    pub params: Arc<BTreeMap<String, T>>,
}

impl<T: Real> Bindings<T> {
    pub fn new(t: T, x: Vec<T>) -> Self {
        Self {
            t,
            x,
            params: Arc::new(BTreeMap::new()),
        }
    }

    pub fn with_params(t: T, x: Vec<T>, params: Arc<BTreeMap<String, T>>) -> Self {
        Self { t, x, params }
    }

    /// Same parameters and space point, different time.
    pub fn at_time(&self, t: T) -> Self {
        Self {
            t,
            x: self.x.clone(),
            params: self.params.clone(),
        }
    }
}

/// Convert an `f64` parameter table to the target precision.
pub fn convert_params<T: Real>(params: &BTreeMap<String, f64>) -> Arc<BTreeMap<String, T>> {
    Arc::new(params.iter().map(|(k, v)| (k.clone(), T::lit(*v))).collect())
}

fn is_real<T: Real>(z: Complex<T>) -> bool {
    z.im == T::zero()
}

impl Expr {
    /// Evaluate on the principal branch. Deterministic: identical inputs give bit-identical
    /// outputs.
    pub fn eval<T: Real>(&self, b: &Bindings<T>) -> Result<Complex<T>, EvalError> {
        let v = self.eval_raw(b)?;
        // A signed zero imaginary part would flip the branch of sqrt/log downstream.
        Ok(if v.im == T::zero() { creal(v.re) } else { v })
    }

    fn eval_raw<T: Real>(&self, b: &Bindings<T>) -> Result<Complex<T>, EvalError> {
        Ok(match self {
            Expr::Num(v) => creal(T::lit(*v)),
            Expr::Imag => Complex::new(T::zero(), T::one()),
            Expr::Time => creal(b.t),
            Expr::Space(k) => match k.checked_sub(1).and_then(|i| b.x.get(i)) {
                Some(v) => creal(*v),
                None => return Err(EvalError::Unbound(format!("x{k}"))),
            },
            Expr::Param(name) => match b.params.get(name) {
                Some(v) => creal(*v),
                None => return Err(EvalError::Unbound(name.clone())),
            },
            Expr::Neg(a) => -a.eval(b)?,
            Expr::Add(l, r) => l.eval(b)? + r.eval(b)?,
            Expr::Sub(l, r) => l.eval(b)? - r.eval(b)?,
            Expr::Mul(l, r) => l.eval(b)? * r.eval(b)?,
            Expr::Div(l, r) => {
                let num = l.eval(b)?;
                let den = r.eval(b)?;
                if den.is_zero() {
                    return Err(EvalError::DivisionByZero(self.to_string()));
                }
                if is_real(num) && is_real(den) {
                    creal(num.re / den.re)
                } else {
                    num / den
                }
            }
            Expr::Pow(l, r) => pow(l.eval(b)?, r.eval(b)?).ok_or_else(|| {
                EvalError::DivisionByZero(self.to_string())
            })?,
            Expr::Call(func, a) => call(*func, a.eval(b)?)
                .ok_or_else(|| EvalError::Domain(self.to_string()))?,
        })
    }
}

fn pow<T: Real>(base: Complex<T>, exponent: Complex<T>) -> Option<Complex<T>> {
    if is_real(exponent) {
        let e = exponent.re;
        let rounded = e.round();
        if rounded == e && e.abs() <= T::lit(64.0) {
            let k = rounded.to_i32().unwrap_or(0);
            if base.is_zero() {
                return match k {
                    0 => Some(creal(T::one())),
                    k if k > 0 => Some(creal(T::zero())),
                    _ => None,
                };
            }
            if is_real(base) {
                return Some(creal(base.re.powi(k)));
            }
            return Some(base.powi(k));
        }
        if is_real(base) && base.re >= T::zero() {
            if base.re == T::zero() && e < T::zero() {
                return None;
            }
            return Some(creal(base.re.powf(e)));
        }
    }
    if base.is_zero() {
        return if exponent.re > T::zero() {
            Some(creal(T::zero()))
        } else {
            None
        };
    }
    Some(base.powc(exponent))
}

fn call<T: Real>(func: Func, z: Complex<T>) -> Option<Complex<T>> {
    let real = is_real(z);
    Some(match func {
        Func::Sin if real => creal(z.re.sin()),
        Func::Sin => z.sin(),
        Func::Cos if real => creal(z.re.cos()),
        Func::Cos => z.cos(),
        Func::Exp if real => creal(z.re.exp()),
        Func::Exp => z.exp(),
        Func::Sqrt if real && z.re >= T::zero() => creal(z.re.sqrt()),
        Func::Sqrt => z.sqrt(),
        Func::Abs => creal(z.norm()),
        Func::Log if z.is_zero() => return None,
        Func::Log if real && z.re > T::zero() => creal(z.re.ln()),
        Func::Log => z.ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn ev(src: &str, t: f64) -> Complex<f64> {
        parse(src).unwrap().eval(&Bindings::new(t, vec![0.3, -1.2])).unwrap()
    }

    #[test]
    fn basic_values() {
        assert_eq!(ev("t^2", 2.0), creal(4.0));
        assert_eq!(ev("cos(t)", 0.0), creal(1.0));
        assert_eq!(ev("sqrt(t)", 0.25), creal(0.5));
        assert_eq!(ev("i*i", 0.0), creal(-1.0));
        assert_eq!(ev("x2", 0.0), creal(-1.2));
    }

    #[test]
    fn principal_branches() {
        let z = ev("sqrt(-4)", 0.0);
        assert!((z - Complex::new(0.0, 2.0)).norm() < 1e-15);
        let l = ev("log(-1)", 0.0);
        assert!((l - Complex::new(0.0, std::f64::consts::PI)).norm() < 1e-15);
        let p = ev("(-8)^(1/3)", 0.0);
        assert!((p - Complex::new(1.0, 3f64.sqrt())).norm() < 1e-12);
    }

    #[test]
    fn errors() {
        let b = Bindings::<f64>::new(0.0, vec![]);
        assert!(matches!(parse("1/t").unwrap().eval(&b), Err(EvalError::DivisionByZero(_))));
        assert!(matches!(parse("a + 1").unwrap().eval(&b), Err(EvalError::Unbound(_))));
        assert!(matches!(parse("x1").unwrap().eval(&b), Err(EvalError::Unbound(_))));
        assert!(matches!(parse("log(t)").unwrap().eval(&b), Err(EvalError::Domain(_))));
        assert!(matches!(parse("t^-1").unwrap().eval(&b), Err(EvalError::DivisionByZero(_))));
    }

    #[test]
    fn parameters_and_single_precision() {
        let mut params = BTreeMap::new();
        params.insert("a0".to_string(), 0.5f32);
        let b = Bindings::with_params(2.0f32, vec![], Arc::new(params));
        let v = parse("a0*t + i").unwrap().eval(&b).unwrap();
        assert_eq!(v, Complex::new(1.0f32, 1.0));
    }

    #[test]
    fn bit_identical_repeat() {
        let e = parse("exp(sin(t)*x1)/(1 + t^2.5) - i*log(2 + x2^2)").unwrap();
        let b = Bindings::new(0.77f64, vec![0.1, 0.9]);
        let v1 = e.eval(&b).unwrap();
        let v2 = e.eval(&b).unwrap();
        assert_eq!(v1.re.to_bits(), v2.re.to_bits());
        assert_eq!(v1.im.to_bits(), v2.im.to_bits());
    }
}
