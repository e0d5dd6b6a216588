//! Coefficient expression language.
//!
//! Expressions are immutable trees over complex scalars with the variables `t`, `x1..xn`,
//! named real parameters, the imaginary unit `i` and a handful of elementary functions.
//! [`parse`] produces the raw tree exactly as written; the smart constructors
//! ([`Expr::add`], [`Expr::mul`], ...) fold constants and drop neutral elements, and are
//! what the symbol calculus uses when it combines coefficients.

mod diff;
mod eval;
mod parser;
mod print;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

pub use diff::DiffError;
pub use eval::{convert_params, Bindings, EvalError};
pub use parser::{parse, ParseError, ParseErrorKind};

/// Elementary functions understood by the language.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
    Log,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Log => "log",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "log" => Func::Log,
            _ => return None,
        })
    }

    pub const ALL: [Func; 6] = [
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Sqrt,
        Func::Abs,
        Func::Log,
    ];
}

impl fmt::Display for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Expression tree. Children are reference counted so that coefficient products built by
/// the symbol calculus share subtrees instead of copying them.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    /// Real literal.
    Num(f64),
    /// The imaginary unit `i`.
    Imag,
    /// The time variable `t`.
    Time,
    /// Space variable `x<k>`, 1-based.
    Space(usize),
    /// Named real parameter.
    Param(String),
    Neg(Arc<Expr>),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Pow(Arc<Expr>, Arc<Expr>),
    Call(Func, Arc<Expr>),
}

impl Default for Expr {
    fn default() -> Self {
        Expr::Num(0.0)
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Num(0.0)
    }

    pub fn one() -> Expr {
        Expr::Num(1.0)
    }

    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn param(name: impl Into<String>) -> Expr {
        Expr::Param(name.into())
    }

    /// `-i`, the factor turning `d/dt` into `D_t`.
    pub fn minus_i() -> Expr {
        Expr::Neg(Arc::new(Expr::Imag))
    }

    /// Literal zero, i.e. structurally known to vanish.
    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 1.0)
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            _ => None,
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Num(v) => Expr::Num(-v),
            Expr::Neg(inner) => Arc::unwrap_or_clone(inner),
            other => Expr::Neg(Arc::new(other)),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            _ if a.is_zero() => b,
            _ if b.is_zero() => a,
            (Expr::Num(x), Expr::Num(y)) => Expr::Num(x + y),
            (Expr::Neg(inner), _) if **inner == b => Expr::zero(),
            (_, Expr::Neg(inner)) => Expr::sub(a.clone(), (**inner).clone()),
            _ => Expr::Add(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            _ if b.is_zero() => a,
            _ if a.is_zero() => Expr::neg(b),
            (Expr::Num(x), Expr::Num(y)) => Expr::Num(x - y),
            _ if a == b => Expr::zero(),
            (_, Expr::Neg(inner)) => Expr::Add(Arc::new(a.clone()), inner.clone()),
            _ => Expr::Sub(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            _ if a.is_zero() || b.is_zero() => Expr::zero(),
            _ if a.is_one() => b,
            _ if b.is_one() => a,
            (Expr::Num(x), Expr::Num(y)) => Expr::Num(x * y),
            (Expr::Num(x), _) if *x == -1.0 => Expr::neg(b),
            (_, Expr::Num(y)) if *y == -1.0 => Expr::neg(a),
            (Expr::Neg(x), Expr::Neg(y)) => Expr::mul((**x).clone(), (**y).clone()),
            (Expr::Neg(x), _) => Expr::neg(Expr::mul((**x).clone(), b)),
            (_, Expr::Neg(y)) => Expr::neg(Expr::mul(a, (**y).clone())),
            _ => Expr::Mul(Arc::new(a), Arc::new(b)),
        }
    }

    /// Division; a literal zero divisor is kept in the tree and reported at evaluation.
    pub fn div(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            _ if a.is_zero() && !b.is_zero() => Expr::zero(),
            _ if b.is_one() => a,
            (Expr::Num(x), Expr::Num(y)) if *y != 0.0 => Expr::Num(x / y),
            _ => Expr::Div(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn pow(base: Expr, exponent: Expr) -> Expr {
        match exponent.as_num() {
            Some(0.0) => Expr::one(),
            Some(1.0) => base,
            _ => Expr::Pow(Arc::new(base), Arc::new(exponent)),
        }
    }

    pub fn call(func: Func, arg: Expr) -> Expr {
        Expr::Call(func, Arc::new(arg))
    }

    /// Sum of a sequence, folding through [`Expr::add`].
    pub fn sum<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        items.into_iter().fold(Expr::zero(), Expr::add)
    }

    /// Product of a sequence, folding through [`Expr::mul`].
    pub fn product<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        items.into_iter().fold(Expr::one(), Expr::mul)
    }

    /// Integer power by repeated multiplication; keeps trees free of `^` for small powers.
    pub fn powi(base: &Expr, k: u32) -> Expr {
        (0..k).fold(Expr::one(), |acc, _| Expr::mul(acc, base.clone()))
    }

    fn any(&self, pred: &impl Fn(&Expr) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Expr::Num(_) | Expr::Imag | Expr::Time | Expr::Space(_) | Expr::Param(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.any(pred),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.any(pred) || b.any(pred)
            }
        }
    }

    pub fn depends_on_t(&self) -> bool {
        self.any(&|e| matches!(e, Expr::Time))
    }

    pub fn depends_on_x(&self) -> bool {
        self.any(&|e| matches!(e, Expr::Space(_)))
    }

    /// Largest space index referenced, 0 if none.
    pub fn max_space_index(&self) -> usize {
        let mut out = 0;
        self.visit(&mut |e| {
            if let Expr::Space(k) = e {
                out = out.max(*k);
            }
        });
        out
    }

    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Param(p) = e {
                out.insert(p.clone());
            }
        });
        out
    }

    /// Number of nodes, counting shared subtrees once per occurrence.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Num(_) | Expr::Imag | Expr::Time | Expr::Space(_) | Expr::Param(_) => {}
            Expr::Neg(a) | Expr::Call(_, a) => a.visit(f),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    /// Replace every occurrence of `t` by `replacement`.
    pub fn substitute_time(&self, replacement: &Expr) -> Expr {
        let sub = |e: &Arc<Expr>| Arc::new(e.substitute_time(replacement));
        match self {
            Expr::Time => replacement.clone(),
            Expr::Num(_) | Expr::Imag | Expr::Space(_) | Expr::Param(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(sub(a)),
            Expr::Call(func, a) => Expr::Call(*func, sub(a)),
            Expr::Add(a, b) => Expr::Add(sub(a), sub(b)),
            Expr::Sub(a, b) => Expr::Sub(sub(a), sub(b)),
            Expr::Mul(a, b) => Expr::Mul(sub(a), sub(b)),
            Expr::Div(a, b) => Expr::Div(sub(a), sub(b)),
            Expr::Pow(a, b) => Expr::Pow(sub(a), sub(b)),
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(self, rhs)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}
