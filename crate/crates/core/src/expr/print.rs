//! Printing with the minimal parentheses that reparse to the same tree.

use std::fmt;

use super::Expr;

// Grammar slots, loosest to tightest.
const SUM: u8 = 1;
const TERM: u8 = 2;
const FACTOR: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => SUM,
        Expr::Mul(..) | Expr::Div(..) => TERM,
        Expr::Neg(_) => FACTOR,
        Expr::Num(v) if v.is_sign_negative() => FACTOR,
        Expr::Pow(..) => POWER,
        _ => ATOM,
    }
}

fn write_slot(f: &mut fmt::Formatter<'_>, e: &Expr, slot: u8) -> fmt::Result {
    if level(e) < slot {
        f.write_str("(")?;
        write_expr(f, e)?;
        f.write_str(")")
    } else {
        write_expr(f, e)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Num(v) => {
            if v.is_sign_negative() {
                write!(f, "-{}", -v)
            } else {
                write!(f, "{v}")
            }
        }
        Expr::Imag => f.write_str("i"),
        Expr::Time => f.write_str("t"),
        Expr::Space(k) => write!(f, "x{k}"),
        Expr::Param(p) => f.write_str(p),
        Expr::Neg(a) => {
            f.write_str("-")?;
            write_slot(f, a, POWER)
        }
        Expr::Add(a, b) => {
            write_slot(f, a, SUM)?;
            f.write_str(" + ")?;
            write_slot(f, b, TERM)
        }
        Expr::Sub(a, b) => {
            write_slot(f, a, SUM)?;
            f.write_str(" - ")?;
            write_slot(f, b, TERM)
        }
        Expr::Mul(a, b) => {
            write_slot(f, a, TERM)?;
            f.write_str("*")?;
            write_slot(f, b, FACTOR)
        }
        Expr::Div(a, b) => {
            write_slot(f, a, TERM)?;
            f.write_str("/")?;
            write_slot(f, b, FACTOR)
        }
        Expr::Pow(a, b) => {
            write_slot(f, a, ATOM)?;
            f.write_str("^")?;
            write_slot(f, b, FACTOR)
        }
        Expr::Call(func, a) => {
            write!(f, "{func}(")?;
            write_expr(f, a)?;
            f.write_str(")")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;

    #[test]
    fn minimal_parentheses() {
        for (src, printed) in [
            ("(a + b)*c", "(a + b)*c"),
            ("a - (b - c)", "a - (b - c)"),
            ("a - b - c", "a - b - c"),
            ("(2^3)^4", "(2^3)^4"),
            ("2^3^4", "2^3^4"),
            ("-(t^2)", "-t^2"),
            ("(-t)^2", "(-t)^2"),
            ("a/(b*c)", "a/(b*c)"),
            ("a*-b", "a*-b"),
            ("sqrt(a0 + t)", "sqrt(a0 + t)"),
        ] {
            let e = parse(src).unwrap();
            assert_eq!(e.to_string(), printed, "{src}");
            assert_eq!(parse(&e.to_string()).unwrap(), e);
        }
    }
}
