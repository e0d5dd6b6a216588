//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (("+"|"-") term)* ;
//! term   := factor (("*"|"/") factor)* ;
//! factor := ("-")? power ;
//! power  := atom ("^" factor)? ;
//! atom   := NUMBER | "i" | "t" | "x" DIGITS | IDENT "(" expr ")" | IDENT | "(" expr ")" ;
//! ```

use std::sync::Arc;

use thiserror::Error;

use super::{Expr, Func};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// Unexpected token or end of input.
    Syntax,
    /// `name(` where `name` is not a known function.
    UnknownFunction(String),
    /// Malformed numeric literal.
    BadNumber(String),
}

/// Parse failure with the byte offset where it was detected.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{}", self.describe())]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<String>,
    pub kind: ParseErrorKind,
}

impl ParseError {
    fn describe(&self) -> String {
        match &self.kind {
            ParseErrorKind::Syntax => format!(
                "syntax error at offset {}, expected {}",
                self.offset,
                self.expected.join(" or ")
            ),
            ParseErrorKind::UnknownFunction(name) => {
                format!("unknown function `{name}` at offset {}", self.offset)
            }
            ParseErrorKind::BadNumber(text) => {
                format!("malformed number `{text}` at offset {}", self.offset)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    /// Returns the token and its starting offset.
    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let Some(&c) = bytes.get(start) else {
            return Ok((Tok::End, start));
        };
        let single = |tok| Ok((tok, start));
        match c {
            b'+' => {
                self.pos += 1;
                single(Tok::Plus)
            }
            b'-' => {
                self.pos += 1;
                single(Tok::Minus)
            }
            b'*' => {
                self.pos += 1;
                single(Tok::Star)
            }
            b'/' => {
                self.pos += 1;
                single(Tok::Slash)
            }
            b'^' => {
                self.pos += 1;
                single(Tok::Caret)
            }
            b'(' => {
                self.pos += 1;
                single(Tok::LParen)
            }
            b')' => {
                self.pos += 1;
                single(Tok::RParen)
            }
            b'0'..=b'9' | b'.' => self.number(start),
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = start;
                while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                    end += 1;
                }
                self.pos = end;
                Ok((Tok::Ident(self.src[start..end].to_string()), start))
            }
            _ => Err(ParseError {
                offset: start,
                expected: vec!["expression".into()],
                kind: ParseErrorKind::Syntax,
            }),
        }
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize), ParseError> {
        let bytes = self.src.as_bytes();
        let mut end = start;
        let digits = |end: &mut usize| {
            while *end < bytes.len() && bytes[*end].is_ascii_digit() {
                *end += 1;
            }
        };
        digits(&mut end);
        if end < bytes.len() && bytes[end] == b'.' {
            end += 1;
            digits(&mut end);
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut probe = end + 1;
            if probe < bytes.len() && (bytes[probe] == b'+' || bytes[probe] == b'-') {
                probe += 1;
            }
            if probe < bytes.len() && bytes[probe].is_ascii_digit() {
                end = probe;
                digits(&mut end);
            }
        }
        let text = &self.src[start..end];
        self.pos = end;
        text.parse::<f64>()
            .map(|v| (Tok::Num(v), start))
            .map_err(|_| ParseError {
                offset: start,
                expected: vec!["number".into()],
                kind: ParseErrorKind::BadNumber(text.to_string()),
            })
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    at: usize,
}

impl<'a> Parser<'a> {
    fn advance(&mut self) -> Result<(), ParseError> {
        let (tok, at) = self.lexer.next()?;
        self.tok = tok;
        self.at = at;
        Ok(())
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        Err(ParseError {
            offset: self.at,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            kind: ParseErrorKind::Syntax,
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.tok {
                Tok::Plus => {
                    self.advance()?;
                    let rhs = self.term()?;
                    lhs = Expr::Add(Arc::new(lhs), Arc::new(rhs));
                }
                Tok::Minus => {
                    self.advance()?;
                    let rhs = self.term()?;
                    lhs = Expr::Sub(Arc::new(lhs), Arc::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.tok {
                Tok::Star => {
                    self.advance()?;
                    let rhs = self.factor()?;
                    lhs = Expr::Mul(Arc::new(lhs), Arc::new(rhs));
                }
                Tok::Slash => {
                    self.advance()?;
                    let rhs = self.factor()?;
                    lhs = Expr::Div(Arc::new(lhs), Arc::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.tok == Tok::Minus {
            self.advance()?;
            let inner = self.power()?;
            return Ok(Expr::Neg(Arc::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.tok == Tok::Caret {
            self.advance()?;
            let exponent = self.factor()?;
            return Ok(Expr::Pow(Arc::new(base), Arc::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.advance()?;
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.advance()?;
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let name_at = self.at;
                self.advance()?;
                if self.tok == Tok::LParen {
                    let Some(func) = Func::from_name(&name) else {
                        return Err(ParseError {
                            offset: name_at,
                            expected: Func::ALL.iter().map(|f| f.name().to_string()).collect(),
                            kind: ParseErrorKind::UnknownFunction(name),
                        });
                    };
                    self.advance()?;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(func, Arc::new(arg)));
                }
                Ok(classify_ident(&name))
            }
            _ => self.fail(&["number", "identifier", "("]),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if self.tok != Tok::RParen {
            return self.fail(&[")"]);
        }
        self.advance()
    }
}

fn classify_ident(name: &str) -> Expr {
    match name {
        "i" => Expr::Imag,
        "t" => Expr::Time,
        _ => match name.strip_prefix('x') {
            Some(digits) if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) => {
                // Out-of-range indices are rejected later, against the problem dimension.
                Expr::Space(digits.parse().unwrap_or(usize::MAX))
            }
            _ => Expr::Param(name.to_string()),
        },
    }
}

/// Parse `source` into a raw expression tree.
pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let mut parser = Parser {
        lexer: Lexer { src: source, pos: 0 },
        tok: Tok::End,
        at: 0,
    };
    parser.advance()?;
    let e = parser.expr()?;
    if parser.tok != Tok::End {
        return parser.fail(&["operator", "end of input"]);
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(e: Expr) -> Arc<Expr> {
        Arc::new(e)
    }

    #[test]
    fn power_of_time() {
        assert_eq!(parse("t^2").unwrap(), Expr::Pow(a(Expr::Time), a(Expr::Num(2.0))));
    }

    #[test]
    fn mixed_expression() {
        let expected = Expr::Add(
            a(Expr::Mul(a(Expr::Call(Func::Cos, a(Expr::Time))), a(Expr::Space(1)))),
            a(Expr::Mul(a(Expr::Imag), a(Expr::Num(0.5)))),
        );
        assert_eq!(parse("cos(t)*x1 + i*0.5").unwrap(), expected);
    }

    #[test]
    fn unbalanced_paren() {
        let err = parse("sqrt(t").unwrap_err();
        assert_eq!(err.offset, 6);
        assert_eq!(err.expected, vec![")".to_string()]);
        assert_eq!(err.kind, ParseErrorKind::Syntax);
    }

    #[test]
    fn precedence_and_associativity() {
        // ^ binds tighter than unary minus, and is right-associative
        assert_eq!(
            parse("-2^3^2").unwrap(),
            Expr::Neg(a(Expr::Pow(
                a(Expr::Num(2.0)),
                a(Expr::Pow(a(Expr::Num(3.0)), a(Expr::Num(2.0))))
            )))
        );
        assert_eq!(
            parse("1 - 2 - 3").unwrap(),
            Expr::Sub(a(Expr::Sub(a(Expr::Num(1.0)), a(Expr::Num(2.0)))), a(Expr::Num(3.0)))
        );
        assert_eq!(
            parse("2^-1").unwrap(),
            Expr::Pow(a(Expr::Num(2.0)), a(Expr::Neg(a(Expr::Num(1.0)))))
        );
    }

    #[test]
    fn whitespace_insensitive() {
        assert_eq!(parse(" t * x1 ").unwrap(), parse("t*x1").unwrap());
    }

    #[test]
    fn implicit_multiplication_rejected() {
        let err = parse("2t").unwrap_err();
        assert_eq!(err.offset, 1);
    }

    #[test]
    fn unknown_function() {
        let err = parse("1 + tan(t)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownFunction("tan".into()));
        assert_eq!(err.offset, 4);
    }

    #[test]
    fn identifiers() {
        assert_eq!(parse("x12").unwrap(), Expr::Space(12));
        assert_eq!(parse("alpha").unwrap(), Expr::Param("alpha".into()));
        assert_eq!(parse("xa").unwrap(), Expr::Param("xa".into()));
        assert_eq!(parse("1.5e-3").unwrap(), Expr::Num(1.5e-3));
        assert_eq!(parse(".5").unwrap(), Expr::Num(0.5));
    }

    #[test]
    fn double_minus_rejected() {
        assert!(parse("--t").is_err());
        assert!(parse("t - -t").is_ok());
        assert!(parse("").is_err());
    }
}
