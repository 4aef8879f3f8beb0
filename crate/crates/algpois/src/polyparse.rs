//! Recursive-descent parser for polynomial Hamiltonians over `z1…zp`,
//! `xi1…xir`.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | '+' unary | power
//! power  := atom ('^' integer)?
//! atom   := number | ident | '(' expr ')'
//! ```
//!
//! Division is accepted only by a nonzero constant, so `1/5` and `x/2` are
//! fine while `1/z1` is rejected.

use algpois_core::expr::{c, var, Expr, ExprMap};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("unexpected character `{ch}` at {pos}")]
    UnexpectedChar { pos: usize, ch: char },
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected `{found}` at {pos}")]
    UnexpectedToken { pos: usize, found: String },
    #[error("unknown variable `{name}` at {pos} (expected z1…z{p} or xi1…xi{r})")]
    UnknownVariable {
        name: String,
        pos: usize,
        p: usize,
        r: usize,
    },
    #[error("exponent at {pos} must be a non-negative integer")]
    BadExponent { pos: usize },
    #[error("division at {pos} is only allowed by a nonzero constant")]
    NonPolynomial { pos: usize },
    #[error("malformed number `{text}` at {pos}")]
    BadNumber { pos: usize, text: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, String),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<f64>().map_err(|_| ParseError::BadNumber {
                pos: start,
                text: text.clone(),
            })?;
            out.push((start, Tok::Num(v, text)));
        } else if ch.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^()".contains(ch) {
            out.push((i, Tok::Op(ch)));
            i += 1;
        } else {
            return Err(ParseError::UnexpectedChar { pos: i, ch });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    p: usize,
    r: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(usize::MAX, |(p, _)| *p)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = fold(lhs + self.term()?);
            } else if self.eat('-') {
                lhs = fold(lhs - self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = fold(lhs * self.unary()?);
            } else if self.peek() == Some(&Tok::Op('/')) {
                let pos = self.pos();
                self.at += 1;
                match self.unary()? {
                    Expr::Const(d) if d != 0.0 => lhs = fold(lhs * c(1.0 / d)),
                    _ => return Err(ParseError::NonPolynomial { pos }),
                }
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            Ok(fold(-self.unary()?))
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let pos = self.pos();
        let n = match self.toks.get(self.at) {
            Some((_, Tok::Num(v, text))) if !text.contains('.') && *v <= i32::MAX as f64 => {
                *v as i32
            }
            Some(_) => return Err(ParseError::BadExponent { pos }),
            None => return Err(ParseError::UnexpectedEnd),
        };
        self.at += 1;
        if self.peek() == Some(&Tok::Op('^')) {
            return Err(ParseError::UnexpectedToken {
                pos: self.pos(),
                found: "^".into(),
            });
        }
        Ok(fold(Expr::Powi(Box::new(base), n)))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let Some((pos, tok)) = self.toks.get(self.at).cloned() else {
            return Err(ParseError::UnexpectedEnd);
        };
        self.at += 1;
        match tok {
            Tok::Num(v, _) => Ok(c(v)),
            Tok::Ident(name) => self.variable(&name, pos),
            Tok::Op('(') => {
                let e = self.expr()?;
                if !self.eat(')') {
                    return match self.toks.get(self.at) {
                        Some((p, t)) => Err(ParseError::UnexpectedToken {
                            pos: *p,
                            found: show(t),
                        }),
                        None => Err(ParseError::UnexpectedEnd),
                    };
                }
                Ok(e)
            }
            t => Err(ParseError::UnexpectedToken {
                pos,
                found: show(&t),
            }),
        }
    }

    fn variable(&self, name: &str, pos: usize) -> Result<Expr, ParseError> {
        let unknown = || ParseError::UnknownVariable {
            name: name.to_string(),
            pos,
            p: self.p,
            r: self.r,
        };
        let (offset, limit, digits) = if let Some(d) = name.strip_prefix("xi") {
            (self.p, self.r, d)
        } else if let Some(d) = name.strip_prefix('z') {
            (0, self.p, d)
        } else {
            return Err(unknown());
        };
        match digits.parse::<usize>() {
            Ok(k) if k >= 1 && k <= limit && !digits.starts_with('0') => Ok(var(offset + k - 1)),
            _ => Err(unknown()),
        }
    }
}

fn show(t: &Tok) -> String {
    match t {
        Tok::Num(_, s) | Tok::Ident(s) => s.clone(),
        Tok::Op(ch) => ch.to_string(),
    }
}

/// Folds constant subtrees.
fn fold(e: Expr) -> Expr {
    match &e {
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => match (a.as_ref(), b.as_ref()) {
            (Expr::Const(_), Expr::Const(_)) => c(e.eval::<f64>(&[])),
            _ => e,
        },
        Expr::Neg(a) | Expr::Powi(a, _) if matches!(a.as_ref(), Expr::Const(_)) => {
            c(e.eval::<f64>(&[]))
        }
        _ => e,
    }
}

/// Parses `src` into an expression over `p + r` variables.
pub fn parse(src: &str, p: usize, r: usize) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut parser = Parser { toks, at: 0, p, r };
    let e = parser.expr()?;
    if let Some((pos, t)) = parser.toks.get(parser.at) {
        return Err(ParseError::UnexpectedToken {
            pos: *pos,
            found: show(t),
        });
    }
    Ok(e)
}

pub fn parse_hamiltonian(src: &str, p: usize, r: usize) -> Result<ExprMap, ParseError> {
    Ok(ExprMap::scalar(p + r, parse(src, p, r)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, x: &[f64]) -> f64 {
        parse(src, 2, 3).unwrap().eval(x)
    }

    #[test]
    fn corpus() {
        let x = [0.5, -1.5, 2.0, 3.0, -0.25];
        let cases: &[(&str, f64)] = &[
            ("1", 1.0),
            ("  2.5 ", 2.5),
            ("1/5", 0.2),
            ("-3^2", -9.0),
            ("(-3)^2", 9.0),
            ("2*3+4", 10.0),
            ("2*(3+4)", 14.0),
            ("10-4-3", 3.0),
            ("12/3/2", 2.0),
            ("z1", 0.5),
            ("z2^3", -3.375),
            ("xi1*xi2", 6.0),
            (
                "1/5*(z1^2+z2^2) + 2*xi1^2 - xi2^2 + 3*xi3^2",
                0.2 * 2.5 + 8.0 - 9.0 + 0.1875,
            ),
            ("2*xi1*xi2 - xi3^3", 12.0 + 0.015625),
            ("z1^0", 1.0),
            ("--z1", 0.5),
            ("+z1", 0.5),
            ("(z1 - z2)/2", 1.0),
            ("xi3^2^", f64::NAN),
        ];
        for (src, want) in cases {
            if want.is_nan() {
                assert!(parse(src, 2, 3).is_err(), "{src}");
                continue;
            }
            let got = ev(src, &x);
            assert!((got - want).abs() < 1e-12, "{src}: {got} vs {want}");
        }
    }

    #[test]
    fn errors() {
        assert_eq!(parse("", 1, 1), Err(ParseError::UnexpectedEnd));
        assert_eq!(parse("z1 +", 1, 1), Err(ParseError::UnexpectedEnd));
        assert_eq!(
            parse("z1 $ 2", 1, 1),
            Err(ParseError::UnexpectedChar { pos: 3, ch: '$' })
        );
        assert!(matches!(
            parse("z3", 2, 1),
            Err(ParseError::UnknownVariable { .. })
        ));
        assert!(matches!(
            parse("xi0", 2, 1),
            Err(ParseError::UnknownVariable { .. })
        ));
        assert!(matches!(
            parse("xi01", 2, 1),
            Err(ParseError::UnknownVariable { .. })
        ));
        assert!(matches!(
            parse("y", 2, 1),
            Err(ParseError::UnknownVariable { .. })
        ));
        assert_eq!(
            parse("1/z1", 1, 1),
            Err(ParseError::NonPolynomial { pos: 1 })
        );
        assert_eq!(
            parse("z1/(2-2)", 1, 1),
            Err(ParseError::NonPolynomial { pos: 2 })
        );
        assert_eq!(
            parse("z1^1.5", 1, 1),
            Err(ParseError::BadExponent { pos: 3 })
        );
        assert_eq!(
            parse("z1^z1", 1, 1),
            Err(ParseError::BadExponent { pos: 3 })
        );
        assert!(matches!(parse("(z1", 1, 1), Err(ParseError::UnexpectedEnd)));
        assert!(matches!(
            parse("z1 z1", 1, 1),
            Err(ParseError::UnexpectedToken { pos: 3, .. })
        ));
        assert!(matches!(
            parse("1..2", 1, 1),
            Err(ParseError::BadNumber { .. })
        ));
    }

    #[test]
    fn constants_fold() {
        assert_eq!(parse("2*3 - 1/4", 0, 0).unwrap(), c(5.75));
        assert_eq!(parse("-(2^3)", 0, 0).unwrap(), c(-8.0));
    }

    #[test]
    fn arity_follows_layout() {
        let h = parse_hamiltonian("xi2", 3, 2).unwrap();
        assert_eq!(algpois_core::SmoothMap::dim_in(&h), 5);
        assert_eq!(parse("xi2", 3, 2).unwrap(), var(4));
    }
}
