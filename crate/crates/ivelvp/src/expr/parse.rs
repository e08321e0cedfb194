//! Recursive descent parser for the expression language.
//!
//! Grammar, loosest to tightest binding:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?          // right associative
//! atom    := number | ident | ident '(' args ')' | '(' sum ')'
//! ```
//!
//! Comparisons are only legal as the first argument of `ite`. Errors carry
//! the byte offset of the offending token.

use super::{BinOp, CmpOp, Expr, Func};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("parse error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

fn err<T>(offset: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        offset,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq)]
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
    Comma,
    Cmp(CmpOp),
    Eof,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((Tok::Eof, start));
        }
        let c = self.src[self.pos];
        let simple = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(t) = simple {
            self.pos += 1;
            return Ok((t, start));
        }
        match c {
            b'<' | b'>' | b'=' => {
                let two = self.pos + 1 < self.src.len() && self.src[self.pos + 1] == b'=';
                let op = match (c, two) {
                    (b'<', true) => CmpOp::Le,
                    (b'<', false) => CmpOp::Lt,
                    (b'>', true) => CmpOp::Ge,
                    (b'>', false) => CmpOp::Gt,
                    (b'=', true) => CmpOp::Eq,
                    (b'=', false) => return err(start, "expected `==`"),
                    _ => unreachable!(),
                };
                self.pos += if two { 2 } else { 1 };
                Ok((Tok::Cmp(op), start))
            }
            b'0'..=b'9' => {
                let mut end = self.pos;
                while end < self.src.len() && self.src[end].is_ascii_digit() {
                    end += 1;
                }
                if end < self.src.len() && self.src[end] == b'.' {
                    end += 1;
                    while end < self.src.len() && self.src[end].is_ascii_digit() {
                        end += 1;
                    }
                }
                if end < self.src.len() && (self.src[end] == b'e' || self.src[end] == b'E') {
                    let mut exp_end = end + 1;
                    if exp_end < self.src.len()
                        && (self.src[exp_end] == b'+' || self.src[exp_end] == b'-')
                    {
                        exp_end += 1;
                    }
                    if exp_end < self.src.len() && self.src[exp_end].is_ascii_digit() {
                        while exp_end < self.src.len() && self.src[exp_end].is_ascii_digit() {
                            exp_end += 1;
                        }
                        end = exp_end;
                    }
                }
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                let value: f64 = text
                    .parse()
                    .map_err(|_| ParseError {
                        offset: start,
                        message: format!("invalid number literal `{}`", text),
                    })?;
                self.pos = end;
                Ok((Tok::Num(value), start))
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                {
                    end += 1;
                }
                let name = std::str::from_utf8(&self.src[self.pos..end]).unwrap().to_string();
                self.pos = end;
                Ok((Tok::Ident(name), start))
            }
            other => err(start, format!("unexpected character `{}`", other as char)),
        }
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    tok_at: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        let mut lexer = Lexer::new(src);
        let (tok, tok_at) = lexer.next()?;
        Ok(Parser { lexer, tok, tok_at })
    }

    fn advance(&mut self) -> Result<(), ParseError> {
        let (tok, at) = self.lexer.next()?;
        self.tok = tok;
        self.tok_at = at;
        Ok(())
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.tok == want {
            self.advance()
        } else {
            err(self.tok_at, format!("expected {}", what))
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.product()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.tok == Tok::Minus {
            self.advance()?;
            let inner = self.unary()?;
            Ok(Expr::Neg(Box::new(inner)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.tok == Tok::Caret {
            self.advance()?;
            let exponent = self.unary()?;
            Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.advance()?;
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.advance()?;
                let inner = self.sum()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let at = self.tok_at;
                self.advance()?;
                if self.tok == Tok::LParen {
                    self.call(&name, at)
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Tok::Eof => err(self.tok_at, "unexpected end of input"),
            _ => err(self.tok_at, "expected a number, variable, or `(`"),
        }
    }

    fn call(&mut self, name: &str, at: usize) -> Result<Expr, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        if name == "ite" {
            let lhs = self.sum()?;
            let op = match self.tok {
                Tok::Cmp(op) => op,
                _ => return err(self.tok_at, "expected a comparison in `ite` condition"),
            };
            self.advance()?;
            let rhs = self.sum()?;
            self.expect(Tok::Comma, "`,` after condition")?;
            let then = self.sum()?;
            self.expect(Tok::Comma, "`,` after second argument of `ite`")?;
            let otherwise = self.sum()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Expr::Ite {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                then: Box::new(then),
                otherwise: Box::new(otherwise),
            });
        }
        let func = match name {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "min" => Func::Min,
            "max" => Func::Max,
            other => return err(at, format!("unknown function `{}`", other)),
        };
        let mut args = vec![self.sum()?];
        while self.tok == Tok::Comma {
            self.advance()?;
            args.push(self.sum()?);
        }
        self.expect(Tok::RParen, "`)`")?;
        if args.len() != func.arity() {
            return err(
                at,
                format!(
                    "`{}` takes {} argument(s), got {}",
                    func.name(),
                    func.arity(),
                    args.len()
                ),
            );
        }
        Ok(Expr::Call(func, args))
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src)?;
    let e = p.sum()?;
    if p.tok != Tok::Eof {
        return err(p.tok_at, "trailing input after expression");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_forms() {
        assert_eq!(parse("42").unwrap(), Expr::Num(42.0));
        assert_eq!(parse("3.5").unwrap(), Expr::Num(3.5));
        assert_eq!(parse("1e-3").unwrap(), Expr::Num(0.001));
        assert_eq!(parse("2.5E2").unwrap(), Expr::Num(250.0));
    }

    #[test]
    fn error_offsets() {
        let e = parse("1 + * 2").unwrap_err();
        assert_eq!(e.offset, 4);
        let e = parse("foo(1)").unwrap_err();
        assert_eq!(e.offset, 0);
        assert!(e.message.contains("unknown function"));
        let e = parse("min(1)").unwrap_err();
        assert!(e.message.contains("takes 2 argument(s)"));
        let e = parse("1 + 2)").unwrap_err();
        assert_eq!(e.offset, 5);
        assert!(e.message.contains("trailing"));
        let e = parse("(1 + 2").unwrap_err();
        assert_eq!(e.offset, 6);
    }

    #[test]
    fn no_implicit_multiplication() {
        assert!(parse("2x").is_err());
        assert!(parse("2(3)").is_err());
    }

    #[test]
    fn comparisons_only_inside_ite() {
        assert!(parse("x < 1").is_err());
        assert!(parse("ite(x<1, 1, 0)").is_ok());
        let e = parse("ite(x, 1, 0)").unwrap_err();
        assert!(e.message.contains("comparison"));
    }

    #[test]
    fn nested_calls_and_unary() {
        let e = parse("max(-x, min(y, -3))").unwrap();
        assert_eq!(
            e,
            Expr::Call(
                Func::Max,
                vec![
                    Expr::Neg(Box::new(Expr::Var("x".into()))),
                    Expr::Call(
                        Func::Min,
                        vec![Expr::Var("y".into()), Expr::Neg(Box::new(Expr::Num(3.0)))]
                    ),
                ]
            )
        );
    }
}
