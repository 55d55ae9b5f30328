//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' exponent)?
//! exponent:= '-'? integer | '(' '-'? integer ')'
//! primary := number 'i'? | 'i' | 'z' | func '(' expr ')' | '(' expr ')'
//! func    := exp | sin | cos | log
//! ```
//!
//! Additive combinations of literals are folded into a single constant, so
//! printed complex constants such as `(1 - 2i)` read back as one node.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::{Func, HoloExpr};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset into the input.
    pub offset: usize,
    pub expected: Vec<&'static str>,
    pub found: Option<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let found = self.found.as_deref().unwrap_or("end of input");
        write!(
            f,
            "parse error at offset {}: expected one of [{}], found {found}",
            self.offset,
            self.expected.join(", ")
        )
    }
}

impl std::error::Error for ParseError {}

const OPERAND: &[&str] = &["number", "z", "i", "function", "(", "-"];

pub fn parse_expr(text: &str) -> Result<HoloExpr, ParseError> {
    let mut p = Parser { src: text, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.error(&["+", "-", "*", "/", "^", "end of input"]));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn error(&mut self, expected: &[&'static str]) -> ParseError {
        self.skip_ws();
        let found = self.rest().chars().next().map(|c| {
            let word: String = self
                .rest()
                .chars()
                .take_while(|ch| ch.is_alphanumeric() || *ch == '.')
                .collect();
            if word.is_empty() {
                c.to_string()
            } else {
                word
            }
        });
        ParseError {
            offset: self.pos,
            expected: expected.to_vec(),
            found,
        }
    }

    fn expect(&mut self, c: char, name: &'static str) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&[name]))
        }
    }

    fn expr(&mut self) -> Result<HoloExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                let rhs = self.term()?;
                lhs = fold_add(lhs, rhs);
            } else if self.eat('-') {
                let rhs = self.term()?;
                lhs = fold_sub(lhs, rhs);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<HoloExpr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = HoloExpr::Mul(Arc::new(lhs), Arc::new(self.unary()?));
            } else if self.eat('/') {
                lhs = HoloExpr::Div(Arc::new(lhs), Arc::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<HoloExpr, ParseError> {
        if self.eat('-') {
            let e = self.unary()?;
            return Ok(match e {
                HoloExpr::Const(z) => HoloExpr::Const(-z),
                e => HoloExpr::Neg(Arc::new(e)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<HoloExpr, ParseError> {
        let base = self.primary()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let k = if self.eat('(') {
            let k = self.integer()?;
            self.expect(')', ")")?;
            k
        } else {
            self.integer()?
        };
        Ok(HoloExpr::Pow(Arc::new(base), k))
    }

    fn integer(&mut self) -> Result<i32, ParseError> {
        let negative = self.eat('-');
        self.skip_ws();
        let n = self.rest().bytes().take_while(u8::is_ascii_digit).count();
        if n == 0 {
            return Err(self.error(&["integer exponent"]));
        }
        let start = self.pos;
        let digits = &self.src[start..start + n];
        let value: i64 = digits.parse().map_err(|_| ParseError {
            offset: start,
            expected: vec!["integer exponent in i32 range"],
            found: Some(digits.to_string()),
        })?;
        let value = if negative { -value } else { value };
        let k = i32::try_from(value).map_err(|_| ParseError {
            offset: start,
            expected: vec!["integer exponent in i32 range"],
            found: Some(digits.to_string()),
        })?;
        self.pos += digits.len();
        Ok(k)
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let r = self.rest().as_bytes();
        let mut n = r.iter().take_while(|b| b.is_ascii_digit()).count();
        if r.get(n) == Some(&b'.') {
            n += 1;
            n += r[n..].iter().take_while(|b| b.is_ascii_digit()).count();
        }
        if matches!(r.get(n), Some(b'e') | Some(b'E')) {
            let mut m = n + 1;
            if matches!(r.get(m), Some(b'+') | Some(b'-')) {
                m += 1;
            }
            let exp_digits = r[m..].iter().take_while(|b| b.is_ascii_digit()).count();
            if exp_digits > 0 {
                n = m + exp_digits;
            }
        }
        let text = &self.rest()[..n];
        let v: f64 = text.parse().map_err(|_| self.error(&["number"]))?;
        self.pos += n;
        Ok(v)
    }

    fn primary(&mut self) -> Result<HoloExpr, ParseError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let v = self.number()?;
                let r = self.rest().as_bytes();
                let imaginary = r.first() == Some(&b'i')
                    && !r.get(1).is_some_and(|b| b.is_ascii_alphanumeric());
                if imaginary {
                    self.pos += 1;
                    Ok(HoloExpr::Const(Complex64::new(0.0, v)))
                } else {
                    Ok(HoloExpr::Const(Complex64::new(v, 0.0)))
                }
            }
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')', ")")?;
                Ok(e)
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let n = self
                    .rest()
                    .bytes()
                    .take_while(u8::is_ascii_alphanumeric)
                    .count();
                let ident = &self.src[start..start + n];
                match ident {
                    "z" => {
                        self.pos += n;
                        Ok(HoloExpr::Var)
                    }
                    "i" => {
                        self.pos += n;
                        Ok(HoloExpr::Const(Complex64::new(0.0, 1.0)))
                    }
                    _ => match Func::from_name(ident) {
                        Some(func) => {
                            self.pos += n;
                            self.expect('(', "(")?;
                            let arg = self.expr()?;
                            self.expect(')', ")")?;
                            Ok(HoloExpr::Call(func, Arc::new(arg)))
                        }
                        None => Err(self.error(OPERAND)),
                    },
                }
            }
            _ => Err(self.error(OPERAND)),
        }
    }
}

fn fold_add(l: HoloExpr, r: HoloExpr) -> HoloExpr {
    match (l, r) {
        (HoloExpr::Const(a), HoloExpr::Const(b)) => HoloExpr::Const(a + b),
        (l, r) => HoloExpr::Add(Arc::new(l), Arc::new(r)),
    }
}

fn fold_sub(l: HoloExpr, r: HoloExpr) -> HoloExpr {
    match (l, r) {
        (HoloExpr::Const(a), HoloExpr::Const(b)) => HoloExpr::Const(a - b),
        (l, r) => HoloExpr::Sub(Arc::new(l), Arc::new(r)),
    }
}
