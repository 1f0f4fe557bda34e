//! Recursive-descent parser for the polynomial grammar:
//!
//! ```text
//! expression := ['+'|'-'] term (('+'|'-') term)*
//! term       := factor ('*' factor)*
//! factor     := rational | 'i' | var | var '^' uint | '(' expression ')'
//! rational   := int | int '/' uint
//! ```
//!
//! Whitespace is ignored and multiplication must be explicit. A leading sign
//! on an expression is accepted so that printed polynomials re-parse.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{AlgebraError, ExponentVector, GaussianRational, Polynomial, Rational, Variables};

/// Parses `text` over the variable list `vars`.
pub fn parse_polynomial(text: &str, vars: &Variables) -> Result<Polynomial, AlgebraError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, vars };
    let poly = p.expression()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(poly)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a Variables,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn syntax(&self, message: &str) -> AlgebraError {
        AlgebraError::Syntax { position: self.pos, message: message.to_string() }
    }

    fn expression(&mut self) -> Result<Polynomial, AlgebraError> {
        let mut negate = false;
        match self.peek() {
            Some(b'-') => {
                negate = true;
                self.pos += 1;
            }
            Some(b'+') => self.pos += 1,
            _ => {}
        }
        let first = self.term()?;
        let mut acc = if negate { first.neg() } else { first };
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let t = self.term()?;
            acc = if op == b'+' { acc.checked_add(&t)? } else { acc.checked_sub(&t)? };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial, AlgebraError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let f = self.factor()?;
            acc = acc.checked_mul(&f)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial, AlgebraError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expression()?;
                if self.peek() != Some(b')') {
                    return Err(self.syntax("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let r = self.rational()?;
                Ok(Polynomial::constant(self.vars, r.into()))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                let name = self.identifier();
                if name == "i" {
                    return Ok(Polynomial::constant(self.vars, GaussianRational::i()));
                }
                let j = self.vars.index_of(&name).ok_or(AlgebraError::UnknownIdentifier {
                    name: name.clone(),
                    position: start,
                })?;
                let mut exp = 1;
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    self.skip_ws();
                    exp = self
                        .uint()?
                        .try_into()
                        .map_err(|_| self.syntax("exponent too large"))?;
                }
                let mut e = ExponentVector::zero(self.vars.len());
                e.0[j] = exp;
                Ok(Polynomial::monomial(self.vars, e, GaussianRational::one()))
            }
            Some(_) => Err(self.syntax("expected a number, variable, 'i' or '('")),
            None => Err(self.syntax("unexpected end of input")),
        }
    }

    fn identifier(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn uint(&mut self) -> Result<BigInt, AlgebraError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.syntax("expected an unsigned integer"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(digits.parse().expect("digits parse"))
    }

    fn rational(&mut self) -> Result<Rational, AlgebraError> {
        let n = self.uint()?;
        if self.peek() != Some(b'/') {
            return Ok(Rational::from_integer(n));
        }
        self.pos += 1;
        self.skip_ws();
        let at = self.pos;
        let d = self.uint()?;
        if d.is_zero() {
            return Err(AlgebraError::ZeroDenominator { position: at });
        }
        Ok(Rational::new(n, d))
    }
}
