//! A small parser for polynomial expressions such as `q1*q2 - 1/2*i*q3^2`.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('+' | '-') unary | power
//! power   := atom ('^' integer)?
//! atom    := integer | 'i' | 'q' integer | '(' expr ')'
//! ```
//!
//! Division is allowed only by nonzero constants.

use crate::algebra::{BasePolynomial, GaussianRational};
use crate::error::{Error, Result};

/// Parses an expression in the variables `q1 … q{nvars}`.
pub fn parse_polynomial(src: &str, nvars: usize) -> Result<BasePolynomial> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, nvars };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.fail("unexpected trailing input");
    }
    Ok(out)
}

/// Parses a constant such as `3`, `-1/2`, `1/2+3/4*i`.
pub fn parse_scalar(src: &str) -> Result<GaussianRational> {
    let p = parse_polynomial(src, 0)?;
    Ok(p.as_constant().expect("no variables in a 0-variable polynomial"))
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    nvars: usize,
}

impl Parser<'_> {
    fn fail<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse { pos: self.pos, msg: msg.to_string() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn integer(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.fail("expected an integer");
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        text.parse().or_else(|_| {
            self.pos = start;
            self.fail("integer too large")
        })
    }

    fn expr(&mut self) -> Result<BasePolynomial> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<BasePolynomial> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.unary()?;
                    let inv = match d.as_constant().and_then(|c| c.inv()) {
                        Some(inv) => inv,
                        None => {
                            self.pos = at;
                            return self.fail("division only by nonzero constants");
                        }
                    };
                    acc = acc.scale(&inv);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<BasePolynomial> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-&self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<BasePolynomial> {
        let base = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        let n = self.integer()?;
        if n > 1000 {
            return self.fail("exponent too large");
        }
        let mut out = BasePolynomial::one(self.nvars);
        for _ in 0..n {
            out = &out * &base;
        }
        Ok(out)
    }

    fn atom(&mut self) -> Result<BasePolynomial> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.fail("expected ')'");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                let n = i64::try_from(n).or_else(|_| self.fail("integer too large"))?;
                Ok(BasePolynomial::constant(self.nvars, GaussianRational::from_int(n)))
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(BasePolynomial::constant(self.nvars, GaussianRational::i()))
            }
            Some(b'q') => {
                let at = self.pos;
                self.pos += 1;
                if !self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                    return self.fail("expected a variable index after 'q'");
                }
                let k = self.integer()? as usize;
                if k == 0 || k > self.nvars {
                    self.pos = at;
                    return self.fail(&format!("variable q{k} outside q1..q{}", self.nvars));
                }
                Ok(BasePolynomial::var(self.nvars, k - 1).expect("index checked"))
            }
            Some(_) => self.fail("unexpected character"),
            None => self.fail("unexpected end of input"),
        }
    }
}
