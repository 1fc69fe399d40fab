//! Expression grammar and the matching printer.
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = ("-" | "+") unary | power ;
//! power   = atom [ "^" [ "-" ] integer ] ;
//! atom    = number | identifier | "(" expr ")" ;
//! number  = digit { digit } [ "." digit { digit } ] ;
//! ```
//!
//! Decimal literals are read exactly (`0.25` is `1/4`).

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::expr::Expr;
use super::poly::{Poly, Rational};
use super::registry::VariableRegistry;
use super::ExprError;

pub fn parse(text: &str, reg: &Arc<VariableRegistry>) -> Result<Expr, ExprError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, reg };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    reg: &'a Arc<VariableRegistry>,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> ExprError {
        ExprError::Syntax { position: self.pos, message: msg.to_string() }
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

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                b'-' => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        while let Some(c) = self.peek() {
            match c {
                b'*' => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                b'/' => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.unary()?;
                    acc = acc.checked_div(&d).map_err(|_| ExprError::Syntax {
                        position: at,
                        message: "division by the zero expression".into(),
                    })?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let neg = if self.peek() == Some(b'-') {
                self.pos += 1;
                true
            } else {
                false
            };
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.error("expected integer exponent"));
            }
            let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let e: i32 = digits.parse().map_err(|_| ExprError::Syntax {
                position: start,
                message: "exponent too large".into(),
            })?;
            let e = if neg { -e } else { e };
            return base.pow(e).map_err(|_| ExprError::Syntax {
                position: start,
                message: "negative power of the zero expression".into(),
            });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let idx = self.reg.require(name)?;
                Ok(Expr::var(self.reg, idx))
            }
            Some(_) => Err(self.error("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let int_part = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
        let mut frac_part = String::new();
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            let fs = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            frac_part = std::str::from_utf8(&self.src[fs..self.pos]).unwrap().to_string();
        }
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(ExprError::Syntax { position: start, message: "malformed number".into() });
        }
        let digits = format!("{int_part}{frac_part}");
        let n: BigInt = digits.parse().map_err(|_| ExprError::Syntax {
            position: start,
            message: "malformed number".into(),
        })?;
        let d = num_traits::pow(BigInt::from(10), frac_part.len());
        Ok(Expr::constant(self.reg, Rational::new(n, d)))
    }
}

fn write_poly(f: &mut fmt::Formatter<'_>, p: &Poly, reg: &VariableRegistry) -> fmt::Result {
    if p.is_zero() {
        return write!(f, "0");
    }
    for (i, (m, c)) in p.terms().rev().enumerate() {
        let neg = c.is_negative();
        let abs = c.abs();
        match (i, neg) {
            (0, true) => write!(f, "-")?,
            (0, false) => {}
            (_, true) => write!(f, " - ")?,
            (_, false) => write!(f, " + ")?,
        }
        let mut factors: Vec<String> = Vec::new();
        if !abs.is_one() || m.is_one() {
            factors.push(if abs.denom().is_one() {
                abs.numer().to_string()
            } else {
                format!("{}/{}", abs.numer(), abs.denom())
            });
        }
        for (v, &e) in m.exps().iter().enumerate() {
            match e {
                0 => {}
                1 => factors.push(reg.name(v).to_string()),
                _ => factors.push(format!("{}^{}", reg.name(v), e)),
            }
        }
        write!(f, "{}", factors.join("*"))?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let reg = self.registry();
        if self.is_polynomial() {
            return write_poly(f, self.numer(), reg);
        }
        let wrap_num = self.numer().num_terms() > 1
            || self.numer().terms().next().is_some_and(|(_, c)| !c.denom().is_one());
        if wrap_num {
            write!(f, "(")?;
            write_poly(f, self.numer(), reg)?;
            write!(f, ")")?;
        } else {
            write_poly(f, self.numer(), reg)?;
        }
        write!(f, "/(")?;
        write_poly(f, self.denom(), reg)?;
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg() -> Arc<VariableRegistry> {
        VariableRegistry::with_names(&["x", "lambda", "dx", "p"]).unwrap()
    }

    #[test]
    fn conformal_lagrangian_parses() {
        let r = reg();
        let l = parse("(1/2)*(dx^2 - lambda*x^2)", &r).unwrap();
        assert_eq!(l.to_string(), "-1/2*x^2*lambda + 1/2*dx^2");
    }

    #[test]
    fn zero_and_trivial_quotient() {
        let r = reg();
        assert!(parse("0", &r).unwrap().is_zero());
        assert_eq!(parse("x/x", &r).unwrap(), Expr::one(&r));
    }

    #[test]
    fn errors_are_reported() {
        let r = reg();
        match parse("x + * 2", &r) {
            Err(ExprError::Syntax { position, .. }) => assert_eq!(position, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
        assert!(matches!(parse("y + 1", &r), Err(ExprError::UnknownVariable(n)) if n == "y"));
        assert!(matches!(parse("1/(x - x)", &r), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse("(x + 1", &r), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn decimals_are_exact() {
        let r = reg();
        assert_eq!(parse("0.25*x", &r).unwrap(), parse("x/4", &r).unwrap());
    }

    #[test]
    fn rational_function_prints_and_reparses() {
        let r = reg();
        let e = parse("(x^2 - 1/3)/(2*lambda*x + 3) - p^-2", &r).unwrap();
        let back = parse(&e.to_string(), &r).unwrap();
        assert_eq!(e, back);
    }
}
