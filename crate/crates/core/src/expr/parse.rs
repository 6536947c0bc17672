//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | "+" unary | power
//! power   := primary ("^" unary)?
//! primary := number | variable | function "(" expr ")" | "(" expr ")"
//! number  := digits ["." digits] [("e" | "E") ["+" | "-"] digits]
//! variable := "x" | "y" | "p" | "q"
//! function := "exp" | "ln" | "sin" | "cos"
//! ```
//!
//! `^` is right associative and binds tighter than unary minus, so `-x^2`
//! is `-(x^2)`. A constant exponent becomes an integer power when it is
//! integer valued and a real power otherwise; a non-constant exponent `a^b`
//! is rewritten as `exp(b * ln(a))`.

use super::{ScalarField, Var};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at position {position}")]
    UnknownIdentifier { position: usize, name: String },
}

pub fn parse(text: &str) -> Result<ScalarField, ParseError> {
    let mut parser = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let expr = parser.expr()?;
    parser.skip_ws();
    if parser.pos < parser.src.len() {
        return Err(parser.syntax(format!(
            "unexpected `{}`",
            parser.src[parser.pos] as char
        )));
    }
    Ok(expr)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn syntax(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            position: self.pos,
            message: message.into(),
        }
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

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            match self.peek() {
                Some(found) => Err(self.syntax(format!(
                    "expected `{}`, found `{}`",
                    c as char, found as char
                ))),
                None => Err(self.syntax(format!("expected `{}`, found end of input", c as char))),
            }
        }
    }

    fn expr(&mut self) -> Result<ScalarField, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<ScalarField, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.unary()?);
            } else if self.eat(b'/') {
                acc = acc.div(&self.unary()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<ScalarField, ParseError> {
        if self.eat(b'-') {
            Ok(self.unary()?.neg())
        } else if self.eat(b'+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<ScalarField, ParseError> {
        let base = self.primary()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let exponent = self.unary()?;
        Ok(match exponent.as_constant() {
            Some(r) => base.powf(r),
            None => exponent.mul(&base.ln()).exp(),
        })
    }

    fn primary(&mut self) -> Result<ScalarField, ParseError> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(c) => Err(self.syntax(format!("unexpected `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<ScalarField, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut count = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            self.pos = start;
            return Err(self.syntax("malformed number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = mark;
                return Err(self.syntax("malformed exponent"));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
            position: start,
            message: format!("malformed number `{text}`"),
        })?;
        if !value.is_finite() {
            return Err(ParseError::Syntax {
                position: start,
                message: format!("number `{text}` out of range"),
            });
        }
        Ok(ScalarField::constant(value))
    }

    fn identifier(&mut self) -> Result<ScalarField, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        if let Some(v) = Var::from_name(name) {
            return Ok(ScalarField::var(v));
        }
        let func: fn(&ScalarField) -> ScalarField = match name {
            "exp" => ScalarField::exp,
            "ln" => ScalarField::ln,
            "sin" => ScalarField::sin,
            "cos" => ScalarField::cos,
            _ => {
                return Err(ParseError::UnknownIdentifier {
                    position: start,
                    name: name.to_string(),
                })
            }
        };
        self.expect(b'(')?;
        let arg = self.expr()?;
        self.expect(b')')?;
        Ok(func(&arg))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Point4;

    fn ones() -> Point4 {
        Point4::new(1.0, 1.0, 1.0, 1.0)
    }

    #[test]
    fn parses_examples() {
        assert_eq!(parse("x*p + y*q").unwrap().eval(&ones()).unwrap(), 2.0);
        let f = parse("1/(1+x)^2").unwrap();
        assert_eq!(f.eval(&Point4::new(1.0, 0.0, 0.0, 0.0)).unwrap(), 0.25);
        let g = parse("exp(x*p)").unwrap();
        assert_eq!(g.eval(&Point4::new(0.0, 9.0, 5.0, 9.0)).unwrap(), 1.0);
    }

    #[test]
    fn precedence_and_associativity() {
        let pt = Point4::new(2.0, 3.0, 0.0, 0.0);
        assert_eq!(parse("-x^2").unwrap().eval(&pt).unwrap(), -4.0);
        assert_eq!(parse("2^3^2").unwrap().eval(&pt).unwrap(), 512.0);
        assert_eq!(parse("x - y - 1").unwrap().eval(&pt).unwrap(), -2.0);
        assert_eq!(parse("x / y * 3").unwrap().eval(&pt).unwrap(), 2.0);
        assert_eq!(parse("1.5e1 + .5").unwrap().eval(&pt).unwrap(), 15.5);
    }

    #[test]
    fn variable_exponent_goes_through_exp_ln() {
        let f = parse("x^y").unwrap();
        let v = f.eval(&Point4::new(2.0, 3.0, 0.0, 0.0)).unwrap();
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn reports_unknown_identifier() {
        let err = parse("x + z").unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownIdentifier {
                position: 4,
                name: "z".into()
            }
        );
        assert!(matches!(
            parse("tan(x)"),
            Err(ParseError::UnknownIdentifier { position: 0, .. })
        ));
    }

    #[test]
    fn reports_syntax_positions() {
        assert!(matches!(
            parse("x + * y"),
            Err(ParseError::Syntax { position: 4, .. })
        ));
        assert!(matches!(
            parse("(x + y"),
            Err(ParseError::Syntax { position: 6, .. })
        ));
        assert!(matches!(
            parse("x y"),
            Err(ParseError::Syntax { position: 2, .. })
        ));
        assert!(matches!(parse(""), Err(ParseError::Syntax { position: 0, .. })));
        assert!(matches!(parse("1e"), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn printed_form_reparses() {
        for src in [
            "x*p + y*q",
            "(1+x)^(-2)",
            "-3*sin(x)^2 + cos(p*q)/ln(2+y^2)",
            "x^0.5 * exp(-x) - 1e-3",
        ] {
            let f = parse(src).unwrap();
            let g = parse(&f.to_string()).unwrap();
            let pt = Point4::new(0.7, -0.3, 1.1, 0.4);
            assert_eq!(f.eval(&pt).unwrap(), g.eval(&pt).unwrap(), "{src}");
        }
    }
}
