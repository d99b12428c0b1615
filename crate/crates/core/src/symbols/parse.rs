//! Recursive-descent parser for symbol specs.
//!
//! ```text
//! spec    := "id" | "const:" num "," num | "dilate:" num ["," num]
//!          | "rotate:" num | "mobius:" num "," num | "power:" int
//!          | "poly:" coef ("," coef)* | "blaschke:" num "," num (";" num "," num)*
//!          | "compose(" spec "," spec ")"
//! coef    := num | "(" num "," num ")"
//! ```

use num_complex::Complex64;

use super::HoloMap;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_DEPTH: usize = 32;

pub fn parse_symbol_spec(text: &str) -> Result<HoloMap> {
    parse_symbol_spec_with_depth(text, DEFAULT_MAX_DEPTH)
}

/// Parses with an explicit bound on `compose(...)` nesting.
pub fn parse_symbol_spec_with_depth(text: &str, max_depth: usize) -> Result<HoloMap> {
    let mut p = Parser {
        src: text,
        pos: 0,
        max_depth,
    };
    let map = p.spec(0)?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.error_here("unexpected trailing input"));
    }
    Ok(map)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    max_depth: usize,
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let rest = self.rest();
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn error_here(&self, message: &str) -> Error {
        let token: String = self
            .rest()
            .chars()
            .take_while(|c| !matches!(c, ',' | ';' | ')' | '('))
            .collect();
        let token = if token.is_empty() {
            self.rest()
                .chars()
                .next()
                .map(String::from)
                .unwrap_or_else(|| "<end>".into())
        } else {
            token
        };
        Error::parse(self.pos, token, message)
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.error_here(&format!("expected `{s}`")))
        }
    }

    fn ident(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let len = rest
            .find(|c: char| !c.is_ascii_alphabetic())
            .unwrap_or(rest.len());
        if len == 0 {
            return Err(self.error_here("expected a symbol name"));
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    fn peek_number(&mut self) -> bool {
        self.skip_ws();
        self.rest()
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_digit() || matches!(c, '-' | '+' | '.'))
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let rest = self.rest();
        let bytes = rest.as_bytes();
        let mut i = 0;
        if i < bytes.len() && matches!(bytes[i], b'+' | b'-') {
            i += 1;
        }
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
            i += 1;
        }
        if i < bytes.len() && matches!(bytes[i], b'e' | b'E') {
            let mut k = i + 1;
            if k < bytes.len() && matches!(bytes[k], b'+' | b'-') {
                k += 1;
            }
            if k < bytes.len() && bytes[k].is_ascii_digit() {
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                i = k;
            }
        }
        let tok = &rest[..i];
        match tok.parse::<f64>() {
            Ok(v) if v.is_finite() => {
                self.pos += i;
                Ok(v)
            }
            _ => Err(Error::parse(
                start,
                if tok.is_empty() {
                    self.error_token()
                } else {
                    tok.to_string()
                },
                "expected a real number",
            )),
        }
    }

    fn error_token(&self) -> String {
        self.rest()
            .chars()
            .next()
            .map(String::from)
            .unwrap_or_else(|| "<end>".into())
    }

    fn pair(&mut self) -> Result<Complex64> {
        let re = self.number()?;
        self.expect(",")?;
        let im = self.number()?;
        Ok(Complex64::new(re, im))
    }

    /// Wraps a constructor's domain error with the position of the node.
    fn build(&self, at: usize, r: Result<HoloMap>) -> Result<HoloMap> {
        r.map_err(|e| match e {
            Error::Domain(m) => Error::Domain(format!("{m} (at position {at})")),
            other => other,
        })
    }

    fn spec(&mut self, depth: usize) -> Result<HoloMap> {
        self.skip_ws();
        let at = self.pos;
        let name = self.ident()?;
        match name {
            "id" => Ok(HoloMap::Identity),
            "compose" => {
                if depth >= self.max_depth {
                    return Err(Error::parse(
                        at,
                        name,
                        format!("compose nesting exceeds {}", self.max_depth),
                    ));
                }
                self.expect("(")?;
                let outer = self.spec(depth + 1)?;
                self.expect(",")?;
                let inner = self.spec(depth + 1)?;
                self.expect(")")?;
                Ok(HoloMap::compose(outer, inner))
            }
            "const" | "dilate" | "rotate" | "mobius" | "power" | "poly" | "blaschke" => {
                self.expect(":")?;
                match name {
                    "const" => {
                        let c = self.pair()?;
                        self.build(at, HoloMap::constant(c))
                    }
                    "dilate" => {
                        let re = self.number()?;
                        let save = self.pos;
                        let im = if self.eat(",") && self.peek_number() {
                            self.number()?
                        } else {
                            self.pos = save;
                            0.0
                        };
                        self.build(at, HoloMap::dilate(Complex64::new(re, im)))
                    }
                    "rotate" => {
                        let angle = self.number()?;
                        self.build(at, HoloMap::rotate(angle))
                    }
                    "mobius" => {
                        let a = self.pair()?;
                        self.build(at, HoloMap::mobius(a))
                    }
                    "power" => {
                        self.skip_ws();
                        let num_at = self.pos;
                        let v = self.number()?;
                        if v.fract() != 0.0 || v < 1.0 || v > u32::MAX as f64 {
                            return Err(Error::parse(
                                num_at,
                                format!("{v}"),
                                "power needs a positive integer",
                            ));
                        }
                        self.build(at, HoloMap::power(v as u32))
                    }
                    "poly" => {
                        let mut coefs = vec![self.coefficient()?];
                        loop {
                            let save = self.pos;
                            if self.eat(",") && (self.peek_number() || self.rest().starts_with('('))
                            {
                                coefs.push(self.coefficient()?);
                            } else {
                                self.pos = save;
                                break;
                            }
                        }
                        self.build(at, HoloMap::poly(coefs))
                    }
                    _ => {
                        let mut zeros = vec![self.pair()?];
                        while self.eat(";") {
                            zeros.push(self.pair()?);
                        }
                        self.build(at, HoloMap::blaschke(zeros))
                    }
                }
            }
            other => Err(Error::parse(at, other, "unknown symbol kind")),
        }
    }

    fn coefficient(&mut self) -> Result<Complex64> {
        if self.eat("(") {
            let c = self.pair()?;
            self.expect(")")?;
            Ok(c)
        } else {
            Ok(Complex64::new(self.number()?, 0.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grammar_examples() {
        assert_eq!(parse_symbol_spec("id").unwrap(), HoloMap::Identity);
        assert_eq!(
            parse_symbol_spec("dilate:0.5").unwrap(),
            HoloMap::Dilate { a: c(0.5, 0.0) }
        );
        let comp = parse_symbol_spec("compose(power:2,mobius:0.3,0.0)").unwrap();
        assert_eq!(
            comp,
            HoloMap::compose(HoloMap::Power { n: 2 }, HoloMap::Mobius { a: c(0.3, 0.0) })
        );
        let z = c(0.2, 0.1);
        let m = (c(0.3, 0.0) - z) / (c(1.0, 0.0) - c(0.3, 0.0) * z);
        assert!((comp.eval(z).unwrap() - m * m).norm() < 1e-15);
    }

    #[test]
    fn lists_and_nesting() {
        let p = parse_symbol_spec("poly:0.6,0.6").unwrap();
        assert_eq!(
            p,
            HoloMap::Poly {
                coefficients: vec![c(0.6, 0.0), c(0.6, 0.0)]
            }
        );
        assert!(p.needs_validation());
        let b = parse_symbol_spec("blaschke:0.5,0;-0.5,0").unwrap();
        assert_eq!(
            b,
            HoloMap::Blaschke {
                zeros: vec![c(0.5, 0.0), c(-0.5, 0.0)]
            }
        );
        assert!(!b.needs_validation());
        let nested = parse_symbol_spec(
            " compose( poly:0.1,(0.2,0.3), compose(rotate:1.5, const:0.1,-0.2) ) ",
        )
        .unwrap();
        assert_eq!(nested.depth(), 2);
        assert!(nested.needs_validation());
        assert_eq!(
            parse_symbol_spec("dilate:0,0.5").unwrap(),
            HoloMap::Dilate { a: c(0.0, 0.5) }
        );
        assert_eq!(
            parse_symbol_spec("compose(dilate:0.5,id)").unwrap(),
            HoloMap::compose(HoloMap::Dilate { a: c(0.5, 0.0) }, HoloMap::Identity)
        );
    }

    #[test]
    fn errors_carry_position() {
        match parse_symbol_spec("compose(power:2,,id)") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 16),
            other => panic!("{other:?}"),
        }
        match parse_symbol_spec("spiral:1") {
            Err(Error::Parse {
                position, token, ..
            }) => {
                assert_eq!(position, 0);
                assert_eq!(token, "spiral");
            }
            other => panic!("{other:?}"),
        }
        match parse_symbol_spec("power:2.5") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 6),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_symbol_spec("id extra"),
            Err(Error::Parse { position: 3, .. })
        ));
        assert!(matches!(
            parse_symbol_spec("mobius:0.3"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn modulus_violations_are_domain_errors() {
        assert!(matches!(
            parse_symbol_spec("mobius:1,0"),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            parse_symbol_spec("const:0.9,0.9"),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            parse_symbol_spec("compose(id,blaschke:0.2,0;1.2,0)"),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn depth_bound() {
        let mut s = String::from("id");
        for _ in 0..5 {
            s = format!("compose(id,{s})");
        }
        assert!(parse_symbol_spec_with_depth(&s, 5).is_ok());
        assert!(matches!(
            parse_symbol_spec_with_depth(&s, 4),
            Err(Error::Parse { .. })
        ));
    }
}
