//! Recursive-descent parser for kernel descriptors.
//!
//! ```text
//! spec    := "product(" spec "," spec ")"
//!          | "lincomb(" term ("+" term)* ")"
//!          | name [":" param ("," param)*]
//! term    := float "*" spec
//! name    := riesz-geodesic | riesz-chordal | log-geodesic | log-chordal
//!          | gauss-geodesic | gauss-chordal | cospow | jacobi
//! ```

use super::{Kernel, Metric};
use crate::error::{Error, Result};

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

/// Summary of accepted kernel descriptors, for error messages.
pub const GRAMMAR: &str = "riesz-geodesic:s=<float>, riesz-chordal:s=<float>, log-geodesic, log-chordal, \
gauss-geodesic:lambda=<float>, gauss-chordal:lambda=<float>, cospow:n=<int>, jacobi:n=<int>, \
product(<spec>,<spec>) or lincomb(<float>*<spec>[+<float>*<spec>]...)";

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn err(&self, expected: &str) -> Error {
        let tok: String = self.rest().chars().take(16).collect();
        Error::Parse {
            pos: self.pos,
            token: if tok.is_empty() { "<end>".into() } else { tok },
            expected: expected.into(),
        }
    }

    fn eat(&mut self, s: &str) -> bool {
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
            Err(self.err(&format!("'{s}'")))
        }
    }

    fn float(&mut self) -> Result<f64> {
        let bytes = self.rest().as_bytes();
        let mut i = 0;
        if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            i += 1;
        }
        let mut digits = 0;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
            digits += 1;
        }
        if i < bytes.len() && bytes[i] == b'.' {
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
                digits += 1;
            }
        }
        if digits == 0 {
            return Err(self.err("a number"));
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            let start = j;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if j > start {
                i = j;
            }
        }
        let text = &self.rest()[..i];
        let v: f64 = text.parse().map_err(|_| self.err("a number"))?;
        if !v.is_finite() {
            return Err(self.err("a finite number"));
        }
        self.pos += i;
        Ok(v)
    }

    fn integer(&mut self) -> Result<usize> {
        let bytes = self.rest().as_bytes();
        let len = bytes.iter().take_while(|b| b.is_ascii_digit()).count();
        if len == 0 {
            return Err(self.err("a non-negative integer"));
        }
        let v = self.rest()[..len].parse().map_err(|_| self.err("a non-negative integer"))?;
        self.pos += len;
        Ok(v)
    }

    fn named_float(&mut self, key: &str) -> Result<f64> {
        self.expect(":")?;
        self.expect(key)?;
        self.expect("=")?;
        self.float()
    }

    fn spec(&mut self) -> Result<Kernel> {
        if self.eat("product(") {
            let a = self.spec()?;
            self.expect(",")?;
            let b = self.spec()?;
            self.expect(")")?;
            return Ok(Kernel::product(a, b));
        }
        if self.eat("lincomb(") {
            let mut terms = Vec::new();
            loop {
                let c = self.float()?;
                self.expect("*")?;
                let k = self.spec()?;
                terms.push((c, k));
                if self.eat(")") {
                    break;
                }
                if !self.eat("+") {
                    return Err(self.err("'+' or ')'"));
                }
            }
            return Ok(Kernel::linear_combination(terms));
        }
        for (prefix, metric) in [("riesz-geodesic", Metric::Geodesic), ("riesz-chordal", Metric::Chordal)] {
            if self.eat(prefix) {
                let s = self.named_float("s")?;
                return Ok(Kernel::riesz(metric, s));
            }
        }
        for (prefix, metric) in [("log-geodesic", Metric::Geodesic), ("log-chordal", Metric::Chordal)] {
            if self.eat(prefix) {
                return Ok(Kernel::Log { metric });
            }
        }
        for (prefix, metric) in [("gauss-geodesic", Metric::Geodesic), ("gauss-chordal", Metric::Chordal)] {
            if self.eat(prefix) {
                let start = self.pos;
                let lambda = self.named_float("lambda")?;
                return Kernel::gaussian(metric, lambda).map_err(|_| Error::Parse {
                    pos: start,
                    token: lambda.to_string(),
                    expected: "lambda > 0".into(),
                });
            }
        }
        if self.eat("cospow") {
            self.expect(":")?;
            self.expect("n")?;
            self.expect("=")?;
            return Ok(Kernel::cos_power(self.integer()?));
        }
        if self.eat("jacobi") {
            self.expect(":")?;
            self.expect("n")?;
            self.expect("=")?;
            let n = self.integer()?;
            if self.eat(",alpha=") {
                let a = self.float()?;
                self.expect(",beta=")?;
                let b = self.float()?;
                if !(a > -1.0 && b > -1.0) {
                    return Err(self.err("Jacobi parameters above -1"));
                }
                return Ok(Kernel::jacobi_unit(n, Some((a, b))));
            }
            return Ok(Kernel::jacobi_unit(n, None));
        }
        Err(self.err(GRAMMAR))
    }
}

pub fn parse_kernel(text: &str) -> Result<Kernel> {
    let mut p = Parser { src: text.trim(), pos: 0 };
    let k = p.spec()?;
    if p.pos != p.src.len() {
        return Err(p.err("end of descriptor"));
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for s in [
            "riesz-geodesic:s=0.5",
            "riesz-chordal:s=-2",
            "log-geodesic",
            "log-chordal",
            "gauss-geodesic:lambda=1.5",
            "gauss-chordal:lambda=0.001",
            "cospow:n=3",
            "jacobi:n=2",
            "jacobi:n=2,alpha=1,beta=-0.5",
            "product(riesz-chordal:s=1,cospow:n=2)",
            "lincomb(2*jacobi:n=0+-3.5*product(log-chordal,cospow:n=1))",
        ] {
            let k = parse_kernel(s).unwrap();
            assert_eq!(k.to_string(), s);
        }
    }

    #[test]
    fn exponent_forms_and_zero() {
        let k = parse_kernel("riesz-geodesic:s=1e-1").unwrap();
        assert_eq!(k.to_string(), "riesz-geodesic:s=0.1");
        let k = parse_kernel("lincomb(1e+0*cospow:n=1+2*cospow:n=0)").unwrap();
        assert_eq!(k.to_string(), "lincomb(1*cospow:n=1+2*cospow:n=0)");
        assert_eq!(parse_kernel("riesz-chordal:s=0").unwrap().to_string(), "log-chordal");
    }

    #[test]
    fn errors_report_position() {
        match parse_kernel("riesz-geodesic:t=1") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 15),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_kernel("cospow:n=-1").is_err());
        assert!(parse_kernel("gauss-chordal:lambda=-1").is_err());
        assert!(parse_kernel("product(log-chordal)").is_err());
        assert!(parse_kernel("foo").is_err());
        assert!(parse_kernel("log-chordal junk").is_err());
    }
}
