//! Text format for polynomial systems.
//!
//! One polynomial per line. Expressions use `+ - * / ^` and parentheses,
//! decimal numbers (with optional exponent), the imaginary unit `i` (alone or
//! as a suffix such as `2.5i`) and the variable names supplied by the caller.
//! Division is only allowed by constants and exponents must be non-negative
//! integers. Blank lines and lines starting with `#` are skipped.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Monomial, Poly, PolySystem, C64};

/// Parses one polynomial per non-blank line.
pub fn parse_system(text: &str, variable_names: &[String]) -> Result<PolySystem> {
    let mut polys = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        polys.push(parse_line(line, idx + 1, variable_names)?);
    }
    PolySystem::new(variable_names.len(), polys)
}

/// Parses a single polynomial expression.
pub fn parse_poly(text: &str, variable_names: &[String]) -> Result<Poly> {
    parse_line(text, 1, variable_names)
}

/// Parses a complex constant such as `1.5`, `-2i`, `0.3-1e-4i` or `(1+2i)`.
pub fn parse_complex(text: &str) -> Result<C64> {
    let p = parse_line(text, 1, &[])?;
    Ok(p.coeff(&Monomial::one(0)))
}

fn parse_line(line: &str, line_no: usize, vars: &[String]) -> Result<Poly> {
    let mut parser = Parser {
        chars: line.chars().collect(),
        pos: 0,
        line: line_no,
        vars,
    };
    let p = parser.expr()?;
    parser.skip_ws();
    if parser.pos < parser.chars.len() {
        return Err(parser.error(format!("unexpected '{}'", parser.chars[parser.pos])));
    }
    Ok(p)
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    vars: &'a [String],
}

impl Parser<'_> {
    fn n(&self) -> usize {
        self.vars.len()
    }

    fn error(&self, message: String) -> Error {
        Error::Syntax {
            line: self.line,
            column: self.pos + 1,
            message,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    // expr := ['+'|'-'] term (('+'|'-') term)*
    fn expr(&mut self) -> Result<Poly> {
        let mut acc = match self.peek() {
            Some('-') => {
                self.pos += 1;
                -&self.term()?
            }
            Some('+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some('-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    // term := factor (('*'|'/') factor)*
    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = &acc * &self.factor()?;
                }
                Some('/') => {
                    self.pos += 1;
                    let start = self.pos;
                    let d = self.factor()?;
                    let c = constant_value(&d).ok_or_else(|| Error::Syntax {
                        line: self.line,
                        column: start + 1,
                        message: "division by a non-constant".into(),
                    })?;
                    if c == C64::default() {
                        return Err(Error::Syntax {
                            line: self.line,
                            column: start + 1,
                            message: "division by zero".into(),
                        });
                    }
                    acc = acc.scale(c.inv());
                }
                _ => return Ok(acc),
            }
        }
    }

    // factor := atom ['^' integer]
    fn factor(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.error("expected a non-negative integer exponent".into()));
            }
            let digits: String = self.chars[start..self.pos].iter().collect();
            let e: u32 = digits
                .parse()
                .map_err(|_| self.error(format!("exponent '{digits}' out of range")))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    // atom := number ['i'] | 'i' | variable | '(' expr ')' | '-' atom
    fn atom(&mut self) -> Result<Poly> {
        match self.peek() {
            None => Err(self.error("unexpected end of input".into())),
            Some('(') => {
                self.pos += 1;
                let p = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected ')'".into()));
                }
                self.pos += 1;
                Ok(p)
            }
            Some('-') => {
                self.pos += 1;
                Ok(-&self.factor()?)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_alphabetic() || c == '_' => {
                let start = self.pos;
                let name = self.identifier();
                if let Some(j) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Poly::var(self.n(), j));
                }
                if name == "i" {
                    return Ok(Poly::constant(self.n(), C64::new(0.0, 1.0)));
                }
                Err(Error::UnknownVariable {
                    name,
                    line: self.line,
                    column: start + 1,
                })
            }
            Some(c) => Err(self.error(format!("unexpected '{c}'"))),
        }
    }

    fn identifier(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.chars.len()
            && (self.chars[self.pos].is_alphanumeric() || self.chars[self.pos] == '_')
        {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn number(&mut self) -> Result<Poly> {
        let start = self.pos;
        let len = self.chars.len();
        let digits = |p: &mut usize, chars: &[char]| {
            let s = *p;
            while *p < chars.len() && chars[*p].is_ascii_digit() {
                *p += 1;
            }
            *p - s
        };
        let mut count = digits(&mut self.pos, &self.chars);
        if self.pos < len && self.chars[self.pos] == '.' {
            self.pos += 1;
            count += digits(&mut self.pos, &self.chars);
        }
        if count == 0 {
            return Err(self.error("malformed number".into()));
        }
        if self.pos < len && (self.chars[self.pos] == 'e' || self.chars[self.pos] == 'E') {
            let mut p = self.pos + 1;
            if p < len && (self.chars[p] == '+' || self.chars[p] == '-') {
                p += 1;
            }
            if digits(&mut p, &self.chars) > 0 {
                self.pos = p;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        let value: f64 = text.parse().map_err(|_| Error::Syntax {
            line: self.line,
            column: start + 1,
            message: format!("malformed number '{text}'"),
        })?;
        // imaginary suffix: `2i` but not `2in`
        if self.pos < len && self.chars[self.pos] == 'i' {
            let next = self.chars.get(self.pos + 1);
            if !next.is_some_and(|c| c.is_alphanumeric() || *c == '_') {
                self.pos += 1;
                return Ok(Poly::constant(self.n(), C64::new(0.0, value)));
            }
        }
        Ok(Poly::constant(self.n(), C64::new(value, 0.0)))
    }
}

fn constant_value(p: &Poly) -> Option<C64> {
    if p.is_zero() {
        return Some(C64::default());
    }
    if p.degree() == 0 {
        return Some(p.coeff(&Monomial::one(p.num_vars())));
    }
    None
}

/// Formats a complex number so that [`parse_complex`] reads it back exactly.
pub fn format_complex(c: C64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else if c.im < 0.0 {
        format!("{}-{}i", c.re, -c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

/// Prints `p` highest degree first. Real coefficients print as plain
/// decimals, complex ones as `(a+bi)`. Shortest round-trip float formatting
/// makes `parse_poly(format_poly(p)) == p`.
pub fn format_poly(p: &Poly, names: &[String]) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut terms: Vec<_> = p.terms().collect();
    terms.sort_by_key(|(m, _)| std::cmp::Reverse(m.degree()));
    let mut out = String::new();
    for (k, (m, &c)) in terms.into_iter().enumerate() {
        let mono: Vec<String> = m
            .exponents()
            .iter()
            .zip(names)
            .filter(|(e, _)| **e > 0)
            .map(|(&e, name)| {
                if e == 1 {
                    name.clone()
                } else {
                    format!("{name}^{e}")
                }
            })
            .collect();
        let mono = mono.join("*");
        let (negative, coeff) = if c.im == 0.0 {
            let neg = c.re.is_sign_negative();
            let a = c.re.abs();
            let text = if a == 1.0 && !mono.is_empty() {
                String::new()
            } else {
                format!("{a}")
            };
            (neg, text)
        } else {
            (false, format!("({})", format_complex(c)))
        };
        if k == 0 {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        out.push_str(&coeff);
        if !coeff.is_empty() && !mono.is_empty() {
            out.push('*');
        }
        out.push_str(&mono);
    }
    out
}

/// One polynomial per line.
pub fn format_system(sys: &PolySystem, names: &[String]) -> String {
    sys.polys()
        .iter()
        .map(|p| format_poly(p, names))
        .collect::<Vec<_>>()
        .join("\n")
}

/// JSON system file: `{"vars": ["x", "y"], "polys": ["x^2 - y", "y^2"]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SystemFile {
    pub vars: Vec<String>,
    pub polys: Vec<String>,
}

impl SystemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::SystemFile(e.to_string()))
    }

    pub fn to_system(&self) -> Result<PolySystem> {
        let polys = self
            .polys
            .iter()
            .enumerate()
            .map(|(k, s)| parse_line(s, k + 1, &self.vars))
            .collect::<Result<Vec<_>>>()?;
        PolySystem::new(self.vars.len(), polys)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn first_line_of_running_example_has_five_terms() {
        let p = parse_poly("x1^2 - x1 + x2 + x3 - 2", &names(&["x1", "x2", "x3"])).unwrap();
        assert_eq!(p.len(), 5);
        assert_eq!(p.coeff(&Monomial::new(vec![2, 0, 0])), C64::new(1.0, 0.0));
        assert_eq!(p.coeff(&Monomial::new(vec![0, 0, 0])), C64::new(-2.0, 0.0));
    }

    #[test]
    fn zero_parses_to_empty_poly() {
        let p = parse_poly("0", &names(&["x"])).unwrap();
        assert!(p.is_zero());
        assert_eq!(format_poly(&p, &names(&["x"])), "0");
    }

    #[test]
    fn complex_coefficients() {
        let v = names(&["x", "y"]);
        let p = parse_poly("(1.5-2i)*x^2*y + 3i*y - i", &v).unwrap();
        assert_eq!(p.coeff(&Monomial::new(vec![2, 1])), C64::new(1.5, -2.0));
        assert_eq!(p.coeff(&Monomial::new(vec![0, 1])), C64::new(0.0, 3.0));
        assert_eq!(p.coeff(&Monomial::new(vec![0, 0])), C64::new(0.0, -1.0));
    }

    #[test]
    fn exponent_notation_and_division() {
        let v = names(&["z"]);
        let p = parse_poly("z^2 + 1e-2*z - z^3/6", &v).unwrap();
        assert_eq!(p.coeff(&Monomial::new(vec![1])), C64::new(1e-2, 0.0));
        assert_eq!(p.coeff(&Monomial::new(vec![3])), C64::new(-1.0 / 6.0, 0.0));
    }

    #[test]
    fn parenthesised_products_expand() {
        let v = names(&["x", "y"]);
        let p = parse_poly("(x - y)^2", &v).unwrap();
        let q = parse_poly("x^2 - 2*x*y + y^2", &v).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn errors_carry_position() {
        let v = names(&["x", "y"]);
        match parse_system("x + y\nx + w^2", &v) {
            Err(Error::UnknownVariable { name, line, column }) => {
                assert_eq!((name.as_str(), line, column), ("w", 2, 5));
            }
            other => panic!("unexpected {other:?}"),
        }
        match parse_system("x + * y", &v) {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (1, 5)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_poly("x^y", &v).is_err());
        assert!(parse_poly("x/y", &v).is_err());
        assert!(parse_poly("(x + y", &v).is_err());
        assert!(parse_poly("", &v).is_err());
    }

    #[test]
    fn blank_and_comment_lines_are_skipped() {
        let s = parse_system("# header\nx\n\n  y  \n", &names(&["x", "y"])).unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn complex_constants() {
        assert_eq!(parse_complex("1.001").unwrap(), C64::new(1.001, 0.0));
        assert_eq!(parse_complex("0.3-1e-4i").unwrap(), C64::new(0.3, -1e-4));
        assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(parse_complex("1.9i").unwrap(), C64::new(0.0, 1.9));
        for c in [C64::new(0.1, -0.7), C64::new(-3.0, 0.0), C64::new(0.0, 2.5)] {
            assert_eq!(parse_complex(&format_complex(c)).unwrap(), c);
        }
        assert!(parse_complex("x").is_err());
    }

    #[test]
    fn printing_is_readable() {
        let v = names(&["x", "y", "z"]);
        let p = parse_poly("x^2 - x + y + z - 2", &v).unwrap();
        assert_eq!(format_poly(&p, &v), "x^2 - x + y + z - 2");
        let q = parse_poly("-x*y + (2-1i)*z", &v).unwrap();
        assert_eq!(format_poly(&q, &v), "-x*y + (2-1i)*z");
    }

    #[test]
    fn json_system_file() {
        let f = SystemFile::from_json(r#"{"vars":["x","y"],"polys":["x^2","x*y"]}"#).unwrap();
        let s = f.to_system().unwrap();
        assert_eq!((s.len(), s.num_vars()), (2, 2));
        assert!(matches!(
            SystemFile::from_json("{"),
            Err(Error::SystemFile(_))
        ));
    }
}
