//! The weight-expression language.
//!
//! ```text
//! expr := gevrey(a) | idpow(a) | assoc(<file>) | lower(expr, expr)
//!       | upper(expr, expr) | pow(expr, a) | inv(expr)
//! ```
//!
//! `a` is a positive decimal literal. Whitespace between tokens is ignored; names are
//! lowercase and case-sensitive.

use std::fmt;
use std::path::{Path, PathBuf};

use weightlab::conjugate::{lower_fn, upper_fn};
use weightlab::seqcore::gevrey;
use weightlab::{ConjOptions, Error, WeightFunction, WeightSequence};

#[derive(Clone, Debug, PartialEq)]
pub enum WeightExpr {
    Gevrey(f64),
    IdPow(f64),
    Assoc(String),
    Lower(Box<WeightExpr>, Box<WeightExpr>),
    Upper(Box<WeightExpr>, Box<WeightExpr>),
    Pow(Box<WeightExpr>, f64),
    Inv(Box<WeightExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnknownFunction,
    NonPositive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the input.
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: {}", self.offset, self.message)
    }
}

impl std::error::Error for ParseError {}

const NAMES: [&str; 7] = ["gevrey", "idpow", "assoc", "lower", "upper", "pow", "inv"];

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, kind: ParseErrorKind, offset: usize, message: impl Into<String>) -> ParseError {
        ParseError { kind, offset, message: message.into() }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(x) if x == c => {
                self.pos += c.len_utf8();
                Ok(())
            }
            Some(x) => Err(self.err(ParseErrorKind::Syntax, self.pos, format!("expected '{c}', found '{x}'"))),
            None => Err(self.err(ParseErrorKind::Syntax, self.pos, format!("expected '{c}', found end of input"))),
        }
    }

    fn ident(&mut self) -> Result<(&'a str, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let len = self.src[start..].find(|c: char| !c.is_ascii_alphanumeric() && c != '_').unwrap_or(self.src.len() - start);
        if len == 0 {
            return Err(match self.peek() {
                Some(c) => self.err(ParseErrorKind::Syntax, start, format!("expected a function name, found '{c}'")),
                None => self.err(ParseErrorKind::Syntax, start, "expected a function name, found end of input"),
            });
        }
        self.pos += len;
        Ok((&self.src[start..start + len], start))
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut end = start;
        if end < bytes.len() && (bytes[end] == b'-' || bytes[end] == b'+') {
            end += 1;
        }
        let digits_from = end;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut k = end + 1;
            if k < bytes.len() && (bytes[k] == b'-' || bytes[k] == b'+') {
                k += 1;
            }
            if k < bytes.len() && bytes[k].is_ascii_digit() {
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                end = k;
            }
        }
        let text = &self.src[start..end];
        if end == digits_from {
            return Err(self.err(ParseErrorKind::Syntax, start, "expected a positive decimal literal"));
        }
        let value: f64 = text
            .parse()
            .map_err(|_| self.err(ParseErrorKind::Syntax, start, format!("malformed number '{text}'")))?;
        if !(value > 0.0 && value.is_finite()) {
            return Err(self.err(ParseErrorKind::NonPositive, start, format!("literal must be positive, got {text}")));
        }
        self.pos = end;
        Ok(value)
    }

    fn path(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let len = self.src[start..].find(')').unwrap_or(self.src.len() - start);
        let p = self.src[start..start + len].trim_end();
        if p.is_empty() {
            return Err(self.err(ParseErrorKind::Syntax, start, "assoc expects a file path"));
        }
        self.pos = start + p.len();
        Ok(p.to_string())
    }

    fn expr(&mut self) -> Result<WeightExpr, ParseError> {
        let (name, at) = self.ident()?;
        if !NAMES.contains(&name) {
            return Err(self.err(ParseErrorKind::UnknownFunction, at, format!("unknown function '{name}'")));
        }
        self.expect('(')?;
        let e = match name {
            "gevrey" => WeightExpr::Gevrey(self.number()?),
            "idpow" => WeightExpr::IdPow(self.number()?),
            "assoc" => WeightExpr::Assoc(self.path()?),
            "lower" | "upper" => {
                let a = self.expr()?;
                self.expect(',')?;
                let b = self.expr()?;
                if name == "lower" {
                    WeightExpr::Lower(Box::new(a), Box::new(b))
                } else {
                    WeightExpr::Upper(Box::new(a), Box::new(b))
                }
            }
            "pow" => {
                let a = self.expr()?;
                self.expect(',')?;
                WeightExpr::Pow(Box::new(a), self.number()?)
            }
            _ => WeightExpr::Inv(Box::new(self.expr()?)),
        };
        self.expect(')')?;
        Ok(e)
    }
}

pub fn parse_expr(text: &str) -> Result<WeightExpr, ParseError> {
    let mut p = Parser { src: text, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.err(ParseErrorKind::Syntax, p.pos, "unexpected trailing input"));
    }
    Ok(e)
}

impl fmt::Display for WeightExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightExpr::Gevrey(a) => write!(f, "gevrey({a})"),
            WeightExpr::IdPow(a) => write!(f, "idpow({a})"),
            WeightExpr::Assoc(p) => write!(f, "assoc({p})"),
            WeightExpr::Lower(a, b) => write!(f, "lower({a}, {b})"),
            WeightExpr::Upper(a, b) => write!(f, "upper({a}, {b})"),
            WeightExpr::Pow(e, a) => write!(f, "pow({e}, {a})"),
            WeightExpr::Inv(e) => write!(f, "inv({e})"),
        }
    }
}

/// Prefix length behind `gevrey(α)` relative to `p_max`, so that matrix rows up to `ℓ = 8` fit.
pub const GEVREY_PREFIX: usize = 10;

/// Errors from building an expression: the library error or an unreadable file.
#[derive(Debug)]
pub enum BuildError {
    Lib(Error),
    Io(PathBuf, String),
}

impl fmt::Display for BuildError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildError::Lib(e) => write!(f, "{e}"),
            BuildError::Io(p, m) => write!(f, "{}: {m}", p.display()),
        }
    }
}

impl From<Error> for BuildError {
    fn from(e: Error) -> Self {
        BuildError::Lib(e)
    }
}

pub fn read_sequence(path: &Path) -> Result<WeightSequence, BuildError> {
    let text = std::fs::read_to_string(path).map_err(|e| BuildError::Io(path.to_path_buf(), e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| BuildError::Io(path.to_path_buf(), e.to_string()))
}

impl WeightExpr {
    /// Evaluable weight; `assoc(...)` paths are resolved against `base`.
    pub fn build(&self, p_max: usize, base: &Path) -> Result<WeightFunction, BuildError> {
        Ok(match self {
            WeightExpr::Gevrey(a) => WeightFunction::assoc(&gevrey(*a, GEVREY_PREFIX * p_max)?)?,
            WeightExpr::IdPow(a) => WeightFunction::id_power(*a)?,
            WeightExpr::Assoc(p) => WeightFunction::assoc(&read_sequence(&base.join(p))?)?,
            WeightExpr::Lower(a, b) => lower_fn(&a.build(p_max, base)?, &b.build(p_max, base)?, ConjOptions::default()),
            WeightExpr::Upper(a, b) => upper_fn(&a.build(p_max, base)?, &b.build(p_max, base)?, ConjOptions::default()),
            WeightExpr::Pow(e, a) => e.build(p_max, base)?.power_substitute(*a)?,
            WeightExpr::Inv(e) => e.build(p_max, base)?.invert(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_offsets() {
        let e = parse_expr("lower(gevrey(1), idpow(0))").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::NonPositive);
        assert_eq!(e.offset, 23);
        let e = parse_expr("pow(gevrey(1) 2)").unwrap_err();
        assert_eq!(e.offset, 14);
    }

    #[test]
    fn names_are_case_sensitive() {
        let e = parse_expr("  Gevrey(1)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownFunction);
        assert_eq!(e.offset, 2);
    }
}
