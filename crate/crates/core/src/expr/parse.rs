use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::jet::{GaussianRational, Jet, Var, VarSig};

/// Exponents above this are rejected; the jets involved never need them and
/// unbounded powers of constants would exhaust memory.
pub const MAX_EXPONENT: u32 = 1024;
const MAX_DEPTH: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Z,
    Zb,
    S,
    /// Target coordinate `Z'` of a mapping.
    Zp,
    /// Conjugate target coordinate `Zb'`.
    Zbp,
}

impl VarKind {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "z" => VarKind::Z,
            "zb" => VarKind::Zb,
            "s" => VarKind::S,
            "Zp" => VarKind::Zp,
            "Zbp" => VarKind::Zbp,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            VarKind::Z => "z",
            VarKind::Zb => "zb",
            VarKind::S => "s",
            VarKind::Zp => "Zp",
            VarKind::Zbp => "Zbp",
        }
    }
}

/// Expression syntax tree. Variable indices are 1-based, as written.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Rational(BigRational),
    I,
    Var { kind: VarKind, index: usize, pos: usize },
    Neg(Box<Expr>),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Box<Expr>, u32),
    Conj(Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownVariable(String),
    IndexOutOfRange(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{kind} at position {pos}")]
pub struct ParseError {
    pub pos: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            ParseErrorKind::UnknownVariable(v) => write!(f, "unknown variable '{v}'"),
            ParseErrorKind::IndexOutOfRange(v) => write!(f, "index out of range in '{v}'"),
        }
    }
}

impl ParseError {
    fn syntax(pos: usize, msg: impl Into<String>) -> Self {
        Self { pos, kind: ParseErrorKind::Syntax(msg.into()) }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    depth: usize,
}

impl<'a> Parser<'a> {
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
            Err(ParseError::syntax(self.pos, format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError::syntax(self.pos, "nesting too deep"));
        }
        let mut terms = Vec::new();
        let negate_first = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        let first = self.term()?;
        terms.push(if negate_first { Expr::Neg(Box::new(first)) } else { first });
        loop {
            if self.eat(b'+') {
                terms.push(self.term()?);
            } else if self.eat(b'-') {
                terms.push(Expr::Neg(Box::new(self.term()?)));
            } else {
                break;
            }
        }
        self.depth -= 1;
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Sum(terms) })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.factor()?];
        while self.eat(b'*') {
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 { factors.pop().unwrap() } else { Expr::Product(factors) })
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if self.eat(b'^') {
            let pos = self.pos;
            let e = self.nat()?;
            let e: u32 = e
                .try_into()
                .ok()
                .filter(|&e| e <= MAX_EXPONENT)
                .ok_or_else(|| ParseError::syntax(pos, format!("exponent exceeds {MAX_EXPONENT}")))?;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn digits(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        (self.pos > start).then(|| std::str::from_utf8(&self.src[start..self.pos]).unwrap())
    }

    fn nat(&mut self) -> Result<BigInt, ParseError> {
        let pos = self.pos;
        let d = self.digits().ok_or_else(|| ParseError::syntax(pos, "expected a natural number"))?;
        Ok(d.parse().unwrap())
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let pos = {
            self.skip_ws();
            self.pos
        };
        match self.peek() {
            None => Err(ParseError::syntax(pos, "unexpected end of input")),
            Some(c) if c.is_ascii_digit() => {
                let num = self.nat()?;
                let den = if self.eat(b'/') { self.nat()? } else { BigInt::from(1) };
                if den.is_zero() {
                    return Err(ParseError::syntax(pos, "zero denominator"));
                }
                Ok(Expr::Rational(BigRational::new(num, den)))
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_alphabetic() => self.word(pos),
            Some(c) => Err(ParseError::syntax(pos, format!("unexpected character '{}'", c as char))),
        }
    }

    fn word(&mut self, pos: usize) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        let letters = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let dstart = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let digits = std::str::from_utf8(&self.src[dstart..self.pos]).unwrap();
        let full = format!("{letters}{digits}");
        if digits.is_empty() {
            match letters {
                "i" => return Ok(Expr::I),
                "conj" => {
                    self.expect(b'(')?;
                    self.depth += 1;
                    let inner = self.expr()?;
                    self.depth -= 1;
                    self.expect(b')')?;
                    return Ok(Expr::Conj(Box::new(inner)));
                }
                _ if VarKind::from_name(letters).is_some() => {
                    return Err(ParseError::syntax(self.pos, format!("variable '{letters}' needs an index")))
                }
                _ => {}
            }
        }
        let Some(kind) = VarKind::from_name(letters) else {
            return Err(ParseError { pos, kind: ParseErrorKind::UnknownVariable(full) });
        };
        let index = digits
            .parse::<usize>()
            .map_err(|_| ParseError { pos, kind: ParseErrorKind::IndexOutOfRange(full.clone()) })?;
        Ok(Expr::Var { kind, index, pos })
    }
}

/// Parse text into a syntax tree without resolving variables.
pub fn parse_ast(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, depth: 0 };
    let e = p.expr()?;
    if let Some(c) = p.peek() {
        return Err(ParseError::syntax(p.pos, format!("unexpected '{}'", c as char)));
    }
    Ok(e)
}

/// Parse and expand an expression into a jet of work order `order`.
/// Polynomials of degree at most `order` come out exact.
pub fn parse_expr(text: &str, sig: VarSig, order: u32) -> Result<Jet, ParseError> {
    parse_ast(text)?.to_jet(sig, order)
}

impl Expr {
    pub fn to_jet(&self, sig: VarSig, order: u32) -> Result<Jet, ParseError> {
        Ok(match self {
            Expr::Rational(q) => Jet::constant(sig, order, GaussianRational::real(q.clone())),
            Expr::I => Jet::constant(sig, order, GaussianRational::i()),
            Expr::Var { kind, index, pos } => {
                let name = format!("{}{index}", kind.name());
                let (ambient_kind, bound) = match kind {
                    VarKind::Z | VarKind::Zb | VarKind::Zp | VarKind::Zbp => {
                        (matches!(kind, VarKind::Zp | VarKind::Zbp), sig.n())
                    }
                    VarKind::S => (false, sig.d()),
                };
                if ambient_kind != sig.is_ambient() {
                    return Err(ParseError { pos: *pos, kind: ParseErrorKind::UnknownVariable(name) });
                }
                if *index == 0 || *index > bound {
                    return Err(ParseError { pos: *pos, kind: ParseErrorKind::IndexOutOfRange(name) });
                }
                let var = match kind {
                    VarKind::Z | VarKind::Zp => Var::Z(index - 1),
                    VarKind::Zb | VarKind::Zbp => Var::Zb(index - 1),
                    VarKind::S => Var::S(index - 1),
                };
                Jet::var(sig, order, var).expect("index checked above")
            }
            Expr::Neg(e) => -e.to_jet(sig, order)?,
            Expr::Sum(terms) => {
                let mut acc = Jet::zero(sig, order);
                for t in terms {
                    acc = &acc + &t.to_jet(sig, order)?;
                }
                acc
            }
            Expr::Product(factors) => {
                let mut acc = Jet::one(sig, order);
                for f in factors {
                    acc = &acc * &f.to_jet(sig, order)?;
                }
                acc
            }
            Expr::Pow(base, e) => base.to_jet(sig, order)?.pow(*e),
            Expr::Conj(e) => e.to_jet(sig, order)?.conjugate(),
        })
    }
}
