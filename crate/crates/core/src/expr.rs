//! Expression trees for polynomial text and differential equations.
//!
//! Grammar (whitespace insensitive):
//!
//! ```text
//! equation := expr "=" expr
//! expr     := ["-"] term (("+" | "-") term)*
//! term     := unary (("*" | "/") unary)*        division only by constants
//! unary    := "-" unary | power
//! power    := atom ["^" (integer | "(" rational ")")]   rational exponents only on numbers
//! atom     := integer | name | "(" expr ")" | "theta_q" ["^" integer] atom
//! ```
//!
//! Names are generator ids (`A@4`, `C@3(Q^2)`, `theta{1/6,0}(Q^3)`, `E@1*`) or
//! plain variables (`Z1`, `X`). In `E@1**A@1` the first star belongs to the
//! level tag.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::Rational64;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::series::Rat;
use crate::surd::{Surd, SurdError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unexpected {found} at offset {pos} in {text:?}")]
    Unexpected { text: String, pos: usize, found: String },
    #[error("division by a non-constant in {0:?}")]
    NonConstantDivisor(String),
    #[error("rational exponent on a non-number in {0:?}")]
    NonConstantBase(String),
    #[error(transparent)]
    Surd(#[from] SurdError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Num(Surd),
    Var(String),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
    /// `theta_q^k` applied to a subexpression.
    Theta(u32, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Name(String),
    Op(char),
}

fn is_name_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let cs: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |pos: usize, found: String| ParseError::Unexpected {
        text: text.to_string(),
        pos,
        found,
    };
    let starts_with = |i: usize, s: &str| cs[i..].iter().take(s.len()).copied().eq(s.chars());
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = cs[st..i].iter().collect();
            out.push((st, Tok::Int(s.parse().unwrap())));
        } else if is_name_start(c) {
            let st = i;
            while i < cs.len() && (cs[i].is_ascii_alphanumeric() || cs[i] == '_' || cs[i] == '@') {
                i += 1;
            }
            if i < cs.len() && cs[i] == '{' {
                while i < cs.len() && cs[i] != '}' {
                    i += 1;
                }
                if i == cs.len() {
                    return Err(err(st, "unterminated '{'".into()));
                }
                i += 1;
            }
            // level tag 1*: the star is part of the name unless it starts a product
            if i >= 2 && cs[i - 2] == '@' && cs[i - 1] == '1' && i < cs.len() && cs[i] == '*' {
                let next = cs.get(i + 1).copied();
                let product = match next {
                    Some(n) if n.is_ascii_alphanumeric() || n == '_' => true,
                    Some('(') => !starts_with(i + 1, "(Q"),
                    _ => false,
                };
                if !product {
                    i += 1;
                }
            }
            if starts_with(i, "(Q") {
                let mut depth = 0;
                loop {
                    match cs.get(i) {
                        None => return Err(err(st, "unterminated argument".into())),
                        Some('(') => depth += 1,
                        Some(')') => depth -= 1,
                        _ => {}
                    }
                    i += 1;
                    if depth == 0 {
                        break;
                    }
                }
            }
            out.push((st, Tok::Name(cs[st..i].iter().collect())));
        } else if "+-*/^()=".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(err(i, format!("{c:?}")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    text: &'a str,
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn unexpected(&self) -> ParseError {
        match self.toks.get(self.pos) {
            Some((p, t)) => ParseError::Unexpected {
                text: self.text.into(),
                pos: *p,
                found: format!("{t:?}"),
            },
            None => ParseError::Unexpected {
                text: self.text.into(),
                pos: self.text.len(),
                found: "end of input".into(),
            },
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn int(&mut self) -> Result<BigInt, ParseError> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = n.clone();
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.unexpected()),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = Vec::new();
        let first = self.term()?;
        terms.push(first);
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                terms.push(Expr::Neg(Box::new(self.term()?)));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Add(terms)
        })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.unary()?];
        loop {
            if self.eat('*') {
                factors.push(self.unary()?);
            } else if self.eat('/') {
                let d = self.unary()?;
                match d.constant() {
                    Some(c) if !c.is_zero() => factors.push(Expr::Num(c.recip())),
                    _ => return Err(ParseError::NonConstantDivisor(self.text.into())),
                }
            } else {
                break;
            }
        }
        Ok(Expr::product(factors))
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            let e = self.unary()?;
            return Ok(match e {
                Expr::Num(c) => Expr::Num(Surd {
                    rat: -c.rat,
                    rad: c.rad,
                }),
                e => Expr::Neg(Box::new(e)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        if self.eat('(') {
            let neg = self.eat('-');
            let p = self.int()?;
            let q = if self.eat('/') { self.int()? } else { BigInt::one() };
            self.expect(')')?;
            let bad = || ParseError::NonConstantBase(self.text.into());
            let p: i64 = p.try_into().map_err(|_| bad())?;
            let q: i64 = q.try_into().map_err(|_| bad())?;
            let e = Rational64::new(if neg { -p } else { p }, q);
            if e.is_integer() && e >= Rational64::zero() {
                return Ok(Expr::Pow(Box::new(base), e.to_integer() as u32).simplify());
            }
            let c = base.constant().ok_or_else(bad)?;
            if !c.rad.is_one() {
                return Err(bad());
            }
            return Ok(Expr::Num(Surd::power_of(&c.rat, e)?));
        }
        let n = self.int()?;
        let n: u32 = n.try_into().map_err(|_| self.unexpected())?;
        Ok(Expr::Pow(Box::new(base), n).simplify())
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Expr::Num(Surd::rational(Rat::from_integer(n))))
            }
            Some(Tok::Name(s)) if s == "theta_q" => {
                self.pos += 1;
                let k = if self.eat('^') {
                    self.int()?.try_into().map_err(|_| self.unexpected())?
                } else {
                    1
                };
                let inner = self.atom()?;
                Ok(Expr::Theta(k, Box::new(inner)))
            }
            Some(Tok::Name(s)) => {
                self.pos += 1;
                Ok(Expr::Var(s))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            _ => Err(self.unexpected()),
        }
    }
}

fn parser(text: &str) -> Result<Parser<'_>, ParseError> {
    Ok(Parser {
        text,
        toks: lex(text)?,
        pos: 0,
    })
}

/// Parse a single expression.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = parser(text)?;
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.unexpected());
    }
    Ok(e)
}

/// Parse `lhs = rhs` into the pair.
pub fn parse_equation(text: &str) -> Result<(Expr, Expr), ParseError> {
    let mut p = parser(text)?;
    let l = p.expr()?;
    p.expect('=')?;
    let r = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.unexpected());
    }
    Ok((l, r))
}

impl Expr {
    pub fn int(n: i64) -> Self {
        Expr::Num(Surd::from_int(n))
    }

    fn product(mut factors: Vec<Expr>) -> Expr {
        // fold numeric factors
        let mut c = Surd::one();
        factors.retain(|f| match f {
            Expr::Num(x) => {
                c = c.mul(x);
                false
            }
            _ => true,
        });
        if factors.is_empty() {
            return Expr::Num(c);
        }
        if c != Surd::one() {
            factors.insert(0, Expr::Num(c));
        }
        if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::Mul(factors)
        }
    }

    fn simplify(self) -> Expr {
        match self {
            Expr::Pow(b, n) => match *b {
                Expr::Num(c) => Expr::Num(c.pow(n)),
                b => Expr::Pow(Box::new(b), n),
            },
            e => e,
        }
    }

    /// The value of a variable-free, derivative-free expression.
    pub fn constant(&self) -> Option<Surd> {
        match self {
            Expr::Num(c) => Some(c.clone()),
            Expr::Neg(e) => e.constant().map(|c| Surd {
                rat: -c.rat,
                rad: c.rad,
            }),
            Expr::Mul(fs) => fs.iter().try_fold(Surd::one(), |acc, f| Some(acc.mul(&f.constant()?))),
            Expr::Pow(b, n) => b.constant().map(|c| c.pow(*n)),
            Expr::Add(ts) => {
                let cs: Option<Vec<Surd>> = ts.iter().map(|t| t.constant()).collect();
                let cs = cs?;
                let rad = cs.iter().find(|c| !c.is_zero()).map(|c| c.rad.clone()).unwrap_or_default();
                if cs.iter().any(|c| !c.is_zero() && c.rad != rad) {
                    return None;
                }
                Some(Surd {
                    rat: cs.iter().map(|c| c.rat.clone()).sum(),
                    rad,
                })
            }
            _ => None,
        }
    }

    /// Every variable name, in order of first appearance.
    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Var(v) = e {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        });
        out
    }

    fn walk(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().for_each(|x| x.walk(f)),
            Expr::Neg(x) | Expr::Pow(x, _) | Expr::Theta(_, x) => x.walk(f),
            Expr::Num(_) | Expr::Var(_) => {}
        }
    }

    /// Replace variables by expressions.
    pub fn substitute(&self, map: &BTreeMap<String, Expr>) -> Expr {
        match self {
            Expr::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Expr::Num(_) => self.clone(),
            Expr::Add(xs) => Expr::Add(xs.iter().map(|x| x.substitute(map)).collect()),
            Expr::Mul(xs) => Expr::Mul(xs.iter().map(|x| x.substitute(map)).collect()),
            Expr::Neg(x) => Expr::Neg(Box::new(x.substitute(map))),
            Expr::Pow(x, n) => Expr::Pow(Box::new(x.substitute(map)), *n),
            Expr::Theta(k, x) => Expr::Theta(*k, Box::new(x.substitute(map))),
        }
    }

    /// Fold over the tree with a caller-supplied ring.
    pub fn eval<T, E>(&self, ring: &impl ExprRing<T, E>) -> Result<T, E> {
        Ok(match self {
            Expr::Num(c) => ring.constant(c)?,
            Expr::Var(v) => ring.var(v)?,
            Expr::Add(xs) => {
                let mut it = xs.iter();
                let mut acc = it.next().map(|x| x.eval(ring)).transpose()?.unwrap_or(ring.constant(&Surd::zero())?);
                for x in it {
                    acc = ring.add(&acc, &x.eval(ring)?);
                }
                acc
            }
            Expr::Mul(xs) => {
                let mut it = xs.iter();
                let mut acc = it.next().map(|x| x.eval(ring)).transpose()?.unwrap_or(ring.constant(&Surd::one())?);
                for x in it {
                    acc = ring.mul(&acc, &x.eval(ring)?);
                }
                acc
            }
            Expr::Neg(x) => ring.neg(&x.eval(ring)?),
            Expr::Pow(x, n) => ring.pow(&x.eval(ring)?, *n),
            Expr::Theta(k, x) => {
                let mut v = x.eval(ring)?;
                for _ in 0..*k {
                    v = ring.theta(&v)?;
                }
                v
            }
        })
    }
}

/// Operations needed to evaluate an [`Expr`].
pub trait ExprRing<T, E> {
    fn constant(&self, c: &Surd) -> Result<T, E>;
    fn var(&self, name: &str) -> Result<T, E>;
    fn add(&self, a: &T, b: &T) -> T;
    fn mul(&self, a: &T, b: &T) -> T;
    fn neg(&self, a: &T) -> T;
    fn pow(&self, a: &T, n: u32) -> T;
    fn theta(&self, a: &T) -> Result<T, E>;
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(_) => 1,
        Expr::Neg(_) => 2,
        Expr::Mul(_) => 3,
        Expr::Num(c) if c.rat < Rat::zero() || !c.rad.is_one() || !c.rat.is_integer() => 3,
        _ => 4,
    }
}

fn wrap(e: &Expr, min: u8) -> String {
    if prec(e) < min {
        format!("({e})")
    } else {
        e.to_string()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) => write!(f, "{c}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Add(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    match (i, x) {
                        (0, _) => write!(f, "{x}")?,
                        (_, Expr::Neg(y)) => write!(f, " - {}", wrap(y, 2))?,
                        _ => write!(f, " + {x}")?,
                    }
                }
                Ok(())
            }
            Expr::Mul(xs) => {
                let parts: Vec<String> = xs.iter().map(|x| wrap(x, 3)).collect();
                write!(f, "{}", parts.join("*"))
            }
            Expr::Neg(x) => write!(f, "-{}", wrap(x, 3)),
            Expr::Pow(x, n) => write!(f, "{}^{n}", wrap(x, 4)),
            Expr::Theta(1, x) => write!(f, "theta_q {}", wrap(x, 4)),
            Expr::Theta(k, x) => write!(f, "theta_q^{k} {}", wrap(x, 4)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_with_level_star() {
        let e = parse_expr("E@1**A@1 + E@1*^2 - C@1*(Q^2)").unwrap();
        assert_eq!(e.vars(), ["E@1*", "A@1", "C@1*(Q^2)"]);
        let e = parse_expr("E@1*A@1").unwrap();
        assert_eq!(e.vars(), ["E@1", "A@1"]);
    }

    #[test]
    fn ids_with_arguments() {
        let e = parse_expr("1/2*theta{1/2,0}*theta{1/6,0}(Q^3) - A@4(Q^(1/2))^2").unwrap();
        assert_eq!(e.vars(), ["theta{1/2,0}", "theta{1/6,0}(Q^3)", "A@4(Q^(1/2))"]);
    }

    #[test]
    fn constants_fold() {
        assert_eq!(parse_expr("2^(-3/2)").unwrap().constant().unwrap().to_string(), "1/4*2^(1/2)");
        assert_eq!(parse_expr("(3 - 1)/16").unwrap().constant().unwrap().to_string(), "1/8");
        assert!(parse_expr("1/Z").is_err());
    }

    #[test]
    fn equations_and_operators() {
        let (l, r) = parse_equation("theta_q^2 Z1 = 9*(Z4*Z6 - Z1*Z2)").unwrap();
        assert!(matches!(l, Expr::Theta(2, _)));
        assert_eq!(r.vars(), ["Z4", "Z6", "Z1", "Z2"]);
        let e = parse_expr("-Z1^2").unwrap();
        assert!(matches!(e, Expr::Neg(_)));
        assert!(parse_equation("Z1 = ").is_err());
        assert!(parse_expr("Z1 $ 2").is_err());
    }

    #[test]
    fn display_reparses() {
        for s in ["theta_q^3 Z1 - 27*theta_q Z6*theta_q Z4", "-(X - Y)^2 + 1/3*Z", "2*2^(1/2)*A@4*C@2"] {
            let e = parse_expr(s).unwrap();
            assert_eq!(parse_expr(&e.to_string()).unwrap(), e, "{s}");
        }
    }
}
