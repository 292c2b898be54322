//! Text forms for compositions, exponent vectors, quasi-symmetric
//! expressions and zeta expressions.
//!
//! The expression grammar is shared by the command line:
//!
//! ```text
//! expr     := ['-'] term (('+' | '-') term)*
//! term     := factor ('*' factor)*
//! factor   := rational | generator ['@+1']
//! rational := digits ['/' digits]
//! generator:= 'e'k | 'h'k | 'p'k | 'N[' n ',' m ']' | 'M[' parts ']' | 'z[' parts ']'
//! ```
//!
//! `z[...]` factors are only meaningful in zeta expressions, `@+1` only
//! in series left-hand sides (it marks a factor specialized one prefix
//! step ahead).  Printers and parsers round-trip.

use crate::composition::{Composition, Partition};
use crate::error::Error;
use crate::eta::EtaSpec;
use crate::mzv::{MzvExpr, MzvMonomial};
use crate::qsym::{generators, quasi_shuffle, QSymElem};
use crate::rat::Rat;
use crate::Result;
use num_bigint::BigInt;
use num_traits::One;
use std::str::FromStr;

/// Parse a comma-separated composition such as `3,1`.  The empty string
/// parses to the empty composition.
pub fn parse_composition(s: &str) -> Result<Composition> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Composition::empty());
    }
    let parts: Vec<u32> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad composition part `{p}` in `{s}`")))
        })
        .collect::<Result<_>>()?;
    Composition::try_new(parts)
}

/// Parse a comma-separated exponent vector such as `0,1,1`.
pub fn parse_eta_spec(s: &str) -> Result<EtaSpec> {
    let parts: Vec<u32> = s
        .trim()
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad exponent `{p}` in `{s}`")))
        })
        .collect::<Result<_>>()?;
    EtaSpec::new(parts)
}

/// One additive term of a series left-hand side: the product of all
/// plain factors and the product of all `@+1` factors, with the scalar
/// folded into the plain part.
#[derive(Debug, Clone)]
pub struct LhsTerm {
    pub plain: QSymElem,
    pub shifted: Option<QSymElem>,
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    src: &'a str,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { chars: src.chars().collect(), pos: 0, src }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse(format!("{} at position {} in `{}`", msg.into(), self.pos, self.src))
    }

    fn skip_ws(&mut self) {
        while matches!(self.chars.get(self.pos), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn eat(&mut self, want: char) -> bool {
        if self.peek() == Some(want) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, want: char) -> Result<()> {
        if self.eat(want) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{want}`")))
        }
    }

    fn digits(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.chars.get(self.pos), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected digits"));
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        BigInt::from_str(&text).map_err(|_| self.err("bad integer"))
    }

    fn small_index(&mut self) -> Result<u32> {
        let d = self.digits()?;
        u32::try_from(d.clone()).map_err(|_| self.err(format!("index {d} too large")))
    }

    fn rational(&mut self) -> Result<Rat> {
        let n = self.digits()?;
        if self.eat('/') {
            let d = self.digits()?;
            if d == BigInt::from(0) {
                return Err(self.err("zero denominator"));
            }
            Ok(Rat::new(n, d))
        } else {
            Ok(Rat::from_integer(n))
        }
    }

    fn bracket_parts(&mut self) -> Result<Vec<u32>> {
        self.expect('[')?;
        let mut parts = Vec::new();
        if self.peek() != Some(']') {
            loop {
                parts.push(self.small_index()?);
                if !self.eat(',') {
                    break;
                }
            }
        }
        self.expect(']')?;
        Ok(parts)
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }
}

#[derive(Debug, Clone)]
enum Factor {
    Scalar(Rat),
    QSym(QSymElem, bool), // shifted?
    Zeta(Composition),
}

fn parse_factor(p: &mut Parser<'_>, allow_zeta: bool, allow_shift: bool) -> Result<Factor> {
    let c = p.peek().ok_or_else(|| p.err("expected a factor"))?;
    let factor = match c {
        '0'..='9' => Factor::Scalar(p.rational()?),
        '(' => {
            // parenthesized rational only; keeps the grammar small
            p.bump();
            let r = p.rational()?;
            p.expect(')')?;
            Factor::Scalar(r)
        }
        'e' => {
            p.bump();
            Factor::QSym(generators::elementary(p.small_index()?), false)
        }
        'h' => {
            p.bump();
            Factor::QSym(generators::complete(p.small_index()?), false)
        }
        'p' => {
            p.bump();
            Factor::QSym(generators::powersum(p.small_index()?), false)
        }
        'm' => {
            p.bump();
            let parts = p.bracket_parts()?;
            if parts.contains(&0) {
                return Err(p.err("partition parts must be positive"));
            }
            let elem = if parts.is_empty() {
                QSymElem::one()
            } else {
                generators::monomial_partition(&Partition::new(parts))
            };
            Factor::QSym(elem, false)
        }
        'N' => {
            p.bump();
            let parts = p.bracket_parts()?;
            if parts.len() != 2 {
                return Err(p.err("N takes exactly two indices"));
            }
            Factor::QSym(generators::n_family(parts[0], parts[1])?, false)
        }
        'M' => {
            p.bump();
            let parts = p.bracket_parts()?;
            Factor::QSym(QSymElem::monomial(Composition::try_new(parts)?), false)
        }
        'z' => {
            if !allow_zeta {
                return Err(p.err("zeta symbols are not allowed in this expression"));
            }
            p.bump();
            let parts = p.bracket_parts()?;
            Factor::Zeta(Composition::try_new(parts)?)
        }
        other => return Err(p.err(format!("unexpected `{other}`"))),
    };
    // optional @+1 suffix
    if p.peek() == Some('@') {
        if !allow_shift {
            return Err(p.err("`@+1` offsets are not allowed in this expression"));
        }
        p.bump();
        p.expect('+')?;
        if p.small_index()? != 1 {
            return Err(p.err("only `@+1` offsets are supported"));
        }
        match factor {
            Factor::QSym(u, _) => return Ok(Factor::QSym(u, true)),
            _ => return Err(p.err("only quasi-symmetric factors can carry `@+1`")),
        }
    }
    Ok(factor)
}

/// Parse a quasi-symmetric expression (no offsets, no zeta symbols).
pub fn parse_qsym(src: &str) -> Result<QSymElem> {
    let terms = parse_lhs_terms(src, false)?;
    let mut total = QSymElem::zero();
    for t in terms {
        total = &total + &t.plain;
    }
    Ok(total)
}

/// Parse a series left-hand side, allowing `@+1` factor offsets.
pub fn parse_lhs(src: &str) -> Result<Vec<LhsTerm>> {
    parse_lhs_terms(src, true)
}

fn parse_lhs_terms(src: &str, allow_shift: bool) -> Result<Vec<LhsTerm>> {
    let mut p = Parser::new(src);
    let mut out = Vec::new();
    let mut sign = if p.eat('-') { -Rat::one() } else { Rat::one() };
    loop {
        let mut scalar = sign.clone();
        let mut plain = QSymElem::one();
        let mut shifted: Option<QSymElem> = None;
        loop {
            match parse_factor(&mut p, false, allow_shift)? {
                Factor::Scalar(r) => scalar *= r,
                Factor::QSym(u, false) => plain = quasi_shuffle(&plain, &u),
                Factor::QSym(u, true) => {
                    shifted = Some(match shifted {
                        None => u,
                        Some(prev) => quasi_shuffle(&prev, &u),
                    });
                }
                Factor::Zeta(_) => unreachable!("zeta disabled here"),
            }
            if !p.eat('*') {
                break;
            }
        }
        out.push(LhsTerm { plain: plain.scale(&scalar), shifted });
        if p.at_end() {
            break;
        }
        sign = if p.eat('-') {
            -Rat::one()
        } else if p.eat('+') {
            Rat::one()
        } else {
            return Err(p.err("expected `+`, `-` or end of expression"));
        };
    }
    Ok(out)
}

/// Parse a zeta expression such as `10*z[6] + 1/2*z[3]*z[3]` or `5/4`.
pub fn parse_mzv(src: &str) -> Result<MzvExpr> {
    let mut p = Parser::new(src);
    let mut out = MzvExpr::zero();
    let mut sign = if p.eat('-') { -Rat::one() } else { Rat::one() };
    loop {
        let mut scalar = sign.clone();
        let mut factors: Vec<Composition> = Vec::new();
        loop {
            match parse_factor(&mut p, true, false)? {
                Factor::Scalar(r) => scalar *= r,
                Factor::Zeta(c) => factors.push(c),
                Factor::QSym(..) => {
                    return Err(p.err("quasi-symmetric generators are not zeta symbols"))
                }
            }
            if !p.eat('*') {
                break;
            }
        }
        out.add_term(MzvMonomial::from_factors(factors)?, scalar);
        if p.at_end() {
            break;
        }
        sign = if p.eat('-') {
            -Rat::one()
        } else if p.eat('+') {
            Rat::one()
        } else {
            return Err(p.err("expected `+`, `-` or end of expression"));
        };
    }
    Ok(out)
}

/// Render an expression the way [`parse_mzv`] reads it (this is just the
/// `Display` form).
pub fn mzv_to_text(e: &MzvExpr) -> String {
    e.to_string()
}
