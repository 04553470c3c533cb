//! Variety expressions and raw `b`-polynomial input.
//!
//! ```text
//! expr     := term ('+' term)*
//! term     := [uint '.'] atomprod
//! atomprod := atom ('*' atom)*
//! atom     := 'P(' uint ')' | 'H(' uint ',' uint ')'
//! ```

use std::fmt;

use serde::{Serialize, Serializer};

use crate::chow::Atom;
use crate::error::{Error, Result};
use crate::fpring::BPoly;
use crate::partitions::Partition;

/// Largest atom parameter accepted by the parser.
pub const MAX_ATOM_PARAM: u32 = 64;

/// `multiplicity × (atom₁ × ⋯ × atom_k)`; an empty product is a point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    multiplicity: u64,
    atoms: Vec<Atom>,
}

impl Term {
    pub fn new(multiplicity: u64, atoms: Vec<Atom>) -> Self {
        Term { multiplicity, atoms }
    }

    pub fn multiplicity(&self) -> u64 {
        self.multiplicity
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Sum of atom dimensions; `-1` if some factor is empty.
    pub fn dim(&self) -> i64 {
        if self.atoms.iter().any(|a| a.dim() < 0) {
            return -1;
        }
        self.atoms.iter().map(Atom::dim).sum()
    }
}

/// A disjoint union of products of atoms, with multiplicities.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct VarietyExpr {
    terms: Vec<Term>,
}

impl VarietyExpr {
    pub fn new(terms: Vec<Term>) -> Self {
        VarietyExpr { terms }
    }

    pub fn atom(atom: Atom) -> Self {
        VarietyExpr { terms: vec![Term::new(1, vec![atom])] }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Largest term dimension, or `-1` for the empty variety.
    pub fn dim(&self) -> i64 {
        self.terms.iter().map(Term::dim).max().unwrap_or(-1)
    }
}

impl fmt::Display for VarietyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0.P(0)");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if t.multiplicity != 1 {
                write!(f, "{}.", t.multiplicity)?;
            }
            if t.atoms.is_empty() {
                write!(f, "P(0)")?;
            }
            for (j, a) in t.atoms.iter().enumerate() {
                if j > 0 {
                    write!(f, "*")?;
                }
                write!(f, "{a}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for VarietyExpr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer { src: text.as_bytes(), pos: 0 }
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

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.pos, msg: msg.into() })
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.error(format!("expected '{}'", c as char))
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn uint(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.error("expected an unsigned integer");
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        digits.parse().map_err(|_| Error::Syntax { pos: start, msg: "integer out of range".into() })
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }
}

/// Parses a variety expression, returning notes about normalizations.
pub fn parse_expr_with_notes(text: &str) -> Result<(VarietyExpr, Vec<String>)> {
    let mut lx = Lexer::new(text);
    let mut notes = Vec::new();
    let mut terms = Vec::new();
    loop {
        terms.push(parse_term(&mut lx, &mut notes)?);
        if lx.at_end() {
            break;
        }
        lx.expect(b'+')?;
    }
    Ok((VarietyExpr::new(terms), notes))
}

pub fn parse_expr(text: &str) -> Result<VarietyExpr> {
    parse_expr_with_notes(text).map(|(e, _)| e)
}

fn parse_term(lx: &mut Lexer<'_>, notes: &mut Vec<String>) -> Result<Term> {
    let mut multiplicity = 1;
    if lx.peek().is_some_and(|c| c.is_ascii_digit()) {
        multiplicity = lx.uint()?;
        lx.expect(b'.')?;
    }
    let mut atoms = vec![parse_atom(lx, notes)?];
    while lx.eat(b'*') {
        atoms.push(parse_atom(lx, notes)?);
    }
    Ok(Term::new(multiplicity, atoms))
}

fn atom_param(lx: &mut Lexer<'_>) -> Result<u32> {
    let v = lx.uint()?;
    if v > u64::from(MAX_ATOM_PARAM) {
        return Err(Error::InvalidAtom(format!("parameter {v} exceeds {MAX_ATOM_PARAM}")));
    }
    Ok(v as u32)
}

fn parse_atom(lx: &mut Lexer<'_>, notes: &mut Vec<String>) -> Result<Atom> {
    match lx.peek() {
        Some(b'P') => {
            lx.pos += 1;
            lx.expect(b'(')?;
            let n = atom_param(lx)?;
            lx.expect(b')')?;
            Ok(Atom::P(n))
        }
        Some(b'H') => {
            lx.pos += 1;
            lx.expect(b'(')?;
            let a = atom_param(lx)?;
            lx.expect(b',')?;
            let b = atom_param(lx)?;
            lx.expect(b')')?;
            if a > b {
                notes.push(format!("H({a},{b}) normalized to H({b},{a})"));
            }
            Ok(Atom::milnor(a, b))
        }
        _ => lx.error("expected 'P(' or 'H('"),
    }
}

/// Parses `b`-polynomials such as `b[2]*b[1]^2 + 3*b[4] + 1`.
pub fn parse_bpoly(text: &str, p: u32, max_weight: u32) -> Result<BPoly> {
    let mut lx = Lexer::new(text);
    let mut total = BPoly::zero(p, max_weight);
    let mut negative = lx.eat(b'-');
    loop {
        let mut coeff: i64 = 1;
        let mut parts = Vec::new();
        let mut first = true;
        loop {
            match lx.peek() {
                Some(c) if c.is_ascii_digit() => {
                    let v = lx.uint()?;
                    coeff = coeff.wrapping_mul((v % u64::from(p)) as i64) % i64::from(p);
                }
                Some(b'b') => {
                    lx.pos += 1;
                    lx.expect(b'[')?;
                    let start = lx.pos;
                    let i = lx.uint()?;
                    if i == 0 || i > u64::from(MAX_ATOM_PARAM) {
                        return Err(Error::Syntax { pos: start, msg: format!("b index {i} out of range") });
                    }
                    lx.expect(b']')?;
                    let e = if lx.eat(b'^') { lx.uint()? } else { 1 };
                    if e > u64::from(MAX_ATOM_PARAM) {
                        return lx.error("exponent out of range");
                    }
                    parts.extend(std::iter::repeat(i as u32).take(e as usize));
                }
                _ if first => return lx.error("expected a coefficient or 'b['"),
                _ => return lx.error("expected a factor after '*'"),
            }
            first = false;
            if !lx.eat(b'*') {
                break;
            }
        }
        let alpha = Partition::new(parts);
        if alpha.weight() > max_weight {
            return Err(Error::Truncation { partition: alpha, max_weight });
        }
        let c = if negative { -coeff } else { coeff };
        total = total.add(&BPoly::monomial(p, max_weight, alpha, c))?;
        if lx.at_end() {
            break;
        }
        negative = lx.eat(b'-');
        if !negative {
            lx.expect(b'+')?;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_atom() {
        assert_eq!(parse_expr("P(4)").unwrap(), VarietyExpr::atom(Atom::P(4)));
    }

    #[test]
    fn parses_sum_of_products() {
        let e = parse_expr("2.P(4)*H(2,4) + P(1)").unwrap();
        let expected = VarietyExpr::new(vec![
            Term::new(2, vec![Atom::P(4), Atom::H(2, 4)]),
            Term::new(1, vec![Atom::P(1)]),
        ]);
        assert_eq!(e, expected);
        assert_eq!(e.to_string(), "2.P(4)*H(2,4) + P(1)");
        assert_eq!(e.terms()[0].dim(), 9);
    }

    #[test]
    fn normalizes_milnor_indices() {
        let (e, notes) = parse_expr_with_notes("H(4,2)").unwrap();
        assert_eq!(e, VarietyExpr::atom(Atom::H(2, 4)));
        assert_eq!(notes.len(), 1);
    }

    #[test]
    fn reports_error_positions() {
        match parse_expr("P(4) + Q(1)") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 7),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expr("P(4"), Err(Error::Syntax { pos: 3, .. })));
        assert!(matches!(parse_expr(""), Err(Error::Syntax { .. })));
        assert!(matches!(parse_expr("P(99)"), Err(Error::InvalidAtom(_))));
    }

    #[test]
    fn parses_raw_bpoly() {
        let x = parse_bpoly("b[2]*b[1]^2 + b[4]", 2, 16).unwrap();
        let expected = BPoly::from_terms(2, 16, [(Partition::from([2, 1, 1]), 1), (Partition::from([4]), 1)]);
        assert_eq!(x, expected);
        let y = parse_bpoly("2*b[1] - b[1] + 1", 3, 4).unwrap();
        assert_eq!(y, BPoly::from_terms(3, 4, [(Partition::from([1]), 1), (Partition::empty(), 1)]));
        assert!(matches!(parse_bpoly("b[5]", 2, 4), Err(Error::Truncation { .. })));
        assert!(matches!(parse_bpoly("b[0]", 2, 4), Err(Error::Syntax { .. })));
    }
}
