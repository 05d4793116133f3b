//! A SMARTS subset sufficient for BRICS environment definitions.
//!
//! Supported: bracket atom expressions with `!`, `&`, `,` and `;`; element
//! symbols (aliphatic uppercase, aromatic lowercase), `*`, `a`, `A`, `#n`,
//! `Dn`, `Hn`, `R`/`Rn`, charges and recursive `$(...)`; organic-subset
//! atoms outside brackets; bond primitives `- = # : ~ @` with the same logical
//! operators; branches. Ring-closure digits are not supported. Patterns are
//! trees, matched by backtracking with the first atom as the root.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::element::Element;
use crate::mol::{BondOrder, Molecule};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid SMARTS {pattern:?} at position {pos}: {reason}")]
pub struct SmartsError {
    pub pattern: String,
    pub pos: usize,
    pub reason: &'static str,
}

#[derive(Clone, Debug)]
enum AtomPrim {
    Any,
    Aromatic(bool),
    Element { number: u8, aromatic: bool },
    AtomicNumber(u8),
    Degree(u8),
    HCount(u8),
    InRing(bool),
    RingCount(u8),
    Charge(i8),
    Recursive(Box<Pattern>),
}

#[derive(Clone, Debug)]
enum Expr<P> {
    Prim(P),
    Not(Box<Expr<P>>),
    And(Vec<Expr<P>>),
    Or(Vec<Expr<P>>),
}

#[derive(Clone, Copy, Debug)]
enum BondPrim {
    Order(BondOrder),
    Any,
    Ring,
}

#[derive(Clone, Debug)]
struct PatternAtom {
    expr: Expr<AtomPrim>,
    /// `(child pattern atom, bond expression)`; `None` is the implicit
    /// single-or-aromatic bond.
    children: Vec<(usize, Option<Expr<BondPrim>>)>,
}

/// A compiled tree-shaped SMARTS pattern.
#[derive(Clone, Debug)]
pub struct Pattern {
    atoms: Vec<PatternAtom>,
}

impl Pattern {
    pub fn parse(text: &str) -> Result<Pattern, SmartsError> {
        let mut p = SmartsParser {
            text: text.as_bytes(),
            source: text,
            pos: 0,
        };
        let pattern = p.pattern()?;
        if p.pos != p.text.len() {
            return Err(p.error("trailing characters"));
        }
        Ok(pattern)
    }

    /// Whether the pattern matches with its first atom mapped to `root`.
    pub fn matches_at(&self, mol: &Molecule, root: usize) -> bool {
        let mut used = vec![usize::MAX; self.atoms.len()];
        self.match_atom(mol, 0, root, &mut used)
    }

    fn match_atom(&self, mol: &Molecule, p: usize, a: usize, used: &mut [usize]) -> bool {
        if used.contains(&a) || !eval_atom(&self.atoms[p].expr, mol, a) {
            return false;
        }
        used[p] = a;
        let ok = self.match_children(mol, p, a, 0, used);
        if !ok {
            used[p] = usize::MAX;
        }
        ok
    }

    fn match_children(&self, mol: &Molecule, p: usize, a: usize, k: usize, used: &mut [usize]) -> bool {
        let children = &self.atoms[p].children;
        if k == children.len() {
            return true;
        }
        let (child, ref bond_expr) = children[k];
        for &(n, b) in mol.neighbors(a) {
            if !eval_bond(bond_expr.as_ref(), mol, b) {
                continue;
            }
            let snapshot: Vec<usize> = used.to_vec();
            if self.match_atom(mol, child, n, used) && self.match_children(mol, p, a, k + 1, used) {
                return true;
            }
            used.copy_from_slice(&snapshot);
        }
        false
    }
}

fn eval_atom(expr: &Expr<AtomPrim>, mol: &Molecule, a: usize) -> bool {
    match expr {
        Expr::Prim(p) => {
            let atom = mol.atom(a);
            match p {
                AtomPrim::Any => true,
                AtomPrim::Aromatic(flag) => atom.aromatic == *flag,
                AtomPrim::Element { number, aromatic } => {
                    atom.element.atomic_number() == *number && atom.aromatic == *aromatic
                }
                AtomPrim::AtomicNumber(z) => atom.element.atomic_number() == *z,
                AtomPrim::Degree(d) => mol.degree(a) == *d as usize,
                AtomPrim::HCount(h) => {
                    let explicit = mol
                        .neighbors(a)
                        .iter()
                        .filter(|&&(n, _)| mol.atom(n).element.is_hydrogen())
                        .count();
                    atom.hydrogens as usize + explicit == *h as usize
                }
                AtomPrim::InRing(flag) => mol.rings().atom_in_ring(a) == *flag,
                AtomPrim::RingCount(n) => mol.rings().atom_ring_count(a) == *n as usize,
                AtomPrim::Charge(q) => atom.charge == *q,
                AtomPrim::Recursive(pattern) => pattern.matches_at(mol, a),
            }
        }
        Expr::Not(e) => !eval_atom(e, mol, a),
        Expr::And(es) => es.iter().all(|e| eval_atom(e, mol, a)),
        Expr::Or(es) => es.iter().any(|e| eval_atom(e, mol, a)),
    }
}

fn eval_bond(expr: Option<&Expr<BondPrim>>, mol: &Molecule, b: usize) -> bool {
    let order = mol.bond(b).order;
    let Some(expr) = expr else {
        return matches!(order, BondOrder::Single | BondOrder::Aromatic);
    };
    match expr {
        Expr::Prim(BondPrim::Any) => true,
        Expr::Prim(BondPrim::Order(o)) => order == *o,
        Expr::Prim(BondPrim::Ring) => mol.rings().bond_in_ring(b),
        Expr::Not(e) => !eval_bond(Some(e), mol, b),
        Expr::And(es) => es.iter().all(|e| eval_bond(Some(e), mol, b)),
        Expr::Or(es) => es.iter().any(|e| eval_bond(Some(e), mol, b)),
    }
}

struct SmartsParser<'a> {
    text: &'a [u8],
    source: &'a str,
    pos: usize,
}

impl<'a> SmartsParser<'a> {
    fn error(&self, reason: &'static str) -> SmartsError {
        SmartsError {
            pattern: String::from(self.source),
            pos: self.pos,
            reason,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn number(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        core::str::from_utf8(&self.text[start..self.pos]).ok()?.parse().ok()
    }

    /// Parses atoms, bonds and branches until end of input or an unmatched
    /// `)` (left for the caller).
    fn pattern(&mut self) -> Result<Pattern, SmartsError> {
        let mut atoms: Vec<PatternAtom> = Vec::new();
        let mut prev: Option<usize> = None;
        let mut stack: Vec<usize> = Vec::new();
        let mut pending: Option<Expr<BondPrim>> = None;
        let mut depth = 0usize;
        loop {
            match self.peek() {
                None => break,
                Some(b'(') => {
                    let p = prev.ok_or_else(|| self.error("branch without atom"))?;
                    stack.push(p);
                    depth += 1;
                    self.pos += 1;
                }
                Some(b')') => {
                    if depth == 0 {
                        break;
                    }
                    depth -= 1;
                    prev = stack.pop();
                    self.pos += 1;
                }
                Some(c) if is_bond_start(c) => {
                    if pending.is_some() {
                        return Err(self.error("two bonds in a row"));
                    }
                    pending = Some(self.bond_expr()?);
                }
                Some(c) if c.is_ascii_digit() => return Err(self.error("ring closures are not supported")),
                Some(_) => {
                    let expr = self.atom()?;
                    let index = atoms.len();
                    atoms.push(PatternAtom {
                        expr,
                        children: Vec::new(),
                    });
                    if let Some(p) = prev {
                        atoms[p].children.push((index, pending.take()));
                    } else if pending.is_some() {
                        return Err(self.error("bond without preceding atom"));
                    }
                    prev = Some(index);
                }
            }
        }
        if depth != 0 {
            return Err(self.error("unbalanced branch"));
        }
        if pending.is_some() {
            return Err(self.error("dangling bond"));
        }
        if atoms.is_empty() {
            return Err(self.error("empty pattern"));
        }
        Ok(Pattern { atoms })
    }

    fn atom(&mut self) -> Result<Expr<AtomPrim>, SmartsError> {
        let c = self.peek().unwrap();
        if c == b'[' {
            self.pos += 1;
            let e = self.atom_low()?;
            if self.peek() != Some(b']') {
                return Err(self.error("expected ]"));
            }
            self.pos += 1;
            return Ok(e);
        }
        if c == b'*' {
            self.pos += 1;
            return Ok(Expr::Prim(AtomPrim::Any));
        }
        let two = self.text.get(self.pos..self.pos + 2);
        let (symbol, aromatic, len): (&str, bool, usize) = match (two, c) {
            (Some(b"Cl"), _) => ("Cl", false, 2),
            (Some(b"Br"), _) => ("Br", false, 2),
            (_, b'B') => ("B", false, 1),
            (_, b'C') => ("C", false, 1),
            (_, b'N') => ("N", false, 1),
            (_, b'O') => ("O", false, 1),
            (_, b'P') => ("P", false, 1),
            (_, b'S') => ("S", false, 1),
            (_, b'F') => ("F", false, 1),
            (_, b'I') => ("I", false, 1),
            (_, b'c') => ("C", true, 1),
            (_, b'n') => ("N", true, 1),
            (_, b'o') => ("O", true, 1),
            (_, b's') => ("S", true, 1),
            (_, b'p') => ("P", true, 1),
            _ => return Err(self.error("unexpected character")),
        };
        self.pos += len;
        let number = Element::from_symbol(symbol).unwrap().atomic_number();
        Ok(Expr::Prim(AtomPrim::Element { number, aromatic }))
    }

    // Precedence inside brackets: `;` < `,` < `&` (explicit or implied) < `!`.
    fn atom_low(&mut self) -> Result<Expr<AtomPrim>, SmartsError> {
        let mut parts = vec![self.atom_or()?];
        while self.peek() == Some(b';') {
            self.pos += 1;
            parts.push(self.atom_or()?);
        }
        Ok(collapse(parts, Expr::And))
    }

    fn atom_or(&mut self) -> Result<Expr<AtomPrim>, SmartsError> {
        let mut parts = vec![self.atom_and()?];
        while self.peek() == Some(b',') {
            self.pos += 1;
            parts.push(self.atom_and()?);
        }
        Ok(collapse(parts, Expr::Or))
    }

    fn atom_and(&mut self) -> Result<Expr<AtomPrim>, SmartsError> {
        let mut parts = vec![self.atom_not()?];
        loop {
            match self.peek() {
                Some(b'&') => {
                    self.pos += 1;
                    parts.push(self.atom_not()?);
                }
                Some(b';' | b',' | b']') | None => break,
                _ => parts.push(self.atom_not()?),
            }
        }
        Ok(collapse(parts, Expr::And))
    }

    fn atom_not(&mut self) -> Result<Expr<AtomPrim>, SmartsError> {
        if self.peek() == Some(b'!') {
            self.pos += 1;
            return Ok(Expr::Not(Box::new(self.atom_not()?)));
        }
        Ok(Expr::Prim(self.atom_prim()?))
    }

    fn atom_prim(&mut self) -> Result<AtomPrim, SmartsError> {
        let c = self.peek().ok_or_else(|| self.error("unterminated atom"))?;
        match c {
            b'*' => {
                self.pos += 1;
                Ok(AtomPrim::Any)
            }
            b'a' => {
                self.pos += 1;
                Ok(AtomPrim::Aromatic(true))
            }
            b'A' => {
                self.pos += 1;
                Ok(AtomPrim::Aromatic(false))
            }
            b'#' => {
                self.pos += 1;
                let n = self.number().ok_or_else(|| self.error("expected atomic number"))?;
                Ok(AtomPrim::AtomicNumber(n as u8))
            }
            b'D' => {
                self.pos += 1;
                Ok(AtomPrim::Degree(self.number().unwrap_or(1) as u8))
            }
            b'H' => {
                self.pos += 1;
                Ok(AtomPrim::HCount(self.number().unwrap_or(1) as u8))
            }
            b'R' => {
                self.pos += 1;
                Ok(match self.number() {
                    None => AtomPrim::InRing(true),
                    Some(0) => AtomPrim::InRing(false),
                    Some(n) => AtomPrim::RingCount(n as u8),
                })
            }
            b'+' | b'-' => {
                self.pos += 1;
                let sign: i32 = if c == b'+' { 1 } else { -1 };
                let mag = match self.number() {
                    Some(n) => n as i32,
                    None => {
                        let mut m = 1;
                        while self.peek() == Some(c) {
                            self.pos += 1;
                            m += 1;
                        }
                        m
                    }
                };
                Ok(AtomPrim::Charge((sign * mag) as i8))
            }
            b'$' => {
                self.pos += 1;
                if self.peek() != Some(b'(') {
                    return Err(self.error("expected ( after $"));
                }
                self.pos += 1;
                let inner = self.pattern()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("unterminated recursive SMARTS"));
                }
                self.pos += 1;
                Ok(AtomPrim::Recursive(Box::new(inner)))
            }
            b'a'..=b'z' => {
                let two = self.text.get(self.pos..self.pos + 2);
                let (symbol, len) = match two {
                    Some(b"se") => ("Se", 2),
                    Some(b"as") => ("As", 2),
                    _ => match c {
                        b'c' => ("C", 1),
                        b'n' => ("N", 1),
                        b'o' => ("O", 1),
                        b's' => ("S", 1),
                        b'p' => ("P", 1),
                        b'b' => ("B", 1),
                        _ => return Err(self.error("unknown aromatic symbol")),
                    },
                };
                self.pos += len;
                let number = Element::from_symbol(symbol).unwrap().atomic_number();
                Ok(AtomPrim::Element { number, aromatic: true })
            }
            b'A'..=b'Z' => {
                let next = self.text.get(self.pos + 1).copied();
                if let Some(l) = next.filter(|l| l.is_ascii_lowercase()) {
                    let buf = [c, l];
                    if let Some(e) = core::str::from_utf8(&buf).ok().and_then(Element::from_symbol) {
                        self.pos += 2;
                        return Ok(AtomPrim::Element {
                            number: e.atomic_number(),
                            aromatic: false,
                        });
                    }
                }
                let buf = [c];
                let e = core::str::from_utf8(&buf)
                    .ok()
                    .and_then(Element::from_symbol)
                    .ok_or_else(|| self.error("unknown element"))?;
                self.pos += 1;
                Ok(AtomPrim::Element {
                    number: e.atomic_number(),
                    aromatic: false,
                })
            }
            _ => Err(self.error("unexpected character in atom")),
        }
    }

    fn bond_expr(&mut self) -> Result<Expr<BondPrim>, SmartsError> {
        let mut parts = vec![self.bond_or()?];
        while self.peek() == Some(b';') {
            self.pos += 1;
            parts.push(self.bond_or()?);
        }
        Ok(collapse(parts, Expr::And))
    }

    fn bond_or(&mut self) -> Result<Expr<BondPrim>, SmartsError> {
        let mut parts = vec![self.bond_and()?];
        while self.peek() == Some(b',') {
            self.pos += 1;
            parts.push(self.bond_and()?);
        }
        Ok(collapse(parts, Expr::Or))
    }

    fn bond_and(&mut self) -> Result<Expr<BondPrim>, SmartsError> {
        let mut parts = vec![self.bond_not()?];
        loop {
            match self.peek() {
                Some(b'&') => {
                    self.pos += 1;
                    parts.push(self.bond_not()?);
                }
                Some(c) if is_bond_primitive(c) || c == b'!' => parts.push(self.bond_not()?),
                _ => break,
            }
        }
        Ok(collapse(parts, Expr::And))
    }

    fn bond_not(&mut self) -> Result<Expr<BondPrim>, SmartsError> {
        if self.peek() == Some(b'!') {
            self.pos += 1;
            return Ok(Expr::Not(Box::new(self.bond_not()?)));
        }
        let c = self.peek().ok_or_else(|| self.error("dangling bond"))?;
        let prim = match c {
            b'-' => BondPrim::Order(BondOrder::Single),
            b'=' => BondPrim::Order(BondOrder::Double),
            b'#' => BondPrim::Order(BondOrder::Triple),
            b':' => BondPrim::Order(BondOrder::Aromatic),
            b'~' => BondPrim::Any,
            b'@' => BondPrim::Ring,
            _ => return Err(self.error("unexpected character in bond")),
        };
        self.pos += 1;
        Ok(Expr::Prim(prim))
    }
}

fn is_bond_primitive(c: u8) -> bool {
    matches!(c, b'-' | b'=' | b'#' | b':' | b'~' | b'@')
}

fn is_bond_start(c: u8) -> bool {
    is_bond_primitive(c) || c == b'!'
}

fn collapse<P>(mut parts: Vec<Expr<P>>, wrap: fn(Vec<Expr<P>>) -> Expr<P>) -> Expr<P> {
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        wrap(parts)
    }
}
