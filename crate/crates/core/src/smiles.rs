//! SMILES reading and writing.
//!
//! The reader covers the organic subset, bracket atoms for every element,
//! aromatic lowercase atoms, branches, ring closures (including `%nn`),
//! disconnected components, `@`/`@@` and `/`/`\` markers. The writer emits a
//! string for a given atom ranking; [`crate::canon`] supplies canonical
//! rankings.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::element::Element;
use crate::mol::{
    Atom, BondOrder, Chirality, DoubleBondConfig, DoubleBondStereo, MolBuilder, Molecule, StereoRef,
    TetrahedralStereo,
};
use crate::sanitize::SanitizeError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SmilesError {
    #[error("empty SMILES")]
    Empty,
    #[error("unexpected character {ch:?} at position {pos}")]
    UnexpectedChar { pos: usize, ch: char },
    #[error("unknown element at position {pos}")]
    UnknownElement { pos: usize },
    #[error("unbalanced parenthesis at position {pos}")]
    UnbalancedParenthesis { pos: usize },
    #[error("ring closure {digit} is never closed")]
    UnclosedRing { digit: u32 },
    #[error("conflicting bond symbols on ring closure {digit}")]
    RingBondConflict { digit: u32 },
    #[error("bond symbol without a following atom at position {pos}")]
    DanglingBond { pos: usize },
    #[error("malformed bracket atom at position {pos}")]
    BadBracket { pos: usize },
    #[error(transparent)]
    Sanitize(#[from] SanitizeError),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum BondSym {
    Order(BondOrder),
    Up,
    Down,
}

struct OpenRing {
    atom: usize,
    sym: Option<BondSym>,
    slot: usize,
}

/// Direction marks: `(bond, first atom as written, second atom)`.
type DirMark = (usize, usize, usize, bool);

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    builder: MolBuilder,
    nbr_order: Vec<Vec<StereoRef>>,
    chirality: Vec<Option<Chirality>>,
    rings: Vec<Option<OpenRing>>,
    marks: Vec<DirMark>,
}

pub fn parse_smiles(text: &str) -> Result<Molecule, SmilesError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(SmilesError::Empty);
    }
    let mut p = Parser {
        text: text.as_bytes(),
        pos: 0,
        builder: MolBuilder::new(),
        nbr_order: Vec::new(),
        chirality: Vec::new(),
        rings: (0..100).map(|_| None).collect(),
        marks: Vec::new(),
    };
    p.run()?;
    p.finish()
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn unexpected(&self) -> SmilesError {
        let ch = self.text.get(self.pos).map(|&c| c as char).unwrap_or('\0');
        SmilesError::UnexpectedChar { pos: self.pos, ch }
    }

    fn run(&mut self) -> Result<(), SmilesError> {
        let mut prev: Option<usize> = None;
        let mut branch_stack: Vec<(usize, usize)> = Vec::new();
        let mut pending: Option<(BondSym, usize)> = None;
        while let Some(c) = self.peek() {
            match c {
                b'(' => {
                    let Some(p) = prev else {
                        return Err(SmilesError::UnbalancedParenthesis { pos: self.pos });
                    };
                    if pending.is_some() {
                        return Err(self.unexpected());
                    }
                    branch_stack.push((p, self.pos));
                    self.pos += 1;
                }
                b')' => {
                    let Some((p, _)) = branch_stack.pop() else {
                        return Err(SmilesError::UnbalancedParenthesis { pos: self.pos });
                    };
                    if let Some((_, pos)) = pending {
                        return Err(SmilesError::DanglingBond { pos });
                    }
                    prev = Some(p);
                    self.pos += 1;
                }
                b'.' => {
                    if let Some((_, pos)) = pending {
                        return Err(SmilesError::DanglingBond { pos });
                    }
                    prev = None;
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if pending.is_some() || prev.is_none() {
                        return Err(self.unexpected());
                    }
                    let sym = match c {
                        b'-' => BondSym::Order(BondOrder::Single),
                        b'=' => BondSym::Order(BondOrder::Double),
                        b'#' => BondSym::Order(BondOrder::Triple),
                        b':' => BondSym::Order(BondOrder::Aromatic),
                        b'/' => BondSym::Up,
                        _ => BondSym::Down,
                    };
                    pending = Some((sym, self.pos));
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let Some(atom) = prev else {
                        return Err(self.unexpected());
                    };
                    let digit = self.ring_digit()?;
                    self.ring_bond(atom, digit, pending.take().map(|(s, _)| s))?;
                }
                _ => {
                    let atom = self.atom()?;
                    if let Some(p) = prev {
                        self.connect(p, atom, pending.take().map(|(s, _)| s));
                    } else if let Some((_, pos)) = pending {
                        return Err(SmilesError::DanglingBond { pos });
                    }
                    prev = Some(atom);
                }
            }
        }
        if let Some((_, pos)) = branch_stack.pop() {
            return Err(SmilesError::UnbalancedParenthesis { pos });
        }
        if let Some((_, pos)) = pending {
            return Err(SmilesError::DanglingBond { pos });
        }
        if let Some(digit) = self.rings.iter().position(|r| r.is_some()) {
            return Err(SmilesError::UnclosedRing { digit: digit as u32 });
        }
        Ok(())
    }

    fn ring_digit(&mut self) -> Result<usize, SmilesError> {
        let c = self.peek().unwrap();
        if c == b'%' {
            let d = self.text.get(self.pos + 1..self.pos + 3);
            match d {
                Some([a, b]) if a.is_ascii_digit() && b.is_ascii_digit() => {
                    self.pos += 3;
                    Ok(((a - b'0') * 10 + (b - b'0')) as usize)
                }
                _ => Err(self.unexpected()),
            }
        } else {
            self.pos += 1;
            Ok((c - b'0') as usize)
        }
    }

    fn default_order(&self, a: usize, b: usize) -> BondOrder {
        if self.builder.atoms[a].atom.aromatic && self.builder.atoms[b].atom.aromatic {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        }
    }

    fn add_bond(&mut self, a: usize, b: usize, sym: Option<BondSym>) -> usize {
        let order = match sym {
            Some(BondSym::Order(o)) => o,
            Some(BondSym::Up | BondSym::Down) => BondOrder::Single,
            None => self.default_order(a, b),
        };
        let bond = self.builder.add_bond(a, b, order);
        if let Some(s @ (BondSym::Up | BondSym::Down)) = sym {
            self.marks.push((bond, a, b, s == BondSym::Up));
        }
        bond
    }

    fn connect(&mut self, a: usize, b: usize, sym: Option<BondSym>) {
        self.add_bond(a, b, sym);
        self.nbr_order[a].push(StereoRef::Atom(b));
        // The preceding atom always comes first in b's ordering; b's own
        // implicit H (if any) was placed when b was read.
        self.nbr_order[b].insert(0, StereoRef::Atom(a));
    }

    fn ring_bond(&mut self, atom: usize, digit: usize, sym: Option<BondSym>) -> Result<(), SmilesError> {
        match self.rings[digit].take() {
            None => {
                let slot = self.nbr_order[atom].len();
                self.nbr_order[atom].push(StereoRef::Atom(usize::MAX));
                self.rings[digit] = Some(OpenRing { atom, sym, slot });
            }
            Some(open) => {
                if open.atom == atom
                    || self.builder.bonds.iter().any(|b| b.contains(atom) && b.contains(open.atom))
                {
                    return Err(SmilesError::RingBondConflict { digit: digit as u32 });
                }
                let directional = |s: Option<BondSym>| matches!(s, Some(BondSym::Up | BondSym::Down));
                // A marker is read from the atom it is written on towards the partner.
                match (open.sym, sym) {
                    (Some(a), Some(b)) if a != b && !(directional(Some(a)) && directional(Some(b))) => {
                        return Err(SmilesError::RingBondConflict { digit: digit as u32 });
                    }
                    (Some(a), _) => {
                        self.add_bond(open.atom, atom, Some(a));
                    }
                    (None, b) => {
                        self.add_bond(atom, open.atom, b);
                    }
                }
                self.finish_ring(open.atom, open.slot, atom);
            }
        }
        Ok(())
    }

    fn finish_ring(&mut self, opener: usize, slot: usize, closer: usize) {
        self.nbr_order[opener][slot] = StereoRef::Atom(closer);
        self.nbr_order[closer].push(StereoRef::Atom(opener));
    }

    fn atom(&mut self) -> Result<usize, SmilesError> {
        let start = self.pos;
        let c = self.peek().unwrap();
        if c == b'[' {
            return self.bracket_atom();
        }
        let (element, aromatic, len) = match c {
            b'*' => (Element::WILDCARD, false, 1),
            b'B' if self.text.get(self.pos + 1) == Some(&b'r') => (Element::BR, false, 2),
            b'C' if self.text.get(self.pos + 1) == Some(&b'l') => (Element::CL, false, 2),
            b'B' => (Element::B, false, 1),
            b'C' => (Element::C, false, 1),
            b'N' => (Element::N, false, 1),
            b'O' => (Element::O, false, 1),
            b'P' => (Element::P, false, 1),
            b'S' => (Element::S, false, 1),
            b'F' => (Element::F, false, 1),
            b'I' => (Element::I, false, 1),
            b'b' => (Element::B, true, 1),
            b'c' => (Element::C, true, 1),
            b'n' => (Element::N, true, 1),
            b'o' => (Element::O, true, 1),
            b'p' => (Element::P, true, 1),
            b's' => (Element::S, true, 1),
            c if c.is_ascii_alphabetic() => return Err(SmilesError::UnknownElement { pos: start }),
            _ => return Err(self.unexpected()),
        };
        self.pos += len;
        let mut atom = Atom::new(element);
        atom.aromatic = aromatic;
        let index = self.builder.add_atom_auto_h(atom);
        self.nbr_order.push(Vec::new());
        self.chirality.push(None);
        Ok(index)
    }

    fn number(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return None;
        }
        core::str::from_utf8(&self.text[start..self.pos]).ok()?.parse().ok()
    }

    fn bracket_atom(&mut self) -> Result<usize, SmilesError> {
        let open = self.pos;
        let bad = SmilesError::BadBracket { pos: open };
        self.pos += 1;
        let isotope = self.number();
        let sym_start = self.pos;
        let (element, aromatic) = if self.peek() == Some(b'*') {
            self.pos += 1;
            (Element::WILDCARD, false)
        } else {
            let first = self.peek().ok_or(bad.clone())?;
            if !first.is_ascii_alphabetic() {
                return Err(bad);
            }
            if first.is_ascii_lowercase() {
                // aromatic symbols: two-letter forms first
                let two = self.text.get(self.pos..self.pos + 2);
                let (el, len) = match two {
                    Some(b"se") => (Element::from_symbol("Se"), 2),
                    Some(b"as") => (Element::from_symbol("As"), 2),
                    Some(b"te") => (Element::from_symbol("Te"), 2),
                    _ => {
                        let upper = [first.to_ascii_uppercase()];
                        let s = core::str::from_utf8(&upper).unwrap();
                        (Element::from_symbol(s), 1)
                    }
                };
                let el = el.filter(|e| e.can_be_aromatic()).ok_or(SmilesError::UnknownElement { pos: sym_start })?;
                self.pos += len;
                (el, true)
            } else {
                let second = self.text.get(self.pos + 1).copied();
                let two = second
                    .filter(|c| c.is_ascii_lowercase())
                    .and_then(|c| {
                        let buf = [first, c];
                        Element::from_symbol(core::str::from_utf8(&buf).ok()?)
                    });
                if let Some(el) = two {
                    self.pos += 2;
                    (el, false)
                } else {
                    let buf = [first];
                    let el = Element::from_symbol(core::str::from_utf8(&buf).unwrap())
                        .ok_or(SmilesError::UnknownElement { pos: sym_start })?;
                    self.pos += 1;
                    (el, false)
                }
            }
        };
        let mut chirality = None;
        if self.peek() == Some(b'@') {
            self.pos += 1;
            if self.peek() == Some(b'@') {
                self.pos += 1;
                chirality = Some(Chirality::Clockwise);
            } else {
                chirality = Some(Chirality::Anticlockwise);
            }
        }
        let mut hydrogens = 0u8;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            hydrogens = match self.number() {
                Some(n) if n <= 9 => n as u8,
                Some(_) => return Err(bad),
                None => 1,
            };
        }
        let mut charge: i32 = 0;
        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            let unit = if sign == b'+' { 1 } else { -1 };
            self.pos += 1;
            if let Some(n) = self.number() {
                charge = unit * n as i32;
            } else {
                charge = unit;
                while self.peek() == Some(sign) {
                    self.pos += 1;
                    charge += unit;
                }
            }
            if !(-8..=8).contains(&charge) {
                return Err(bad);
            }
        }
        if self.peek() == Some(b':') {
            self.pos += 1;
            self.number().ok_or(bad.clone())?;
        }
        if self.peek() != Some(b']') {
            return Err(bad);
        }
        self.pos += 1;
        let mut atom = Atom::new(element);
        atom.aromatic = aromatic;
        atom.charge = charge as i8;
        atom.hydrogens = hydrogens;
        atom.isotope = match isotope {
            Some(v) if v <= u16::MAX as u32 => Some(v as u16),
            Some(_) => return Err(bad),
            None => None,
        };
        let index = self.builder.add_atom(atom);
        let mut order = Vec::new();
        if chirality.is_some() && hydrogens > 0 {
            order.push(StereoRef::ImplicitH);
        }
        self.nbr_order.push(order);
        self.chirality.push(chirality);
        Ok(index)
    }

    fn finish(mut self) -> Result<Molecule, SmilesError> {
        for (i, chir) in self.chirality.iter().enumerate() {
            if let Some(c) = *chir {
                let order = core::mem::take(&mut self.nbr_order[i]);
                if order.len() >= 3 && order.len() <= 4 {
                    self.builder.atom_mut(i).stereo = Some(TetrahedralStereo { chirality: c, order });
                }
            }
        }
        self.assign_double_bond_stereo();
        Ok(self.builder.build()?)
    }

    fn assign_double_bond_stereo(&mut self) {
        if self.marks.is_empty() {
            return;
        }
        // up[(bond, atom)] = is the other end "up" relative to `atom`
        let side = |marks: &[DirMark], bond: usize, from: usize| -> Option<(usize, bool)> {
            marks.iter().find(|m| m.0 == bond).map(|&(_, first, second, up)| {
                if first == from {
                    (second, up)
                } else {
                    (first, !up)
                }
            })
        };
        let bonds = self.builder.bonds.clone();
        for (bi, bond) in bonds.iter().enumerate() {
            if bond.order != BondOrder::Double {
                continue;
            }
            // Relative position of a marked neighbor x seen from atom u:
            // "x up relative to u" is the negation of "u up relative to x".
            let find = |u: usize, v: usize| -> Option<(usize, bool)> {
                bonds.iter().enumerate().find_map(|(j, b)| {
                    if j == bi || !b.contains(u) || b.contains(v) {
                        return None;
                    }
                    let x = b.other(u);
                    side(&self.marks, j, x).map(|(_, u_up)| (x, !u_up))
                })
            };
            if let (Some((x, x_up)), Some((y, y_up))) = (find(bond.begin, bond.end), find(bond.end, bond.begin)) {
                let config = if x_up == y_up {
                    DoubleBondConfig::Cis
                } else {
                    DoubleBondConfig::Trans
                };
                self.builder.bond_mut(bi).stereo = Some(DoubleBondStereo {
                    begin_ref: x,
                    end_ref: y,
                    config,
                });
            }
        }
    }
}

/// Options for [`write_ranked`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WriteOptions {
    /// Emit `@`/`@@` and `/`/`\` markers.
    pub isomeric: bool,
    /// Write wildcard labels (`[1*]`); when false every wildcard is `*`.
    pub wildcard_labels: bool,
}

fn default_hydrogens(mol: &Molecule, atom: usize) -> Option<u8> {
    let a = mol.atom(atom);
    let valences = a.element.default_valences()?;
    let explicit: u32 = mol.neighbors(atom).iter().map(|&(_, b)| mol.bond(b).order.valence()).sum();
    if a.aromatic {
        return Some((valences[0] as u32).saturating_sub(explicit + 1) as u8);
    }
    Some(match valences.iter().find(|&&v| v as u32 >= explicit) {
        Some(&v) => (v as u32 - explicit) as u8,
        None => 0,
    })
}

fn write_atom(out: &mut String, mol: &Molecule, index: usize, chirality: Option<Chirality>, opts: WriteOptions) {
    let atom = mol.atom(index);
    let isotope = if atom.is_wildcard() && !opts.wildcard_labels {
        None
    } else {
        atom.isotope
    };
    let symbol = atom.element.symbol();
    let organic = atom.element.is_organic_subset()
        && atom.charge == 0
        && isotope.is_none()
        && chirality.is_none()
        && if atom.is_wildcard() {
            atom.hydrogens == 0
        } else {
            default_hydrogens(mol, index) == Some(atom.hydrogens)
        };
    let push_symbol = |out: &mut String| {
        if atom.aromatic {
            for ch in symbol.chars() {
                out.push(ch.to_ascii_lowercase());
            }
        } else {
            out.push_str(symbol);
        }
    };
    if organic {
        push_symbol(out);
        return;
    }
    out.push('[');
    if let Some(iso) = isotope {
        let _ = write!(out, "{iso}");
    }
    push_symbol(out);
    match chirality {
        Some(Chirality::Anticlockwise) => out.push('@'),
        Some(Chirality::Clockwise) => out.push_str("@@"),
        None => {}
    }
    match atom.hydrogens {
        0 => {}
        1 => out.push('H'),
        h => {
            let _ = write!(out, "H{h}");
        }
    }
    match atom.charge {
        0 => {}
        1 => out.push('+'),
        -1 => out.push('-'),
        q if q > 0 => {
            let _ = write!(out, "+{q}");
        }
        q => {
            let _ = write!(out, "-{}", -q);
        }
    }
    out.push(']');
}

fn bond_symbol(out: &mut String, mol: &Molecule, bond: usize, dir: Option<char>) {
    let b = mol.bond(bond);
    match b.order {
        BondOrder::Single => {
            if let Some(c) = dir {
                out.push(c);
            } else if mol.atom(b.begin).aromatic && mol.atom(b.end).aromatic {
                out.push('-');
            }
        }
        BondOrder::Double => out.push('='),
        BondOrder::Triple => out.push('#'),
        BondOrder::Aromatic => {}
    }
}

fn push_ring_digit(out: &mut String, d: usize) {
    if d < 10 {
        out.push((b'0' + d as u8) as char);
    } else {
        let _ = write!(out, "%{d:02}");
    }
}

/// Sign of the permutation taking `from` to `to` (both the same multiset).
fn permutation_is_odd(from: &[StereoRef], to: &[StereoRef]) -> Option<bool> {
    if from.len() != to.len() {
        return None;
    }
    let mut idx: Vec<usize> = Vec::with_capacity(to.len());
    for t in to {
        idx.push(from.iter().position(|f| f == t)?);
    }
    let mut odd = false;
    let mut seen = vec![false; idx.len()];
    for start in 0..idx.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut j = start;
        while !seen[j] {
            seen[j] = true;
            j = idx[j];
            len += 1;
        }
        if len % 2 == 0 {
            odd = !odd;
        }
    }
    Some(odd)
}

/// Writes `mol` starting each component at its lowest-ranked atom and
/// visiting neighbors in ascending rank. `ranks` must be a permutation of
/// `0..n`.
pub fn write_ranked(mol: &Molecule, ranks: &[usize], opts: WriteOptions) -> String {
    write_ranked_with_order(mol, ranks, opts).0
}

/// Like [`write_ranked`], also returning the atoms in the order written.
pub(crate) fn write_ranked_with_order(mol: &Molecule, ranks: &[usize], opts: WriteOptions) -> (String, Vec<usize>) {
    let n = mol.atom_count();
    let mut out = String::new();
    if n == 0 {
        return (out, Vec::new());
    }
    // Pass 1: DFS spanning forest, ring-closure bonds and visit order.
    let mut visited = vec![false; n];
    let mut parent_bond = vec![usize::MAX; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut ring_bonds_at: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut is_ring_bond = vec![false; mol.bonds().len()];
    let mut sorted_nbrs: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|a| {
            let mut v = mol.neighbors(a).to_vec();
            v.sort_by_key(|&(x, _)| ranks[x]);
            v
        })
        .collect();
    let mut roots: Vec<usize> = Vec::new();
    let mut by_rank: Vec<usize> = (0..n).collect();
    by_rank.sort_by_key(|&a| ranks[a]);
    for &root in &by_rank {
        if visited[root] {
            continue;
        }
        roots.push(root);
        visited[root] = true;
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(&mut (a, ref mut pos)) = stack.last_mut() {
            if *pos >= sorted_nbrs[a].len() {
                stack.pop();
                continue;
            }
            let (w, b) = sorted_nbrs[a][*pos];
            *pos += 1;
            if b == parent_bond[a] {
                continue;
            }
            if visited[w] {
                if !is_ring_bond[b] {
                    is_ring_bond[b] = true;
                    ring_bonds_at[a].push(b);
                    ring_bonds_at[w].push(b);
                }
                continue;
            }
            visited[w] = true;
            parent_bond[w] = b;
            children[a].push(w);
            stack.push((w, 0));
        }
    }
    sorted_nbrs.clear();

    // Visit order, needed to decide which ring-closure end comes first.
    let mut position = vec![0usize; n];
    let mut written_order = Vec::with_capacity(n);
    {
        let mut counter = 0;
        for &root in &roots {
            let mut stack = vec![root];
            while let Some(a) = stack.pop() {
                position[a] = counter;
                written_order.push(a);
                counter += 1;
                for &c in children[a].iter().rev() {
                    stack.push(c);
                }
            }
        }
    }

    let dir_marks = if opts.isomeric {
        double_bond_marks(mol, &parent_bond, &is_ring_bond, &position)
    } else {
        Vec::new()
    };
    let dir_for = |bond: usize, first: usize| -> Option<char> {
        dir_marks.iter().find(|m| m.0 == bond).map(|&(_, low, high_up)| {
            // high_up: the higher-position atom is up relative to `low`.
            let second_up = if first == low { high_up } else { !high_up };
            if second_up {
                '/'
            } else {
                '\\'
            }
        })
    };

    // Pass 2: emit.
    let mut digit_of_bond = vec![usize::MAX; mol.bonds().len()];
    let mut digits_in_use = [false; 100];
    for (ci, &root) in roots.iter().enumerate() {
        if ci > 0 {
            out.push('.');
        }
        // (atom, stage) stage 0 = write atom, then children
        enum Step {
            Atom(usize),
            Open,
            Close,
        }
        let mut stack = vec![Step::Atom(root)];
        while let Some(step) = stack.pop() {
            let a = match step {
                Step::Open => {
                    out.push('(');
                    continue;
                }
                Step::Close => {
                    out.push(')');
                    continue;
                }
                Step::Atom(a) => a,
            };
            let pb = parent_bond[a];
            if pb != usize::MAX {
                let p = mol.bond(pb).other(a);
                bond_symbol(&mut out, mol, pb, dir_for(pb, p));
            }
            // Ring closures: closings first, then openings by partner rank.
            let mut closings: Vec<usize> = Vec::new();
            let mut openings: Vec<usize> = Vec::new();
            for &b in &ring_bonds_at[a] {
                let other = mol.bond(b).other(a);
                if position[other] < position[a] {
                    closings.push(b);
                } else {
                    openings.push(b);
                }
            }
            closings.sort_by_key(|&b| digit_of_bond[b]);
            openings.sort_by_key(|&b| ranks[mol.bond(b).other(a)]);

            // Stereo neighbor order as written.
            let chirality = if opts.isomeric {
                mol.atom(a).stereo.as_ref().and_then(|st| {
                    let mut written: Vec<StereoRef> = Vec::new();
                    if pb != usize::MAX {
                        written.push(StereoRef::Atom(mol.bond(pb).other(a)));
                    }
                    if mol.atom(a).hydrogens > 0 {
                        written.push(StereoRef::ImplicitH);
                    }
                    for &b in closings.iter().chain(openings.iter()) {
                        written.push(StereoRef::Atom(mol.bond(b).other(a)));
                    }
                    for &c in &children[a] {
                        written.push(StereoRef::Atom(c));
                    }
                    permutation_is_odd(&st.order, &written).map(|odd| {
                        if odd {
                            st.chirality.inverted()
                        } else {
                            st.chirality
                        }
                    })
                })
            } else {
                None
            };
            write_atom(&mut out, mol, a, chirality, opts);

            let mut closed_here: Vec<usize> = Vec::new();
            for &b in &closings {
                let d = digit_of_bond[b];
                bond_symbol(&mut out, mol, b, dir_for(b, a));
                push_ring_digit(&mut out, d);
                digits_in_use[d] = false;
                closed_here.push(d);
            }
            for &b in &openings {
                let d = (1..100)
                    .find(|&d| !digits_in_use[d] && !closed_here.contains(&d))
                    .unwrap_or(0);
                digits_in_use[d] = true;
                digit_of_bond[b] = d;
                // Bond symbol is written at the closing end.
                push_ring_digit(&mut out, d);
            }
            let kids = &children[a];
            for (i, &c) in kids.iter().enumerate().rev() {
                if i + 1 < kids.len() {
                    stack.push(Step::Close);
                    stack.push(Step::Atom(c));
                    stack.push(Step::Open);
                } else {
                    stack.push(Step::Atom(c));
                }
            }
        }
    }
    (out, written_order)
}

/// Direction marks for stereo double bonds, as `(bond, low, high_up)` where
/// `low` is the endpoint written first and `high_up` says whether the other
/// endpoint is "up" relative to it. Conflicting requirements drop the
/// annotation.
fn double_bond_marks(
    mol: &Molecule,
    parent_bond: &[usize],
    is_ring_bond: &[bool],
    position: &[usize],
) -> Vec<(usize, usize, bool)> {
    let _ = (parent_bond, is_ring_bond);
    let mut marks: Vec<(usize, usize, bool)> = Vec::new();
    for (bi, bond) in mol.bonds().iter().enumerate() {
        let Some(st) = bond.stereo else { continue };
        if bond.order != BondOrder::Double {
            continue;
        }
        let (u, v) = (bond.begin, bond.end);
        let (Some(bx), Some(by)) = (mol.bond_between(u, st.begin_ref), mol.bond_between(v, st.end_ref)) else {
            continue;
        };
        if mol.bond(bx).order != BondOrder::Single || mol.bond(by).order != BondOrder::Single {
            continue;
        }
        let x = st.begin_ref;
        let y = st.end_ref;
        // "x up relative to u" as the reference; y must be on the same side for cis.
        let get = |marks: &[(usize, usize, bool)], b: usize, center: usize, nbr: usize| -> Option<bool> {
            marks.iter().find(|m| m.0 == b).map(|&(_, low, high_up)| {
                // nbr up relative to center
                if low == center {
                    high_up
                } else {
                    debug_assert_eq!(low, nbr);
                    !high_up
                }
            })
        };
        let want_same = st.config == DoubleBondConfig::Cis;
        let x_up = get(&marks, bx, u, x);
        let y_up = get(&marks, by, v, y);
        let (x_up, y_up) = match (x_up, y_up) {
            (None, None) => (true, want_same),
            (Some(xu), None) => (xu, if want_same { xu } else { !xu }),
            (None, Some(yu)) => (if want_same { yu } else { !yu }, yu),
            (Some(xu), Some(yu)) => {
                if (xu == yu) != want_same {
                    continue;
                }
                (xu, yu)
            }
        };
        let mut set = |b: usize, center: usize, nbr: usize, nbr_up: bool| {
            if marks.iter().any(|m| m.0 == b) {
                return;
            }
            let low = if position[center] < position[nbr] { center } else { nbr };
            let high_up = if low == center { nbr_up } else { !nbr_up };
            marks.push((b, low, high_up));
        };
        set(bx, u, x, x_up);
        set(by, v, y, y_up);
        let _ = bi;
    }
    marks
}
