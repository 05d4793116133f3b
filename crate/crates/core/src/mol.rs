//! Attributed molecular graph.
//!
//! A [`Molecule`] is only ever produced by sanitization (see
//! [`MolBuilder::build`]), so every instance satisfies the graph and
//! valence invariants. Molecules are immutable; operations that change the
//! graph build a new one.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::element::Element;
use crate::rings::RingInfo;
use crate::sanitize::{self, SanitizeError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Contribution to an atom's explicit valence. Aromatic bonds count
    /// one; the extra pi electron is handled by the aromatic valence rules.
    pub fn valence(self) -> u32 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

/// `@` is anticlockwise, `@@` clockwise, looking from the first neighbor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Chirality {
    Anticlockwise,
    Clockwise,
}

impl Chirality {
    pub fn inverted(self) -> Chirality {
        match self {
            Chirality::Anticlockwise => Chirality::Clockwise,
            Chirality::Clockwise => Chirality::Anticlockwise,
        }
    }
}

/// One entry of the neighbor ordering a tetrahedral annotation refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StereoRef {
    Atom(usize),
    ImplicitH,
}

/// Tetrahedral parity relative to an explicit neighbor ordering, so the
/// annotation survives renumbering and neighbor substitution.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TetrahedralStereo {
    pub chirality: Chirality,
    pub order: Vec<StereoRef>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DoubleBondConfig {
    Cis,
    Trans,
}

/// Cis/trans relation between one reference neighbor on each end of a
/// double bond.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DoubleBondStereo {
    pub begin_ref: usize,
    pub end_ref: usize,
    pub config: DoubleBondConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub element: Element,
    pub charge: i8,
    /// Mass number. On wildcard atoms the isotope doubles as the
    /// attachment label (`[1*]`, `[2*]`); `None` means unlabeled.
    pub isotope: Option<u16>,
    pub aromatic: bool,
    pub hydrogens: u8,
    pub stereo: Option<TetrahedralStereo>,
}

impl Atom {
    pub fn new(element: Element) -> Atom {
        Atom {
            element,
            charge: 0,
            isotope: None,
            aromatic: false,
            hydrogens: 0,
            stereo: None,
        }
    }

    pub fn wildcard(label: Option<u16>) -> Atom {
        Atom {
            isotope: label,
            ..Atom::new(Element::WILDCARD)
        }
    }

    pub fn is_wildcard(&self) -> bool {
        self.element.is_wildcard()
    }

    /// Heavy atoms exclude hydrogen and wildcard attachment points.
    pub fn is_heavy(&self) -> bool {
        !self.element.is_hydrogen() && !self.element.is_wildcard()
    }

    pub fn mass(&self) -> f64 {
        let own = match self.isotope {
            Some(mass_number) if !self.is_wildcard() => mass_number as f64,
            _ => self.element.mass(),
        };
        own + self.hydrogens as f64 * crate::element::HYDROGEN_MASS
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bond {
    pub begin: usize,
    pub end: usize,
    pub order: BondOrder,
    pub stereo: Option<DoubleBondStereo>,
}

impl Bond {
    pub fn new(begin: usize, end: usize, order: BondOrder) -> Bond {
        Bond {
            begin,
            end,
            order,
            stereo: None,
        }
    }

    pub fn other(&self, atom: usize) -> usize {
        if atom == self.begin {
            self.end
        } else {
            self.begin
        }
    }

    pub fn contains(&self, atom: usize) -> bool {
        self.begin == atom || self.end == atom
    }
}

/// A sanitized molecular graph.
#[derive(Clone, Debug)]
pub struct Molecule {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(usize, usize)>>,
    rings: RingInfo,
    name: Option<String>,
}

impl PartialEq for Molecule {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms && self.bonds == other.bonds && self.name == other.name
    }
}

impl Molecule {
    pub(crate) fn from_parts(atoms: Vec<Atom>, bonds: Vec<Bond>, rings: RingInfo) -> Molecule {
        let adjacency = build_adjacency(atoms.len(), &bonds);
        Molecule {
            atoms,
            bonds,
            adjacency,
            rings,
            name: None,
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, index: usize) -> &Atom {
        &self.atoms[index]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn bond(&self, index: usize) -> &Bond {
        &self.bonds[index]
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.is_heavy()).count()
    }

    pub fn wildcard_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.is_wildcard()).count()
    }

    /// `(neighbor atom, bond index)` pairs in bond insertion order.
    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a]
            .iter()
            .find(|&&(n, _)| n == b)
            .map(|&(_, bond)| bond)
    }

    pub fn rings(&self) -> &RingInfo {
        &self.rings
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn with_name(mut self, name: Option<String>) -> Molecule {
        self.name = name;
        self
    }

    /// Sets the attachment label of a wildcard atom; panics on other atoms.
    pub fn set_wildcard_label(&mut self, atom: usize, label: Option<u16>) {
        assert!(self.atoms[atom].is_wildcard(), "atom {atom} is not a wildcard");
        self.atoms[atom].isotope = label;
    }

    pub fn has_stereo(&self) -> bool {
        self.atoms.iter().any(|a| a.stereo.is_some()) || self.bonds.iter().any(|b| b.stereo.is_some())
    }

    /// Copy with every stereo annotation removed.
    pub fn without_stereo(&self) -> Molecule {
        let mut out = self.clone();
        for atom in &mut out.atoms {
            atom.stereo = None;
        }
        for bond in &mut out.bonds {
            bond.stereo = None;
        }
        out
    }

    /// Renumber atoms: atom `i` of `self` becomes atom `perm[i]` of the
    /// result. Bonds are re-emitted in ascending order of their new
    /// endpoints, so both atom and bond order change.
    pub fn permuted(&self, perm: &[usize]) -> Molecule {
        assert_eq!(perm.len(), self.atoms.len(), "permutation length mismatch");
        let mut atoms = vec![Atom::new(Element::C); self.atoms.len()];
        for (old, atom) in self.atoms.iter().enumerate() {
            let mut atom = atom.clone();
            if let Some(stereo) = atom.stereo.as_mut() {
                remap_refs(&mut stereo.order, |a| Some(perm[a]));
            }
            atoms[perm[old]] = atom;
        }
        let mut bonds: Vec<(usize, Bond)> = self
            .bonds
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let mut nb = b.clone();
                nb.begin = perm[b.begin];
                nb.end = perm[b.end];
                if let Some(s) = nb.stereo.as_mut() {
                    s.begin_ref = perm[s.begin_ref];
                    s.end_ref = perm[s.end_ref];
                }
                (i, nb)
            })
            .collect();
        bonds.sort_by_key(|(_, b)| (b.begin.min(b.end), b.begin.max(b.end)));
        let bond_perm: Vec<usize> = {
            let mut p = vec![0; bonds.len()];
            for (new, (old, _)) in bonds.iter().enumerate() {
                p[*old] = new;
            }
            p
        };
        let rings = self.rings.remapped(&|a| Some(perm[a]), &|b| Some(bond_perm[b]), atoms.len(), bonds.len());
        let mut out = Molecule::from_parts(atoms, bonds.into_iter().map(|(_, b)| b).collect(), rings);
        out.name = self.name.clone();
        out
    }

    /// Builder seeded with this molecule's atoms and bonds; hydrogen counts
    /// are kept as they are.
    pub fn to_builder(&self) -> MolBuilder {
        MolBuilder {
            atoms: self.atoms.iter().cloned().map(|atom| AtomSpec { atom, auto_h: false }).collect(),
            bonds: self.bonds.clone(),
        }
    }

    /// Subgraph with atoms `keep` (in that order) followed by `extra_atoms`.
    /// `map[old]` gives the new index of every parent atom that should
    /// appear (usize::MAX otherwise); a parent atom outside `keep` may be
    /// mapped onto one of the extra atoms, which then takes over its bonds
    /// and stereo references. Ring information is carried over from the
    /// parent, so no ring may pass through a dropped bond.
    pub(crate) fn extract(&self, keep: &[usize], extra_atoms: Vec<Atom>, map: &[usize]) -> Molecule {
        let lookup = |a: usize| if map[a] == usize::MAX { None } else { Some(map[a]) };
        let mut atoms: Vec<Atom> = keep.iter().map(|&i| self.atoms[i].clone()).collect();
        atoms.extend(extra_atoms);
        let mut bond_map = vec![usize::MAX; self.bonds.len()];
        let mut bonds = Vec::with_capacity(atoms.len() + 4);
        for (i, b) in self.bonds.iter().enumerate() {
            if let (Some(x), Some(y)) = (lookup(b.begin), lookup(b.end)) {
                let mut nb = b.clone();
                nb.begin = x;
                nb.end = y;
                if let Some(s) = nb.stereo {
                    nb.stereo = match (lookup(s.begin_ref), lookup(s.end_ref)) {
                        (Some(br), Some(er)) => Some(DoubleBondStereo {
                            begin_ref: br,
                            end_ref: er,
                            ..s
                        }),
                        _ => None,
                    };
                }
                bond_map[i] = bonds.len();
                bonds.push(nb);
            }
        }
        for atom in atoms.iter_mut().take(keep.len()) {
            if let Some(stereo) = atom.stereo.as_mut() {
                remap_refs(&mut stereo.order, lookup);
            }
        }
        let bl = |b: usize| if bond_map[b] == usize::MAX { None } else { Some(bond_map[b]) };
        let rings = self.rings.remapped(&lookup, &bl, atoms.len(), bonds.len());
        Molecule::from_parts(atoms, bonds, rings)
    }

    /// Connected components as sorted atom index lists, ordered by their
    /// smallest atom.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.atoms.len()];
        let mut out = Vec::new();
        for start in 0..self.atoms.len() {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut head = 0;
            while head < comp.len() {
                let a = comp[head];
                head += 1;
                for &(n, _) in &self.adjacency[a] {
                    if !seen[n] {
                        seen[n] = true;
                        comp.push(n);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Rewrites atom references in a stereo neighbor list; references to
/// atoms that no longer exist are left pointing at `usize::MAX`, which the
/// writer treats as "annotation lost".
pub(crate) fn remap_refs(order: &mut [StereoRef], f: impl Fn(usize) -> Option<usize>) {
    for r in order.iter_mut() {
        if let StereoRef::Atom(a) = *r {
            *r = StereoRef::Atom(f(a).unwrap_or(usize::MAX));
        }
    }
}

pub(crate) fn build_adjacency(n: usize, bonds: &[Bond]) -> Vec<Vec<(usize, usize)>> {
    let mut adjacency = vec![Vec::new(); n];
    for (i, b) in bonds.iter().enumerate() {
        adjacency[b.begin].push((b.end, i));
        adjacency[b.end].push((b.begin, i));
    }
    adjacency
}

/// An atom awaiting sanitization. `auto_h` atoms get their hydrogen count
/// from the default valence model (unbracketed SMILES atoms).
#[derive(Clone, Debug)]
pub struct AtomSpec {
    pub atom: Atom,
    pub auto_h: bool,
}

/// Mutable graph under construction.
#[derive(Clone, Debug, Default)]
pub struct MolBuilder {
    pub(crate) atoms: Vec<AtomSpec>,
    pub(crate) bonds: Vec<Bond>,
}

impl MolBuilder {
    pub fn new() -> MolBuilder {
        MolBuilder::default()
    }

    pub fn add_atom(&mut self, atom: Atom) -> usize {
        self.atoms.push(AtomSpec { atom, auto_h: false });
        self.atoms.len() - 1
    }

    /// Adds an atom whose hydrogen count will be derived from its valence.
    pub fn add_atom_auto_h(&mut self, atom: Atom) -> usize {
        self.atoms.push(AtomSpec { atom, auto_h: true });
        self.atoms.len() - 1
    }

    pub fn add_bond(&mut self, begin: usize, end: usize, order: BondOrder) -> usize {
        self.bonds.push(Bond::new(begin, end, order));
        self.bonds.len() - 1
    }

    pub fn atom_mut(&mut self, index: usize) -> &mut Atom {
        &mut self.atoms[index].atom
    }

    pub fn bond_mut(&mut self, index: usize) -> &mut Bond {
        &mut self.bonds[index]
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// Runs the full sanitization pipeline: graph checks, ring perception,
    /// implicit hydrogens, valence checks and aromaticity perception.
    pub fn build(self) -> Result<Molecule, SanitizeError> {
        sanitize::sanitize(self)
    }
}
