//! Sanitization: the only path from a [`MolBuilder`] to a [`Molecule`].

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::mol::{build_adjacency, Atom, Bond, BondOrder, MolBuilder, Molecule};
use crate::rings;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SanitizeError {
    #[error("bond {bond} references a missing atom")]
    MissingAtom { bond: usize },
    #[error("atom {atom} is bonded to itself")]
    SelfBond { atom: usize },
    #[error("atoms {begin} and {end} are bonded twice")]
    DuplicateBond { begin: usize, end: usize },
    #[error("atom {atom} ({symbol}) has valence {valence}, above the allowed maximum")]
    Valence {
        atom: usize,
        symbol: &'static str,
        valence: u32,
    },
    #[error("aromatic atom {atom} is not in a ring")]
    AromaticOutsideRing { atom: usize },
    #[error("aromatic bond {bond} joins a non-aromatic atom")]
    AromaticBondMismatch { bond: usize },
}

pub(crate) fn sanitize(builder: MolBuilder) -> Result<Molecule, SanitizeError> {
    let MolBuilder { atoms: specs, mut bonds } = builder;
    let n = specs.len();
    check_graph(n, &bonds)?;
    let ring_info = rings::perceive(n, &bonds);

    // Aromatic bonds outside rings (e.g. the biaryl bond in "c1ccccc1c1ccccc1")
    // are single bonds.
    for (i, bond) in bonds.iter_mut().enumerate() {
        if bond.order == BondOrder::Aromatic {
            if !specs[bond.begin].atom.aromatic || !specs[bond.end].atom.aromatic {
                return Err(SanitizeError::AromaticBondMismatch { bond: i });
            }
            if !ring_info.bond_in_ring(i) {
                bond.order = BondOrder::Single;
            }
        }
    }
    for (i, spec) in specs.iter().enumerate() {
        if spec.atom.aromatic && !ring_info.atom_in_ring(i) {
            return Err(SanitizeError::AromaticOutsideRing { atom: i });
        }
    }

    let adjacency = build_adjacency(n, &bonds);
    let explicit: Vec<u32> = (0..n)
        .map(|a| adjacency[a].iter().map(|&(_, b)| bonds[b].order.valence()).sum())
        .collect();

    let mut atoms: Vec<Atom> = Vec::with_capacity(n);
    for (i, spec) in specs.into_iter().enumerate() {
        let mut atom = spec.atom;
        if spec.auto_h {
            atom.hydrogens = implicit_hydrogens(&atom, explicit[i]);
        }
        check_valence(i, &atom, explicit[i])?;
        atoms.push(atom);
    }

    for bond in bonds.iter_mut() {
        if bond.order != BondOrder::Double {
            bond.stereo = None;
        }
    }

    if aromatic_perception_needed(&bonds, &ring_info) {
        crate::aromatic::perceive(&mut atoms, &mut bonds, &adjacency, &ring_info);
    }
    Ok(Molecule::from_parts(atoms, bonds, ring_info))
}

fn check_graph(n: usize, bonds: &[Bond]) -> Result<(), SanitizeError> {
    let mut seen = BTreeSet::new();
    for (i, b) in bonds.iter().enumerate() {
        if b.begin >= n || b.end >= n {
            return Err(SanitizeError::MissingAtom { bond: i });
        }
        if b.begin == b.end {
            return Err(SanitizeError::SelfBond { atom: b.begin });
        }
        let key = (b.begin.min(b.end), b.begin.max(b.end));
        if !seen.insert(key) {
            return Err(SanitizeError::DuplicateBond {
                begin: key.0,
                end: key.1,
            });
        }
    }
    Ok(())
}

fn aromatic_perception_needed(bonds: &[Bond], rings: &rings::RingInfo) -> bool {
    rings
        .sssr()
        .iter()
        .any(|r| (5..=7).contains(&r.len()) && r.bonds.iter().any(|&b| bonds[b].order == BondOrder::Double))
}

/// Default-valence hydrogen count for an unbracketed atom.
fn implicit_hydrogens(atom: &Atom, explicit: u32) -> u8 {
    let Some(valences) = atom.element.default_valences() else {
        return 0;
    };
    if atom.aromatic {
        let lowest = valences[0] as u32;
        return lowest.saturating_sub(explicit + 1) as u8;
    }
    match valences.iter().find(|&&v| v as u32 >= explicit) {
        Some(&v) => (v as u32 - explicit) as u8,
        None => 0,
    }
}

fn check_valence(index: usize, atom: &Atom, explicit: u32) -> Result<(), SanitizeError> {
    if atom.is_wildcard() {
        return Ok(());
    }
    let total = explicit + atom.hydrogens as u32;
    if let Some(allowed) = atom.element.allowed_valences(atom.charge) {
        if total > allowed.max() as u32 {
            return Err(SanitizeError::Valence {
                atom: index,
                symbol: atom.element.symbol(),
                valence: total,
            });
        }
    }
    Ok(())
}
