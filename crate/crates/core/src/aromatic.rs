//! Aromaticity perception for Kekulé rings.
//!
//! Simplified Hückel model: each SSSR ring of size 5 to 7 whose atoms can all
//! contribute pi electrons is aromatic when the electron count is 4n + 2.
//! Rings already written with aromatic bonds are left alone.

use alloc::vec::Vec;

use crate::element::Element;
use crate::mol::{Atom, Bond, BondOrder};
use crate::rings::RingInfo;

/// Pi electrons `atom` donates to a ring, or `None` if it breaks conjugation.
fn electrons(
    index: usize,
    atoms: &[Atom],
    bonds: &[Bond],
    adjacency: &[Vec<(usize, usize)>],
    rings: &RingInfo,
) -> Option<u32> {
    let atom = &atoms[index];
    let mut ring_double = false;
    let mut exo_double: Option<Element> = None;
    let mut degree = 0u32;
    for &(n, b) in &adjacency[index] {
        degree += 1;
        match bonds[b].order {
            BondOrder::Double => {
                if rings.bond_in_ring(b) {
                    ring_double = true;
                } else {
                    exo_double = Some(atoms[n].element);
                }
            }
            BondOrder::Triple | BondOrder::Aromatic => return None,
            BondOrder::Single => {}
        }
    }
    let connections = degree + atom.hydrogens as u32;
    let z = atom.element.atomic_number();
    match z {
        // C, Si
        6 | 14 => {
            if ring_double {
                Some(1)
            } else if let Some(e) = exo_double {
                matches!(e, Element::O | Element::N | Element::S).then_some(0)
            } else if atom.charge > 0 {
                Some(0)
            } else if atom.charge < 0 {
                Some(2)
            } else {
                None
            }
        }
        // B
        5 => (!ring_double && exo_double.is_none() && atom.charge == 0 && connections == 3).then_some(0),
        // N, P, As
        7 | 15 | 33 => {
            if ring_double {
                Some(1)
            } else if exo_double.is_some() {
                None
            } else if connections == 3 && atom.charge == 0 || connections == 2 && atom.charge < 0 {
                Some(2)
            } else {
                None
            }
        }
        // O, S, Se, Te
        8 | 16 | 34 | 52 => {
            if ring_double {
                (atom.charge > 0 || z != 8).then_some(1)
            } else if exo_double.is_some() {
                None
            } else if connections == 2 && atom.charge == 0 {
                Some(2)
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Flags aromatic rings in place. Single rings are tried first; pairs of
/// fused rings are then tried as a whole, which catches
/// bicyclics such as indolizine whose rings fail the count individually.
/// Returns whether anything changed.
pub(crate) fn perceive(
    atoms: &mut [Atom],
    bonds: &mut [Bond],
    adjacency: &[Vec<(usize, usize)>],
    rings: &RingInfo,
) -> bool {
    let sssr = rings.sssr();
    // Candidate rings with their per-atom electron counts.
    let mut candidates: Vec<usize> = Vec::new();
    let mut contribution = alloc::vec![None; atoms.len()];
    for (ri, ring) in sssr.iter().enumerate() {
        if !(5..=7).contains(&ring.len()) {
            continue;
        }
        if ring.bonds.iter().any(|&b| bonds[b].order == BondOrder::Aromatic) {
            continue;
        }
        let mut ok = true;
        for &a in &ring.atoms {
            let e = electrons(a, atoms, bonds, adjacency, rings);
            contribution[a] = e;
            if e.is_none() {
                ok = false;
            }
        }
        if ok {
            candidates.push(ri);
        }
    }
    let huckel = |members: &[usize]| -> bool {
        let mut seen: Vec<usize> = Vec::new();
        let mut total = 0;
        for &ri in members {
            for &a in &sssr[ri].atoms {
                if !seen.contains(&a) {
                    seen.push(a);
                    total += contribution[a].unwrap_or(0);
                }
            }
        }
        total >= 2 && (total - 2) % 4 == 0
    };
    let fused = |x: usize, y: usize| sssr[x].bonds.iter().any(|b| sssr[y].bonds.contains(b));
    let mut aromatic = alloc::vec![false; sssr.len()];
    for &ri in &candidates {
        if huckel(&[ri]) {
            aromatic[ri] = true;
        }
    }
    for (i, &x) in candidates.iter().enumerate() {
        for &y in candidates.iter().skip(i + 1) {
            if !fused(x, y) {
                continue;
            }
            if !(aromatic[x] && aromatic[y]) && huckel(&[x, y]) {
                aromatic[x] = true;
                aromatic[y] = true;
            }
        }
    }
    let mut changed = false;
    for (ri, ring) in sssr.iter().enumerate() {
        if !aromatic[ri] {
            continue;
        }
        changed = true;
        for &a in &ring.atoms {
            atoms[a].aromatic = true;
        }
        for &b in &ring.bonds {
            bonds[b].order = BondOrder::Aromatic;
            bonds[b].stereo = None;
        }
    }
    changed
}
