//! Simple molecular descriptors used by the fragment-likeness filters.

use crate::element::Element;
use crate::mol::{BondOrder, Molecule};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Descriptors {
    /// Average molecular weight in daltons, implicit hydrogens included.
    pub molecular_weight: f64,
    pub heavy_atom_count: usize,
    /// N and O atoms carrying at least one hydrogen.
    pub hbd: usize,
    /// N and O atoms.
    pub hba: usize,
    pub rotatable_bonds: usize,
    pub aromatic_ring_count: usize,
}

pub fn compute_descriptors(mol: &Molecule) -> Descriptors {
    let mut molecular_weight = 0.0;
    let mut hbd = 0;
    let mut hba = 0;
    for (i, atom) in mol.atoms().iter().enumerate() {
        molecular_weight += atom.mass();
        if atom.element == Element::N || atom.element == Element::O {
            hba += 1;
            let explicit_h = mol
                .neighbors(i)
                .iter()
                .any(|&(n, _)| mol.atom(n).element.is_hydrogen());
            if atom.hydrogens > 0 || explicit_h {
                hbd += 1;
            }
        }
    }
    let rotatable_bonds = (0..mol.bonds().len()).filter(|&b| is_rotatable(mol, b)).count();
    let aromatic_ring_count = mol
        .rings()
        .sssr()
        .iter()
        .filter(|r| r.bonds.iter().all(|&b| mol.bond(b).order == BondOrder::Aromatic))
        .count();
    Descriptors {
        molecular_weight,
        heavy_atom_count: mol.heavy_atom_count(),
        hbd,
        hba,
        rotatable_bonds,
        aromatic_ring_count,
    }
}

/// Non-ring single bond between two heavy atoms of degree two or more,
/// excluding amide C-N bonds.
fn is_rotatable(mol: &Molecule, bond: usize) -> bool {
    let b = mol.bond(bond);
    if b.order != BondOrder::Single || mol.rings().bond_in_ring(bond) {
        return false;
    }
    let (x, y) = (b.begin, b.end);
    if !mol.atom(x).is_heavy() || !mol.atom(y).is_heavy() || mol.degree(x) < 2 || mol.degree(y) < 2 {
        return false;
    }
    !(is_amide_carbon_to_nitrogen(mol, x, y) || is_amide_carbon_to_nitrogen(mol, y, x))
}

fn is_amide_carbon_to_nitrogen(mol: &Molecule, c: usize, n: usize) -> bool {
    mol.atom(c).element == Element::C
        && mol.atom(n).element == Element::N
        && mol
            .neighbors(c)
            .iter()
            .any(|&(o, b)| mol.atom(o).element == Element::O && mol.bond(b).order == BondOrder::Double)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    #[test]
    fn benzene_and_water() {
        let d = compute_descriptors(&parse_smiles("c1ccccc1").unwrap());
        assert!((d.molecular_weight - 78.114).abs() < 1e-3);
        assert_eq!((d.hbd, d.hba, d.rotatable_bonds, d.aromatic_ring_count), (0, 0, 0, 1));
        let d = compute_descriptors(&parse_smiles("O").unwrap());
        assert!((d.molecular_weight - 18.015).abs() < 1e-3);
        assert_eq!((d.hbd, d.hba), (1, 1));
    }

    #[test]
    fn amide_bond_not_rotatable() {
        // CC(=O)NC: only the C-N amide bond is between two non-terminal atoms.
        let d = compute_descriptors(&parse_smiles("CC(=O)NC").unwrap());
        assert_eq!(d.rotatable_bonds, 0);
        let d = compute_descriptors(&parse_smiles("CCCC").unwrap());
        assert_eq!(d.rotatable_bonds, 1);
    }
}
