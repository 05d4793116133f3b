//! Canonical atom ranking and canonical SMILES.
//!
//! Atoms are first partitioned by an invariant tuple (atomic number,
//! isotope, charge, aromaticity, degree, hydrogen count, ring membership)
//! and the partition is refined Morgan-style by neighbor classes and bond
//! orders until stable. Remaining ties are broken by an
//! individualization search: each leaf ranking is written as SMILES and the
//! lexicographically smallest string wins. Automorphisms found along the way
//! (two leaves with equal strings) prune symmetric branches.
//!
//! Stereo annotations never influence the ranking.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::mol::Molecule;
use crate::smiles::{write_ranked, write_ranked_with_order, WriteOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CanonOptions {
    pub isomeric: bool,
    pub wildcard_labels: bool,
}

impl Default for CanonOptions {
    fn default() -> Self {
        CanonOptions {
            isomeric: false,
            wildcard_labels: true,
        }
    }
}

impl From<CanonOptions> for WriteOptions {
    fn from(o: CanonOptions) -> WriteOptions {
        WriteOptions {
            isomeric: o.isomeric,
            wildcard_labels: o.wildcard_labels,
        }
    }
}

/// Canonical ranking (a permutation of `0..n`) with wildcard labels taken
/// into account.
pub fn canonical_ranks(mol: &Molecule) -> Vec<usize> {
    ranks_with(mol, CanonOptions::default())
}

pub fn ranks_with(mol: &Molecule, opts: CanonOptions) -> Vec<usize> {
    Search::new(mol, opts).run().1
}

/// Canonical SMILES without stereo markers. Isomorphic molecules give
/// byte-identical strings.
pub fn write_smiles(mol: &Molecule) -> String {
    canonical_smiles(mol, CanonOptions::default())
}

pub fn canonical_smiles(mol: &Molecule, opts: CanonOptions) -> String {
    let (smiles, ranks) = Search::new(mol, opts).run();
    if opts.isomeric && mol.has_stereo() {
        write_ranked(mol, &ranks, opts.into())
    } else {
        smiles
    }
}

type Invariant = (u8, u16, i8, bool, u8, u8, bool);

struct Search<'a> {
    mol: &'a Molecule,
    opts: WriteOptions,
    nbrs: Vec<Vec<(usize, u8)>>,
    best: Option<(String, Vec<usize>, Vec<usize>)>,
    first: Option<(String, Vec<usize>)>,
    generators: Vec<Vec<usize>>,
}

impl<'a> Search<'a> {
    fn new(mol: &'a Molecule, opts: CanonOptions) -> Search<'a> {
        let nbrs = (0..mol.atom_count())
            .map(|a| {
                mol.neighbors(a)
                    .iter()
                    .map(|&(n, b)| (n, mol.bond(b).order.code()))
                    .collect()
            })
            .collect();
        Search {
            mol,
            // Leaves are compared on the stereo-free string.
            opts: WriteOptions {
                isomeric: false,
                wildcard_labels: opts.wildcard_labels,
            },
            nbrs,
            best: None,
            first: None,
            generators: Vec::new(),
        }
    }

    fn invariant(&self, a: usize) -> Invariant {
        let atom = self.mol.atom(a);
        let isotope = if atom.is_wildcard() && !self.opts.wildcard_labels {
            0
        } else {
            atom.isotope.map_or(0, |v| v.saturating_add(1))
        };
        (
            atom.element.atomic_number(),
            isotope,
            atom.charge,
            atom.aromatic,
            self.mol.degree(a) as u8,
            atom.hydrogens,
            self.mol.rings().atom_in_ring(a),
        )
    }

    fn run(mut self) -> (String, Vec<usize>) {
        let n = self.mol.atom_count();
        if n == 0 {
            return (String::new(), Vec::new());
        }
        let invariants: Vec<Invariant> = (0..n).map(|a| self.invariant(a)).collect();
        let mut classes = rank_by(&invariants);
        self.refine(&mut classes);
        let mut prefix = Vec::new();
        self.search(classes, &mut prefix);
        let (smiles, ranks, _) = self.best.take().unwrap();
        (smiles, ranks)
    }

    /// Iterated neighborhood refinement. A class value is the number of
    /// atoms with a strictly smaller signature, so refinement never reorders
    /// existing classes.
    fn refine(&self, classes: &mut Vec<usize>) {
        let n = classes.len();
        let mut distinct = count_distinct(classes);
        let mut sigs: Vec<(usize, Vec<(usize, u8)>)> = Vec::with_capacity(n);
        loop {
            if distinct == n {
                return;
            }
            sigs.clear();
            for a in 0..n {
                let mut s: Vec<(usize, u8)> = self.nbrs[a].iter().map(|&(m, o)| (classes[m], o)).collect();
                s.sort_unstable();
                sigs.push((classes[a], s));
            }
            let next = rank_by(&sigs);
            let d = count_distinct(&next);
            *classes = next;
            if d == distinct {
                return;
            }
            distinct = d;
        }
    }

    fn search(&mut self, classes: Vec<usize>, prefix: &mut Vec<usize>) {
        let n = classes.len();
        // Smallest-valued non-singleton cell.
        let mut counts = vec![0usize; n];
        for &c in &classes {
            counts[c] += 1;
        }
        let Some(target) = (0..n).find(|&c| counts[c] > 1) else {
            self.leaf(classes);
            return;
        };
        let cell: Vec<usize> = (0..n).filter(|&a| classes[a] == target).collect();
        let mut explored: Vec<usize> = Vec::new();
        for &v in &cell {
            if !explored.is_empty() && self.same_orbit(prefix, &explored, v) {
                continue;
            }
            explored.push(v);
            let mut child = classes.clone();
            for &a in &cell {
                if a != v {
                    child[a] = target + 1;
                }
            }
            self.refine(&mut child);
            prefix.push(v);
            self.search(child, prefix);
            prefix.pop();
        }
    }

    /// Whether `v` is in the orbit of an explored atom under the group
    /// generated by known automorphisms that fix `prefix` pointwise.
    fn same_orbit(&self, prefix: &[usize], explored: &[usize], v: usize) -> bool {
        let n = self.mol.atom_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut any = false;
        for g in &self.generators {
            if prefix.iter().all(|&p| g[p] == p) {
                any = true;
                for a in 0..n {
                    let (x, y) = (find(&mut parent, a), find(&mut parent, g[a]));
                    if x != y {
                        parent[x] = y;
                    }
                }
            }
        }
        if !any {
            return false;
        }
        let root = find(&mut parent, v);
        explored.iter().any(|&e| find(&mut parent, e) == root)
    }

    fn leaf(&mut self, ranks: Vec<usize>) {
        let (smiles, order) = write_ranked_with_order(self.mol, &ranks, self.opts);
        let mut automorphism = None;
        if let Some((first_smiles, first_order)) = &self.first {
            if *first_smiles == smiles {
                automorphism = Some(map_between(first_order, &order));
            }
        } else {
            self.first = Some((smiles.clone(), order.clone()));
        }
        match &self.best {
            Some((best_smiles, _, best_order)) => {
                if smiles == *best_smiles {
                    if automorphism.is_none() {
                        automorphism = Some(map_between(best_order, &order));
                    }
                } else if smiles < *best_smiles {
                    self.best = Some((smiles, ranks, order));
                }
            }
            None => self.best = Some((smiles, ranks, order)),
        }
        if let Some(g) = automorphism {
            if g.iter().enumerate().any(|(i, &x)| i != x) {
                self.generators.push(g);
            }
        }
    }
}

/// Permutation sending `from[i]` to `to[i]`.
fn map_between(from: &[usize], to: &[usize]) -> Vec<usize> {
    let mut g = vec![0; from.len()];
    for (&a, &b) in from.iter().zip(to) {
        g[a] = b;
    }
    g
}

/// Dense ranking where each value is the count of strictly smaller keys.
fn rank_by<T: Ord>(keys: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut out = vec![0; keys.len()];
    for i in 0..idx.len() {
        out[idx[i]] = if i > 0 && keys[idx[i]] == keys[idx[i - 1]] {
            out[idx[i - 1]]
        } else {
            i
        };
    }
    out
}

fn count_distinct(classes: &[usize]) -> usize {
    let mut seen = vec![false; classes.len()];
    let mut d = 0;
    for &c in classes {
        if !seen[c] {
            seen[c] = true;
            d += 1;
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    fn canon(s: &str) -> String {
        write_smiles(&parse_smiles(s).unwrap())
    }

    #[test]
    fn kekule_and_aromatic_benzene_agree() {
        assert_eq!(canon("C1=CC=CC=C1"), canon("c1ccccc1"));
        assert_eq!(canon("c1ccccc1"), "c1ccccc1");
    }

    #[test]
    fn atom_order_invariance() {
        assert_eq!(canon("OCC"), canon("CCO"));
        assert_eq!(canon("C(C)(C)O"), canon("CC(O)C"));
    }

    #[test]
    fn ranks_are_permutation() {
        let m = parse_smiles("CCO").unwrap();
        let mut r = canonical_ranks(&m);
        assert_ne!(r[2], r[0]);
        assert_ne!(r[2], r[1]);
        r.sort();
        assert_eq!(r, vec![0, 1, 2]);
    }

    #[test]
    fn symmetric_molecules_terminate() {
        for s in [
            "CC(C)(C)c1cc(C(C)(C)C)cc(C(C)(C)C)c1",
            "C12C3C4C1C5C2C3C45",
            "C1C2CC3CC1CC(C2)C3",
            "FC(F)(F)C(F)(F)C(F)(F)C(F)(F)F",
            "C1CCCCCCCCCCCCCCCCCCC1",
        ] {
            let a = canon(s);
            let b = write_smiles(&parse_smiles(&a).unwrap());
            assert_eq!(a, b, "{s}");
        }
    }

    #[test]
    fn wildcard_labels_option() {
        let a = parse_smiles("[1*]CC[2*]").unwrap();
        let b = parse_smiles("[2*]CC[1*]").unwrap();
        let opts = CanonOptions {
            isomeric: false,
            wildcard_labels: false,
        };
        assert_eq!(canonical_smiles(&a, opts), "*CC*");
        assert_eq!(canonical_smiles(&a, opts), canonical_smiles(&b, opts));
        assert_eq!(write_smiles(&a), write_smiles(&b));
        assert!(write_smiles(&a).contains("[1*]"));
    }

    #[test]
    fn distinguishes_isomers() {
        assert_ne!(canon("CCCC"), canon("CC(C)C"));
        assert_ne!(canon("c1ccc(O)cc1C"), canon("c1cc(O)ccc1C"));
    }
}
