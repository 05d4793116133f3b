//! Ring perception: cyclic bond detection and a smallest set of smallest
//! rings (SSSR).
//!
//! Ring bonds are exactly the non-bridge bonds. The SSSR is a minimum cycle
//! basis picked greedily from Horton's candidate cycles, shortest first,
//! using Gaussian elimination over GF(2) on bond incidence vectors.

use alloc::vec;
use alloc::vec::Vec;

use crate::mol::Bond;

/// A ring in cyclic order: `bonds[i]` joins `atoms[i]` and
/// `atoms[(i + 1) % len]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ring {
    pub atoms: Vec<usize>,
    pub bonds: Vec<usize>,
}

impl Ring {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RingInfo {
    bond_in_ring: Vec<bool>,
    atom_ring_count: Vec<u8>,
    atom_in_ring: Vec<bool>,
    rings: Vec<Ring>,
}

impl RingInfo {
    pub fn bond_in_ring(&self, bond: usize) -> bool {
        self.bond_in_ring[bond]
    }

    pub fn atom_in_ring(&self, atom: usize) -> bool {
        self.atom_in_ring[atom]
    }

    /// Number of SSSR rings containing `atom`.
    pub fn atom_ring_count(&self, atom: usize) -> usize {
        self.atom_ring_count[atom] as usize
    }

    pub fn sssr(&self) -> &[Ring] {
        &self.rings
    }

    pub fn ring_count(&self) -> usize {
        self.rings.len()
    }

    /// Ring info for a subgraph. Rings with any atom or bond missing from
    /// the maps are dropped; added bonds beyond the mapped ones are acyclic.
    pub(crate) fn remapped(
        &self,
        atom_map: &dyn Fn(usize) -> Option<usize>,
        bond_map: &dyn Fn(usize) -> Option<usize>,
        atom_count: usize,
        bond_count: usize,
    ) -> RingInfo {
        let mut bond_in_ring = vec![false; bond_count];
        for (old, &cyclic) in self.bond_in_ring.iter().enumerate() {
            if cyclic {
                if let Some(new) = bond_map(old) {
                    bond_in_ring[new] = true;
                }
            }
        }
        let mut rings = Vec::new();
        for ring in &self.rings {
            let atoms: Option<Vec<usize>> = ring.atoms.iter().map(|&a| atom_map(a)).collect();
            let bonds: Option<Vec<usize>> = ring.bonds.iter().map(|&b| bond_map(b)).collect();
            if let (Some(atoms), Some(bonds)) = (atoms, bonds) {
                rings.push(Ring { atoms, bonds });
            }
        }
        let mut info = RingInfo {
            bond_in_ring,
            atom_ring_count: vec![0; atom_count],
            atom_in_ring: vec![false; atom_count],
            rings,
        };
        info.fill_atom_counts();
        info
    }

    fn fill_atom_counts(&mut self) {
        for ring in &self.rings {
            for &a in &ring.atoms {
                self.atom_ring_count[a] = self.atom_ring_count[a].saturating_add(1);
                self.atom_in_ring[a] = true;
            }
        }
    }
}

/// Perceives ring bonds and the SSSR of the graph given by `bonds`.
pub fn perceive(atom_count: usize, bonds: &[Bond]) -> RingInfo {
    let adjacency = crate::mol::build_adjacency(atom_count, bonds);
    let bond_in_ring = cyclic_bonds(&adjacency, bonds.len());
    let rings = if bond_in_ring.iter().any(|&c| c) {
        sssr(&adjacency, bonds, &bond_in_ring)
    } else {
        Vec::new()
    };
    let mut info = RingInfo {
        bond_in_ring,
        atom_ring_count: vec![0; atom_count],
        atom_in_ring: vec![false; atom_count],
        rings,
    };
    info.fill_atom_counts();
    info
}

/// Marks every bond that is not a bridge. Iterative Tarjan lowlink.
fn cyclic_bonds(adjacency: &[Vec<(usize, usize)>], bond_count: usize) -> Vec<bool> {
    let n = adjacency.len();
    let mut cyclic = vec![true; bond_count];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut time = 0;
    // (atom, bond used to enter, next adjacency position)
    let mut stack: Vec<(usize, usize, usize)> = Vec::new();
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = time;
        low[root] = time;
        time += 1;
        stack.push((root, usize::MAX, 0));
        while let Some(top) = stack.last_mut() {
            let (v, via, pos) = *top;
            if pos < adjacency[v].len() {
                top.2 += 1;
                let (w, bond) = adjacency[v][pos];
                if bond == via {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    stack.push((w, bond, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(parent, _, _)) = stack.last() {
                    low[parent] = low[parent].min(low[v]);
                    if low[v] > disc[parent] {
                        cyclic[via] = false;
                    }
                }
            }
        }
    }
    cyclic
}

struct Candidate {
    atoms: Vec<usize>,
    bonds: Vec<usize>,
    bits: Vec<u64>,
}

fn sssr(adjacency: &[Vec<(usize, usize)>], bonds: &[Bond], bond_in_ring: &[bool]) -> Vec<Ring> {
    let n = adjacency.len();
    let ring_adj: Vec<Vec<(usize, usize)>> = adjacency
        .iter()
        .map(|list| list.iter().copied().filter(|&(_, b)| bond_in_ring[b]).collect())
        .collect();
    let ring_atoms: Vec<usize> = (0..n).filter(|&a| !ring_adj[a].is_empty()).collect();
    let ring_bond_count = bond_in_ring.iter().filter(|&&c| c).count();
    let mut systems = 0;
    {
        let mut seen = vec![false; n];
        for &start in &ring_atoms {
            if seen[start] {
                continue;
            }
            systems += 1;
            seen[start] = true;
            let mut queue = vec![start];
            while let Some(a) = queue.pop() {
                for &(w, _) in &ring_adj[a] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push(w);
                    }
                }
            }
        }
    }
    let target = ring_bond_count + systems - ring_atoms.len();
    let words = bonds.len().div_ceil(64);

    let mut candidates: Vec<Candidate> = Vec::new();
    let mut dist = vec![usize::MAX; n];
    let mut parent: Vec<(usize, usize)> = vec![(usize::MAX, usize::MAX); n];
    let mut order = Vec::with_capacity(n);
    for &root in &ring_atoms {
        for &a in &order {
            dist[a] = usize::MAX;
            parent[a] = (usize::MAX, usize::MAX);
        }
        order.clear();
        dist[root] = 0;
        order.push(root);
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &(w, b) in &ring_adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    parent[w] = (v, b);
                    order.push(w);
                }
            }
        }
        for (bi, bond) in bonds.iter().enumerate() {
            if !bond_in_ring[bi] {
                continue;
            }
            let (x, y) = (bond.begin, bond.end);
            if dist[x] == usize::MAX || dist[y] == usize::MAX {
                continue;
            }
            if parent[x].1 == bi || parent[y].1 == bi {
                continue;
            }
            let path_x = tree_path(x, &parent);
            let path_y = tree_path(y, &parent);
            // Paths share only the root.
            let (body_x, body_y) = (&path_x[..path_x.len() - 1], &path_y[..path_y.len() - 1]);
            if body_x.iter().any(|(a, _)| body_y.iter().any(|(b, _)| a == b)) {
                continue;
            }
            // Each path runs from its endpoint back to the root.
            let mut atoms: Vec<usize> = path_x.iter().rev().map(|&(a, _)| a).collect();
            let mut ring_bonds: Vec<usize> = path_x[..path_x.len() - 1].iter().rev().map(|&(_, b)| b).collect();
            ring_bonds.push(bi);
            for &(a, b) in &path_y[..path_y.len() - 1] {
                atoms.push(a);
                ring_bonds.push(b);
            }
            let mut bits = vec![0u64; words];
            for &b in &ring_bonds {
                bits[b / 64] |= 1 << (b % 64);
            }
            candidates.push(Candidate {
                atoms,
                bonds: ring_bonds,
                bits,
            });
        }
    }
    candidates.sort_by(|a, b| a.bonds.len().cmp(&b.bonds.len()).then_with(|| a.bits.cmp(&b.bits)));
    candidates.dedup_by(|a, b| a.bits == b.bits);

    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut rings = Vec::new();
    for cand in candidates {
        if rings.len() == target {
            break;
        }
        let mut v = cand.bits.clone();
        for (pivot, row) in &basis {
            if v[pivot / 64] >> (pivot % 64) & 1 == 1 {
                for (x, y) in v.iter_mut().zip(row) {
                    *x ^= y;
                }
            }
        }
        if let Some(pivot) = first_bit(&v) {
            for (_, row) in basis.iter_mut() {
                if row[pivot / 64] >> (pivot % 64) & 1 == 1 {
                    for (x, y) in row.iter_mut().zip(&v) {
                        *x ^= y;
                    }
                }
            }
            basis.push((pivot, v));
            rings.push(Ring {
                atoms: cand.atoms,
                bonds: cand.bonds,
            });
        }
    }
    rings
}

fn first_bit(v: &[u64]) -> Option<usize> {
    v.iter()
        .enumerate()
        .find(|(_, &w)| w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

/// `[(atom, bond to its parent)]` from `start` up to the BFS root; the
/// root's bond entry is `usize::MAX`.
fn tree_path(start: usize, parent: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut path = Vec::new();
    let mut v = start;
    loop {
        let (p, b) = parent[v];
        path.push((v, b));
        if p == usize::MAX {
            break;
        }
        v = p;
    }
    path
}
