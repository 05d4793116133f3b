//! BRICS bond detection, fragmentation at bond sets, wildcard labeling and
//! path layouts.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::canon::{canonical_smiles, CanonOptions};
use crate::mol::{Atom, BondOrder, MolBuilder, Molecule, StereoRef};
use crate::smarts::{Pattern, SmartsError};

/// The rule table shipped with the crate.
pub const BUILTIN_RULES: &str = include_str!("brics_rules.tsv");

/// Label of the attachment point that faces the previous block.
pub const BACKWARD_LABEL: u16 = 1;
/// Label of the attachment point that faces the next block.
pub const FORWARD_LABEL: u16 = 2;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BricsError {
    #[error("rule table: missing version header")]
    MissingHeader,
    #[error("rule table line {line}: {reason}")]
    BadRule { line: usize, reason: &'static str },
    #[error("rule table line {line}: {source}")]
    BadPattern { line: usize, source: SmartsError },
    #[error("bond {bond} is not a BRICS bond")]
    NotBricsBond { bond: usize },
}

/// A cuttable bond with the environment labels of its two atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BricsBond {
    pub bond_index: usize,
    pub env_begin: u8,
    pub env_end: u8,
}

/// Compiled BRICS rule table.
#[derive(Clone, Debug)]
pub struct RuleTable {
    version: String,
    envs: Vec<(u8, Pattern)>,
    pairs: Vec<(usize, usize)>,
}

impl RuleTable {
    pub fn builtin() -> RuleTable {
        RuleTable::parse(BUILTIN_RULES).expect("builtin BRICS table is valid")
    }

    pub fn parse(text: &str) -> Result<RuleTable, BricsError> {
        let mut lines = text.lines().enumerate();
        let version = loop {
            match lines.next() {
                Some((_, l)) if l.trim().is_empty() => continue,
                Some((_, l)) => match l.trim().strip_prefix("# brics-rules ") {
                    Some(v) => break v.trim().to_string(),
                    None => return Err(BricsError::MissingHeader),
                },
                None => return Err(BricsError::MissingHeader),
            }
        };
        let mut envs: Vec<(u8, Pattern)> = Vec::new();
        let mut partner_lists: Vec<(usize, Vec<u8>)> = Vec::new();
        for (i, raw) in lines {
            let line = i + 1;
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = l.split('\t').collect();
            if fields.len() != 3 {
                return Err(BricsError::BadRule { line, reason: "expected 3 tab-separated fields" });
            }
            let label: u8 = fields[0]
                .trim_start_matches('L')
                .parse()
                .map_err(|_| BricsError::BadRule { line, reason: "label is not a number" })?;
            if envs.iter().any(|(l, _)| *l == label) {
                return Err(BricsError::BadRule { line, reason: "duplicate label" });
            }
            let pattern = Pattern::parse(fields[1]).map_err(|source| BricsError::BadPattern { line, source })?;
            let mut partners = Vec::new();
            if fields[2].trim() != "-" {
                for p in fields[2].split(',') {
                    let p: u8 = p
                        .trim()
                        .trim_start_matches('L')
                        .parse()
                        .map_err(|_| BricsError::BadRule { line, reason: "partner is not a number" })?;
                    partners.push(p);
                }
            }
            partner_lists.push((line, partners));
            envs.push((label, pattern));
        }
        let mut pairs = Vec::new();
        for (i, (line, partners)) in partner_lists.iter().enumerate() {
            for p in partners {
                let j = envs
                    .iter()
                    .position(|(l, _)| l == p)
                    .ok_or(BricsError::BadRule { line: *line, reason: "unknown partner label" })?;
                pairs.push((i, j));
            }
        }
        Ok(RuleTable { version, envs, pairs })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn labels(&self) -> impl Iterator<Item = u8> + '_ {
        self.envs.iter().map(|(l, _)| *l)
    }

    /// Every single, acyclic bond whose two atoms match an allowed pair of
    /// environments, in bond index order.
    pub fn find_bonds(&self, mol: &Molecule) -> Vec<BricsBond> {
        let n = mol.atom_count();
        // env_hits[e][a]: atom a matches environment e (lazily evaluated)
        let mut cache: Vec<Vec<u8>> = vec![vec![2; n]; self.envs.len()];
        let mut hit = |e: usize, a: usize| -> bool {
            if cache[e][a] == 2 {
                cache[e][a] = self.envs[e].1.matches_at(mol, a) as u8;
            }
            cache[e][a] == 1
        };
        let mut out = Vec::new();
        for (bi, bond) in mol.bonds().iter().enumerate() {
            if bond.order != BondOrder::Single || mol.rings().bond_in_ring(bi) {
                continue;
            }
            let (lo, hi) = (bond.begin.min(bond.end), bond.begin.max(bond.end));
            let mut found = None;
            'rules: for &(e1, e2) in &self.pairs {
                for (x, y) in [(lo, hi), (hi, lo)] {
                    if hit(e1, x) && hit(e2, y) {
                        found = Some((x, self.envs[e1].0, self.envs[e2].0));
                        break 'rules;
                    }
                }
            }
            if let Some((x, lx, ly)) = found {
                let (env_begin, env_end) = if x == bond.begin { (lx, ly) } else { (ly, lx) };
                out.push(BricsBond {
                    bond_index: bi,
                    env_begin,
                    env_end,
                });
            }
        }
        out
    }

    /// Cuts `cuts` and lays the fragments out; see [`layout`].
    pub fn break_molecule(&self, mol: &Molecule, cuts: &[BricsBond]) -> Result<DecompositionLayout, BricsError> {
        let valid = self.find_bonds(mol);
        for c in cuts {
            if !valid.contains(c) {
                return Err(BricsError::NotBricsBond { bond: c.bond_index });
            }
        }
        let bonds: Vec<usize> = cuts.iter().map(|c| c.bond_index).collect();
        Ok(layout(mol, &bonds))
    }
}

/// BRICS bonds of `mol` under the built-in rule table.
pub fn find_brics_bonds(mol: &Molecule) -> Vec<BricsBond> {
    RuleTable::builtin().find_bonds(mol)
}

/// One connected piece after cutting.
#[derive(Clone, Debug)]
pub struct Fragment {
    pub mol: Molecule,
    /// Parent atom index of each non-wildcard atom, in fragment order.
    pub atoms: Vec<usize>,
    /// `(cut bond, wildcard atom in this fragment)`.
    pub wildcards: Vec<(usize, usize)>,
}

/// Splits `mol` at `bonds` (which must be acyclic), replacing each cut bond
/// by one unlabeled wildcard on each side. Linear in the molecule size;
/// fragments are ordered by their lowest parent atom.
pub fn fragment_on_bonds(mol: &Molecule, bonds: &[usize]) -> Vec<Fragment> {
    let n = mol.atom_count();
    let mut is_cut = vec![false; mol.bonds().len()];
    for &b in bonds {
        is_cut[b] = true;
    }
    let mut comp = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let c = members.len();
        comp[start] = c;
        let mut list = vec![start];
        let mut head = 0;
        while head < list.len() {
            let a = list[head];
            head += 1;
            for &(w, b) in mol.neighbors(a) {
                if !is_cut[b] && comp[w] == usize::MAX {
                    comp[w] = c;
                    list.push(w);
                }
            }
        }
        list.sort_unstable();
        members.push(list);
    }
    let mut cuts_of: Vec<Vec<(usize, usize)>> = vec![Vec::new(); members.len()];
    for &b in bonds {
        let bond = mol.bond(b);
        cuts_of[comp[bond.begin]].push((b, bond.end));
        cuts_of[comp[bond.end]].push((b, bond.begin));
    }
    let mut map = vec![usize::MAX; n];
    members
        .iter()
        .zip(&cuts_of)
        .map(|(keep, boundary)| extract_fragment(mol, keep, boundary, &mut map))
        .collect()
}

/// Fragment made of the parent atoms `keep` plus one wildcard per
/// `(bond, outside atom)` in `boundary`. `map` is scratch space of parent
/// size, all `usize::MAX` on entry and on return.
pub(crate) fn extract_fragment(
    mol: &Molecule,
    keep: &[usize],
    boundary: &[(usize, usize)],
    map: &mut [usize],
) -> Fragment {
    for (i, &a) in keep.iter().enumerate() {
        map[a] = i;
    }
    let mut wildcards = Vec::with_capacity(boundary.len());
    for (j, &(b, outside)) in boundary.iter().enumerate() {
        map[outside] = keep.len() + j;
        wildcards.push((b, keep.len() + j));
    }
    let frag = mol.extract(keep, vec![Atom::wildcard(None); boundary.len()], map);
    for &a in keep {
        map[a] = usize::MAX;
    }
    for &(_, outside) in boundary {
        map[outside] = usize::MAX;
    }
    Fragment {
        mol: frag,
        atoms: keep.to_vec(),
        wildcards,
    }
}

/// A connected fragment with at most two attachment points.
#[derive(Clone, Debug)]
pub struct Block {
    /// The fragment, wildcards included, stereo annotations kept.
    pub graph: Molecule,
    /// Stereo-free canonical SMILES with wildcard labels removed; the
    /// vocabulary key.
    pub key: String,
    /// Stereo-free canonical SMILES with wildcard labels.
    pub smiles: String,
    pub attachment_count: usize,
}

const KEY_OPTIONS: CanonOptions = CanonOptions {
    isomeric: false,
    wildcard_labels: false,
};

/// Vocabulary key of a fragment graph.
pub fn block_key(graph: &Molecule) -> String {
    canonical_smiles(graph, KEY_OPTIONS)
}

impl Block {
    pub fn new(graph: Molecule) -> Block {
        let key = block_key(&graph);
        let smiles = canonical_smiles(&graph, CanonOptions::default());
        Block {
            attachment_count: graph.wildcard_count(),
            graph,
            key,
            smiles,
        }
    }

    pub fn heavy_atom_count(&self) -> usize {
        self.graph.heavy_atom_count()
    }

    /// Index of the wildcard carrying `label`.
    pub fn wildcard_with_label(&self, label: u16) -> Option<usize> {
        self.graph
            .atoms()
            .iter()
            .position(|a| a.is_wildcard() && a.isotope == Some(label))
    }

    /// Canonical SMILES of the block with every wildcard replaced by a
    /// hydrogen; the key for common-name lookup.
    pub fn parent_scaffold(&self) -> String {
        parent_scaffold(&self.graph)
    }
}

/// Canonical SMILES of `graph` with wildcards replaced by hydrogens.
pub fn parent_scaffold(graph: &Molecule) -> String {
    let mut b = MolBuilder::new();
    let mut map = vec![usize::MAX; graph.atom_count()];
    let mut extra_h = vec![0u8; graph.atom_count()];
    for bond in graph.bonds() {
        if graph.atom(bond.begin).is_wildcard() {
            extra_h[bond.end] += bond.order.valence() as u8;
        }
        if graph.atom(bond.end).is_wildcard() {
            extra_h[bond.begin] += bond.order.valence() as u8;
        }
    }
    for (i, atom) in graph.atoms().iter().enumerate() {
        if atom.is_wildcard() {
            continue;
        }
        let mut a = atom.clone();
        a.stereo = None;
        a.hydrogens += extra_h[i];
        map[i] = b.add_atom(a);
    }
    for bond in graph.bonds() {
        let (x, y) = (map[bond.begin], map[bond.end]);
        if x != usize::MAX && y != usize::MAX {
            b.add_bond(x, y, bond.order);
        }
    }
    match b.build() {
        Ok(m) => canonical_smiles(&m, CanonOptions::default()),
        Err(_) => String::new(),
    }
}

/// Fragments of a molecule cut at a bond set.
#[derive(Clone, Debug)]
pub struct DecompositionLayout {
    /// In path order when `is_path`, otherwise in parent atom order.
    pub fragments: Vec<Block>,
    pub cut_bonds: Vec<usize>,
    pub is_path: bool,
}

/// True iff the layout is not a simple path of fragments.
pub fn has_branch(layout: &DecompositionLayout) -> bool {
    !layout.is_path
}

/// Cuts `bonds` and arranges the fragments. When the fragment adjacency
/// graph is a path, fragments are listed along it and labeled so that each
/// block's forward wildcard is `[2*]` and the next block's backward wildcard
/// is `[1*]`. Of the two directions, the one whose sequence of block heavy
/// atom counts is smaller wins, then the smaller sequence of keys.
pub fn layout(mol: &Molecule, bonds: &[usize]) -> DecompositionLayout {
    let frags = fragment_on_bonds(mol, bonds);
    let mut cut_bonds = bonds.to_vec();
    cut_bonds.sort_unstable();
    match path_order(&frags, bonds.len()) {
        None => DecompositionLayout {
            fragments: frags.into_iter().map(|f| Block::new(f.mol)).collect(),
            cut_bonds,
            is_path: false,
        },
        Some(order) => {
            let order = orient(&frags, order);
            DecompositionLayout {
                fragments: label_path(frags, &order),
                cut_bonds,
                is_path: true,
            }
        }
    }
}

/// Fragment indices along the path, or `None` if the fragment tree branches.
pub(crate) fn path_order(frags: &[Fragment], cut_count: usize) -> Option<Vec<usize>> {
    if frags.len() == 1 {
        return Some(vec![0]);
    }
    if frags.iter().any(|f| f.wildcards.len() > 2) || frags.len() != cut_count + 1 {
        return None;
    }
    // cut bond -> the two fragments it joins
    let mut ends: Vec<(usize, Vec<usize>)> = Vec::new();
    for (fi, f) in frags.iter().enumerate() {
        for &(b, _) in &f.wildcards {
            match ends.iter_mut().find(|(x, _)| *x == b) {
                Some((_, v)) => v.push(fi),
                None => ends.push((b, vec![fi])),
            }
        }
    }
    let start = frags.iter().position(|f| f.wildcards.len() == 1)?;
    let mut order = vec![start];
    let mut via = usize::MAX;
    let mut current = start;
    while order.len() < frags.len() {
        let next_cut = frags[current].wildcards.iter().map(|&(b, _)| b).find(|&b| b != via)?;
        let (_, pair) = ends.iter().find(|(x, _)| *x == next_cut)?;
        let next = if pair[0] == current { pair[1] } else { pair[0] };
        order.push(next);
        via = next_cut;
        current = next;
    }
    Some(order)
}

fn orient(frags: &[Fragment], mut order: Vec<usize>) -> Vec<usize> {
    if order.len() < 2 {
        return order;
    }
    let heavy: Vec<usize> = order.iter().map(|&i| frags[i].mol.heavy_atom_count()).collect();
    let keys: Vec<String> = order.iter().map(|&i| block_key(&frags[i].mol)).collect();
    if should_reverse(&heavy, &keys) {
        order.reverse();
    }
    order
}

/// Whether a path listed with these per-block heavy atom counts and keys
/// reads the other way round: smaller count sequence first, then smaller
/// key sequence.
pub(crate) fn should_reverse<K: Ord>(heavy: &[usize], keys: &[K]) -> bool {
    let rev_heavy = heavy.iter().rev();
    match rev_heavy.cmp(heavy.iter()) {
        core::cmp::Ordering::Less => true,
        core::cmp::Ordering::Greater => false,
        core::cmp::Ordering::Equal => keys.iter().rev().lt(keys.iter()),
    }
}

/// Labels wildcards along `order` and builds the blocks.
fn label_path(frags: Vec<Fragment>, order: &[usize]) -> Vec<Block> {
    let mut slots: Vec<Option<Fragment>> = frags.into_iter().map(Some).collect();
    let mut out = Vec::with_capacity(order.len());
    let mut prev_cut = usize::MAX;
    for (pos, &fi) in order.iter().enumerate() {
        let f = slots[fi].take().unwrap();
        let next_cut = order.get(pos + 1).map(|_| {
            f.wildcards
                .iter()
                .map(|&(b, _)| b)
                .find(|&b| b != prev_cut)
                .unwrap()
        });
        let graph = relabel(&f.mol, &f.wildcards, next_cut);
        out.push(Block::new(graph));
        prev_cut = next_cut.unwrap_or(usize::MAX);
    }
    out
}

/// Copy of `mol` with path labels on its wildcards.
fn relabel(mol: &Molecule, wildcards: &[(usize, usize)], forward_cut: Option<usize>) -> Molecule {
    let mut m = mol.clone();
    for &(cut, w) in wildcards {
        let label = if Some(cut) == forward_cut { FORWARD_LABEL } else { BACKWARD_LABEL };
        m.set_wildcard_label(w, Some(label));
    }
    m
}

/// Rejoins blocks along a path: the forward wildcard of each block bonds to
/// the backward wildcard of the next, the paired wildcards are removed and
/// the result is fully sanitized (rings, aromaticity, valence). The backward
/// wildcard of the first block and the forward wildcard of the last one, if
/// present, are kept.
pub fn join_blocks(blocks: &[&Molecule]) -> Result<Molecule, JoinError> {
    let find = |k: usize, label: u16| -> Result<Option<usize>, JoinError> {
        let mut found = None;
        for (i, atom) in blocks[k].atoms().iter().enumerate() {
            if atom.is_wildcard() && atom.isotope == Some(label) {
                if found.is_some() {
                    return Err(JoinError::DuplicateLabel { block: k, label });
                }
                found = Some(i);
            }
        }
        Ok(found)
    };
    // (forward wildcard of k, its neighbor, backward wildcard of k+1, its neighbor)
    let mut joins = Vec::with_capacity(blocks.len().saturating_sub(1));
    for k in 0..blocks.len().saturating_sub(1) {
        let single = |k: usize, label: u16| -> Result<(usize, usize, BondOrder), JoinError> {
            let w = find(k, label)?.ok_or(JoinError::MissingAttachment { block: k, label })?;
            match blocks[k].neighbors(w) {
                &[(n, b)] => Ok((w, n, blocks[k].bond(b).order)),
                _ => Err(JoinError::MissingAttachment { block: k, label }),
            }
        };
        let (wa, na, oa) = single(k, FORWARD_LABEL)?;
        let (wb, nb, ob) = single(k + 1, BACKWARD_LABEL)?;
        if oa != ob {
            return Err(JoinError::BondMismatch { block: k });
        }
        joins.push((wa, na, wb, nb));
    }
    let mut b = MolBuilder::new();
    let mut maps: Vec<Vec<usize>> = Vec::with_capacity(blocks.len());
    let mut dropped: Vec<Vec<bool>> = Vec::with_capacity(blocks.len());
    for (k, block) in blocks.iter().enumerate() {
        let mut drop = vec![false; block.atom_count()];
        if k > 0 {
            drop[joins[k - 1].2] = true;
        }
        if k + 1 < blocks.len() {
            drop[joins[k].0] = true;
        }
        let mut map = vec![usize::MAX; block.atom_count()];
        for (i, atom) in block.atoms().iter().enumerate() {
            if !drop[i] {
                map[i] = b.add_atom(atom.clone());
            }
        }
        maps.push(map);
        dropped.push(drop);
    }
    // A removed wildcard stands for the atom across the new bond, both for
    // the bond itself and for stereo references.
    for (k, &(wa, na, wb, nb)) in joins.iter().enumerate() {
        maps[k][wa] = maps[k + 1][nb];
        maps[k + 1][wb] = maps[k][na];
    }
    for (k, block) in blocks.iter().enumerate() {
        let map = &maps[k];
        for bond in block.bonds() {
            // the joining bond is emitted once, from the earlier block
            if k > 0 && (bond.begin == joins[k - 1].2 || bond.end == joins[k - 1].2) {
                continue;
            }
            let bi = b.add_bond(map[bond.begin], map[bond.end], bond.order);
            if let Some(mut st) = bond.stereo {
                st.begin_ref = map[st.begin_ref];
                st.end_ref = map[st.end_ref];
                b.bond_mut(bi).stereo = Some(st);
            }
        }
        for i in 0..block.atom_count() {
            if dropped[k][i] {
                continue;
            }
            if let Some(st) = b.atom_mut(map[i]).stereo.as_mut() {
                for r in st.order.iter_mut() {
                    if let StereoRef::Atom(a) = *r {
                        *r = StereoRef::Atom(if a == usize::MAX { a } else { map[a] });
                    }
                }
            }
        }
    }
    Ok(b.build()?)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JoinError {
    #[error("block {block} has no single-bonded [{label}*] attachment")]
    MissingAttachment { block: usize, label: u16 },
    #[error("block {block} carries more than one [{label}*]")]
    DuplicateLabel { block: usize, label: u16 },
    #[error("attachment bonds of blocks {block} and the next differ in order")]
    BondMismatch { block: usize },
    #[error(transparent)]
    Sanitize(#[from] crate::sanitize::SanitizeError),
}
