//! Frequency-guided fragmentation of a molecule into a path of blocks, the
//! inverse join, and the named text rendering.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::brics::{
    block_key, extract_fragment, fragment_on_bonds, join_blocks, layout, should_reverse, Block, JoinError, RuleTable,
};
use crate::canon::{canonical_smiles, CanonOptions};
use crate::mol::Molecule;
use crate::smiles::{parse_smiles, SmilesError};
use crate::vocab::Vocabulary;

pub const DEFAULT_MAX_BONDS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Coarsest frequent decomposition, most uniform frequencies.
    Bfe,
    /// Every BRICS bond broken.
    NaiveBrics,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TokenizeError {
    #[error("{found} BRICS bonds exceed the limit of {max}")]
    TooManyBonds { found: usize, max: usize },
    #[error("breaking every BRICS bond gives a branched layout")]
    BranchingLayout,
    #[error("no linear decomposition exists (disconnected molecule?)")]
    NoLinearDecomposition,
}

/// One non-branching way of cutting a molecule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    /// Cut bond indices, ascending.
    pub cuts: Vec<usize>,
    /// Block keys in path order.
    pub keys: Vec<String>,
    mask: u64,
}

impl Candidate {
    pub fn block_count(&self) -> usize {
        self.keys.len()
    }
}

/// A molecule as a path of blocks.
#[derive(Clone, Debug)]
pub struct Fragmentation {
    pub blocks: Vec<Block>,
    /// Vocabulary count of each block.
    pub frequencies: Vec<u64>,
    pub mode: Mode,
}

#[derive(Clone, Debug)]
pub struct Tokenizer {
    pub rules: RuleTable,
    pub max_bonds: usize,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Tokenizer {
            rules: RuleTable::builtin(),
            max_bonds: DEFAULT_MAX_BONDS,
        }
    }
}

impl Tokenizer {
    pub fn new(rules: RuleTable, max_bonds: usize) -> Tokenizer {
        Tokenizer { rules, max_bonds }
    }

    /// Every subset of BRICS bonds whose fragments form a path, sorted by
    /// block count, then key sequence, then cut set.
    pub fn enumerate_decompositions(&self, mol: &Molecule) -> Result<Vec<Candidate>, TokenizeError> {
        let bonds: Vec<usize> = self.rules.find_bonds(mol).iter().map(|b| b.bond_index).collect();
        let r = bonds.len();
        if r > self.max_bonds || r >= 64 {
            return Err(TokenizeError::TooManyBonds {
                found: r,
                max: self.max_bonds.min(63),
            });
        }
        let prims = fragment_on_bonds(mol, &bonds);
        if prims.len() != r + 1 {
            return Err(TokenizeError::NoLinearDecomposition);
        }
        let mut prim_of = vec![0usize; mol.atom_count()];
        for (p, f) in prims.iter().enumerate() {
            for &a in &f.atoms {
                prim_of[a] = p;
            }
        }
        let ends: Vec<(usize, usize)> = bonds
            .iter()
            .map(|&b| (prim_of[mol.bond(b).begin], prim_of[mol.bond(b).end]))
            .collect();

        // primitive set -> (key, heavy atoms)
        let mut cache: BTreeMap<u64, (String, usize)> = BTreeMap::new();
        let mut scratch = vec![usize::MAX; mol.atom_count()];
        let mut block_of = |set: u64, cut: u64, cache: &mut BTreeMap<u64, (String, usize)>| -> (String, usize) {
            if let Some(v) = cache.get(&set) {
                return v.clone();
            }
            let mut keep: Vec<usize> = (0..prims.len())
                .filter(|p| set >> p & 1 == 1)
                .flat_map(|p| prims[p].atoms.iter().copied())
                .collect();
            keep.sort_unstable();
            let mut boundary = Vec::new();
            for (j, &b) in bonds.iter().enumerate() {
                if cut >> j & 1 == 0 {
                    continue;
                }
                let (p, q) = ends[j];
                let bond = mol.bond(b);
                match (set >> p & 1 == 1, set >> q & 1 == 1) {
                    (true, false) => boundary.push((b, bond.end)),
                    (false, true) => boundary.push((b, bond.begin)),
                    _ => {}
                }
            }
            let frag = extract_fragment(mol, &keep, &boundary, &mut scratch);
            let v = (block_key(&frag.mol), frag.mol.heavy_atom_count());
            cache.insert(set, v.clone());
            v
        };

        let n = prims.len();
        let mut out = Vec::new();
        let mut parent = vec![0usize; n];
        for cut in 0u64..(1u64 << r) {
            for (p, slot) in parent.iter_mut().enumerate() {
                *slot = p;
            }
            fn root(parent: &mut [usize], mut x: usize) -> usize {
                while parent[x] != x {
                    parent[x] = parent[parent[x]];
                    x = parent[x];
                }
                x
            }
            for (j, &(p, q)) in ends.iter().enumerate() {
                if cut >> j & 1 == 0 {
                    let (a, b) = (root(&mut parent, p), root(&mut parent, q));
                    parent[a] = b;
                }
            }
            let comp: Vec<usize> = (0..n).map(|p| root(&mut parent, p)).collect();
            // cut-degree and neighbors of each component root
            let mut links: Vec<Vec<usize>> = vec![Vec::new(); n];
            let mut branching = false;
            for (j, &(p, q)) in ends.iter().enumerate() {
                if cut >> j & 1 == 1 {
                    let (a, b) = (comp[p], comp[q]);
                    links[a].push(b);
                    links[b].push(a);
                    if links[a].len() > 2 || links[b].len() > 2 {
                        branching = true;
                        break;
                    }
                }
            }
            if branching {
                continue;
            }
            let mut sets = vec![0u64; n];
            for p in 0..n {
                sets[comp[p]] |= 1 << p;
            }
            let start = (0..n).find(|&c| comp[c] == c && links[c].len() <= 1).unwrap();
            let mut order = vec![start];
            let mut prev = usize::MAX;
            while let Some(&next) = links[*order.last().unwrap()].iter().find(|&&x| x != prev) {
                prev = *order.last().unwrap();
                order.push(next);
            }
            let mut keys = Vec::with_capacity(order.len());
            let mut heavy = Vec::with_capacity(order.len());
            for &c in &order {
                let (k, h) = block_of(sets[c], cut, &mut cache);
                keys.push(k);
                heavy.push(h);
            }
            if should_reverse(&heavy, &keys) {
                keys.reverse();
            }
            out.push(Candidate {
                cuts: (0..r).filter(|j| cut >> j & 1 == 1).map(|j| bonds[j]).collect(),
                keys,
                mask: cut,
            });
        }
        out.sort_by(|a, b| {
            a.keys
                .len()
                .cmp(&b.keys.len())
                .then_with(|| a.keys.cmp(&b.keys))
                .then_with(|| a.mask.cmp(&b.mask))
        });
        Ok(out)
    }

    pub fn tokenize(&self, mol: &Molecule, vocab: &Vocabulary, mode: Mode) -> Result<Fragmentation, TokenizeError> {
        let cuts = match mode {
            Mode::Bfe => {
                let candidates = self.enumerate_decompositions(mol)?;
                let chosen = select_decomposition(&candidates, vocab).ok_or(TokenizeError::NoLinearDecomposition)?;
                candidates[chosen].cuts.clone()
            }
            Mode::NaiveBrics => self.rules.find_bonds(mol).iter().map(|b| b.bond_index).collect(),
        };
        let l = layout(mol, &cuts);
        if !l.is_path {
            return Err(match mode {
                Mode::NaiveBrics => TokenizeError::BranchingLayout,
                Mode::Bfe => TokenizeError::NoLinearDecomposition,
            });
        }
        let frequencies = l.fragments.iter().map(|b| vocab.frequency(&b.key)).collect();
        Ok(Fragmentation {
            blocks: l.fragments,
            frequencies,
            mode,
        })
    }
}

/// Index of the chosen candidate. Scanning by block count, the first count
/// at which some candidate has every block at or above `f_min` wins; among
/// the passing candidates of that count the one with the smallest
/// frequency variance is returned, earlier candidates winning ties. With no
/// passing candidate, the first candidate with the most blocks is returned.
/// `None` only for an empty list.
pub fn select_decomposition(candidates: &[Candidate], vocab: &Vocabulary) -> Option<usize> {
    let f_min = vocab.f_min();
    let mut best: Option<(usize, u128)> = None;
    for (i, c) in candidates.iter().enumerate() {
        if let Some((b, _)) = best {
            if candidates[b].block_count() != c.block_count() {
                break;
            }
        }
        let freqs: Vec<u64> = c.keys.iter().map(|k| vocab.frequency(k)).collect();
        if freqs.iter().any(|&f| f < f_min) {
            continue;
        }
        // k^2 times the population variance; k is fixed within a count
        let k = freqs.len() as u128;
        let sum: u128 = freqs.iter().map(|&f| f as u128).sum();
        let sq: u128 = freqs.iter().map(|&f| (f as u128) * (f as u128)).sum();
        let score = k * sq - sum * sum;
        if best.map_or(true, |(_, s)| score < s) {
            best = Some((i, score));
        }
    }
    if let Some((i, _)) = best {
        return Some(i);
    }
    let most = candidates.iter().map(Candidate::block_count).max()?;
    candidates.iter().position(|c| c.block_count() == most)
}

/// Rejoins the blocks of a fragmentation into one molecule.
pub fn detokenize(f: &Fragmentation) -> Result<Molecule, JoinError> {
    let graphs: Vec<&Molecule> = f.blocks.iter().map(|b| &b.graph).collect();
    join_blocks(&graphs)
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum NameTableError {
    #[error("line {line}: expected `<smiles>\\t<name>`")]
    BadRow { line: usize },
    #[error("line {line}: {source}")]
    BadSmiles { line: usize, source: SmilesError },
}

/// Parent scaffold SMILES to common name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NameTable {
    entries: BTreeMap<String, String>,
}

impl NameTable {
    pub fn new() -> NameTable {
        NameTable::default()
    }

    /// Registers a name; the SMILES is canonicalized first. Later entries
    /// replace earlier ones.
    pub fn insert(&mut self, smiles: &str, name: &str) -> Result<(), SmilesError> {
        let key = canonical_smiles(&parse_smiles(smiles)?, CanonOptions::default());
        self.entries.insert(key, name.to_string());
        Ok(())
    }

    pub fn get(&self, canonical: &str) -> Option<&str> {
        self.entries.get(canonical).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Tab-separated `<smiles>\t<name>` rows; `#` starts a comment line.
    pub fn from_text(text: &str) -> Result<NameTable, NameTableError> {
        let mut t = NameTable::new();
        t.extend_from_text(text)?;
        Ok(t)
    }

    pub fn extend_from_text(&mut self, text: &str) -> Result<(), NameTableError> {
        for (i, l) in text.lines().enumerate() {
            let line = i + 1;
            let l = l.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let (smiles, name) = l.split_once('\t').ok_or(NameTableError::BadRow { line })?;
            let name = name.trim();
            if name.is_empty() {
                return Err(NameTableError::BadRow { line });
            }
            self.insert(smiles.trim(), name)
                .map_err(|source| NameTableError::BadSmiles { line, source })?;
        }
        Ok(())
    }

    /// Name of a block's parent scaffold.
    pub fn name_of(&self, block: &Block) -> Option<&str> {
        self.get(&block.parent_scaffold())
    }
}

pub const UNNAMED: &str = "unnamed";

/// `name [smiles] -> name [smiles] -> ...`
pub fn render(f: &Fragmentation, names: &NameTable) -> String {
    let mut s = String::new();
    for (i, b) in f.blocks.iter().enumerate() {
        if i > 0 {
            s.push_str(" -> ");
        }
        s.push_str(names.name_of(b).unwrap_or(UNNAMED));
        s.push_str(" [");
        s.push_str(&b.smiles);
        s.push(']');
    }
    s
}

/// Block names only: `name -> name -> ...`.
pub fn render_names(f: &Fragmentation, names: &NameTable) -> String {
    let parts: Vec<&str> = f.blocks.iter().map(|b| names.name_of(b).unwrap_or(UNNAMED)).collect();
    parts.join(" -> ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::VocabConfig;
    use crate::write_smiles;

    fn vocab(entries: &[(&str, u64)]) -> Vocabulary {
        let mut v = Vocabulary::new(VocabConfig::default()).unwrap();
        for &(s, c) in entries {
            v.add(block_key(&parse_smiles(s).unwrap()), c);
        }
        v
    }

    fn cand(keys: &[&str]) -> Candidate {
        Candidate {
            cuts: Vec::new(),
            keys: keys.iter().map(|k| k.to_string()).collect(),
            mask: 0,
        }
    }

    #[test]
    fn zero_bonds_single_candidate() {
        let t = Tokenizer::default();
        let m = parse_smiles("c1ccccc1").unwrap();
        let c = t.enumerate_decompositions(&m).unwrap();
        assert_eq!(c.len(), 1);
        assert!(c[0].cuts.is_empty());
        for mode in [Mode::Bfe, Mode::NaiveBrics] {
            let f = t.tokenize(&m, &vocab(&[]), mode).unwrap();
            assert_eq!(f.blocks.len(), 1);
            assert_eq!(write_smiles(&detokenize(&f).unwrap()), write_smiles(&m));
        }
    }

    #[test]
    fn three_primitives_give_four_candidates() {
        let t = Tokenizer::default();
        let m = parse_smiles("c1ccccc1-c1ccc(cc1)-c1ccncc1").unwrap();
        let c = t.enumerate_decompositions(&m).unwrap();
        let counts: Vec<usize> = c.iter().map(Candidate::block_count).collect();
        assert_eq!(counts, [1, 2, 2, 3]);
    }

    #[test]
    fn star_subsets_filtered() {
        let t = Tokenizer::default();
        let m = parse_smiles("c1ccccc1N(c1ccccc1)c1ccccc1").unwrap();
        let c = t.enumerate_decompositions(&m).unwrap();
        // 8 subsets, only the full cut branches
        assert_eq!(c.len(), 7);
        assert!(c.iter().all(|c| c.block_count() <= 3));
        assert_eq!(
            t.tokenize(&m, &vocab(&[]), Mode::NaiveBrics).unwrap_err(),
            TokenizeError::BranchingLayout
        );
    }

    #[test]
    fn min_variance_wins() {
        let mut v = Vocabulary::new(VocabConfig::default()).unwrap();
        for (k, c) in [("AB", 100), ("C", 100), ("A", 50), ("BC", 150)] {
            v.add(k.to_string(), c);
        }
        let cands = [cand(&["A", "BC"]), cand(&["AB", "C"])];
        assert_eq!(select_decomposition(&cands, &v), Some(1));
    }

    #[test]
    fn threshold_gates_coarse_candidates() {
        let mut v = Vocabulary::new(VocabConfig::default()).unwrap();
        for (k, c) in [("ABC", 5), ("A", 30), ("BC", 30)] {
            v.add(k.to_string(), c);
        }
        let cands = [cand(&["ABC"]), cand(&["A", "BC"])];
        assert_eq!(select_decomposition(&cands, &v), Some(1));
    }

    #[test]
    fn fallback_is_finest() {
        let v = Vocabulary::new(VocabConfig::default()).unwrap();
        let cands = [cand(&["ABC"]), cand(&["A", "BC"]), cand(&["A", "B", "C"])];
        assert_eq!(select_decomposition(&cands, &v), Some(2));
        assert_eq!(select_decomposition(&[], &v), None);
    }

    #[test]
    fn too_many_bonds() {
        let t = Tokenizer::new(RuleTable::builtin(), 1);
        let m = parse_smiles("c1ccccc1-c1ccc(cc1)-c1ccncc1").unwrap();
        assert_eq!(
            t.enumerate_decompositions(&m).unwrap_err(),
            TokenizeError::TooManyBonds { found: 2, max: 1 }
        );
    }

    #[test]
    fn render_names() {
        let t = Tokenizer::default();
        let m = parse_smiles("c1ccccc1-c1ccncc1").unwrap();
        let f = t.tokenize(&m, &vocab(&[]), Mode::NaiveBrics).unwrap();
        let mut names = NameTable::new();
        names.insert("c1ccncc1", "pyridine").unwrap();
        let text = render(&f, &names);
        assert!(text.contains("unnamed [[2*]c1ccccc1]") || text.contains("unnamed [[1*]c1ccccc1]"), "{text}");
        assert!(text.contains(" -> pyridine ["), "{text}");
    }

    #[test]
    fn name_table_parsing() {
        let t = NameTable::from_text("# names\nc1ccncc1\tpyridine\n\nC1CNCCN1\tpiperazine\n").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.get(&write_smiles(&parse_smiles("n1ccccc1").unwrap())), Some("pyridine"));
        assert!(matches!(NameTable::from_text("c1ccccc1"), Err(NameTableError::BadRow { line: 1 })));
        assert!(matches!(NameTable::from_text("c1cc\tx"), Err(NameTableError::BadSmiles { .. })));
    }
}
