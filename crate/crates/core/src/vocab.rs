//! Single-pass block vocabulary: every contiguous block delimited by a pair
//! of BRICS bonds (or a molecule end) is counted once per occurrence.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::brics::{block_key, fragment_on_bonds, path_order, RuleTable};
use crate::mol::Molecule;
use crate::smiles::parse_smiles;

pub const VOCAB_VERSION: &str = "v1";
pub const DEFAULT_F_MIN: u64 = 20;

/// Work counters for block enumeration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EnumerationStats {
    /// One per 2-subset of the extended bond set, virtual pair included.
    pub breaks: u64,
    /// 2-subsets whose fragmentation branched and were skipped.
    pub branching: u64,
}

impl EnumerationStats {
    pub fn merge(&mut self, other: EnumerationStats) {
        self.breaks += other.breaks;
        self.branching += other.branching;
    }
}

/// Block keys of `mol`, one per non-branching 2-subset of the BRICS bonds
/// extended with a virtual bond at each molecule end.
///
/// A pair of real bonds yields the fragment between them. A real bond `b`
/// paired with the left end yields the side of `b` holding its begin atom,
/// paired with the right end the side holding its end atom. The pair of
/// virtual bonds is the whole molecule and only counts with `include_full`.
pub fn enumerate_blocks(rules: &RuleTable, mol: &Molecule, include_full: bool, stats: &mut EnumerationStats) -> Vec<String> {
    let bonds: Vec<usize> = rules.find_bonds(mol).iter().map(|b| b.bond_index).collect();
    let mut out = Vec::new();
    stats.breaks += 1;
    if include_full {
        out.push(block_key(mol));
    }
    for (i, &b) in bonds.iter().enumerate() {
        let frags = fragment_on_bonds(mol, &[b]);
        let bond = mol.bond(b);
        for end_atom in [bond.begin, bond.end] {
            stats.breaks += 1;
            let side = frags.iter().find(|f| f.atoms.binary_search(&end_atom).is_ok()).unwrap();
            out.push(block_key(&side.mol));
        }
        for &c in &bonds[i + 1..] {
            stats.breaks += 1;
            let frags = fragment_on_bonds(mol, &[b, c]);
            if path_order(&frags, 2).is_none() {
                stats.branching += 1;
                continue;
            }
            let middle = frags.iter().find(|f| f.wildcards.len() == 2).unwrap();
            out.push(block_key(&middle.mol));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum VocabError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("f_min must be at least 1")]
    InvalidFMin,
    #[error("line {line}: missing or malformed header `{expected}`")]
    BadHeader { line: usize, expected: &'static str },
    #[error("line {line}: malformed row")]
    BadRow { line: usize },
    #[error("line {line}: count must be a positive integer")]
    BadCount { line: usize },
    #[error("line {line}: duplicate key {key}")]
    DuplicateKey { line: usize, key: String },
    #[error("cannot merge vocabularies built with different settings")]
    SettingsMismatch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VocabConfig {
    pub f_min: u64,
    pub include_full: bool,
}

impl Default for VocabConfig {
    fn default() -> Self {
        VocabConfig {
            f_min: DEFAULT_F_MIN,
            include_full: false,
        }
    }
}

/// Block key to occurrence count table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    counts: BTreeMap<String, u64>,
    f_min: u64,
    corpus_size: u64,
    include_full: bool,
    version: String,
}

impl Vocabulary {
    pub fn new(config: VocabConfig) -> Result<Vocabulary, VocabError> {
        if config.f_min == 0 {
            return Err(VocabError::InvalidFMin);
        }
        Ok(Vocabulary {
            counts: BTreeMap::new(),
            f_min: config.f_min,
            corpus_size: 0,
            include_full: config.include_full,
            version: VOCAB_VERSION.to_string(),
        })
    }

    pub fn config(&self) -> VocabConfig {
        VocabConfig {
            f_min: self.f_min,
            include_full: self.include_full,
        }
    }

    pub fn f_min(&self) -> u64 {
        self.f_min
    }

    pub fn set_f_min(&mut self, f_min: u64) -> Result<(), VocabError> {
        if f_min == 0 {
            return Err(VocabError::InvalidFMin);
        }
        self.f_min = f_min;
        Ok(())
    }

    pub fn corpus_size(&self) -> u64 {
        self.corpus_size
    }

    pub fn include_full(&self) -> bool {
        self.include_full
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Count of `key`, zero if absent.
    pub fn frequency(&self, key: &str) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.counts.contains_key(key)
    }

    /// Adds `count` occurrences of `key`.
    pub fn add(&mut self, key: String, count: u64) {
        if count > 0 {
            *self.counts.entry(key).or_insert(0) += count;
        }
    }

    /// Counts molecules added without block enumeration.
    pub fn record_molecules(&mut self, n: u64) {
        self.corpus_size += n;
    }

    /// Counts the blocks of one molecule.
    pub fn add_molecule(&mut self, rules: &RuleTable, mol: &Molecule, stats: &mut EnumerationStats) {
        for key in enumerate_blocks(rules, mol, self.include_full, stats) {
            self.add(key, 1);
        }
        self.corpus_size += 1;
    }

    /// Adds another partial count table; the operation is associative and
    /// commutative.
    pub fn merge(&mut self, other: Vocabulary) -> Result<(), VocabError> {
        if other.f_min != self.f_min || other.include_full != self.include_full {
            return Err(VocabError::SettingsMismatch);
        }
        self.corpus_size += other.corpus_size;
        for (k, c) in other.counts {
            self.add(k, c);
        }
        Ok(())
    }

    /// Rows by descending count, then ascending key.
    pub fn rows(&self) -> Vec<(&str, u64)> {
        let mut rows: Vec<(&str, u64)> = self.counts.iter().map(|(k, &c)| (k.as_str(), c)).collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        rows
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "# bfe-vocab {}\n# f_min={}\n# corpus_size={}\n# include_full={}\n",
            self.version, self.f_min, self.corpus_size, self.include_full
        );
        for (k, c) in self.rows() {
            s.push_str(k);
            s.push('\t');
            s.push_str(&c.to_string());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Vocabulary, VocabError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
        let mut header = |prefix: &'static str| -> Result<String, VocabError> {
            let (line, l) = lines.next().unwrap_or((0, ""));
            l.strip_prefix(prefix)
                .map(|v| v.trim().to_string())
                .filter(|v| !v.is_empty())
                .ok_or(VocabError::BadHeader { line, expected: prefix })
        };
        let version = header("# bfe-vocab ")?;
        let bad = |line: usize, expected| VocabError::BadHeader { line, expected };
        let f_min: u64 = header("# f_min=")?.parse().map_err(|_| bad(2, "# f_min="))?;
        if f_min == 0 {
            return Err(VocabError::InvalidFMin);
        }
        let corpus_size: u64 = header("# corpus_size=")?.parse().map_err(|_| bad(3, "# corpus_size="))?;
        let include_full: bool = header("# include_full=")?.parse().map_err(|_| bad(4, "# include_full="))?;
        let mut counts = BTreeMap::new();
        for (line, l) in lines {
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let (key, count) = l.split_once('\t').ok_or(VocabError::BadRow { line })?;
            if key.is_empty() || count.contains('\t') {
                return Err(VocabError::BadRow { line });
            }
            let count: u64 = count.trim().parse().map_err(|_| VocabError::BadCount { line })?;
            if count == 0 {
                return Err(VocabError::BadCount { line });
            }
            if counts.insert(key.to_string(), count).is_some() {
                return Err(VocabError::DuplicateKey {
                    line,
                    key: key.to_string(),
                });
            }
        }
        Ok(Vocabulary {
            counts,
            f_min,
            corpus_size,
            include_full,
            version,
        })
    }
}

/// Outcome of a corpus pass besides the table itself.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BuildReport {
    pub records: u64,
    pub skipped: u64,
    pub stats: EnumerationStats,
}

/// Streams SMILES records into a vocabulary. Unparseable records are
/// skipped and counted.
#[derive(Clone, Debug)]
pub struct VocabBuilder<'r> {
    rules: &'r RuleTable,
    vocab: Vocabulary,
    report: BuildReport,
}

impl<'r> VocabBuilder<'r> {
    pub fn new(rules: &'r RuleTable, config: VocabConfig) -> Result<Self, VocabError> {
        Ok(VocabBuilder {
            rules,
            vocab: Vocabulary::new(config)?,
            report: BuildReport::default(),
        })
    }

    /// Returns false if the record was skipped.
    pub fn add_smiles(&mut self, smiles: &str) -> bool {
        self.report.records += 1;
        match parse_smiles(smiles) {
            Ok(mol) => {
                self.vocab.add_molecule(self.rules, &mol, &mut self.report.stats);
                true
            }
            Err(_) => {
                self.report.skipped += 1;
                false
            }
        }
    }

    pub fn add_molecule(&mut self, mol: &Molecule) {
        self.report.records += 1;
        self.vocab.add_molecule(self.rules, mol, &mut self.report.stats);
    }

    pub fn finish(self) -> Result<(Vocabulary, BuildReport), VocabError> {
        if self.report.records == 0 {
            return Err(VocabError::EmptyCorpus);
        }
        Ok((self.vocab, self.report))
    }
}

/// Builds a vocabulary from SMILES records in one pass.
pub fn build_vocabulary<'a>(
    rules: &RuleTable,
    corpus: impl IntoIterator<Item = &'a str>,
    config: VocabConfig,
) -> Result<(Vocabulary, BuildReport), VocabError> {
    let mut b = VocabBuilder::new(rules, config)?;
    for s in corpus {
        b.add_smiles(s);
    }
    b.finish()
}
