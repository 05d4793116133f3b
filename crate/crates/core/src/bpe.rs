//! Merge-based vocabulary construction used as a baseline: start from the
//! primitive BRICS path of each molecule and repeatedly collapse the most
//! frequent adjacent pair everywhere.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::brics::{join_blocks, layout, Block, JoinError, RuleTable};
use crate::mol::Molecule;
use crate::vocab::{VocabConfig, Vocabulary};

/// Joins `a`'s forward attachment to `b`'s backward one and sanitizes the
/// result. `a`'s backward and `b`'s forward wildcards, if any, are kept.
pub fn merge_fragments(a: &Block, b: &Block) -> Result<Molecule, JoinError> {
    join_blocks(&[&a.graph, &b.graph])
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BpeError {
    #[error("molecule {index} branches under full BRICS decomposition")]
    Branching { index: usize },
    #[error("target size {target} does not exceed the {initial} primitive blocks")]
    TargetTooSmall { target: usize, initial: usize },
    #[error("merge failed: {0}")]
    Join(#[from] JoinError),
}

/// Work counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BpeStats {
    /// Corpus passes, one per selected pair.
    pub iterations: u64,
    /// Pair occurrences collapsed.
    pub merges: u64,
}

/// One accepted merge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeRule {
    pub left: String,
    pub right: String,
    pub merged_key: String,
    pub count: u64,
}

#[derive(Clone, Debug)]
pub struct BpeResult {
    pub vocab: Vocabulary,
    pub merges: Vec<MergeRule>,
    /// False when pairs ran out before the target size.
    pub target_reached: bool,
    pub stats: BpeStats,
}

struct Tokens {
    blocks: Vec<Block>,
    by_smiles: BTreeMap<String, usize>,
}

impl Tokens {
    fn intern(&mut self, block: Block) -> usize {
        if let Some(&i) = self.by_smiles.get(&block.smiles) {
            return i;
        }
        self.by_smiles.insert(block.smiles.clone(), self.blocks.len());
        self.blocks.push(block);
        self.blocks.len() - 1
    }
}

/// Builds a vocabulary of `target_vocab_size` keys by iterative merging.
/// Pairs are ordered (left block first along the path) and identified by
/// the labeled SMILES of both blocks; count ties go to the smaller pair.
pub fn graph_bpe_build(rules: &RuleTable, corpus: &[Molecule], target_vocab_size: usize) -> Result<BpeResult, BpeError> {
    let config = VocabConfig {
        include_full: true,
        ..VocabConfig::default()
    };
    let mut vocab = Vocabulary::new(config).expect("default f_min is valid");
    let mut tokens = Tokens {
        blocks: Vec::new(),
        by_smiles: BTreeMap::new(),
    };
    let mut seqs: Vec<Vec<usize>> = Vec::with_capacity(corpus.len());
    for (index, mol) in corpus.iter().enumerate() {
        let bonds: Vec<usize> = rules.find_bonds(mol).iter().map(|b| b.bond_index).collect();
        let l = layout(mol, &bonds);
        if !l.is_path {
            return Err(BpeError::Branching { index });
        }
        let seq = l
            .fragments
            .into_iter()
            .map(|b| {
                vocab.add(b.key.clone(), 1);
                tokens.intern(b)
            })
            .collect();
        seqs.push(seq);
    }
    vocab.record_molecules(corpus.len() as u64);
    let initial = vocab.len();
    if target_vocab_size <= initial {
        return Err(BpeError::TargetTooSmall {
            target: target_vocab_size,
            initial,
        });
    }
    let mut stats = BpeStats::default();
    let mut merges = Vec::new();
    while vocab.len() < target_vocab_size {
        let mut counts: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        for seq in &seqs {
            for w in seq.windows(2) {
                *counts.entry((w[0], w[1])).or_insert(0) += 1;
            }
        }
        let best = counts.iter().max_by(|(pa, ca), (pb, cb)| {
            ca.cmp(cb).then_with(|| {
                let ka = (&tokens.blocks[pa.0].smiles, &tokens.blocks[pa.1].smiles);
                let kb = (&tokens.blocks[pb.0].smiles, &tokens.blocks[pb.1].smiles);
                kb.cmp(&ka)
            })
        });
        let Some((&(a, b), _)) = best else { break };
        stats.iterations += 1;
        let merged = Block::new(merge_fragments(&tokens.blocks[a], &tokens.blocks[b])?);
        let key = merged.key.clone();
        let m = tokens.intern(merged);
        let mut replaced = 0u64;
        for seq in &mut seqs {
            let mut out = Vec::with_capacity(seq.len());
            let mut i = 0;
            while i < seq.len() {
                if i + 1 < seq.len() && seq[i] == a && seq[i + 1] == b {
                    out.push(m);
                    replaced += 1;
                    i += 2;
                } else {
                    out.push(seq[i]);
                    i += 1;
                }
            }
            *seq = out;
        }
        stats.merges += replaced;
        vocab.add(key.clone(), replaced);
        merges.push(MergeRule {
            left: tokens.blocks[a].smiles.clone(),
            right: tokens.blocks[b].smiles.clone(),
            merged_key: key,
            count: replaced,
        });
    }
    Ok(BpeResult {
        target_reached: vocab.len() >= target_vocab_size,
        vocab,
        merges,
        stats,
    })
}
