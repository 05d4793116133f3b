//! Partitioned corpus work on a rayon pool. Results never depend on the
//! number of workers: partitions are merged in order and per-record
//! outputs keep input order.

use anyhow::{Context, Result};
use bfe_core::brics::RuleTable;
use bfe_core::pocket::{check_inputs, rank_sites, GridConfig, Hotspot, Pocket, Structure, StructureError};
use bfe_core::screening::{tanimoto, Fingerprint, SizeMismatch};
use bfe_core::tokenizer::{Fragmentation, Mode, TokenizeError, Tokenizer};
use bfe_core::vocab::{BuildReport, VocabBuilder, VocabConfig, VocabError, Vocabulary};
use bfe_core::{parse_smiles, SmilesError};
use rayon::prelude::*;

pub fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        b = b.num_threads(t);
    }
    b.build().context("starting worker pool")
}

/// Merged vocabulary of a partitioned build.
#[derive(Clone, Debug)]
pub struct PartitionedBuild {
    pub vocab: Vocabulary,
    pub report: BuildReport,
    /// Positions in the input of records that failed to parse, ascending.
    pub skipped: Vec<usize>,
}

/// Builds one count table per contiguous partition and merges them in
/// partition order.
pub fn build_vocabulary_partitioned(
    rules: &RuleTable,
    records: &[&str],
    config: VocabConfig,
    partitions: usize,
    pool: &rayon::ThreadPool,
) -> Result<PartitionedBuild, VocabError> {
    let partitions = partitions.max(1);
    let chunk = records.len().div_ceil(partitions).max(1);
    let parts: Vec<Result<(Vocabulary, BuildReport, Vec<usize>), VocabError>> = pool.install(|| {
        records
            .par_chunks(chunk)
            .enumerate()
            .map(|(p, part)| {
                let mut b = VocabBuilder::new(rules, config)?;
                let mut bad = Vec::new();
                for (i, s) in part.iter().enumerate() {
                    if !b.add_smiles(s) {
                        bad.push(p * chunk + i);
                    }
                }
                let (v, r) = b.finish()?;
                Ok((v, r, bad))
            })
            .collect()
    });
    let mut total: Option<PartitionedBuild> = None;
    for part in parts {
        let (vocab, report, skipped) = part?;
        match &mut total {
            None => {
                total = Some(PartitionedBuild {
                    vocab,
                    report,
                    skipped,
                })
            }
            Some(t) => {
                t.vocab.merge(vocab)?;
                t.report.records += report.records;
                t.report.skipped += report.skipped;
                t.report.stats.merge(report.stats);
                t.skipped.extend(skipped);
            }
        }
    }
    total.ok_or(VocabError::EmptyCorpus)
}

/// Same lists as `screening::neighbor_lists`, one row per worker task.
pub fn neighbor_lists(fps: &[Fingerprint], cutoff: f64, pool: &rayon::ThreadPool) -> Result<Vec<Vec<usize>>, SizeMismatch> {
    pool.install(|| {
        (0..fps.len())
            .into_par_iter()
            .map(|i| {
                let mut row = Vec::new();
                for (j, other) in fps.iter().enumerate() {
                    if j != i && 1.0 - tanimoto(&fps[i], other)? < cutoff {
                        row.push(j);
                    }
                }
                Ok(row)
            })
            .collect()
    })
}

/// `pocket::identify_hotspots` with ligand atoms evaluated in parallel.
pub fn identify_hotspots(
    receptor: &Structure,
    ligand: &Structure,
    k: usize,
    d_c: f64,
    cfg: &GridConfig,
    pool: &rayon::ThreadPool,
) -> Result<Vec<Hotspot>, StructureError> {
    check_inputs(ligand, k, d_c, cfg)?;
    let pocket = Pocket::new(receptor, ligand, cfg, d_c);
    let heavy = ligand.heavy_atoms();
    let sites = pool.install(|| heavy.par_iter().map(|&i| pocket.evaluate(i, cfg, d_c)).collect());
    Ok(rank_sites(sites, receptor, k))
}

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error(transparent)]
    Smiles(#[from] SmilesError),
    #[error(transparent)]
    Tokenize(#[from] TokenizeError),
}

/// Tokenizes a batch in parallel; the output is aligned with `records`.
pub fn tokenize_batch(
    tokenizer: &Tokenizer,
    vocab: &Vocabulary,
    mode: Mode,
    records: &[&str],
    pool: &rayon::ThreadPool,
) -> Vec<Result<Fragmentation, RecordError>> {
    pool.install(|| {
        records
            .par_iter()
            .map(|s| Ok(tokenizer.tokenize(&parse_smiles(s)?, vocab, mode)?))
            .collect()
    })
}
