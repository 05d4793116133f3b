//! Text and JSON formats read and written by the command-line tool.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use bfe_core::pocket::{Hotspot, ResidueId};
use bfe_core::screening::{AdmetProbabilities, CandidateRecord};
use bfe_core::tokenizer::{Fragmentation, NameTable, UNNAMED};
use bfe_core::vocab::Vocabulary;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

/// Common scaffold names shipped with the tool.
pub const BUILTIN_NAMES: &str = include_str!("../data/names.tsv");
/// Small vocabulary seeded for the imatinib walk-through.
pub const DEMO_VOCAB: &str = include_str!("../data/demo_vocab.tsv");

pub fn load_vocabulary(path: &Path) -> Result<Vocabulary> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Vocabulary::from_text(&text).with_context(|| format!("parsing vocabulary {}", path.display()))
}

pub fn save_vocabulary(v: &Vocabulary, path: &Path) -> Result<()> {
    fs::write(path, v.to_text()).with_context(|| format!("writing {}", path.display()))
}

pub fn builtin_names() -> NameTable {
    NameTable::from_text(BUILTIN_NAMES).expect("shipped name table is valid")
}

pub fn load_names(path: &Path) -> Result<NameTable> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    NameTable::from_text(&text).with_context(|| format!("parsing name table {}", path.display()))
}

/// Fixed-precision float for byte-stable JSON.
pub fn fixed(v: f64, decimals: usize) -> Box<RawValue> {
    RawValue::from_string(format!("{v:.decimals$}")).expect("formatted float is valid JSON")
}

#[derive(Serialize)]
struct ResidueJson<'a> {
    chain: &'a str,
    resname: &'a str,
    resseq: i32,
    icode: &'a str,
}

impl<'a> From<&'a ResidueId> for ResidueJson<'a> {
    fn from(r: &'a ResidueId) -> Self {
        ResidueJson {
            chain: &r.chain,
            resname: &r.resname,
            resseq: r.resseq,
            icode: &r.icode,
        }
    }
}

#[derive(Serialize)]
struct HotspotJson<'a> {
    rank: usize,
    ligand_atom_index: usize,
    element: &'a str,
    #[serde(rename = "available_volume_A3")]
    available_volume_a3: Box<RawValue>,
    grid_count: usize,
    neighboring_residues: Vec<ResidueJson<'a>>,
}

pub fn hotspots_json(hotspots: &[Hotspot]) -> String {
    let rows: Vec<HotspotJson> = hotspots
        .iter()
        .map(|h| HotspotJson {
            rank: h.rank,
            ligand_atom_index: h.ligand_atom_index,
            element: &h.element,
            available_volume_a3: fixed(h.volume, 3),
            grid_count: h.grid_count,
            neighboring_residues: h.neighbors.iter().map(ResidueJson::from).collect(),
        })
        .collect();
    serde_json::to_string_pretty(&rows).expect("serializable")
}

#[derive(Serialize)]
struct ContextJson<'a> {
    element: &'a str,
    #[serde(rename = "available_volume_A3")]
    available_volume_a3: Box<RawValue>,
    neighboring_residues: Vec<ResidueJson<'a>>,
    fragmentation: &'a str,
}

/// The four context elements of a hotspot as one JSON object.
pub fn context_json(h: &Hotspot, fragmentation: &str) -> String {
    serde_json::to_string(&ContextJson {
        element: &h.element,
        available_volume_a3: fixed(h.volume, 3),
        neighboring_residues: h.neighbors.iter().map(ResidueJson::from).collect(),
        fragmentation,
    })
    .expect("serializable")
}

#[derive(Serialize)]
struct BlockJson<'a> {
    smiles: &'a str,
    name: &'a str,
    frequency: u64,
}

/// Machine form of a fragmentation: array of `{smiles, name, frequency}`.
pub fn fragmentation_json(f: &Fragmentation, names: &NameTable) -> String {
    let rows: Vec<BlockJson> = f
        .blocks
        .iter()
        .zip(&f.frequencies)
        .map(|(b, &frequency)| BlockJson {
            smiles: &b.smiles,
            name: names.name_of(b).unwrap_or(UNNAMED),
            frequency,
        })
        .collect();
    serde_json::to_string(&rows).expect("serializable")
}

#[derive(Serialize)]
pub struct ClusterJson<'a> {
    pub cluster_id: usize,
    pub representative_smiles: &'a str,
    pub member_smiles: Vec<&'a str>,
}

#[derive(Deserialize)]
struct CandidateJson {
    smiles: String,
    p_dili: Option<f64>,
    p_ames: Option<f64>,
    p_herg: Option<f64>,
    p_pgp: Option<f64>,
    p_hia: Option<f64>,
    p_bbb: Option<f64>,
    qed: Option<f64>,
    sa: Option<f64>,
    logp: Option<f64>,
}

impl From<CandidateJson> for CandidateRecord {
    fn from(c: CandidateJson) -> Self {
        CandidateRecord {
            smiles: c.smiles,
            admet: AdmetProbabilities {
                p_dili: c.p_dili,
                p_ames: c.p_ames,
                p_herg: c.p_herg,
                p_pgp: c.p_pgp,
                p_hia: c.p_hia,
                p_bbb: c.p_bbb,
            },
            qed: c.qed,
            sa: c.sa,
            logp: c.logp,
            descriptors: None,
        }
    }
}

const CANDIDATE_COLUMNS: [&str; 10] = ["smiles", "p_dili", "p_ames", "p_herg", "p_pgp", "p_hia", "p_bbb", "qed", "sa", "logp"];

/// Column positions of a tab-separated candidate header.
#[derive(Clone, Debug)]
pub struct CandidateHeader {
    positions: [Option<usize>; 10],
}

impl CandidateHeader {
    pub fn parse(line: &str) -> Result<CandidateHeader> {
        let mut positions = [None; 10];
        for (i, name) in line.split('\t').enumerate() {
            let name = name.trim().trim_start_matches('#').trim();
            if let Some(c) = CANDIDATE_COLUMNS.iter().position(|&c| c == name) {
                if positions[c].is_some() {
                    bail!("duplicate column {name}");
                }
                positions[c] = Some(i);
            }
        }
        for required in 0..6 {
            if positions[required].is_none() {
                bail!("missing column {}", CANDIDATE_COLUMNS[required]);
            }
        }
        Ok(CandidateHeader { positions })
    }

    pub fn record(&self, line: &str) -> Result<CandidateRecord> {
        let fields: Vec<&str> = line.split('\t').collect();
        let get = |c: usize| -> Result<Option<f64>> {
            let Some(p) = self.positions[c] else { return Ok(None) };
            let f = fields.get(p).map(|s| s.trim()).unwrap_or("");
            if f.is_empty() {
                return Ok(None);
            }
            f.parse::<f64>()
                .map(Some)
                .with_context(|| format!("column {} is not a number: {f}", CANDIDATE_COLUMNS[c]))
        };
        let smiles = fields
            .get(self.positions[0].unwrap())
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .context("empty smiles")?;
        Ok(CandidateRecord {
            smiles: smiles.to_string(),
            admet: AdmetProbabilities {
                p_dili: get(1)?,
                p_ames: get(2)?,
                p_herg: get(3)?,
                p_pgp: get(4)?,
                p_hia: get(5)?,
                p_bbb: get(6)?,
            },
            qed: get(7)?,
            sa: get(8)?,
            logp: get(9)?,
            descriptors: None,
        })
    }
}

pub fn candidate_from_json(line: &str) -> Result<CandidateRecord> {
    let c: CandidateJson = serde_json::from_str(line).context("malformed JSON record")?;
    Ok(c.into())
}

/// Probability or score with six decimals.
pub fn fmt6(v: f64) -> String {
    format!("{v:.6}")
}
