//! Candidate triage: circular fingerprints, Tanimoto similarity, Butina
//! clustering, the ADMET aggregate and fragment filters.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::descriptors::Descriptors;
use crate::mol::Molecule;

pub const DEFAULT_BITS: usize = 2048;
pub const DEFAULT_RADIUS: usize = 2;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    words: Vec<u64>,
    nbits: usize,
    radius: usize,
}

impl Fingerprint {
    pub fn empty(nbits: usize, radius: usize) -> Fingerprint {
        Fingerprint {
            words: vec![0; nbits.div_ceil(64)],
            nbits,
            radius,
        }
    }

    pub fn from_bits(nbits: usize, bits: impl IntoIterator<Item = usize>) -> Fingerprint {
        let mut fp = Fingerprint::empty(nbits, 0);
        for b in bits {
            fp.set(b % nbits);
        }
        fp
    }

    pub fn set(&mut self, bit: usize) {
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.nbits
    }

    pub fn is_empty(&self) -> bool {
        self.nbits == 0
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nbits).filter(|&b| self.get(b))
    }
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv(values: &[u64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for byte in v.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    mix(h)
}

/// Morgan-style fingerprint: atom identifiers start from (element, degree,
/// charge, aromaticity, ring membership) and absorb the sorted neighbor
/// identifiers with bond orders once per radius step. Every identifier at
/// every step sets one bit.
pub fn circular_fingerprint(mol: &Molecule, radius: usize, nbits: usize) -> Fingerprint {
    assert!(nbits > 0, "fingerprint needs at least one bit");
    let mut fp = Fingerprint::empty(nbits, radius);
    let n = mol.atom_count();
    let mut ids: Vec<u64> = (0..n)
        .map(|i| {
            let a = mol.atom(i);
            fnv(&[
                a.element.atomic_number() as u64,
                mol.degree(i) as u64,
                a.charge as i64 as u64,
                a.aromatic as u64,
                mol.rings().atom_in_ring(i) as u64,
            ])
        })
        .collect();
    for &id in &ids {
        fp.set((id % nbits as u64) as usize);
    }
    let mut env: Vec<u64> = Vec::new();
    for step in 1..=radius {
        let next: Vec<u64> = (0..n)
            .map(|i| {
                let mut nbrs: Vec<(u64, u64)> = mol
                    .neighbors(i)
                    .iter()
                    .map(|&(w, b)| (mol.bond(b).order.code() as u64, ids[w]))
                    .collect();
                nbrs.sort_unstable();
                env.clear();
                env.push(step as u64);
                env.push(ids[i]);
                for (o, id) in nbrs {
                    env.push(o);
                    env.push(id);
                }
                fnv(&env)
            })
            .collect();
        ids = next;
        for &id in &ids {
            fp.set((id % nbits as u64) as usize);
        }
    }
    fp
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("fingerprint sizes differ ({0} vs {1} bits)")]
pub struct SizeMismatch(pub usize, pub usize);

/// |a and b| / |a or b|, 1.0 for two empty sets.
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, SizeMismatch> {
    if a.nbits != b.nbits {
        return Err(SizeMismatch(a.nbits, b.nbits));
    }
    let (mut both, mut either) = (0u32, 0u32);
    for (x, y) in a.words.iter().zip(&b.words) {
        both += (x & y).count_ones();
        either += (x | y).count_ones();
    }
    Ok(if either == 0 { 1.0 } else { both as f64 / either as f64 })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cluster {
    pub centroid: usize,
    /// Centroid first, then the others ascending.
    pub members: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ClusterError {
    #[error("nothing to cluster")]
    Empty,
    #[error("cutoff must be in (0, 1]")]
    BadCutoff,
    #[error(transparent)]
    Size(#[from] SizeMismatch),
}

/// Neighbor lists under Tanimoto distance strictly below `cutoff`.
pub fn neighbor_lists(fps: &[Fingerprint], cutoff: f64) -> Result<Vec<Vec<usize>>, ClusterError> {
    let mut out = vec![Vec::new(); fps.len()];
    for i in 0..fps.len() {
        for j in i + 1..fps.len() {
            if 1.0 - tanimoto(&fps[i], &fps[j])? < cutoff {
                out[i].push(j);
                out[j].push(i);
            }
        }
    }
    for l in &mut out {
        l.sort_unstable();
    }
    Ok(out)
}

/// Greedy sphere exclusion over precomputed neighbor lists: the unassigned
/// item with the most unassigned neighbors (lowest index on ties) becomes a
/// centroid and takes those neighbors with it.
pub fn butina_from_neighbors(neighbors: &[Vec<usize>]) -> Vec<Cluster> {
    let n = neighbors.len();
    let mut assigned = vec![false; n];
    let mut free: Vec<usize> = neighbors.iter().map(Vec::len).collect();
    let mut out = Vec::new();
    let mut left = n;
    while left > 0 {
        let mut best = usize::MAX;
        for i in 0..n {
            if !assigned[i] && (best == usize::MAX || free[i] > free[best]) {
                best = i;
            }
        }
        let mut members = vec![best];
        members.extend(neighbors[best].iter().copied().filter(|&j| !assigned[j]));
        for &m in &members {
            assigned[m] = true;
            left -= 1;
            for &j in &neighbors[m] {
                free[j] -= 1;
            }
        }
        out.push(Cluster { centroid: best, members });
    }
    out
}

pub fn butina_cluster(fps: &[Fingerprint], cutoff: f64) -> Result<Vec<Cluster>, ClusterError> {
    if fps.is_empty() {
        return Err(ClusterError::Empty);
    }
    if !(cutoff > 0.0 && cutoff <= 1.0) {
        return Err(ClusterError::BadCutoff);
    }
    Ok(butina_from_neighbors(&neighbor_lists(fps, cutoff)?))
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AdmetProbabilities {
    pub p_dili: Option<f64>,
    pub p_ames: Option<f64>,
    pub p_herg: Option<f64>,
    pub p_pgp: Option<f64>,
    pub p_hia: Option<f64>,
    /// Informational; not part of the score.
    pub p_bbb: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AdmetError {
    #[error("missing probability {0}")]
    Missing(&'static str),
    #[error("probability {0} outside [0, 1]")]
    OutOfRange(&'static str),
}

impl AdmetProbabilities {
    pub fn new(p_dili: f64, p_ames: f64, p_herg: f64, p_pgp: f64, p_hia: f64) -> AdmetProbabilities {
        AdmetProbabilities {
            p_dili: Some(p_dili),
            p_ames: Some(p_ames),
            p_herg: Some(p_herg),
            p_pgp: Some(p_pgp),
            p_hia: Some(p_hia),
            p_bbb: None,
        }
    }

    pub fn validate(&self) -> Result<(), AdmetError> {
        for (name, v) in self.named() {
            if let Some(v) = v {
                if !(0.0..=1.0).contains(&v) {
                    return Err(AdmetError::OutOfRange(name));
                }
            }
        }
        Ok(())
    }

    fn named(&self) -> [(&'static str, Option<f64>); 6] {
        [
            ("p_dili", self.p_dili),
            ("p_ames", self.p_ames),
            ("p_herg", self.p_herg),
            ("p_pgp", self.p_pgp),
            ("p_hia", self.p_hia),
            ("p_bbb", self.p_bbb),
        ]
    }
}

/// Sum of favorable-outcome probabilities, in [0, 5].
pub fn admet_score(p: &AdmetProbabilities) -> Result<f64, AdmetError> {
    p.validate()?;
    let get = |name, v: Option<f64>| v.ok_or(AdmetError::Missing(name));
    Ok((1.0 - get("p_dili", p.p_dili)?)
        + (1.0 - get("p_ames", p.p_ames)?)
        + (1.0 - get("p_herg", p.p_herg)?)
        + (1.0 - get("p_pgp", p.p_pgp)?)
        + get("p_hia", p.p_hia)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CandidateRecord {
    pub smiles: String,
    pub admet: AdmetProbabilities,
    pub qed: Option<f64>,
    pub sa: Option<f64>,
    pub logp: Option<f64>,
    pub descriptors: Option<Descriptors>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterConfig {
    pub admet_threshold: f64,
    pub qed_threshold: f64,
    /// Keep records without a QED value.
    pub admet_only: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            admet_threshold: 2.5,
            qed_threshold: 0.7,
            admet_only: false,
        }
    }
}

/// Strict thresholds; a record whose score cannot be computed fails.
pub fn passes_filter(r: &CandidateRecord, cfg: &FilterConfig) -> bool {
    let Ok(score) = admet_score(&r.admet) else {
        return false;
    };
    if score <= cfg.admet_threshold {
        return false;
    }
    match r.qed {
        Some(q) => q > cfg.qed_threshold,
        None => cfg.admet_only,
    }
}

pub fn filter_candidates<'a>(records: &'a [CandidateRecord], cfg: &FilterConfig) -> Vec<&'a CandidateRecord> {
    records.iter().filter(|r| passes_filter(r, cfg)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ro3Criterion {
    MolecularWeight,
    CLogP,
    HydrogenBondDonors,
    HydrogenBondAcceptors,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleOfThree {
    pub pass: bool,
    pub violations: Vec<Ro3Criterion>,
    pub logp_evaluated: bool,
}

/// MW <= 300, HBD <= 3, HBA <= 3 and, when given, cLogP <= 3.
pub fn rule_of_three(d: &Descriptors, logp: Option<f64>) -> RuleOfThree {
    let mut violations = Vec::new();
    if d.molecular_weight > 300.0 {
        violations.push(Ro3Criterion::MolecularWeight);
    }
    if let Some(l) = logp {
        if !(l <= 3.0) {
            violations.push(Ro3Criterion::CLogP);
        }
    }
    if d.hbd > 3 {
        violations.push(Ro3Criterion::HydrogenBondDonors);
    }
    if d.hba > 3 {
        violations.push(Ro3Criterion::HydrogenBondAcceptors);
    }
    RuleOfThree {
        pass: violations.is_empty(),
        violations,
        logp_evaluated: logp.is_some(),
    }
}
