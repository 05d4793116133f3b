//! Break versus merge timing on seeded synthetic molecules.
//!
//! Break op: cut one 2-subset of a molecule's BRICS bonds. Merge op: join
//! the two blocks of a single-cut layout back together, sanitization
//! included. Each size gets its own fixed sample set; every repetition
//! sweeps the whole set enough times to fill a short batch per op, and the
//! reported mean is the median of the per-repetition means.

use std::fmt::Write as _;
use std::hint::black_box;
use std::time::Instant;

use anyhow::{bail, ensure, Result};
use bfe_core::brics::{fragment_on_bonds, layout, Block, RuleTable};
use bfe_core::bpe::merge_fragments;
use bfe_core::{parse_smiles, Molecule};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Ratios published for sizes 10, 15 and 20, shown for context only.
pub const REFERENCE_RATIOS: [(usize, f64); 3] = [(10, 11.84), (15, 15.22), (20, 20.35)];

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub samples: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub pin: bool,
    /// Minimum wall time of one timed batch, in seconds.
    pub batch_seconds: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: vec![10, 15, 20],
            samples: 300,
            repetitions: 5,
            seed: 7,
            pin: true,
            batch_seconds: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub sizes: Vec<usize>,
    pub break_time: Vec<f64>,
    pub merge_time: Vec<f64>,
    pub ratio: Vec<f64>,
    pub samples: usize,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("size,break_mean_s,merge_mean_s,ratio,samples\n");
        for i in 0..self.sizes.len() {
            writeln!(
                s,
                "{},{:.6e},{:.6e},{:.3},{}",
                self.sizes[i], self.break_time[i], self.merge_time[i], self.ratio[i], self.samples
            )
            .unwrap();
        }
        s
    }

    pub fn to_table(&self) -> String {
        let mut s = format!(
            "{:>5}  {:>12}  {:>12}  {:>8}  {:>9}  {:>7}\n",
            "size", "break (us)", "merge (us)", "ratio", "reference", "samples"
        );
        for i in 0..self.sizes.len() {
            let reference = REFERENCE_RATIOS
                .iter()
                .find(|r| r.0 == self.sizes[i])
                .map(|r| format!("{:.2}x", r.1))
                .unwrap_or_else(|| "-".into());
            writeln!(
                s,
                "{:>5}  {:>12.3}  {:>12.3}  {:>7.2}x  {:>9}  {:>7}",
                self.sizes[i],
                self.break_time[i] * 1e6,
                self.merge_time[i] * 1e6,
                self.ratio[i],
                reference,
                self.samples
            )
            .unwrap();
        }
        s
    }

    /// True when the ratio rises strictly from each size to the next.
    pub fn strictly_increasing(&self) -> bool {
        self.ratio.windows(2).all(|w| w[1] > w[0])
    }
}

const START: [&str; 3] = ["c1ccccc1", "c1ccncc1", "c1ccsc1"];
/// Para-disubstituted rings written so the next atom bonds opposite the
/// previous one.
const MIDDLE: [&str; 3] = ["c1ccc(cc1)", "c1ccc(nc1)", "c1ccc(s1)"];
const LINKERS: [&str; 5] = ["", "O", "N", "C", "C(=O)N"];

fn ring_size(s: &str) -> usize {
    s.chars().filter(|c| c.is_ascii_alphabetic()).count()
}

/// Aryl units joined by short linkers, padded with an alkyl tail to exactly
/// `n` heavy atoms.
fn draw(rng: &mut ChaCha8Rng, n: usize) -> String {
    let start = START.choose(rng).unwrap();
    let mut s = String::from(*start);
    let mut left = n.saturating_sub(ring_size(start));
    loop {
        let linker = LINKERS.choose(rng).unwrap();
        let unit = MIDDLE.choose(rng).unwrap();
        let need = ring_size(linker) + ring_size(unit);
        if need + 1 > left || rng.gen_bool(0.2) {
            break;
        }
        // a middle ring needs something after it; keep one atom for that
        s.push_str(linker);
        s.push_str(unit);
        left -= need;
    }
    if left > 0 {
        let linker = *LINKERS[1..4].choose(rng).unwrap();
        s.push_str(linker);
        for _ in 1..left {
            s.push('C');
        }
    }
    s
}

/// One benchmark item: a molecule with a 2-subset to cut and the two
/// labeled blocks of a single cut.
pub struct Sample {
    pub mol: Molecule,
    pub pair: [usize; 2],
    pub halves: [Block; 2],
}

/// `count` molecules of exactly `n` heavy atoms, each with at least
/// two BRICS bonds.
pub fn generate(rules: &RuleTable, n: usize, count: usize, seed: u64) -> Result<Vec<Sample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > count * 200 + 1000 {
            bail!("could only generate {} molecules of {n} heavy atoms", out.len());
        }
        let smiles = draw(&mut rng, n);
        let Ok(mol) = parse_smiles(&smiles) else { continue };
        if mol.heavy_atom_count() != n {
            continue;
        }
        let bonds: Vec<usize> = rules.find_bonds(&mol).iter().map(|b| b.bond_index).collect();
        if bonds.len() < 2 {
            continue;
        }
        let mut pick = bonds.clone();
        pick.shuffle(&mut rng);
        let mut pair = [pick[0], pick[1]];
        pair.sort_unstable();
        let single = layout(&mol, &pick[..1]);
        let [a, b]: [Block; 2] = single.fragments.try_into().expect("one cut gives two blocks");
        out.push(Sample {
            mol,
            pair,
            halves: [a, b],
        });
    }
    Ok(out)
}

/// Restricts the process to the CPU it is running on.
#[cfg(target_os = "linux")]
pub fn pin_to_current_cpu() -> bool {
    // SAFETY: plain syscalls on a zeroed, fully owned cpu_set_t.
    unsafe {
        let cpu = libc::sched_getcpu();
        if cpu < 0 {
            return false;
        }
        let mut set: libc::cpu_set_t = std::mem::zeroed();
        libc::CPU_SET(cpu as usize, &mut set);
        libc::sched_setaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &set) == 0
    }
}

#[cfg(not(target_os = "linux"))]
pub fn pin_to_current_cpu() -> bool {
    false
}

/// Mean seconds per op over `passes` sweeps of the sample set.
fn time_per_op(samples: &[Sample], passes: usize, op: impl Fn(&Sample)) -> Result<f64> {
    let t = Instant::now();
    for _ in 0..passes {
        for s in samples {
            op(s);
        }
    }
    let d = t.elapsed().as_secs_f64();
    ensure!(d > 0.0, "elapsed time below timer resolution");
    Ok(d / (samples.len() * passes) as f64)
}

/// Sweeps per timed batch so that one batch lasts about `target` seconds.
fn passes_for(per_op: f64, samples: usize, target: f64) -> usize {
    ((target / (per_op * samples as f64)).ceil() as usize).clamp(1, 10_000)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

pub fn run(rules: &RuleTable, cfg: &BenchConfig) -> Result<BenchReport> {
    ensure!(cfg.samples >= 1, "need at least one sample per size");
    ensure!(cfg.repetitions >= 3, "need at least three repetitions");
    ensure!(!cfg.sizes.is_empty(), "no sizes given");
    ensure!(cfg.sizes.windows(2).all(|w| w[0] < w[1]), "sizes must be strictly increasing");
    if cfg.pin {
        pin_to_current_cpu();
    }
    let break_op = |s: &Sample| {
        black_box(fragment_on_bonds(black_box(&s.mol), &s.pair));
    };
    let merge_op = |s: &Sample| {
        black_box(merge_fragments(black_box(&s.halves[0]), &s.halves[1]).expect("halves rejoin"));
    };
    let mut report = BenchReport {
        sizes: cfg.sizes.clone(),
        break_time: Vec::new(),
        merge_time: Vec::new(),
        ratio: Vec::new(),
        samples: cfg.samples,
    };
    for &n in &cfg.sizes {
        let samples = generate(rules, n, cfg.samples, cfg.seed)?;
        // warm-up, not recorded; it also sizes the timed batches
        let bp = passes_for(time_per_op(&samples, 1, break_op)?, samples.len(), cfg.batch_seconds);
        let mp = passes_for(time_per_op(&samples, 1, merge_op)?, samples.len(), cfg.batch_seconds);
        let mut br = Vec::with_capacity(cfg.repetitions);
        let mut mr = Vec::with_capacity(cfg.repetitions);
        for _ in 0..cfg.repetitions {
            br.push(time_per_op(&samples, bp, break_op)?);
            mr.push(time_per_op(&samples, mp, merge_op)?);
        }
        let (b, m) = (median(br), median(mr));
        report.break_time.push(b);
        report.merge_time.push(m);
        report.ratio.push(m / b);
    }
    Ok(report)
}
