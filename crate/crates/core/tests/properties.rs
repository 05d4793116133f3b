//! Property tests over the drug-like corpus and random inputs.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use bfe_core::brics::{fragment_on_bonds, join_blocks, layout, RuleTable};
use bfe_core::pocket::{identify_hotspots, GridConfig, Residue, ResidueId, StructAtom, Structure};
use bfe_core::tokenizer::{detokenize, Mode, TokenizeError, Tokenizer};
use bfe_core::screening::{admet_score, butina_cluster, tanimoto, AdmetProbabilities, Fingerprint};
use bfe_core::vocab::{enumerate_blocks, EnumerationStats, VocabConfig, Vocabulary};
use bfe_core::{canonical_smiles, parse_smiles, write_smiles, CanonOptions, Molecule};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn corpus() -> &'static [Molecule] {
    static CELL: OnceLock<Vec<Molecule>> = OnceLock::new();
    CELL.get_or_init(|| {
        let text = include_str!("data/druglike.smi");
        text.lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .map(|l| parse_smiles(l.split_whitespace().next().unwrap()).unwrap())
            .collect()
    })
}

fn rules() -> &'static RuleTable {
    static CELL: OnceLock<RuleTable> = OnceLock::new();
    CELL.get_or_init(RuleTable::builtin)
}

fn small_vocab() -> &'static Vocabulary {
    static CELL: OnceLock<Vocabulary> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut v = Vocabulary::new(VocabConfig::default()).unwrap();
        let mut stats = EnumerationStats::default();
        for m in &corpus()[..80] {
            v.add_molecule(rules(), m, &mut stats);
        }
        v
    })
}

fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    p
}

fn pick_bonds(m: &Molecule, seed: u64) -> Vec<usize> {
    let all: Vec<usize> = rules().find_bonds(m).iter().map(|b| b.bond_index).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = if all.is_empty() { 0 } else { (seed as usize) % (all.len() + 1) };
    let mut s: Vec<usize> = all.choose_multiple(&mut rng, k).copied().collect();
    s.sort_unstable();
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn canonical_form_ignores_atom_order(i in 0usize..1500, seed in any::<u64>()) {
        let m = &corpus()[i];
        let p = m.permuted(&shuffled(m.atom_count(), seed));
        let opts = CanonOptions::default();
        prop_assert_eq!(canonical_smiles(&p, opts), canonical_smiles(m, opts));
        let iso = CanonOptions { isomeric: true, ..opts };
        prop_assert_eq!(canonical_smiles(&p, iso), canonical_smiles(m, iso));
    }

    #[test]
    fn block_set_ignores_atom_order(i in 0usize..1500, seed in any::<u64>()) {
        let m = &corpus()[i];
        prop_assume!(rules().find_bonds(m).len() <= 12);
        let p = m.permuted(&shuffled(m.atom_count(), seed));
        let a: BTreeSet<String> = enumerate_blocks(rules(), m, true, &mut EnumerationStats::default()).into_iter().collect();
        let b: BTreeSet<String> = enumerate_blocks(rules(), &p, true, &mut EnumerationStats::default()).into_iter().collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn fragments_conserve_atoms(i in 0usize..1500, seed in any::<u64>()) {
        let m = &corpus()[i];
        let cuts = pick_bonds(m, seed);
        let frags = fragment_on_bonds(m, &cuts);
        prop_assert_eq!(frags.len(), cuts.len() + 1);
        let mut all: Vec<usize> = frags.iter().flat_map(|f| f.atoms.iter().copied()).collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..m.atom_count()).collect::<Vec<_>>());
        let heavy: usize = frags.iter().map(|f| f.mol.heavy_atom_count()).sum();
        prop_assert_eq!(heavy, m.heavy_atom_count());
        let wildcards: usize = frags.iter().map(|f| f.mol.wildcard_count()).sum();
        prop_assert_eq!(wildcards, 2 * cuts.len());
    }

    #[test]
    fn path_layouts_rejoin(i in 0usize..1500, seed in any::<u64>()) {
        let m = &corpus()[i];
        let cuts = pick_bonds(m, seed);
        let l = layout(m, &cuts);
        prop_assume!(l.is_path);
        for b in &l.fragments {
            prop_assert!(b.attachment_count <= 2);
            let again = parse_smiles(&b.smiles).unwrap();
            prop_assert_eq!(canonical_smiles(&again, CanonOptions::default()), b.smiles.clone());
        }
        let graphs: Vec<&Molecule> = l.fragments.iter().map(|b| &b.graph).collect();
        let back = join_blocks(&graphs).unwrap();
        prop_assert_eq!(write_smiles(&back.without_stereo()), write_smiles(&m.without_stereo()));
    }

    #[test]
    fn vocabulary_ignores_corpus_order(start in 0usize..1400, seed in any::<u64>(), split in 1usize..40) {
        let slice: Vec<&Molecule> = corpus()[start..start + 40].iter().collect();
        let mut whole = Vocabulary::new(VocabConfig::default()).unwrap();
        let mut stats = EnumerationStats::default();
        for m in &slice {
            whole.add_molecule(rules(), m, &mut stats);
        }
        let order = shuffled(slice.len(), seed);
        let mut a = Vocabulary::new(VocabConfig::default()).unwrap();
        let mut b = Vocabulary::new(VocabConfig::default()).unwrap();
        for (n, &j) in order.iter().enumerate() {
            let target = if n < split { &mut a } else { &mut b };
            target.add_molecule(rules(), slice[j], &mut stats);
        }
        b.merge(a).unwrap();
        prop_assert_eq!(b.to_text(), whole.to_text());
    }

    #[test]
    fn tanimoto_is_symmetric_and_bounded(a in prop::collection::btree_set(0usize..256, 0..40), b in prop::collection::btree_set(0usize..256, 0..40)) {
        let fa = Fingerprint::from_bits(256, a.iter().copied());
        let fb = Fingerprint::from_bits(256, b.iter().copied());
        let t = tanimoto(&fa, &fb).unwrap();
        prop_assert_eq!(t, tanimoto(&fb, &fa).unwrap());
        prop_assert!((0.0..=1.0).contains(&t));
        prop_assert_eq!(t == 1.0, a == b);
    }

    #[test]
    fn butina_partitions(sets in prop::collection::vec(prop::collection::btree_set(0usize..64, 1..12), 1..25), cutoff in 0.05f64..1.0) {
        let fps: Vec<Fingerprint> = sets.iter().map(|s| Fingerprint::from_bits(64, s.iter().copied())).collect();
        let clusters = butina_cluster(&fps, cutoff).unwrap();
        let mut seen = vec![0; fps.len()];
        for c in &clusters {
            prop_assert_eq!(c.members[0], c.centroid);
            for &m in &c.members {
                seen[m] += 1;
                if m != c.centroid {
                    prop_assert!(1.0 - tanimoto(&fps[m], &fps[c.centroid]).unwrap() < cutoff);
                }
            }
        }
        prop_assert!(seen.iter().all(|&s| s == 1));
    }

    #[test]
    fn admet_is_monotone(p in prop::array::uniform5(0.0f64..=1.0), which in 0usize..5, delta in 0.0f64..=1.0) {
        let base = AdmetProbabilities::new(p[0], p[1], p[2], p[3], p[4]);
        let mut q = p;
        if which == 4 {
            q[4] = (q[4] + delta).min(1.0);
        } else {
            q[which] = (q[which] - delta).max(0.0);
        }
        let better = AdmetProbabilities::new(q[0], q[1], q[2], q[3], q[4]);
        let (s0, s1) = (admet_score(&base).unwrap(), admet_score(&better).unwrap());
        prop_assert!(s1 >= s0 - 1e-12);
        prop_assert!((0.0..=5.0).contains(&s0));
    }

    #[test]
    fn hotspot_volume_identity(coords in prop::collection::vec(prop::array::uniform3(-6.0f64..6.0), 2..40), res in prop::sample::select(vec![0.25f64, 0.5])) {
        let (lig, rec) = coords.split_at(coords.len() / 3 + 1);
        let build = |pts: &[[f64; 3]]| {
            let atoms = pts.iter().map(|&c| StructAtom { element: "C".into(), coords: c, name: "C".into(), occupancy: 1.0, residue: 0 }).collect();
            let residues = vec![Residue {
                id: ResidueId { chain: "A".into(), resname: "GLY".into(), resseq: 1, icode: String::new() },
                atoms: (0..pts.len()).collect(),
            }];
            Structure::new(atoms, residues).unwrap()
        };
        let cfg = GridConfig { resolution: res, ..GridConfig::default() };
        let hs = identify_hotspots(&build(rec), &build(lig), 5, 7.0, &cfg).unwrap();
        prop_assert!(hs.windows(2).all(|w| w[0].grid_count >= w[1].grid_count));
        for h in &hs {
            prop_assert!((h.volume - h.grid_count as f64 * res * res * res).abs() < 1e-9);
        }
    }

    #[test]
    fn tokenize_then_detokenize(i in 0usize..1500, f_min in 1u64..6, naive in any::<bool>()) {
        let mut vocab = small_vocab().clone();
        vocab.set_f_min(f_min).unwrap();
        let m = &corpus()[i];
        let mode = if naive { Mode::NaiveBrics } else { Mode::Bfe };
        let f = match Tokenizer::default().tokenize(m, &vocab, mode) {
            Err(TokenizeError::TooManyBonds { .. } | TokenizeError::BranchingLayout) => return Ok(()),
            other => other.unwrap(),
        };
        for (b, &c) in f.blocks.iter().zip(&f.frequencies) {
            prop_assert_eq!(vocab.frequency(&b.key), c);
        }
        let back = detokenize(&f).unwrap();
        prop_assert_eq!(write_smiles(&back.without_stereo()), write_smiles(&m.without_stereo()));
    }
}
