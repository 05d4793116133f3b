//! Core algorithms for BRICS-based fragment enumeration (BFE): molecular
//! graphs and SMILES, BRICS decomposition, block vocabularies, the block
//! tokenizer, a graph BPE baseline, pocket hotspot geometry and screening
//! utilities.
//!
//! The crate is `no_std` and only needs an allocator. File formats, parallel
//! corpus processing and the command-line tool live in `bfe-tools`.

#![no_std]

extern crate alloc;

pub mod aromatic;
pub mod bpe;
pub mod brics;
pub mod canon;
pub mod descriptors;
pub mod element;
pub mod mol;
pub mod pocket;
pub mod rings;
pub mod sanitize;
pub mod screening;
pub mod smarts;
pub mod smiles;
pub mod tokenizer;
pub mod vocab;

pub use brics::{find_brics_bonds, Block, BricsBond, DecompositionLayout, RuleTable};
pub use canon::{canonical_ranks, canonical_smiles, write_smiles, CanonOptions};
pub use descriptors::{compute_descriptors, Descriptors};
pub use element::Element;
pub use mol::{Atom, Bond, BondOrder, MolBuilder, Molecule};
pub use smiles::{parse_smiles, SmilesError};
