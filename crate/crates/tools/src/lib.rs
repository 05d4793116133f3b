//! File formats, parallel corpus processing, the timing harness and the
//! `bfe` command-line tool built on `bfe-core`.

pub mod bench;
pub mod config;
pub mod formats;
pub mod parallel;
pub mod pdb;

/// Reads SMILES records: first whitespace-separated field of each line,
/// blank lines and `#` comments skipped. Yields 1-based line numbers.
pub fn smiles_records(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            return None;
        }
        l.split_whitespace().next().map(|s| (i + 1, s))
    })
}
