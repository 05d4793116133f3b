//! Optional TOML settings file. Every key is optional; command-line flags
//! take precedence over the file, the file over built-in defaults.
//!
//! ```toml
//! threads = 4
//! f_min = 20
//! k = 5
//! d_c = 7.0
//! [grid]
//! edge = 5.0
//! resolution = 0.5
//! receptor_clearance = 2.2
//! ligand_clearance = 1.2
//! [filter]
//! admet = 2.5
//! qed = 0.7
//! [cluster]
//! cutoff = 0.7
//! ```

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

/// Environment variable naming the default settings file.
pub const CONFIG_ENV: &str = "BFE_CONFIG";

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub threads: Option<usize>,
    pub f_min: Option<u64>,
    pub max_bonds: Option<usize>,
    pub k: Option<usize>,
    pub d_c: Option<f64>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub filter: FilterSection,
    #[serde(default)]
    pub cluster: ClusterSection,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub edge: Option<f64>,
    pub resolution: Option<f64>,
    pub receptor_clearance: Option<f64>,
    pub ligand_clearance: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FilterSection {
    pub admet: Option<f64>,
    pub qed: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ClusterSection {
    pub cutoff: Option<f64>,
    pub radius: Option<usize>,
    pub bits: Option<usize>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<FileConfig> {
        Ok(toml::from_str(text)?)
    }

    /// Loads `explicit`, else the file named by `BFE_CONFIG`, else defaults.
    pub fn load(explicit: Option<&Path>) -> Result<FileConfig> {
        let path: Option<PathBuf> = match explicit {
            Some(p) => Some(p.to_path_buf()),
            None => std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from),
        };
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {}", path.display()))?;
        FileConfig::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}
