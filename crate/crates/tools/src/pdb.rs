//! Fixed-column PDB / PDBQT reader.
//!
//! | Columns | Field                       |
//! |---------|-----------------------------|
//! | 1-6     | record name (ATOM / HETATM) |
//! | 13-16   | atom name                   |
//! | 17      | altLoc                      |
//! | 18-20   | residue name                |
//! | 22      | chain                       |
//! | 23-26   | residue number              |
//! | 27      | insertion code              |
//! | 31-54   | x, y, z (8.3 each)          |
//! | 55-60   | occupancy                   |
//! | 77-78   | element (PDB) / 78-79 AutoDock type (PDBQT) |

use std::collections::HashMap;
use std::str::FromStr;

use bfe_core::pocket::{Residue, ResidueId, StructAtom, Structure, StructureError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Pdb,
    Pdbqt,
}

impl Format {
    /// Guess from a file extension, defaulting to PDB.
    pub fn from_path(path: &std::path::Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("pdbqt") => Format::Pdbqt,
            _ => Format::Pdb,
        }
    }
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pdb" => Ok(Format::Pdb),
            "pdbqt" => Ok(Format::Pdbqt),
            _ => Err(format!("unknown structure format {s}")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PdbError {
    #[error("no ATOM/HETATM records")]
    NoAtoms,
    #[error("line {line}: malformed coordinate field `{field}`")]
    BadCoordinate { line: usize, field: String },
    #[error("line {line}: malformed residue number `{field}`")]
    BadResidueNumber { line: usize, field: String },
    #[error(transparent)]
    Structure(#[from] StructureError),
}

fn col(line: &str, from: usize, to: usize) -> &str {
    let to = to.min(line.len());
    if from >= to {
        return "";
    }
    line.get(from..to).unwrap_or("")
}

/// "CL" -> "Cl", "c" -> "C".
fn normalize_symbol(s: &str) -> String {
    let mut out = String::with_capacity(2);
    for (i, ch) in s.chars().filter(|c| c.is_ascii_alphabetic()).enumerate() {
        if i == 0 {
            out.push(ch.to_ascii_uppercase());
        } else {
            out.push(ch.to_ascii_lowercase());
        }
    }
    out
}

/// Element from an AutoDock atom type.
fn autodock_element(t: &str) -> String {
    match t.to_ascii_uppercase().as_str() {
        "A" => "C".into(),
        "OA" | "OS" => "O".into(),
        "NA" | "NS" => "N".into(),
        "SA" => "S".into(),
        "HD" | "HS" => "H".into(),
        "CL" => "Cl".into(),
        "BR" => "Br".into(),
        other => normalize_symbol(&other[..1.min(other.len())]),
    }
}

/// Element from the atom name when the element column is blank: the
/// leading letters, two of them only for names that start in column 13.
fn element_from_name(raw_name: &str) -> String {
    let letters: String = raw_name.chars().filter(|c| c.is_ascii_alphabetic()).collect();
    if letters.is_empty() {
        return String::new();
    }
    let two_letter = raw_name.starts_with(|c: char| c.is_ascii_alphabetic())
        && raw_name.len() >= 2
        && matches!(
            &letters.to_ascii_uppercase()[..2.min(letters.len())],
            "CL" | "BR" | "FE" | "ZN" | "MG" | "MN" | "NA" | "CA" | "CU" | "SE"
        );
    if two_letter {
        normalize_symbol(&letters[..2])
    } else {
        normalize_symbol(&letters[..1])
    }
}

struct Raw {
    name: String,
    alt: char,
    element: String,
    coords: [f64; 3],
    occupancy: f64,
    residue: ResidueId,
}

/// Parses the first model of a PDB or PDBQT text. Of alternate
/// conformers only the highest-occupancy one is kept (the first on ties).
pub fn parse_structure(text: &str, format: Format) -> Result<Structure, PdbError> {
    let mut raws: Vec<Raw> = Vec::new();
    let mut seen_model = false;
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let record = col(line, 0, 6);
        if record.starts_with("MODEL") {
            if seen_model {
                break;
            }
            seen_model = true;
            continue;
        }
        if record.starts_with("ENDMDL") {
            break;
        }
        if record != "ATOM  " && record != "HETATM" && record.trim_end() != "ATOM" {
            continue;
        }
        let coord = |a: usize, b: usize| -> Result<f64, PdbError> {
            let f = col(line, a, b).trim();
            match f.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(PdbError::BadCoordinate {
                    line: n,
                    field: f.to_string(),
                }),
            }
        };
        let coords = [coord(30, 38)?, coord(38, 46)?, coord(46, 54)?];
        let raw_name = col(line, 12, 16);
        let element = match format {
            Format::Pdb => normalize_symbol(col(line, 76, 78).trim()),
            Format::Pdbqt => {
                let t = col(line, 77, 79).trim();
                if t.is_empty() {
                    String::new()
                } else {
                    autodock_element(t)
                }
            }
        };
        let element = if element.is_empty() { element_from_name(raw_name) } else { element };
        let resseq_field = col(line, 22, 26).trim();
        let resseq = if resseq_field.is_empty() {
            0
        } else {
            resseq_field.parse().map_err(|_| PdbError::BadResidueNumber {
                line: n,
                field: resseq_field.to_string(),
            })?
        };
        raws.push(Raw {
            name: raw_name.trim().to_string(),
            alt: col(line, 16, 17).chars().next().unwrap_or(' '),
            element,
            coords,
            occupancy: col(line, 54, 60).trim().parse().unwrap_or(1.0),
            residue: ResidueId {
                chain: col(line, 21, 22).trim().to_string(),
                resname: col(line, 17, 20).trim().to_string(),
                resseq,
                icode: col(line, 26, 27).trim().to_string(),
            },
        });
    }
    if raws.is_empty() {
        return Err(PdbError::NoAtoms);
    }
    // best conformer per (residue, atom name) among alternates
    let mut best: HashMap<(&ResidueId, &str), usize> = HashMap::new();
    for (i, r) in raws.iter().enumerate() {
        if r.alt == ' ' {
            continue;
        }
        best.entry((&r.residue, r.name.as_str()))
            .and_modify(|b| {
                if r.occupancy > raws[*b].occupancy {
                    *b = i;
                }
            })
            .or_insert(i);
    }
    let keep: Vec<bool> = raws
        .iter()
        .enumerate()
        .map(|(i, r)| r.alt == ' ' || best[&(&r.residue, r.name.as_str())] == i)
        .collect();

    let mut residues: Vec<Residue> = Vec::new();
    let mut residue_of: HashMap<ResidueId, usize> = HashMap::new();
    let mut atoms = Vec::new();
    for (r, _) in raws.iter().zip(&keep).filter(|(_, &k)| k) {
        let ri = *residue_of.entry(r.residue.clone()).or_insert_with(|| {
            residues.push(Residue {
                id: r.residue.clone(),
                atoms: Vec::new(),
            });
            residues.len() - 1
        });
        residues[ri].atoms.push(atoms.len());
        atoms.push(StructAtom {
            element: r.element.clone(),
            coords: r.coords,
            name: r.name.clone(),
            occupancy: r.occupancy,
            residue: ri,
        });
    }
    Ok(Structure::new(atoms, residues)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE: &str = "ATOM      1  CA  ALA A   1       1.000   2.000   3.000  1.00  0.00           C";

    #[test]
    fn single_atom() {
        let s = parse_structure(LINE, Format::Pdb).unwrap();
        assert_eq!(s.atoms().len(), 1);
        assert_eq!(s.atoms()[0].coords, [1.0, 2.0, 3.0]);
        assert_eq!(s.atoms()[0].element, "C");
        assert_eq!(s.residues()[0].id.resname, "ALA");
    }

    #[test]
    fn hydrogens_are_not_heavy() {
        let text = format!("{LINE}\nATOM      2  H   ALA A   1       1.500   2.000   3.000  1.00  0.00           H\n");
        let s = parse_structure(&text, Format::Pdb).unwrap();
        assert_eq!(s.atoms().len(), 2);
        assert_eq!(s.heavy_atoms(), [0]);
    }

    #[test]
    fn element_fallback_and_errors() {
        let text = "HETATM    1 CL1  LIG B   7      -1.000   0.500  10.250  1.00  0.00";
        let s = parse_structure(text, Format::Pdb).unwrap();
        assert_eq!(s.atoms()[0].element, "Cl");
        assert!(matches!(parse_structure("REMARK x\n", Format::Pdb), Err(PdbError::NoAtoms)));
        let bad = "ATOM      1  CA  ALA A   1       1.0x0   2.000   3.000  1.00  0.00           C";
        assert!(matches!(parse_structure(bad, Format::Pdb), Err(PdbError::BadCoordinate { line: 1, .. })));
    }

    #[test]
    fn first_model_only_and_altloc() {
        let text = "\
MODEL        1
ATOM      1  CA AALA A   1       1.000   2.000   3.000  0.40  0.00           C
ATOM      2  CA BALA A   1       1.500   2.000   3.000  0.60  0.00           C
ENDMDL
MODEL        2
ATOM      1  CA  ALA A   1       9.000   9.000   9.000  1.00  0.00           C
ENDMDL
";
        let s = parse_structure(text, Format::Pdb).unwrap();
        assert_eq!(s.atoms().len(), 1);
        assert_eq!(s.atoms()[0].coords[0], 1.5);
    }

    #[test]
    fn pdbqt_types() {
        let text = "\
ATOM      1  C1  LIG     1       0.000   1.000   2.000  0.00  0.00    +0.000 A
ATOM      2  O1  LIG     1       1.000   1.000   2.000  0.00  0.00    -0.300 OA
ATOM      3  H1  LIG     1       2.000   1.000   2.000  0.00  0.00    +0.200 HD
";
        let s = parse_structure(text, Format::Pdbqt).unwrap();
        let el: Vec<&str> = s.atoms().iter().map(|a| a.element.as_str()).collect();
        assert_eq!(el, ["C", "O", "H"]);
        assert_eq!(s.heavy_atoms(), [0, 1]);
    }
}
