use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

const IMATINIB: &str = "Cc1ccc(NC(=O)c2ccc(CN3CCN(C)CC3)cc2)cc1Nc1nccc(-c2cccnc2)n1";

fn bfe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bfe"))
        .args(args)
        .env_remove("BFE_CONFIG")
        .output()
        .expect("binary runs")
}

fn bfe_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_bfe"))
        .args(args)
        .env_remove("BFE_CONFIG")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn golden(name: &str) -> String {
    fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

#[test]
fn version_line() {
    let o = bfe(&["--version"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "bfe 0.1.0 (BRICS rules v1, vocabulary format v1)");
}

#[test]
fn imatinib_walkthrough_matches_golden() {
    let smi = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/imatinib.smi");
    let smi = smi.to_str().unwrap();
    let o = bfe(&["tokenize", "--in", smi]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), golden("imatinib_render.txt"));
    let o = bfe(&["tokenize", "--in", smi, "--names-only"]);
    assert_eq!(stdout(&o), golden("imatinib_names.txt"));
}

#[test]
fn json_tokens_detokenize_to_the_same_molecule() {
    let o = bfe_stdin(&["--format", "json", "tokenize", "--in", "-"], &format!("{IMATINIB}\n"));
    assert!(o.status.success(), "{}", stderr(&o));
    let json = stdout(&o);
    let rows: serde_json::Value = serde_json::from_str(json.trim()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 5);

    let o = bfe_stdin(&["detokenize", "--in", "-"], &json);
    assert!(o.status.success(), "{}", stderr(&o));
    let back = stdout(&o);
    // the rejoined molecule tokenizes exactly like the original
    let again = bfe_stdin(&["tokenize", "--in", "-"], &back);
    assert_eq!(stdout(&again), golden("imatinib_render.txt"));

    let o = bfe_stdin(&["detokenize", "--in", "-"], &golden("imatinib_render.txt"));
    assert_eq!(stdout(&o), back);
}

#[test]
fn built_vocabulary_feeds_tokenize() {
    let dir = tempfile::tempdir().unwrap();
    let corpus: String = std::iter::repeat(format!("{IMATINIB}\nCc1ccccc1C(=O)NCc1ccncc1\n")).take(5).collect();
    let input = write(dir.path(), "corpus.smi", &corpus);
    let vocab = dir.path().join("v.tsv");
    let vocab = vocab.to_str().unwrap();
    let o = bfe(&["vocab", "--in", &input, "--out", vocab, "--f-min", "3", "--partitions", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(vocab).unwrap();
    assert!(text.starts_with("# bfe-vocab v1\n# f_min=3\n# corpus_size=10\n"), "{text}");

    let o = bfe(&["--format", "csv", "tokenize", "--in", &input, "--vocab", vocab]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| !l.is_empty()).count(), 11, "{out}");
}

#[test]
fn malformed_records_warn_or_fail() {
    let input = format!("{IMATINIB}\nC1CC(\n");
    let o = bfe_stdin(&["tokenize", "--in", "-", "--names-only"], &input);
    assert!(o.status.success());
    assert_eq!(stdout(&o), golden("imatinib_names.txt"));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let o = bfe_stdin(&["--strict", "tokenize", "--in", "-"], &input);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(bfe(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(bfe(&["tokenize", "--in", "/no/such/file.smi"]).status.code(), Some(1));
    assert_eq!(bfe(&["cluster", "--in", "/no/such/file.smi", "--cutoff", "0.5"]).status.code(), Some(1));
    let o = bfe_stdin(&["cluster", "--in", "-", "--cutoff", "1.5"], "CCO\n");
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn cluster_groups_duplicates() {
    let o = bfe_stdin(&["cluster", "--in", "-"], "c1ccccc1O\nCCCCCCCCN\nOc1ccccc1\n");
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["cluster_id"], 1);
    assert_eq!(rows[0]["representative_smiles"], "c1ccccc1O");
    assert_eq!(rows[0]["member_smiles"].as_array().unwrap().len(), 2);
    assert_eq!(rows[1]["member_smiles"][0], "CCCCCCCCN");
}

#[test]
fn filter_keeps_passing_rows() {
    let dir = tempfile::tempdir().unwrap();
    let table = "smiles\tp_dili\tp_ames\tp_herg\tp_pgp\tp_hia\tqed\n\
                 CCO\t0.1\t0.1\t0.1\t0.1\t0.9\t0.8\n\
                 CCN\t0.9\t0.9\t0.9\t0.9\t0.1\t0.8\n\
                 CCC\t0.1\t0.1\t0.1\t0.1\t0.9\t0.7\n";
    let input = write(dir.path(), "c.tsv", table);
    let o = bfe(&["filter", "--in", &input]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "smiles\tadmet_score\tqed\nCCO\t4.500000\t0.800000\n");

    let o = bfe(&["--format", "json", "filter", "--in", &input, "--ro3"]);
    let row: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(row["ro3_pass"], true);
}

#[test]
fn hotspots_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let atom = |serial: usize, name: &str, res: &str, seq: i32, x: f64, el: &str| {
        format!("ATOM  {serial:>5} {name:<4} {res:>3} A{seq:>4}    {x:>8.3}{:>8.3}{:>8.3}  1.00  0.00          {el:>2}\n", 0.0, 0.0)
    };
    let receptor = atom(1, "CA", "ALA", 10, 3.0, "C") + &atom(2, "CB", "SER", 11, 12.0, "C");
    let ligand = atom(1, "C1", "LIG", 1, 0.0, "C") + &atom(2, "O1", "LIG", 1, 1.4, "O");
    let rec = write(dir.path(), "r.pdb", &receptor);
    let lig = write(dir.path(), "l.pdb", &ligand);
    let o = bfe(&["hotspots", "--receptor", &rec, "--ligand", &lig, "--k", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r["rank"], i + 1);
        let n = r["grid_count"].as_u64().unwrap() as f64;
        assert_eq!(r["available_volume_A3"].as_f64().unwrap(), n * 0.125);
        assert_eq!(r["neighboring_residues"][0]["resname"], "ALA");
        assert_eq!(r["neighboring_residues"].as_array().unwrap().len(), 1);
    }

    let o = bfe(&["--format", "text", "hotspots", "--receptor", &rec, "--ligand", &lig, "--k", "1", "--ligand-smiles", "CO"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(!stdout(&o).is_empty());
    assert_eq!(bfe(&["hotspots", "--receptor", &rec, "--ligand", &lig, "--k", "0"]).status.code(), Some(1));
}
