use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use bfe_core::brics::{join_blocks, RuleTable};
use bfe_core::pocket::GridConfig;
use bfe_core::screening::{admet_score, butina_from_neighbors, circular_fingerprint, passes_filter, rule_of_three};
use bfe_core::screening::{CandidateRecord, FilterConfig, Ro3Criterion};
use bfe_core::tokenizer::{render, render_names, Fragmentation, Mode, NameTable, Tokenizer, DEFAULT_MAX_BONDS, UNNAMED};
use bfe_core::vocab::{VocabConfig, Vocabulary, DEFAULT_F_MIN, VOCAB_VERSION};
use bfe_core::{compute_descriptors, parse_smiles, write_smiles, Molecule};
use bfe_tools::bench::{self, BenchConfig};
use bfe_tools::config::FileConfig;
use bfe_tools::formats::{self, fixed, fmt6, CandidateHeader, ClusterJson};
use bfe_tools::parallel;
use bfe_tools::pdb::{parse_structure, Format};
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Records handed to the worker pool at a time by streaming subcommands.
const BATCH: usize = 2048;

#[derive(Parser)]
#[command(name = "bfe", about = "BRICS fragment vocabularies, block tokenization, pocket hotspots and screening filters")]
struct Cli {
    /// Worker threads for per-record work (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// TOML settings file; flags override it.
    #[arg(long, global = true, env = "BFE_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Fail on the first malformed record instead of skipping it.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Count BRICS block keys over a SMILES corpus.
    Vocab(VocabArgs),
    /// Split molecules into vocabulary blocks.
    Tokenize(TokenizeArgs),
    /// Join block sequences back into molecules.
    Detokenize(DetokenizeArgs),
    /// Rank ligand atoms by free pocket volume.
    Hotspots(HotspotArgs),
    /// Butina clustering on circular fingerprints.
    Cluster(ClusterArgs),
    /// ADMET / QED threshold filter.
    Filter(FilterArgs),
    /// Time break versus merge operations.
    Bench(BenchArgs),
}

#[derive(Args)]
struct VocabArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    f_min: Option<u64>,
    /// Also count each whole molecule.
    #[arg(long)]
    include_full: bool,
    /// Corpus partitions counted independently (default: one per thread).
    #[arg(long)]
    partitions: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Bfe,
    Naive,
}

#[derive(Args)]
struct TokenizeArgs {
    /// SMILES file, `-` for standard input.
    #[arg(long = "in")]
    input: PathBuf,
    /// Vocabulary file (default: the built-in demo vocabulary).
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Extra scaffold names, added over the built-in table.
    #[arg(long)]
    names: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "bfe")]
    mode: ModeArg,
    /// Overrides the vocabulary's own f_min.
    #[arg(long)]
    f_min: Option<u64>,
    #[arg(long)]
    max_bonds: Option<usize>,
    /// Text output lists block names without their SMILES.
    #[arg(long)]
    names_only: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DetokenizeArgs {
    /// Rendered fragmentations, JSON arrays or whitespace-separated block
    /// SMILES, one molecule per line; `-` for standard input.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HotspotArgs {
    #[arg(long)]
    receptor: PathBuf,
    #[arg(long)]
    ligand: PathBuf,
    /// Structure format of the receptor (default: from the extension).
    #[arg(long, value_enum)]
    receptor_format: Option<Format>,
    #[arg(long, value_enum)]
    ligand_format: Option<Format>,
    #[arg(long)]
    k: Option<usize>,
    /// Contact threshold in angstrom.
    #[arg(long)]
    d_c: Option<f64>,
    #[arg(long)]
    edge: Option<f64>,
    #[arg(long)]
    resolution: Option<f64>,
    #[arg(long)]
    receptor_clearance: Option<f64>,
    #[arg(long)]
    ligand_clearance: Option<f64>,
    /// Ligand SMILES whose block rendering goes into text context output.
    #[arg(long)]
    ligand_smiles: Option<String>,
    #[arg(long)]
    vocab: Option<PathBuf>,
    #[arg(long)]
    names: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Tanimoto distance cutoff; neighbors lie strictly below it.
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long)]
    radius: Option<usize>,
    #[arg(long)]
    bits: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FilterArgs {
    /// Tab-separated table with a header, or JSON lines.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    admet: Option<f64>,
    #[arg(long)]
    qed: Option<f64>,
    /// Keep records that have no QED value.
    #[arg(long)]
    admet_only: bool,
    /// Add rule-of-three columns computed from the SMILES.
    #[arg(long)]
    ro3: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [10usize, 15, 20])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 300)]
    samples: usize,
    #[arg(long, default_value_t = 5)]
    repetitions: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Leave the process free to migrate between CPUs.
    #[arg(long)]
    no_pin: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exit status 1 for bad invocations, 2 for bad data.
enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
}

trait Classify<T> {
    fn usage(self) -> Result<T, Failure>;
    fn data(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Usage(e.into()))
    }
    fn data(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Data(e.into()))
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(anyhow::Error::new(e).context("writing output"))
    }
}

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(anyhow!("{msg}"))
}

type Outcome = Result<(), Failure>;

fn version() -> &'static str {
    let s = format!(
        "{} (BRICS rules {}, vocabulary format {})",
        env!("CARGO_PKG_VERSION"),
        RuleTable::builtin().version(),
        VOCAB_VERSION
    );
    Box::leak(s.into_boxed_str())
}

fn main() -> ExitCode {
    let matches = match Cli::command().version(version()).try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

struct Ctx {
    file: FileConfig,
    format: Option<OutputFormat>,
    strict: bool,
    pool: rayon::ThreadPool,
}

fn run(cli: Cli) -> Outcome {
    let file = FileConfig::load(cli.config.as_deref()).usage()?;
    let threads = cli.threads.or(file.threads);
    if threads == Some(0) {
        return Err(usage("--threads must be at least 1"));
    }
    let ctx = Ctx {
        pool: parallel::pool(threads).usage()?,
        file,
        format: cli.format,
        strict: cli.strict,
    };
    match cli.command {
        Command::Vocab(a) => vocab(&ctx, a),
        Command::Tokenize(a) => tokenize(&ctx, a),
        Command::Detokenize(a) => detokenize(&ctx, a),
        Command::Hotspots(a) => hotspots(&ctx, a),
        Command::Cluster(a) => cluster(&ctx, a),
        Command::Filter(a) => filter(&ctx, a),
        Command::Bench(a) => bench_cmd(&ctx, a),
    }
}

fn check_readable(path: &Path) -> Outcome {
    if path.as_os_str() == "-" {
        return Ok(());
    }
    File::open(path).with_context(|| format!("cannot open {}", path.display())).usage()?;
    Ok(())
}

fn read_all(path: &Path) -> Result<String, Failure> {
    check_readable(path)?;
    let mut text = String::new();
    if path.as_os_str() == "-" {
        io::stdin().read_to_string(&mut text).context("reading standard input").data()?;
    } else {
        text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).data()?;
    }
    Ok(text)
}

fn open_lines(path: &Path) -> Result<Box<dyn BufRead>, Failure> {
    check_readable(path)?;
    Ok(if path.as_os_str() == "-" {
        Box::new(BufReader::new(io::stdin()))
    } else {
        Box::new(BufReader::new(File::open(path).usage()?))
    })
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display())).usage()?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Reports a malformed record; under `--strict` it becomes the error.
fn bad_record(ctx: &Ctx, line: usize, err: impl std::fmt::Display) -> Outcome {
    if ctx.strict {
        return Err(Failure::Data(anyhow!("line {line}: {err}")));
    }
    eprintln!("warning: line {line}: {err} (skipped)");
    Ok(())
}

fn check_f_min(f: u64) -> Outcome {
    if f == 0 {
        return Err(usage("--f-min must be at least 1"));
    }
    Ok(())
}

fn vocab(ctx: &Ctx, a: VocabArgs) -> Outcome {
    let f_min = a.f_min.or(ctx.file.f_min).unwrap_or(DEFAULT_F_MIN);
    check_f_min(f_min)?;
    if a.partitions == Some(0) {
        return Err(usage("--partitions must be at least 1"));
    }
    let text = read_all(&a.input)?;
    let (lines, records): (Vec<usize>, Vec<&str>) = bfe_tools::smiles_records(&text).unzip();
    let config = VocabConfig {
        f_min,
        include_full: a.include_full,
    };
    let partitions = a.partitions.unwrap_or(ctx.pool.current_num_threads());
    let rules = RuleTable::builtin();
    let build = parallel::build_vocabulary_partitioned(&rules, &records, config, partitions, &ctx.pool)
        .with_context(|| format!("building vocabulary from {}", a.input.display()))
        .data()?;
    for &i in &build.skipped {
        bad_record(ctx, lines[i], format!("unparseable SMILES `{}`", records[i]))?;
    }
    let mut out = output(a.out.as_deref())?;
    out.write_all(build.vocab.to_text().as_bytes())?;
    out.flush()?;
    eprintln!(
        "{} records, {} skipped, {} keys, {} breaks, {} branching subsets",
        build.report.records,
        build.report.skipped,
        build.vocab.len(),
        build.report.stats.breaks,
        build.report.stats.branching
    );
    Ok(())
}

fn load_vocab(path: Option<&Path>, f_min: Option<u64>) -> Result<Vocabulary, Failure> {
    let mut v = match path {
        Some(p) => {
            check_readable(p)?;
            formats::load_vocabulary(p).data()?
        }
        None => Vocabulary::from_text(formats::DEMO_VOCAB).expect("shipped vocabulary is valid"),
    };
    if let Some(f) = f_min {
        check_f_min(f)?;
        v.set_f_min(f).usage()?;
    }
    Ok(v)
}

fn load_names(extra: Option<&Path>) -> Result<NameTable, Failure> {
    let mut names = formats::builtin_names();
    if let Some(p) = extra {
        let text = read_all(p)?;
        names
            .extend_from_text(&text)
            .with_context(|| format!("parsing name table {}", p.display()))
            .data()?;
    }
    Ok(names)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write_fragmentation(
    out: &mut dyn Write,
    format: OutputFormat,
    names_only: bool,
    input: &str,
    f: &Fragmentation,
    names: &NameTable,
) -> io::Result<()> {
    match format {
        OutputFormat::Text if names_only => writeln!(out, "{}", render_names(f, names)),
        OutputFormat::Text => writeln!(out, "{}", render(f, names)),
        OutputFormat::Json => writeln!(out, "{}", formats::fragmentation_json(f, names)),
        OutputFormat::Csv => {
            let smiles: Vec<&str> = f.blocks.iter().map(|b| b.smiles.as_str()).collect();
            let labels: Vec<&str> = f.blocks.iter().map(|b| names.name_of(b).unwrap_or(UNNAMED)).collect();
            let freqs: Vec<String> = f.frequencies.iter().map(u64::to_string).collect();
            writeln!(
                out,
                "{},{},{},{}",
                csv_field(input),
                csv_field(&smiles.join(" ")),
                csv_field(&labels.join(";")),
                freqs.join(" ")
            )
        }
    }
}

fn tokenize(ctx: &Ctx, a: TokenizeArgs) -> Outcome {
    let vocab = load_vocab(a.vocab.as_deref(), a.f_min.or(ctx.file.f_min))?;
    let names = load_names(a.names.as_deref())?;
    let max_bonds = a.max_bonds.or(ctx.file.max_bonds).unwrap_or(DEFAULT_MAX_BONDS);
    if max_bonds == 0 || max_bonds >= 64 {
        return Err(usage("--max-bonds must be between 1 and 63"));
    }
    let tokenizer = Tokenizer::new(RuleTable::builtin(), max_bonds);
    let mode = match a.mode {
        ModeArg::Bfe => Mode::Bfe,
        ModeArg::Naive => Mode::NaiveBrics,
    };
    let format = ctx.format.unwrap_or(OutputFormat::Text);
    let reader = open_lines(&a.input)?;
    let mut out = output(a.out.as_deref())?;
    if format == OutputFormat::Csv {
        writeln!(out, "smiles,blocks,names,frequencies")?;
    }
    let mut lines = reader.lines().enumerate();
    let mut done = false;
    while !done {
        let mut batch: Vec<(usize, String)> = Vec::with_capacity(BATCH);
        while batch.len() < BATCH {
            let Some((i, line)) = lines.next() else {
                done = true;
                break;
            };
            let line = line.with_context(|| format!("reading {}", a.input.display())).data()?;
            let l = line.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let smiles = l.split_whitespace().next().unwrap_or("").to_string();
            batch.push((i + 1, smiles));
        }
        let records: Vec<&str> = batch.iter().map(|(_, s)| s.as_str()).collect();
        let results = parallel::tokenize_batch(&tokenizer, &vocab, mode, &records, &ctx.pool);
        for ((line, smiles), r) in batch.iter().zip(results) {
            match r {
                Ok(f) => write_fragmentation(&mut out, format, a.names_only, smiles, &f, &names)?,
                Err(e) => bad_record(ctx, *line, e)?,
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Block SMILES of one detokenize input line.
fn parse_block_line(l: &str) -> anyhow::Result<Vec<String>> {
    if l.starts_with('[') && l.ends_with(']') && l.contains('{') {
        #[derive(serde::Deserialize)]
        struct Row {
            smiles: String,
        }
        let rows: Vec<Row> = serde_json::from_str(l).context("malformed JSON fragmentation")?;
        return Ok(rows.into_iter().map(|r| r.smiles).collect());
    }
    if l.contains(" [") {
        return l
            .split(" -> ")
            .map(|unit| {
                unit.split_once(" [")
                    .and_then(|(_, rest)| rest.strip_suffix(']'))
                    .map(str::to_string)
                    .ok_or_else(|| anyhow!("malformed unit `{unit}`"))
            })
            .collect();
    }
    Ok(l.split_whitespace().map(str::to_string).collect())
}

fn detokenize(ctx: &Ctx, a: DetokenizeArgs) -> Outcome {
    let reader = open_lines(&a.input)?;
    let mut out = output(a.out.as_deref())?;
    for (i, line) in reader.lines().enumerate() {
        let line = line.with_context(|| format!("reading {}", a.input.display())).data()?;
        let l = line.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let joined = parse_block_line(l).and_then(|blocks| {
            let mols = blocks
                .iter()
                .map(|s| parse_smiles(s).with_context(|| format!("block `{s}`")))
                .collect::<anyhow::Result<Vec<Molecule>>>()?;
            let refs: Vec<&Molecule> = mols.iter().collect();
            Ok(join_blocks(&refs)?)
        });
        match joined {
            Ok(m) => writeln!(out, "{}", write_smiles(&m))?,
            Err(e) => bad_record(ctx, i + 1, format!("{e:#}"))?,
        }
    }
    out.flush()?;
    Ok(())
}

fn load_structure(path: &Path, format: Option<Format>) -> Result<bfe_core::pocket::Structure, Failure> {
    let text = read_all(path)?;
    let format = format.unwrap_or_else(|| Format::from_path(path));
    parse_structure(&text, format).with_context(|| format!("parsing {}", path.display())).data()
}

fn hotspots(ctx: &Ctx, a: HotspotArgs) -> Outcome {
    let g = &ctx.file.grid;
    let defaults = GridConfig::default();
    let cfg = GridConfig {
        edge: a.edge.or(g.edge).unwrap_or(defaults.edge),
        resolution: a.resolution.or(g.resolution).unwrap_or(defaults.resolution),
        receptor_clearance: a.receptor_clearance.or(g.receptor_clearance).unwrap_or(defaults.receptor_clearance),
        ligand_clearance: a.ligand_clearance.or(g.ligand_clearance).unwrap_or(defaults.ligand_clearance),
    };
    cfg.validate().usage()?;
    let k = a.k.or(ctx.file.k).unwrap_or(5);
    let d_c = a.d_c.or(ctx.file.d_c).unwrap_or(7.0);
    if k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    if !(d_c > 0.0 && d_c.is_finite()) {
        return Err(usage("--d-c must be a positive distance"));
    }
    let format = ctx.format.unwrap_or(OutputFormat::Json);
    if format == OutputFormat::Csv {
        return Err(usage("hotspots supports --format json or text"));
    }
    check_readable(&a.receptor)?;
    check_readable(&a.ligand)?;
    let fragmentation = match &a.ligand_smiles {
        Some(s) if format == OutputFormat::Text => {
            let vocab = load_vocab(a.vocab.as_deref(), ctx.file.f_min)?;
            let names = load_names(a.names.as_deref())?;
            let mol = parse_smiles(s).context("parsing --ligand-smiles").usage()?;
            let f = Tokenizer::default().tokenize(&mol, &vocab, Mode::Bfe).data()?;
            render(&f, &names)
        }
        _ => "not provided".to_string(),
    };
    let receptor = load_structure(&a.receptor, a.receptor_format)?;
    let ligand = load_structure(&a.ligand, a.ligand_format)?;
    let hs = parallel::identify_hotspots(&receptor, &ligand, k, d_c, &cfg, &ctx.pool).data()?;
    let mut out = output(a.out.as_deref())?;
    match format {
        OutputFormat::Json => writeln!(out, "{}", formats::hotspots_json(&hs))?,
        _ => {
            for h in &hs {
                writeln!(out, "{}", bfe_core::pocket::context_paragraph(h, d_c, &fragmentation))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn cluster(ctx: &Ctx, a: ClusterArgs) -> Outcome {
    let c = &ctx.file.cluster;
    let cutoff = a.cutoff.or(c.cutoff).unwrap_or(0.7);
    let radius = a.radius.or(c.radius).unwrap_or(2);
    let bits = a.bits.or(c.bits).unwrap_or(2048);
    if !(cutoff > 0.0 && cutoff <= 1.0) {
        return Err(usage("--cutoff must be in (0, 1]"));
    }
    if bits == 0 {
        return Err(usage("--bits must be at least 1"));
    }
    let text = read_all(&a.input)?;
    let mut kept: Vec<&str> = Vec::new();
    let mut mols = Vec::new();
    for (line, s) in bfe_tools::smiles_records(&text) {
        match parse_smiles(s) {
            Ok(m) => {
                kept.push(s);
                mols.push(m);
            }
            Err(e) => bad_record(ctx, line, e)?,
        }
    }
    if mols.is_empty() {
        return Err(Failure::Data(anyhow!("no molecules to cluster in {}", a.input.display())));
    }
    let fps: Vec<_> = {
        use rayon::prelude::*;
        ctx.pool
            .install(|| mols.par_iter().map(|m| circular_fingerprint(m, radius, bits)).collect())
    };
    let neighbors = parallel::neighbor_lists(&fps, cutoff, &ctx.pool).data()?;
    let clusters = butina_from_neighbors(&neighbors);
    let format = ctx.format.unwrap_or(OutputFormat::Json);
    let mut out = output(a.out.as_deref())?;
    if format == OutputFormat::Csv {
        writeln!(out, "cluster_id,representative_smiles,member_smiles")?;
    }
    for (i, c) in clusters.iter().enumerate() {
        let row = ClusterJson {
            cluster_id: i + 1,
            representative_smiles: kept[c.centroid],
            member_smiles: c.members.iter().map(|&m| kept[m]).collect(),
        };
        match format {
            OutputFormat::Json => writeln!(out, "{}", serde_json::to_string(&row).expect("serializable"))?,
            OutputFormat::Text => writeln!(
                out,
                "{}\t{}\t{}",
                row.cluster_id,
                row.representative_smiles,
                row.member_smiles.join(" ")
            )?,
            OutputFormat::Csv => writeln!(
                out,
                "{},{},{}",
                row.cluster_id,
                csv_field(row.representative_smiles),
                csv_field(&row.member_smiles.join(" "))
            )?,
        }
    }
    out.flush()?;
    eprintln!("{} molecules, {} clusters", mols.len(), clusters.len());
    Ok(())
}

#[derive(Serialize)]
struct FilterRow<'a> {
    smiles: &'a str,
    admet_score: Box<serde_json::value::RawValue>,
    qed: Option<Box<serde_json::value::RawValue>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ro3_pass: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ro3_violations: Option<Vec<&'static str>>,
}

fn criterion_name(c: Ro3Criterion) -> &'static str {
    match c {
        Ro3Criterion::MolecularWeight => "MW",
        Ro3Criterion::CLogP => "cLogP",
        Ro3Criterion::HydrogenBondDonors => "HBD",
        Ro3Criterion::HydrogenBondAcceptors => "HBA",
    }
}

fn filter(ctx: &Ctx, a: FilterArgs) -> Outcome {
    let f = &ctx.file.filter;
    let cfg = FilterConfig {
        admet_threshold: a.admet.or(f.admet).unwrap_or(2.5),
        qed_threshold: a.qed.or(f.qed).unwrap_or(0.7),
        admet_only: a.admet_only,
    };
    if !cfg.admet_threshold.is_finite() || !cfg.qed_threshold.is_finite() {
        return Err(usage("thresholds must be finite"));
    }
    let text = read_all(&a.input)?;
    let mut rows = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());
    let jsonl = a
        .input
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("jsonl") || e.eq_ignore_ascii_case("json"))
        || text.trim_start().starts_with('{');
    let header = if jsonl {
        None
    } else {
        let Some((_, h)) = rows.next() else {
            return Err(Failure::Data(anyhow!("{} is empty", a.input.display())));
        };
        Some(CandidateHeader::parse(h).context("candidate header").data()?)
    };
    let format = ctx.format.unwrap_or(OutputFormat::Text);
    let mut out = output(a.out.as_deref())?;
    let sep = if format == OutputFormat::Csv { "," } else { "\t" };
    if format != OutputFormat::Json {
        let mut cols = vec!["smiles", "admet_score", "qed"];
        if a.ro3 {
            cols.extend(["ro3_pass", "ro3_violations"]);
        }
        writeln!(out, "{}", cols.join(sep))?;
    }
    let (mut seen, mut kept) = (0usize, 0usize);
    for (line, l) in rows {
        if !jsonl && l.starts_with('#') {
            continue;
        }
        let record: anyhow::Result<CandidateRecord> = match &header {
            Some(h) => h.record(l),
            None => formats::candidate_from_json(l),
        };
        let mut record = match record {
            Ok(r) => r,
            Err(e) => {
                bad_record(ctx, line, format!("{e:#}"))?;
                continue;
            }
        };
        if let Err(e) = record.admet.validate() {
            bad_record(ctx, line, e)?;
            continue;
        }
        seen += 1;
        if !passes_filter(&record, &cfg) {
            continue;
        }
        let ro3 = if a.ro3 {
            match parse_smiles(&record.smiles) {
                Ok(m) => {
                    let d = compute_descriptors(&m);
                    record.descriptors = Some(d);
                    Some(rule_of_three(&d, record.logp))
                }
                Err(e) => {
                    bad_record(ctx, line, e)?;
                    continue;
                }
            }
        } else {
            None
        };
        kept += 1;
        let score = admet_score(&record.admet).expect("validated record scores");
        match format {
            OutputFormat::Json => {
                let row = FilterRow {
                    smiles: &record.smiles,
                    admet_score: fixed(score, 6),
                    qed: record.qed.map(|q| fixed(q, 6)),
                    ro3_pass: ro3.as_ref().map(|r| r.pass),
                    ro3_violations: ro3.as_ref().map(|r| r.violations.iter().map(|&c| criterion_name(c)).collect()),
                };
                writeln!(out, "{}", serde_json::to_string(&row).expect("serializable"))?;
            }
            _ => {
                let mut cols = vec![
                    record.smiles.clone(),
                    fmt6(score),
                    record.qed.map(fmt6).unwrap_or_default(),
                ];
                if let Some(r) = &ro3 {
                    cols.push(r.pass.to_string());
                    let v: Vec<&str> = r.violations.iter().map(|&c| criterion_name(c)).collect();
                    cols.push(v.join(";"));
                }
                writeln!(out, "{}", cols.join(sep))?;
            }
        }
    }
    out.flush()?;
    eprintln!("{kept} of {seen} records kept");
    Ok(())
}

fn bench_cmd(ctx: &Ctx, a: BenchArgs) -> Outcome {
    let cfg = BenchConfig {
        sizes: a.sizes,
        samples: a.samples,
        repetitions: a.repetitions,
        seed: a.seed.or(ctx.file.seed).unwrap_or(BenchConfig::default().seed),
        pin: !a.no_pin,
        ..BenchConfig::default()
    };
    if cfg.samples == 0 || cfg.repetitions < 3 || cfg.sizes.is_empty() || cfg.sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(usage(
            "bench needs strictly increasing --sizes, --samples >= 1 and --repetitions >= 3",
        ));
    }
    let report = bench::run(&RuleTable::builtin(), &cfg).data()?;
    let mut out = output(a.out.as_deref())?;
    match ctx.format.unwrap_or(OutputFormat::Text) {
        OutputFormat::Csv => out.write_all(report.to_csv().as_bytes())?,
        OutputFormat::Text => out.write_all(report.to_table().as_bytes())?,
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Row {
                size: usize,
                break_mean_s: f64,
                merge_mean_s: f64,
                ratio: f64,
                samples: usize,
            }
            for i in 0..report.sizes.len() {
                let row = Row {
                    size: report.sizes[i],
                    break_mean_s: report.break_time[i],
                    merge_mean_s: report.merge_time[i],
                    ratio: report.ratio[i],
                    samples: report.samples,
                };
                writeln!(out, "{}", serde_json::to_string(&row).expect("serializable"))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}
