//! Command-line front end. `run` parses arguments, dispatches one
//! subcommand and returns the process exit code: 0 on success, 1 on a
//! domain failure, 2 on a usage error.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bench::{benchmark, BenchConfig, BenchSource};
use crate::bethe::{bp_sum_product, minsum_matching, permanent_exact, BpOptions, NonNegMatrix, EXACT_MAX_N};
use crate::construct::{atlas, atlas_names, chord_mask, peg_ace, sa_emd, square_ldpc_mask, square_qc_mask_with, AtlasEntry, PegConfig, SaConfig};
use crate::data::{self, Dataset, DatasetKind, Registry, Report, ReportFormat, ReportRow};
use crate::error::{Error, Result};
use crate::factor::{masks_for, sf_optimize, tsvd, Budget, Method};
use crate::fmt::sci;
use crate::graph::{emd_spectrum, enumerate_cycles, qc_girth, trapping_sets, write_jsonl, TannerGraph};
use crate::ising::{collapse_radial, lcm_combine, pair_ground_states, shbf_gauge_check, spherical_shell_matrix, toroidal_cell};
use crate::nishimori::{estimate_beta_nishimori, sample_spin_glass, write_trace_csv, CouplingFamily, WeightedGraph, DEFAULT_BETA_HI};
use crate::qc::{ExponentMatrix, SparseBinaryMatrix};

#[derive(Debug, Parser, Serialize)]
#[command(name = "qcldpc", version, about = "QC-LDPC codes, Bethe permanents, Nishimori estimation and sparse factorization")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for the benchmark.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// JSON object of flag values; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (stdout when absent). A manifest is written next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cmd {
    /// Build a parity-check matrix or factorization mask.
    Construct(ConstructArgs),
    /// Girth, cycles, trapping sets and gauge checks of a code.
    Analyze(AnalyzeArgs),
    /// Exponent matrices from Ising ground-state geometry.
    IsingGen(IsingArgs),
    /// Exact and Bethe permanents of a non-negative matrix.
    Bethe(BetheArgs),
    /// Estimate the Nishimori temperature of a weighted graph.
    Nishimori(NishimoriArgs),
    /// Factorize one matrix with one method.
    Factorize(FactorizeArgs),
    /// Run every method on a dataset suite and write a report.
    Bench(BenchArgs),
    /// Emit a named fixture matrix.
    Atlas(AtlasArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructMethod {
    Peg,
    Sa,
    Chord,
    LdpcMask,
    QcMask,
}

#[derive(Debug, Args, Serialize)]
pub struct ConstructArgs {
    #[arg(long, value_enum)]
    pub method: ConstructMethod,
    /// Columns (peg) or matrix order (masks).
    #[arg(long)]
    pub n: Option<usize>,
    /// Rows (peg).
    #[arg(long)]
    pub m: Option<usize>,
    /// Column degree (peg, ldpc-mask).
    #[arg(long)]
    pub degree: Option<usize>,
    /// Protograph rows (sa).
    #[arg(long, default_value_t = 3)]
    pub rows: usize,
    /// Protograph columns (sa).
    #[arg(long, default_value_t = 3)]
    pub cols: usize,
    /// Circulant size (sa, qc-mask).
    #[arg(long = "L")]
    pub lift: Option<usize>,
    /// Target girth (sa, qc-mask).
    #[arg(long, default_value_t = 6)]
    pub girth: usize,
    /// Annealing steps.
    #[arg(long, default_value_t = 20_000)]
    pub steps: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    /// `.alist` binary matrix or exponent-matrix text.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Report the girth.
    #[arg(long)]
    pub girth: bool,
    /// Report the SHBF gauge check (exponent input).
    #[arg(long)]
    pub shbf: bool,
    /// Gauge modulus; defaults to the circulant size.
    #[arg(long)]
    pub modulus: Option<usize>,
    /// List cycles up to this length.
    #[arg(long)]
    pub cycles: Option<usize>,
    /// EMD histogram of cycles up to this length.
    #[arg(long)]
    pub emd: Option<usize>,
    /// Trapping-set search bounds `a_max,b_max`.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub trapping: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IsingKind {
    Pairs,
    Lcm,
    Torus,
    Shell,
    Collapse,
}

#[derive(Debug, Args, Serialize)]
pub struct IsingArgs {
    #[arg(long, value_enum)]
    pub kind: IsingKind,
    /// Distances for `pairs`.
    #[arg(long)]
    pub r1: Option<usize>,
    #[arg(long)]
    pub r3: Option<usize>,
    /// Rows for `lcm`, e.g. `2,3:5;3,5:8` (shifts, then circulant size).
    #[arg(long = "lcm-rows")]
    pub lcm_rows: Option<String>,
    /// X and Y projections for `torus`.
    #[arg(long, value_delimiter = ',')]
    pub xs: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub ys: Vec<usize>,
    /// Radii with multiplicity for `shell`.
    #[arg(long, value_delimiter = ',')]
    pub radii: Vec<usize>,
    /// Exponent matrix for `collapse`.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long = "radial-row", default_value_t = 0)]
    pub radial_row: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct BetheArgs {
    /// MatrixMarket file with a non-negative square matrix.
    #[arg(long = "in", conflicts_with = "random")]
    pub input: Option<PathBuf>,
    /// Use a seeded uniform random matrix of this order instead.
    #[arg(long)]
    pub random: Option<usize>,
    /// Message damping in (0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub iters: usize,
    /// Also run max-product matching.
    #[arg(long)]
    pub matching: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum FamilyArg {
    #[value(name = "two_point")]
    TwoPoint,
    #[value(name = "gaussian_sym")]
    GaussianSym,
}

#[derive(Debug, Args, Serialize)]
pub struct NishimoriArgs {
    /// Edge list (`n m` header, then `i j J`).
    #[arg(long = "in", conflicts_with = "n")]
    pub input: Option<PathBuf>,
    /// Sample a planted instance with this many nodes instead.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "avg-degree", default_value_t = 5.0)]
    pub avg_degree: f64,
    #[arg(long, value_enum, default_value = "two_point")]
    pub family: FamilyArg,
    /// Coupling magnitude (two_point) or width (gaussian_sym).
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long = "beta-n", default_value_t = 0.5)]
    pub beta_n: f64,
    /// Upper end of the inverse-temperature scan.
    #[arg(long = "beta-hi", default_value_t = DEFAULT_BETA_HI)]
    pub beta_hi: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// Write the `(beta, lambda_min)` scan as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Write the sampled graph as an edge list.
    #[arg(long = "save-graph")]
    pub save_graph: Option<PathBuf>,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    Method::parse(s).map_err(|e| e.to_string())
}

#[derive(Debug, Args, Serialize)]
pub struct FactorizeArgs {
    /// `.mtx` matrix, `.csv` data (covariance taken) or `.pgm` image.
    #[arg(long = "in", conflicts_with = "dataset")]
    pub input: Option<PathBuf>,
    /// Name from the built-in synthetic suite.
    #[arg(long)]
    pub dataset: Option<String>,
    /// Use raw image intensities instead of gradient magnitudes.
    #[arg(long = "raw-image")]
    pub raw_image: bool,
    #[arg(long, default_value = "sf_ldpc_peg", value_parser = parse_method)]
    pub method: Method,
    #[arg(long, default_value_t = 20_000)]
    pub iters: usize,
    /// Include every factor's mask and values in the output.
    #[arg(long = "with-factors")]
    pub with_factors: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteArg {
    Synthetic,
    None,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "synthetic")]
    pub suite: SuiteArg,
    /// Dataset registry (JSON) added to the suite.
    #[arg(long)]
    pub registry: Option<PathBuf>,
    /// Keep only these dataset names.
    #[arg(long, value_delimiter = ',')]
    pub datasets: Vec<String>,
    #[arg(long, value_delimiter = ',', value_parser = parse_method, default_value = "tsvd,sf_chord,sf_ldpc_peg,sf_qc_sa")]
    pub methods: Vec<Method>,
    #[arg(long, default_value_t = 20_000)]
    pub iters: usize,
    /// Seeds per (dataset, method); defaults to `--seed`.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    /// Write zero in the `seconds` column so reports are reproducible.
    #[arg(long = "no-timing")]
    pub no_timing: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AtlasFormat {
    Exponent,
    Alist,
}

#[derive(Debug, Args, Serialize)]
pub struct AtlasArgs {
    #[arg(long, required_unless_present = "list")]
    pub name: Option<String>,
    /// Print the available names.
    #[arg(long)]
    pub list: bool,
    /// Exponent text (QC entries only) or expanded alist.
    #[arg(long, value_enum, default_value = "exponent")]
    pub format: AtlasFormat,
}

/// Provenance record written next to each output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub flags: Value,
    pub seed: u64,
    pub version: String,
    /// SHA-256 of every input file, by path.
    pub inputs: BTreeMap<String, String>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
}

fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

/// Appends `--key value` for every config entry whose flag is absent.
fn merge_config(argv: Vec<String>) -> std::result::Result<Vec<String>, String> {
    let mut path = None;
    for (k, a) in argv.iter().enumerate() {
        if a == "--config" {
            path = argv.get(k + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else {
        return Ok(argv);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let obj: BTreeMap<String, Value> = serde_json::from_str(&text).map_err(|e| format!("config {path} is not a JSON object: {e}"))?;
    let mut out = argv.clone();
    for (key, v) in obj {
        let flag = format!("--{key}");
        if argv.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}="))) {
            continue;
        }
        let scalar = |v: &Value| match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        match &v {
            Value::Bool(true) => out.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                out.push(flag);
                out.push(items.iter().map(scalar).collect::<Vec<_>>().join(","));
            }
            other => {
                out.push(flag);
                out.push(scalar(other));
            }
        }
    }
    Ok(out)
}

/// Parses `argv` (program name first), runs the subcommand and returns
/// the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let argv = match merge_config(argv) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn subcommand_name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Construct(_) => "construct",
        Cmd::Analyze(_) => "analyze",
        Cmd::IsingGen(_) => "ising-gen",
        Cmd::Bethe(_) => "bethe",
        Cmd::Nishimori(_) => "nishimori",
        Cmd::Factorize(_) => "factorize",
        Cmd::Bench(_) => "bench",
        Cmd::Atlas(_) => "atlas",
    }
}

fn input_paths(cli: &Cli) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = cli.common.config.iter().cloned().collect();
    let extra = match &cli.cmd {
        Cmd::Analyze(a) => Some(a.input.clone()),
        Cmd::IsingGen(a) => a.input.clone(),
        Cmd::Bethe(a) => a.input.clone(),
        Cmd::Nishimori(a) => a.input.clone(),
        Cmd::Factorize(a) => a.input.clone(),
        Cmd::Bench(a) => a.registry.clone(),
        Cmd::Construct(_) | Cmd::Atlas(_) => None,
    };
    v.extend(extra);
    v
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn execute(cli: &Cli) -> Result<()> {
    let started = now_ms();
    let mut inputs = BTreeMap::new();
    for p in input_paths(cli) {
        inputs.insert(p.display().to_string(), sha256_file(&p)?);
    }
    let output = match &cli.cmd {
        Cmd::Construct(a) => construct(a, cli.common.seed)?,
        Cmd::Analyze(a) => analyze(a)?,
        Cmd::IsingGen(a) => ising_gen(a, cli.common.seed)?,
        Cmd::Bethe(a) => bethe(a, cli.common.seed)?,
        Cmd::Nishimori(a) => nishimori(a, cli.common.seed)?,
        Cmd::Factorize(a) => factorize(a, cli.common.seed)?,
        Cmd::Bench(a) => bench(a, &cli.common)?,
        Cmd::Atlas(a) => atlas_cmd(a)?,
    };
    let manifest = RunManifest {
        subcommand: subcommand_name(&cli.cmd).to_string(),
        flags: serde_json::to_value(cli)?,
        seed: cli.common.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        inputs,
        started_unix_ms: started,
        finished_unix_ms: now_ms(),
    };
    match &cli.common.out {
        Some(path) => {
            fs::write(path, &output)?;
            let mut text = serde_json::to_string_pretty(&manifest)?;
            text.push('\n');
            fs::write(manifest_path(path), text)?;
        }
        None => {
            std::io::stdout().lock().write_all(&output)?;
            eprintln!("{}", serde_json::to_string(&manifest)?);
        }
    }
    Ok(())
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::domain(format!("--{flag} is required here")))
}

fn alist_bytes(h: &SparseBinaryMatrix) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    h.write_alist(&mut buf)?;
    Ok(buf)
}

fn exponent_bytes(e: &ExponentMatrix) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    e.write_text(&mut buf)?;
    Ok(buf)
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut buf = serde_json::to_vec_pretty(v)?;
    buf.push(b'\n');
    Ok(buf)
}

fn construct(a: &ConstructArgs, seed: u64) -> Result<Vec<u8>> {
    match a.method {
        ConstructMethod::Peg => {
            let n = need(a.n, "n")?;
            let cfg = PegConfig::regular(n, need(a.m, "m")?, a.degree.unwrap_or(3), seed);
            alist_bytes(&peg_ace(&cfg)?)
        }
        ConstructMethod::Sa => {
            let lift = need(a.lift, "L")?;
            let res = sa_emd(&SaConfig::new(a.rows, a.cols, lift, a.girth, a.steps, seed))?;
            if !res.meets_target {
                eprintln!("note: {} short cycles remain below girth {}", res.violations, a.girth);
            }
            exponent_bytes(&res.matrix)
        }
        ConstructMethod::Chord => alist_bytes(&chord_mask(need(a.n, "n")?)?.matrix),
        ConstructMethod::LdpcMask => alist_bytes(&square_ldpc_mask(need(a.n, "n")?, a.degree, seed)?.matrix),
        ConstructMethod::QcMask => {
            let n = need(a.n, "n")?;
            let m = square_qc_mask_with(n, need(a.lift, "L")?, seed, a.steps, a.girth)?;
            alist_bytes(&m.matrix)
        }
    }
}

enum Code {
    Binary(SparseBinaryMatrix),
    Exponent(ExponentMatrix),
}

fn read_code(path: &Path) -> Result<Code> {
    let r = BufReader::new(fs::File::open(path)?);
    if path.extension().is_some_and(|e| e == "alist") {
        Ok(Code::Binary(SparseBinaryMatrix::read_alist(r)?))
    } else {
        Ok(Code::Exponent(ExponentMatrix::read_text(r)?))
    }
}

fn tagged<T: Serialize>(tag: &str, v: &T) -> Result<Value> {
    let mut v = serde_json::to_value(v)?;
    if let Value::Object(m) = &mut v {
        m.insert("report".into(), json!(tag));
    }
    Ok(v)
}

fn analyze(a: &AnalyzeArgs) -> Result<Vec<u8>> {
    let code = read_code(&a.input)?;
    let h = match &code {
        Code::Binary(h) => h.clone(),
        Code::Exponent(e) => e.expand(),
    };
    let g = TannerGraph::from_matrix(&h);
    let mut lines = vec![json!({
        "report": "summary",
        "rows": h.nrows(),
        "cols": h.ncols(),
        "nnz": h.nnz(),
        "row_weights": h.row_weights().iter().min().zip(h.row_weights().iter().max()),
        "col_weights": h.col_weights().iter().min().zip(h.col_weights().iter().max()),
    })];
    let nothing = !a.girth && !a.shbf && a.cycles.is_none() && a.emd.is_none() && a.trapping.is_none();
    if a.girth || nothing {
        let mut v = json!({"report": "girth", "girth": g.girth()});
        if let Code::Exponent(e) = &code {
            v["qc_girth"] = json!(qc_girth(e));
        }
        lines.push(v);
    }
    if a.shbf {
        let Code::Exponent(e) = &code else {
            return Err(Error::domain("the gauge check needs an exponent matrix"));
        };
        let rep = shbf_gauge_check(e, a.modulus)?;
        lines.push(json!({"report": "shbf", "modulus": rep.modulus, "rows": rep.rows, "cols": rep.cols, "all_rows": rep.all_rows()}));
    }
    if let Some(len) = a.cycles {
        for c in enumerate_cycles(&g, len)? {
            lines.push(tagged("cycle", &c)?);
        }
    }
    if let Some(len) = a.emd {
        for ((length, emd), count) in emd_spectrum(&g, len)? {
            lines.push(json!({"report": "emd_spectrum", "length": length, "emd": emd, "count": count}));
        }
    }
    if let Some(ab) = &a.trapping {
        let [a_max, b_max] = ab[..] else {
            return Err(Error::domain("--trapping takes a_max,b_max"));
        };
        for t in trapping_sets(&g, a_max, b_max)? {
            lines.push(tagged("trapping_set", &t)?);
        }
    }
    let mut buf = Vec::new();
    write_jsonl(&lines, &mut buf)?;
    Ok(buf)
}

fn parse_lcm_rows(spec: &str) -> Result<Vec<(Vec<usize>, usize)>> {
    let bad = || Error::parse(0, format!("cannot read lcm rows {spec:?}; expected e.g. 2,3:5;3,5:8"));
    spec.split(';')
        .map(|row| {
            let (shifts, l) = row.split_once(':').ok_or_else(bad)?;
            let shifts = shifts.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect::<Result<Vec<usize>>>()?;
            Ok((shifts, l.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

fn ising_gen(a: &IsingArgs, seed: u64) -> Result<Vec<u8>> {
    match a.kind {
        IsingKind::Pairs => json_bytes(&pair_ground_states(need(a.r1, "r1")?, need(a.r3, "r3")?)?),
        IsingKind::Lcm => {
            let rows = parse_lcm_rows(a.lcm_rows.as_deref().ok_or_else(|| Error::domain("--lcm-rows is required here"))?)?;
            let (shifts, lift) = lcm_combine(&rows)?;
            json_bytes(&json!({"L": lift, "shifts": shifts}))
        }
        IsingKind::Torus => exponent_bytes(&toroidal_cell(&a.xs, &a.ys)?),
        IsingKind::Shell => exponent_bytes(&spherical_shell_matrix(&a.radii, seed)?),
        IsingKind::Collapse => {
            let path = a.input.as_ref().ok_or_else(|| Error::domain("--in is required here"))?;
            let e = ExponentMatrix::read_text(BufReader::new(fs::File::open(path)?))?;
            json_bytes(&collapse_radial(&e, a.radial_row)?)
        }
    }
}

fn bethe(a: &BetheArgs, seed: u64) -> Result<Vec<u8>> {
    let w = match (&a.input, a.random) {
        (Some(p), _) => {
            let m = data::load_matrix_market(p)?;
            NonNegMatrix::new(m.nrows(), m.transpose().as_slice().to_vec())?
        }
        (None, Some(n)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            NonNegMatrix::new(n, (0..n * n).map(|_| rng.random::<f64>()).collect())?
        }
        (None, None) => return Err(Error::domain("give --in or --random")),
    };
    let bp = bp_sum_product(&w, BpOptions { damping: a.alpha, tol: a.tol, max_iter: a.iters })?;
    let mut out = json!({
        "n": w.n(),
        "f_bethe": bp.f_bethe,
        "perm_bethe": bp.perm_bethe,
        "iterations": bp.iterations,
        "converged": bp.converged,
        "residual": bp.residual,
    });
    if w.n() <= EXACT_MAX_N {
        out["perm_exact"] = json!(permanent_exact(&w)?);
    }
    if a.matching {
        let m = minsum_matching(&w, a.tol, a.iters)?;
        out["matching"] = json!({"assignment": m.assignment, "is_permutation": m.is_permutation, "converged": m.converged});
    }
    json_bytes(&out)
}

fn nishimori(a: &NishimoriArgs, seed: u64) -> Result<Vec<u8>> {
    let (graph, planted) = match (&a.input, a.n) {
        (Some(p), _) => (WeightedGraph::read_edge_list(BufReader::new(fs::File::open(p)?))?, None),
        (None, Some(n)) => {
            let family = match a.family {
                FamilyArg::TwoPoint => CouplingFamily::TwoPoint { s: a.scale },
                FamilyArg::GaussianSym => CouplingFamily::GaussianSym { sigma: a.scale },
            };
            (sample_spin_glass(n, a.avg_degree, family, a.beta_n, seed)?.graph, Some(a.beta_n))
        }
        (None, None) => return Err(Error::domain("give --in or --n")),
    };
    if let Some(p) = &a.save_graph {
        graph.write_edge_list(fs::File::create(p)?)?;
    }
    let est = estimate_beta_nishimori(&graph, a.beta_hi, a.tol)?;
    if let Some(p) = &a.trace {
        write_trace_csv(&est.trace, fs::File::create(p)?)?;
    }
    json_bytes(&json!({
        "n": graph.n(),
        "edges": graph.edges().len(),
        "beta_hat": est.beta_hat,
        "method": est.method,
        "bracket": est.bracket,
        "beta_n": planted,
    }))
}

fn load_input_matrix(path: &Path, raw_image: bool) -> Result<DMatrix<f64>> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => data::covariance_from_csv(path),
        Some("pgm") | Some("pnm") => {
            let img = data::load_image_gray(path)?;
            Ok(if raw_image { img } else { data::gradient_magnitude(&img) })
        }
        _ => data::load_matrix_market(path),
    }
}

fn factorize(a: &FactorizeArgs, seed: u64) -> Result<Vec<u8>> {
    let ds = match (&a.input, &a.dataset) {
        (Some(p), _) => Dataset {
            name: p.file_stem().map_or_else(|| "input".into(), |s| s.to_string_lossy().into_owned()),
            kind: DatasetKind::DenseGraph,
            matrix: load_input_matrix(p, a.raw_image)?,
        },
        (None, Some(name)) => data::synthetic_suite(0)
            .into_iter()
            .find(|d| d.name == *name)
            .ok_or_else(|| Error::Lookup(name.clone()))?,
        (None, None) => return Err(Error::domain("give --in or --dataset")),
    };
    let budget = Budget::new(ds.n())?;
    let xnorm = ds.matrix.norm();
    let mut out = match a.method {
        Method::Tsvd => {
            let t = tsvd(&ds.matrix, budget.tsvd_rank)?;
            let row = ReportRow::new(&ds.name, ds.n(), "tsvd", "none", budget.tsvd_nnz(), 0, seed, t.error, 0.0);
            let mut v = serde_json::to_value(&row)?;
            v["singular"] = json!(t.singular.iter().map(|s| sci(*s)).collect::<Vec<_>>());
            v
        }
        method => {
            let masks = masks_for(method, &budget, seed)?;
            let res = sf_optimize(&ds.matrix, &masks, a.iters, seed)?;
            let row = ReportRow::new(&ds.name, ds.n(), method.as_str(), method.mask_name(), res.factors.nnz(), res.iterations, seed, res.final_fnorm, 0.0);
            let mut v = serde_json::to_value(&row)?;
            v["history_first"] = json!(sci(res.history[0]));
            v["history_last"] = json!(sci(*res.history.last().expect("history is never empty")));
            if a.with_factors {
                v["factors"] = serde_json::to_value(&res.factors)?;
            }
            v
        }
    };
    let rel = out["fnorm_error"].as_str().and_then(|s| s.parse::<f64>().ok()).map(|e| sci(e / xnorm));
    out["relative_error"] = json!(rel);
    if let Value::Object(m) = &mut out {
        m.remove("seconds");
    }
    json_bytes(&out)
}

fn bench(a: &BenchArgs, common: &Common) -> Result<Vec<u8>> {
    let mut sources: Vec<BenchSource> = match a.suite {
        SuiteArg::Synthetic => data::synthetic_suite(0).into_iter().map(BenchSource::Ready).collect(),
        SuiteArg::None => Vec::new(),
    };
    if let Some(reg) = &a.registry {
        sources.extend(Registry::load(reg)?.datasets.into_iter().map(BenchSource::File));
    }
    if !a.datasets.is_empty() {
        sources.retain(|s| a.datasets.iter().any(|d| d == s.name()));
    }
    if sources.is_empty() {
        return Err(Error::domain("no datasets selected"));
    }
    let cfg = BenchConfig {
        methods: a.methods.clone(),
        iters: a.iters,
        seeds: if a.seeds.is_empty() { vec![common.seed] } else { a.seeds.clone() },
        jobs: common.jobs,
        timing: !a.no_timing,
    };
    let report: Report = benchmark(&sources, &cfg)?;
    let mut buf = Vec::new();
    match common.out.as_deref().map(ReportFormat::from_path) {
        Some(ReportFormat::Json) => report.write_json(&mut buf)?,
        _ => report.write_csv(&mut buf)?,
    }
    Ok(buf)
}

fn atlas_cmd(a: &AtlasArgs) -> Result<Vec<u8>> {
    if a.list {
        return Ok(atlas_names().iter().map(|n| format!("{n}\n")).collect::<String>().into_bytes());
    }
    let name = a.name.as_deref().expect("clap requires --name without --list");
    match (atlas(name)?, a.format) {
        (AtlasEntry::Exponent(e), AtlasFormat::Exponent) => exponent_bytes(&e),
        (entry, _) => alist_bytes(&entry.to_binary()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn help_and_usage_codes() {
        assert_eq!(run(["qcldpc", "--help"]), 0);
        assert_eq!(run(["qcldpc", "atlas", "--bogus"]), 2);
        assert_eq!(run(["qcldpc", "frobnicate"]), 2);
    }

    #[test]
    fn config_merges_under_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        fs::write(&cfg, r#"{"seed": 7, "name": "mega4", "list": false}"#).unwrap();
        let argv: Vec<String> = ["qcldpc", "atlas", "--seed", "3", "--config", cfg.to_str().unwrap()].map(String::from).to_vec();
        let merged = merge_config(argv).unwrap();
        let cli = Cli::try_parse_from(&merged).unwrap();
        assert_eq!(cli.common.seed, 3);
        let Cmd::Atlas(a) = cli.cmd else { panic!() };
        assert_eq!(a.name.as_deref(), Some("mega4"));
    }

    #[test]
    fn domain_error_code() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("x.em");
        assert_eq!(run(["qcldpc", "atlas", "--name", "no_such", "--out", out.to_str().unwrap()]), 1);
    }

    #[test]
    fn lcm_rows_parse() {
        assert_eq!(parse_lcm_rows("2,3:5;3,5:8").unwrap(), vec![(vec![2, 3], 5), (vec![3, 5], 8)]);
        assert!(parse_lcm_rows("2,3").is_err());
    }
}
