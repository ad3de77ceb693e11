//! The `eqbundle` command line.
//!
//! Exit status is 0 on success or a passing predicate, 1 when validation or
//! a predicate fails, and 2 on malformed input, bad arguments or I/O errors.
//! Relative input paths that do not exist are retried under the directory
//! named by `EQBUNDLE_FIXTURES`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{
    aut_lie_algebra, is_equivariant_automorphism, levi_reduction_check, split_check, verify_morphism_witness,
    verify_reduction_witness, AnalysisError, AutSummary, MorphismWitness, ReductionWitness, SplitVerdict,
    DEFAULT_SPLIT_ATTEMPTS,
};
use crate::fan::{validate_fan, Fan, FanError};
use crate::json;
use crate::kaneyama::{
    extend_structure_group, split_data, tangent_frame_data, validate, verify_equivalence_witness, DataError, Embedding,
    EquivalenceWitness, GroupTag, KaneyamaData,
};
use crate::lattice::RationalMatrix;
use crate::report::ValidationReport;

pub const FIXTURES_ENV: &str = "EQBUNDLE_FIXTURES";

#[derive(Parser, Debug)]
#[command(name = "eqbundle", version, about = "Equivariant principal bundles on smooth complete toric varieties")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Human-readable text instead of JSON.
    #[arg(long, global = true)]
    pub pretty: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check smoothness and completeness of a fan.
    ValidateFan {
        #[arg(long)]
        fan: PathBuf,
    },
    /// Check the defining conditions of Kaneyama data.
    ValidateData {
        #[arg(long)]
        data: PathBuf,
    },
    /// Emit the frame-bundle data of the tangent bundle.
    Tangent {
        #[arg(long)]
        fan: PathBuf,
    },
    /// Emit split data from per-ray weights.
    SplitData {
        #[arg(long)]
        fan: PathBuf,
        /// Per-ray weight vectors in ray order: `a,b;c,d;...`.
        #[arg(long, allow_hyphen_values = true)]
        m: String,
        /// `GL:r` or `SL:r`.
        #[arg(long)]
        group: String,
    },
    /// Extend the structure group along an embedding.
    Extend {
        #[arg(long)]
        data: PathBuf,
        /// `identity`, `sl-balance` or `block:<rank>:<p,..>:<k,..>`.
        #[arg(long)]
        embedding: String,
    },
    /// Lie algebra of equivariant automorphisms.
    Aut {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0)]
        base: usize,
    },
    /// Test whether a matrix in the base frame is an equivariant automorphism.
    IsAut {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0)]
        base: usize,
        /// JSON matrix, inline or as `@path`.
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
    },
    /// Test reduction to a block Levi subgroup.
    Levi {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0)]
        base: usize,
        /// 0-based blocks: `0,1|2`.
        #[arg(long)]
        partition: String,
    },
    /// Decide equivariant splitting when possible.
    Split {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0)]
        base: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SPLIT_ATTEMPTS)]
        attempts: u32,
    },
    /// Check an equivalence, morphism or reduction witness.
    VerifyWitness {
        #[arg(long, value_enum)]
        kind: WitnessKind,
        #[arg(long)]
        data: PathBuf,
        /// Target data for equivalence and morphism witnesses.
        #[arg(long)]
        data2: Option<PathBuf>,
        #[arg(long)]
        witness: PathBuf,
        #[arg(long, default_value_t = 0)]
        base: usize,
    },
    /// Emit a standard fan.
    Fan {
        #[command(subcommand)]
        family: FanFamily,
    },
}

#[derive(Subcommand, Debug)]
pub enum FanFamily {
    /// Projective space of dimension `n`.
    Projective { n: usize },
    /// Kleinschmidt fan with `s` and twists `a_1,...,a_r`.
    Kleinschmidt {
        s: usize,
        #[arg(allow_hyphen_values = true)]
        a: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WitnessKind {
    Equivalence,
    Morphism,
    Reduction,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            _ => 2,
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::InvalidData(_) => CliError::Failed(e.to_string()),
            AnalysisError::Data(d) => d.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        match e {
            DataError::InvalidFan(_) | DataError::Invalid(_) => CliError::Failed(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<FanError> for CliError {
    fn from(e: FanError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn resolve(path: &Path) -> PathBuf {
    if path.is_relative() && !path.exists() {
        if let Some(dir) = std::env::var_os(FIXTURES_ENV) {
            let alt = Path::new(&dir).join(path);
            if alt.exists() {
                return alt;
            }
        }
    }
    path.to_path_buf()
}

fn read_text(path: &Path) -> Result<(String, String), CliError> {
    let p = resolve(path);
    let shown = p.display().to_string();
    let text = std::fs::read_to_string(&p).map_err(|source| CliError::Io { path: shown.clone(), source })?;
    Ok((text, shown))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let (text, shown) = read_text(path)?;
    json::from_str(&text).map_err(|e| CliError::Parse { path: shown, message: e.to_string() })
}

fn parse_inline_matrix(arg: &str) -> Result<RationalMatrix, CliError> {
    if let Some(p) = arg.strip_prefix('@') {
        return read_json(Path::new(p));
    }
    json::from_str(arg).map_err(|e| CliError::Parse { path: "--matrix".into(), message: e.to_string() })
}

fn parse_int_list(s: &str, what: &str) -> Result<Vec<i64>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|_| CliError::Usage(format!("{what}: `{x}` is not an integer"))))
        .collect()
}

fn parse_weights(s: &str) -> Result<Vec<Vec<i64>>, CliError> {
    s.split(';').map(|part| parse_int_list(part, "--m")).collect()
}

fn parse_partition(s: &str) -> Result<Vec<Vec<usize>>, CliError> {
    s.split('|')
        .map(|block| {
            parse_int_list(block, "--partition")?
                .into_iter()
                .map(|i| usize::try_from(i).map_err(|_| CliError::Usage(format!("--partition: negative index {i}"))))
                .collect()
        })
        .collect()
}

/// A finished command: text to emit and whether the outcome passed.
struct Output {
    body: String,
    passed: bool,
}

fn emit<T: Serialize>(v: &T, pretty: Option<String>, passed: bool) -> Output {
    Output { body: pretty.unwrap_or_else(|| json::to_string(v)), passed }
}

#[derive(Serialize)]
struct Verdict {
    result: bool,
}

fn report_output(rep: &ValidationReport, pretty: bool) -> Output {
    emit(rep, pretty.then(|| format!("{rep}\n")), rep.is_valid())
}

fn predicate(name: &str, result: bool, pretty: bool) -> Output {
    emit(&Verdict { result }, pretty.then(|| format!("{name}: {result}\n")), result)
}

fn render_aut(s: &AutSummary) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "base cone: {}", s.base_cone);
    let _ = writeln!(t, "dimension: {}", s.dim);
    for (k, b) in s.basis.iter().enumerate() {
        let _ = writeln!(t, "basis[{k}]: {b}");
    }
    for (ray, dim) in &s.per_ray_dims {
        let _ = writeln!(t, "ray {ray}: parabolic dim {dim}");
    }
    t
}

fn render_verdict(v: &SplitVerdict) -> String {
    match v {
        SplitVerdict::Split { certificate } => format!("split\ncertificate: {certificate}\n"),
        SplitVerdict::NotSplit { reason } => format!("not split: {reason}\n"),
        SplitVerdict::Unknown { reason } => format!("unknown: {reason}\n"),
    }
}

fn render_data(d: &KaneyamaData) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "group: {}", d.group());
    for c in 0..d.num_cones() {
        let chars: Vec<String> = d.xi(c).iter().map(ToString::to_string).collect();
        let _ = writeln!(t, "xi[{c}]: {}", chars.join(" "));
    }
    for a in 0..d.num_cones() {
        for b in 0..d.num_cones() {
            if a != b {
                let _ = writeln!(t, "P({a},{b}): {}", d.transition(a, b));
            }
        }
    }
    t
}

fn data_output(d: &KaneyamaData, pretty: bool) -> Output {
    emit(d, pretty.then(|| render_data(d)), true)
}

fn execute(cli: &Cli) -> Result<Output, CliError> {
    let pretty = cli.pretty;
    Ok(match &cli.command {
        Command::ValidateFan { fan } => {
            let f: Fan = read_json(fan)?;
            report_output(&validate_fan(&f), pretty)
        }
        Command::ValidateData { data } => {
            let d: KaneyamaData = read_json(data)?;
            report_output(&validate(&d), pretty)
        }
        Command::Tangent { fan } => {
            let f: Fan = read_json(fan)?;
            data_output(&tangent_frame_data(&f)?, pretty)
        }
        Command::SplitData { fan, m, group } => {
            let f: Fan = read_json(fan)?;
            let g: GroupTag = group.parse().map_err(CliError::Usage)?;
            data_output(&split_data(&f, &parse_weights(m)?, g)?, pretty)
        }
        Command::Extend { data, embedding } => {
            let d: KaneyamaData = read_json(data)?;
            let phi: Embedding = embedding.parse().map_err(CliError::Usage)?;
            data_output(&extend_structure_group(&d, &phi)?, pretty)
        }
        Command::Aut { data, base } => {
            let d: KaneyamaData = read_json(data)?;
            let s = aut_lie_algebra(&d, *base)?.summary();
            emit(&s, pretty.then(|| render_aut(&s)), true)
        }
        Command::IsAut { data, base, matrix } => {
            let d: KaneyamaData = read_json(data)?;
            let a = parse_inline_matrix(matrix)?;
            predicate("automorphism", is_equivariant_automorphism(&d, *base, &a)?, pretty)
        }
        Command::Levi { data, base, partition } => {
            let d: KaneyamaData = read_json(data)?;
            predicate("levi reduction", levi_reduction_check(&d, *base, &parse_partition(partition)?)?, pretty)
        }
        Command::Split { data, base, seed, attempts } => {
            let d: KaneyamaData = read_json(data)?;
            let v = split_check(&d, *base, *attempts, *seed)?;
            emit(&v, pretty.then(|| render_verdict(&v)), true)
        }
        Command::VerifyWitness { kind, data, data2, witness, base } => {
            let d: KaneyamaData = read_json(data)?;
            let second = || -> Result<KaneyamaData, CliError> {
                let p = data2.as_ref().ok_or_else(|| CliError::Usage("--data2 is required for this witness".into()))?;
                read_json(p)
            };
            let ok = match kind {
                WitnessKind::Equivalence => {
                    let w: EquivalenceWitness = read_json(witness)?;
                    verify_equivalence_witness(&d, &second()?, &w)?
                }
                WitnessKind::Morphism => {
                    let w: MorphismWitness = read_json(witness)?;
                    verify_morphism_witness(&d, &second()?, *base, &w)?
                }
                WitnessKind::Reduction => {
                    let w: ReductionWitness = read_json(witness)?;
                    verify_reduction_witness(&d, &w)?
                }
            };
            predicate("witness", ok, pretty)
        }
        Command::Fan { family } => {
            let f = match family {
                FanFamily::Projective { n } => Fan::projective_space(*n)?,
                FanFamily::Kleinschmidt { s, a } => Fan::kleinschmidt(*s, &parse_int_list(a, "twists")?)?,
            };
            emit(&f, None, true)
        }
    })
}

/// Runs the command line on `args` (including the program name), writing
/// the report to `out` or to `--out`, and diagnostics to `err`. Returns the
/// exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                2
            } else {
                let _ = out.write_all(text.as_bytes());
                0
            };
        }
    };
    let result = execute(&cli).and_then(|o| {
        match &cli.out {
            Some(p) => {
                std::fs::write(p, &o.body).map_err(|source| CliError::Io { path: p.display().to_string(), source })?
            }
            None => {
                out.write_all(o.body.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source })?
            }
        }
        Ok(o.passed)
    });
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "eqbundle: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("eqbundle").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn weights_and_partitions() {
        assert_eq!(parse_weights("1,0;-2,3").unwrap(), vec![vec![1, 0], vec![-2, 3]]);
        assert_eq!(parse_partition("0,1|2").unwrap(), vec![vec![0, 1], vec![2]]);
        assert!(parse_partition("0,-1").is_err());
        assert!(parse_weights("1,x").is_err());
    }

    #[test]
    fn fan_subcommand() {
        let (code, out, _) = run_args(&["fan", "projective", "2"]);
        assert_eq!(code, 0);
        assert_eq!(out, "{\"dim\":2,\"rays\":[[-1,-1],[1,0],[0,1]],\"max_cones\":[[1,2],[0,2],[0,1]]}\n");
        let (code, _, err) = run_args(&["fan", "kleinschmidt", "1", "1,0"]);
        assert_eq!(code, 2);
        assert!(err.contains("twist"));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_args(&["aut"]).0, 2);
        assert_eq!(run_args(&["bogus"]).0, 2);
        assert_eq!(run_args(&["--help"]).0, 0);
        let (code, _, err) = run_args(&["aut", "--data", "/nonexistent/x.json"]);
        assert_eq!(code, 2);
        assert!(err.contains("/nonexistent/x.json"));
    }
}
