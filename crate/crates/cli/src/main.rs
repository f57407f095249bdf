#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use sparsify_core::mtx::{format_csr, read_dense, read_sparse, write_atomic};
use sparsify_core::{
    compute_bins, diagnostics, gen_test_matrix, lp_pattern, sparsify, sweep_bins, BinAssignment,
    DenseMatrix, GenOptions, MatrixType, SparsifyConfig, SparsityPattern, TestMatrixKind,
};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "sparsify", version, about = "Sparsify dense matrices while preserving their spectral action")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sparsify a matrix and write the result as a coordinate file.
    Sparsify(SparsifyArgs),
    /// Write the sparsity pattern selected for a matrix.
    Pattern(PatternArgs),
    /// Write the bin id of every pattern position.
    Bins(BinsArgs),
    /// Spectral diagnostics of a sparse matrix against its dense original.
    Diagnose(DiagnoseArgs),
    /// Sparsify once per bin limit and tabulate the diagnostics.
    SweepBins(SweepArgs),
    /// Generate a test matrix.
    Gen(GenArgs),
}

#[derive(Args)]
struct PatternFlags {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    ratio: f64,
    #[arg(long)]
    p: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct SparsifyArgs {
    #[command(flatten)]
    pattern: PatternFlags,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    max_bins: i64,
    #[arg(long)]
    impose_nullspaces: bool,
    #[arg(long, value_parser = parse_matrix_type, default_value = "undefined")]
    matrix_type: MatrixType,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    report_format: ReportFormat,
    /// Leave the timing block out of the report.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct PatternArgs {
    #[command(flatten)]
    pattern: PatternFlags,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct BinsArgs {
    #[command(flatten)]
    pattern: PatternFlags,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    max_bins: i64,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    sparse: PathBuf,
    /// Also report the condition number of the pattern Hessian.
    #[arg(long)]
    hessian: bool,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    pattern: PatternFlags,
    #[arg(long, value_delimiter = ',', required = true)]
    bins: Vec<i64>,
    #[arg(long)]
    impose_nullspaces: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: TableFormat,
    /// Write the table here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_parser = parse_kind)]
    kind: TestMatrixKind,
    #[arg(long, default_value_t = 40)]
    n: usize,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

fn parse_matrix_type(s: &str) -> Result<MatrixType, String> {
    s.parse().map_err(|e: sparsify_core::Error| e.to_string())
}

fn parse_kind(s: &str) -> Result<TestMatrixKind, String> {
    s.parse().map_err(|e: sparsify_core::Error| e.to_string())
}

type CliResult<T> = Result<T, String>;

fn check_pattern_flags(f: &PatternFlags) -> CliResult<()> {
    if !(0.0..=1.0).contains(&f.ratio) {
        return Err(format!("--ratio must be in [0, 1], got {}", f.ratio));
    }
    if !(f.p >= 0.0) {
        return Err(format!("--p must be in [0, inf], got {}", f.p));
    }
    Ok(())
}

fn check_bins(flag: &str, n: i64) -> CliResult<usize> {
    usize::try_from(n).map_err(|_| format!("{flag} must be >= 0, got {n}"))
}

fn read_input(path: &Path) -> CliResult<DenseMatrix> {
    read_dense(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_out(path: &Path, contents: &str) -> CliResult<()> {
    write_atomic(path, contents.as_bytes()).map_err(|e| format!("{}: {e}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("report types serialize")
}

fn pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialize");
    s.push('\n');
    s
}

fn flatten(prefix: &str, value: &Value, out: &mut String) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        other => writeln!(out, "{prefix}: {other}").unwrap(),
    }
}

fn format_pattern(pattern: &SparsityPattern) -> String {
    let (m, n) = pattern.shape();
    let mut out = format!("%%MatrixMarket matrix coordinate pattern general\n{m} {n} {}\n", pattern.nnz());
    for &(i, j) in pattern.positions() {
        writeln!(out, "{} {}", i + 1, j + 1).unwrap();
    }
    out
}

/// Bin ids as an integer coordinate file; complex inputs get a second
/// column holding the id of the imaginary part.
fn format_bins(bins: &BinAssignment) -> String {
    let pattern = bins.pattern();
    let (m, n) = pattern.shape();
    let field = if bins.imag_ids().is_some() { "complex" } else { "integer" };
    let mut out = format!("%%MatrixMarket matrix coordinate {field} general\n{m} {n} {}\n", pattern.nnz());
    for (p, &(i, j)) in pattern.positions().iter().enumerate() {
        write!(out, "{} {} {}", i + 1, j + 1, bins.real_ids()[p]).unwrap();
        if let Some(im) = bins.imag_ids() {
            write!(out, " {}", im[p]).unwrap();
        }
        out.push('\n');
    }
    out
}

fn run_sparsify(args: &SparsifyArgs) -> CliResult<()> {
    check_pattern_flags(&args.pattern)?;
    let cfg = SparsifyConfig {
        sparsity_ratio: args.pattern.ratio,
        sparsity_norm_p: args.pattern.p,
        max_num_bins: check_bins("--max-bins", args.max_bins)?,
        impose_null_spaces: args.impose_nullspaces,
        matrix_type: args.matrix_type,
        ..Default::default()
    };
    let a = read_input(&args.pattern.input)?;
    let (x, report) = sparsify(&a, &cfg).map_err(|e| e.to_string())?;

    let report_text = args.report.as_ref().map(|_| {
        let mut doc = json!({
            "schema_version": SCHEMA_VERSION,
            "config": to_json(&cfg),
            "report": to_json(&report),
        });
        if !args.no_timing {
            doc["metadata"] = json!({ "timings": to_json(&report.timings) });
        }
        match args.report_format {
            ReportFormat::Json => pretty(&doc),
            ReportFormat::Text => {
                let mut s = String::new();
                flatten("", &doc, &mut s);
                s
            }
        }
    });
    write_out(&args.output, &format_csr(&x))?;
    if let (Some(path), Some(text)) = (&args.report, report_text) {
        if let Err(e) = write_out(path, &text) {
            let _ = std::fs::remove_file(&args.output);
            return Err(e);
        }
    }
    Ok(())
}

fn run_pattern(args: &PatternArgs) -> CliResult<()> {
    check_pattern_flags(&args.pattern)?;
    let a = read_input(&args.pattern.input)?;
    let pattern = lp_pattern(&a, args.pattern.ratio, args.pattern.p).map_err(|e| e.to_string())?;
    write_out(&args.output, &format_pattern(&pattern))
}

fn run_bins(args: &BinsArgs) -> CliResult<()> {
    check_pattern_flags(&args.pattern)?;
    let max_bins = check_bins("--max-bins", args.max_bins)?;
    let a = read_input(&args.pattern.input)?;
    let pattern = lp_pattern(&a, args.pattern.ratio, args.pattern.p).map_err(|e| e.to_string())?;
    let bins = compute_bins(&a, &pattern, max_bins).map_err(|e| e.to_string())?;
    write_out(&args.output, &format_bins(&bins))
}

fn emit(output: Option<&PathBuf>, text: &str) -> CliResult<()> {
    match output {
        Some(path) => write_out(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_diagnose(args: &DiagnoseArgs) -> CliResult<()> {
    let a = read_input(&args.input)?;
    let x = read_sparse(&args.sparse).map_err(|e| format!("{}: {e}", args.sparse.display()))?;
    let d = diagnostics(&a, &x, args.hessian).map_err(|e| e.to_string())?;
    let doc = json!({ "schema_version": SCHEMA_VERSION, "diagnostics": to_json(&d) });
    emit(args.output.as_ref(), &pretty(&doc))
}

fn run_sweep(args: &SweepArgs) -> CliResult<()> {
    check_pattern_flags(&args.pattern)?;
    let limits = args
        .bins
        .iter()
        .map(|&b| check_bins("--bins", b))
        .collect::<CliResult<Vec<_>>>()?;
    let cfg = SparsifyConfig {
        sparsity_ratio: args.pattern.ratio,
        sparsity_norm_p: args.pattern.p,
        impose_null_spaces: args.impose_nullspaces,
        ..Default::default()
    };
    let a = read_input(&args.pattern.input)?;
    let rows = sweep_bins(&a, &cfg, &limits).map_err(|e| e.to_string())?;
    let text = match args.format {
        TableFormat::Json => pretty(&json!({ "schema_version": SCHEMA_VERSION, "rows": to_json(&rows) })),
        TableFormat::Csv => {
            let mut s = String::from("max_bins,n_bins,cond_pinv_x,rel_pinv_diff,objective\n");
            for r in &rows {
                writeln!(s, "{},{},{:e},{:e},{:e}", r.max_bins, r.n_bins, r.cond_pinv_x, r.rel_pinv_diff, r.objective)
                    .unwrap();
            }
            s
        }
    };
    emit(args.output.as_ref(), &text)
}

fn run_gen(args: &GenArgs) -> CliResult<()> {
    if args.n == 0 {
        return Err("--n must be >= 1".into());
    }
    let opts = GenOptions { n: args.n, cols: args.cols, rank: args.rank, seed: args.seed };
    let a = gen_test_matrix(args.kind, &opts).map_err(|e| e.to_string())?;
    write_out(&args.output, &sparsify_core::mtx::format_dense(&a))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sparsify(a) => run_sparsify(a),
        Command::Pattern(a) => run_pattern(a),
        Command::Bins(a) => run_bins(a),
        Command::Diagnose(a) => run_diagnose(a),
        Command::SweepBins(a) => run_sweep(a),
        Command::Gen(a) => run_gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("sparsify: {msg}");
            ExitCode::FAILURE
        }
    }
}
