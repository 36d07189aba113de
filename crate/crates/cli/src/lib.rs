//! `prespec` command-line frontend.
//!
//! Exit status: 0 on success, 1 on a failed verification or runtime error,
//! 2 on a usage error, 3 on a parse error in the region spec.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};

use clap::{Args, Parser, Subcommand};
use prespec::direct_sum::{Block, PairWitness};
use prespec::pseudospec::{self, default_window};
use prespec::{
    Complex64, DirectSumOperator, Error, ExactComplex, MultiplierSequence, NormExponent,
    ParseError, Profile, QueryPoint, RegionSpec, SumNorm, SweepConfig, VolterraConfig, Window,
};
use serde::Serialize;
use serde_json::json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;

/// Set once a payload has been written to stdout; the summary line then
/// goes to stderr so stdout stays machine-readable.
static PAYLOAD_ON_STDOUT: AtomicBool = AtomicBool::new(false);

fn summary_line(line: &str) {
    if PAYLOAD_ON_STDOUT.load(Ordering::Relaxed) {
        eprintln!("{line}");
    } else {
        println!("{line}");
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "prespec",
    version,
    about = "Closed operators with a prescribed spectrum"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the first multipliers m_1..m_count as CSV.
    GenerateMultipliers {
        #[command(flatten)]
        spec: SpecArg,
        /// Number of multipliers.
        #[arg(long, default_value_t = 4096)]
        count: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Classify one spectral parameter against σ(A).
    Classify {
        #[command(flatten)]
        spec: SpecArg,
        #[command(flatten)]
        query: QueryArgs,
        #[command(flatten)]
        op: OperatorArgs,
        /// Classification tolerance on dist(λ, σ).
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Estimate ‖R(λ, D)‖ on the discretized L_p(0, 1).
    VolterraNorm {
        /// Spectral parameter "re,im".
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        lambda: Complex64,
        /// Grid cells on [0, 1].
        #[arg(long, default_value_t = 256)]
        cells: usize,
        /// Norm exponent, 1 or 2.
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[command(flatten)]
        out: OutArg,
    },
    /// Classify every node of a window lattice, written as CSV.
    SpectrumReport {
        #[command(flatten)]
        spec: SpecArg,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Sweep 1/‖R(λ, A)‖ over a window lattice, written as CSV.
    Pseudospectrum {
        #[command(flatten)]
        spec: SpecArg,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        op: OperatorArgs,
        /// Strictly decreasing level-set thresholds.
        #[arg(long, value_delimiter = ',', default_value = "1e-1,1e-2,1e-3")]
        eps: Vec<f64>,
        /// Seed for the covering-radius estimate.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run the invariant battery and write a JSON report.
    Verify {
        #[command(flatten)]
        spec: SpecArg,
        /// quick or full.
        #[arg(long, default_value = "quick")]
        profile: Profile,
        #[command(flatten)]
        out: OutArg,
    },
    /// Spectral certificate for λ plus unboundedness witnesses for A.
    Certificate {
        #[command(flatten)]
        spec: SpecArg,
        #[command(flatten)]
        query: QueryArgs,
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Ratio the unboundedness witnesses must exceed.
        #[arg(long, default_value_t = 1e3)]
        threshold: f64,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Debug, Args)]
struct SpecArg {
    /// Region spec JSON file.
    #[arg(long = "spec", id = "spec", required = true)]
    path: PathBuf,
}

#[derive(Debug, Args)]
struct OutArg {
    /// Output file (written atomically); stdout when absent.
    #[arg(long = "out", id = "out")]
    path: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct QueryArgs {
    /// Spectral parameter "re,im".
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true,
          required_unless_present = "exact")]
    lambda: Option<Complex64>,
    /// Exact rational parameter "num/den,num/den"; takes precedence over --lambda.
    #[arg(long, value_parser = parse_exact, allow_hyphen_values = true)]
    exact: Option<ExactComplex>,
}

#[derive(Debug, Args)]
struct OperatorArgs {
    /// Truncation order of the multiplication block.
    #[arg(long = "N", default_value_t = 4096)]
    n_trunc: usize,
    /// Grid cells for the differentiation block.
    #[arg(long, default_value_t = 256)]
    cells: usize,
    /// Norm exponent of L_p(0, 1), 1 or 2.
    #[arg(long, default_value_t = 2)]
    p: u32,
    /// Norm on the direct sum: "one" (‖x‖ + ‖y‖) or "two" (Hilbert, p = 2 only).
    #[arg(long, default_value = "one", value_parser = parse_sum_norm)]
    sum_norm: SumNorm,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Window "x0,x1,y0,y1"; defaults to a box around the region.
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
    window: Option<Window>,
    /// Lattice size "NXxNY".
    #[arg(long, default_value = "201x201", value_parser = parse_grid)]
    grid: (usize, usize),
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [re, im] = parts[..] else {
        return Err(format!("expected 're,im', got '{s}'"));
    };
    let re: f64 = re.trim().parse().map_err(|e| format!("real part: {e}"))?;
    let im: f64 = im
        .trim()
        .parse()
        .map_err(|e| format!("imaginary part: {e}"))?;
    if !(re.is_finite() && im.is_finite()) {
        return Err("components must be finite".into());
    }
    Ok(Complex64::new(re, im))
}

fn parse_exact(s: &str) -> Result<ExactComplex, String> {
    ExactComplex::parse(s).map_err(|e| e.to_string())
}

fn parse_window(s: &str) -> Result<Window, String> {
    Window::parse(s).map_err(|e| e.to_string())
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (nx, ny) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected 'NXxNY', got '{s}'"))?;
    let nx: usize = nx.parse().map_err(|e| format!("grid width: {e}"))?;
    let ny: usize = ny.parse().map_err(|e| format!("grid height: {e}"))?;
    if nx < 2 || ny < 2 {
        return Err("grid must be at least 2x2".into());
    }
    Ok((nx, ny))
}

fn parse_sum_norm(s: &str) -> Result<SumNorm, String> {
    match s {
        "one" => Ok(SumNorm::OneSum),
        "two" => Ok(SumNorm::TwoSum),
        _ => Err(format!("expected 'one' or 'two', got '{s}'")),
    }
}

enum Failure {
    Usage(String),
    Parse(ParseError),
    Runtime(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(p) => Failure::Parse(p),
            Error::InvalidArgument(m) => Failure::Usage(m),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

/// Parses `argv` (including the program name), runs the command, and
/// returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    PAYLOAD_ON_STDOUT.store(false, Ordering::Relaxed);
    match dispatch(cli.command) {
        Ok(summary) => {
            summary_line(&summary);
            EXIT_OK
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Parse(p)) => {
            let body = json!({
                "error": "parse",
                "message": p.message,
                "index": p.index,
                "pointer": p.pointer,
            });
            eprintln!("{body}");
            EXIT_PARSE
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            EXIT_FAILURE
        }
        Err(Failure::Verification(m)) => {
            summary_line(&m);
            EXIT_FAILURE
        }
    }
}

fn load_spec(path: &Path) -> Result<RegionSpec, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    RegionSpec::from_json(&text).map_err(Failure::Parse)
}

fn build_operator(spec: RegionSpec, op: &OperatorArgs) -> Result<DirectSumOperator, Failure> {
    let p = NormExponent::from_int(op.p)?;
    Ok(DirectSumOperator::new(
        spec,
        op.n_trunc,
        VolterraConfig {
            n_cells: op.cells,
            p,
        },
        op.sum_norm,
    )?)
}

fn query(q: &QueryArgs) -> QueryPoint {
    match (&q.exact, q.lambda) {
        (Some(e), _) => QueryPoint::Exact(e.clone()),
        (None, Some(z)) => QueryPoint::Float(z),
        (None, None) => unreachable!("clap requires one of --lambda/--exact"),
    }
}

/// Writes `contents` through a temporary file in the target directory,
/// renamed into place; prints to stdout when no path is given.
fn emit(out: &OutArg, contents: &str) -> Result<String, Failure> {
    match &out.path {
        None => {
            print!("{contents}");
            let _ = std::io::stdout().flush();
            PAYLOAD_ON_STDOUT.store(true, Ordering::Relaxed);
            Ok("stdout".into())
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let io =
                |e: std::io::Error| Failure::Runtime(format!("writing {}: {e}", path.display()));
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
            tmp.write_all(contents.as_bytes()).map_err(io)?;
            tmp.persist(path).map_err(|e| io(e.error))?;
            Ok(path.display().to_string())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// A JSON number, or the `format_ext` string for non-finite values.
fn ext(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(prespec::serde_ext::format_ext(v))
    }
}

fn fmt_z(z: Complex64) -> String {
    format!("{},{}", z.re, z.im)
}

#[derive(Serialize)]
struct WitnessSummary {
    block: Block,
    index: Option<usize>,
    ratio: f64,
}

impl From<PairWitness> for WitnessSummary {
    fn from(w: PairWitness) -> Self {
        Self {
            block: w.block,
            index: w.index,
            ratio: w.ratio,
        }
    }
}

fn dispatch(command: Command) -> Result<String, Failure> {
    match command {
        Command::GenerateMultipliers { spec, count, out } => {
            let seq = MultiplierSequence::new(load_spec(&spec.path)?)?;
            let mut csv =
                String::from("n,re,im,exact_num_re,exact_den_re,exact_num_im,exact_den_im\n");
            for m in seq.prefix(count) {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    m.n,
                    m.value.re,
                    m.value.im,
                    m.exact.re.numer(),
                    m.exact.re.denom(),
                    m.exact.im.numer(),
                    m.exact.im.denom()
                ));
            }
            let dest = emit(&out, &csv)?;
            Ok(format!(
                "generate-multipliers: {count} multipliers -> {dest}"
            ))
        }
        Command::Classify {
            spec,
            query: q,
            op,
            tol,
            out,
        } => {
            let a = build_operator(load_spec(&spec.path)?, &op)?;
            let r = a.classify(&query(&q), tol)?;
            let body = json!({
                "lambda": [r.lambda.re, r.lambda.im],
                "class": r.class,
                "witness": r.certificate,
                "dist": ext(r.dist_to_sigma),
                "resolvent_norm": {
                    "truncated": ext(r.resolvent_norm_truncated),
                    "exact_limit": ext(r.resolvent_norm_exact_limit),
                },
            });
            let dest = emit(&out, &to_json(&body))?;
            Ok(format!(
                "classify: λ = {} is {} (dist {}) -> {dest}",
                fmt_z(r.lambda),
                r.class.label(),
                r.dist_to_sigma
            ))
        }
        Command::VolterraNorm {
            lambda,
            cells,
            p,
            out,
        } => {
            let est = prespec::volterra::resolvent_norm_estimate(
                lambda,
                cells,
                NormExponent::from_int(p)?,
            )?;
            let dest = emit(&out, &to_json(&est))?;
            Ok(format!(
                "volterra-norm: ‖R(λ, D)‖ ≈ {} at λ = {} ({cells} cells, p = {p}) -> {dest}",
                est.norm_estimate,
                fmt_z(lambda)
            ))
        }
        Command::SpectrumReport {
            spec,
            grid,
            op,
            tol,
            out,
        } => {
            let spec = load_spec(&spec.path)?;
            let window = grid.window.unwrap_or_else(|| default_window(&spec));
            let a = build_operator(spec, &op)?;
            let (nx, ny) = grid.grid;
            let report = a.spectrum_report(window, nx, ny, tol)?;
            let dest = emit(&out, &report.to_csv())?;
            let c = report.counts;
            Ok(format!(
                "spectrum-report: {} nodes, {} point, {} continuous, {} resolvent set -> {dest}",
                report.nodes.len(),
                c.point,
                c.continuous,
                c.resolvent_set
            ))
        }
        Command::Pseudospectrum {
            spec,
            grid,
            op,
            eps,
            seed,
            tol,
            out,
        } => {
            let spec = load_spec(&spec.path)?;
            let window = grid.window.unwrap_or_else(|| default_window(&spec));
            let a = build_operator(spec, &op)?;
            let (nx, ny) = grid.grid;
            let mut cfg = SweepConfig::new(window, nx, ny);
            cfg.epsilons = eps;
            cfg.seed = seed;
            cfg.tol = tol;
            let res = pseudospec::sweep(&a, &cfg)?;
            let dest = emit(&out, &res.to_csv())?;
            let levels: Vec<String> = res
                .summary
                .sublevel_counts
                .iter()
                .map(|(e, n)| format!("{e:e}:{n}"))
                .collect();
            Ok(format!(
                "pseudospectrum: {} nodes, sublevel counts [{}], {} errors -> {dest}",
                res.nodes.len(),
                levels.join(" "),
                res.summary.errors
            ))
        }
        Command::Verify { spec, profile, out } => {
            let spec = load_spec(&spec.path)?;
            let report = pseudospec::verify_all(&spec, profile);
            let dest = emit(&out, &to_json(&report))?;
            let line = format!(
                "verify: {} passed, {} failed, {} skipped -> {dest}",
                report.passed, report.failed, report.skipped
            );
            if report.success() {
                Ok(line)
            } else {
                let failed: Vec<&str> = report
                    .checks
                    .iter()
                    .filter(|c| c.status == pseudospec::CheckStatus::Fail)
                    .map(|c| c.name.as_str())
                    .collect();
                Err(Failure::Verification(format!(
                    "{line} (failed: {})",
                    failed.join(", ")
                )))
            }
        }
        Command::Certificate {
            spec,
            query: q,
            op,
            tol,
            threshold,
            out,
        } => {
            let a = build_operator(load_spec(&spec.path)?, &op)?;
            let r = a.classify(&query(&q), tol)?;
            let witness = |block| match a.unboundedness_witness(threshold, block) {
                Ok(w) => json!(WitnessSummary::from(w)),
                Err(e) => json!({ "block": block, "error": e.to_string() }),
            };
            let body = json!({
                "spectral": r,
                "unboundedness": [witness(Block::Differentiation), witness(Block::Multiplier)],
                "threshold": threshold,
            });
            let dest = emit(&out, &to_json(&body))?;
            Ok(format!(
                "certificate: λ = {} is {} -> {dest}",
                fmt_z(r.lambda),
                r.class.label()
            ))
        }
    }
}
