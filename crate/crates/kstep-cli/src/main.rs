//! Command-line harness: single solves with CSV traces, strategy
//! comparison tables, and benchmark grids.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use kstep::market::read_matrix_market_file;
use kstep::solver::{
    block_kstep, extrapolated_kstep, power_iteration, GammaStrategy, SolveConfig, SolveReport,
};
use kstep::sparse::{alternating_diag, inverse_iota_diag, IotaVariant, MatvecCounter};
use kstep::SparseMatrixF64;

/// Dominant-eigenpair solvers over sparse matrices: restarted k-step
/// Arnoldi with extrapolated restarts, plus power and block baselines.
#[derive(Parser)]
#[command(name = "kstep", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solve; the per-iteration trace goes to stdout as CSV and a
    /// one-line summary to stderr. Exits 0 on convergence, 2 otherwise.
    Run(RunArgs),
    /// Iteration-count table: one row per matrix, one column per
    /// extrapolation strategy.
    Table(TableArgs),
    /// A grid of solves over k values and strategies, one CSV trace per
    /// cell plus a manifest of final summaries.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct MatrixSource {
    /// Matrix Market (.mtx) file to read.
    #[arg(long, value_name = "PATH")]
    matrix: Vec<PathBuf>,
    /// Synthetic operator: `alt-diag:<n>` or `inv-iota:<n>:<n-over-i|i-over-n>`.
    #[arg(long, value_name = "SPEC")]
    synthetic: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: MatrixSource,
    /// Solver: `kstep`, `power`, or `block`.
    #[arg(long, default_value = "kstep")]
    solver: String,
    /// Subspace size per restart (block size is k/2 for the block solver).
    #[arg(long, default_value_t = 8)]
    k: usize,
    /// Extrapolation strategy: `none | const:<v> | half-sq-ratio | ratio |
    /// ratio-pow-j | power`.
    #[arg(long, default_value = "none")]
    gamma: String,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_outer: usize,
    /// Start vector: `ones`, `basis:<i>`, or `file:<path>` (one value per line).
    #[arg(long, default_value = "ones")]
    y0: String,
    /// Spend one extra product per outer iteration on a fresh residual.
    #[arg(long)]
    explicit_residual: bool,
}

#[derive(Args)]
struct TableArgs {
    #[command(flatten)]
    source: MatrixSource,
    #[arg(long, default_value_t = 8)]
    k: usize,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_outer: usize,
    /// Strategies (repeat or comma-separate); defaults to the standard
    /// seven-column comparison.
    #[arg(long, value_delimiter = ',')]
    gamma: Vec<String>,
    #[arg(long, default_value = "ones")]
    y0: String,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    source: MatrixSource,
    /// Output directory for the trace files and manifest.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Subspace sizes (repeat or comma-separate).
    #[arg(long, value_delimiter = ',', default_value = "8")]
    k: Vec<usize>,
    /// Strategies; the token `power` selects the power-iteration baseline.
    #[arg(long, value_delimiter = ',', default_value = "none")]
    gamma: Vec<String>,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_outer: usize,
    #[arg(long, default_value = "ones")]
    y0: String,
}

/// Either a gamma rule for the k-step solver or the power baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
enum StrategyToken {
    Gamma(GammaStrategy<f64>),
    Power,
}

impl StrategyToken {
    fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        Ok(match t {
            "" => bail!("empty strategy token"),
            "none" => StrategyToken::Gamma(GammaStrategy::None),
            "half-sq-ratio" => StrategyToken::Gamma(GammaStrategy::HalfSquaredRatio),
            "ratio" => StrategyToken::Gamma(GammaStrategy::Ratio),
            "ratio-pow-j" => StrategyToken::Gamma(GammaStrategy::RatioPowerJ),
            "power" => StrategyToken::Power,
            _ => {
                let v = t
                    .strip_prefix("const:")
                    .ok_or_else(|| anyhow!("unknown strategy `{t}`"))?
                    .parse::<f64>()
                    .with_context(|| format!("bad constant in `{t}`"))?;
                if !(-1.0..=0.0).contains(&v) {
                    bail!("constant gamma {v} outside [-1, 0]");
                }
                StrategyToken::Gamma(GammaStrategy::Constant(v))
            }
        })
    }

    fn label(&self) -> String {
        match self {
            StrategyToken::Power => "power".into(),
            StrategyToken::Gamma(GammaStrategy::None) => "none".into(),
            StrategyToken::Gamma(GammaStrategy::HalfSquaredRatio) => "half-sq-ratio".into(),
            StrategyToken::Gamma(GammaStrategy::Ratio) => "ratio".into(),
            StrategyToken::Gamma(GammaStrategy::RatioPowerJ) => "ratio-pow-j".into(),
            StrategyToken::Gamma(GammaStrategy::Constant(c)) => format!("const:{c}"),
        }
    }

    fn file_slug(&self) -> String {
        self.label().replace(':', "")
    }
}

fn default_table_strategies() -> Vec<StrategyToken> {
    vec![
        StrategyToken::Gamma(GammaStrategy::None),
        StrategyToken::Gamma(GammaStrategy::Constant(-0.25)),
        StrategyToken::Gamma(GammaStrategy::Constant(-0.5)),
        StrategyToken::Gamma(GammaStrategy::Constant(-0.75)),
        StrategyToken::Gamma(GammaStrategy::HalfSquaredRatio),
        StrategyToken::Gamma(GammaStrategy::Ratio),
        StrategyToken::Gamma(GammaStrategy::RatioPowerJ),
    ]
}

/// A matrix plus the label used in tables and file names.
struct LoadedMatrix {
    label: String,
    matrix: SparseMatrixF64,
}

fn load_sources(source: &MatrixSource) -> Result<Vec<LoadedMatrix>> {
    let mut out = Vec::new();
    for path in &source.matrix {
        let matrix = read_matrix_market_file::<f64>(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        out.push(LoadedMatrix { label, matrix });
    }
    for spec in &source.synthetic {
        out.push(LoadedMatrix {
            label: spec.replace(':', "-"),
            matrix: parse_synthetic(spec)?,
        });
    }
    if out.is_empty() {
        bail!("no matrix given: use --matrix <path> or --synthetic <spec>");
    }
    Ok(out)
}

fn parse_synthetic(spec: &str) -> Result<SparseMatrixF64> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["alt-diag", n] => {
            let n: usize = n.parse().context("bad size in alt-diag spec")?;
            if n == 0 {
                bail!("alt-diag size must be positive");
            }
            Ok(alternating_diag(n))
        }
        ["inv-iota", n, variant] => {
            let n: usize = n.parse().context("bad size in inv-iota spec")?;
            if n == 0 {
                bail!("inv-iota size must be positive");
            }
            let variant = match *variant {
                "n-over-i" => IotaVariant::NOverI,
                "i-over-n" => IotaVariant::IOverN,
                other => bail!("unknown inv-iota variant `{other}` (use n-over-i or i-over-n)"),
            };
            Ok(inverse_iota_diag(n, variant))
        }
        _ => bail!("unknown synthetic spec `{spec}` (use alt-diag:<n> or inv-iota:<n>:<variant>)"),
    }
}

fn build_y0(mode: &str, n: usize) -> Result<Vec<f64>> {
    if mode == "ones" {
        return Ok(vec![1.0; n]);
    }
    if let Some(idx) = mode.strip_prefix("basis:") {
        let i: usize = idx.parse().context("bad index in basis:<i>")?;
        if i >= n {
            bail!("basis index {i} out of range for dimension {n}");
        }
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        return Ok(v);
    }
    if let Some(path) = mode.strip_prefix("file:") {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        let v: Vec<f64> = text
            .split_whitespace()
            .map(|t| t.parse::<f64>().with_context(|| format!("bad value `{t}`")))
            .collect::<Result<_>>()?;
        if v.len() != n {
            bail!("start vector has {} entries, matrix dimension is {n}", v.len());
        }
        return Ok(v);
    }
    bail!("unknown y0 mode `{mode}` (use ones, basis:<i>, or file:<path>)")
}

/// Execute one (matrix, solver, strategy) cell.
fn run_cell(
    matrix: &SparseMatrixF64,
    solver: &str,
    strategy: StrategyToken,
    k: usize,
    tol: f64,
    max_outer: usize,
    y0: &[f64],
    explicit_residual: bool,
) -> Result<SolveReport<f64>> {
    let report = match (solver, strategy) {
        (_, StrategyToken::Power) | ("power", _) => {
            let mut counter = MatvecCounter::new();
            power_iteration(matrix, y0, tol, max_outer, &mut counter)?
        }
        ("block", StrategyToken::Gamma(GammaStrategy::None)) => {
            if k < 2 || k % 2 != 0 {
                bail!("block solver needs an even k >= 2");
            }
            let mut counter = MatvecCounter::new();
            let w0 = krylov_block(matrix, y0, k / 2, &mut counter)?;
            block_kstep(matrix, &w0, k, tol, max_outer, &mut counter)?
        }
        ("block", _) => bail!("the block solver does not take an extrapolation strategy"),
        ("kstep", StrategyToken::Gamma(strategy)) => {
            let mut cfg = SolveConfig::new(k, strategy);
            cfg.tol = tol;
            cfg.max_outer = max_outer;
            cfg.start = Some(y0.to_vec());
            cfg.explicit_residual = explicit_residual;
            extrapolated_kstep(matrix, &cfg)?
        }
        (other, _) => bail!("unknown solver `{other}` (use kstep, power, or block)"),
    };
    Ok(report)
}

/// Initial block for the block solver: a Krylov chain seeded at `y0`.
fn krylov_block(
    matrix: &SparseMatrixF64,
    y0: &[f64],
    b: usize,
    counter: &mut MatvecCounter,
) -> Result<Vec<Vec<f64>>> {
    let mut cols = vec![kstep::vecops::normalize(y0)?];
    for j in 1..b {
        let next = matrix.matvec(&cols[j - 1], counter)?;
        cols.push(kstep::vecops::normalize(&next)?);
    }
    Ok(cols)
}

fn f17(x: f64) -> String {
    format!("{:.16e}", x)
}

fn render_csv(report: &SolveReport<f64>) -> String {
    let mut out = String::from("iter,matvecs,lambda1,lambda2,gamma,residual\n");
    for row in &report.trace {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            row.iteration,
            row.matvecs,
            f17(row.lambda1),
            f17(row.lambda2),
            f17(row.gamma),
            f17(row.residual)
        );
    }
    out
}

fn summary_line(report: &SolveReport<f64>) -> String {
    format!(
        "converged={} iters={} matvecs={} lambda1={:.6}",
        report.converged, report.outer_iterations, report.matvecs, report.lambda1
    )
}

fn cmd_run(args: &RunArgs) -> Result<ExitCode> {
    let loaded = load_sources(&args.source)?;
    if loaded.len() != 1 {
        bail!("run takes exactly one matrix source");
    }
    let strategy = StrategyToken::parse(&args.gamma)?;
    let y0 = build_y0(&args.y0, loaded[0].matrix.n())?;
    let report = run_cell(
        &loaded[0].matrix,
        &args.solver,
        strategy,
        args.k,
        args.tol,
        args.max_outer,
        &y0,
        args.explicit_residual,
    )?;
    print!("{}", render_csv(&report));
    eprintln!("{}", summary_line(&report));
    Ok(if report.converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn cmd_table(args: &TableArgs) -> Result<ExitCode> {
    let loaded = load_sources(&args.source)?;
    let strategies = if args.gamma.is_empty() {
        default_table_strategies()
    } else {
        args.gamma
            .iter()
            .map(|s| StrategyToken::parse(s))
            .collect::<Result<Vec<_>>>()?
    };
    if strategies.is_empty() {
        bail!("empty strategy list");
    }

    let headers: Vec<String> = strategies.iter().map(|s| s.label()).collect();
    let mut rows: Vec<Vec<String>> = Vec::new();
    for lm in &loaded {
        let y0 = build_y0(&args.y0, lm.matrix.n())?;
        let mut row = vec![lm.label.clone()];
        for strategy in &strategies {
            let solver = match strategy {
                StrategyToken::Power => "power",
                _ => "kstep",
            };
            let report = run_cell(
                &lm.matrix,
                solver,
                *strategy,
                args.k,
                args.tol,
                args.max_outer,
                &y0,
                false,
            )?;
            row.push(if report.converged {
                report.outer_iterations.to_string()
            } else {
                format!(">{}", args.max_outer)
            });
        }
        rows.push(row);
    }

    let mut widths: Vec<usize> = Vec::new();
    let header_row: Vec<String> = std::iter::once("matrix".to_string())
        .chain(headers)
        .collect();
    for (i, h) in header_row.iter().enumerate() {
        let mut w = h.len();
        for row in &rows {
            w = w.max(row[i].len());
        }
        widths.push(w);
    }
    let print_row = |cells: &[String]| {
        let line: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if i == 0 {
                    format!("{:<width$}", c, width = widths[i])
                } else {
                    format!("{:>width$}", c, width = widths[i])
                }
            })
            .collect();
        println!("{}", line.join("  "));
    };
    print_row(&header_row);
    for row in &rows {
        print_row(row);
    }
    Ok(ExitCode::SUCCESS)
}

struct BenchCell {
    file: String,
    matrix: String,
    k: usize,
    strategy: StrategyToken,
    outcome: Result<SolveReport<f64>>,
}

fn cmd_bench(args: &BenchArgs) -> Result<ExitCode> {
    let loaded = load_sources(&args.source)?;
    let strategies = args
        .gamma
        .iter()
        .map(|s| StrategyToken::parse(s))
        .collect::<Result<Vec<_>>>()?;
    if strategies.is_empty() || args.k.is_empty() {
        bail!("bench needs at least one k and one strategy");
    }
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;

    let mut cells: Vec<BenchCell> = Vec::new();
    for lm in &loaded {
        let y0 = build_y0(&args.y0, lm.matrix.n())?;
        // independent cells over one shared immutable matrix
        let outcomes: Vec<BenchCell> = std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for &k in &args.k {
                for &strategy in &strategies {
                    let matrix = &lm.matrix;
                    let y0 = &y0;
                    let label = lm.label.clone();
                    handles.push(scope.spawn(move || {
                        let solver = match strategy {
                            StrategyToken::Power => "power",
                            _ => "kstep",
                        };
                        let outcome = run_cell(
                            matrix,
                            solver,
                            strategy,
                            k,
                            args.tol,
                            args.max_outer,
                            y0,
                            false,
                        );
                        BenchCell {
                            file: format!("{label}_k{k}_{}.csv", strategy.file_slug()),
                            matrix: label,
                            k,
                            strategy,
                            outcome,
                        }
                    }));
                }
            }
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        cells.extend(outcomes);
    }

    let mut manifest =
        String::from("file,matrix,k,strategy,status,converged,iterations,matvecs,lambda1\n");
    let mut any_ok = false;
    for cell in &cells {
        match &cell.outcome {
            Ok(report) => {
                any_ok = true;
                let path = args.out.join(&cell.file);
                std::fs::write(&path, render_csv(report))
                    .with_context(|| format!("writing {}", path.display()))?;
                let _ = writeln!(
                    manifest,
                    "{},{},{},{},ok,{},{},{},{}",
                    cell.file,
                    cell.matrix,
                    cell.k,
                    cell.strategy.label(),
                    report.converged,
                    report.outer_iterations,
                    report.matvecs,
                    f17(report.lambda1)
                );
            }
            Err(err) => {
                let msg = err.to_string().replace(',', ";").replace('\n', " ");
                let _ = writeln!(
                    manifest,
                    "{},{},{},{},error: {},,,,",
                    cell.file,
                    cell.matrix,
                    cell.k,
                    cell.strategy.label(),
                    msg
                );
            }
        }
    }
    std::fs::write(args.out.join("manifest.csv"), manifest)?;
    eprintln!(
        "wrote {} trace file(s) and manifest.csv to {}",
        cells.iter().filter(|c| c.outcome.is_ok()).count(),
        args.out.display()
    );
    Ok(if any_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Table(args) => cmd_table(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            let _ = writeln!(std::io::stderr(), "error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
