//! Command-line front end: `analyze`, `solve`, `bench` and `dsurface`.
//!
//! Every file written starts with a `#` line recording the tool version and
//! the effective flags (output directory excluded, so identical runs into
//! different directories produce identical bytes). Floats are printed with
//! 17 significant digits. Files are written to a temporary name and renamed
//! into place.
//!
//! Exit codes: 0 success, 2 usage error, 3 input or parse error, 4 numerical
//! precondition (rank deficiency, degenerate rows).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{d_surface, DPoint, RateFactors};
use crate::error::Error;
use crate::experiments::{run_comparison, AggregateTrace, ExperimentConfig};
use crate::matrix::{standardize, DenseMatrix};
use crate::solvers::{solve, Method, SolveOptions, SolveTrace, StoppingRule};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidConfig(_) => CliError::Usage(msg),
            Error::DimensionMismatch(_)
            | Error::NonFinite { .. }
            | Error::TooFewRows { .. }
            | Error::Underdetermined { .. }
            | Error::IndexOutOfRange { .. }
            | Error::TooLarge { .. } => CliError::Input(msg),
            Error::ZeroRow(_)
            | Error::RankDeficient { .. }
            | Error::DegeneratePair { .. }
            | Error::NoUsablePair
            | Error::InvalidR(_)
            | Error::InvalidCoherence { .. }
            | Error::DegenerateMu(_)
            | Error::DegenerateDelta(_)
            | Error::InvalidEta(_) => CliError::Numerical(msg),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "tsrk",
    version,
    about = "Randomized and two-subspace Kaczmarz solvers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report coherence, condition numbers and predicted rates of a matrix.
    Analyze(AnalyzeArgs),
    /// Solve a system read from CSV.
    Solve(SolveArgs),
    /// Compare solvers on random systems with entries uniform on [c, 1].
    Bench(BenchArgs),
    /// Tabulate the coherence gain D over a (delta, Delta) grid.
    Dsurface(DsurfaceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Cyclic,
    Rk,
    TwoSubspace,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Cyclic => Method::Cyclic,
            MethodArg::Rk => Method::Randomized,
            MethodArg::TwoSubspace => Method::TwoSubspace,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

impl Toggle {
    fn is_on(self) -> bool {
        self == Toggle::On
    }

    fn name(self) -> &'static str {
        match self {
            Toggle::On => "on",
            Toggle::Off => "off",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    #[value(name = "csv+svg")]
    CsvSvg,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Header-free CSV matrix, one row per line.
    pub matrix: PathBuf,
    /// The last column of MATRIX is the right-hand side; it is ignored.
    #[arg(long)]
    pub augmented: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Header-free CSV matrix, one row per line.
    pub matrix: PathBuf,
    /// One-column CSV right-hand side (omit with --augmented).
    pub rhs: Option<PathBuf>,
    /// Read the right-hand side from the last column of MATRIX.
    #[arg(long)]
    pub augmented: bool,
    #[arg(long, value_enum, default_value = "two-subspace")]
    pub method: MethodArg,
    #[arg(long, default_value_t = 1000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "off")]
    pub sign_adjust: Toggle,
    /// Stop once ||Ax - b|| falls to this value.
    #[arg(long)]
    pub residual_threshold: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 500)]
    pub m: usize,
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    /// Lower end of the entry interval [c, 1].
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub c: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise_norm: f64,
    /// Iterations per method.
    #[arg(long, default_value_t = 1000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Repeat to compare several methods (default: rk and two-subspace).
    #[arg(long, value_enum)]
    pub method: Vec<MethodArg>,
    #[arg(long, value_enum, default_value = "off")]
    pub sign_adjust: Toggle,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DsurfaceArgs {
    #[arg(long, default_value_t = 0.01)]
    pub grid_step: f64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Parses `args` (including the program name), runs the subcommand and maps
/// the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(command: &Command) -> CliResult<()> {
    match command {
        Command::Analyze(a) => cmd_analyze(a).map(|report| print!("{}", report.to_text())),
        Command::Solve(a) => cmd_solve(a).map(|trace| {
            let last = trace.final_record();
            println!(
                "{} iterations of {}, residual {:e}",
                trace.iterations(),
                trace.method,
                last.residual
            );
        }),
        Command::Bench(a) => cmd_bench(a).map(|agg| {
            for m in &agg.methods {
                let last = m.points.last().unwrap();
                println!(
                    "{:>13}: mean error {:e} after {} row touches",
                    m.method.name(),
                    last.mean,
                    last.row_touches
                );
            }
        }),
        Command::Dsurface(a) => cmd_dsurface(a).map(|_| ()),
    }
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn header(parts: &[String]) -> String {
    format!("# tsrk {VERSION} {}\n", parts.join(" "))
}

fn write_atomic(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    let io_err =
        |e: std::io::Error| CliError::Input(format!("cannot write {}: {e}", target.display()));
    {
        let mut f = fs::File::create(&tmp).map_err(io_err)?;
        f.write_all(contents.as_bytes()).map_err(io_err)?;
        f.sync_all().map_err(io_err)?;
    }
    fs::rename(&tmp, &target).map_err(io_err)?;
    Ok(target)
}

/// Reads a header-free CSV of floats. Lines starting with `#` are skipped.
pub fn read_csv_matrix(path: &Path) -> CliResult<DenseMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .iter()
            .enumerate()
            .map(|(col, cell)| {
                cell.parse::<f64>().map_err(|_| {
                    CliError::Input(format!(
                        "{}: line {line}, column {}: cannot parse '{cell}' as a number",
                        path.display(),
                        col + 1
                    ))
                })
            })
            .collect::<CliResult<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(CliError::Input(format!(
                    "{}: line {line} has {} columns, expected {}",
                    path.display(),
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Input(format!("{}: no data rows", path.display())));
    }
    DenseMatrix::from_rows(&rows).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn split_augmented(m: &DenseMatrix) -> CliResult<(DenseMatrix, Vec<f64>)> {
    let cols = m.cols();
    if cols < 2 {
        return Err(CliError::Input(
            "--augmented needs at least two columns".into(),
        ));
    }
    let mut data = Vec::with_capacity(m.rows() * (cols - 1));
    let mut b = Vec::with_capacity(m.rows());
    for row in m.row_iter() {
        data.extend_from_slice(&row[..cols - 1]);
        b.push(row[cols - 1]);
    }
    Ok((DenseMatrix::new(m.rows(), cols - 1, data)?, b))
}

fn read_rhs(path: &Path) -> CliResult<Vec<f64>> {
    let m = read_csv_matrix(path)?;
    if m.cols() != 1 {
        return Err(CliError::Input(format!(
            "{}: right-hand side must have one column, found {}",
            path.display(),
            m.cols()
        )));
    }
    Ok(m.as_slice().to_vec())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeReport {
    pub m: usize,
    pub n: usize,
    pub factors: RateFactors,
}

impl AnalyzeReport {
    fn entries(&self) -> Vec<(&'static str, f64)> {
        let f = &self.factors;
        vec![
            ("m", self.m as f64),
            ("n", self.n as f64),
            ("delta", f.delta),
            ("Delta", f.big_delta),
            ("R", f.r),
            ("Q", f.q),
            ("D", f.d),
            ("E", f.e),
            ("eta", f.eta),
            ("eta_improved", f.eta_improved),
            ("rk_rate_per_row", f.rk_rate_per_row()),
            ("two_subspace_rate_per_row", f.two_srk_rate_per_row()),
        ]
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = match k {
                "m" | "n" => writeln!(s, "{k:>26} = {}", v as usize),
                "Q" | "eta_improved" if !v.is_finite() => {
                    writeln!(s, "{k:>26} = undefined (difference matrix rank deficient)")
                }
                _ => writeln!(s, "{k:>26} = {v:.6}"),
            };
        }
        s
    }

    pub fn to_csv(&self, head: &str) -> String {
        let mut s = String::from(head);
        s.push_str("quantity,value\n");
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k},{}", fmt_f64(v));
        }
        s
    }
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> CliResult<AnalyzeReport> {
    let raw = read_csv_matrix(&args.matrix)?;
    let a = if args.augmented {
        split_augmented(&raw)?.0
    } else {
        raw
    };
    let sys = standardize(&a, &vec![0.0; a.rows()])?;
    let report = AnalyzeReport {
        m: sys.rows(),
        n: sys.cols(),
        factors: RateFactors::measure(&sys)?,
    };
    let mut flags = vec!["analyze".to_string(), args.matrix.display().to_string()];
    if args.augmented {
        flags.push("--augmented".into());
    }
    write_atomic(&args.out, "analysis.csv", &report.to_csv(&header(&flags)))?;
    Ok(report)
}

pub fn trace_csv(head: &str, trace: &SolveTrace) -> String {
    let mut s = String::from(head);
    s.push_str("k,row_touches,error,residual\n");
    for r in &trace.records {
        let err = r.error.map(fmt_f64).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{}",
            r.k,
            r.row_touches,
            err,
            fmt_f64(r.residual)
        );
    }
    s
}

pub fn cmd_solve(args: &SolveArgs) -> CliResult<SolveTrace> {
    let raw = read_csv_matrix(&args.matrix)?;
    let (a, b) = match (&args.rhs, args.augmented) {
        (Some(_), true) => {
            return Err(CliError::Usage(
                "give either a right-hand side file or --augmented, not both".into(),
            ))
        }
        (None, false) => {
            return Err(CliError::Usage(
                "a right-hand side file or --augmented is required".into(),
            ))
        }
        (Some(path), false) => (raw, read_rhs(path)?),
        (None, true) => split_augmented(&raw)?,
    };
    if let Some(t) = args.residual_threshold {
        if !(t >= 0.0) {
            return Err(CliError::Usage(format!(
                "--residual-threshold must be >= 0, got {t}"
            )));
        }
    }
    let sys = standardize(&a, &b)?;
    let method: Method = args.method.into();
    let opts = SolveOptions {
        method,
        stop: StoppingRule {
            max_iterations: args.iterations,
            residual_threshold: args.residual_threshold,
        },
        seed: args.seed,
        sign_adjust: args.sign_adjust.is_on(),
        x0: None,
        x_true: None,
    };
    let trace = solve(&sys, &opts)?;

    let mut flags = vec!["solve".to_string(), args.matrix.display().to_string()];
    if let Some(p) = &args.rhs {
        flags.push(p.display().to_string());
    }
    if args.augmented {
        flags.push("--augmented".into());
    }
    flags.extend([
        format!("--method {}", method.name()),
        format!("--iterations {}", args.iterations),
        format!("--seed {}", args.seed),
        format!("--sign-adjust {}", args.sign_adjust.name()),
    ]);
    if let Some(t) = args.residual_threshold {
        flags.push(format!("--residual-threshold {t}"));
    }
    let head = header(&flags);

    let mut sol = head.clone();
    for v in &trace.solution {
        sol.push_str(&fmt_f64(*v));
        sol.push('\n');
    }
    write_atomic(&args.out, "solution.csv", &sol)?;
    write_atomic(&args.out, "trace.csv", &trace_csv(&head, &trace))?;
    Ok(trace)
}

impl BenchArgs {
    pub fn config(&self) -> ExperimentConfig {
        let methods = if self.method.is_empty() {
            vec![Method::Randomized, Method::TwoSubspace]
        } else {
            self.method.iter().map(|&m| m.into()).collect()
        };
        ExperimentConfig {
            m: self.m,
            n: self.n,
            c: self.c,
            noise_norm: self.noise_norm,
            iterations: self.iterations,
            trials: self.trials,
            seed: self.seed,
            methods,
            sign_adjust: self.sign_adjust.is_on(),
        }
    }
}

fn bench_flags(cfg: &ExperimentConfig, format: Format) -> Vec<String> {
    let mut flags = vec![
        "bench".to_string(),
        format!("--m {}", cfg.m),
        format!("--n {}", cfg.n),
        format!("--c {}", cfg.c),
        format!("--noise-norm {}", cfg.noise_norm),
        format!("--iterations {}", cfg.iterations),
        format!("--trials {}", cfg.trials),
        format!("--seed {}", cfg.seed),
    ];
    flags.extend(cfg.methods.iter().map(|m| format!("--method {}", m.name())));
    flags.push(format!(
        "--sign-adjust {}",
        if cfg.sign_adjust { "on" } else { "off" }
    ));
    flags.push(format!(
        "--format {}",
        match format {
            Format::Csv => "csv",
            Format::CsvSvg => "csv+svg",
        }
    ));
    flags
}

pub fn aggregate_csv(head: &str, agg: &AggregateTrace) -> String {
    let mut s = String::from(head);
    s.push_str("row_touches,method,mean_error,median_error,min_error,max_error\n");
    for m in &agg.methods {
        for p in &m.points {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                p.row_touches,
                m.method.name(),
                fmt_f64(p.mean),
                fmt_f64(p.median),
                fmt_f64(p.min),
                fmt_f64(p.max)
            );
        }
    }
    s
}

pub fn metadata_csv(head: &str, agg: &AggregateTrace) -> String {
    let mut s = String::from(head);
    s.push_str("trial,seed,delta,Delta,R,D,eta,w_inf,err0\n");
    for t in &agg.trials {
        let f = &t.factors;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            t.trial,
            t.seed,
            fmt_f64(f.delta),
            fmt_f64(f.big_delta),
            fmt_f64(f.r),
            fmt_f64(f.d),
            fmt_f64(f.eta),
            fmt_f64(t.w_inf),
            fmt_f64(t.err0)
        );
    }
    s
}

pub fn cmd_bench(args: &BenchArgs) -> CliResult<AggregateTrace> {
    let cfg = args.config();
    cfg.validate()?;
    let agg = run_comparison(&cfg)?;
    let head = header(&bench_flags(&agg.config, args.format));
    write_atomic(&args.out, "aggregate.csv", &aggregate_csv(&head, &agg))?;
    write_atomic(&args.out, "metadata.csv", &metadata_csv(&head, &agg))?;
    let traces_dir = args.out.join("traces");
    for t in &agg.trials {
        for tr in &t.traces {
            let name = format!("trial-{:04}-{}.csv", t.trial, tr.method.name());
            write_atomic(&traces_dir, &name, &trace_csv(&head, tr))?;
        }
    }
    if args.format == Format::CsvSvg {
        let svg = crate::cli::svg::log_linear_plot(&agg, &head);
        write_atomic(&args.out, "aggregate.svg", &svg)?;
    }
    Ok(agg)
}

pub fn dsurface_csv(head: &str, points: &[DPoint]) -> String {
    let mut s = String::from(head);
    s.push_str("delta,Delta,D\n");
    for p in points {
        let _ = writeln!(
            s,
            "{},{},{}",
            fmt_f64(p.delta),
            fmt_f64(p.big_delta),
            fmt_f64(p.d)
        );
    }
    s
}

pub fn cmd_dsurface(args: &DsurfaceArgs) -> CliResult<Vec<DPoint>> {
    let points = d_surface(args.grid_step)?;
    let head = header(&["dsurface".into(), format!("--grid-step {}", args.grid_step)]);
    write_atomic(&args.out, "dsurface.csv", &dsurface_csv(&head, &points))?;
    Ok(points)
}

pub mod svg {
    //! Minimal hand-written log-linear line plot.

    use std::fmt::Write as _;

    use crate::experiments::AggregateTrace;

    const W: f64 = 720.0;
    const H: f64 = 480.0;
    const LEFT: f64 = 80.0;
    const RIGHT: f64 = 20.0;
    const TOP: f64 = 30.0;
    const BOTTOM: f64 = 60.0;
    const COLORS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];

    /// Mean error against row touches, one polyline per method, on a log10
    /// vertical axis.
    pub fn log_linear_plot(agg: &AggregateTrace, comment: &str) -> String {
        let positive = agg
            .methods
            .iter()
            .flat_map(|m| m.points.iter().map(|p| p.mean))
            .filter(|v| *v > 0.0 && v.is_finite());
        let (lo, hi) = positive.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        let (lo, hi) = if lo.is_finite() {
            (lo, hi)
        } else {
            (1e-16, 1.0)
        };
        let ylo = lo.log10().floor();
        let yhi = hi.log10().ceil().max(ylo + 1.0);
        let xmax = agg
            .methods
            .iter()
            .filter_map(|m| m.points.last().map(|p| p.row_touches))
            .max()
            .unwrap_or(1)
            .max(1) as f64;

        let px = |x: f64| LEFT + x / xmax * (W - LEFT - RIGHT);
        let py = |v: f64| {
            let l = v.max(lo).log10();
            TOP + (yhi - l) / (yhi - ylo) * (H - TOP - BOTTOM)
        };

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
        );
        let _ = writeln!(
            s,
            "<!-- {} -->",
            comment.trim_start_matches('#').trim().replace("--", "- -")
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
        let _ = writeln!(
            s,
            r#"<path d="M{x0} {y0} L{x0} {y1} L{x1} {y1}" stroke="black" fill="none"/>"#
        );
        let mut e = ylo as i32;
        while e as f64 <= yhi {
            let y = TOP + (yhi - e as f64) / (yhi - ylo) * (H - TOP - BOTTOM);
            let _ = writeln!(
                s,
                r##"<line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#dddddd"/><text x="{tx}" y="{ty:.2}" font-size="12" text-anchor="end">1e{e}</text>"##,
                tx = x0 - 6.0,
                ty = y + 4.0
            );
            e += 1;
        }
        for i in 0..=4 {
            let xv = xmax * i as f64 / 4.0;
            let x = px(xv);
            let _ = writeln!(
                s,
                r#"<text x="{x:.2}" y="{ty}" font-size="12" text-anchor="middle">{xv:.0}</text>"#,
                ty = y1 + 18.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{cx}" y="{ty}" font-size="13" text-anchor="middle">row touches</text>"#,
            cx = (x0 + x1) / 2.0,
            ty = H - 15.0
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{cy}" font-size="13" text-anchor="middle" transform="rotate(-90 18 {cy})">mean error</text>"#,
            cy = (y0 + y1) / 2.0
        );
        for (i, m) in agg.methods.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let pts: Vec<String> = m
                .points
                .iter()
                .map(|p| format!("{:.2},{:.2}", px(p.row_touches as f64), py(p.mean)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                pts.join(" ")
            );
            let ly = TOP + 16.0 * (i as f64 + 1.0);
            let _ = writeln!(
                s,
                r#"<line x1="{a}" y1="{ly}" x2="{b}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{t}" y="{ty}" font-size="12">{}</text>"#,
                m.method.name(),
                a = x1 - 130.0,
                b = x1 - 105.0,
                t = x1 - 100.0,
                ty = ly + 4.0
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(2.0), "2.0000000000000000e0");
        for v in [0.1, 1.0 / 3.0, 6.02e23, -4.9e-324] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(
            CliError::from(Error::RankDeficient { ratio: 0.0 }).exit_code(),
            4
        );
        assert_eq!(
            CliError::from(Error::DimensionMismatch("x".into())).exit_code(),
            3
        );
        assert_eq!(
            CliError::from(Error::InvalidConfig("x".into())).exit_code(),
            2
        );
    }

    #[test]
    fn parse_rejects_unknown_flags() {
        assert!(Cli::try_parse_from(["tsrk", "bench", "--bogus", "1"]).is_err());
        assert!(Cli::try_parse_from(["tsrk", "bench", "--format", "png"]).is_err());
        let cli = Cli::try_parse_from([
            "tsrk",
            "bench",
            "--c",
            "-1",
            "--method",
            "rk",
            "--method",
            "two-subspace",
            "--format",
            "csv+svg",
            "--sign-adjust",
            "on",
        ])
        .unwrap();
        match cli.command {
            Command::Bench(b) => {
                assert_eq!(b.c, -1.0);
                assert_eq!(b.format, Format::CsvSvg);
                assert_eq!(
                    b.config().methods,
                    vec![Method::Randomized, Method::TwoSubspace]
                );
                assert!(b.config().sign_adjust);
            }
            _ => unreachable!(),
        }
    }
}
