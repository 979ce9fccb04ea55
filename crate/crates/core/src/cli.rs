//! Command-line front end for the `qsl` binary.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage or configuration error.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Number, Value};

use crate::bounds::{alpha, mt_alpha};
use crate::error::{check_delta, Error};
use crate::qsim::{verify_limits, LimitsConfig};
use crate::report::{Field, Report};
use crate::rootfind::{y_bounds, YBounds};
use crate::tangent_family::{a_of_y, q_of_y};
use crate::verify::{verify_with_bounds, VerifyConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// Distance kept from `y_plus` in the tangent table, where `q` diverges.
pub const TANGENT_EPS: f64 = 1e-3;

pub const THREADS_ENV: &str = "QSL_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "qsl",
    version,
    about = "Quantum speed limit coefficients and checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// alpha(delta) for one delta, or a (delta, alpha, mt_alpha) table.
    Alpha(AlphaArgs),
    /// Run the self-check suite.
    Verify(VerifyArgs),
    /// Monte-Carlo check of both speed limits on random states.
    Simulate(SimulateArgs),
    /// (y, q, a) table of the tangent-line family.
    Tangent(TangentArgs),
    /// alpha(delta) curve for plotting.
    Plotdata(PlotArgs),
}

#[derive(Debug, Args)]
pub struct AlphaArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Table rows over [0, 1].
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct TangentArgs {
    #[arg(long, default_value_t = 201)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long, default_value_t = 1001)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Coarse grids and a 1e-4 equality tolerance.
    #[arg(long)]
    pub quick: bool,
    /// Brute-force minimax grid size.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 8)]
    pub dmax: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Single target fidelity; default is 0, 0.1, ..., 0.9.
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Horizon in units of 2 pi / smallest gap.
    #[arg(long, default_value_t = 2.0)]
    pub horizon_mult: f64,
    /// Time-grid points per period of the fastest beat.
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    /// Quarter of the default points per period.
    #[arg(long)]
    pub quick: bool,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("cannot write output: {0}")]
    Io(#[from] io::Error),
}

struct Output {
    body: String,
    code: u8,
    note: Option<String>,
}

impl Output {
    fn ok(body: String) -> Self {
        Self {
            body,
            code: EXIT_OK,
            note: None,
        }
    }
}

/// Entry point for the binary: reads `std::env::args`, honours
/// `QSL_THREADS`, and returns the process exit code.
pub fn main_entry() -> u8 {
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return EXIT_USAGE;
    }
    run(
        std::env::args_os(),
        y_bounds(),
        &mut io::stdout(),
        &mut io::stderr(),
    )
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_ENV}={raw:?} is not a positive integer"))?;
    // A pool that already exists (tests, repeated calls) is left as is.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

/// Parses `args` and runs the command. `yb` feeds the constants check of
/// `verify`; pass [`y_bounds`] outside of tests.
pub fn run<I, T>(args: I, yb: YBounds, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match execute(&cli, yb) {
        Ok(out) => {
            if let Some(note) = &out.note {
                let _ = writeln!(stderr, "{note}");
            }
            match emit(&cli, &out.body, stdout) {
                Ok(()) => out.code,
                Err(e) => {
                    let _ = writeln!(stderr, "error: {e}");
                    EXIT_USAGE
                }
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e {
                CliError::Usage(_) | CliError::Lib(Error::Domain { .. }) | CliError::Io(_) => {
                    EXIT_USAGE
                }
                CliError::Lib(_) => EXIT_CHECK_FAILED,
            }
        }
    }
}

fn emit(cli: &Cli, body: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => fs::write(path, body)?,
        None => stdout.write_all(body.as_bytes())?,
    }
    Ok(())
}

fn execute(cli: &Cli, yb: YBounds) -> Result<Output, CliError> {
    match &cli.command {
        Command::Alpha(a) => cmd_alpha(a, cli.format),
        Command::Verify(v) => cmd_verify(v, cli.format, yb),
        Command::Simulate(s) => cmd_simulate(s, cli.format),
        Command::Tangent(g) => cmd_tangent(g.grid, cli.format),
        Command::Plotdata(g) => Ok(Output::ok(alpha_table(g.grid)?.render(cli.format))),
    }
}

fn cmd_alpha(args: &AlphaArgs, format: Format) -> Result<Output, CliError> {
    let Some(delta) = args.delta else {
        return Ok(Output::ok(alpha_table(args.grid)?.render(format)));
    };
    check_delta(delta)?;
    let a = alpha(delta)?;
    let body = match format {
        Format::Csv => format!("{a:.12}\n"),
        Format::Json => Table::new(
            &["delta", "alpha", "mt_alpha"],
            vec![vec![delta, a, mt_alpha(delta)?]],
        )
        .render(format),
    };
    Ok(Output::ok(body))
}

fn uniform_grid(n: usize, lo: f64, hi: f64) -> Result<Vec<f64>, CliError> {
    if n < 2 {
        return Err(CliError::Usage(format!(
            "--grid {n}: need at least 2 points"
        )));
    }
    // Exact endpoints; interior points by index to avoid accumulation.
    Ok((0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => lo + (hi - lo) * i as f64 / (n - 1) as f64,
        })
        .collect())
}

/// `(delta, alpha, mt_alpha)` rows on a uniform grid over `[0, 1]`.
pub fn alpha_rows(n: usize) -> crate::Result<Vec<[f64; 3]>> {
    let grid = uniform_grid(n.max(2), 0.0, 1.0).expect("n >= 2");
    grid.into_iter()
        .map(|d| Ok([d, alpha(d)?, mt_alpha(d)?]))
        .collect()
}

fn alpha_table(n: usize) -> Result<Table, CliError> {
    uniform_grid(n, 0.0, 1.0)?;
    let rows = alpha_rows(n)?.into_iter().map(Vec::from).collect();
    Ok(Table::new(&["delta", "alpha", "mt_alpha"], rows))
}

/// `(y, q, a)` rows over `[y_minus, y_plus - TANGENT_EPS]`, with `y = pi`
/// included.
pub fn tangent_rows(n: usize) -> crate::Result<Vec<[f64; 3]>> {
    let yb = y_bounds();
    let mut ys = uniform_grid(n.max(2), yb.y_minus, yb.y_plus - TANGENT_EPS).expect("n >= 2");
    if !ys.iter().any(|&y| (y - std::f64::consts::PI).abs() < 1e-12) {
        ys.push(std::f64::consts::PI);
        ys.sort_by(f64::total_cmp);
    }
    ys.into_iter()
        .map(|y| Ok([y, q_of_y(y)?, a_of_y(y)?]))
        .collect()
}

fn cmd_tangent(n: usize, format: Format) -> Result<Output, CliError> {
    uniform_grid(n, 0.0, 1.0)?;
    let rows = tangent_rows(n)?.into_iter().map(Vec::from).collect();
    Ok(Output::ok(
        Table::new(&["y", "q", "a"], rows).render(format),
    ))
}

fn cmd_verify(args: &VerifyArgs, format: Format, yb: YBounds) -> Result<Output, CliError> {
    let mut cfg = if args.quick {
        VerifyConfig::quick()
    } else {
        VerifyConfig::default()
    };
    cfg.seed = args.seed;
    if let Some(g) = args.grid {
        if g < crate::oracle::MIN_GRID {
            return Err(CliError::Usage(format!(
                "--grid {g}: oracle grid must be >= {}",
                crate::oracle::MIN_GRID
            )));
        }
        cfg.oracle_grid = g;
    }
    let report = verify_with_bounds(&cfg, yb);
    let failed: Vec<&str> = report.failed().map(|c| c.name).collect();
    Ok(Output {
        body: render_report(&report.to_report(), format),
        code: if failed.is_empty() {
            EXIT_OK
        } else {
            EXIT_CHECK_FAILED
        },
        note: (!failed.is_empty()).then(|| format!("failed checks: {}", failed.join(", "))),
    })
}

fn cmd_simulate(args: &SimulateArgs, format: Format) -> Result<Output, CliError> {
    if args.dmax < 2 {
        return Err(CliError::Usage(format!(
            "--dmax {}: need at least 2",
            args.dmax
        )));
    }
    if !(args.horizon_mult > 0.0 && args.horizon_mult.is_finite()) {
        return Err(CliError::Usage(format!(
            "--horizon-mult {}: must be positive",
            args.horizon_mult
        )));
    }
    let per_period = if args.quick {
        (args.grid / 4).max(4)
    } else {
        args.grid
    };
    if per_period < 4 {
        return Err(CliError::Usage(format!(
            "--grid {}: need at least 4 points per period",
            args.grid
        )));
    }
    let defaults = LimitsConfig::default();
    let deltas = match args.delta {
        Some(d) => {
            check_delta(d)?;
            vec![d]
        }
        None => defaults.deltas.clone(),
    };
    let cfg = LimitsConfig {
        trials: args.trials,
        d_max: args.dmax,
        deltas,
        seed: args.seed,
        horizon_mult: args.horizon_mult,
        points_per_period: per_period,
        // Designed saturating states accompany a non-empty random run.
        saturating_cases: args.trials > 0,
        ..defaults
    };
    let report = verify_limits(&cfg)?;
    let violations = report.total_violations();
    Ok(Output {
        body: render_report(&report.to_report(), format),
        code: if violations == 0 {
            EXIT_OK
        } else {
            EXIT_CHECK_FAILED
        },
        note: (violations > 0).then(|| format!("{violations} speed-limit violations")),
    })
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros
/// trimmed, scientific notation outside `[1e-5, 1e12)`.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// JSON value parsed from the CSV rendering, so both formats carry the
/// same numbers. Non-finite values become `null`.
fn json_number(x: f64) -> Value {
    format_sig12(x)
        .parse::<f64>()
        .ok()
        .and_then(Number::from_f64)
        .map_or(Value::Null, Value::Number)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Numeric table rendered as CSV or as a JSON array of flat objects.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(headers: &[&str], rows: Vec<Vec<f64>>) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.headers.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_sig12(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .headers
                        .iter()
                        .zip(row)
                        .map(|(h, &x)| (h.clone(), json_number(x)))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => format!("{}\n", self.to_json()),
        }
    }
}

/// Reports render as `key,value` CSV or a flat JSON object.
pub fn render_report(report: &Report, format: Format) -> String {
    match format {
        Format::Csv => {
            let mut out = String::from("key,value\n");
            for (k, v) in report.entries() {
                let value = match v {
                    Field::Real(x) => format_sig12(*x),
                    other => other.to_string(),
                };
                out.push_str(&format!("{},{}\n", csv_field(k), csv_field(&value)));
            }
            out
        }
        Format::Json => {
            let obj: Map<String, Value> = report
                .entries()
                .iter()
                .map(|(k, v)| {
                    let value = match v {
                        Field::Real(x) => json_number(*x),
                        other => Value::from(other),
                    };
                    (k.clone(), value)
                })
                .collect();
            format!("{}\n", Value::Object(obj))
        }
    }
}
