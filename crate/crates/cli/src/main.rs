//! `hyperharm` — evaluate, tabulate and verify K-invariant spherical harmonics.

use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use hyperharm::spherical::{k_average, legendre_p};
use hyperharm::verify::{run_suite, Fault, Suite, VerifyOptions, VerifyReport};
use hyperharm::{Degree, Error, Evaluation, QuadratureConfig};

const EXIT_OK: u8 = 0;
const EXIT_CHECKS_FAILED: u8 = 1;
const EXIT_NO_CONVERGENCE: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DOMAIN: u8 = 65;

#[derive(Parser, Debug)]
#[command(name = "hyperharm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the K-average P_ρ(x) at a single point.
    Eval {
        #[command(flatten)]
        func: FuncArgs,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Tabulate P_ρ on an evenly spaced grid.
    Table {
        #[command(flatten)]
        func: FuncArgs,
        #[arg(long, allow_negative_numbers = true)]
        x_start: f64,
        #[arg(long, allow_negative_numbers = true)]
        x_stop: f64,
        #[arg(long)]
        count: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run a seeded verification suite.
    Verify {
        /// lemma1 | harmonicity | eigenvalue | ode | oracle | symmetry | all
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
}

#[derive(Args, Debug)]
struct FuncArgs {
    /// Degree, e.g. `2`, `0.5+1i`, `-1.5-0.25i`.
    #[arg(long, allow_hyphen_values = true)]
    rho: String,
    /// Dimension of the sphere factor; n = q + 1.
    #[arg(long, default_value_t = 2)]
    q: usize,
    /// Initial quadrature nodes.
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    rel_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

/// A failure that maps onto a process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: exit_code_of(&e),
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self {
            code: 74,
            message: e.to_string(),
        }
    }
}

fn exit_code_of(e: &Error) -> u8 {
    match e {
        Error::Domain(_) => EXIT_DOMAIN,
        Error::Convergence { .. } => EXIT_NO_CONVERGENCE,
        Error::Contract(_) | Error::SignatureMismatch(..) => EXIT_USAGE,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Status {
    Ok,
    NoConvergence,
    Domain,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::NoConvergence => "no-convergence",
            Status::Domain => "domain",
        }
    }

    fn exit_code(self) -> u8 {
        match self {
            Status::Ok => EXIT_OK,
            Status::NoConvergence => EXIT_NO_CONVERGENCE,
            Status::Domain => EXIT_DOMAIN,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct Row {
    x: f64,
    re: Option<f64>,
    im: Option<f64>,
    err_est: Option<f64>,
    nodes: Option<usize>,
    status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
struct FuncParams {
    command: &'static str,
    rho: Degree,
    q: usize,
    x_start: f64,
    x_stop: f64,
    count: usize,
    quadrature: QuadratureConfig,
}

#[derive(Debug, Clone, Serialize)]
struct RowSummary {
    total: usize,
    ok: usize,
    failed: usize,
}

#[derive(Debug, Clone, Serialize)]
struct TableReport<'a> {
    params: FuncParams,
    rows: &'a [Row],
    summary: RowSummary,
}

struct Func {
    rho: Degree,
    q: usize,
    cfg: QuadratureConfig,
}

impl Func {
    fn from_args(a: &FuncArgs) -> Result<Self, Failure> {
        let rho: Degree = a
            .rho
            .parse()
            .map_err(|e: Error| Failure::usage(e.to_string()))?;
        let mut cfg = QuadratureConfig::default();
        if let Some(n) = a.nodes {
            cfg.initial_nodes = n;
        }
        if let Some(t) = a.rel_tol {
            cfg.rel_tol = t;
        }
        cfg.validate().map_err(|e| Failure::usage(e.to_string()))?;
        if a.q < 2 {
            return Err(Failure {
                code: EXIT_DOMAIN,
                message: format!("q = {} is below 2", a.q),
            });
        }
        Ok(Self { rho, q: a.q, cfg })
    }

    /// q = 2 uses Laplace's integral; higher q the weighted K-average.
    fn eval(&self, x: f64) -> Result<Evaluation, Error> {
        if self.q == 2 {
            legendre_p(self.rho, x, &self.cfg)
        } else {
            k_average(self.rho, self.q, x, &self.cfg)
        }
    }

    fn row(&self, x: f64) -> Row {
        let (ev, status, message) = match self.eval(x) {
            Ok(ev) => (Some(ev), Status::Ok, None),
            Err(Error::Convergence { message, best }) => {
                (Some(best), Status::NoConvergence, Some(message))
            }
            Err(e) => {
                let status = if e.is_domain() {
                    Status::Domain
                } else {
                    Status::NoConvergence
                };
                (None, status, Some(e.to_string()))
            }
        };
        Row {
            x,
            re: ev.map(|e| e.value.re),
            im: ev.map(|e| e.value.im),
            err_est: ev.map(|e| e.err_est),
            nodes: ev.map(|e| e.nodes),
            status,
            message,
        }
    }

    fn params(&self, command: &'static str, x_start: f64, x_stop: f64, count: usize) -> FuncParams {
        FuncParams {
            command,
            rho: self.rho,
            q: self.q,
            x_start,
            x_stop,
            count,
            quadrature: self.cfg,
        }
    }
}

/// `count` evenly spaced points; the endpoints are exact.
fn grid(start: f64, stop: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    let last = (count - 1) as f64;
    (0..count)
        .map(|i| {
            if i == count - 1 {
                stop
            } else {
                start + (stop - start) * (i as f64 / last)
            }
        })
        .collect()
}

fn fmt_num(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

fn write_csv(out: impl Write, rows: &[Row]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| Failure {
        code: 74,
        message: e.to_string(),
    };
    w.write_record(["x", "re", "im", "err_est", "nodes", "status"])
        .map_err(io_err)?;
    for r in rows {
        w.write_record([
            format!("{:.16e}", r.x),
            fmt_num(r.re),
            fmt_num(r.im),
            fmt_num(r.err_est),
            r.nodes.map(|n| n.to_string()).unwrap_or_default(),
            r.status.as_str().to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

fn summarize(rows: &[Row]) -> RowSummary {
    let ok = rows.iter().filter(|r| r.status == Status::Ok).count();
    RowSummary {
        total: rows.len(),
        ok,
        failed: rows.len() - ok,
    }
}

fn emit_rows(params: FuncParams, rows: &[Row], format: Format) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    match format {
        Format::Csv => write_csv(&mut out, rows)?,
        Format::Json => {
            let report = TableReport {
                params,
                rows,
                summary: summarize(rows),
            };
            serde_json::to_writer_pretty(&mut out, &report).map_err(io::Error::from)?;
            writeln!(out)?;
        }
        Format::Text => {
            for r in rows {
                if let (Some(re), Some(im)) = (r.re, r.im) {
                    writeln!(out, "value   = {re:.16e} {im:+.16e}i")?;
                    writeln!(out, "err_est = {}", fmt_num(r.err_est))?;
                    writeln!(out, "nodes   = {}", r.nodes.unwrap_or(0))?;
                }
                if let Some(m) = &r.message {
                    writeln!(out, "status  = {} ({m})", r.status.as_str())?;
                }
            }
        }
    }
    Ok(())
}

fn worst_exit(rows: &[Row]) -> u8 {
    rows.iter()
        .map(|r| r.status.exit_code())
        .max()
        .unwrap_or(EXIT_OK)
}

fn cmd_eval(func: &FuncArgs, x: f64, format: Format) -> Result<u8, Failure> {
    let f = Func::from_args(func)?;
    let row = f.row(x);
    if row.status == Status::Domain {
        return Err(Failure {
            code: EXIT_DOMAIN,
            message: row.message.unwrap_or_default(),
        });
    }
    if let Some(m) = &row.message {
        eprintln!("hyperharm: {m}");
    }
    let rows = [row];
    emit_rows(f.params("eval", x, x, 1), &rows, format)?;
    Ok(worst_exit(&rows))
}

fn cmd_table(
    func: &FuncArgs,
    start: f64,
    stop: f64,
    count: usize,
    format: Format,
) -> Result<u8, Failure> {
    if count == 0 {
        return Err(Failure::usage("--count must be at least 1"));
    }
    if !(start.is_finite() && stop.is_finite()) || stop < start {
        return Err(Failure::usage(format!(
            "invalid range [{start}, {stop}]: need finite x-start ≤ x-stop"
        )));
    }
    let f = Func::from_args(func)?;
    if start < 1.0 {
        return Err(Failure {
            code: EXIT_DOMAIN,
            message: format!("x-start = {start} is below 1"),
        });
    }
    let rows: Vec<Row> = grid(start, stop, count)
        .into_par_iter()
        .map(|x| f.row(x))
        .collect();
    emit_rows(f.params("table", start, stop, count), &rows, format)?;
    Ok(worst_exit(&rows))
}

fn write_report(report: &VerifyReport, format: Format) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, report).map_err(io::Error::from)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            let to_io = |e: csv::Error| Failure {
                code: 74,
                message: e.to_string(),
            };
            w.write_record(["name", "residual", "bound", "pass"])
                .map_err(to_io)?;
            for c in &report.checks {
                w.write_record([
                    c.name.clone(),
                    fmt_num(c.residual),
                    format!("{:.16e}", c.bound),
                    c.pass.to_string(),
                ])
                .map_err(to_io)?;
            }
            w.flush()?;
        }
        Format::Text => {
            for c in &report.checks {
                let verdict = if c.pass { "pass" } else { "FAIL" };
                let residual = c
                    .residual
                    .map(|r| format!("{r:.3e}"))
                    .unwrap_or_else(|| "n/a".into());
                write!(
                    out,
                    "{verdict}  {:<40} {residual:>10} <= {:.3e}",
                    c.name, c.bound
                )?;
                match &c.error {
                    Some(e) => writeln!(out, "  ({e})")?,
                    None => writeln!(out)?,
                }
            }
            let s = report.summary;
            writeln!(
                out,
                "suite {} seed {}: {}/{} passed, {} failed",
                report.params.suite, report.params.seed, s.passed, s.total, s.failed
            )?;
        }
    }
    Ok(())
}

fn cmd_verify(suite: &str, seed: u64, format: Format, fault: Option<&str>) -> Result<u8, Failure> {
    let suite: Suite = suite
        .parse()
        .map_err(|e: Error| Failure::usage(e.to_string()))?;
    let mut opts = VerifyOptions::new(seed);
    if let Some(f) = fault {
        opts.fault = Some(
            f.parse::<Fault>()
                .map_err(|e| Failure::usage(e.to_string()))?,
        );
    }
    let report = run_suite(suite, &opts);
    write_report(&report, format)?;
    Ok(if report.all_passed() {
        EXIT_OK
    } else {
        EXIT_CHECKS_FAILED
    })
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Eval { func, x, format } => cmd_eval(func, *x, *format),
        Command::Table {
            func,
            x_start,
            x_stop,
            count,
            format,
        } => cmd_table(func, *x_start, *x_stop, *count, *format),
        Command::Verify {
            suite,
            seed,
            format,
            inject_fault,
        } => cmd_verify(suite, *seed, *format, inject_fault.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("hyperharm: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
