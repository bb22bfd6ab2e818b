//! `avgreen`: evaluate, verify and tabulate averaged fundamental solutions.

mod config;
mod error;
mod eval;
mod table;
mod verify;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_grid, parse_int_grid, RunConfig};
use crate::error::{CliError, CliResult};
use crate::eval::Quantity;
use crate::verify::Suite;

#[derive(Debug, Parser)]
#[command(name = "avgreen", version, about = "Averaged fundamental solutions of the Laplacian")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a quantity on a grid and print CSV rows.
    Eval {
        /// green, kernel-k, averaged, phi-psi, theta, profile-f, laplacian,
        /// sphere-profile, sphere-limit, exp-green or upsilon
        quantity: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Run an invariant suite; exits with 1 if any check fails.
    Verify {
        /// gluing, monotonicity, i1-i2, oracle-mc, endpoints, case-3d, case-2d or all
        suite: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Write a CSV sweep of a quantity, to --output or stdout.
    Table {
        quantity: String,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Debug, Args)]
struct Opts {
    /// Dimension.
    #[arg(long)]
    n: Option<u32>,
    /// Radii: `a:b:step` or a comma list. Also the t grid for `upsilon`.
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    /// Kernel, e.g. `power:nu=0.5,p=2,eps=0`, `poly:nu=1,coeffs=1;2`,
    /// `uniform`, `sphere-limit:k=100`, `exp:alpha=2`, `file:path=w.txt,nu=1`.
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long, conflicts_with = "alphas", allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alphas: Option<String>,
    #[arg(long, default_value_t = 1)]
    j: u32,
    #[arg(long, conflicts_with = "ks")]
    k: Option<u32>,
    #[arg(long)]
    ks: Option<String>,
    /// Absolute quadrature tolerance (1e-8, or 1e-5 for theta).
    #[arg(long)]
    tol: Option<f64>,
    /// Monte-Carlo samples per check.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    output: Option<String>,
    /// Permit theta beyond α = 1000.
    #[arg(long)]
    allow_large_alpha: bool,
}

impl Opts {
    fn into_config(self, command: &str, target: &str, default_tol: f64) -> CliResult<RunConfig> {
        let tol = self.tol.unwrap_or(default_tol);
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(CliError::usage(format!("--tol must be positive, got {tol}")));
        }
        let alphas = match (self.alpha, &self.alphas) {
            (Some(a), _) => vec![a],
            (None, Some(g)) => parse_grid(g)?,
            (None, None) => Vec::new(),
        };
        let ks = match (self.k, &self.ks) {
            (Some(k), _) => vec![k],
            (None, Some(g)) => parse_int_grid(g)?,
            (None, None) => Vec::new(),
        };
        Ok(RunConfig {
            command: command.to_string(),
            target: target.to_string(),
            n: self.n,
            kernel: self.kernel,
            r: self.r.as_deref().map(parse_grid).transpose()?.unwrap_or_default(),
            s: self.s,
            t: self.t,
            alphas,
            j: self.j,
            ks,
            tol,
            samples: self.samples,
            seed: self.seed,
            allow_large_alpha: self.allow_large_alpha,
            output: self.output,
        })
    }
}

fn emit(csv: &str, output: Option<&str>) -> CliResult<()> {
    match output {
        Some(path) => std::fs::write(path, csv).map_err(|source| CliError::Io { path: path.to_string(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(csv.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io { path: "<stdout>".to_string(), source })
        }
    }
}

fn tabulate(command: &str, quantity: &str, opts: Opts) -> CliResult<ExitCode> {
    let q: Quantity = quantity.parse()?;
    let cfg = opts.into_config(command, quantity, q.default_tol())?;
    let table = eval::compute(q, &cfg)?;
    if let Some(row) = table.first_non_finite_row() {
        return Err(CliError::Core(avgreen::Error::Numerical(format!(
            "`{quantity}` produced a non-finite value in row {row}"
        ))));
    }
    emit(&table.to_csv(&cfg), cfg.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    match cli.command {
        Command::Eval { quantity, opts } => tabulate("eval", &quantity, opts),
        Command::Table { quantity, opts } => tabulate("table", &quantity, opts),
        Command::Verify { suite, opts } => {
            let s: Suite = suite.parse()?;
            let cfg = opts.into_config("verify", &suite, avgreen::averaging::DEFAULT_TOL)?;
            let report = verify::run(s, &cfg)?;
            emit(&report.table().to_csv(&cfg), cfg.output.as_deref())?;
            let failed = report.checks.iter().filter(|c| !c.passed()).count();
            eprintln!(
                "verify {suite}: {} checks, {failed} failed: {}",
                report.checks.len(),
                if report.passed() { "PASS" } else { "FAIL" }
            );
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn error_line(kind: &str, message: &str, code: u8) {
    let line = serde_json::json!({ "error": kind, "message": message, "exit_code": code });
    eprintln!("{line}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            error_line("invalid_input", e.render().to_string().trim(), 2);
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            let code = e.exit_code();
            error_line(e.kind(), &e.to_string(), code);
            ExitCode::from(code)
        }
    }
}
