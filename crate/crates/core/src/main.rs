use clap::{Parser, Subcommand, ValueEnum};
use polyharmonic::exact_constants::{constant_chain, flux_check, ConstantMode};
use polyharmonic::golden::{compare_with_golden, regenerate_table, render_table, GOLDEN_ROWS};
use polyharmonic::radial_ode::{integrate, OdeSystem, Sign};
use polyharmonic::verify::{emit_report, run_suite, write_report, ConstantSelection, Format, Suite, VerifyConfig};
use polyharmonic::Error;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(name = "polyharmonic", version, about = "Verification suites for (-Δ)^N u ± u^{-(4N-1)} = 0 in R^{2N-1}")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and emit a report.
    Run {
        #[arg(long = "n")]
        order: usize,
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 200.0)]
        rmax: f64,
        #[arg(long, default_value_t = 128)]
        precision: u32,
        #[arg(long, default_value = "auto")]
        constants: String,
        /// Comma-separated sample radii.
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
    },
    /// Print both constant chains exactly.
    Constants {
        #[arg(long = "n")]
        order: usize,
    },
    /// Integrate the radial system and print the trajectory as CSV.
    Ode {
        #[arg(long = "n")]
        order: usize,
        #[arg(long, value_enum)]
        sign: SignArg,
        /// Comma-separated `v0, v0', v1, v1', …` at the origin.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        init: Vec<f64>,
        #[arg(long, default_value_t = 50.0)]
        rmax: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate the K_N / a_N / initial-data table and compare it with the frozen one.
    Table {
        #[arg(long, default_value_t = 6)]
        max_n: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Text,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
            FormatArg::Text => Format::Text,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SignArg {
    Plus,
    Minus,
}

enum Failure {
    Usage(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Unsupported(_) => Failure::Usage(e.to_string()),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

fn emit(bytes: &[u8], out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| Failure::Internal(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout().write_all(bytes).map_err(|e| Failure::Internal(e.to_string())),
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Run { order, suite, tol, rmax, precision, constants, radii, out, format } => {
            let suite: Suite = suite.parse()?;
            let mut config = VerifyConfig::new(order);
            config.tol = tol;
            config.truncation_radius = rmax;
            config.precision = precision;
            config.constants = constants.parse::<ConstantSelection>()?;
            if let Some(r) = radii {
                config.radii = r;
            }
            config.validate()?;
            if order > VerifyConfig::ORDER_CAP {
                eprintln!("warning: N = {order} exceeds {}; quadrature suites may take a long time", VerifyConfig::ORDER_CAP);
            }
            let report = run_suite(suite, &config)?;
            match &out {
                Some(path) => write_report(&report, format.into(), path)?,
                None => emit(&emit_report(&report, format.into())?, None)?,
            }
            for c in report.failures() {
                eprintln!("FAIL {}: measured {} expected {} ({})", c.id, c.measured, c.expected, c.notes);
            }
            Ok(if report.passed() { 0 } else { EXIT_FAIL })
        }
        Command::Constants { order } => {
            let mut s = String::new();
            for mode in ConstantMode::ALL {
                let chain = constant_chain(order, mode)?;
                s.push_str(&format!("{} (flux {}):\n", mode.name(), flux_check(order, mode)?));
                for (k, c) in chain.constants().iter().enumerate() {
                    s.push_str(&format!("  c_{k} = {c}\n"));
                }
            }
            emit(s.as_bytes(), None)?;
            Ok(0)
        }
        Command::Ode { order, sign, init, rmax, tol, out } => {
            let sign = match sign {
                SignArg::Plus => Sign::PlusNegativePower,
                SignArg::Minus => Sign::MinusNegativePower,
            };
            let sys = OdeSystem::new(order, sign)?;
            let traj = integrate(&sys, &init, rmax, tol)?;
            emit(traj.to_csv()?.as_bytes(), out.as_ref())?;
            Ok(0)
        }
        Command::Table { max_n } => {
            if max_n < 2 {
                return Err(Failure::Usage("--max-n must be at least 2".into()));
            }
            let entries = regenerate_table(2..=max_n)?;
            emit(render_table(&entries).as_bytes(), None)?;
            let frozen_max = GOLDEN_ROWS.iter().map(|g| g.order).max().unwrap_or(0);
            let drift: Vec<String> = entries
                .iter()
                .filter(|e| e.order <= frozen_max)
                .flat_map(compare_with_golden)
                .collect();
            for d in &drift {
                eprintln!("drift: {d}");
            }
            Ok(if drift.is_empty() { 0 } else { EXIT_FAIL })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}
