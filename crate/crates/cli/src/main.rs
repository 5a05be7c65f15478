mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Context, Sweep};
use report::{CliError, Format, Report};

/// Frames in Hilbert C*-modules over finite-dimensional C*-algebras.
#[derive(Parser)]
#[command(name = "modframe", version)]
struct Cli {
    /// Numerical tolerance.
    #[arg(long, global = true, env = "MODFRAME_TOL", default_value_t = 1e-9, value_parser = positive, allow_hyphen_values = true)]
    tol: f64,
    /// Seed for random probes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Frame bounds, tightness and support of a modular frame.
    Analyze { frame: PathBuf },
    /// Canonical dual frame and reconstruction check.
    Dual {
        frame: PathBuf,
        #[arg(long, default_value_t = 16)]
        probes: usize,
    },
    /// Closest normalized tight frame and closest tight multiple of a Hilbert space frame.
    Tighten {
        frame: PathBuf,
        /// Sample the distance to lambda times the normalized tight frame on [sqrt C, sqrt D].
        #[arg(long, default_value_t = 0)]
        scan_points: usize,
    },
    /// Quadratic closeness and nearness of two Hilbert space frames.
    Distance { x: PathBuf, y: PathBuf },
    /// Tight frames minimizing c(y,x), c(x,y) and d(x,y).
    Balan { frame: PathBuf },
    /// Gram invariant of the normalized tight inner product, optionally compared with a second frame.
    Invariant {
        frame: PathBuf,
        other: Option<PathBuf>,
        /// Search reorderings of the second frame.
        #[arg(long)]
        permute: bool,
    },
    /// Riesz basis test, reconstruction, and similarity against another frame.
    Modcheck {
        frame: PathBuf,
        #[arg(long)]
        against: Option<PathBuf>,
        #[arg(long, default_value_t = 16)]
        probes: usize,
    },
    /// Resolution of the identity in a matrix algebra.
    Resolution {
        input: PathBuf,
        #[arg(long, default_value_t = 16)]
        probes: usize,
    },
    /// Non-uniqueness of the closest tight frame in operator norm.
    #[command(name = "example56", alias = "diagonal-example")]
    DiagonalExample {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        phi: f64,
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// Number of phi values for a CSV curve.
        #[arg(long)]
        sweep: Option<usize>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, default_value_t = std::f64::consts::PI, allow_hyphen_values = true)]
        to: f64,
    },
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("tolerance must be positive, got {v}"))
    }
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    let ctx = Context {
        tol: cli.tol,
        seed: cli.seed,
    };
    match &cli.command {
        Command::Analyze { frame } => commands::analyze(frame, &ctx),
        Command::Dual { frame, probes } => commands::dual(frame, *probes, &ctx),
        Command::Tighten { frame, scan_points } => commands::tighten(frame, *scan_points, &ctx),
        Command::Distance { x, y } => commands::distance(x, y, &ctx),
        Command::Balan { frame } => commands::balan(frame, &ctx),
        Command::Invariant {
            frame,
            other,
            permute,
        } => commands::invariant(frame, other.as_deref(), *permute, &ctx),
        Command::Modcheck {
            frame,
            against,
            probes,
        } => commands::modcheck(frame, against.as_deref(), *probes, &ctx),
        Command::Resolution { input, probes } => commands::resolution(input, *probes, &ctx),
        Command::DiagonalExample {
            phi,
            n,
            sweep,
            from,
            to,
        } => {
            let sweep = sweep.map(|points| Sweep {
                points,
                from: *from,
                to: *to,
            });
            commands::diagonal_example(*phi, *n, sweep, &ctx)
        }
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = run(&cli).and_then(|rep| {
        emit(&cli, &rep.render(cli.format))?;
        match rep.failure {
            Some(message) => Err(CliError::Verification {
                kind: rep.command,
                message,
            }),
            None => Ok(()),
        }
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
