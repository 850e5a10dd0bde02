mod commands;
mod config;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use krylov_core::{Execution, SystemKind};

use commands::Outcome;
use config::{resolve, Command, CommonArgs, ConfigError};

#[derive(Parser)]
#[command(
    name = "krylov",
    version,
    about = "Moments, Lanczos chains and Krylov complexity of solvable systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the sixteen systems and their default parameter samples.
    ListSystems {
        #[arg(long, value_enum, default_value_t = config::Format::Csv)]
        format: config::Format,
    },
    /// Closed-form moment table.
    Moments(CommonArgs),
    /// Lanczos coefficients, chain stop and Hankel check.
    Lanczos(CommonArgs),
    /// Krylov amplitudes and K(t) on a time grid.
    Complexity {
        #[command(flatten)]
        args: CommonArgs,
        /// Evaluate time points on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Full invariant suite; exits 1 if any check fails.
    Verify {
        #[command(flatten)]
        args: CommonArgs,
        /// Run every system with its default sample (infinite ones use --beta, default 1).
        #[arg(long)]
        all: bool,
    },
    /// Closed-form Heisenberg operator against direct evolution.
    HeisenbergCheck(CommonArgs),
}

enum Failure {
    Config(ConfigError),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Failure {
        Failure::Config(e)
    }
}

fn emit(outcome: &Outcome, output: Option<&std::path::Path>) -> Result<(), Failure> {
    if let Some(c) = &outcome.console {
        print!("{c}");
    }
    match output {
        Some(path) => std::fs::write(path, &outcome.report)
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display()))),
        None if outcome.console.is_some() => Ok(()),
        None => std::io::stdout()
            .write_all(outcome.report.as_bytes())
            .map_err(|e| Failure::Runtime(e.to_string())),
    }
}

fn verify_all(args: &CommonArgs) -> Result<Outcome, Failure> {
    if args.system.is_some() || args.system_file.is_some() {
        return Err(ConfigError {
            field: "system",
            message: "--all runs every system; drop --system".into(),
        }
        .into());
    }
    if !args.params.is_empty() || args.size.is_some() {
        return Err(ConfigError {
            field: "param",
            message: "--all uses the default samples; drop -N and --param".into(),
        }
        .into());
    }
    let mut kinds = SystemKind::ALL.to_vec();
    kinds.sort_by_key(|k| k.name());
    let mut resolved = Vec::new();
    for kind in kinds {
        let mut a = args.clone();
        if kind.is_finite() {
            a.beta = None;
        } else {
            a.beta = Some(a.beta.unwrap_or_else(|| "1".into()));
            if a.mode.as_deref() == Some("exact") {
                a.mode = None;
            }
        }
        resolved.push(resolve(Command::Verify, &a, Some(kind))?);
    }
    let results = Execution::default().map(resolved, |r| commands::run_checks(&r));
    Ok(commands::verify_report(&results, args.format))
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let (outcome, output) = match cli.command {
        Cmd::ListSystems { format } => (commands::list_systems(format), None),
        Cmd::Moments(args) => {
            let r = resolve(Command::Moments, &args, None)?;
            (commands::moments(&r).map_err(Failure::Runtime)?, args.output)
        }
        Cmd::Lanczos(args) => {
            let r = resolve(Command::Lanczos, &args, None)?;
            (commands::lanczos(&r).map_err(Failure::Runtime)?, args.output)
        }
        Cmd::Complexity { args, sequential } => {
            let r = resolve(Command::Complexity, &args, None)?;
            let exec = if sequential {
                Execution::Sequential
            } else {
                Execution::default()
            };
            (commands::complexity(&r, exec).map_err(Failure::Runtime)?, args.output)
        }
        Cmd::Verify { args, all } => {
            let outcome = if all {
                verify_all(&args)?
            } else {
                let r = resolve(Command::Verify, &args, None)?;
                commands::verify_report(&[commands::run_checks(&r)], args.format)
            };
            (outcome, args.output)
        }
        Cmd::HeisenbergCheck(args) => {
            let r = resolve(Command::HeisenbergCheck, &args, None)?;
            (commands::heisenberg_check(&r).map_err(Failure::Runtime)?, args.output)
        }
    };
    emit(&outcome, output.as_deref())?;
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: one or more checks failed");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
