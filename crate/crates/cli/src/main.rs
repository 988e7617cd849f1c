use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use fraclap::io::{parse_config, run_command, Command, EXIT_IO};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Solve,
    Continue,
    Fold,
    Homotopy,
    Certify,
    OracleCheck,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Solve => Command::Solve,
            Cmd::Continue => Command::Continue,
            Cmd::Fold => Command::Fold,
            Cmd::Homotopy => Command::Homotopy,
            Cmd::Certify => Command::Certify,
            Cmd::OracleCheck => Command::OracleCheck,
        }
    }
}

/// Periodic fractional Laplacian solver: solves, branches, folds and bound checks.
#[derive(Debug, Parser)]
#[command(name = "fraclap", version)]
struct Args {
    command: Cmd,
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            // exit code 2 is reserved for certified infeasibility
            return ExitCode::from(if e.use_stderr() { EXIT_IO as u8 } else { 0 });
        }
    };
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(EXIT_IO as u8);
        }
    };
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_IO as u8);
        }
    };
    let outcome = run_command(args.command.into(), &cfg, &args.out);
    print!("{}", outcome.stdout);
    eprint!("{}", outcome.stderr);
    ExitCode::from(outcome.code as u8)
}
