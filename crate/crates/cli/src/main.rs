use clap::Parser;
use parabolic::jobs::{run, Command};
use parabolic::Failure;
use std::process::ExitCode;

/// Parabolic motions of planar homogeneous potentials U(θ)/r^α.
///
/// Exit codes: 0 ok, 2 invalid input, 3 numerical failure, 4 sentinel
/// result (for example no threshold exponent in range), 1 io error.
#[derive(Debug, Parser)]
#[command(name = "parabolic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn threads() -> Result<Option<usize>, Failure> {
    match std::env::var("PARABOLIC_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Validation(format!("PARABOLIC_THREADS must be a positive integer, got '{v}'"))),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = threads().and_then(|n| {
        let mut pool = rayon::ThreadPoolBuilder::new();
        if let Some(n) = n {
            pool = pool.num_threads(n);
        }
        let pool = pool.build().map_err(|e| Failure::Io(e.to_string()))?;
        pool.install(|| run(&cli.command))
    });
    match result {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("parabolic {}: {f}", cli.command.name());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
