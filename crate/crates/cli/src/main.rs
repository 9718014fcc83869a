use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hmdf_cli::{cmd_check, cmd_compute, cmd_construct, cmd_invert, cmd_render, CliResult, Output, RunConfig};

/// Harmonic measure distribution functions of circle domains.
#[derive(Parser)]
#[command(name = "hmdf", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    run: RunConfig,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate h of a domain file as CSV
    Compute {
        domain: PathBuf,
        /// `a:b:n` or a comma separated list; default the boundary radii
        #[arg(long)]
        radii: Option<String>,
    },
    /// Solve for the circle domain of a step file
    Invert { steps: PathBuf },
    /// Run the construction on a function file and write a report directory
    Construct { function: PathBuf },
    /// Check the necessary and sufficient conditions of a function file
    Check { function: PathBuf },
    /// Draw a domain or function file as SVG
    Render { file: PathBuf },
}

fn run(cli: &Cli) -> CliResult<Output> {
    match &cli.cmd {
        Cmd::Compute { domain, radii } => cmd_compute(domain, radii.as_deref(), &cli.run),
        Cmd::Invert { steps } => cmd_invert(steps, &cli.run),
        Cmd::Construct { function } => cmd_construct(function, &cli.run),
        Cmd::Check { function } => cmd_check(function, &cli.run),
        Cmd::Render { file } => cmd_render(file, &cli.run),
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
    let mut stdout = std::io::stdout().lock();
    match run(&cli) {
        Ok(out) => {
            let _ = stdout.write_all(out.stdout.as_bytes());
            for n in out.notes {
                eprintln!("{n}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let Some(partial) = &e.output {
                let _ = stdout.write_all(partial.as_bytes());
            }
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
