use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use respl_cli::{run, Cli, Command, EXIT_USAGE};

fn out_path(cli: &Cli) -> Option<&std::path::Path> {
    let common = match &cli.command {
        Command::VerifyManin(a) => &a.common,
        Command::VerifyPoisson(a) => &a.common,
        Command::TruncationGrowth(a) => &a.common,
        Command::Schubert(a) => &a.common,
        Command::GammaFlow(a) => &a.common,
    };
    common.out.as_deref()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { EXIT_USAGE } else { 0 });
        }
    };
    let outcome = run(&cli);
    if let Some(msg) = &outcome.diagnostics {
        eprintln!("respl: {msg}");
    }
    if !outcome.output.is_empty() {
        let written = match out_path(&cli) {
            Some(path) => std::fs::write(path, &outcome.output),
            None => std::io::stdout().write_all(outcome.output.as_bytes()),
        };
        if let Err(e) = written {
            eprintln!("respl: cannot write output: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    ExitCode::from(outcome.code)
}
