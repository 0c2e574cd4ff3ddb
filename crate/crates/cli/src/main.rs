use std::process::ExitCode;

use clap::Parser;
use hetsim_cli::{build_sweep, run_command, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    // Cell panics are caught and reported with the cell's parameters, so
    // the default hook would only duplicate the message.
    std::panic::set_hook(Box::new(|_| {}));
    let result = build_sweep(&cli).and_then(|spec| run_command(&spec, &cli.out, cli.jobs));
    match result {
        Ok(rows) => {
            eprintln!("wrote {} run(s) to {}", rows.len(), cli.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
