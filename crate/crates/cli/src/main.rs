use std::process::ExitCode;

use clap::Parser;

use lpstat_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result =
        lpstat_cli::run(&cli).and_then(|text| lpstat_cli::emit(&text, cli.global.out.as_deref()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lpstat: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
