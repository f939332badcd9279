use std::process::ExitCode;

use clap::Parser;
use lattice_fronts::cli::{run, Cli, CliError, EXIT_CONFIG};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).map_err(anyhow::Error::from) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            let (json, code) = match err.downcast_ref::<CliError>() {
                Some(e) => (e.to_json(), e.exit_code()),
                None => (
                    serde_json::json!({ "error": "internal", "message": format!("{err:#}") })
                        .to_string(),
                    EXIT_CONFIG,
                ),
            };
            eprintln!("{json}");
            ExitCode::from(code)
        }
    }
}
