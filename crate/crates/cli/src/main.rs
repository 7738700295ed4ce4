use std::process::ExitCode;

use clap::Parser;
use polygrid_cli::commands::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e
                .downcast_ref::<polygrid::PolygridError>()
                .map_or("error", |p| match p {
                    polygrid::PolygridError::Io(_) => "io",
                    polygrid::PolygridError::Csv { .. } => "csv",
                    polygrid::PolygridError::InvalidConfig(_) => "invalid_config",
                    polygrid::PolygridError::DimensionMismatch(_) => "dimension_mismatch",
                    _ => "model",
                });
            let doc = serde_json::json!({
                "error": kind,
                "message": format!("{e:#}"),
            });
            eprintln!("{doc}");
            ExitCode::FAILURE
        }
    }
}
