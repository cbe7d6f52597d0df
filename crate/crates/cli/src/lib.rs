//! Front end for the `hsurf` binary: catalog surfaces, analysis
//! orchestration, JSON/text reports and CSV export.

pub mod analyze;
pub mod catalog;
pub mod config;
pub mod error;
pub mod export;
pub mod report;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

pub use config::{AnalysisConfig, Cli, Command, OutputFormat};
pub use error::CliError;

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn io_at(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Executes a parsed command line, writing to `stdout` unless `--out` is
/// given, and returns the process exit status.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<u8, CliError> {
    match cli.command {
        Command::Analyze(args) => {
            let cfg = AnalysisConfig::from_args(args)?;
            let (report, status) = analyze::analyze(&cfg)?;
            let body = match cfg.output {
                OutputFormat::Json => report.to_json()?,
                OutputFormat::Text => report.to_text(),
            };
            match &cfg.out {
                Some(path) => {
                    let mut f = create(path)?;
                    f.write_all(body.as_bytes()).map_err(io_at(path))?;
                    f.flush().map_err(io_at(path))?;
                }
                None => stdout.write_all(body.as_bytes())?,
            }
            Ok(status)
        }
        Command::Export(args) => {
            let cfg = AnalysisConfig::from_args(args)?;
            let rows = match &cfg.out {
                Some(path) => export::export(&cfg, create(path)?),
                None => export::export(&cfg, &mut *stdout),
            }?;
            log::info!("wrote {rows} rows");
            Ok(error::EXIT_OK)
        }
    }
}
