use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use hsurf::error::{EXIT_OK, EXIT_USAGE};
use hsurf::Cli;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::from(EXIT_OK),
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let status = match hsurf::run(cli, &mut lock) {
        Ok(code) => code,
        Err(e) if e.is_broken_pipe() => EXIT_OK,
        Err(e) => {
            eprintln!("hsurf: {e}");
            e.exit_code()
        }
    };
    let _ = lock.flush();
    ExitCode::from(status)
}
