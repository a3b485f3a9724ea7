use std::io;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use tomo_core::{Category, Error};
use tomo_io::cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let msg = e.to_string();
            eprintln!("error category={}: {}", Category::Usage.as_str(), msg.trim_start_matches("error: ").trim_end());
            return ExitCode::from(Category::Usage.exit_code() as u8);
        }
    };
    match run(cli, &mut io::stdout().lock()) {
        Ok(()) => ExitCode::SUCCESS,
        // The reader closed stdout early (`tomo ... | head`): nothing left to report.
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            let category = e.category();
            eprintln!("error category={}: {e}", category.as_str());
            ExitCode::from(category.exit_code() as u8)
        }
    }
}
