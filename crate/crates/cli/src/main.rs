use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = qnnlab::args::Cli::parse();
    match qnnlab::init_thread_pool().and_then(|()| qnnlab::run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
