use clap::Parser;

use echolab::cli::{execute, Cli, CliError};

fn main() {
    match execute(Cli::parse()) {
        Ok(()) => {}
        // output piped into `head` and the like
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
        Err(e) => {
            eprintln!("{}", e.to_json());
            std::process::exit(e.exit_code());
        }
    }
}
