//! `qcivet` binary entry point.
//!
//! Exit codes: 0 on success, 1 when a command detected an integrity
//! violation (the violation kind is named in the message) or failed
//! outright, 2 on usage errors (from argument parsing).

use clap::Parser;

fn main() {
    let cli = qcivet_cli::Cli::parse();
    match qcivet_cli::run(cli) {
        Ok(None) => {}
        Ok(Some(violation)) => {
            eprintln!("{violation}");
            std::process::exit(1);
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}
