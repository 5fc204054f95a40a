use clap::Parser;

use tpa_core::cli::{emit, run, Cli, EXIT_INTERNAL};

fn main() {
    let cli = Cli::parse();
    let outcome = run(&cli);
    if let Err(e) = emit(&cli, &outcome) {
        eprintln!("tpa: {e}");
        std::process::exit(EXIT_INTERNAL);
    }
    std::process::exit(outcome.exit);
}
