use clap::Parser;
use singlag::report::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
