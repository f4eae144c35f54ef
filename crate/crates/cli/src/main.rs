use clap::Parser;
use st2e::commands::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
