use clap::Parser;
use fejerlimit::cli::{run, Options};

fn main() {
    std::process::exit(run(Options::parse()));
}
