use clap::Parser;

fn main() {
    std::process::exit(fedsim::cli::execute(fedsim::cli::Cli::parse()));
}
