//! Command-line entry point.

fn main() {
    std::process::exit(travwave::cli::run(std::env::args_os()));
}
