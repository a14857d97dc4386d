use clap::Parser;

fn main() {
    let cli = jpac::cli::Cli::parse();
    if let Err(e) = jpac::cli::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
