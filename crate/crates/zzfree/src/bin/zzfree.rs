use clap::Parser;
use zzfree::cli::{exit_code, run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("zzfree: {e}");
        std::process::exit(exit_code(&e));
    }
}
