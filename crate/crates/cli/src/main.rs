use clap::Parser;
use curvant_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("curvant: {e}");
        std::process::exit(e.exit_code());
    }
}
