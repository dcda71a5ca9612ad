use clap::Parser;
use noon_passage_cli::{run, Cli};

fn main() {
    // clap exits with 2 on bad arguments, matching the config-error code
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
