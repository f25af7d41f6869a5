use clap::Parser;

use nnrank_cli::app;

fn main() {
    let cli = app::Cli::parse();
    if let Err(err) = app::run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(app::exit_code_for(&err));
    }
}
