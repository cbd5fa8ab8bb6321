use clap::Parser;

fn main() {
    let cli = tagd::cli::Cli::parse();
    if let Err(e) = tagd::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
