use clap::Parser;

fn main() {
    let cli = fraxion::cli::Cli::parse();
    std::process::exit(fraxion::cli::run(cli));
}
