use clap::Parser;

fn main() {
    let cli = archinf::cli::Cli::parse();
    std::process::exit(archinf::cli::run(cli));
}
