use clap::Parser;

fn main() {
    let cli = nufft3::cli::Cli::parse();
    std::process::exit(nufft3::cli::run(cli));
}
