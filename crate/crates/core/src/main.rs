use clap::Parser;

fn main() {
    let args = hsball::cli::Args::parse();
    std::process::exit(hsball::cli::main_with(&args));
}
