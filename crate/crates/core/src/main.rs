use clap::Parser;

fn main() {
    let cli = vhdlkern::cli::Cli::parse();
    std::process::exit(vhdlkern::cli::main_with(cli));
}
