use clap::Parser;

fn main() {
    let args = vfe::cli::Args::parse();
    if let Err(err) = vfe::cli::run(&args) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
