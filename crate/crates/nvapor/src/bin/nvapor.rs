use clap::Parser;

use nvapor::cli::{exit_code_for, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = cli.run() {
        eprintln!("error: {e}");
        let code = exit_code_for(&e);
        if code == 2 {
            eprintln!("run `nvapor --help` or `nvapor <subcommand> --help` for usage");
        }
        std::process::exit(code);
    }
}
