use clap::Parser;
use hm_lab_cli::cache::cache_dir;
use hm_lab_cli::cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    let cache = cache_dir();
    let code = match execute(cli, cache.as_deref(), &mut std::io::stdout()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
