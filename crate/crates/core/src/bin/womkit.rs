use std::io::Write;
use std::process;

use clap::Parser;

use womkit::cli;

fn main() {
    // clap exits with code 2 on usage errors
    let parsed = cli::Cli::parse();
    match cli::render(&parsed.command) {
        Ok(text) => {
            if let Some(path) = parsed.command.out_path() {
                if let Err(err) = std::fs::write(path, &text) {
                    eprintln!("error: failed to write {}: {err}", path.display());
                    process::exit(1);
                }
            } else {
                let mut stdout = std::io::stdout().lock();
                if stdout.write_all(text.as_bytes()).is_err() {
                    process::exit(1);
                }
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            process::exit(cli::exit_code(&err));
        }
    }
}
