use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use charseg::cli::{exit_code, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    let result = run(cli, &mut std::io::stdin(), &mut out, &mut std::io::stderr());
    let result = result.and_then(|()| out.flush().map_err(Into::into));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("charseg: error: {msg}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
