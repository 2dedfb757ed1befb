use std::io::Write;
use std::process::ExitCode;

use blamescope_cli::{execute, parse, CliError};

fn emit(text: &str, out: Option<&std::path::Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::config("FileNotWritable", e.to_string()).with_context(path.display().to_string())),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::config("FileNotWritable", e.to_string()).with_context("<stdout>")),
    }
}

fn main() -> ExitCode {
    let outcome = parse(std::env::args_os()).and_then(|parsed| match parsed {
        Ok(cli) => execute(&cli).and_then(|text| emit(&text, cli.opts.out.as_deref())),
        Err(help) => emit(&help, None),
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
