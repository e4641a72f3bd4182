use std::process::ExitCode;

use serde_json::Value;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (code, report) = qsrlab::cli::run_command(&args);
    match (&report.error, &report.results) {
        (Some(e), _) if e.code == "usage" => eprint!("{}", e.message),
        // --help and --version
        (None, Value::String(text)) if report.config.is_null() => print!("{text}"),
        _ => match report.to_json() {
            Ok(text) => println!("{text}"),
            Err(e) => eprintln!("{e}"),
        },
    }
    ExitCode::from(code as u8)
}
