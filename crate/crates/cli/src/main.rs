use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use waveseg::args::Cli;
use waveseg::error::exit_code;

fn fail(category: &str, message: &str) -> ExitCode {
    let line = serde_json::json!({ "error": category, "message": message });
    eprintln!("{line}");
    ExitCode::from(exit_code(category) as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            let msg = e.to_string();
            return fail("usage", msg.lines().next().unwrap_or("invalid arguments"));
        }
    };
    match waveseg::execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.category(), &e.to_string()),
    }
}
