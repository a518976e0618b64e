use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(shortpulse_cli::run(std::env::args_os()))
}
