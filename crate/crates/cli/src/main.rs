use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(rbi_cli::run(std::env::args_os()))
}
