use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(qdf::cli::run(std::env::args_os()))
}
