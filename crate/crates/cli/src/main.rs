use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(anyspeed_cli::run(std::env::args_os()))
}
