use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(kzsim_cli::run(std::env::args_os()))
}
