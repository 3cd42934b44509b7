use std::process::ExitCode;

fn main() -> ExitCode {
    ecoepi_cli::run(std::env::args_os())
}
