use std::process::ExitCode;

fn main() -> ExitCode {
    hazard_core::harness::cli::run(std::env::args_os())
}
