use std::process::ExitCode;

fn main() -> ExitCode {
    readme_ai::cli::run(std::env::args_os())
}
