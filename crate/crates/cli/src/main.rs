use std::process::ExitCode;

fn main() -> ExitCode {
    socdist_cli::main_with_args(std::env::args_os())
}
