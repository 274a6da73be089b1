use std::process::ExitCode;

fn main() -> ExitCode {
    tsrk::cli::main_with_args(std::env::args_os())
}
