use std::process::ExitCode;

fn main() -> ExitCode {
    polynormals::cli::main_with_args(std::env::args_os())
}
