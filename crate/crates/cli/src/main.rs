use std::process::ExitCode;

fn main() -> ExitCode {
    rskyline_cli::main_with(std::env::args_os())
}
