use std::process::ExitCode;

fn main() -> ExitCode {
    mhd::cli::main_entry()
}
