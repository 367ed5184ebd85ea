use std::process::ExitCode;

fn main() -> ExitCode {
    calr::cli::main_entry()
}
