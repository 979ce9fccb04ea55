use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(qsl::cli::main_entry())
}
