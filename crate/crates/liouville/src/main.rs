use std::process::ExitCode;

fn main() -> ExitCode {
    liouville::cli::run()
}
