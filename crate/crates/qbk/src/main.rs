use std::process::ExitCode;

fn main() -> ExitCode {
    qbk::cli::run()
}
