use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(stepsec::cli::main())
}
