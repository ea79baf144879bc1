use std::process::ExitCode;

fn main() -> ExitCode {
    besov_empirica::cli::main()
}
