use std::process::ExitCode;

fn main() -> ExitCode {
    let code = fondgen_cli::run_cli(std::env::args_os(), &mut std::io::stdout().lock());
    ExitCode::from(code as u8)
}
