use std::process::ExitCode;

fn main() -> ExitCode {
    let code = hif4_cli::run(std::env::args_os(), &mut std::io::stdout().lock());
    ExitCode::from(code)
}
