use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let code = std::panic::catch_unwind(|| lif::cli::run(&argv, &mut io::stdout().lock(), &mut io::stderr().lock()))
        .unwrap_or(1);
    ExitCode::from(code as u8)
}
