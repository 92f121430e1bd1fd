use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let code = std::panic::catch_unwind(|| {
        let stdout = io::stdout();
        let stderr = io::stderr();
        momentmap_cli::main_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
    })
    .unwrap_or(1);
    ExitCode::from(code as u8)
}
