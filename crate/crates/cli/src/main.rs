use std::process::ExitCode;

use qsm_cli::CliError;

fn main() -> ExitCode {
    let mut stdout = std::io::stdout().lock();
    match qsm_cli::execute(std::env::args_os(), &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(e)) => {
            // Help and version requests also arrive here, with exit code 0.
            let _ = e.print();
            ExitCode::from(e.exit_code() as u8)
        }
        Err(CliError::Io { source, .. }) if source.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qsm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
