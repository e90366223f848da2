use std::process::ExitCode;

fn main() -> ExitCode {
    match qconsensus::cli::main_entry(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
