use std::process::ExitCode;

use gjms_cli::{configure_threads, parse_args, run_plan, UsageError};

fn main() -> ExitCode {
    let plan = match parse_args(std::env::args_os()) {
        Ok(plan) => plan,
        Err(UsageError::Clap(e)) => e.exit(),
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let report = run_plan(&plan);
    println!("{}", report.to_json());
    ExitCode::from(report.exit_code() as u8)
}
