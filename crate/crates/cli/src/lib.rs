//! Front end for `gjms-core`: argument parsing, suite execution and
//! JSON/CSV reports.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for
//! usage errors.

pub mod plan;
pub mod report;
pub mod run;

pub use plan::{parse_args, CommandPlan, Task, UsageError};
pub use report::{Check, Comparison, Table, VerificationReport};
pub use run::run_plan;

/// Caps the global rayon pool at `GJMS_THREADS` threads when set.
pub fn configure_threads() -> Result<(), String> {
    match std::env::var("GJMS_THREADS") {
        Ok(v) => {
            let n: usize = v.trim().parse().map_err(|_| format!("GJMS_THREADS must be a positive integer, got {v:?}"))?;
            if n == 0 {
                return Err("GJMS_THREADS must be positive".into());
            }
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
        }
        Err(_) => Ok(()),
    }
}
