//! Runs named checks and prints one `PASS`/`FAIL` line for each.
//!
//! Used by harness-less test targets that want a compact report instead of
//! the libtest output. A check returns a one-line summary on success and a
//! reason on failure; panics count as failures.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

pub type Check = fn() -> Result<String, String>;

/// Runs every check whose name contains one of the positional arguments (all
/// of them when there are none) and exits non-zero if any failed.
pub fn run(checks: &[(&str, Check)]) -> ExitCode {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let selected: Vec<_> = checks
        .iter()
        .filter(|(name, _)| filters.is_empty() || filters.iter().any(|f| name.contains(f.as_str())))
        .collect();
    let width = selected.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
    let mut failed = 0;
    for (name, check) in &selected {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag}  {name:width$}  {secs:6.2}s  {detail}");
    }
    println!(
        "\n{} checks, {} passed, {failed} failed",
        selected.len(),
        selected.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

/// Returns `Err(format!(..))` from the enclosing check unless `cond` holds.
#[macro_export]
macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err(format!($($arg)+));
        }
    };
}
