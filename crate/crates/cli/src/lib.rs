//! Library surface of the command-line driver (kept as a lib so the
//! integration and acceptance tests can call commands in-process).

pub mod commands;
pub mod config;
pub mod output;

use anyhow::Result;

/// Exit codes: 0 success, 2 configuration error, 3 solver/convergence
/// error, 4 invariant violation.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    if let Some(core_err) = err.downcast_ref::<collapse_core::Error>() {
        match core_err {
            collapse_core::Error::Usage(_)
            | collapse_core::Error::Config(_)
            | collapse_core::Error::OrderExceeded { .. } => 2,
            collapse_core::Error::Convergence { .. } => 3,
            collapse_core::Error::Integrity { .. } => 4,
        }
    } else {
        2
    }
}

/// Cap the rayon pool from the COLLAPSE_THREADS environment variable.
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("COLLAPSE_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| anyhow::anyhow!("COLLAPSE_THREADS must be a positive integer"))?;
        if n >= 1 {
            // Ignore "already initialized" (tests may call this repeatedly).
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    Ok(())
}
