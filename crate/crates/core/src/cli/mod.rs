//! Run configuration, scans, data export and the self-check suite behind the
//! `cagecurrent` binary.

pub mod check;
pub mod config;
pub mod scan;

pub use check::{cmd_check, CheckReport};
pub use config::RunConfig;
pub use scan::{cmd_charge_sweep, cmd_heatmap, cmd_planes, cmd_spectrum, ChargeSweep, PlaneReport, ScanResult};

use crate::error::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_CHECK: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Process exit status for an error.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Convergence(_) | Error::StepSize { .. } | Error::SingularOrigin => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}
