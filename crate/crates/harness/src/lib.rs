//! Configuration, run orchestration and file formats for the `nsm-core`
//! solvers: single runs, `ε`-sweeps against the MHD limit, equation checks,
//! CSV/JSON outputs and binary snapshots.

pub mod checks;
pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod snapshot;
pub mod sweep;

pub use checks::{residual_check, run_residual_check, run_scaling_check, scaling_check, ResidualCheck, ScalingRow};
pub use config::{DtSpec, IcConfig, RunConfig, System};
pub use error::{HarnessError, Result};
pub use output::{run_dir, OUTPUT_ROOT_VAR};
pub use run::{execute_single, run_single, LemmaStats, RunOutcome, RunSummary, SingleRun};
pub use snapshot::{Snapshot, SnapshotHeader};
pub use sweep::{execute_sweep, run_sweep, EpsRun, SweepOutcome, SweepResult, SweepSummary};
