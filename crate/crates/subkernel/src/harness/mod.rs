//! Grid sweeps comparing oracles with envelopes, regime labels, and report
//! persistence.

pub mod acceptance;
pub mod config;
pub mod fixtures;
mod report;
mod run;
mod tags;

pub use config::{boundary_layers, boundary_strata, GridSpec, LogRange, Placement, PointSpec, RunConfig, Stratum, SweepConfig, TimeScale};
pub use fixtures::{fixtures_dir, Frozen, KnownFailures};
pub use report::{sweep, sweep_serial, Evaluation, FlaggedPoint, GridPoint, PointRecord, RatioReport, RegimeStats};
pub use run::{run_report, run_sweep, RunReport, SweepOutcome};
pub use tags::{factorization_case, regime_tag, scaling_index_fit};
