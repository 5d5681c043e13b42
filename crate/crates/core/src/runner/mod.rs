//! Configuration, single runs, sweeps and their on-disk artifacts.

pub mod config;
pub mod initial;
pub mod run;
pub mod sweep;

pub use config::{parse_config, InitialCondition, PicardSettings, RunConfig, RunMode};
pub use initial::build_initial_state;
pub use run::{load_manifest, run_in_memory, run_single, run_to_dir, RunManifest, RunOutput, RunSummary};
pub use sweep::{run_sweep, run_sweep_with_stats, RunStatus, SweepAxis, SweepManifest, SweepResult, SweepStats};
