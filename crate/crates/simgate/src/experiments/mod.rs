//! Configuration, presets, the gate runner and the sweep harness.

pub mod config;
pub mod presets;
pub mod run;
pub mod sweep;

pub use config::{ConfigError, Model, RunConfig, SweepSpec, SweepVariable};
pub use presets::{preset, PRESET_NAMES};
pub use run::{build_spectrum_driver, run_gate, simulated_not, transport_consistency, RunError};
pub use sweep::{
    config_at, rows_to_csv, run_sweep, spectrum_to_csv, spectrum_trace, SpectrumTrace, SweepRow,
};
