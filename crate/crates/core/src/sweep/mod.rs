//! Configuration-driven parameter sweeps.

pub mod config;
pub mod emit;
pub mod presets;
pub mod run;

pub use config::{parse_config, AxisName, AxisSpec, Observable, SweepConfig};
pub use emit::{emit_csv, sidecar_path, write_csv};
pub use presets::{figure_preset, PRESET_NAMES};
pub use run::{evaluate_record, run_sweep, SweepRecord};
