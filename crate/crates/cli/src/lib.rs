pub mod checks;
pub mod config;
pub mod experiments;
pub mod grid;
pub mod table;

pub use config::{ConfigError, SweepConfig};
pub use experiments::{build_tables, run_experiment, Experiment, RunError};
pub use table::{Cell, CsvTable};
