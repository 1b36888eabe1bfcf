//! Experiment configuration, scheduling, metrics, and sweeps.

mod config;
mod metrics;
mod schedule;
mod sweep;

pub use config::{
    build_config, parse_config, parse_tokens, AgentKind, Checkpoint, ConfigError,
    ExperimentConfig, Mode,
};
pub use metrics::{
    moving_average, relearn_episode, sustained_span, EpisodeRow, EpochRow, MetricsLog, TestRow,
};
pub use schedule::{run_deep, run_experiment, run_tabular, run_to_dir, RngSet};
pub use sweep::{run_sweep, SweepRun};
