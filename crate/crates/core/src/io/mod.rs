//! Configuration loading and result serialization.

mod config;
mod output;

pub use config::{parse_config, parse_config_str, to_toml, Overrides, RunConfig, SweepGrid};
pub use output::{
    emit_results, render_csv, render_event_log, render_json, render_trial_events, wall_clock,
    write_output, Format, MonteCarloResults, ResultDocument, RunManifest, TrialRow, SCHEMA_NAME,
    SCHEMA_VERSION, TOOL_VERSION,
};
