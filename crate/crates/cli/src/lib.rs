//! Configuration, mode dispatch and artifact writers for the `nehari`
//! command-line tool.

// NaN must fail these range checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;

pub use config::{
    parse_config, parse_config_str, ConfigError, GridConfig, LiouvilleConfig, Mode, Radius, Resolution, RunConfig,
};
pub use output::{
    emit_liouville_csv, emit_profile_csv, emit_result_json, emit_trace_csv, read_result_json, Meta, ResultRecord,
};
pub use run::{run, ExitStatus, Failure};
