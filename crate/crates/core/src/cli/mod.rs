//! Configuration parsing and the command layer the binary dispatches into.

pub mod commands;
pub mod config;

pub use commands::{
    cmd_classify, cmd_convergence, cmd_simulate, cmd_sweep, convergence_case, resolve_cgn,
    status_exit_code, ConvergenceTable, SweepAxis, SERIES_HEADER,
};
pub use config::{parse_config, parse_config_for, IcKind, Purpose, RunConfig, VInit};
