//! Configuration, sweeps and artifact writing behind the `sglab` binary.

pub mod commands;
pub mod config;
pub mod output;
pub mod sweep;
