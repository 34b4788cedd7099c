//! File formats and command implementations for the `denjoy` binary.

pub mod commands;
pub mod config;
pub mod json;
pub mod svg;
