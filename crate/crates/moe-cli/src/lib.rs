//! Pipeline front end: a TOML-configured command-line around scenario
//! generation, sensing, tracking, effectiveness assessment, and Monte
//! Carlo comparison, with every stage boundary written to plain comma
//! separated files so stages can be re-run and inspected independently.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod stage_files;
pub mod svg;
