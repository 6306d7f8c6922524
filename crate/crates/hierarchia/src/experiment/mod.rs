//! Experiment runner: configs, suites, result tables.

pub mod config;
pub mod suites;
pub mod table;
