//! Configuration files, unit-suffixed quantities and CSV artifacts.

pub mod config;
pub mod formats;
pub mod units;
