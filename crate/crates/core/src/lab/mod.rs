//! Experiment drivers: config parsing, convergence sweeps and check suites.

pub mod appendix;
pub mod checks;
pub mod config;
pub mod example7;
pub mod report;
pub mod sweep;
