//! Command-line front end for `meanosc-core`: the `wgrid` file formats,
//! JSON reports and CSV plot tables.

pub mod cli;
pub mod plot;
pub mod report;
pub mod wgrid;

pub use cli::run;
