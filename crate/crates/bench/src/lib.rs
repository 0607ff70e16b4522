//! Batch workbench around `ira-concat`: config files, the Monte Carlo
//! harness behind `irabench simulate`, and interleaver design with pilot
//! selection.

pub mod config;
pub mod design;
pub mod sim;

/// Version string printed by `irabench --version`: crate version followed by
/// the file formats it reads and writes.
pub const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (formats: alist, ira-code/1 sidecar, permutation \"K N seed t\", curve-csv/1)"
);
