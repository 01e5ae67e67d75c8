//! Experiment harness around `shapegraph-core`: configuration files,
//! reproducibility manifests, trial/grid/transfer runners, file formats,
//! and SVG trend plots.
//!
//! Every trial writes into `<out_dir>/<manifest-hash>/`:
//!
//! ```text
//! report.json     deterministic evaluation report
//! residuals.csv   per-node residuals (measured - predicted)
//! model.ckpt      frozen model (JSON), enough to reproduce predictions
//! manifest.json   resolved config, its hash, and dataset statistics
//! timing.json     wall-clock timings (volatile; excluded from hashing)
//! cv_table.csv    SVR grid-search table (SVR trials only)
//! ```

pub mod config;
pub mod error;
pub mod io;
pub mod manifest;
pub mod plot;
pub mod trial;

pub use error::CliError;
