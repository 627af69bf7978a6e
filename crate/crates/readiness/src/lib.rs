//! Data readiness assessment for tabular datasets.
//!
//! The library loads a delimited dataset against a declared schema, runs
//! automated readiness checks (flaws, missing values, distribution shifts
//! over collection time, text inspection, and model feasibility), scores
//! each readiness question, and emits a machine-readable report with
//! annotated SVG charts.
//!
//! Start with the runnable examples (`cargo run --example profile_flaws`)
//! or the `readiness` binary for the end-to-end pipeline.

pub mod checks;
pub mod dataset;
pub mod error;
pub mod finding;
pub mod seed;
pub mod stats;
pub mod text;

pub use error::{Error, Result};
pub use finding::{Band, Finding, Question, Severity};
