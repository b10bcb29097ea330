//! Benchmark systems, random test variants and the experiment runners
//! behind the convergence, stability, timing and robustness reports.

pub mod catalog;
pub mod experiments;
pub mod report;
pub mod variant;

pub use catalog::{catalog, Catalog, CatalogEntry, Structure};
pub use experiments::{
    run_convergence, run_efficiency, run_precision, run_robustness, run_stability, run_table1,
};
pub use report::{ExperimentReport, ReportRow, Timing};
pub use variant::{random_variant, Variant};
