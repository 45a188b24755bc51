//! Multiple hypothesis testing with internal negative controls.
//!
//! Negative controls are hypotheses known to be null that are measured
//! alongside the hypotheses under investigation. Their statistics give a
//! nonparametric null distribution, from which this crate builds rank
//! p-values, FDR and local-FDR estimates, empirical-null diagnostics, and
//! the simulation studies used to check them.

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod curve;
pub mod data;
pub mod dist;
pub mod empirical_null;
pub mod error;
pub mod exact;
pub mod fdr;
pub mod gof;
pub mod local_fdr;
pub mod par;
pub mod procedures;
pub mod ranc;
pub mod simulation;

pub use data::{
    load_csv, tie_report, write_csv, CsvSchema, Orientation, Statistic, StatisticSet, TieReport,
    Truth,
};
pub use error::{Error, Result};
pub use exact::Level;
pub use ranc::{
    empirical_null_cdf, modified_ranc_pvalues, ranc_pvalues, EmpiricalNull, PValueKind,
    PValueVector,
};
