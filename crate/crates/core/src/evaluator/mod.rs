//! Scoring of analyzer reports against bug logs.

mod capabilities;
mod fp;
pub mod oracle;
mod report;
mod scoring;
mod tables;

pub use capabilities::{
    default_capabilities, load_capabilities, restrict_to_scope, CapabilityError, CapabilityMatrix,
    ScopeError, Scoped, ToolCapabilities,
};
pub use fp::{
    estimate_false_positives, filter_by_majority, sample_for_inspection, DomainError, FpResult,
    MajorityOutcome, MissingThreshold,
};
pub use oracle::{synthesize, OracleError, OracleFile, PlantedCounts, PlantedTruth};
pub use report::{
    ingest_report, Adapter, Finding, FormatError, OracleReport, OracleSettings, ReportedType,
};
pub use scoring::{score_false_negatives, FnResult, MatchPolicy};
pub use tables::{row_label, Evaluation};
