//! Bug injection for Solidity contracts and scoring of analyzer reports
//! against the injected ground truth.

pub mod corpus;
pub mod evaluator;
pub mod front;
pub mod injector;
pub mod locator;
pub mod pool;

pub use front::{
    parse, validate, validate_bytes, Diagnostic, LineMap, SourceUnit, Span, SyntaxError,
};
pub use injector::{
    emit_bug_log, inject_all, parse_bug_log, Approach, BugLogEntry, InjectError, InjectionResult,
    LogFormat,
};
pub use locator::{
    content_hash, find_all_potential_locations, InjectionProfile, InjectionSite, SiteKind,
};
pub use pool::{default_pool, load_pool, BugPool, BugType, PoolError, SnippetForm};
