//! Repository mining for cross-language code migration.
//!
//! `migmine` walks a git history in chronological (first-parent) order and
//! reconstructs how a Java codebase moved to Kotlin: per-commit language
//! metrics, migration-commit detection at file and method granularity via
//! AST differencing, migration-interval characterization, and frequent
//! inter-language change-pattern mining.
//!
//! The high-level entry point is [`report::run`], which executes the whole
//! pipeline for one repository and emits a JSON report plus CSV series. The
//! individual stages are usable on their own:
//!
//! - [`repo`] — open a repository and stream [`repo::CommitRecord`]s
//! - [`lang`] / [`metrics`] — language classification, sLOC counting and
//!   per-commit [`metrics::LanguageSnapshot`]s
//! - [`ast`] — unified Java/Kotlin syntax trees
//! - [`diff`] — GumTree-style tree matching and Chawathe-style edit scripts
//! - [`detect`] — migration-commit detectors and app-level characterization
//! - [`mine`] — transaction building and Apriori frequent-itemset mining

pub mod ast;
pub mod detect;
pub mod diff;
pub mod fixture;
pub mod lang;
pub mod metrics;
pub mod mine;
mod par;
pub mod ratio;
pub mod repo;
pub mod report;

pub use ratio::Ratio;
