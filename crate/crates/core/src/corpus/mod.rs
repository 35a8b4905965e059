//! Corpus construction: git history harvesting, the trusted-human and AI
//! subsets, deduplication and CVE record import.

mod harvest;
mod subsets;
mod vulns;

pub use harvest::{code_allowlist, filter_code_files, harvest_repo, HarvestOutcome, HarvestSpec, DEFAULT_MAX_FILE_BYTES};
pub use subsets::{
    ai_sample_id, build_ai_subset, build_human_subset, changes_to_samples, dedup, purity_cutoff, stray_responses,
    AiSubsetOutcome, GeneratedCode, GeneratorAdapter, ImportedResponses, SampleGranularity, SubprocessGenerator,
    SubsetOutcome, Task, TaskMatrix,
};
pub use vulns::{fragment_sample, fragment_sample_id, import_vuln_records, Labeler};

use chrono::{DateTime, Utc};
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CorpusError {
    #[error("window start {start} is not before end {end}")]
    BadWindow { start: DateTime<Utc>, end: DateTime<Utc> },
    #[error("extension allowlist is empty")]
    EmptyAllowlist,
    #[error("human-labeled window must end by 2011-01-01, got {end}")]
    PurityViolation { end: DateTime<Utc> },
    #[error("repository {repo}: {message}")]
    Git { repo: String, message: String },
    #[error("repository {0}: cannot resolve the default branch")]
    UnresolvableBranch(String),
    #[error("task matrix: {0}")]
    TaskMatrix(String),
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}
