//! Task files, program text and statistics documents.

mod bias;
mod render;
mod stats;
mod syntax;
mod task;

use std::path::PathBuf;

pub use bias::{parse_bias, write_bias, Bias, Direction, MagicSetting, PredDecl};
pub use render::{parse_program, render_program};
pub use stats::{stats_json, write_stats, LearnResult, LearnStatus, Stats};
pub use syntax::{parse_clause, parse_clauses, PClause, PTerm};
pub use task::{parse_examples, parse_facts, parse_task, parse_task_sources, write_task, TaskSpec};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid task: {0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    InFile { path: PathBuf, source: Box<IoError> },
    #[error("cannot render a hypothesis that still contains magic literals")]
    MagicLiteral,
}
