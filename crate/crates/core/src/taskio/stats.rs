use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::logic::Hypothesis;

use super::render::render_program;
use super::IoError;

/// Counters collected by one learning run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub candidates_generated: u64,
    pub candidates_tested: u64,
    pub instantiations_tested: u64,
    pub constraints_specialisation: u64,
    pub constraints_generalisation: u64,
    pub constraints_redundancy: u64,
    pub constraints_banish: u64,
    pub elapsed_ms: u64,
    pub budget_exceeded_count: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnStatus {
    Solved,
    Exhausted,
    Timeout,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnResult {
    pub program: Option<Hypothesis>,
    pub size: usize,
    pub status: LearnStatus,
    pub stats: Stats,
}

#[derive(Serialize)]
struct Document<'a> {
    status: LearnStatus,
    program: Option<String>,
    size: usize,
    #[serde(flatten)]
    stats: &'a Stats,
}

/// The stats document: a flat JSON object, program rendered as text.
pub fn stats_json(r: &LearnResult) -> String {
    let program = r.program.as_ref().map(|h| render_program(h).unwrap_or_else(|_| h.to_string()));
    let doc = Document { status: r.status, program, size: r.size, stats: &r.stats };
    let mut text = serde_json::to_string_pretty(&doc).expect("stats serialize");
    text.push('\n');
    text
}

pub fn write_stats(r: &LearnResult, path: &Path) -> Result<(), IoError> {
    fs::write(path, stats_json(r)).map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_document() {
        let r = LearnResult {
            program: None,
            size: 0,
            status: LearnStatus::Exhausted,
            stats: Stats { candidates_generated: 3, ..Stats::default() },
        };
        let v: serde_json::Value = serde_json::from_str(&stats_json(&r)).unwrap();
        let obj = v.as_object().unwrap();
        assert_eq!(obj["status"], "exhausted");
        assert!(obj["program"].is_null());
        assert_eq!(obj["candidates_generated"], 3);
        assert!(obj.values().all(|x| !x.is_object()));
        assert_eq!(obj.len(), 12);
    }
}
