use std::path::PathBuf;
use std::time::{Duration, Instant};

use crate::engine::{learn, score, EngineConfig};
use crate::taskio::{parse_task, LearnStatus};

use super::{gen_task, BenchError, Params};

#[derive(Clone, Debug, PartialEq)]
pub enum TaskSource {
    Generated(Params),
    /// A task directory; accuracy is measured on its own examples.
    Dir(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteEntry {
    pub name: String,
    pub source: TaskSource,
    pub min_acc: f64,
    pub max_secs: f64,
}

/// One entry per line: `name; family(k=v,...); min_acc; max_secs`, or
/// `name; dir(PATH); min_acc; max_secs`. Blank lines and `#` comments are
/// skipped.
pub fn parse_suite(text: &str) -> Result<Vec<SuiteEntry>, BenchError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| BenchError::Suite { line: i + 1, message };
        let fields: Vec<&str> = line.split(';').map(str::trim).collect();
        let [name, source, min_acc, max_secs] = fields[..] else {
            return Err(err(format!("expected 4 fields separated by ';', found {}", fields.len())));
        };
        let source = match source.strip_prefix("dir(").and_then(|s| s.strip_suffix(')')) {
            Some(path) => TaskSource::Dir(PathBuf::from(path.trim())),
            None => TaskSource::Generated(Params::parse(source).map_err(|e| err(e.to_string()))?),
        };
        let min_acc: f64 = min_acc.parse().map_err(|_| err(format!("bad accuracy {min_acc:?}")))?;
        let max_secs: f64 = max_secs.parse().map_err(|_| err(format!("bad time limit {max_secs:?}")))?;
        if !(0.0..=1.0).contains(&min_acc) {
            return Err(err(format!("accuracy {min_acc} is outside [0, 1]")));
        }
        if !(max_secs > 0.0 && max_secs.is_finite()) {
            return Err(err(format!("time limit {max_secs} must be positive")));
        }
        out.push(SuiteEntry { name: name.to_string(), source, min_acc, max_secs });
    }
    Ok(out)
}

/// The shipped suite: one desk-scale configuration per family.
pub fn default_suite() -> &'static str {
    "# name; generator; min accuracy; max seconds
list; list(c=200,len=50,pos=10,neg=10,holdout=100,seed=1); 1.0; 30
powerof2; powerof2(max_exp=10,pos=10,neg=10,holdout=100,seed=1); 1.0; 10
append; append(c=100,len=10,pos=10,neg=10,holdout=100,seed=1); 0.95; 30
pi; pi(pos=10,neg=10,holdout=100,seed=1); 0.99; 30
sumk; sumk(max=500,len=50,pos=10,neg=10,holdout=100,seed=1); 1.0; 60
md_mini; md_mini(pos=10,neg=10,holdout=100,seed=1); 0.9; 60
"
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntryOutcome {
    pub name: String,
    pub status: Option<LearnStatus>,
    pub accuracy: Option<f64>,
    pub secs: f64,
    pub size: usize,
    pub program: Option<String>,
    pub error: Option<String>,
    pub passed: bool,
}

pub fn run_entry(entry: &SuiteEntry) -> EntryOutcome {
    let mut out = EntryOutcome {
        name: entry.name.clone(),
        status: None,
        accuracy: None,
        secs: 0.0,
        size: 0,
        program: None,
        error: None,
        passed: false,
    };
    let loaded = match &entry.source {
        TaskSource::Generated(p) => gen_task(p).map(|g| (g.task, g.holdout_pos, g.holdout_neg)).map_err(|e| e.to_string()),
        TaskSource::Dir(dir) => parse_task(dir).map(|t| (t, vec![], vec![])).map_err(|e| e.to_string()),
    };
    let (task, mut test_pos, mut test_neg) = match loaded {
        Ok(x) => x,
        Err(e) => {
            out.error = Some(e);
            return out;
        }
    };
    if test_pos.is_empty() || test_neg.is_empty() {
        test_pos = task.pos.clone();
        test_neg = task.neg.clone();
    }
    let config = EngineConfig { timeout: Duration::from_secs_f64(entry.max_secs), ..task.config.clone() };
    let task = task.with_config(config);
    let start = Instant::now();
    let result = learn(&task);
    out.secs = start.elapsed().as_secs_f64();
    out.status = Some(result.status);
    out.size = result.size;
    if let Some(h) = &result.program {
        out.program = Some(h.to_string().trim_end().replace('\n', " "));
        match score(h, &task.background(), &test_pos, &test_neg, &task.config.budget) {
            Ok(acc) => out.accuracy = Some(acc),
            Err(e) => out.error = Some(e.to_string()),
        }
    }
    out.passed = out.accuracy.is_some_and(|a| a + 1e-12 >= entry.min_acc) && out.secs <= entry.max_secs;
    out
}

pub fn run_suite(entries: &[SuiteEntry]) -> Vec<EntryOutcome> {
    entries.iter().map(run_entry).collect()
}
