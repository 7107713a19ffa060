//! Synthetic benchmark tasks and suite files.

mod families;
mod suite;

use std::collections::BTreeMap;
use std::fmt;

use crate::logic::{Atom, Hypothesis};
use crate::taskio::TaskSpec;

pub use families::gen_task;
pub use suite::{default_suite, parse_suite, run_entry, run_suite, EntryOutcome, SuiteEntry, TaskSource};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BenchError {
    #[error("unknown task family {0}")]
    UnknownFamily(String),
    #[error("{family} does not take parameter {key}")]
    UnknownParam { family: Family, key: String },
    #[error("bad parameter {key}: {message}")]
    BadParam { key: String, message: String },
    #[error("suite line {line}: {message}")]
    Suite { line: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    List,
    PowerOf2,
    Append,
    Pi,
    SumK,
    MdMini,
}

impl Family {
    pub const ALL: [Family; 6] = [Family::List, Family::PowerOf2, Family::Append, Family::Pi, Family::SumK, Family::MdMini];

    pub fn name(self) -> &'static str {
        match self {
            Family::List => "list",
            Family::PowerOf2 => "powerof2",
            Family::Append => "append",
            Family::Pi => "pi",
            Family::SumK => "sumk",
            Family::MdMini => "md_mini",
        }
    }

    pub fn parse(name: &str) -> Result<Family, BenchError> {
        Family::ALL.into_iter().find(|f| f.name() == name).ok_or_else(|| BenchError::UnknownFamily(name.to_string()))
    }

    /// Parameter names and defaults. `k` for sumk defaults to 0, meaning
    /// "draw from the seed".
    pub fn defaults(self) -> &'static [(&'static str, u64)] {
        match self {
            Family::List => &[("c", 200), ("len", 50), ("pos", 10), ("neg", 10), ("holdout", 100), ("seed", 1)],
            Family::PowerOf2 => &[("max_exp", 10), ("pos", 10), ("neg", 10), ("holdout", 100), ("seed", 1)],
            Family::Append => &[("c", 100), ("len", 10), ("pos", 10), ("neg", 10), ("holdout", 100), ("seed", 1)],
            Family::Pi => &[("pos", 10), ("neg", 10), ("holdout", 100), ("seed", 1)],
            Family::SumK => {
                &[("max", 500), ("k", 0), ("len", 50), ("pos", 10), ("neg", 10), ("holdout", 100), ("seed", 1)]
            }
            Family::MdMini => &[("pos", 10), ("neg", 10), ("holdout", 100), ("seed", 1)],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Generator parameters with defaults filled in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Params {
    pub family: Family,
    values: BTreeMap<String, u64>,
}

impl Params {
    pub fn new(family: Family) -> Params {
        Params { family, values: family.defaults().iter().map(|(k, v)| (k.to_string(), *v)).collect() }
    }

    pub fn set(mut self, key: &str, value: u64) -> Result<Params, BenchError> {
        match self.values.get_mut(key) {
            Some(v) => {
                *v = value;
                Ok(self)
            }
            None => Err(BenchError::UnknownParam { family: self.family, key: key.to_string() }),
        }
    }

    pub fn get(&self, key: &str) -> u64 {
        self.values[key]
    }

    /// Parses `family(key=value,...)` or a bare family name.
    pub fn parse(text: &str) -> Result<Params, BenchError> {
        let text = text.trim();
        let (name, args) = match text.split_once('(') {
            Some((name, rest)) => {
                let inner = rest.strip_suffix(')').ok_or_else(|| BenchError::BadParam {
                    key: name.trim().to_string(),
                    message: "missing closing parenthesis".into(),
                })?;
                (name.trim(), inner)
            }
            None => (text, ""),
        };
        let mut params = Params::new(Family::parse(name)?);
        for item in args.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| BenchError::BadParam { key: item.to_string(), message: "expected key=value".into() })?;
            let v: u64 = v
                .trim()
                .parse()
                .map_err(|_| BenchError::BadParam { key: k.trim().to_string(), message: format!("{v:?} is not a natural number") })?;
            params = params.set(k.trim(), v)?;
        }
        Ok(params)
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.values.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{}({})", self.family, items.join(","))
    }
}

/// A generated task with fresh examples for measuring accuracy.
#[derive(Clone, Debug)]
pub struct GeneratedTask {
    pub task: TaskSpec,
    pub holdout_pos: Vec<Atom>,
    pub holdout_neg: Vec<Atom>,
    /// The program the examples were drawn from.
    pub target: Hypothesis,
}
