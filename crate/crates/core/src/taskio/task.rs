use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use crate::engine::EngineConfig;
use crate::interp::{Background, FactBase};
use crate::logic::Atom;

use super::bias::{parse_bias, write_bias, Bias};
use super::syntax::{parse_clauses, to_const, PTerm};
use super::IoError;

/// One learning problem: bias, background facts, examples and settings.
#[derive(Clone, Debug)]
pub struct TaskSpec {
    pub bias: Bias,
    pub bk: Arc<FactBase>,
    pub pos: Vec<Atom>,
    pub neg: Vec<Atom>,
    pub config: EngineConfig,
}

fn dedupe(atoms: Vec<Atom>) -> Vec<Atom> {
    let mut seen = HashSet::new();
    atoms.into_iter().filter(|a| seen.insert(a.clone())).collect()
}

impl TaskSpec {
    /// Validates and assembles a task; duplicate examples are dropped.
    pub fn new(bias: Bias, bk: FactBase, pos: Vec<Atom>, neg: Vec<Atom>) -> Result<TaskSpec, IoError> {
        bias.validate()?;
        let head = bias.head();
        for e in pos.iter().chain(&neg) {
            if e.pred != head.name || e.args.len() != head.arity {
                return Err(IoError::Validation(format!(
                    "example {e} does not use the head predicate {}/{}",
                    head.name, head.arity
                )));
            }
        }
        let pos = dedupe(pos);
        let neg = dedupe(neg);
        // Overlap is judged by value, so f(1) and f(1.0) collide.
        let same = |a: &Atom, b: &Atom| {
            a.args.iter().zip(&b.args).all(|(x, y)| x.matches(y, 0.0))
        };
        if let Some(both) = neg.iter().find(|n| pos.iter().any(|p| same(p, n))) {
            return Err(IoError::Validation(format!("{both} is both a positive and a negative example")));
        }
        Ok(TaskSpec { bias, bk: Arc::new(bk), pos, neg, config: EngineConfig::default() })
    }

    pub fn with_config(mut self, config: EngineConfig) -> Self {
        self.config = config;
        self
    }

    /// Facts plus the builtins the bias enables, at the configured tolerance.
    pub fn background(&self) -> Background {
        Background::new(self.bk.clone(), self.bias.builtin_registry()).with_epsilon(self.config.epsilon)
    }
}

fn to_atom(t: &PTerm, line: usize) -> Result<Atom, IoError> {
    match t {
        PTerm::Atom(name) if !name.starts_with('@') => Ok(Atom::new(name.as_str(), vec![])),
        PTerm::Compound(name, args) if !name.starts_with('@') => {
            let args = args.iter().map(|a| to_const(a, line)).collect::<Result<Vec<_>, _>>()?;
            Ok(Atom::new(name.as_str(), args))
        }
        other => Err(IoError::Parse { line, message: format!("expected a ground atom, found {other:?}") }),
    }
}

/// Ground facts, one per clause.
pub fn parse_facts(src: &str) -> Result<Vec<Atom>, IoError> {
    parse_clauses(src)?
        .iter()
        .map(|c| {
            if !c.body.is_empty() {
                return Err(IoError::Parse { line: c.line, message: "background knowledge must be ground facts".into() });
            }
            to_atom(&c.head, c.line)
        })
        .collect()
}

/// `pos/1` and `neg/1` facts.
pub fn parse_examples(src: &str) -> Result<(Vec<Atom>, Vec<Atom>), IoError> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for c in parse_clauses(src)? {
        let bad = || IoError::Parse { line: c.line, message: "expected pos(Atom). or neg(Atom).".into() };
        if !c.body.is_empty() {
            return Err(bad());
        }
        match (&c.head, c.head.args()) {
            (PTerm::Compound(kind, _), [inner]) if kind == "pos" => pos.push(to_atom(inner, c.line)?),
            (PTerm::Compound(kind, _), [inner]) if kind == "neg" => neg.push(to_atom(inner, c.line)?),
            _ => return Err(bad()),
        }
    }
    Ok((pos, neg))
}

pub fn parse_task_sources(bias: &str, bk: &str, exs: &str) -> Result<TaskSpec, IoError> {
    let in_file = |name: &str| {
        let name = name.to_string();
        move |e: IoError| IoError::InFile { path: name.into(), source: Box::new(e) }
    };
    let bias = parse_bias(bias).map_err(in_file("bias.pl"))?;
    let facts: FactBase = parse_facts(bk).map_err(in_file("bk.pl"))?.into_iter().collect();
    let (pos, neg) = parse_examples(exs).map_err(in_file("exs.pl"))?;
    TaskSpec::new(bias, facts, pos, neg)
}

/// Reads `bias.pl`, `bk.pl` and `exs.pl` from `dir`.
pub fn parse_task(dir: &Path) -> Result<TaskSpec, IoError> {
    let read = |name: &str| {
        let path = dir.join(name);
        fs::read_to_string(&path).map_err(|source| IoError::Io { path, source })
    };
    parse_task_sources(&read("bias.pl")?, &read("bk.pl")?, &read("exs.pl")?)
}

/// Writes the three task files into `dir`, creating it if needed.
pub fn write_task(dir: &Path, task: &TaskSpec) -> Result<(), IoError> {
    fs::create_dir_all(dir).map_err(|source| IoError::Io { path: dir.to_path_buf(), source })?;
    let mut bk = String::new();
    for a in task.bk.atoms() {
        let _ = writeln!(bk, "{a}.");
    }
    let mut exs = String::new();
    for a in &task.pos {
        let _ = writeln!(exs, "pos({a}).");
    }
    for a in &task.neg {
        let _ = writeln!(exs, "neg({a}).");
    }
    for (name, text) in [("bias.pl", write_bias(&task.bias)), ("bk.pl", bk), ("exs.pl", exs)] {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|source| IoError::Io { path, source })?;
    }
    Ok(())
}
