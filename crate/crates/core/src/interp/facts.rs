use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::logic::{Atom, ConstValue};

/// Key used for first-argument indexing. Numbers are left out: they match
/// under tolerance, which a hash lookup cannot express.
fn index_key(c: &ConstValue) -> Option<&ConstValue> {
    (!c.is_numeric() && !c.contains_float()).then_some(c)
}

#[derive(Clone, Debug, Default)]
pub(crate) struct PredFacts {
    pub(crate) rows: Vec<Vec<ConstValue>>,
    by_first: HashMap<ConstValue, Vec<u32>>,
    /// Rows whose first argument is not indexable.
    unindexed: Vec<u32>,
    seen: HashSet<Vec<ConstValue>>,
}

impl PredFacts {
    /// Rows that may match a call whose first argument is `first`.
    pub(crate) fn candidates(&self, first: Option<&ConstValue>) -> Vec<u32> {
        match first.and_then(index_key) {
            Some(key) => {
                let mut out: Vec<u32> = self.by_first.get(key).cloned().unwrap_or_default();
                if !self.unindexed.is_empty() {
                    out.extend_from_slice(&self.unindexed);
                    out.sort_unstable();
                }
                out
            }
            None => (0..self.rows.len() as u32).collect(),
        }
    }
}

/// Ground background facts, indexed by predicate and first argument.
#[derive(Clone, Debug, Default)]
pub struct FactBase {
    preds: HashMap<(Arc<str>, usize), PredFacts>,
    len: usize,
}

impl FactBase {
    pub fn new() -> Self {
        FactBase::default()
    }

    /// Adds a fact; exact duplicates are ignored. Returns whether it was new.
    pub fn insert(&mut self, atom: Atom) -> bool {
        let entry = self.preds.entry((atom.pred.clone(), atom.args.len())).or_default();
        if !entry.seen.insert(atom.args.clone()) {
            return false;
        }
        let row = entry.rows.len() as u32;
        match atom.args.first().and_then(index_key) {
            Some(key) => entry.by_first.entry(key.clone()).or_default().push(row),
            None => entry.unindexed.push(row),
        }
        entry.rows.push(atom.args);
        self.len += 1;
        true
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub(crate) fn pred(&self, name: &str, arity: usize) -> Option<&PredFacts> {
        self.preds.get(&(Arc::from(name), arity))
    }

    pub(crate) fn pred_by_key(&self, key: &(Arc<str>, usize)) -> Option<&PredFacts> {
        self.preds.get(key)
    }

    pub fn contains_pred(&self, name: &str, arity: usize) -> bool {
        self.pred(name, arity).is_some()
    }

    /// All facts in a deterministic order (by predicate, then insertion).
    pub fn atoms(&self) -> Vec<Atom> {
        let mut keys: Vec<&(Arc<str>, usize)> = self.preds.keys().collect();
        keys.sort();
        keys.into_iter()
            .flat_map(|k| {
                self.preds[k].rows.iter().map(move |r| Atom::new(k.0.clone(), r.clone()))
            })
            .collect()
    }
}

impl FromIterator<Atom> for FactBase {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        let mut fb = FactBase::new();
        for a in iter {
            fb.insert(a);
        }
        fb
    }
}
