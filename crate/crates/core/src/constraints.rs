//! Constraints learned from failed hypotheses, and the pruning test.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::logic::{theta_subsumes, Clause, Hypothesis};
use crate::magic::OutcomeReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstraintKind {
    Specialisation,
    Generalisation,
    Redundancy,
    Banish,
}

impl ConstraintKind {
    pub fn name(self) -> &'static str {
        match self {
            ConstraintKind::Specialisation => "spec",
            ConstraintKind::Generalisation => "gen",
            ConstraintKind::Redundancy => "redund",
            ConstraintKind::Banish => "banish",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub pattern: Hypothesis,
}

impl Constraint {
    pub fn new(kind: ConstraintKind, pattern: Hypothesis) -> Self {
        Constraint { kind, pattern }
    }
}

/// Whether every clause of `specific` is subsumed by a clause of `general`,
/// where a clause of `general` carrying magic literals may serve at most
/// one clause of `specific`. Two specific clauses sharing one magic pattern
/// clause could bind its magic variables to different constants, so the
/// plain program order would be unsound for them.
pub fn magic_specialises(general: &[Clause], specific: &[Clause]) -> bool {
    let options: Vec<u64> = specific
        .iter()
        .map(|c2| {
            general
                .iter()
                .enumerate()
                .filter(|(_, c1)| theta_subsumes(c1, c2))
                .fold(0u64, |m, (i, _)| m | (1 << i))
        })
        .collect();
    let magic_mask = general.iter().enumerate().filter(|(_, c)| c.has_magic()).fold(0u64, |m, (i, _)| m | (1 << i));
    assign(&options, magic_mask, 0)
}

/// Chooses one pattern clause per candidate clause from `options`, using
/// each clause in `exclusive` at most once.
pub(crate) fn assign(options: &[u64], exclusive: u64, used: u64) -> bool {
    let Some((first, rest)) = options.split_first() else { return true };
    let mut m = *first;
    while m != 0 {
        let bit = m & m.wrapping_neg();
        m &= m - 1;
        if bit & exclusive & used != 0 {
            continue;
        }
        let used = if bit & exclusive != 0 { used | bit } else { used };
        if assign(rest, exclusive, used) {
            return true;
        }
    }
    false
}

/// Every clause of `specific` is subsumed by a magic-free clause of
/// `general`. Such clauses subsume every instantiation of `specific`, so
/// any inconsistent instantiation of it makes `general` inconsistent. A
/// clause carrying magic literals could only subsume the instantiations
/// that agree with its own constants, which may all be irrelevant.
pub fn magic_free_generalises(general: &[Clause], specific: &[Clause]) -> bool {
    specific.iter().all(|c2| general.iter().any(|c1| !c1.has_magic() && theta_subsumes(c1, c2)))
}

fn any_clause_specialises(general: &[Clause], specific: &[Clause]) -> bool {
    specific.iter().any(|c2| general.iter().any(|c1| theta_subsumes(c1, c2)))
}

/// Accumulated constraints, deduplicated, in insertion order.
#[derive(Clone, Debug, Default)]
pub struct ConstraintStore {
    items: Vec<Constraint>,
    seen: HashSet<Constraint>,
    banished: HashSet<Hypothesis>,
}

impl ConstraintStore {
    pub fn new() -> Self {
        ConstraintStore::default()
    }

    /// Adds constraints not already present; returns how many were new.
    pub fn add(&mut self, constraints: impl IntoIterator<Item = Constraint>) -> usize {
        let mut added = 0;
        for c in constraints {
            if self.seen.insert(c.clone()) {
                if c.kind == ConstraintKind::Banish {
                    self.banished.insert(c.pattern.clone());
                }
                self.items.push(c);
                added += 1;
            }
        }
        added
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.items
    }

    pub fn count(&self, kind: ConstraintKind) -> usize {
        self.items.iter().filter(|c| c.kind == kind).count()
    }

    pub fn is_banished(&self, h: &Hypothesis) -> bool {
        self.banished.contains(h)
    }

    pub fn violates(&self, h: &Hypothesis) -> bool {
        self.items.iter().any(|c| violates_one(c, h))
    }

    /// One constraint per line, prefixed by its kind.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for c in &self.items {
            let clauses: Vec<String> = c.pattern.clauses().iter().map(|cl| cl.to_string()).collect();
            let _ = writeln!(out, "{}: {}", c.kind.name(), clauses.join(" "));
        }
        out
    }
}

pub fn violates_one(c: &Constraint, h: &Hypothesis) -> bool {
    let p = c.pattern.clauses();
    match c.kind {
        ConstraintKind::Specialisation => magic_specialises(p, h.clauses()),
        ConstraintKind::Generalisation => !h.is_recursive() && magic_free_generalises(h.clauses(), p),
        ConstraintKind::Redundancy => !h.is_recursive() && any_clause_specialises(p, h.clauses()),
        ConstraintKind::Banish => c.pattern == *h,
    }
}

/// Constraints licensed by the outcome of testing `h`. Callers handle
/// truncated reports themselves (they only banish).
pub fn infer(h: &Hypothesis, r: &OutcomeReport, n_pos: usize) -> Vec<Constraint> {
    let c = |kind| Constraint::new(kind, h.clone());
    if r.bindings.is_empty() {
        return vec![c(ConstraintKind::Redundancy), c(ConstraintKind::Specialisation)];
    }
    if r.solution_index(n_pos).is_some() {
        return vec![];
    }
    let mut out = Vec::new();
    if r.pos_counts().iter().all(|&k| k < n_pos) {
        out.push(c(ConstraintKind::Specialisation));
    }
    if r.neg_cover.iter().any(|row| row.iter().any(|&b| b)) {
        out.push(c(ConstraintKind::Generalisation));
    }
    if out.is_empty() {
        out.push(c(ConstraintKind::Banish));
    }
    out
}
