//! θ-subsumption between clauses and between programs.
//!
//! Matching is one-directional: variables of the subsuming clause bind to
//! terms of the subsumed clause, whose own variables behave like constants.
//! Heads match heads, and magic markers match magic markers only.

use super::clause::{Clause, Hypothesis, Literal};
use super::term::{Term, DEFAULT_EPSILON};

struct Matcher<'a> {
    general: Vec<&'a Literal>,
    candidates: Vec<Vec<&'a Literal>>,
    binding: Vec<Option<&'a Term>>,
    eps: f64,
}

fn term_eq(a: &Term, b: &Term, eps: f64) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => x == y,
        (Term::Const(x), Term::Const(y)) => x.matches(y, eps),
        _ => false,
    }
}

impl<'a> Matcher<'a> {
    /// Binds the arguments of `g` onto `s`; returns the newly bound vars, or
    /// `None` (with nothing left bound) on a clash.
    fn bind(&mut self, g: &'a Literal, s: &'a Literal) -> Option<Vec<usize>> {
        let mut fresh = Vec::new();
        for (gt, st) in g.args.iter().zip(&s.args) {
            let ok = match gt {
                Term::Const(_) => term_eq(gt, st, self.eps),
                Term::Var(v) => match self.binding[v.index()] {
                    Some(bound) => term_eq(bound, st, self.eps),
                    None => {
                        self.binding[v.index()] = Some(st);
                        fresh.push(v.index());
                        true
                    }
                },
            };
            if !ok {
                for i in fresh {
                    self.binding[i] = None;
                }
                return None;
            }
        }
        Some(fresh)
    }

    fn search(&mut self, depth: usize) -> bool {
        if depth == self.general.len() {
            return true;
        }
        let g = self.general[depth];
        for k in 0..self.candidates[depth].len() {
            let s = self.candidates[depth][k];
            if let Some(fresh) = self.bind(g, s) {
                if self.search(depth + 1) {
                    return true;
                }
                for i in fresh {
                    self.binding[i] = None;
                }
            }
        }
        false
    }
}

fn same_signature(a: &Literal, b: &Literal) -> bool {
    a.kind == b.kind && a.pred == b.pred && a.arity() == b.arity()
}

/// Tolerance-aware variant of [`theta_subsumes`].
pub fn theta_subsumes_eps(c1: &Clause, c2: &Clause, eps: f64) -> bool {
    if !same_signature(&c1.head, &c2.head) {
        return false;
    }
    let mut general = Vec::with_capacity(c1.body.len());
    let mut candidates = Vec::with_capacity(c1.body.len());
    for g in &c1.body {
        let cands: Vec<&Literal> = c2.body.iter().filter(|s| same_signature(g, s)).collect();
        if cands.is_empty() {
            return false;
        }
        general.push(g);
        candidates.push(cands);
    }
    // Most constrained literals first.
    let mut idx: Vec<usize> = (0..general.len()).collect();
    idx.sort_by_key(|&i| candidates[i].len());
    let general: Vec<&Literal> = idx.iter().map(|&i| general[i]).collect();
    let candidates: Vec<Vec<&Literal>> = idx.iter().map(|&i| candidates[i].clone()).collect();

    let mut m = Matcher { general, candidates, binding: vec![None; c1.var_span()], eps };
    if m.bind(&c1.head, &c2.head).is_none() {
        return false;
    }
    m.search(0)
}

/// True iff some θ makes `c1θ ⊆ c2`.
pub fn theta_subsumes(c1: &Clause, c2: &Clause) -> bool {
    theta_subsumes_eps(c1, c2, DEFAULT_EPSILON)
}

/// `h1 ⪯ h2`: every clause of `h2` is subsumed by some clause of `h1`.
pub fn program_subsumes(h1: &Hypothesis, h2: &Hypothesis) -> bool {
    clauses_subsume(h1.clauses(), h2.clauses())
}

pub fn clauses_subsume(general: &[Clause], specific: &[Clause]) -> bool {
    specific.iter().all(|c2| general.iter().any(|c1| theta_subsumes(c1, c2)))
}
