//! Testing magic hypotheses: lifting magic variables into the head,
//! harvesting constants from the positive examples, and coverage.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use crate::interp::{Background, ProveOutcome, Program, RawRun, ResourceBudget};
use crate::logic::{Atom, Clause, ConstValue, Hypothesis, Literal, Substitution, Term, Var};
use crate::taskio::TaskSpec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MagicError {
    #[error("hypothesis has no magic variables")]
    NoMagic,
    #[error("binding has {found} values but the hypothesis has {expected} magic variables")]
    ArityMismatch { expected: usize, found: usize },
}

/// A hypothesis whose magic variables have become extra head arguments.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedHypothesis {
    pub clauses: Vec<Clause>,
    /// (clause index, variable) for each appended position.
    pub magic_order: Vec<(usize, Var)>,
    pub pred: Arc<str>,
    /// Arity of the target predicate before lifting.
    pub arity: usize,
}

impl LiftedHypothesis {
    pub fn k(&self) -> usize {
        self.magic_order.len()
    }

    fn program(&self, bg: &Background) -> Program {
        let input = HashMap::from([((self.pred.clone(), self.arity + self.k()), self.arity)]);
        Program::with_input_arity(&self.clauses, bg, &input)
    }

    fn goal(&self, e: &Atom) -> Literal {
        let mut args: Vec<Term> = e.args.iter().cloned().map(Term::Const).collect();
        args.extend((0..self.k() as u32).map(Term::var));
        Literal::new(self.pred.clone(), args)
    }
}

fn magic_order(h: &Hypothesis) -> Vec<(usize, Var)> {
    h.clauses().iter().enumerate().flat_map(|(i, c)| c.magic_vars().into_iter().map(move |v| (i, v))).collect()
}

pub fn lift(h: &Hypothesis) -> Result<LiftedHypothesis, MagicError> {
    let order = magic_order(h);
    if order.is_empty() {
        return Err(MagicError::NoMagic);
    }
    let first = &h.clauses()[0].head;
    let (pred, arity) = (first.pred.clone(), first.arity());
    let k = order.len();
    let clauses = h
        .clauses()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let span = c.var_span() as u32;
            let extra: Vec<Term> = order
                .iter()
                .enumerate()
                .map(|(j, &(owner, v))| if owner == i { Term::Var(v) } else { Term::var(span + j as u32) })
                .collect();
            let extend = |l: &Literal| {
                if l.pred == pred && l.arity() == arity {
                    let mut args = l.args.clone();
                    args.extend(extra.iter().cloned());
                    Literal::new(l.pred.clone(), args)
                } else {
                    l.clone()
                }
            };
            Clause::new(extend(&c.head), c.ordinary_body().map(extend).collect())
        })
        .collect();
    debug_assert!(k > 0);
    Ok(LiftedHypothesis { clauses, magic_order: order, pred, arity })
}

/// Substitutes magic variables with the binding's constants, in the order
/// used by [`lift`], and drops the magic markers.
pub fn instantiate(h: &Hypothesis, b: &[ConstValue]) -> Result<Hypothesis, MagicError> {
    let order = magic_order(h);
    if order.len() != b.len() {
        return Err(MagicError::ArityMismatch { expected: order.len(), found: b.len() });
    }
    let mut per_clause: Vec<Substitution> = vec![Substitution::new(); h.len()];
    for (&(i, v), value) in order.iter().zip(b) {
        per_clause[i].bind(v, Term::Const(value.clone()));
    }
    let clauses = h.clauses().iter().zip(&per_clause).map(|(c, theta)| c.without_magic().apply(theta)).collect();
    Ok(Hypothesis::new(clauses))
}

/// Answers of a lifted run restricted to the magic positions.
#[derive(Clone, Debug, Default)]
struct Patterns {
    exact: HashSet<Vec<ConstValue>>,
    /// Partial answers and answers holding floats; matched by scanning.
    loose: Vec<Vec<Option<ConstValue>>>,
    truncated: bool,
    exceeded: bool,
}

impl Patterns {
    fn from_run(run: RawRun) -> Patterns {
        let mut p = Patterns { truncated: run.truncated(), exceeded: run.exceeded, ..Patterns::default() };
        let mut loose_seen = HashSet::new();
        for row in run.answers {
            match row.iter().cloned().collect::<Option<Vec<_>>>() {
                Some(full) if !full.iter().any(ConstValue::contains_float) => {
                    p.exact.insert(full);
                }
                _ => {
                    if loose_seen.insert(row.clone()) {
                        p.loose.push(row);
                    }
                }
            }
        }
        p
    }

    fn matches(&self, b: &[ConstValue], eps: f64) -> bool {
        let float_free = !b.iter().any(ConstValue::contains_float);
        if float_free && self.exact.contains(b) {
            return true;
        }
        let pattern_ok = |row: &[Option<ConstValue>]| {
            row.iter().zip(b).all(|(p, v)| p.as_ref().is_none_or(|p| p.matches(v, eps)))
        };
        if self.loose.iter().any(|row| pattern_ok(row)) {
            return true;
        }
        // Exact rows are float free, so only a float binding can match one
        // without being equal to it.
        !float_free && self.exact.iter().any(|row| row.iter().zip(b).all(|(p, v)| p.matches(v, eps)))
    }

    fn rows(&self) -> impl Iterator<Item = Vec<Option<ConstValue>>> + '_ {
        let mut exact: Vec<&Vec<ConstValue>> = self.exact.iter().collect();
        exact.sort();
        exact.into_iter().map(|r| r.iter().cloned().map(Some).collect()).chain(self.loose.iter().cloned())
    }
}

fn run_patterns(lh: &LiftedHypothesis, prog: &Program, bg: &Background, e: &Atom, budget: &ResourceBudget) -> Patterns {
    Patterns::from_run(prog.run(bg, &lh.goal(e), budget, budget.max_solutions))
}

/// Candidate bindings harvested from positive examples.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Harvest {
    pub bindings: Vec<Vec<ConstValue>>,
    pub truncated: bool,
    /// Some binding had positions no derivation constrained; they were
    /// filled with values seen at that position elsewhere.
    pub filled: bool,
}

/// Keeps the first of any bindings that agree within `eps` at every position.
struct Dedup {
    exact: HashSet<Vec<ConstValue>>,
    floats: Vec<Vec<ConstValue>>,
    order: Vec<Vec<ConstValue>>,
    eps: f64,
}

impl Dedup {
    fn insert(&mut self, b: Vec<ConstValue>) {
        if b.iter().any(ConstValue::contains_float) {
            let close = |o: &Vec<ConstValue>| o.iter().zip(&b).all(|(x, y)| x.matches(y, self.eps));
            if self.floats.iter().any(close) || self.exact.iter().any(close) {
                return;
            }
            self.floats.push(b.clone());
        } else {
            if self.exact.contains(&b) {
                return;
            }
            let close = |o: &Vec<ConstValue>| o.iter().zip(&b).all(|(x, y)| x.matches(y, self.eps));
            if b.iter().any(ConstValue::is_numeric) && self.floats.iter().any(close) {
                return;
            }
            self.exact.insert(b.clone());
        }
        self.order.push(b);
    }
}

fn collect_bindings(per_example: &[Patterns], k: usize, cap: usize, eps: f64) -> Harvest {
    let mut out = Harvest::default();
    let mut observed: Vec<BTreeSet<ConstValue>> = vec![BTreeSet::new(); k];
    for p in per_example {
        out.truncated |= p.truncated;
        for row in p.rows() {
            for (j, v) in row.iter().enumerate() {
                if let Some(v) = v {
                    observed[j].insert(v.clone());
                }
            }
        }
    }
    let mut dedup = Dedup { exact: HashSet::new(), floats: Vec::new(), order: Vec::new(), eps };
    'examples: for p in per_example {
        for row in p.rows() {
            let free: Vec<usize> = (0..k).filter(|&j| row[j].is_none()).collect();
            if free.iter().any(|&j| observed[j].is_empty()) {
                // Nothing to fill with; the instantiations exist but are not
                // enumerable, so constraints from this test would be unsafe.
                out.truncated = true;
                continue;
            }
            out.filled |= !free.is_empty();
            let mut current: Vec<ConstValue> = row.iter().map(|v| v.clone().unwrap_or(ConstValue::Int(0))).collect();
            let mut stack = vec![];
            fill(&free, 0, &observed, &mut current, &mut stack);
            for b in stack {
                dedup.insert(b);
                if dedup.order.len() > cap {
                    out.truncated = true;
                    break 'examples;
                }
            }
        }
    }
    let mut bindings = dedup.order;
    bindings.truncate(cap);
    bindings.sort();
    out.bindings = bindings;
    out
}

fn fill(
    free: &[usize],
    at: usize,
    observed: &[BTreeSet<ConstValue>],
    current: &mut Vec<ConstValue>,
    out: &mut Vec<Vec<ConstValue>>,
) {
    if at == free.len() {
        out.push(current.clone());
        return;
    }
    for v in &observed[free[at]] {
        current[free[at]] = v.clone();
        fill(free, at + 1, observed, current, out);
    }
}

/// Runs the lifted hypothesis on each positive example and collects every
/// distinct binding of the magic positions, up to `cap`.
pub fn harvest(
    lh: &LiftedHypothesis,
    bg: &Background,
    pos: &[Atom],
    cap: usize,
    budget: &ResourceBudget,
) -> Harvest {
    let prog = lh.program(bg);
    let per: Vec<Patterns> = pos.iter().map(|e| run_patterns(lh, &prog, bg, e, budget)).collect();
    collect_bindings(&per, lh.k(), cap, bg.epsilon)
}

/// Relevant bindings of a hypothesis and what each one covers.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OutcomeReport {
    /// Sorted; a magic-free hypothesis has at most the empty binding.
    pub bindings: Vec<Vec<ConstValue>>,
    pub pos_cover: Vec<Vec<bool>>,
    pub neg_cover: Vec<Vec<bool>>,
    /// A cap or budget was hit, so the bindings or coverage may be partial.
    pub truncated: bool,
    pub filled: bool,
    /// Example runs that ran out of steps or time.
    pub budget_exceeded: usize,
}

impl OutcomeReport {
    pub fn pos_counts(&self) -> Vec<usize> {
        self.pos_cover.iter().map(|row| row.iter().filter(|&&b| b).count()).collect()
    }

    /// First binding covering all `n_pos` positives and no negative.
    pub fn solution_index(&self, n_pos: usize) -> Option<usize> {
        (0..self.bindings.len())
            .find(|&i| self.pos_counts()[i] == n_pos && !self.neg_cover[i].iter().any(|&b| b))
    }
}

fn prove_all(prog: &Program, bg: &Background, examples: &[Atom], budget: &ResourceBudget) -> (Vec<bool>, usize) {
    let mut exceeded = 0;
    let row = examples
        .iter()
        .map(|e| match prog.prove(bg, e, budget) {
            ProveOutcome::Entailed => true,
            ProveOutcome::NotEntailed => false,
            ProveOutcome::BudgetExceeded => {
                exceeded += 1;
                false
            }
        })
        .collect();
    (row, exceeded)
}

pub fn evaluate(h: &Hypothesis, task: &TaskSpec) -> OutcomeReport {
    evaluate_with(h, task, &task.background())
}

/// As [`evaluate`] with a prepared background.
pub fn evaluate_with(h: &Hypothesis, task: &TaskSpec, bg: &Background) -> OutcomeReport {
    let budget = &task.config.budget;
    let Ok(lh) = lift(h) else {
        let prog = Program::new(h.clauses(), bg);
        let (pos, pe) = prove_all(&prog, bg, &task.pos, budget);
        let (neg, ne) = prove_all(&prog, bg, &task.neg, budget);
        let covers = pos.iter().any(|&b| b);
        return OutcomeReport {
            bindings: if covers { vec![vec![]] } else { vec![] },
            pos_cover: if covers { vec![pos] } else { vec![] },
            neg_cover: if covers { vec![neg] } else { vec![] },
            truncated: pe + ne > 0,
            filled: false,
            budget_exceeded: pe + ne,
        };
    };
    let prog = lh.program(bg);
    let pos_runs: Vec<Patterns> = task.pos.iter().map(|e| run_patterns(&lh, &prog, bg, e, budget)).collect();
    let harvest = collect_bindings(&pos_runs, lh.k(), task.config.max_instantiations, bg.epsilon);
    let neg_runs: Vec<Patterns> = task.neg.iter().map(|e| run_patterns(&lh, &prog, bg, e, budget)).collect();
    let mut report = OutcomeReport {
        truncated: harvest.truncated || neg_runs.iter().any(|p| p.truncated),
        filled: harvest.filled,
        budget_exceeded: pos_runs.iter().chain(&neg_runs).filter(|p| p.exceeded).count(),
        ..OutcomeReport::default()
    };

    // Examples whose lifted run was cut short are checked directly. Such a
    // report only matters for finding a solution, so once a binding misses
    // a positive its remaining direct checks are skipped.
    let eps = bg.epsilon;
    for b in harvest.bindings {
        let mut pos: Vec<bool> = pos_runs.iter().map(|p| p.matches(&b, eps)).collect();
        let mut neg: Vec<bool> = neg_runs.iter().map(|p| p.matches(&b, eps)).collect();
        if report.truncated {
            let mut direct: Option<Program> = None;
            let mut prove = |e: &Atom, report: &mut OutcomeReport| {
                let prog = direct.get_or_insert_with(|| {
                    let inst = instantiate(h, &b).expect("binding matches the magic variables");
                    Program::new(inst.clauses(), bg)
                });
                match prog.prove(bg, e, budget) {
                    ProveOutcome::Entailed => true,
                    ProveOutcome::NotEntailed => false,
                    ProveOutcome::BudgetExceeded => {
                        report.budget_exceeded += 1;
                        false
                    }
                }
            };
            let mut complete = true;
            for (i, p) in pos_runs.iter().enumerate() {
                if !pos[i] && p.truncated {
                    pos[i] = prove(&task.pos[i], &mut report);
                }
                if !pos[i] {
                    complete = false;
                    break;
                }
            }
            if complete {
                for (i, p) in neg_runs.iter().enumerate() {
                    if !neg[i] && p.truncated {
                        neg[i] = prove(&task.neg[i], &mut report);
                    }
                }
            }
        }
        if pos.iter().any(|&x| x) {
            report.bindings.push(b);
            report.pos_cover.push(pos);
            report.neg_cover.push(neg);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taskio::{parse_clause, parse_task_sources};

    fn h(src: &[&str]) -> Hypothesis {
        Hypothesis::new(src.iter().map(|s| parse_clause(s).unwrap()).collect())
    }

    const LIST_BIAS: &str = "head_pred(f,1).\nbody_pred(head,2).\nbody_pred(tail,2).\nbody_pred(length,2).\n\
        body_pred(empty,1).\nbuiltin(head,2).\nbuiltin(tail,2).\nbuiltin(length,2).\nbuiltin(empty,1).\n";

    #[test]
    fn lift_single_clause() {
        let lh = lift(&h(&["f(A):-length(A,B),@magic(B)."])).unwrap();
        assert_eq!(lh.clauses.len(), 1);
        assert_eq!(lh.clauses[0].to_string(), "f(A,B):-length(A,B).");
        assert!(matches!(lift(&h(&["f(A):-length(A,B)."])), Err(MagicError::NoMagic)));
    }

    #[test]
    fn lift_recursive_threads_positions() {
        let lh = lift(&h(&["f(A):-length(A,B),@magic(B).", "f(A):-head(A,D),@magic(D),tail(A,C),f(C)."])).unwrap();
        assert_eq!(lh.k(), 2);
        let text: Vec<String> = lh.clauses.iter().map(|c| c.to_string()).collect();
        // Renamed: the base clause passes the second position through, the
        // recursive clause passes the first through to its call.
        let base = parse_clause(&text[0]).unwrap();
        let rec = parse_clause(&text[1]).unwrap();
        assert_eq!(base.head.arity(), 3);
        assert_eq!(base.head.args[1], base.body[0].args[1]);
        let call = rec.body.iter().find(|l| &*l.pred == "f").unwrap();
        assert_eq!(call.args[1..], rec.head.args[1..]);
    }

    #[test]
    fn instantiate_examples() {
        let hyp = h(&["f(A):-length(A,B),@magic(B)."]);
        assert_eq!(instantiate(&hyp, &[ConstValue::Int(2)]).unwrap(), h(&["f(A):-length(A,2)."]));
        assert!(matches!(instantiate(&hyp, &[]), Err(MagicError::ArityMismatch { .. })));
        let plain = h(&["f(A):-length(A,B)."]);
        assert_eq!(instantiate(&plain, &[]).unwrap(), plain);
    }

    #[test]
    fn harvest_relevant_instantiations() {
        let task = parse_task_sources(LIST_BIAS, "", "pos(f([a,e])).\npos(f([])).\n").unwrap();
        let lh = lift(&h(&["f(A):-length(A,B),@magic(B)."])).unwrap();
        let got = harvest(&lh, &task.background(), &task.pos, 100, &ResourceBudget::default());
        assert_eq!(got.bindings, vec![vec![ConstValue::Int(0)], vec![ConstValue::Int(2)]]);
        assert!(!got.truncated);

        let task = parse_task_sources(LIST_BIAS, "", "pos(f([b,a])).\npos(f([c,a,e])).\n").unwrap();
        let lh = lift(&h(&["f(A):-head(A,B),@magic(B)."])).unwrap();
        let got = harvest(&lh, &task.background(), &task.pos, 100, &ResourceBudget::default());
        assert_eq!(got.bindings, vec![vec![ConstValue::sym("b")], vec![ConstValue::sym("c")]]);
    }

    #[test]
    fn evaluate_head_hypothesis() {
        let task = parse_task_sources(LIST_BIAS, "", "pos(f([b,a])).\npos(f([c,a,e])).\nneg(f([b])).\nneg(f([c])).\n")
            .unwrap();
        let r = evaluate(&h(&["f(A):-head(A,B),@magic(B)."]), &task);
        assert_eq!(r.bindings.len(), 2);
        assert_eq!(r.pos_counts(), vec![1, 1]);
        assert!(r.neg_cover.iter().all(|row| row.iter().filter(|&&b| b).count() == 1));
        assert!(!r.truncated);
    }

    #[test]
    fn evaluate_single_element_lists() {
        let task = parse_task_sources(LIST_BIAS, "", "pos(f([b,c])).\npos(f([f,g,c])).\n").unwrap();
        let r = evaluate(&h(&["f(A):-head(A,B),@magic(B),tail(A,C),empty(C)."]), &task);
        assert!(r.bindings.is_empty());
        assert!(!r.truncated);
    }
}
