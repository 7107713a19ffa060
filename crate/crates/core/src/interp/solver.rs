//! Depth-first SLD resolution with an explicit choicepoint stack.
//!
//! Variables live in a flat slot array; clause activations allocate a frame
//! of slots, and bindings are undone through a trail on backtracking. Within
//! a clause body the next goal is picked dynamically: among literals whose
//! arguments are sufficiently bound, the one with the fewest free arguments
//! wins, with builtin and fact calls preferred over user calls on ties.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::rc::Rc;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::logic::{Atom, Clause, ConstValue, Hypothesis, Literal, Term, Var, DEFAULT_EPSILON};

use super::builtins::{Builtin, BuiltinRegistry};
use super::facts::{FactBase, PredFacts};

/// Limits applied to a single query.
#[derive(Clone, Debug, PartialEq)]
pub struct ResourceBudget {
    pub max_resolution_steps: u64,
    /// Calls nested deeper than this fail and mark the query incomplete.
    pub max_depth: usize,
    pub max_solutions: usize,
    pub wall_timeout: Option<Duration>,
}

impl Default for ResourceBudget {
    fn default() -> Self {
        ResourceBudget {
            max_resolution_steps: 100_000,
            max_depth: 500,
            max_solutions: 100_000,
            wall_timeout: None,
        }
    }
}

/// Background knowledge: ground facts plus the enabled builtins.
#[derive(Clone, Debug)]
pub struct Background {
    pub facts: Arc<FactBase>,
    pub builtins: BuiltinRegistry,
    /// Tolerance for float matching during unification.
    pub epsilon: f64,
}

impl Background {
    pub fn new(facts: impl Into<Arc<FactBase>>, builtins: BuiltinRegistry) -> Self {
        Background { facts: facts.into(), builtins, epsilon: DEFAULT_EPSILON }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProveOutcome {
    Entailed,
    NotEntailed,
    BudgetExceeded,
}

/// Ground answers for the free variables of a goal.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    /// The goal's variables, in increasing index order.
    pub vars: Vec<Var>,
    /// One row per answer, aligned with `vars`; sorted and distinct.
    pub answers: Vec<Vec<ConstValue>>,
    pub truncated: bool,
}

/// Outcome of a query including answers that leave some variables free.
#[derive(Clone, Debug, Default)]
pub(crate) struct RawRun {
    pub(crate) answers: Vec<Vec<Option<ConstValue>>>,
    /// Step or time budget ran out.
    pub(crate) exceeded: bool,
    /// Some branch was cut by the depth limit or an unsupported call mode.
    pub(crate) incomplete: bool,
    /// The solution cap was reached.
    pub(crate) capped: bool,
}

impl RawRun {
    pub(crate) fn truncated(&self) -> bool {
        self.exceeded || self.incomplete || self.capped
    }
}

#[derive(Clone, Debug)]
enum Arg {
    Var(u32),
    Const(ConstValue),
}

#[derive(Clone, Copy, Debug)]
enum Target {
    User(usize),
    Builtin(Builtin),
    Facts(usize),
}

#[derive(Clone, Debug)]
struct CLit {
    target: Target,
    args: Vec<Arg>,
}

#[derive(Clone, Debug)]
struct CClause {
    head: Vec<Arg>,
    body: Vec<CLit>,
    nvars: usize,
}

#[derive(Clone, Debug)]
struct UserPred {
    clauses: Vec<usize>,
    /// Leading arguments that must be bound before a call is preferred.
    input_arity: usize,
}

/// A compiled definite program, ready to answer queries.
#[derive(Clone, Debug)]
pub struct Program {
    clauses: Vec<CClause>,
    preds: Vec<UserPred>,
    pred_index: HashMap<(Arc<str>, usize), usize>,
    fact_keys: Vec<(Arc<str>, usize)>,
    fact_index: HashMap<(Arc<str>, usize), usize>,
}

fn compile_args(args: &[Term]) -> Vec<Arg> {
    args.iter()
        .map(|t| match t {
            Term::Var(v) => Arg::Var(v.0),
            Term::Const(c) => Arg::Const(c.clone()),
        })
        .collect()
}

impl Program {
    /// Compiles `clauses`; magic literals, if any, are ignored.
    pub fn new(clauses: &[Clause], bg: &Background) -> Program {
        Program::with_input_arity(clauses, bg, &HashMap::new())
    }

    /// As [`Program::new`], overriding the number of leading input
    /// arguments for some user predicates (used for lifted programs, whose
    /// trailing arguments are outputs).
    pub fn with_input_arity(
        clauses: &[Clause],
        bg: &Background,
        input_arity: &HashMap<(Arc<str>, usize), usize>,
    ) -> Program {
        let mut prog = Program {
            clauses: Vec::new(),
            preds: Vec::new(),
            pred_index: HashMap::new(),
            fact_keys: Vec::new(),
            fact_index: HashMap::new(),
        };
        for c in clauses {
            let key = (c.head.pred.clone(), c.head.arity());
            if !prog.pred_index.contains_key(&key) {
                let input = input_arity.get(&key).copied().unwrap_or(key.1);
                prog.pred_index.insert(key.clone(), prog.preds.len());
                prog.preds.push(UserPred { clauses: Vec::new(), input_arity: input });
            }
        }
        // Non-recursive clauses are tried first so base cases are found
        // before any recursive descent.
        let mut order: Vec<usize> = (0..clauses.len()).collect();
        order.sort_by_key(|&i| clauses[i].is_recursive());
        for i in order {
            let c = &clauses[i];
            let body = c.ordinary_body().map(|l| prog.compile_lit(l, bg)).collect();
            let id = prog.clauses.len();
            prog.clauses.push(CClause { head: compile_args(&c.head.args), body, nvars: c.var_span() });
            let p = prog.pred_index[&(c.head.pred.clone(), c.head.arity())];
            prog.preds[p].clauses.push(id);
        }
        prog
    }

    fn compile_lit(&mut self, l: &Literal, bg: &Background) -> CLit {
        let key = (l.pred.clone(), l.arity());
        let target = if let Some(&p) = self.pred_index.get(&key) {
            Target::User(p)
        } else if let Some(b) = bg.builtins.get(&l.pred, l.arity()) {
            Target::Builtin(b)
        } else {
            let next = self.fact_keys.len();
            let k = *self.fact_index.entry(key.clone()).or_insert(next);
            if k == next {
                self.fact_keys.push(key);
            }
            Target::Facts(k)
        };
        CLit { target, args: compile_args(&l.args) }
    }

    fn compile_query(&self, goal: &Literal, bg: &Background) -> (CClause, Vec<Var>) {
        let vars: Vec<Var> = goal.vars().collect::<BTreeSet<_>>().into_iter().collect();
        let dense: HashMap<Var, u32> = vars.iter().enumerate().map(|(i, v)| (*v, i as u32)).collect();
        let args = goal
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => Arg::Var(dense[v]),
                Term::Const(c) => Arg::Const(c.clone()),
            })
            .collect();
        let key = (goal.pred.clone(), goal.arity());
        let target = if let Some(&p) = self.pred_index.get(&key) {
            Target::User(p)
        } else if let Some(b) = bg.builtins.get(&goal.pred, goal.arity()) {
            Target::Builtin(b)
        } else {
            // Resolved against the fact base through an extra key slot.
            Target::Facts(usize::MAX)
        };
        (CClause { head: vec![], body: vec![CLit { target, args }], nvars: vars.len() }, vars)
    }

    pub(crate) fn run(&self, bg: &Background, goal: &Literal, budget: &ResourceBudget, want: usize) -> RawRun {
        let (query, _) = self.compile_query(goal, bg);
        let mut facts: Vec<Option<&PredFacts>> = self.fact_keys.iter().map(|k| bg.facts.pred_by_key(k)).collect();
        let query_facts = bg.facts.pred_by_key(&(goal.pred.clone(), goal.arity()));
        facts.push(query_facts);
        let mut m = Machine {
            prog: self,
            query,
            facts,
            eps: bg.epsilon,
            slots: Vec::new(),
            trail: Vec::new(),
            cps: Vec::new(),
            steps: 0,
            budget,
            deadline: budget.wall_timeout.map(|d| Instant::now() + d),
            run: RawRun::default(),
        };
        m.execute(want.max(1));
        m.run
    }

    pub fn prove(&self, bg: &Background, goal: &Atom, budget: &ResourceBudget) -> ProveOutcome {
        let run = self.run(bg, &goal.to_literal(), budget, 1);
        if !run.answers.is_empty() {
            ProveOutcome::Entailed
        } else if run.exceeded || run.incomplete {
            ProveOutcome::BudgetExceeded
        } else {
            ProveOutcome::NotEntailed
        }
    }

    pub fn solve(&self, bg: &Background, goal: &Literal, budget: &ResourceBudget) -> SolveResult {
        let vars: Vec<Var> = goal.vars().collect::<BTreeSet<_>>().into_iter().collect();
        let run = self.run(bg, goal, budget, budget.max_solutions);
        let answers = run
            .answers
            .iter()
            .filter_map(|row| row.iter().cloned().collect::<Option<Vec<_>>>())
            .collect();
        SolveResult { vars, answers, truncated: run.truncated() }
    }
}

/// Entailment check of a ground goal by `h` together with `bg`.
pub fn prove(h: &Hypothesis, bg: &Background, goal: &Atom, budget: &ResourceBudget) -> ProveOutcome {
    Program::new(h.clauses(), bg).prove(bg, goal, budget)
}

/// Every ground binding of the goal's free variables derivable from `h`
/// and `bg`, sorted.
pub fn solve(h: &Hypothesis, bg: &Background, goal: &Literal, budget: &ResourceBudget) -> SolveResult {
    Program::new(h.clauses(), bg).solve(bg, goal, budget)
}

#[derive(Clone, Debug)]
enum Slot {
    Free,
    Ref(u32),
    Val(ConstValue),
}

#[derive(Clone, Debug)]
enum Deref {
    Free(u32),
    Val(ConstValue),
}

const QUERY: u32 = u32::MAX;

#[derive(Debug)]
struct Block {
    clause: u32,
    base: u32,
    depth: u32,
    remaining: Vec<u8>,
    next: Cont,
}

type Cont = Option<Rc<Block>>;

#[derive(Debug)]
enum Alt {
    Tuples(Vec<Vec<ConstValue>>),
    Facts(usize, Vec<u32>),
    Clauses(usize),
}

#[derive(Debug)]
struct ChoicePoint {
    trail_len: usize,
    heap_len: usize,
    cont: Cont,
    depth: u32,
    args: Vec<Deref>,
    alt: Alt,
    next: usize,
}

enum Step {
    Continue,
    Solution,
    Done,
}

struct Machine<'a> {
    prog: &'a Program,
    query: CClause,
    facts: Vec<Option<&'a PredFacts>>,
    eps: f64,
    slots: Vec<Slot>,
    trail: Vec<u32>,
    cps: Vec<ChoicePoint>,
    steps: u64,
    budget: &'a ResourceBudget,
    deadline: Option<Instant>,
    run: RawRun,
}

impl<'a> Machine<'a> {
    fn clause(&self, id: u32) -> &CClause {
        if id == QUERY {
            &self.query
        } else {
            &self.prog.clauses[id as usize]
        }
    }

    fn deref(&self, mut s: u32) -> Deref {
        loop {
            match &self.slots[s as usize] {
                Slot::Free => return Deref::Free(s),
                Slot::Ref(t) => s = *t,
                Slot::Val(v) => return Deref::Val(v.clone()),
            }
        }
    }

    fn arg(&self, a: &Arg, base: u32) -> Deref {
        match a {
            Arg::Var(v) => self.deref(base + v),
            Arg::Const(c) => Deref::Val(c.clone()),
        }
    }

    fn is_bound(&self, a: &Arg, base: u32) -> bool {
        match a {
            Arg::Const(_) => true,
            Arg::Var(v) => matches!(self.deref(base + v), Deref::Val(_)),
        }
    }

    fn bind(&mut self, s: u32, slot: Slot) {
        self.slots[s as usize] = slot;
        self.trail.push(s);
    }

    fn unify_val(&mut self, d: &Deref, v: &ConstValue) -> bool {
        let d = match d {
            Deref::Free(s) => self.deref(*s),
            Deref::Val(_) => d.clone(),
        };
        match d {
            Deref::Free(s) => {
                self.bind(s, Slot::Val(v.clone()));
                true
            }
            Deref::Val(w) => w.matches(v, self.eps),
        }
    }

    fn unify_slot(&mut self, d: &Deref, s: u32) -> bool {
        match d {
            Deref::Val(v) => self.unify_val(&Deref::Free(s), v),
            Deref::Free(t) => match (self.deref(*t), self.deref(s)) {
                (Deref::Free(a), Deref::Free(b)) => {
                    if a != b {
                        let (old, new) = if a < b { (a, b) } else { (b, a) };
                        self.bind(new, Slot::Ref(old));
                    }
                    true
                }
                (Deref::Free(a), Deref::Val(v)) | (Deref::Val(v), Deref::Free(a)) => {
                    self.bind(a, Slot::Val(v));
                    true
                }
                (Deref::Val(x), Deref::Val(y)) => x.matches(&y, self.eps),
            },
        }
    }

    fn undo_to(&mut self, trail_len: usize, heap_len: usize) {
        while self.trail.len() > trail_len {
            let s = self.trail.pop().unwrap();
            if (s as usize) < self.slots.len() {
                self.slots[s as usize] = Slot::Free;
            }
        }
        self.slots.truncate(heap_len);
    }

    fn execute(&mut self, want: usize) {
        self.slots = vec![Slot::Free; self.query.nvars];
        let mut seen: HashSet<Vec<Option<ConstValue>>> = HashSet::new();
        let mut cont: Cont = Some(Rc::new(Block { clause: QUERY, base: 0, depth: 0, remaining: vec![0], next: None }));
        loop {
            match self.step(&mut cont) {
                Step::Continue => {}
                Step::Done => return,
                Step::Solution => {
                    let row: Vec<Option<ConstValue>> = (0..self.query.nvars as u32)
                        .map(|s| match self.deref(s) {
                            Deref::Val(v) => Some(v),
                            Deref::Free(_) => None,
                        })
                        .collect();
                    if seen.insert(row.clone()) {
                        self.run.answers.push(row);
                        if self.run.answers.len() >= want {
                            self.run.capped = want > 1 && self.can_backtrack();
                            break;
                        }
                    }
                    if !self.backtrack(&mut cont) {
                        break;
                    }
                }
            }
        }
        self.run.answers.sort();
    }

    fn can_backtrack(&self) -> bool {
        !self.cps.is_empty()
    }

    /// Index into `block.remaining` of the goal to run next.
    fn select(&self, block: &Block) -> usize {
        if block.remaining.len() == 1 {
            return 0;
        }
        let clause = self.clause(block.clause);
        let mut best: Option<((usize, u8), usize)> = None;
        for (pos, &li) in block.remaining.iter().enumerate() {
            let lit = &clause.body[li as usize];
            let bound: Vec<bool> = lit.args.iter().map(|a| self.is_bound(a, block.base)).collect();
            let (ready, user) = match lit.target {
                Target::Builtin(b) => (b.ready(&bound), 0),
                Target::Facts(_) => (true, 0),
                Target::User(p) => {
                    let k = self.prog.preds[p].input_arity.min(bound.len());
                    (bound[..k].iter().all(|b| *b), 1)
                }
            };
            if !ready {
                continue;
            }
            let key = (bound.iter().filter(|b| !**b).count(), user);
            if best.as_ref().is_none_or(|(k, _)| key < *k) {
                best = Some((key, pos));
            }
        }
        best.map_or(0, |(_, pos)| pos)
    }

    fn step(&mut self, cont: &mut Cont) -> Step {
        let Some(block) = cont.clone() else { return Step::Solution };
        self.steps += 1;
        if self.steps > self.budget.max_resolution_steps
            || (self.steps.is_multiple_of(1024) && self.deadline.is_some_and(|d| Instant::now() >= d))
        {
            self.run.exceeded = true;
            return Step::Done;
        }
        let pick = self.select(&block);
        let mut rest = block.remaining.clone();
        let li = rest.remove(pick) as usize;
        let next: Cont = if rest.is_empty() {
            block.next.clone()
        } else {
            Some(Rc::new(Block { clause: block.clause, base: block.base, depth: block.depth, remaining: rest, next: block.next.clone() }))
        };
        let (target, args) = {
            let lit = &self.clause(block.clause).body[li];
            let args: Vec<Deref> = lit.args.iter().map(|a| self.arg(a, block.base)).collect();
            (lit.target, args)
        };
        let alt = match target {
            Target::Builtin(b) => {
                let vals: Vec<Option<&ConstValue>> = args
                    .iter()
                    .map(|d| match d {
                        Deref::Val(v) => Some(v),
                        Deref::Free(_) => None,
                    })
                    .collect();
                match b.eval(&vals, self.eps) {
                    Some(rows) => Some(Alt::Tuples(rows)),
                    None => {
                        self.run.incomplete = true;
                        None
                    }
                }
            }
            Target::Facts(k) => {
                let k = if k == usize::MAX { self.facts.len() - 1 } else { k };
                self.facts[k].map(|pf| {
                    let first = match args.first() {
                        Some(Deref::Val(v)) => Some(v),
                        _ => None,
                    };
                    Alt::Facts(k, pf.candidates(first))
                })
            }
            Target::User(p) => {
                if block.depth as usize >= self.budget.max_depth {
                    self.run.incomplete = true;
                    None
                } else {
                    Some(Alt::Clauses(p))
                }
            }
        };
        if let Some(alt) = alt {
            self.cps.push(ChoicePoint {
                trail_len: self.trail.len(),
                heap_len: self.slots.len(),
                cont: next,
                depth: block.depth + 1,
                args,
                alt,
                next: 0,
            });
        }
        if self.backtrack(cont) {
            Step::Continue
        } else {
            Step::Done
        }
    }

    fn alt_len(&self, cp: &ChoicePoint) -> usize {
        match &cp.alt {
            Alt::Tuples(rows) => rows.len(),
            Alt::Facts(_, ids) => ids.len(),
            Alt::Clauses(p) => self.prog.preds[*p].clauses.len(),
        }
    }

    /// Resumes the most recent choicepoint with a remaining alternative.
    /// Returns false when the search space is exhausted.
    fn backtrack(&mut self, cont: &mut Cont) -> bool {
        while let Some(mut cp) = self.cps.pop() {
            self.undo_to(cp.trail_len, cp.heap_len);
            let len = self.alt_len(&cp);
            if cp.next >= len {
                continue;
            }
            let k = cp.next;
            cp.next += 1;
            let ok = self.try_alt(&cp, k);
            let resumed = ok.map(|block| block.or_else(|| cp.cont.clone()));
            if cp.next < len {
                self.cps.push(cp);
            }
            if let Some(c) = resumed {
                *cont = c;
                return true;
            }
        }
        false
    }

    /// Applies alternative `k`. `None` on failure; otherwise the new
    /// continuation (`Some(None)` meaning "carry on with the saved one").
    fn try_alt(&mut self, cp: &ChoicePoint, k: usize) -> Option<Cont> {
        match &cp.alt {
            Alt::Tuples(rows) => {
                let row = &rows[k];
                for (d, v) in cp.args.iter().zip(row) {
                    if !self.unify_val(d, v) {
                        return None;
                    }
                }
                Some(None)
            }
            Alt::Facts(key, ids) => {
                let pf = self.facts[*key].expect("fact table present");
                let row = &pf.rows[ids[k] as usize];
                for (d, v) in cp.args.iter().zip(row) {
                    if !self.unify_val(d, v) {
                        return None;
                    }
                }
                Some(None)
            }
            Alt::Clauses(p) => {
                let id = self.prog.preds[*p].clauses[k];
                let clause = &self.prog.clauses[id];
                let base = self.slots.len() as u32;
                self.slots.extend(std::iter::repeat_n(Slot::Free, clause.nvars));
                for (d, h) in cp.args.iter().zip(&clause.head) {
                    let ok = match h {
                        Arg::Var(v) => self.unify_slot(d, base + v),
                        Arg::Const(c) => self.unify_val(d, c),
                    };
                    if !ok {
                        return None;
                    }
                }
                if clause.body.is_empty() {
                    return Some(None);
                }
                Some(Some(Rc::new(Block {
                    clause: id as u32,
                    base,
                    depth: cp.depth,
                    remaining: (0..clause.body.len() as u8).collect(),
                    next: cp.cont.clone(),
                })))
            }
        }
    }
}
