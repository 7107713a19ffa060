//! The table of every clause the bias admits, magic variants included.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Arc;

use crate::logic::{canonical_key, canonicalize, clause_key, Clause, ClauseKey, Literal, Term, Var};
use crate::taskio::{Bias, Direction, MagicSetting, PredDecl};

#[derive(Clone, Debug)]
pub struct TableClause {
    pub clause: Clause,
    pub key: ClauseKey,
    pub size: usize,
    pub recursive: bool,
    pub magic: bool,
    /// Bitmask over body predicates, used to rule out subsumption cheaply.
    pub(crate) preds: u64,
}

/// Declarations usable in bodies, plus the head when recursion is enabled.
fn body_decls(bias: &Bias) -> Vec<&PredDecl> {
    let mut out: Vec<&PredDecl> = bias.body_preds.iter().collect();
    if bias.enable_recursion && !out.iter().any(|d| d.name == bias.head().name && d.arity == bias.head().arity) {
        out.push(bias.head());
    }
    out
}

/// Types of variables, or `None` when two positions disagree.
fn var_types(bias: &Bias, c: &Clause) -> Option<BTreeMap<Var, Arc<str>>> {
    let mut types: BTreeMap<Var, Arc<str>> = BTreeMap::new();
    for lit in std::iter::once(&c.head).chain(c.ordinary_body()) {
        let Some(decl) = bias.decl(&lit.pred, lit.arity()) else { continue };
        for (i, t) in lit.args.iter().enumerate() {
            let (Some(v), Some(ty)) = (t.as_var(), decl.arg_type(i)) else { continue };
            match types.get(&v) {
                Some(existing) if existing != ty => return None,
                Some(_) => {}
                None => {
                    types.insert(v, ty.clone());
                }
            }
        }
    }
    Some(types)
}

fn head_connected(c: &Clause) -> bool {
    let mut reached: HashSet<Var> = c.head.vars().collect();
    let mut left: Vec<&Literal> = c.ordinary_body().collect();
    loop {
        let before = left.len();
        left.retain(|l| {
            if l.vars().any(|v| reached.contains(&v)) {
                reached.extend(l.vars());
                false
            } else {
                true
            }
        });
        if left.is_empty() {
            return true;
        }
        if left.len() == before {
            return false;
        }
    }
}

/// Every `in` argument can be bound by the head inputs, magic variables or
/// some earlier literal, for at least one body order.
fn directions_ok(bias: &Bias, c: &Clause, magic: &BTreeSet<Var>) -> bool {
    let head = bias.head();
    let mut bound: BTreeSet<Var> = magic.clone();
    for (i, t) in c.head.args.iter().enumerate() {
        if let Some(v) = t.as_var() {
            if head.direction(i) != Some(Direction::Out) {
                bound.insert(v);
            }
        }
    }
    let mut left: Vec<&Literal> = c.ordinary_body().collect();
    while !left.is_empty() {
        let ready = left.iter().position(|l| {
            let decl = bias.decl(&l.pred, l.arity());
            l.args.iter().enumerate().all(|(i, t)| {
                decl.and_then(|d| d.direction(i)) != Some(Direction::In)
                    || t.as_var().is_none_or(|v| bound.contains(&v))
            })
        });
        let Some(i) = ready else { return false };
        bound.extend(left.remove(i).vars());
    }
    true
}

fn eligible(bias: &Bias, c: &Clause, types: &BTreeMap<Var, Arc<str>>, v: Var) -> bool {
    match &bias.magic_setting {
        MagicSetting::All => true,
        MagicSetting::Types(allowed) => types.get(&v).is_some_and(|t| allowed.contains(&**t)),
        MagicSetting::Arguments(positions) => std::iter::once(&c.head).chain(c.ordinary_body()).any(|l| {
            l.args
                .iter()
                .enumerate()
                .any(|(i, t)| t.as_var() == Some(v) && positions.contains(&(l.pred.to_string(), i + 1)))
        }),
    }
}

fn subsets<T: Clone>(items: &[T], max: usize) -> Vec<Vec<T>> {
    let mut out = vec![vec![]];
    for item in items {
        let more: Vec<Vec<T>> = out
            .iter()
            .filter(|s| s.len() < max)
            .map(|s| {
                let mut s = s.clone();
                s.push(item.clone());
                s
            })
            .collect();
        out.extend(more);
    }
    out
}

/// Magic-free bodies up to `max_body` literals, deduplicated up to renaming.
/// Only properties inherited by sub-bodies are enforced here.
fn raw_clauses(bias: &Bias) -> Vec<Clause> {
    let head = bias.head();
    let head_lit = Literal::new(head.name.clone(), (0..head.arity as u32).map(Term::var).collect());
    let decls = body_decls(bias);
    let mut all = vec![Clause::new(head_lit, vec![])];
    let mut frontier = all.clone();
    let mut seen: HashSet<ClauseKey> = frontier.iter().map(canonical_key).collect();
    for _ in 0..bias.max_body {
        let mut next = Vec::new();
        for c in &frontier {
            let nv = c.var_span();
            for d in &decls {
                let mut args: Vec<u32> = Vec::with_capacity(d.arity);
                extend_args(&mut args, d.arity, nv as u32, bias.max_vars as u32, &mut |args| {
                    let lit = Literal::new(d.name.clone(), args.iter().map(|&v| Term::var(v)).collect());
                    if c.body.contains(&lit) {
                        return;
                    }
                    let mut body = c.body.clone();
                    body.push(lit);
                    let cand = canonicalize(&Clause::new(c.head.clone(), body));
                    if var_types(bias, &cand).is_none() {
                        return;
                    }
                    if seen.insert(clause_key(&cand)) {
                        next.push(cand);
                    }
                });
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    all
}

/// Calls `f` with every argument tuple over the variables below `next` and
/// fresh ones introduced in increasing order, staying below `max_vars`.
fn extend_args(args: &mut Vec<u32>, arity: usize, next: u32, max_vars: u32, f: &mut dyn FnMut(&[u32])) {
    if args.len() == arity {
        f(args);
        return;
    }
    for v in 0..next.min(max_vars) {
        args.push(v);
        extend_args(args, arity, next, max_vars, f);
        args.pop();
    }
    if next < max_vars {
        args.push(next);
        extend_args(args, arity, next + 1, max_vars, f);
        args.pop();
    }
}

/// One bit per body predicate (hashed), so that `a` can only subsume `b`
/// when `pred_mask(a)` is a subset of `pred_mask(b)`.
pub(crate) fn pred_mask(c: &Clause) -> u64 {
    c.ordinary_body()
        .map(|l| {
            let h = l.pred.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
            1u64 << ((h ^ l.arity() as u64) % 64)
        })
        .fold(0, |a, b| a | b)
}

/// Builds the clause table, sorted by (size, canonical key).
pub fn build_table(bias: &Bias) -> Vec<TableClause> {
    let head = bias.head();
    let mut seen: HashSet<ClauseKey> = HashSet::new();
    let mut table = Vec::new();
    for raw in raw_clauses(bias) {
        if !head_connected(&raw) {
            continue;
        }
        if raw.body.contains(&raw.head) {
            continue;
        }
        let types = var_types(bias, &raw).expect("raw clauses are type consistent");
        let vars: Vec<Var> = raw.vars().into_iter().filter(|v| eligible(bias, &raw, &types, *v)).collect();
        let head_vars: BTreeSet<Var> = raw.head.vars().collect();
        for magic in subsets(&vars, bias.max_magic) {
            let magic: BTreeSet<Var> = magic.into_iter().collect();
            // A clause without body literals only makes sense as a constant fact.
            if raw.body.is_empty() && (head.arity == 0 || magic != head_vars) {
                continue;
            }
            if !directions_ok(bias, &raw, &magic) {
                continue;
            }
            let mut body = raw.body.clone();
            body.extend(magic.iter().map(|v| Literal::magic(*v)));
            let clause = canonicalize(&Clause::new(raw.head.clone(), body));
            let key = clause_key(&clause);
            if !seen.insert(key.clone()) {
                continue;
            }
            let preds = pred_mask(&clause);
            table.push(TableClause {
                size: clause.size(),
                recursive: clause.is_recursive(),
                magic: clause.has_magic(),
                clause,
                key,
                preds,
            });
        }
    }
    table.sort_by(|a, b| (a.size, &a.key).cmp(&(b.size, &b.key)));
    table
}
