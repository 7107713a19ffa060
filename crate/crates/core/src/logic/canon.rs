//! Canonical clause forms.
//!
//! Variables are renumbered by first occurrence (head, then body) and the
//! ordinary body literals are put in the order that makes the resulting
//! encoding lexicographically smallest. Magic markers come last, sorted by
//! variable. Two clauses get the same canonical form exactly when they are
//! equal up to variable renaming and body reordering.

use std::collections::HashMap;
use std::sync::Arc;

use super::clause::{Clause, Literal};
use super::term::{ConstValue, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermKey {
    Var(u32),
    Const(ConstValue),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LitKey {
    pub pred: Arc<str>,
    pub arity: usize,
    pub args: Vec<TermKey>,
}

/// Total order used for canonical body order and hypothesis tie-breaking.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClauseKey {
    pub head: LitKey,
    pub body: Vec<LitKey>,
    pub magic: Vec<u32>,
}

fn lit_key(lit: &Literal, map: &HashMap<Var, u32>, next: u32) -> LitKey {
    let mut fresh: HashMap<Var, u32> = HashMap::new();
    let mut next = next;
    let args = lit
        .args
        .iter()
        .map(|t| match t {
            Term::Const(c) => TermKey::Const(c.clone()),
            Term::Var(v) => TermKey::Var(match map.get(v) {
                Some(n) => *n,
                None => *fresh.entry(*v).or_insert_with(|| {
                    next += 1;
                    next - 1
                }),
            }),
        })
        .collect();
    LitKey { pred: lit.pred.clone(), arity: lit.arity(), args }
}

fn number_literal(lit: &Literal, map: &mut HashMap<Var, u32>, next: &mut u32) {
    for v in lit.vars() {
        map.entry(v).or_insert_with(|| {
            *next += 1;
            *next - 1
        });
    }
}

struct Best {
    body: Vec<LitKey>,
    magic: Vec<u32>,
    order: Vec<usize>,
    map: HashMap<Var, u32>,
}

struct Search<'a> {
    lits: &'a [Literal],
    magic: &'a [Var],
    best: Option<Best>,
}

impl Search<'_> {
    fn run(
        &mut self,
        remaining: &mut Vec<usize>,
        prefix: &mut Vec<LitKey>,
        order: &mut Vec<usize>,
        map: &HashMap<Var, u32>,
        next: u32,
    ) {
        if remaining.is_empty() {
            let mut map = map.clone();
            let mut next = next;
            let mut magic_vars = self.magic.to_vec();
            magic_vars.sort();
            for v in &magic_vars {
                map.entry(*v).or_insert_with(|| {
                    next += 1;
                    next - 1
                });
            }
            let mut magic: Vec<u32> = self.magic.iter().map(|v| map[v]).collect();
            magic.sort();
            let better = match &self.best {
                None => true,
                Some(b) => (prefix.as_slice(), magic.as_slice()) < (b.body.as_slice(), b.magic.as_slice()),
            };
            if better {
                self.best = Some(Best { body: prefix.clone(), magic, order: order.clone(), map });
            }
            return;
        }
        let keys: Vec<LitKey> = remaining.iter().map(|&i| lit_key(&self.lits[i], map, next)).collect();
        let min = keys.iter().min().unwrap().clone();
        if let Some(b) = &self.best {
            let depth = prefix.len();
            if b.body[..depth] == prefix[..] && b.body[depth] < min {
                return;
            }
        }
        let tied: Vec<usize> = (0..remaining.len()).filter(|&j| keys[j] == min).collect();
        for j in tied {
            let lit_index = remaining[j];
            let mut map2 = map.clone();
            let mut next2 = next;
            number_literal(&self.lits[lit_index], &mut map2, &mut next2);
            remaining.remove(j);
            prefix.push(min.clone());
            order.push(lit_index);
            self.run(remaining, prefix, order, &map2, next2);
            order.pop();
            prefix.pop();
            remaining.insert(j, lit_index);
        }
    }
}

/// Renames and reorders `c` into its canonical form. Idempotent.
pub fn canonicalize(c: &Clause) -> Clause {
    let mut map = HashMap::new();
    let mut next = 0u32;
    number_literal(&c.head, &mut map, &mut next);

    let mut lits: Vec<Literal> = Vec::new();
    for l in c.ordinary_body() {
        if !lits.contains(l) {
            lits.push(l.clone());
        }
    }
    let mut magic: Vec<Var> = Vec::new();
    for v in c.magic_vars() {
        if !magic.contains(&v) {
            magic.push(v);
        }
    }

    let mut search = Search { lits: &lits, magic: &magic, best: None };
    let mut remaining: Vec<usize> = (0..lits.len()).collect();
    search.run(&mut remaining, &mut Vec::new(), &mut Vec::new(), &map, next);
    let best = search.best.expect("search always completes");

    let rename = |t: &Term| match t {
        Term::Var(v) => Term::Var(Var(best.map[v])),
        Term::Const(k) => Term::Const(k.clone()),
    };
    let rename_lit = |l: &Literal| Literal { pred: l.pred.clone(), args: l.args.iter().map(rename).collect(), kind: l.kind };
    let mut body: Vec<Literal> = best.order.iter().map(|&i| rename_lit(&lits[i])).collect();
    body.extend(best.magic.iter().map(|&n| Literal::magic(Var(n))));
    Clause { head: rename_lit(&c.head), body }
}

/// Key of a clause as written; equals the canonical key when `c` is canonical.
pub fn clause_key(c: &Clause) -> ClauseKey {
    let direct = |l: &Literal| LitKey {
        pred: l.pred.clone(),
        arity: l.arity(),
        args: l
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => TermKey::Var(v.0),
                Term::Const(k) => TermKey::Const(k.clone()),
            })
            .collect(),
    };
    let mut magic: Vec<u32> = c.magic_vars().iter().map(|v| v.0).collect();
    magic.sort();
    ClauseKey { head: direct(&c.head), body: c.ordinary_body().map(direct).collect(), magic }
}

/// Canonical key of an arbitrary clause.
pub fn canonical_key(c: &Clause) -> ClauseKey {
    clause_key(&canonicalize(c))
}
