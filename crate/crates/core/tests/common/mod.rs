//! Brute-force oracles shared by the integration tests. Nothing here calls
//! the solver, the generator or the constraint code.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use lff::logic::{Clause, ConstValue, Hypothesis, Term, Var};
use lff::taskio::{parse_task_sources, TaskSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MICRO_BIAS: &str = "head_pred(f,1).
body_pred(p,2).
body_pred(q,1).
max_vars(3).
max_body(2).
max_clauses(2).
max_magic(1).
";

/// Argument of an oracle clause: a variable slot or an integer constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OTerm {
    V(u8),
    C(i64),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OClause {
    pub head: OTerm,
    pub body: Vec<(&'static str, Vec<OTerm>)>,
}

impl OClause {
    pub fn size(&self) -> usize {
        1 + self.body.len()
    }

    fn nvars(&self) -> usize {
        let mut vs: Vec<u8> = std::iter::once(&self.head)
            .chain(self.body.iter().flat_map(|(_, a)| a))
            .filter_map(|t| match t {
                OTerm::V(v) => Some(*v),
                OTerm::C(_) => None,
            })
            .collect();
        vs.sort();
        vs.dedup();
        vs.into_iter().max().map_or(0, |m| m as usize + 1)
    }
}

/// Ground facts of a micro task: `p/2` pairs and `q/1` values.
#[derive(Clone, Debug, Default)]
pub struct Facts {
    pub p: HashSet<(i64, i64)>,
    pub q: HashSet<i64>,
    pub domain: Vec<i64>,
}

impl Facts {
    fn holds(&self, pred: &str, args: &[i64]) -> bool {
        match (pred, args) {
            ("p", [a, b]) => self.p.contains(&(*a, *b)),
            ("q", [a]) => self.q.contains(a),
            _ => false,
        }
    }

    pub fn bk_text(&self) -> String {
        let mut lines: Vec<String> = self.p.iter().map(|(a, b)| format!("p({a},{b}).")).collect();
        lines.extend(self.q.iter().map(|a| format!("q({a}).")));
        lines.sort();
        lines.join("\n") + "\n"
    }
}

/// Whether `clause` proves `f(x)`: tries every assignment of its variables
/// over the domain.
pub fn covers(clause: &OClause, facts: &Facts, x: i64) -> bool {
    let n = clause.nvars();
    let mut vals = vec![0i64; n];
    let d = &facts.domain;
    let total = d.len().pow(n as u32);
    let value = |t: &OTerm, vals: &[i64]| match *t {
        OTerm::V(v) => vals[v as usize],
        OTerm::C(c) => c,
    };
    for mut code in 0..total {
        for slot in vals.iter_mut() {
            *slot = d[code % d.len()];
            code /= d.len();
        }
        if value(&clause.head, &vals) != x {
            continue;
        }
        if clause.body.iter().all(|(p, args)| {
            let a: Vec<i64> = args.iter().map(|t| value(t, &vals)).collect();
            facts.holds(p, &a)
        }) {
            return true;
        }
    }
    false
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    V(u8),
    K,
}

/// Every clause of the micro bias with its constant slot filled by each
/// domain value. Duplicates up to renaming are harmless and kept.
pub fn micro_clauses(domain: &[i64]) -> Vec<OClause> {
    let slots = [Slot::V(0), Slot::V(1), Slot::V(2), Slot::K];
    let mut lits: Vec<(&'static str, Vec<Slot>)> = Vec::new();
    for &a in &slots {
        lits.push(("q", vec![a]));
        for &b in &slots {
            lits.push(("p", vec![a, b]));
        }
    }
    let mut bodies: Vec<Vec<&(&'static str, Vec<Slot>)>> = vec![vec![]];
    for i in 0..lits.len() {
        bodies.push(vec![&lits[i]]);
        for j in i + 1..lits.len() {
            bodies.push(vec![&lits[i], &lits[j]]);
        }
    }
    let mut out = Vec::new();
    for head in [Slot::V(0), Slot::K] {
        for body in &bodies {
            let used: BTreeSet<u8> = std::iter::once(head)
                .chain(body.iter().flat_map(|(_, a)| a.iter().copied()))
                .map(|s| match s {
                    Slot::V(v) => v,
                    Slot::K => 9,
                })
                .collect();
            if head == Slot::K && used.contains(&0) {
                continue;
            }
            if used.len() > 3 {
                continue;
            }
            if body.is_empty() && head != Slot::K {
                continue;
            }
            if !connected(head, body) {
                continue;
            }
            let has_k = used.contains(&9);
            let fills: Vec<i64> = if has_k { domain.to_vec() } else { vec![0] };
            for &k in &fills {
                let t = |s: Slot| match s {
                    Slot::V(v) => OTerm::V(v),
                    Slot::K => OTerm::C(k),
                };
                out.push(OClause {
                    head: t(head),
                    body: body.iter().map(|(p, a)| (*p, a.iter().map(|&s| t(s)).collect())).collect(),
                });
            }
        }
    }
    out
}

fn connected(head: Slot, body: &[&(&'static str, Vec<Slot>)]) -> bool {
    let mut reached = vec![head];
    let mut left: Vec<&Vec<Slot>> = body.iter().map(|(_, a)| a).collect();
    while !left.is_empty() {
        let before = left.len();
        left.retain(|a| {
            if a.iter().any(|s| reached.contains(s)) {
                reached.extend(a.iter().copied());
                false
            } else {
                true
            }
        });
        if left.len() == before {
            return false;
        }
    }
    true
}

/// A micro task: facts, examples and the oracle's clause set.
pub struct Micro {
    pub facts: Facts,
    pub pos: Vec<i64>,
    pub neg: Vec<i64>,
    pub task: TaskSpec,
}

/// Seeded micro task. Every fifth seed labels examples at random, so some
/// tasks have no solution; the rest are labelled by a random program.
pub fn micro_task(seed: u64) -> Micro {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = rng.gen_range(4..=8i64);
        let domain: Vec<i64> = (0..n).collect();
        let mut facts = Facts { domain: domain.clone(), ..Facts::default() };
        for a in 0..n {
            for b in 0..n {
                if rng.gen_bool(0.2) {
                    facts.p.insert((a, b));
                }
            }
            if rng.gen_bool(0.4) {
                facts.q.insert(a);
            }
        }
        let label: Vec<bool> = if seed % 5 == 4 {
            domain.iter().map(|_| rng.gen_bool(0.5)).collect()
        } else {
            let clauses = micro_clauses(&domain);
            let k = rng.gen_range(1..=2);
            let chosen: Vec<&OClause> = (0..k).map(|_| &clauses[rng.gen_range(0..clauses.len())]).collect();
            domain.iter().map(|&x| chosen.iter().any(|c| covers(c, &facts, x))).collect()
        };
        let mut pos: Vec<i64> = domain.iter().copied().filter(|&x| label[x as usize]).collect();
        let mut neg: Vec<i64> = domain.iter().copied().filter(|&x| !label[x as usize]).collect();
        if pos.is_empty() || neg.is_empty() {
            continue;
        }
        while pos.len() > 4 {
            pos.remove(rng.gen_range(0..pos.len()));
        }
        while neg.len() > 4 {
            neg.remove(rng.gen_range(0..neg.len()));
        }
        let mut exs: Vec<String> = pos.iter().map(|x| format!("pos(f({x})).")).collect();
        exs.extend(neg.iter().map(|x| format!("neg(f({x})).")));
        let task = parse_task_sources(MICRO_BIAS, &facts.bk_text(), &exs.join("\n")).expect("micro task parses");
        return Micro { facts, pos, neg, task };
    }
}

/// Smallest size of a program of at most two clauses that proves every
/// positive and no negative, or `None`.
pub fn oracle_min_size(m: &Micro) -> Option<usize> {
    let clauses = micro_clauses(&m.facts.domain);
    let full: u32 = (1 << m.pos.len()) - 1;
    let mut usable: Vec<(usize, u32)> = Vec::new();
    for c in &clauses {
        if m.neg.iter().any(|&x| covers(c, &m.facts, x)) {
            continue;
        }
        let mask = m.pos.iter().enumerate().filter(|(_, &x)| covers(c, &m.facts, x)).fold(0u32, |a, (i, _)| a | 1 << i);
        if mask != 0 {
            usable.push((c.size(), mask));
        }
    }
    let mut best: Option<usize> = None;
    for (i, &(s1, m1)) in usable.iter().enumerate() {
        if m1 == full {
            best = Some(best.map_or(s1, |b| b.min(s1)));
        }
        for &(s2, m2) in &usable[i + 1..] {
            if m1 | m2 == full {
                best = Some(best.map_or(s1 + s2, |b| b.min(s1 + s2)));
            }
        }
    }
    best
}

/// Converts a magic-free (or instantiated) engine clause of the micro
/// language into an oracle clause.
pub fn to_oclause(c: &Clause, consts: &[(Var, i64)]) -> OClause {
    let mut names: Vec<Var> = Vec::new();
    let mut t = |term: &Term| match term {
        Term::Const(ConstValue::Int(i)) => OTerm::C(*i),
        Term::Const(other) => panic!("unexpected constant {other:?}"),
        Term::Var(v) => match consts.iter().find(|(m, _)| m == v) {
            Some((_, k)) => OTerm::C(*k),
            None => {
                let i = names.iter().position(|n| n == v).unwrap_or_else(|| {
                    names.push(*v);
                    names.len() - 1
                });
                OTerm::V(i as u8)
            }
        },
    };
    let head = t(&c.head.args[0]);
    let body = c
        .ordinary_body()
        .map(|l| {
            let pred: &'static str = match &*l.pred {
                "p" => "p",
                "q" => "q",
                other => panic!("unexpected predicate {other}"),
            };
            (pred, l.args.iter().map(&mut t).collect())
        })
        .collect();
    OClause { head, body }
}

/// Whether a learned program proves every positive and no negative,
/// judged by the brute-force evaluator.
pub fn oracle_consistent(h: &Hypothesis, m: &Micro) -> bool {
    let cs: Vec<OClause> = h.clauses().iter().map(|c| to_oclause(c, &[])).collect();
    let proves = |x: i64| cs.iter().any(|c| covers(c, &m.facts, x));
    m.pos.iter().all(|&x| proves(x)) && !m.neg.iter().any(|&x| proves(x))
}

/// Every tuple of domain constants for the magic variables of `h` under
/// which the instantiated program proves at least one positive.
pub fn oracle_relevant(h: &Hypothesis, facts: &Facts, pos: &[i64]) -> BTreeSet<Vec<i64>> {
    let order: Vec<(usize, Var)> =
        h.clauses().iter().enumerate().flat_map(|(i, c)| c.magic_vars().into_iter().map(move |v| (i, v))).collect();
    let d = &facts.domain;
    let mut out = BTreeSet::new();
    for mut code in 0..d.len().pow(order.len() as u32) {
        let tuple: Vec<i64> = order
            .iter()
            .map(|_| {
                let v = d[code % d.len()];
                code /= d.len();
                v
            })
            .collect();
        let program: Vec<OClause> = h
            .clauses()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let consts: Vec<(Var, i64)> =
                    order.iter().zip(&tuple).filter(|((ci, _), _)| *ci == i).map(|((_, v), k)| (*v, *k)).collect();
                to_oclause(c, &consts)
            })
            .collect();
        if pos.iter().any(|&x| program.iter().any(|c| covers(c, facts, x))) {
            out.insert(tuple);
        }
    }
    out
}

/// A finite-domain task over up to `n` constants with `f/1` examples.
pub fn domain_task(seed: u64, n: i64) -> Micro {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let domain: Vec<i64> = (0..n).collect();
    let mut facts = Facts { domain: domain.clone(), ..Facts::default() };
    for a in 0..n {
        for _ in 0..2 {
            facts.p.insert((a, rng.gen_range(0..n)));
        }
        if rng.gen_bool(0.3) {
            facts.q.insert(a);
        }
    }
    let mut shuffled = domain.clone();
    for i in (1..shuffled.len()).rev() {
        shuffled.swap(i, rng.gen_range(0..=i));
    }
    let pos: Vec<i64> = shuffled[..4].to_vec();
    let neg: Vec<i64> = shuffled[4..7].to_vec();
    let mut exs: Vec<String> = pos.iter().map(|x| format!("pos(f({x})).")).collect();
    exs.extend(neg.iter().map(|x| format!("neg(f({x})).")));
    let task = parse_task_sources(MICRO_BIAS, &facts.bk_text(), &exs.join("\n")).expect("domain task parses");
    Micro { facts, pos, neg, task }
}

pub fn ints(b: &[ConstValue]) -> Vec<i64> {
    b.iter()
        .map(|v| match v {
            ConstValue::Int(i) => *i,
            other => panic!("expected an integer, found {other:?}"),
        })
        .collect()
}
