//! Invertible builtin relations over numbers and lists.
//!
//! Each builtin is evaluated with some arguments bound and returns every
//! full argument tuple consistent with them. A call with too few bound
//! arguments for any supported mode returns `None`; the solver treats that
//! as an instantiation failure and flags the query as incomplete.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use crate::logic::ConstValue;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Builtin {
    Head,
    Tail,
    Last,
    Length,
    Empty,
    Member,
    Append,
    Geq,
    Even,
    Odd,
    Zero,
    One,
    Succ,
    Decrement,
    Add,
    Subtract,
    Mult,
    Div,
    Square,
    Sum,
}

type Tuples = Vec<Vec<ConstValue>>;

impl Builtin {
    pub const ALL: [Builtin; 20] = [
        Builtin::Head,
        Builtin::Tail,
        Builtin::Last,
        Builtin::Length,
        Builtin::Empty,
        Builtin::Member,
        Builtin::Append,
        Builtin::Geq,
        Builtin::Even,
        Builtin::Odd,
        Builtin::Zero,
        Builtin::One,
        Builtin::Succ,
        Builtin::Decrement,
        Builtin::Add,
        Builtin::Subtract,
        Builtin::Mult,
        Builtin::Div,
        Builtin::Square,
        Builtin::Sum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Head => "head",
            Builtin::Tail => "tail",
            Builtin::Last => "last",
            Builtin::Length => "length",
            Builtin::Empty => "empty",
            Builtin::Member => "member",
            Builtin::Append => "append",
            Builtin::Geq => "geq",
            Builtin::Even => "even",
            Builtin::Odd => "odd",
            Builtin::Zero => "zero",
            Builtin::One => "one",
            Builtin::Succ => "succ",
            Builtin::Decrement => "decrement",
            Builtin::Add => "add",
            Builtin::Subtract => "subtract",
            Builtin::Mult => "mult",
            Builtin::Div => "div",
            Builtin::Square => "square",
            Builtin::Sum => "sum",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Builtin::Empty | Builtin::Even | Builtin::Odd | Builtin::Zero | Builtin::One => 1,
            Builtin::Append | Builtin::Add | Builtin::Subtract | Builtin::Mult | Builtin::Div => 3,
            _ => 2,
        }
    }

    /// Whether some supported mode accepts this pattern of bound arguments.
    pub fn ready(self, bound: &[bool]) -> bool {
        let n = bound.iter().filter(|b| **b).count();
        match self {
            Builtin::Head
            | Builtin::Tail
            | Builtin::Last
            | Builtin::Length
            | Builtin::Empty
            | Builtin::Member
            | Builtin::Sum
            | Builtin::Even
            | Builtin::Odd
            | Builtin::Zero
            | Builtin::One => bound[0],
            Builtin::Geq => n == 2,
            Builtin::Succ | Builtin::Decrement | Builtin::Square => n >= 1,
            Builtin::Append => n >= 2 || bound[2],
            Builtin::Add | Builtin::Subtract | Builtin::Mult => n >= 2,
            Builtin::Div => n >= 2 || bound[0],
        }
    }

    /// All argument tuples consistent with the bound arguments, or `None`
    /// when this binding pattern is not a supported mode.
    pub fn eval(self, args: &[Option<&ConstValue>], eps: f64) -> Option<Tuples> {
        debug_assert_eq!(args.len(), self.arity());
        if !self.ready(&args.iter().map(Option::is_some).collect::<Vec<_>>()) {
            return None;
        }
        match self {
            Builtin::Head => Some(list_fn(args, eps, |l| l.first().cloned())),
            Builtin::Last => Some(list_fn(args, eps, |l| l.last().cloned())),
            Builtin::Tail => Some(list_fn(args, eps, |l| {
                (!l.is_empty()).then(|| ConstValue::list(l[1..].iter().cloned()))
            })),
            Builtin::Length => Some(list_fn(args, eps, |l| Some(ConstValue::Int(l.len() as i64)))),
            Builtin::Sum => Some(list_fn(args, eps, sum)),
            Builtin::Empty => Some(test(args, |c| c.as_list().is_some_and(<[_]>::is_empty))),
            Builtin::Member => Some(member(args, eps)),
            Builtin::Append => Some(append(args, eps)),
            Builtin::Even => Some(test(args, |c| matches!(c, ConstValue::Int(i) if i % 2 == 0))),
            Builtin::Odd => Some(test(args, |c| matches!(c, ConstValue::Int(i) if i % 2 != 0))),
            Builtin::Zero => Some(test(args, |c| c.is_numeric() && c.matches(&ConstValue::Int(0), eps))),
            Builtin::One => Some(test(args, |c| c.is_numeric() && c.matches(&ConstValue::Int(1), eps))),
            Builtin::Geq => {
                let (Some(a), Some(b)) = (num(args[0]?), num(args[1]?)) else { return Some(vec![]) };
                let ok = match (a, b) {
                    (Num::I(x), Num::I(y)) => x >= y,
                    _ => {
                        let (x, y) = (a.f(), b.f());
                        x >= y || crate::logic::float_close(x, y, eps)
                    }
                };
                Some(if ok { vec![vec![args[0]?.clone(), args[1]?.clone()]] } else { vec![] })
            }
            Builtin::Succ => Some(pair_int(args, eps, |a| (a >= 0).then(|| a.checked_add(1)).flatten(), |b| {
                (b >= 1).then(|| b - 1)
            })),
            Builtin::Decrement => Some(pair_int(args, eps, |a| a.checked_sub(1), |b| b.checked_add(1))),
            Builtin::Square => Some(square(args, eps)),
            Builtin::Add => triple(args, eps, |a, b| a.add(b), |b, c| c.sub(b).map(Some), |a, c| c.sub(a).map(Some)),
            Builtin::Subtract => {
                triple(args, eps, |a, b| a.sub(b), |b, c| c.add(b).map(Some), |a, c| a.sub(c).map(Some))
            }
            Builtin::Mult => triple(args, eps, |a, b| a.mul(b), |b, c| inverse_mult(c, b), |a, c| inverse_mult(c, a)),
            Builtin::Div => {
                if args[1].is_none() && args[2].is_none() {
                    return divisor_pairs(args[0]?);
                }
                triple(
                    args,
                    eps,
                    |a, b| a.div_exact(b),
                    |b, c| if b.is_zero() { Some(None) } else { b.mul(c).map(Some) },
                    |a, c| {
                        if c.is_zero() {
                            // a/b = 0 holds for every non-zero b when a = 0.
                            return if a.is_zero() { None } else { Some(None) };
                        }
                        Some(a.div_exact(c).filter(|b| !b.is_zero()))
                    },
                )
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Num {
    I(i64),
    F(f64),
}

fn num(c: &ConstValue) -> Option<Num> {
    match c {
        ConstValue::Int(i) => Some(Num::I(*i)),
        ConstValue::Float(x) => Some(Num::F(*x)),
        _ => None,
    }
}

impl Num {
    fn f(self) -> f64 {
        match self {
            Num::I(i) => i as f64,
            Num::F(x) => x,
        }
    }

    fn is_zero(self) -> bool {
        self.f() == 0.0
    }

    fn float(x: f64) -> Option<Num> {
        x.is_finite().then_some(Num::F(x))
    }

    fn add(self, o: Num) -> Option<Num> {
        match (self, o) {
            (Num::I(a), Num::I(b)) => a.checked_add(b).map(Num::I),
            _ => Num::float(self.f() + o.f()),
        }
    }

    fn sub(self, o: Num) -> Option<Num> {
        match (self, o) {
            (Num::I(a), Num::I(b)) => a.checked_sub(b).map(Num::I),
            _ => Num::float(self.f() - o.f()),
        }
    }

    fn mul(self, o: Num) -> Option<Num> {
        match (self, o) {
            (Num::I(a), Num::I(b)) => a.checked_mul(b).map(Num::I),
            _ => Num::float(self.f() * o.f()),
        }
    }

    /// Integer division succeeds only when exact.
    fn div_exact(self, o: Num) -> Option<Num> {
        if o.is_zero() {
            return None;
        }
        match (self, o) {
            (Num::I(a), Num::I(b)) => (a.checked_rem(b)? == 0).then(|| a.checked_div(b)).flatten().map(Num::I),
            _ => Num::float(self.f() / o.f()),
        }
    }

    fn value(self) -> ConstValue {
        match self {
            Num::I(i) => ConstValue::Int(i),
            Num::F(x) => ConstValue::Float(x),
        }
    }
}

/// `a` such that `a * b = c`. `None` means the solution set is infinite.
fn inverse_mult(c: Num, b: Num) -> Option<Option<Num>> {
    if b.is_zero() {
        return if c.is_zero() { None } else { Some(None) };
    }
    Some(c.div_exact(b))
}

fn clone_args(args: &[Option<&ConstValue>]) -> Vec<ConstValue> {
    args.iter().map(|a| a.expect("bound").clone()).collect()
}

/// Fills or checks argument `i` with `value`.
fn settle(args: &[Option<&ConstValue>], i: usize, value: ConstValue, eps: f64) -> Tuples {
    match args[i] {
        Some(bound) if bound.matches(&value, eps) => vec![clone_args(args)],
        Some(_) => vec![],
        None => {
            let mut row: Vec<ConstValue> = args.iter().map(|a| a.cloned().unwrap_or(ConstValue::Int(0))).collect();
            row[i] = value;
            vec![row]
        }
    }
}

fn test(args: &[Option<&ConstValue>], pred: impl Fn(&ConstValue) -> bool) -> Tuples {
    match args[0] {
        Some(c) if pred(c) => vec![vec![c.clone()]],
        _ => vec![],
    }
}

fn list_fn(args: &[Option<&ConstValue>], eps: f64, f: impl Fn(&[ConstValue]) -> Option<ConstValue>) -> Tuples {
    match args[0].and_then(ConstValue::as_list).and_then(f) {
        Some(v) => settle(args, 1, v, eps),
        None => vec![],
    }
}

fn sum(items: &[ConstValue]) -> Option<ConstValue> {
    let mut acc = Num::I(0);
    for item in items {
        acc = acc.add(num(item)?)?;
    }
    Some(acc.value())
}

fn member(args: &[Option<&ConstValue>], eps: f64) -> Tuples {
    let Some(items) = args[0].and_then(ConstValue::as_list) else { return vec![] };
    match args[1] {
        Some(e) => {
            if items.iter().any(|x| x.matches(e, eps)) {
                vec![clone_args(args)]
            } else {
                vec![]
            }
        }
        None => {
            let mut seen = HashSet::new();
            items
                .iter()
                .filter(|x| seen.insert(*x))
                .map(|x| vec![args[0].unwrap().clone(), x.clone()])
                .collect()
        }
    }
}

fn append(args: &[Option<&ConstValue>], eps: f64) -> Tuples {
    let lists: Vec<Option<&[ConstValue]>> = args.iter().map(|a| a.map(|c| c.as_list())).map(|a| a.flatten()).collect();
    if args.iter().zip(&lists).any(|(a, l)| a.is_some() && l.is_none()) {
        return vec![];
    }
    match lists[2] {
        Some(whole) => {
            let mut out = Vec::new();
            for k in 0..=whole.len() {
                let front = ConstValue::list(whole[..k].iter().cloned());
                let back = ConstValue::list(whole[k..].iter().cloned());
                if args[0].is_some_and(|a| !a.matches(&front, eps)) {
                    continue;
                }
                if args[1].is_some_and(|b| !b.matches(&back, eps)) {
                    continue;
                }
                out.push(vec![front, back, args[2].unwrap().clone()]);
            }
            out
        }
        None => {
            let joined = ConstValue::list(lists[0].unwrap().iter().chain(lists[1].unwrap()).cloned());
            vec![vec![args[0].unwrap().clone(), args[1].unwrap().clone(), joined]]
        }
    }
}

/// Integer-only binary relation `b = fwd(a)`, `a = back(b)`.
fn pair_int(
    args: &[Option<&ConstValue>],
    eps: f64,
    fwd: impl Fn(i64) -> Option<i64>,
    back: impl Fn(i64) -> Option<i64>,
) -> Tuples {
    let int = |c: &ConstValue| match c {
        ConstValue::Int(i) => Some(*i),
        _ => None,
    };
    match (args[0], args[1]) {
        (Some(a), _) => match int(a).and_then(&fwd) {
            Some(b) => settle(args, 1, ConstValue::Int(b), eps),
            None => vec![],
        },
        (None, Some(b)) => match int(b).and_then(&back) {
            Some(a) => settle(args, 0, ConstValue::Int(a), eps),
            None => vec![],
        },
        (None, None) => vec![],
    }
}

fn square(args: &[Option<&ConstValue>], eps: f64) -> Tuples {
    if let Some(a) = args[0] {
        return match num(a).and_then(|x| x.mul(x)) {
            Some(b) => settle(args, 1, b.value(), eps),
            None => vec![],
        };
    }
    let roots: Vec<Num> = match args[1].and_then(num) {
        Some(Num::I(b)) if b >= 0 => {
            let r = (b as f64).sqrt().round() as i64;
            let exact = (r - 1..=r + 1).find(|c| *c >= 0 && c.checked_mul(*c) == Some(b));
            exact.map_or(vec![], |r| vec![Num::I(r), Num::I(-r)])
        }
        Some(Num::F(b)) if b >= 0.0 => {
            let r = b.sqrt();
            vec![Num::F(r), Num::F(-r)]
        }
        _ => vec![],
    };
    let mut out: Tuples = Vec::new();
    for r in roots {
        let row = vec![r.value(), args[1].unwrap().clone()];
        if !out.contains(&row) {
            out.push(row);
        }
    }
    out
}

type Partial = Option<Option<Num>>;

/// A ternary arithmetic relation `c = fwd(a, b)` with inverses for `a`
/// and `b`. Inverses return `None` when the solution set is infinite.
fn triple(
    args: &[Option<&ConstValue>],
    eps: f64,
    fwd: impl Fn(Num, Num) -> Option<Num>,
    solve_a: impl Fn(Num, Num) -> Partial,
    solve_b: impl Fn(Num, Num) -> Partial,
) -> Option<Tuples> {
    let nums: Vec<Option<Num>> = args.iter().map(|a| a.and_then(num)).collect();
    if args.iter().zip(&nums).any(|(a, n)| a.is_some() && n.is_none()) {
        return Some(vec![]);
    }
    let emit = |i: usize, v: Option<Num>| match v {
        Some(v) => settle(args, i, v.value(), eps),
        None => vec![],
    };
    Some(match (nums[0], nums[1], nums[2]) {
        (Some(a), Some(b), _) => emit(2, fwd(a, b)),
        (None, Some(b), Some(c)) => emit(0, solve_a(b, c)?),
        (Some(a), None, Some(c)) => emit(1, solve_b(a, c)?),
        _ => return None,
    })
}

/// `div(A, B, C)` with only `A` bound: every positive factorisation
/// `A = B * C`, enumerated by increasing `B`.
fn divisor_pairs(a: &ConstValue) -> Option<Tuples> {
    let ConstValue::Int(n) = *a else {
        return if a.is_numeric() { None } else { Some(vec![]) };
    };
    if n <= 0 {
        return None;
    }
    let mut out = Vec::new();
    let mut d = 1i64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            if d != n / d {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out.sort_unstable();
    Some(out.into_iter().map(|b| vec![ConstValue::Int(n), ConstValue::Int(b), ConstValue::Int(n / b)]).collect())
}

/// Builtins available to a query, keyed by predicate name and arity.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BuiltinRegistry {
    map: BTreeMap<(Arc<str>, usize), Builtin>,
}

impl BuiltinRegistry {
    pub fn empty() -> Self {
        BuiltinRegistry::default()
    }

    pub fn insert(&mut self, b: Builtin) {
        self.map.insert((Arc::from(b.name()), b.arity()), b);
    }

    pub fn get(&self, name: &str, arity: usize) -> Option<Builtin> {
        self.map.get(&(Arc::from(name), arity)).copied()
    }

    pub fn contains(&self, name: &str, arity: usize) -> bool {
        self.get(name, arity).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = Builtin> + '_ {
        self.map.values().copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// The subset of this registry named in `enabled`.
    pub fn restrict<'a>(&self, enabled: impl IntoIterator<Item = (&'a str, usize)>) -> BuiltinRegistry {
        let mut out = BuiltinRegistry::empty();
        for (name, arity) in enabled {
            if let Some(b) = self.get(name, arity) {
                out.insert(b);
            }
        }
        out
    }
}

impl FromIterator<Builtin> for BuiltinRegistry {
    fn from_iter<I: IntoIterator<Item = Builtin>>(iter: I) -> Self {
        let mut r = BuiltinRegistry::empty();
        for b in iter {
            r.insert(b);
        }
        r
    }
}

/// Adds every builtin to `registry`.
pub fn register_builtins(mut registry: BuiltinRegistry) -> BuiltinRegistry {
    for b in Builtin::ALL {
        registry.insert(b);
    }
    registry
}
