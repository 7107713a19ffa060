use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::interp::FactBase;
use crate::logic::{Atom, ConstValue, Hypothesis};
use crate::taskio::{parse_bias, parse_program, TaskSpec};

use super::{BenchError, Family, GeneratedTask, Params};

fn int(x: i64) -> ConstValue {
    ConstValue::Int(x)
}

fn int_list(xs: &[i64]) -> ConstValue {
    ConstValue::list(xs.iter().map(|&x| int(x)))
}

fn bad(key: &str, message: &str) -> BenchError {
    BenchError::BadParam { key: key.to_string(), message: message.to_string() }
}

fn need(cond: bool, key: &str, message: &str) -> Result<(), BenchError> {
    if cond {
        Ok(())
    } else {
        Err(bad(key, message))
    }
}

fn target(src: &str) -> Hypothesis {
    parse_program(src).expect("target programs parse")
}

struct Parts {
    bias: &'static str,
    bk: FactBase,
    pos: Vec<Atom>,
    neg: Vec<Atom>,
    holdout_pos: Vec<Atom>,
    holdout_neg: Vec<Atom>,
    target: Hypothesis,
}

/// Builds a task of the given family, reproducibly from `params.get("seed")`.
pub fn gen_task(params: &Params) -> Result<GeneratedTask, BenchError> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.get("seed"));
    for key in ["pos", "neg"] {
        need(params.get(key) >= 1, key, "at least one example is needed")?;
    }
    let parts = match params.family {
        Family::List => list(params, &mut rng)?,
        Family::PowerOf2 => powerof2(params, &mut rng)?,
        Family::Append => append(params, &mut rng)?,
        Family::Pi => pi(params, &mut rng),
        Family::SumK => sumk(params, &mut rng)?,
        Family::MdMini => md_mini(params, &mut rng),
    };
    let bias = parse_bias(parts.bias).expect("family biases parse");
    let task = TaskSpec::new(bias, parts.bk, parts.pos, parts.neg)
        .map_err(|e| bad("seed", &format!("generated an invalid task: {e}")))?;
    Ok(GeneratedTask { task, holdout_pos: parts.holdout_pos, holdout_neg: parts.holdout_neg, target: parts.target })
}

/// Draws `n` items with `f`, retrying duplicates and anything in `avoid`.
fn distinct<T: Ord + Clone>(n: usize, avoid: &BTreeSet<T>, mut f: impl FnMut() -> T) -> Vec<T> {
    let mut seen = avoid.clone();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = f();
        if seen.insert(x.clone()) {
            out.push(x);
        }
    }
    out
}

fn split<T: Clone>(items: Vec<T>, n: usize) -> (Vec<T>, Vec<T>) {
    let rest = items[n..].to_vec();
    let mut first = items;
    first.truncate(n);
    (first, rest)
}

const LIST_BIAS: &str = "head_pred(f,1).
body_pred(head,2).
body_pred(tail,2).
body_pred(length,2).
body_pred(last,2).
body_pred(geq,2).
body_pred(empty,1).
type(f,(list,)).
type(head,(list,element)).
type(tail,(list,list)).
type(length,(list,int)).
type(last,(list,element)).
type(geq,(element,element)).
type(empty,(list,)).
direction(f,(in,)).
direction(head,(in,out)).
direction(tail,(in,out)).
direction(length,(in,out)).
direction(last,(in,out)).
direction(geq,(in,in)).
direction(empty,(in,)).
builtin(head,2).
builtin(tail,2).
builtin(length,2).
builtin(last,2).
builtin(geq,2).
builtin(empty,1).
magic_type(element).
max_vars(3).
max_body(2).
max_clauses(2).
max_magic(1).
enable_recursion.
";

/// Lists over the pool `0..c`; positives hold a 7 at a random position.
fn list(p: &Params, rng: &mut ChaCha8Rng) -> Result<Parts, BenchError> {
    let (c, len) = (p.get("c") as i64, p.get("len") as usize);
    need(c >= 9, "c", "the pool needs at least 9 constants")?;
    need(len >= 1, "len", "lists must be nonempty")?;
    let (n_pos, n_neg, h) = (p.get("pos") as usize, p.get("neg") as usize, p.get("holdout") as usize);
    let other = |rng: &mut ChaCha8Rng| {
        let x = rng.gen_range(0..c - 1);
        if x >= 7 {
            x + 1
        } else {
            x
        }
    };
    let mut positive = || {
        let mut xs: Vec<i64> = (0..len).map(|_| other(rng)).collect();
        xs[rng.gen_range(0..len)] = 7;
        int_list(&xs)
    };
    let pos = distinct(n_pos + h, &BTreeSet::new(), &mut positive);
    let mut negative = || int_list(&(0..len).map(|_| other(rng)).collect::<Vec<_>>());
    let neg = distinct(n_neg + h, &BTreeSet::new(), &mut negative);
    let f = |l: ConstValue| Atom::new("f", vec![l]);
    let (pos, holdout_pos) = split(pos.into_iter().map(f).collect(), n_pos);
    let (neg, holdout_neg) = split(neg.into_iter().map(f).collect(), n_neg);
    let bk = (0..c).map(|x| Atom::new("element", vec![int(x)])).collect();
    Ok(Parts {
        bias: LIST_BIAS,
        bk,
        pos,
        neg,
        holdout_pos,
        holdout_neg,
        target: target("f(A):-head(A,7).\nf(A):-tail(A,B),f(B)."),
    })
}

const POWEROF2_BIAS: &str = "head_pred(multiple,1).
body_pred(div,3).
type(multiple,(number,)).
type(div,(number,number,number)).
direction(multiple,(in,)).
direction(div,(in,in,out)).
builtin(div,3).
max_vars(3).
max_body(2).
max_clauses(2).
max_magic(2).
enable_recursion.
";

/// Powers of two in `2..=2^max_exp` against other numbers in that range.
/// The held-out positives are every power in range.
fn powerof2(p: &Params, rng: &mut ChaCha8Rng) -> Result<Parts, BenchError> {
    let e = p.get("max_exp");
    need((2..=20).contains(&e), "max_exp", "must be between 2 and 20")?;
    let top = 1i64 << e;
    let (n_pos, n_neg, h) = (p.get("pos") as usize, p.get("neg") as usize, p.get("holdout") as usize);
    need(n_pos <= e as usize, "pos", "more positives than powers in range")?;
    let others = top - 1 - e as i64;
    need((n_neg + h) as i64 <= others, "neg", "more negatives than non-powers in range")?;
    let mut powers: Vec<i64> = (1..=e).map(|k| 1i64 << k).collect();
    let holdout_pos = powers.iter().map(|&x| Atom::new("multiple", vec![int(x)])).collect();
    powers.shuffle(rng);
    powers.truncate(n_pos);
    let non_power = |rng: &mut ChaCha8Rng| loop {
        let x = rng.gen_range(2..=top);
        if x & (x - 1) != 0 {
            return x;
        }
    };
    let negs = distinct(n_neg + h, &BTreeSet::new(), || non_power(rng));
    let m = |x: i64| Atom::new("multiple", vec![int(x)]);
    let (neg, holdout_neg) = split(negs.into_iter().map(m).collect(), n_neg);
    let bk = (1..=top).map(|x| Atom::new("number", vec![int(x)])).collect();
    Ok(Parts {
        bias: POWEROF2_BIAS,
        bk,
        pos: powers.into_iter().map(m).collect(),
        neg,
        holdout_pos,
        holdout_neg,
        target: target("multiple(1).\nmultiple(A):-div(A,2,B),multiple(B)."),
    })
}

const APPEND_BIAS: &str = "head_pred(f,1).
body_pred(append,3).
body_pred(head,2).
body_pred(tail,2).
type(f,(list,)).
type(append,(list,list,list)).
type(head,(list,element)).
type(tail,(list,list)).
direction(f,(in,)).
direction(head,(in,out)).
direction(tail,(in,out)).
builtin(append,3).
builtin(head,2).
builtin(tail,2).
magic_type(list).
max_vars(3).
max_body(2).
max_clauses(1).
max_magic(1).
";

/// Lists over `0..c`; positives end with a two-element suffix drawn from
/// the seed, negatives end otherwise.
fn append(p: &Params, rng: &mut ChaCha8Rng) -> Result<Parts, BenchError> {
    let (c, len) = (p.get("c") as i64, p.get("len") as usize);
    need(c >= 2, "c", "the pool needs at least 2 constants")?;
    need(len >= 3, "len", "lists need at least 3 elements")?;
    let (n_pos, n_neg, h) = (p.get("pos") as usize, p.get("neg") as usize, p.get("holdout") as usize);
    let suffix = [rng.gen_range(0..c), rng.gen_range(0..c)];
    let mut positive = || {
        let mut xs: Vec<i64> = (0..len - 2).map(|_| rng.gen_range(0..c)).collect();
        xs.extend(suffix);
        int_list(&xs)
    };
    let pos = distinct(n_pos + h, &BTreeSet::new(), &mut positive);
    let mut negative = || loop {
        let xs: Vec<i64> = (0..len).map(|_| rng.gen_range(0..c)).collect();
        if xs[len - 2..] != suffix {
            return int_list(&xs);
        }
    };
    let neg = distinct(n_neg + h, &BTreeSet::new(), &mut negative);
    let f = |l: ConstValue| Atom::new("f", vec![l]);
    let (pos, holdout_pos) = split(pos.into_iter().map(f).collect(), n_pos);
    let (neg, holdout_neg) = split(neg.into_iter().map(f).collect(), n_neg);
    Ok(Parts {
        bias: APPEND_BIAS,
        bk: FactBase::new(),
        pos,
        neg,
        holdout_pos,
        holdout_neg,
        target: target(&format!("f(A):-append(B,{},A).", int_list(&suffix))),
    })
}

const PI_BIAS: &str = "head_pred(area,2).
body_pred(square,2).
body_pred(mult,3).
body_pred(add,3).
body_pred(subtract,3).
type(area,(real,real)).
type(square,(real,real)).
type(mult,(real,real,real)).
type(add,(real,real,real)).
type(subtract,(real,real,real)).
direction(area,(in,out)).
direction(square,(in,out)).
direction(mult,(in,in,out)).
direction(add,(in,in,out)).
direction(subtract,(in,in,out)).
builtin(square,2).
builtin(mult,3).
builtin(add,3).
builtin(subtract,3).
magic_type(real).
max_vars(4).
max_body(2).
max_clauses(1).
max_magic(1).
";

/// Smallest violation of `area = pi r^2` in a negative, both in the area
/// itself and in the implied constant.
pub(crate) const PI_MARGIN: f64 = 1e-2;

/// Radius and area pairs; negatives use a perturbed constant.
fn pi(p: &Params, rng: &mut ChaCha8Rng) -> Parts {
    use std::f64::consts::PI;
    let (n_pos, n_neg, h) = (p.get("pos") as usize, p.get("neg") as usize, p.get("holdout") as usize);
    let example = |r: f64, a: f64| Atom::new("area", vec![ConstValue::Float(r), ConstValue::Float(a)]);
    let radius = |rng: &mut ChaCha8Rng| loop {
        let r: f64 = rng.gen_range(0.0..10.0);
        if r > 0.0 {
            return r;
        }
    };
    let pos: Vec<Atom> = (0..n_pos + h).map(|_| {
        let r = radius(rng);
        example(r, PI * r * r)
    })
    .collect();
    let neg: Vec<Atom> = (0..n_neg + h)
        .map(|_| loop {
            let r = radius(rng);
            let d: f64 = rng.gen_range(0.05..1.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let a = (PI + d) * r * r;
            if (a - PI * r * r).abs() > PI_MARGIN {
                return example(r, a);
            }
        })
        .collect();
    let (pos, holdout_pos) = split(pos, n_pos);
    let (neg, holdout_neg) = split(neg, n_neg);
    Parts {
        bias: PI_BIAS,
        bk: FactBase::new(),
        pos,
        neg,
        holdout_pos,
        holdout_neg,
        target: target(&format!("area(A,B):-square(A,C),mult(C,{},B).", ConstValue::Float(PI))),
    }
}

const SUMK_BIAS: &str = "head_pred(sumk,1).
body_pred(member,2).
body_pred(add,3).
type(sumk,(list,)).
type(member,(list,number)).
type(add,(number,number,number)).
direction(sumk,(in,)).
direction(member,(in,out)).
builtin(member,2).
builtin(add,3).
magic_type(number).
max_vars(4).
max_body(3).
max_clauses(1).
max_magic(1).
";

/// Lists over `1..=max`. Positives hold two elements at distinct positions
/// summing to `k`; negatives hold no two elements (or one doubled) that do.
fn sumk(p: &Params, rng: &mut ChaCha8Rng) -> Result<Parts, BenchError> {
    let (max, len) = (p.get("max") as i64, p.get("len") as usize);
    need(max >= 4, "max", "must be at least 4")?;
    need(len >= 2, "len", "lists need at least 2 elements")?;
    need((len as i64) < max / 2, "len", "lists too long to avoid the sum in negatives")?;
    let k = match p.get("k") as i64 {
        0 => rng.gen_range(max / 2..=max),
        k => k,
    };
    need((3..=2 * max - 1).contains(&k), "k", "no pair of distinct-position elements can sum to it")?;
    let (n_pos, n_neg, h) = (p.get("pos") as usize, p.get("neg") as usize, p.get("holdout") as usize);
    let mut positive = || {
        let mut xs: Vec<i64> = (0..len).map(|_| rng.gen_range(1..=max)).collect();
        let a = rng.gen_range((k - max).max(1)..=(k - 1).min(max));
        let i = rng.gen_range(0..len);
        let j = (i + rng.gen_range(1..len)) % len;
        xs[i] = a;
        xs[j] = k - a;
        int_list(&xs)
    };
    let pos = distinct(n_pos + h, &BTreeSet::new(), &mut positive);
    let mut negative = || {
        let mut xs: Vec<i64> = Vec::with_capacity(len);
        while xs.len() < len {
            let x = rng.gen_range(1..=max);
            if 2 * x != k && !xs.iter().any(|&y| x + y == k) {
                xs.push(x);
            }
        }
        int_list(&xs)
    };
    let neg = distinct(n_neg + h, &BTreeSet::new(), &mut negative);
    let s = |l: ConstValue| Atom::new("sumk", vec![l]);
    let (pos, holdout_pos) = split(pos.into_iter().map(s).collect(), n_pos);
    let (neg, holdout_neg) = split(neg.into_iter().map(s).collect(), n_neg);
    Ok(Parts {
        bias: SUMK_BIAS,
        bk: FactBase::new(),
        pos,
        neg,
        holdout_pos,
        holdout_neg,
        target: target(&format!("sumk(A):-member(A,B),member(A,C),add(B,C,{k}).")),
    })
}

const MD_BIAS: &str = "head_pred(next_val,2).
body_pred(does,3).
body_pred(true_val,2).
body_pred(succ,2).
type(next_val,(state,int)).
type(does,(state,role,action)).
type(true_val,(state,int)).
type(succ,(int,int)).
direction(next_val,(in,in)).
builtin(succ,2).
magic_type(int).
magic_type(role).
magic_type(action).
max_vars(5).
max_body(3).
max_clauses(2).
max_magic(3).
";

/// Values in `0..=9`. Pressing the button sets the next value to 5;
/// otherwise it decays by one.
fn md_mini(p: &Params, rng: &mut ChaCha8Rng) -> Parts {
    let (n_pos, n_neg, h) = (p.get("pos") as usize, p.get("neg") as usize, p.get("holdout") as usize);
    let mut bk = FactBase::new();
    let mut state_no = 0;
    let mut state = |rng: &mut ChaCha8Rng, press: bool, bk: &mut FactBase| {
        state_no += 1;
        let s = ConstValue::sym(&format!("s{state_no}"));
        let v = rng.gen_range(1..=9);
        let action = if press { "press_button" } else { "noop" };
        bk.insert(Atom::new("does", vec![s.clone(), ConstValue::sym("player"), ConstValue::sym(action)]));
        bk.insert(Atom::new("true_val", vec![s.clone(), int(v)]));
        (s, if press { 5 } else { v - 1 })
    };
    let mut examples = |n: usize, positive: bool, rng: &mut ChaCha8Rng, bk: &mut FactBase| -> Vec<Atom> {
        (0..n)
            .map(|i| {
                // Alternate actions so both clauses are needed.
                let (s, next) = state(rng, i % 2 == 0, bk);
                let w = if positive {
                    next
                } else {
                    loop {
                        let w = rng.gen_range(0..=9);
                        if w != next {
                            break w;
                        }
                    }
                };
                Atom::new("next_val", vec![s, int(w)])
            })
            .collect()
    };
    let pos = examples(n_pos, true, rng, &mut bk);
    let neg = examples(n_neg, false, rng, &mut bk);
    let holdout_pos = examples(h, true, rng, &mut bk);
    let holdout_neg = examples(h, false, rng, &mut bk);
    Parts {
        bias: MD_BIAS,
        bk,
        pos,
        neg,
        holdout_pos,
        holdout_neg,
        target: target(
            "next_val(A,5):-does(A,player,press_button).\n\
             next_val(A,B):-does(A,player,noop),true_val(A,C),succ(B,C).",
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_family_generates() {
        for f in Family::ALL {
            let g = gen_task(&Params::new(f)).unwrap();
            assert_eq!(g.task.pos.len(), 10, "{f}");
            assert_eq!(g.task.neg.len(), 10, "{f}");
            assert!(!g.target.has_magic());
        }
    }

    #[test]
    fn bad_params() {
        assert!(gen_task(&Params::new(Family::List).set("c", 3).unwrap()).is_err());
        assert!(gen_task(&Params::new(Family::PowerOf2).set("pos", 11).unwrap()).is_err());
        assert!(gen_task(&Params::new(Family::SumK).set("k", 1).unwrap()).is_err());
        assert!(gen_task(&Params::new(Family::Pi).set("pos", 0).unwrap()).is_err());
    }
}
