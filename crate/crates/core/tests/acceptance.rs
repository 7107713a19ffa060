//! Acceptance run: each criterion prints one PASS/FAIL line and the test
//! fails at the end if any of them failed.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lff::bench::{gen_task, GeneratedTask, Params};
use lff::constraints::ConstraintStore;
use lff::engine::{learn, score};
use lff::generate::{build_table, space_ratio, Generator, SpaceParams};
use lff::logic::{hypothesis_size, Clause, ConstValue, Hypothesis, Literal, Term};
use lff::magic::{evaluate, harvest, lift};
use lff::taskio::{parse_bias, parse_clause, LearnResult, LearnStatus};

use common::*;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn generated(spec: &str) -> GeneratedTask {
    gen_task(&Params::parse(spec).unwrap()).unwrap()
}

fn timed_learn(g: &GeneratedTask) -> (LearnResult, f64) {
    let start = Instant::now();
    let r = learn(&g.task);
    (r, start.elapsed().as_secs_f64())
}

fn holdout_acc(g: &GeneratedTask, h: &Hypothesis) -> f64 {
    score(h, &g.task.background(), &g.holdout_pos, &g.holdout_neg, &g.task.config.budget).unwrap()
}

fn constants(h: &Hypothesis) -> Vec<ConstValue> {
    h.clauses()
        .iter()
        .flat_map(|c| c.body.iter().flat_map(|l| l.args.iter()))
        .filter_map(|t| match t {
            Term::Const(v) => Some(v.clone()),
            Term::Var(_) => None,
        })
        .collect()
}

fn list_equivalent() -> Outcome {
    let g = generated("list(c=200,len=50,pos=10,neg=10,holdout=100,seed=1)");
    let (r, secs) = timed_learn(&g);
    let Some(h) = &r.program else {
        return outcome(false, format!("no program ({:?})", r.status));
    };
    let acc = holdout_acc(&g, h);
    let target_acc = holdout_acc(&g, &g.target);
    let ok = acc == 1.0 && target_acc == 1.0 && secs <= 30.0;
    outcome(ok, format!("accuracy {acc} on 200 held-out, {secs:.3}s, program {}", h.to_string().trim().replace('\n', " ")))
}

fn pool_independent() -> Outcome {
    let mut generated_counts = Vec::new();
    let mut times = Vec::new();
    for pool in [100u64, 10_000, 100_000] {
        let g = generated(&format!("list(c={pool},len=50,pos=10,neg=10,holdout=1,seed=1)"));
        let mut best = f64::INFINITY;
        let mut count = None;
        for _ in 0..5 {
            let (r, secs) = timed_learn(&g);
            if r.status != LearnStatus::Solved {
                return outcome(false, format!("pool {pool}: {:?}", r.status));
            }
            best = best.min(secs);
            count = Some(r.stats.candidates_generated);
        }
        generated_counts.push(count.unwrap());
        times.push(best);
    }
    let same = generated_counts.iter().all(|&c| c == generated_counts[0]);
    let ok = same && times[2] <= 3.0 * times[0];
    outcome(ok, format!("candidates {generated_counts:?}, seconds {:.4} / {:.4} / {:.4}", times[0], times[1], times[2]))
}

fn powerof2_exact() -> Outcome {
    let g = generated("powerof2(max_exp=10,pos=10,neg=10,holdout=100,seed=1)");
    let (r, secs) = timed_learn(&g);
    let Some(h) = &r.program else {
        return outcome(false, format!("no program ({:?})", r.status));
    };
    let acc = holdout_acc(&g, h);
    let ok = *h == g.target && acc == 1.0 && secs <= 10.0;
    outcome(ok, format!("program {}, accuracy {acc}, {secs:.3}s", h.to_string().trim().replace('\n', " ")))
}

fn pi_constant() -> Outcome {
    let g = generated("pi(pos=10,neg=10,holdout=100,seed=1)");
    let (r, secs) = timed_learn(&g);
    let Some(h) = &r.program else {
        return outcome(false, format!("no program ({:?})", r.status));
    };
    let m = constants(h).into_iter().find_map(|v| match v {
        ConstValue::Float(f) => Some(f),
        _ => None,
    });
    let acc = holdout_acc(&g, h);
    let ok = m.is_some_and(|m| (m - std::f64::consts::PI).abs() <= 1e-3) && acc >= 0.99 && secs <= 30.0;
    outcome(ok, format!("M = {m:?}, accuracy {acc}, {secs:.3}s"))
}

fn sumk_constant() -> Outcome {
    let g = generated("sumk(max=500,len=50,pos=10,neg=10,holdout=100,seed=1)");
    let k = constants(&g.target);
    let (r, secs) = timed_learn(&g);
    let Some(h) = &r.program else {
        return outcome(false, format!("no program ({:?})", r.status));
    };
    let learned = constants(h);
    let acc = holdout_acc(&g, h);
    let ok = learned == k && acc == 1.0 && secs <= 60.0;
    outcome(ok, format!("k = {k:?}, learned {learned:?}, accuracy {acc}, {secs:.3}s"))
}

fn append_accuracy() -> Outcome {
    let g = generated("append(c=100,len=10,pos=10,neg=10,holdout=100,seed=1)");
    let (r, secs) = timed_learn(&g);
    let Some(h) = &r.program else {
        return outcome(false, format!("no program ({:?})", r.status));
    };
    let acc = holdout_acc(&g, h);
    outcome(acc >= 0.95 && secs <= 30.0, format!("accuracy {acc}, {secs:.3}s"))
}

fn micro_optimality() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut unsolvable = 0;
    for seed in 0..100u64 {
        let m = micro_task(seed);
        let best = oracle_min_size(&m);
        let r = learn(&m.task);
        let good = match (best, &r.program) {
            (None, None) => {
                unsolvable += 1;
                r.status == LearnStatus::Exhausted
            }
            (Some(s), Some(h)) => r.size == s && oracle_consistent(h, &m),
            _ => false,
        };
        if !good {
            failures.push(format!("seed {seed}: oracle {best:?}, engine {:?} size {}", r.status, r.size));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = failures.is_empty() && secs <= 300.0;
    outcome(ok, format!("100 tasks ({unsolvable} unsolvable), {} violations, {secs:.1}s {failures:?}", failures.len()))
}

fn expected_ratio(p: &SpaceParams, c: u64) -> BigRational {
    let base = BigRational::new(BigInt::from(p.db + c), BigInt::from(p.db));
    let mut out = BigRational::from_integer(BigInt::from(1));
    for _ in 0..p.max_body * p.max_clauses {
        out *= &base;
    }
    out
}

fn space_ratios() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut bad = Vec::new();
    for _ in 0..50 {
        let p = SpaceParams {
            dh: rng.gen_range(1..=3),
            db: rng.gen_range(1..=12),
            vars: rng.gen_range(1..=6),
            arity: rng.gen_range(1..=3),
            max_body: rng.gen_range(1..=5),
            max_clauses: rng.gen_range(1..=3),
        };
        let c = rng.gen_range(0..=50);
        if space_ratio(&p, c) != expected_ratio(&p, c) {
            bad.push(format!("{p:?} c={c}"));
        }
    }
    outcome(bad.is_empty(), format!("50 tuples, {} mismatches {bad:?}", bad.len()))
}

fn magic_hypotheses(task: &lff::taskio::TaskSpec) -> Vec<Hypothesis> {
    let mut g = Generator::new(&task.bias);
    let store = ConstraintStore::new();
    let mut out = Vec::new();
    while let Some(h) = g.next_candidate(&store) {
        if h.size() > 4 {
            break;
        }
        if h.has_magic() {
            out.push(h);
        }
    }
    out
}

fn harvest_complete() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut bad = Vec::new();
    let mut checked = 0;
    for seed in 0..50u64 {
        let m = domain_task(seed, rng.gen_range(8..=20));
        let pool = magic_hypotheses(&m.task);
        let bg = m.task.background();
        for _ in 0..8 {
            let h = &pool[rng.gen_range(0..pool.len())];
            let lh = lift(h).unwrap();
            let got = harvest(&lh, &bg, &m.task.pos, usize::MAX, &m.task.config.budget);
            let report = evaluate(h, &m.task);
            let expected = oracle_relevant(h, &m.facts, &m.pos);
            let harvested: BTreeSet<Vec<i64>> = got.bindings.iter().map(|b| ints(b)).collect();
            let relevant: BTreeSet<Vec<i64>> = report.bindings.iter().map(|b| ints(b)).collect();
            // Derivations that leave a magic variable unbound are filled from
            // observed values, or the report is marked truncated when there is
            // nothing to fill with; only containment is required for them.
            let good = if got.filled || got.truncated {
                harvested.is_subset(&expected) && relevant.is_subset(&expected)
            } else {
                checked += 1;
                harvested == expected && relevant == expected
            };
            if !good {
                bad.push(format!("seed {seed}: {}", h.to_string().trim().replace('\n', " ")));
            }
        }
    }
    outcome(bad.is_empty(), format!("400 hypotheses ({checked} fully bound), {} mismatches {bad:?}", bad.len()))
}

fn magic_size() -> Outcome {
    let c = parse_clause("f(A):-length(A,B),@magic(B).").unwrap();
    let size = hypothesis_size(&Hypothesis::new(vec![c]));
    let bias = parse_bias(
        "head_pred(f,1).\nbody_pred(head,2).\nbody_pred(tail,2).\nbody_pred(odd,1).\nmax_vars(3).\nmax_body(3).\nmax_magic(0).\n",
    )
    .unwrap();
    let table: Vec<Clause> = build_table(&bias).into_iter().map(|t| t.clause).collect();
    let mut runner = TestRunner::new(Config { cases: 512, failure_persistence: None, ..Config::default() });
    let n = table.len();
    let prop = runner.run(&(0..n, 0..n, any::<u8>()), |(i, j, mask)| {
        let clauses = [table[i].clone(), table[j].clone()];
        let marked: Vec<Clause> = clauses
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let mut body = c.body.clone();
                for (bit, v) in c.vars().into_iter().enumerate() {
                    if mask >> (4 * k + bit) & 1 == 1 {
                        body.push(Literal::magic(v));
                    }
                }
                Clause::new(c.head.clone(), body)
            })
            .collect();
        let magic = Hypothesis::new(marked);
        let stripped: usize = magic.clauses().iter().map(|c| c.without_magic().size()).sum();
        prop_assert_eq!(magic.size(), stripped);
        prop_assert_eq!(magic.size(), magic.clauses().iter().map(|c| 1 + c.ordinary_body().count()).sum::<usize>());
        Ok(())
    });
    let ok = size == 2 && prop.is_ok();
    outcome(ok, format!("size {size}, magic invariance {}", if prop.is_ok() { "holds".into() } else { format!("{prop:?}") }))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("1 list program equivalent to the target", list_equivalent),
        ("2 learning cost independent of the constant pool", pool_independent),
        ("3 powerof2 target recovered exactly", powerof2_exact),
        ("4 pi constant within 1e-3", pi_constant),
        ("5 sumk constant exact", sumk_constant),
        ("6 append accuracy", append_accuracy),
        ("7 optimality on 100 micro tasks", micro_optimality),
        ("8 hypothesis space ratio", space_ratios),
        ("9 harvest finds every relevant binding", harvest_complete),
        ("10 magic literals do not count towards size", magic_size),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        let o = run();
        println!("{} criterion {name}: {}", if o.ok { "PASS" } else { "FAIL" }, o.detail);
        if !o.ok {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
