//! The generate, test and constrain loop.

use std::time::{Duration, Instant};

use crate::constraints::{infer, Constraint, ConstraintKind, ConstraintStore};
use crate::generate::Generator;
use crate::interp::{Background, ProveOutcome, Program, ResourceBudget};
use crate::logic::{Atom, Hypothesis, DEFAULT_EPSILON};
use crate::magic::{evaluate_with, instantiate};
use crate::taskio::{LearnResult, LearnStatus, Stats, TaskSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct EngineConfig {
    pub timeout: Duration,
    /// Float tolerance inside the interpreter.
    pub epsilon: f64,
    /// Tolerance for judging learned constants against a known target.
    pub epsilon_task: f64,
    pub max_instantiations: usize,
    pub budget: ResourceBudget,
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            timeout: Duration::from_secs(600),
            epsilon: DEFAULT_EPSILON,
            epsilon_task: 1e-3,
            max_instantiations: 10_000,
            budget: ResourceBudget::default(),
            seed: 0,
        }
    }
}

/// Which examples `prog` entails. Running out of budget counts as not
/// entailed; the second value counts those cases.
pub fn coverage(prog: &Program, bg: &Background, examples: &[Atom], budget: &ResourceBudget) -> (Vec<bool>, u64) {
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

/// Complete on `pos` and consistent on `neg`, checked by direct proofs.
pub fn is_solution(h: &Hypothesis, bg: &Background, pos: &[Atom], neg: &[Atom], budget: &ResourceBudget) -> bool {
    let prog = Program::new(h.clauses(), bg);
    let entailed = |e: &Atom| prog.prove(bg, e, budget) == ProveOutcome::Entailed;
    pos.iter().all(entailed) && !neg.iter().any(entailed)
}

fn kind_counter(stats: &mut Stats, kind: ConstraintKind) -> &mut u64 {
    match kind {
        ConstraintKind::Specialisation => &mut stats.constraints_specialisation,
        ConstraintKind::Generalisation => &mut stats.constraints_generalisation,
        ConstraintKind::Redundancy => &mut stats.constraints_redundancy,
        ConstraintKind::Banish => &mut stats.constraints_banish,
    }
}

/// Searches hypotheses by increasing size and returns the first complete
/// and consistent instantiation found, with magic variables bound.
pub fn learn(task: &TaskSpec) -> LearnResult {
    learn_with_store(task, &mut ConstraintStore::new())
}

/// As [`learn`], leaving the constraints it learned in `store`.
pub fn learn_with_store(task: &TaskSpec, store: &mut ConstraintStore) -> LearnResult {
    let start = Instant::now();
    let bg = task.background();
    let budget = &task.config.budget;
    let n_pos = task.pos.len();
    let mut generator = Generator::new(&task.bias);
    let mut stats = Stats::default();
    let finish = |program: Option<Hypothesis>, status, mut stats: Stats, generator: &Generator| {
        stats.candidates_generated = generator.enumerated();
        stats.elapsed_ms = start.elapsed().as_millis() as u64;
        LearnResult { size: program.as_ref().map_or(0, Hypothesis::size), program, status, stats }
    };
    loop {
        if start.elapsed() >= task.config.timeout {
            return finish(None, LearnStatus::Timeout, stats, &generator);
        }
        let Some(h) = generator.next_candidate(store) else {
            return finish(None, LearnStatus::Exhausted, stats, &generator);
        };
        stats.candidates_tested += 1;
        let report = evaluate_with(&h, task, &bg);
        stats.instantiations_tested += report.bindings.len() as u64;
        stats.budget_exceeded_count += report.budget_exceeded as u64;
        if let Some(i) = report.solution_index(n_pos) {
            if let Ok(program) = instantiate(&h, &report.bindings[i]) {
                if is_solution(&program, &bg, &task.pos, &task.neg, budget) {
                    return finish(Some(program), LearnStatus::Solved, stats, &generator);
                }
            }
        }
        let inferred = if report.truncated {
            vec![Constraint::new(ConstraintKind::Banish, h)]
        } else {
            infer(&h, &report, n_pos)
        };
        for c in inferred {
            let kind = c.kind;
            if store.add([c]) > 0 {
                *kind_counter(&mut stats, kind) += 1;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScoreError {
    #[error("accuracy is undefined without positive examples")]
    NoPositives,
    #[error("accuracy is undefined without negative examples")]
    NoNegatives,
    #[error("program still contains magic variables")]
    Magic,
}

/// Balanced accuracy `(tp/p + tn/n) / 2`.
pub fn score(
    h: &Hypothesis,
    bg: &Background,
    pos: &[Atom],
    neg: &[Atom],
    budget: &ResourceBudget,
) -> Result<f64, ScoreError> {
    if h.has_magic() {
        return Err(ScoreError::Magic);
    }
    if pos.is_empty() {
        return Err(ScoreError::NoPositives);
    }
    if neg.is_empty() {
        return Err(ScoreError::NoNegatives);
    }
    let prog = Program::new(h.clauses(), bg);
    let tp = coverage(&prog, bg, pos, budget).0.iter().filter(|&&b| b).count();
    let tn = coverage(&prog, bg, neg, budget).0.iter().filter(|&&b| !b).count();
    Ok(balanced_accuracy(tp, pos.len(), tn, neg.len()))
}

pub fn balanced_accuracy(tp: usize, p: usize, tn: usize, n: usize) -> f64 {
    (tp as f64 / p as f64 + tn as f64 / n as f64) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taskio::{parse_program, parse_task_sources, render_program};

    const LIST_BIAS: &str = "head_pred(f,1).\nbody_pred(head,2).\nbody_pred(tail,2).\nbody_pred(empty,1).\n\
        builtin(head,2).\nbuiltin(tail,2).\nbuiltin(empty,1).\nmax_vars(3).\nmax_body(2).\nmax_clauses(2).\n\
        max_magic(1).\nenable_recursion.\n";

    #[test]
    fn learns_fig2() {
        let exs = "pos(f([1,7,3])).\npos(f([7])).\npos(f([2,4,5,7])).\npos(f([7,9,9])).\n\
                   neg(f([1,2,3])).\nneg(f([])).\nneg(f([8,8,8,8])).\nneg(f([9])).\n";
        let task = parse_task_sources(LIST_BIAS, "", exs).unwrap();
        let r = learn(&task);
        assert_eq!(r.status, LearnStatus::Solved);
        let text = render_program(r.program.as_ref().unwrap()).unwrap();
        assert_eq!(text, "f(A):-head(A,7).\nf(A):-tail(A,B),f(B).\n");
        assert_eq!(r.size, 5);
        assert!(r.stats.candidates_tested <= r.stats.candidates_generated);
    }

    #[test]
    fn exhausts_on_impossible_task() {
        let task = parse_task_sources(LIST_BIAS, "", "pos(f([1])).\nneg(f([1.0])).\n");
        // f([1]) and f([1.0]) are the same example by value.
        assert!(task.is_err());
        let task = parse_task_sources(
            "head_pred(f,1).\nbody_pred(empty,1).\nbuiltin(empty,1).\nmax_body(1).\nmax_clauses(1).\nmax_magic(0).\n",
            "",
            "pos(f([1])).\nneg(f([2])).\n",
        )
        .unwrap();
        let r = learn(&task);
        assert_eq!(r.status, LearnStatus::Exhausted);
        assert!(r.program.is_none());
    }

    #[test]
    fn zero_timeout() {
        let task = parse_task_sources(LIST_BIAS, "", "pos(f([7])).\nneg(f([1])).\n").unwrap();
        let config = EngineConfig { timeout: Duration::ZERO, ..EngineConfig::default() };
        let r = learn(&task.with_config(config));
        assert_eq!(r.status, LearnStatus::Timeout);
    }

    #[test]
    fn score_formula() {
        let task = parse_task_sources(LIST_BIAS, "", "pos(f([7])).\npos(f([1,7])).\nneg(f([1])).\nneg(f([])).\n")
            .unwrap();
        let bg = task.background();
        let b = ResourceBudget::default();
        let target = parse_program("f(A):-head(A,7).\nf(A):-tail(A,B),f(B).").unwrap();
        assert_eq!(score(&target, &bg, &task.pos, &task.neg, &b), Ok(1.0));
        let head_only = parse_program("f(A):-head(A,7).").unwrap();
        assert_eq!(score(&head_only, &bg, &task.pos, &task.neg, &b), Ok(0.75));
        let anything = parse_program("f(A):-head(A,B).").unwrap();
        assert_eq!(score(&anything, &bg, &task.pos, &task.neg, &b), Ok(0.75));
        assert_eq!(score(&target, &bg, &[], &task.neg, &b), Err(ScoreError::NoPositives));
        assert!((balanced_accuracy(9, 10, 8, 10) - 0.85).abs() < 1e-12);
    }
}
