//! Bounded top-down evaluation of definite programs over ground facts and
//! builtin relations.

mod builtins;
mod facts;
mod solver;

pub use builtins::{register_builtins, Builtin, BuiltinRegistry};
pub use facts::FactBase;
pub(crate) use solver::RawRun;
pub use solver::{prove, solve, Background, ProveOutcome, Program, ResourceBudget, SolveResult};
