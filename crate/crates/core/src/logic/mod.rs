//! Terms, clauses, hypotheses, substitutions and subsumption.

pub mod canon;
mod clause;
mod subsume;
mod term;

pub use canon::{canonical_key, canonicalize, clause_key, ClauseKey};
pub use clause::{
    apply, hypothesis_size, is_recursive, Atom, Clause, ClauseError, Hypothesis, LitKind, Literal,
    Substitution, MAGIC_PRED,
};
pub use subsume::{clauses_subsume, program_subsumes, theta_subsumes, theta_subsumes_eps};
pub use term::{float_close, var_name, ConstValue, Term, Var, DEFAULT_EPSILON};
pub(crate) use term::is_plain_atom;
