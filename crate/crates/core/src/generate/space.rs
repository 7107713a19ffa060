use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Pow};

use crate::taskio::Bias;

/// Quantities in the closed-form bound on the number of hypotheses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpaceParams {
    /// Number of head predicate symbols.
    pub dh: u64,
    /// Number of body predicate symbols.
    pub db: u64,
    /// Maximum variables per clause.
    pub vars: u64,
    /// Maximum predicate arity.
    pub arity: u32,
    pub max_body: u32,
    pub max_clauses: u32,
}

impl SpaceParams {
    pub fn from_bias(bias: &Bias) -> Self {
        let arity = bias.head_preds.iter().chain(&bias.body_preds).map(|d| d.arity).max().unwrap_or(0);
        SpaceParams {
            dh: bias.head_preds.len() as u64,
            db: bias.body_preds.len() as u64,
            vars: bias.max_vars as u64,
            arity: arity as u32,
            max_body: bias.max_body as u32,
            max_clauses: bias.max_clauses as u32,
        }
    }
}

/// `n (Dh v^a m (Db' v^a)^m)^n` where `Db' = Db + c` when constants are
/// encoded as `c` extra unary body predicates, and `Db` otherwise.
pub fn count_space(p: &SpaceParams, with_unary_constants: bool, c: u64) -> BigUint {
    let db = if with_unary_constants { p.db + c } else { p.db };
    let va = BigUint::from(p.vars).pow(p.arity);
    let body = (BigUint::from(db) * &va).pow(p.max_body);
    let clause = BigUint::from(p.dh) * &va * BigUint::from(p.max_body) * body;
    BigUint::from(p.max_clauses) * clause.pow(p.max_clauses)
}

/// Bound with `c` unary constant predicates divided by the bound without.
pub fn space_ratio(p: &SpaceParams, c: u64) -> BigRational {
    let with = count_space(p, true, c);
    let without = count_space(p, false, c);
    if without == BigUint::from(0u32) {
        return BigRational::one();
    }
    BigRational::new(with.into(), without.into())
}
