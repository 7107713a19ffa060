use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use super::canon;
use super::term::{ConstValue, Term, Var};

/// Predicate name of the internal marker literal.
pub const MAGIC_PRED: &str = "@magic";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LitKind {
    Ordinary,
    Magic,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub pred: Arc<str>,
    pub args: Vec<Term>,
    pub kind: LitKind,
}

impl Literal {
    pub fn new(pred: impl Into<Arc<str>>, args: Vec<Term>) -> Self {
        Literal { pred: pred.into(), args, kind: LitKind::Ordinary }
    }

    pub fn magic(v: Var) -> Self {
        Literal { pred: Arc::from(MAGIC_PRED), args: vec![Term::Var(v)], kind: LitKind::Magic }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_magic(&self) -> bool {
        self.kind == LitKind::Magic
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| matches!(t, Term::Const(_)))
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.args.iter().filter_map(Term::as_var)
    }

    pub fn apply(&self, theta: &Substitution) -> Literal {
        Literal {
            pred: self.pred.clone(),
            args: self.args.iter().map(|t| theta.apply_term(t)).collect(),
            kind: self.kind,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// A ground atom, as used for examples and background facts.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub pred: Arc<str>,
    pub args: Vec<ConstValue>,
}

impl Atom {
    pub fn new(pred: impl Into<Arc<str>>, args: Vec<ConstValue>) -> Self {
        Atom { pred: pred.into(), args }
    }

    pub fn to_literal(&self) -> Literal {
        Literal::new(self.pred.clone(), self.args.iter().cloned().map(Term::Const).collect())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_literal().fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClauseError {
    #[error("magic variable {0} does not occur in the head or an ordinary body literal")]
    UnconsumedMagic(String),
    #[error("duplicate magic literal for variable {0}")]
    DuplicateMagic(String),
    #[error("malformed magic literal {0}")]
    MalformedMagic(String),
    #[error("head literal must be ordinary")]
    MagicHead,
}

/// A definite clause. Body order carries no meaning; see [`canon`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    pub head: Literal,
    pub body: Vec<Literal>,
}

impl Clause {
    pub fn new(head: Literal, body: Vec<Literal>) -> Self {
        Clause { head, body }
    }

    pub fn validate(&self) -> Result<(), ClauseError> {
        if self.head.is_magic() {
            return Err(ClauseError::MagicHead);
        }
        let mut consumed = BTreeSet::new();
        consumed.extend(self.head.vars());
        for lit in self.ordinary_body() {
            consumed.extend(lit.vars());
        }
        let mut seen = BTreeSet::new();
        for lit in self.body.iter().filter(|l| l.is_magic()) {
            let v = match lit.args.as_slice() {
                [Term::Var(v)] if &*lit.pred == MAGIC_PRED => *v,
                _ => return Err(ClauseError::MalformedMagic(lit.to_string())),
            };
            if !seen.insert(v) {
                return Err(ClauseError::DuplicateMagic(Term::Var(v).to_string()));
            }
            if !consumed.contains(&v) {
                return Err(ClauseError::UnconsumedMagic(Term::Var(v).to_string()));
            }
        }
        Ok(())
    }

    pub fn ordinary_body(&self) -> impl Iterator<Item = &Literal> + '_ {
        self.body.iter().filter(|l| !l.is_magic())
    }

    pub fn magic_vars(&self) -> Vec<Var> {
        self.body.iter().filter(|l| l.is_magic()).filter_map(|l| l.args[0].as_var()).collect()
    }

    pub fn has_magic(&self) -> bool {
        self.body.iter().any(Literal::is_magic)
    }

    /// Head plus ordinary body literals; magic markers are free.
    pub fn size(&self) -> usize {
        1 + self.ordinary_body().count()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out: BTreeSet<Var> = self.head.vars().collect();
        for lit in &self.body {
            out.extend(lit.vars());
        }
        out
    }

    /// One past the largest variable index.
    pub fn var_span(&self) -> usize {
        self.vars().iter().next_back().map_or(0, |v| v.index() + 1)
    }

    pub fn is_recursive(&self) -> bool {
        self.ordinary_body()
            .any(|l| l.pred == self.head.pred && l.arity() == self.head.arity())
    }

    pub fn apply(&self, theta: &Substitution) -> Clause {
        Clause {
            head: self.head.apply(theta),
            body: self.body.iter().map(|l| l.apply(theta)).collect(),
        }
    }

    /// The same clause with every magic marker removed.
    pub fn without_magic(&self) -> Clause {
        Clause {
            head: self.head.clone(),
            body: self.ordinary_body().cloned().collect(),
        }
    }

    pub fn canonical(&self) -> Clause {
        canon::canonicalize(self)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            write!(f, ":-")?;
            for (i, lit) in self.body.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{lit}")?;
            }
        }
        write!(f, ".")
    }
}

/// A set of clauses kept in canonical order (size, then canonical key).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Hypothesis {
    clauses: Vec<Clause>,
}

impl Hypothesis {
    /// Canonicalizes every clause and sorts. Clauses that are identical after
    /// canonicalization collapse unless they carry magic literals.
    pub fn new(clauses: Vec<Clause>) -> Self {
        let mut clauses: Vec<(usize, canon::ClauseKey, Clause)> = clauses
            .iter()
            .map(|c| {
                let c = canon::canonicalize(c);
                (c.size(), canon::clause_key(&c), c)
            })
            .collect();
        clauses.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
        clauses.dedup_by(|a, b| a.1 == b.1 && !a.2.has_magic());
        Hypothesis { clauses: clauses.into_iter().map(|(_, _, c)| c).collect() }
    }

    /// Wraps clauses that are already canonical and sorted.
    pub(crate) fn from_canonical(clauses: Vec<Clause>) -> Self {
        Hypothesis { clauses }
    }

    pub fn empty() -> Self {
        Hypothesis::default()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn size(&self) -> usize {
        hypothesis_size(self)
    }

    pub fn is_recursive(&self) -> bool {
        is_recursive(self)
    }

    pub fn magic_count(&self) -> usize {
        self.clauses.iter().map(|c| c.magic_vars().len()).sum()
    }

    pub fn has_magic(&self) -> bool {
        self.clauses.iter().any(Clause::has_magic)
    }

    /// Head predicates (name, arity) defined by this hypothesis.
    pub fn head_preds(&self) -> BTreeSet<(Arc<str>, usize)> {
        self.clauses.iter().map(|c| (c.head.pred.clone(), c.head.arity())).collect()
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

pub fn hypothesis_size(h: &Hypothesis) -> usize {
    h.clauses.iter().map(Clause::size).sum()
}

/// True when some body literal calls a predicate defined by a head in `h`.
pub fn is_recursive(h: &Hypothesis) -> bool {
    let heads = h.head_preds();
    h.clauses
        .iter()
        .flat_map(|c| c.ordinary_body())
        .any(|l| heads.contains(&(l.pred.clone(), l.arity())))
}

/// Simultaneous replacement of variables by terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn bind(&mut self, v: Var, t: Term) {
        self.map.insert(v, t);
    }

    pub fn with(mut self, v: Var, t: Term) -> Self {
        self.bind(v, t);
        self
    }

    pub fn get(&self, v: Var) -> Option<&Term> {
        self.map.get(&v)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.map.iter()
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.map.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::Const(_) => t.clone(),
        }
    }
}

impl FromIterator<(Var, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Var, Term)>>(iter: I) -> Self {
        Substitution { map: iter.into_iter().collect() }
    }
}

/// `c` with `theta` applied.
pub fn apply(c: &Clause, theta: &Substitution) -> Clause {
    c.apply(theta)
}
