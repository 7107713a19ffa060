use std::collections::{BTreeSet, HashMap};

use crate::logic::{Clause, Hypothesis, Literal, Term, Var};

use super::syntax::{parse_clauses, to_clause};
use super::IoError;

/// Orders body literals so that each one, where possible, uses a variable
/// bound by the head or an earlier literal. Recursive calls go late.
fn dataflow_order(c: &Clause) -> Vec<Literal> {
    let mut bound: BTreeSet<Var> = c.head.vars().collect();
    let mut rest: Vec<&Literal> = c.body.iter().collect();
    let mut out = Vec::with_capacity(rest.len());
    while !rest.is_empty() {
        let best = (0..rest.len())
            .min_by_key(|&i| {
                let l = rest[i];
                let vars: BTreeSet<Var> = l.vars().collect();
                let touches = vars.is_empty() || vars.iter().any(|v| bound.contains(v));
                let unbound = vars.iter().filter(|v| !bound.contains(v)).count();
                let recursive = l.pred == c.head.pred && l.arity() == c.head.arity();
                (!touches, recursive, unbound, i)
            })
            .unwrap();
        let l = rest.remove(best);
        bound.extend(l.vars());
        out.push(l.clone());
    }
    out
}

/// Renames variables to A, B, ... in order of first appearance.
fn rename(head: &Literal, body: &[Literal]) -> Clause {
    let mut map: HashMap<Var, Var> = HashMap::new();
    let mut lit = |l: &Literal| {
        let args = l
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => {
                    let next = Var(map.len() as u32);
                    Term::Var(*map.entry(*v).or_insert(next))
                }
                c => c.clone(),
            })
            .collect();
        Literal { pred: l.pred.clone(), args, kind: l.kind }
    };
    let head = lit(head);
    let body = body.iter().map(&mut lit).collect();
    Clause::new(head, body)
}

/// One clause per line in the hypothesis's canonical clause order.
pub fn render_program(h: &Hypothesis) -> Result<String, IoError> {
    if h.has_magic() {
        return Err(IoError::MagicLiteral);
    }
    let mut out = String::new();
    for c in h.clauses() {
        let body = dataflow_order(c);
        out.push_str(&rename(&c.head, &body).to_string());
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_program(text: &str) -> Result<Hypothesis, IoError> {
    let clauses = parse_clauses(text)?.iter().map(to_clause).collect::<Result<Vec<_>, _>>()?;
    Ok(Hypothesis::new(clauses))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taskio::parse_clause;

    #[test]
    fn list_target_round_trip() {
        let h = Hypothesis::new(vec![
            parse_clause("f(X):-f(Y),tail(X,Y).").unwrap(),
            parse_clause("f(Q):-head(Q,7).").unwrap(),
        ]);
        assert_eq!(render_program(&h).unwrap(), "f(A):-head(A,7).\nf(A):-tail(A,B),f(B).\n");
    }

    #[test]
    fn empty_and_magic() {
        assert_eq!(render_program(&Hypothesis::empty()).unwrap(), "");
        let h = Hypothesis::new(vec![parse_clause("f(A):-head(A,B),@magic(B).").unwrap()]);
        assert!(matches!(render_program(&h), Err(IoError::MagicLiteral)));
    }

    #[test]
    fn dataflow_follows_bindings() {
        let h = Hypothesis::new(vec![parse_clause("area(A,B):-mult(C,3.142,B),square(A,C).").unwrap()]);
        let text = render_program(&h).unwrap();
        assert_eq!(parse_program(&text).unwrap(), h);
        assert!(text.starts_with("area(A,B):-"), "{text}");
    }
}
