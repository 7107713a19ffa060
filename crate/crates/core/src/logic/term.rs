use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

/// Default tolerance used when matching float constants.
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// A ground constant: symbol, integer, finite float, or a list of constants.
#[derive(Clone, Debug)]
pub enum ConstValue {
    Symbol(Arc<str>),
    Int(i64),
    Float(f64),
    List(Arc<[ConstValue]>),
}

impl ConstValue {
    pub fn sym(name: &str) -> Self {
        ConstValue::Symbol(Arc::from(name))
    }

    /// Returns `None` for NaN and infinities.
    pub fn float(x: f64) -> Option<Self> {
        x.is_finite().then_some(ConstValue::Float(x))
    }

    pub fn list<I: IntoIterator<Item = ConstValue>>(items: I) -> Self {
        ConstValue::List(items.into_iter().collect::<Vec<_>>().into())
    }

    pub fn as_list(&self) -> Option<&[ConstValue]> {
        match self {
            ConstValue::List(items) => Some(items),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ConstValue::Int(i) => Some(*i as f64),
            ConstValue::Float(x) => Some(*x),
            _ => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, ConstValue::Int(_) | ConstValue::Float(_))
    }

    pub fn contains_float(&self) -> bool {
        match self {
            ConstValue::Float(_) => true,
            ConstValue::List(items) => items.iter().any(ConstValue::contains_float),
            _ => false,
        }
    }

    /// Equality used by unification: numbers compare by value (mixed kinds
    /// promote to float), floats within `eps` scaled by magnitude.
    pub fn matches(&self, other: &ConstValue, eps: f64) -> bool {
        match (self, other) {
            (ConstValue::Int(a), ConstValue::Int(b)) => a == b,
            (ConstValue::Symbol(a), ConstValue::Symbol(b)) => a == b,
            (ConstValue::List(a), ConstValue::List(b)) => {
                a.len() == b.len() && a.iter().zip(b.iter()).all(|(x, y)| x.matches(y, eps))
            }
            (a, b) if a.is_numeric() && b.is_numeric() => {
                float_close(a.as_f64().unwrap(), b.as_f64().unwrap(), eps)
            }
            _ => false,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            ConstValue::Int(_) | ConstValue::Float(_) => 0,
            ConstValue::Symbol(_) => 1,
            ConstValue::List(_) => 2,
        }
    }
}

/// `|a - b| <= eps * max(1, |a|, |b|)`.
pub fn float_close(a: f64, b: f64, eps: f64) -> bool {
    let scale = 1.0f64.max(a.abs()).max(b.abs());
    (a - b).abs() <= eps * scale
}

// Structural equality: floats compare by bit pattern so that Eq, Ord and Hash
// agree. Tolerant matching goes through `matches`.
impl PartialEq for ConstValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ConstValue {}

impl Hash for ConstValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            ConstValue::Symbol(s) => {
                0u8.hash(state);
                s.hash(state);
            }
            ConstValue::Int(i) => {
                1u8.hash(state);
                i.hash(state);
            }
            ConstValue::Float(x) => {
                2u8.hash(state);
                x.to_bits().hash(state);
            }
            ConstValue::List(items) => {
                3u8.hash(state);
                items.len().hash(state);
                for item in items.iter() {
                    item.hash(state);
                }
            }
        }
    }
}

/// Canonical constant order: numbers by value (an int sorts before an equal
/// float), then symbols, then lists lexicographically.
impl Ord for ConstValue {
    fn cmp(&self, other: &Self) -> Ordering {
        use ConstValue::*;
        match (self, other) {
            (Int(a), Int(b)) => a.cmp(b),
            (Float(a), Float(b)) => a.total_cmp(b),
            (Int(a), Float(b)) => (*a as f64).total_cmp(b).then(Ordering::Less),
            (Float(a), Int(b)) => a.total_cmp(&(*b as f64)).then(Ordering::Greater),
            (Symbol(a), Symbol(b)) => a.cmp(b),
            (List(a), List(b)) => a.iter().cmp(b.iter()),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for ConstValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) fn is_plain_atom(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => chars.all(|c| c.is_ascii_alphanumeric() || c == '_'),
        _ => false,
    }
}

impl fmt::Display for ConstValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstValue::Symbol(s) if is_plain_atom(s) => write!(f, "{s}"),
            ConstValue::Symbol(s) => {
                write!(f, "'")?;
                for c in s.chars() {
                    match c {
                        '\'' => write!(f, "\\'")?,
                        '\\' => write!(f, "\\\\")?,
                        c => write!(f, "{c}")?,
                    }
                }
                write!(f, "'")
            }
            ConstValue::Int(i) => write!(f, "{i}"),
            // Debug formatting keeps a decimal point or exponent so the value
            // re-parses as a float.
            ConstValue::Float(x) => write!(f, "{x:?}"),
            ConstValue::List(items) => {
                write!(f, "[")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, "]")
            }
        }
    }
}

/// Variable index, clause-local.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Renders variable `n` as `A`..`Z`, then `A1`..`Z1`, and so on.
pub fn var_name(n: u32) -> String {
    let letter = (b'A' + (n % 26) as u8) as char;
    let round = n / 26;
    if round == 0 {
        letter.to_string()
    } else {
        format!("{letter}{round}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    Const(ConstValue),
}

impl Term {
    pub fn var(i: u32) -> Self {
        Term::Var(Var(i))
    }

    pub fn as_var(&self) -> Option<Var> {
        match self {
            Term::Var(v) => Some(*v),
            Term::Const(_) => None,
        }
    }

    pub fn as_const(&self) -> Option<&ConstValue> {
        match self {
            Term::Const(c) => Some(c),
            Term::Var(_) => None,
        }
    }
}

impl From<ConstValue> for Term {
    fn from(c: ConstValue) -> Self {
        Term::Const(c)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{}", var_name(v.0)),
            Term::Const(c) => write!(f, "{c}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_numbers_match_by_value() {
        assert!(ConstValue::Int(2).matches(&ConstValue::Float(2.0), 1e-6));
        assert!(!ConstValue::Int(2).matches(&ConstValue::Int(3), 1e-6));
        assert!(ConstValue::Float(1.2345678).matches(&ConstValue::Float(1.23456785), 1e-6));
        assert!(!ConstValue::Float(1.24).matches(&ConstValue::Float(1.25), 1e-6));
        assert!(!ConstValue::sym("a").matches(&ConstValue::Int(1), 1e-6));
    }

    #[test]
    fn float_constructor_rejects_non_finite() {
        assert!(ConstValue::float(f64::NAN).is_none());
        assert!(ConstValue::float(f64::INFINITY).is_none());
        assert!(ConstValue::float(1.5).is_some());
    }

    #[test]
    fn canonical_order() {
        let mut v = [ConstValue::list([ConstValue::Int(1)]),
            ConstValue::sym("b"),
            ConstValue::Float(1.5),
            ConstValue::sym("a"),
            ConstValue::Int(2),
            ConstValue::Int(-1)];
        v.sort();
        let shown: Vec<String> = v.iter().map(|c| c.to_string()).collect();
        assert_eq!(shown, ["-1", "1.5", "2", "a", "b", "[1]"]);
        assert!(ConstValue::Int(1) < ConstValue::Float(1.0));
    }

    #[test]
    fn display() {
        assert_eq!(ConstValue::Float(3.0).to_string(), "3.0");
        assert_eq!(ConstValue::sym("Hello").to_string(), "'Hello'");
        assert_eq!(var_name(0), "A");
        assert_eq!(var_name(27), "B1");
    }
}
