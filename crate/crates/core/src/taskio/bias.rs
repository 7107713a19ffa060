use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use crate::interp::{register_builtins, BuiltinRegistry};
use crate::logic::is_plain_atom;

use super::syntax::{parse_clauses, PClause, PTerm};
use super::IoError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    In,
    Out,
}

/// A predicate declaration with optional argument types and directions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredDecl {
    pub name: Arc<str>,
    pub arity: usize,
    pub types: Option<Vec<Arc<str>>>,
    pub directions: Option<Vec<Direction>>,
}

impl PredDecl {
    pub fn new(name: &str, arity: usize) -> Self {
        PredDecl { name: Arc::from(name), arity, types: None, directions: None }
    }

    pub fn with_types(mut self, types: &[&str]) -> Self {
        self.types = Some(types.iter().map(|t| Arc::from(*t)).collect());
        self
    }

    pub fn with_directions(mut self, dirs: &[Direction]) -> Self {
        self.directions = Some(dirs.to_vec());
        self
    }

    pub fn arg_type(&self, i: usize) -> Option<&Arc<str>> {
        self.types.as_ref().map(|t| &t[i])
    }

    pub fn direction(&self, i: usize) -> Option<Direction> {
        self.directions.as_ref().map(|d| d[i])
    }
}

/// Which variables may be marked as magic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MagicSetting {
    All,
    Types(BTreeSet<String>),
    /// (predicate, 1-based argument position)
    Arguments(BTreeSet<(String, usize)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bias {
    pub head_preds: Vec<PredDecl>,
    pub body_preds: Vec<PredDecl>,
    pub builtins_enabled: BTreeSet<(String, usize)>,
    pub max_vars: usize,
    pub max_body: usize,
    pub max_clauses: usize,
    pub max_magic: usize,
    pub magic_setting: MagicSetting,
    pub enable_recursion: bool,
}

impl Default for Bias {
    fn default() -> Self {
        Bias {
            head_preds: Vec::new(),
            body_preds: Vec::new(),
            builtins_enabled: BTreeSet::new(),
            max_vars: 6,
            max_body: 6,
            max_clauses: 2,
            max_magic: 4,
            magic_setting: MagicSetting::All,
            enable_recursion: false,
        }
    }
}

impl Bias {
    /// The single target predicate.
    pub fn head(&self) -> &PredDecl {
        &self.head_preds[0]
    }

    pub fn decl(&self, name: &str, arity: usize) -> Option<&PredDecl> {
        self.head_preds.iter().chain(&self.body_preds).find(|d| &*d.name == name && d.arity == arity)
    }

    /// Enabled builtins, resolved against the full registry.
    pub fn builtin_registry(&self) -> BuiltinRegistry {
        register_builtins(BuiltinRegistry::empty())
            .restrict(self.builtins_enabled.iter().map(|(n, a)| (n.as_str(), *a)))
    }

    pub fn validate(&self) -> Result<(), IoError> {
        let invalid = |m: String| Err(IoError::Validation(m));
        if self.head_preds.len() != 1 {
            return invalid(format!("expected exactly one head_pred, found {}", self.head_preds.len()));
        }
        if self.max_clauses == 0 || self.max_vars == 0 {
            return invalid("max_clauses and max_vars must be positive".into());
        }
        if self.head().arity > self.max_vars {
            return invalid("max_vars is smaller than the head arity".into());
        }
        let registry = register_builtins(BuiltinRegistry::empty());
        for (name, arity) in &self.builtins_enabled {
            if !registry.contains(name, *arity) {
                return invalid(format!("unknown builtin {name}/{arity}"));
            }
        }
        for d in self.head_preds.iter().chain(&self.body_preds) {
            if d.types.as_ref().is_some_and(|t| t.len() != d.arity) {
                return invalid(format!("type declaration for {}/{} has the wrong length", d.name, d.arity));
            }
            if d.directions.as_ref().is_some_and(|t| t.len() != d.arity) {
                return invalid(format!("direction declaration for {}/{} has the wrong length", d.name, d.arity));
            }
        }
        match &self.magic_setting {
            MagicSetting::All => {}
            MagicSetting::Types(types) => {
                let used: BTreeSet<&str> = self
                    .head_preds
                    .iter()
                    .chain(&self.body_preds)
                    .flat_map(|d| d.types.iter().flatten())
                    .map(|t| &**t)
                    .collect();
                for t in types {
                    if !used.contains(t.as_str()) {
                        return invalid(format!("magic_type({t}) names a type no declaration uses"));
                    }
                }
            }
            MagicSetting::Arguments(args) => {
                for (p, i) in args {
                    let ok = self
                        .head_preds
                        .iter()
                        .chain(&self.body_preds)
                        .any(|d| &*d.name == p && *i >= 1 && *i <= d.arity);
                    if !ok {
                        return invalid(format!("magic_arg({p},{i}) does not name a declared argument"));
                    }
                }
            }
        }
        Ok(())
    }
}

fn err(line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse { line, message: message.into() }
}

fn atom_name(t: &PTerm, line: usize) -> Result<String, IoError> {
    match t {
        PTerm::Atom(a) => Ok(a.clone()),
        other => Err(err(line, format!("expected a name, found {other:?}"))),
    }
}

fn natural(t: &PTerm, line: usize) -> Result<usize, IoError> {
    match t {
        PTerm::Int(i) if *i >= 0 => Ok(*i as usize),
        other => Err(err(line, format!("expected a natural number, found {other:?}"))),
    }
}

fn direction(t: &PTerm, line: usize) -> Result<Direction, IoError> {
    match atom_name(t, line)?.as_str() {
        "in" => Ok(Direction::In),
        "out" => Ok(Direction::Out),
        other => Err(err(line, format!("unknown direction {other}"))),
    }
}

pub fn parse_bias(src: &str) -> Result<Bias, IoError> {
    let clauses = parse_clauses(src)?;
    let mut bias = Bias::default();
    let mut types: BTreeMap<String, (Vec<Arc<str>>, usize)> = BTreeMap::new();
    let mut dirs: BTreeMap<String, (Vec<Direction>, usize)> = BTreeMap::new();
    let mut magic_types = BTreeSet::new();
    let mut magic_args = BTreeSet::new();
    for PClause { head, body, line } in &clauses {
        let line = *line;
        if !body.is_empty() {
            return Err(err(line, "bias entries must be facts"));
        }
        let name = head.name().ok_or_else(|| err(line, "expected a bias directive"))?;
        let args = head.args();
        match (name, args.len()) {
            ("head_pred", 2) | ("body_pred", 2) => {
                let decl = PredDecl::new(&atom_name(&args[0], line)?, natural(&args[1], line)?);
                if name == "head_pred" {
                    bias.head_preds.push(decl);
                } else {
                    bias.body_preds.push(decl);
                }
            }
            ("type", 2) => {
                let items = args[1]
                    .tuple_items()
                    .into_iter()
                    .map(|t| atom_name(t, line).map(|s| Arc::from(s.as_str())))
                    .collect::<Result<Vec<_>, _>>()?;
                types.insert(atom_name(&args[0], line)?, (items, line));
            }
            ("direction", 2) => {
                let items =
                    args[1].tuple_items().into_iter().map(|t| direction(t, line)).collect::<Result<Vec<_>, _>>()?;
                dirs.insert(atom_name(&args[0], line)?, (items, line));
            }
            ("max_vars", 1) => bias.max_vars = natural(&args[0], line)?,
            ("max_body", 1) => bias.max_body = natural(&args[0], line)?,
            ("max_clauses", 1) => bias.max_clauses = natural(&args[0], line)?,
            ("max_magic", 1) => bias.max_magic = natural(&args[0], line)?,
            ("magic_type", 1) => {
                magic_types.insert(atom_name(&args[0], line)?);
            }
            ("magic_arg", 2) => {
                magic_args.insert((atom_name(&args[0], line)?, natural(&args[1], line)?));
            }
            ("enable_recursion", 0) => bias.enable_recursion = true,
            ("builtin", 2) => {
                bias.builtins_enabled.insert((atom_name(&args[0], line)?, natural(&args[1], line)?));
            }
            (other, n) => return Err(err(line, format!("unknown bias directive {other}/{n}"))),
        }
    }
    for (name, (items, line)) in types {
        let mut found = false;
        for d in bias.head_preds.iter_mut().chain(bias.body_preds.iter_mut()) {
            if *d.name == *name && d.arity == items.len() {
                d.types = Some(items.clone());
                found = true;
            }
        }
        if !found {
            return Err(IoError::Validation(format!("line {line}: type for undeclared predicate {name}/{}", items.len())));
        }
    }
    for (name, (items, line)) in dirs {
        let mut found = false;
        for d in bias.head_preds.iter_mut().chain(bias.body_preds.iter_mut()) {
            if *d.name == *name && d.arity == items.len() {
                d.directions = Some(items.clone());
                found = true;
            }
        }
        if !found {
            return Err(IoError::Validation(format!(
                "line {line}: direction for undeclared predicate {name}/{}",
                items.len()
            )));
        }
    }
    bias.magic_setting = match (magic_types.is_empty(), magic_args.is_empty()) {
        (true, true) => MagicSetting::All,
        (false, true) => MagicSetting::Types(magic_types),
        (true, false) => MagicSetting::Arguments(magic_args),
        (false, false) => {
            return Err(IoError::Validation("magic_type and magic_arg cannot be combined".into()));
        }
    };
    bias.validate()?;
    Ok(bias)
}

fn name(s: &str) -> String {
    if is_plain_atom(s) {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\\', "\\\\").replace('\'', "\\'"))
    }
}

fn tuple<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    let inner: Vec<String> = items.iter().map(f).collect();
    if inner.len() == 1 {
        format!("({},)", inner[0])
    } else {
        format!("({})", inner.join(","))
    }
}

/// Renders a bias in the `bias.pl` format accepted by [`parse_bias`].
pub fn write_bias(bias: &Bias) -> String {
    let mut out = String::new();
    for (kind, decls) in [("head_pred", &bias.head_preds), ("body_pred", &bias.body_preds)] {
        for d in decls {
            let _ = writeln!(out, "{kind}({},{}).", name(&d.name), d.arity);
        }
    }
    for d in bias.head_preds.iter().chain(&bias.body_preds) {
        if let Some(t) = &d.types {
            let _ = writeln!(out, "type({},{}).", name(&d.name), tuple(t, |s| name(s)));
        }
        if let Some(ds) = &d.directions {
            let render = |x: &Direction| match x {
                Direction::In => "in".to_string(),
                Direction::Out => "out".to_string(),
            };
            let _ = writeln!(out, "direction({},{}).", name(&d.name), tuple(ds, render));
        }
    }
    for (n, a) in &bias.builtins_enabled {
        let _ = writeln!(out, "builtin({},{a}).", name(n));
    }
    let _ = writeln!(out, "max_vars({}).", bias.max_vars);
    let _ = writeln!(out, "max_body({}).", bias.max_body);
    let _ = writeln!(out, "max_clauses({}).", bias.max_clauses);
    let _ = writeln!(out, "max_magic({}).", bias.max_magic);
    if bias.enable_recursion {
        out.push_str("enable_recursion.\n");
    }
    match &bias.magic_setting {
        MagicSetting::All => {}
        MagicSetting::Types(ts) => {
            for t in ts {
                let _ = writeln!(out, "magic_type({}).", name(t));
            }
        }
        MagicSetting::Arguments(args) => {
            for (p, i) in args {
                let _ = writeln!(out, "magic_arg({},{i}).", name(p));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const KRK: &str = "head_pred(f,1).\nbody_pred(cell,4).\nbody_pred(distance,3).\n\
        type(f,(state,)).\ntype(cell,(state,pos,color,type)).\ntype(distance,(pos,pos,int)).\n";

    #[test]
    fn declarations_with_types() {
        let b = parse_bias(KRK).unwrap();
        let d = b.decl("distance", 3).unwrap();
        let names: Vec<&str> = d.types.as_ref().unwrap().iter().map(|t| &**t).collect();
        assert_eq!(names, ["pos", "pos", "int"]);
        assert_eq!(b.magic_setting, MagicSetting::All);
        assert_eq!((b.max_vars, b.max_body, b.max_clauses, b.max_magic), (6, 6, 2, 4));
    }

    #[test]
    fn magic_settings() {
        let b = parse_bias(&format!("{KRK}magic_type(color).\nmagic_type(int).\n")).unwrap();
        assert_eq!(b.magic_setting, MagicSetting::Types(["color".to_string(), "int".to_string()].into()));
        let b = parse_bias(&format!("{KRK}magic_arg(cell,4).\n")).unwrap();
        assert_eq!(b.magic_setting, MagicSetting::Arguments([("cell".to_string(), 4)].into()));
        assert!(parse_bias(&format!("{KRK}magic_arg(cell,4).\nmagic_type(int).\n")).is_err());
        assert!(parse_bias(&format!("{KRK}magic_arg(cell,5).\n")).is_err());
        assert!(parse_bias(&format!("{KRK}magic_type(weight).\n")).is_err());
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(matches!(parse_bias("head_pred(f,1).\ntype(g,(a,)).\n"), Err(IoError::Validation(_))));
        assert!(matches!(parse_bias("head_pred(f,1).\nfoo(1).\n"), Err(IoError::Parse { line: 2, .. })));
        assert!(parse_bias("head_pred(f,1).\nbuiltin(frobnicate,2).\n").is_err());
        assert!(parse_bias("body_pred(g,1).\n").is_err());
    }

    #[test]
    fn round_trip() {
        let src = format!("{KRK}direction(distance,(in,in,out)).\nbuiltin(add,3).\nmax_vars(5).\nenable_recursion.\nmagic_type(int).\n");
        let b = parse_bias(&src).unwrap();
        assert_eq!(parse_bias(&write_bias(&b)).unwrap(), b);
    }
}
