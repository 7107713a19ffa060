//! A small reader for the logic-program subset used by task files:
//! facts and rules over atoms, variables, numbers, lists and tuples.

use std::collections::HashMap;

use crate::logic::{Clause, ConstValue, Literal, Term, Var, MAGIC_PRED};

use super::IoError;

#[derive(Clone, Debug, PartialEq)]
pub enum PTerm {
    Atom(String),
    Var(String),
    Int(i64),
    Float(f64),
    List(Vec<PTerm>),
    Tuple(Vec<PTerm>),
    Compound(String, Vec<PTerm>),
}

impl PTerm {
    pub fn name(&self) -> Option<&str> {
        match self {
            PTerm::Atom(s) | PTerm::Compound(s, _) => Some(s),
            _ => None,
        }
    }

    pub fn args(&self) -> &[PTerm] {
        match self {
            PTerm::Compound(_, args) => args,
            _ => &[],
        }
    }

    /// Elements of a tuple, or the term itself as a one-element sequence.
    pub fn tuple_items(&self) -> Vec<&PTerm> {
        match self {
            PTerm::Tuple(items) => items.iter().collect(),
            other => vec![other],
        }
    }
}

#[derive(Clone, Debug)]
pub struct PClause {
    pub head: PTerm,
    pub body: Vec<PTerm>,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Atom(String),
    Var(String),
    Int(i64),
    Float(f64),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Neck,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
}

fn err(line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse { line, message: message.into() }
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_at(&self, k: usize) -> Option<u8> {
        self.src.get(self.pos + k).copied()
    }

    fn skip_space(&mut self) {
        while let Some(c) = self.peek() {
            if c == b'\n' {
                self.line += 1;
                self.pos += 1;
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else if c == b'%' {
                while let Some(c) = self.peek() {
                    if c == b'\n' {
                        break;
                    }
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn number(&mut self) -> Result<Tok, IoError> {
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let mut is_float = false;
        if self.peek() == Some(b'.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            is_float = true;
            self.pos += 1;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let digit_at = if matches!(self.peek_at(1), Some(b'-' | b'+')) { 2 } else { 1 };
            if self.peek_at(digit_at).is_some_and(|c| c.is_ascii_digit()) {
                is_float = true;
                self.pos += digit_at;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if is_float {
            let x: f64 = text.parse().map_err(|_| err(self.line, format!("bad float {text}")))?;
            if !x.is_finite() {
                return Err(err(self.line, format!("non-finite float {text}")));
            }
            Ok(Tok::Float(x))
        } else {
            text.parse().map(Tok::Int).map_err(|_| err(self.line, format!("bad integer {text}")))
        }
    }

    fn quoted(&mut self) -> Result<String, IoError> {
        self.pos += 1;
        let mut out = Vec::new();
        loop {
            match self.peek() {
                None => return Err(err(self.line, "unterminated quoted atom")),
                Some(b'\'') => {
                    self.pos += 1;
                    break;
                }
                Some(b'\\') => {
                    let c = self.peek_at(1).ok_or_else(|| err(self.line, "dangling escape"))?;
                    out.push(c);
                    self.pos += 2;
                }
                Some(c) => {
                    if c == b'\n' {
                        self.line += 1;
                    }
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
        String::from_utf8(out).map_err(|_| err(self.line, "invalid utf-8 in quoted atom"))
    }

    fn next(&mut self) -> Result<Option<(Tok, usize)>, IoError> {
        self.skip_space();
        let line = self.line;
        let Some(c) = self.peek() else { return Ok(None) };
        let tok = match c {
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'[' => {
                self.pos += 1;
                Tok::LBrack
            }
            b']' => {
                self.pos += 1;
                Tok::RBrack
            }
            b',' => {
                self.pos += 1;
                Tok::Comma
            }
            b':' if self.peek_at(1) == Some(b'-') => {
                self.pos += 2;
                Tok::Neck
            }
            b'.' => {
                self.pos += 1;
                Tok::End
            }
            b'\'' => Tok::Atom(self.quoted()?),
            b'@' => {
                self.pos += 1;
                Tok::Atom(format!("@{}", self.ident()))
            }
            b'-' if self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) => self.number()?,
            c if c.is_ascii_digit() => self.number()?,
            c if c.is_ascii_lowercase() => Tok::Atom(self.ident()),
            c if c.is_ascii_uppercase() || c == b'_' => Tok::Var(self.ident()),
            other => return Err(err(line, format!("unexpected character '{}'", other as char))),
        };
        Ok(Some((tok, line)))
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn line(&self) -> usize {
        self.toks.get(self.pos).or_else(|| self.toks.last()).map_or(1, |t| t.1)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), IoError> {
        let line = self.line();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            Some(t) => Err(err(line, format!("expected {what}, found {t:?}"))),
            None => Err(err(line, format!("expected {what}, found end of input"))),
        }
    }

    fn term(&mut self) -> Result<PTerm, IoError> {
        let line = self.line();
        match self.bump() {
            Some(Tok::Int(i)) => Ok(PTerm::Int(i)),
            Some(Tok::Float(x)) => Ok(PTerm::Float(x)),
            Some(Tok::Var(v)) => Ok(PTerm::Var(v)),
            Some(Tok::Atom(a)) => {
                if self.peek() == Some(&Tok::LParen) {
                    self.bump();
                    let args = self.seq(Tok::RParen)?;
                    Ok(PTerm::Compound(a, args))
                } else {
                    Ok(PTerm::Atom(a))
                }
            }
            Some(Tok::LBrack) => Ok(PTerm::List(self.seq(Tok::RBrack)?)),
            Some(Tok::LParen) => {
                let mut items = vec![self.term()?];
                let mut trailing = false;
                while self.peek() == Some(&Tok::Comma) {
                    self.bump();
                    if self.peek() == Some(&Tok::RParen) {
                        trailing = true;
                        break;
                    }
                    items.push(self.term()?);
                }
                self.expect(Tok::RParen, "')'")?;
                if items.len() == 1 && !trailing {
                    Ok(items.pop().unwrap())
                } else {
                    Ok(PTerm::Tuple(items))
                }
            }
            Some(t) => Err(err(line, format!("unexpected token {t:?}"))),
            None => Err(err(line, "unexpected end of input")),
        }
    }

    /// Comma-separated terms up to `close`; allows an empty sequence.
    fn seq(&mut self, close: Tok) -> Result<Vec<PTerm>, IoError> {
        let mut items = Vec::new();
        if self.peek() == Some(&close) {
            self.bump();
            return Ok(items);
        }
        loop {
            items.push(self.term()?);
            let line = self.line();
            match self.bump() {
                Some(Tok::Comma) => continue,
                Some(t) if t == close => return Ok(items),
                Some(t) => return Err(err(line, format!("expected ',' or {close:?}, found {t:?}"))),
                None => return Err(err(line, "unexpected end of input")),
            }
        }
    }

    fn clause(&mut self) -> Result<PClause, IoError> {
        let line = self.line();
        let head = self.term()?;
        let mut body = Vec::new();
        if self.peek() == Some(&Tok::Neck) {
            self.bump();
            loop {
                body.push(self.term()?);
                if self.peek() == Some(&Tok::Comma) {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::End, "'.'")?;
        Ok(PClause { head, body, line })
    }
}

/// Parses a whole file of clauses.
pub fn parse_clauses(src: &str) -> Result<Vec<PClause>, IoError> {
    let mut lexer = Lexer { src: src.as_bytes(), pos: 0, line: 1 };
    let mut toks = Vec::new();
    while let Some(t) = lexer.next()? {
        toks.push(t);
    }
    let mut parser = Parser { toks, pos: 0 };
    let mut out = Vec::new();
    while parser.peek().is_some() {
        out.push(parser.clause()?);
    }
    Ok(out)
}

/// Auto-typed ground constant: integers, floats, lists, otherwise symbols.
pub fn to_const(t: &PTerm, line: usize) -> Result<ConstValue, IoError> {
    match t {
        PTerm::Atom(a) => Ok(ConstValue::sym(a)),
        PTerm::Int(i) => Ok(ConstValue::Int(*i)),
        PTerm::Float(x) => Ok(ConstValue::Float(*x)),
        PTerm::List(items) => {
            let items = items.iter().map(|i| to_const(i, line)).collect::<Result<Vec<_>, _>>()?;
            Ok(ConstValue::list(items))
        }
        PTerm::Var(v) => Err(err(line, format!("variable {v} where a ground constant is required"))),
        PTerm::Tuple(_) | PTerm::Compound(..) => {
            Err(err(line, "compound terms are not supported as constants"))
        }
    }
}

fn to_term(t: &PTerm, vars: &mut HashMap<String, u32>, line: usize) -> Result<Term, IoError> {
    match t {
        PTerm::Var(name) => {
            let n = vars.len() as u32;
            Ok(Term::Var(Var(*vars.entry(name.clone()).or_insert(n))))
        }
        other => to_const(other, line).map(Term::Const),
    }
}

fn to_literal(t: &PTerm, vars: &mut HashMap<String, u32>, line: usize) -> Result<Literal, IoError> {
    let (name, args) = match t {
        PTerm::Atom(a) => (a.as_str(), &[][..]),
        PTerm::Compound(name, args) => (name.as_str(), args.as_slice()),
        other => return Err(err(line, format!("expected an atom, found {other:?}"))),
    };
    let args = args.iter().map(|a| to_term(a, vars, line)).collect::<Result<Vec<_>, _>>()?;
    if name == MAGIC_PRED {
        match args.as_slice() {
            [Term::Var(v)] => Ok(Literal::magic(*v)),
            _ => Err(err(line, "@magic takes exactly one variable")),
        }
    } else if name.starts_with('@') {
        Err(err(line, format!("unknown internal predicate {name}")))
    } else {
        Ok(Literal::new(name, args))
    }
}

pub fn to_clause(pc: &PClause) -> Result<Clause, IoError> {
    let mut vars = HashMap::new();
    let head = to_literal(&pc.head, &mut vars, pc.line)?;
    if head.is_magic() {
        return Err(err(pc.line, "a clause head cannot be a magic literal"));
    }
    let body = pc
        .body
        .iter()
        .map(|b| to_literal(b, &mut vars, pc.line))
        .collect::<Result<Vec<_>, _>>()?;
    let clause = Clause::new(head, body);
    clause.validate().map_err(|e| err(pc.line, e.to_string()))?;
    Ok(clause)
}

/// Parses a single clause such as `f(A):-head(A,7).`
pub fn parse_clause(src: &str) -> Result<Clause, IoError> {
    let clauses = parse_clauses(src)?;
    match clauses.as_slice() {
        [one] => to_clause(one),
        _ => Err(err(1, format!("expected exactly one clause, found {}", clauses.len()))),
    }
}
