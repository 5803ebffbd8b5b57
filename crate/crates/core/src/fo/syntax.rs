//! Formula syntax.
//!
//! ```text
//! formula := imp
//! imp     := or ("->" imp)?
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "~" unary | ("EX" | "ALL") var "." imp | atom | "(" imp ")"
//! atom    := name "(" var ("," var)* ")" | var "=" var
//! ```
//!
//! Variables and relation names match `[a-z][a-z0-9]*`. A quantifier body
//! extends to the end of the enclosing parenthesis.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use super::FoError;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(String, Vec<String>),
    Eq(String, String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn atom(name: &str, vars: &[&str]) -> Self {
        Formula::Atom(name.into(), vars.iter().map(|v| v.to_string()).collect())
    }

    pub fn eq(x: &str, y: &str) -> Self {
        Formula::Eq(x.into(), y.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(v: &str, f: Formula) -> Self {
        Formula::Exists(v.into(), Box::new(f))
    }

    pub fn forall(v: &str, f: Formula) -> Self {
        Formula::Forall(v.into(), Box::new(f))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut note = |v: &String, bound: &Vec<String>| {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        };
        match self {
            Formula::Atom(_, vs) => vs.iter().for_each(|v| note(v, bound)),
            Formula::Eq(x, y) => {
                note(x, bound);
                note(y, bound);
            }
            Formula::Not(a) => a.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, a) | Formula::Forall(v, a) => {
                bound.push(v.clone());
                a.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    fn all_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(_, vs) => out.extend(vs.iter().cloned()),
            Formula::Eq(x, y) => {
                out.insert(x.clone());
                out.insert(y.clone());
            }
            Formula::Not(a) => a.all_vars(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.all_vars(out);
                b.all_vars(out);
            }
            Formula::Exists(v, a) | Formula::Forall(v, a) => {
                out.insert(v.clone());
                a.all_vars(out);
            }
        }
    }

    /// Renames bound variables so that none shadows another variable in
    /// scope or coincides with a free variable.
    pub fn alpha_rename(&self) -> Formula {
        let mut used = BTreeSet::new();
        self.all_vars(&mut used);
        let free = self.free_vars();
        let mut scope: Vec<String> = free.iter().cloned().collect();
        let mut env = BTreeMap::new();
        let mut taken: BTreeSet<String> = free;
        self.rename(&mut env, &mut scope, &mut taken, &used)
    }

    fn rename(
        &self,
        env: &mut BTreeMap<String, String>,
        scope: &mut Vec<String>,
        taken: &mut BTreeSet<String>,
        used: &BTreeSet<String>,
    ) -> Formula {
        let look = |v: &String, env: &BTreeMap<String, String>| env.get(v).cloned().unwrap_or_else(|| v.clone());
        match self {
            Formula::Atom(r, vs) => Formula::Atom(r.clone(), vs.iter().map(|v| look(v, env)).collect()),
            Formula::Eq(x, y) => Formula::Eq(look(x, env), look(y, env)),
            Formula::Not(a) => Formula::not(a.rename(env, scope, taken, used)),
            Formula::And(a, b) => Formula::and(a.rename(env, scope, taken, used), b.rename(env, scope, taken, used)),
            Formula::Or(a, b) => Formula::or(a.rename(env, scope, taken, used), b.rename(env, scope, taken, used)),
            Formula::Implies(a, b) => {
                Formula::implies(a.rename(env, scope, taken, used), b.rename(env, scope, taken, used))
            }
            Formula::Exists(v, a) | Formula::Forall(v, a) => {
                let fresh = if taken.contains(v) {
                    (1..)
                        .map(|i| format!("{v}{i}"))
                        .find(|c| !taken.contains(c) && !used.contains(c))
                        .expect("unbounded supply")
                } else {
                    v.clone()
                };
                taken.insert(fresh.clone());
                let saved = env.insert(v.clone(), fresh.clone());
                scope.push(fresh.clone());
                let body = a.rename(env, scope, taken, used);
                scope.pop();
                match saved {
                    Some(s) => env.insert(v.clone(), s),
                    None => env.remove(v),
                };
                match self {
                    Formula::Exists(..) => Formula::Exists(fresh, Box::new(body)),
                    _ => Formula::Forall(fresh, Box::new(body)),
                }
            }
        }
    }

    /// Relation names with the arities at which they occur.
    pub fn relations(&self) -> Vec<(String, usize)> {
        let mut out = Vec::new();
        self.collect_relations(&mut out);
        out
    }

    fn collect_relations(&self, out: &mut Vec<(String, usize)>) {
        match self {
            Formula::Atom(r, vs) => out.push((r.clone(), vs.len())),
            Formula::Eq(..) => {}
            Formula::Not(a) | Formula::Exists(_, a) | Formula::Forall(_, a) => a.collect_relations(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_relations(out);
                b.collect_relations(out);
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(r, vs) => write!(f, "{r}({})", vs.join(",")),
            Formula::Eq(x, y) => write!(f, "{x}={y}"),
            Formula::Not(a) => write!(f, "~({a})"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
            Formula::Exists(v, a) => write!(f, "(EX {v}. {a})"),
            Formula::Forall(v, a) => write!(f, "(ALL {v}. {a})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Ex,
    All,
    Not,
    And,
    Or,
    Arrow,
    Eq,
    Dot,
    Comma,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, FoError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'~' => Tok::Not,
            b'&' => Tok::And,
            b'|' => Tok::Or,
            b'=' => Tok::Eq,
            b'.' => Tok::Dot,
            b',' => Tok::Comma,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Arrow
            }
            b'a'..=b'z' => {
                while i + 1 < bytes.len() && matches!(bytes[i + 1], b'a'..=b'z' | b'0'..=b'9') {
                    i += 1;
                }
                Tok::Ident(text[start..=i].to_string())
            }
            b'A'..=b'Z' => {
                while i + 1 < bytes.len() && bytes[i + 1].is_ascii_uppercase() {
                    i += 1;
                }
                match &text[start..=i] {
                    "EX" => Tok::Ex,
                    "ALL" => Tok::All,
                    w => return Err(FoError::Syntax { pos: start, msg: format!("unknown keyword '{w}'") }),
                }
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(FoError::Syntax { pos: start, msg: format!("unexpected character '{ch}'") });
            }
        };
        i += 1;
        out.push((start, tok));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn fail<T>(&self, msg: &str) -> Result<T, FoError> {
        Err(FoError::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), FoError> {
        if self.peek() == Some(&t) {
            self.at += 1;
            Ok(())
        } else {
            self.fail(&format!("expected {what}"))
        }
    }

    fn var(&mut self) -> Result<String, FoError> {
        match self.peek() {
            Some(Tok::Ident(v)) => {
                let v = v.clone();
                self.at += 1;
                Ok(v)
            }
            _ => self.fail("expected a variable"),
        }
    }

    fn imp(&mut self) -> Result<Formula, FoError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.at += 1;
            let rhs = self.imp()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, FoError> {
        let mut f = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.at += 1;
            f = Formula::or(f, self.and()?);
        }
        Ok(f)
    }

    fn and(&mut self) -> Result<Formula, FoError> {
        let mut f = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.at += 1;
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, FoError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.at += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Ex) | Some(Tok::All) => {
                let universal = self.peek() == Some(&Tok::All);
                self.at += 1;
                let v = self.var()?;
                self.expect(Tok::Dot, "'.' after the quantified variable")?;
                let body = self.imp()?;
                Ok(if universal { Formula::forall(&v, body) } else { Formula::exists(&v, body) })
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let f = self.imp()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(f)
            }
            Some(Tok::Ident(_)) => {
                let name = self.var()?;
                match self.peek() {
                    Some(Tok::LParen) => {
                        self.at += 1;
                        let mut args = vec![self.var()?];
                        while self.peek() == Some(&Tok::Comma) {
                            self.at += 1;
                            args.push(self.var()?);
                        }
                        self.expect(Tok::RParen, "')' after the arguments")?;
                        Ok(Formula::Atom(name, args))
                    }
                    Some(Tok::Eq) => {
                        self.at += 1;
                        Ok(Formula::Eq(name, self.var()?))
                    }
                    _ => self.fail("expected '(' or '='"),
                }
            }
            _ => self.fail("expected a formula"),
        }
    }
}

/// Parses and alpha-renames a formula. Relations must be used at a single
/// arity throughout.
pub fn parse_formula(text: &str) -> Result<Formula, FoError> {
    let mut p = Parser { toks: lex(text)?, at: 0, end: text.len() };
    let f = p.imp()?;
    if p.at < p.toks.len() {
        return p.fail("unexpected trailing input");
    }
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (name, k) in f.relations() {
        let expected = *seen.entry(name.clone()).or_insert(k);
        if expected != k {
            return Err(FoError::Arity { name, expected, found: k });
        }
    }
    Ok(f.alpha_rename())
}

impl FromStr for Formula {
    type Err = FoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}
