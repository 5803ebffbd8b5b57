//! Structural checks for presentations of ordinals with addition.

use std::fmt;

use super::{eval_sentence_limited, parse_formula, FoError, Presentation};

pub const CHECKS: &[(&str, &str)] = &[
    ("le reflexive", "ALL x. le(x,x)"),
    ("le antisymmetric", "ALL x. ALL y. (le(x,y) & le(y,x) -> x=y)"),
    ("le transitive", "ALL x. ALL y. ALL z. (le(x,y) & le(y,z) -> le(x,z))"),
    ("le total", "ALL x. ALL y. (le(x,y) | le(y,x))"),
    ("add functional", "ALL x. ALL y. ALL z. ALL w. (add(x,y,z) & add(x,y,w) -> z=w)"),
    ("minimum is additive identity", "ALL z. ((ALL u. le(z,u)) -> ALL x. add(z,x,x))"),
    (
        "add strictly monotone on the right",
        "ALL x. ALL y. ALL v. ALL s. ALL t. (add(x,y,s) & add(x,v,t) & le(y,v) & ~(y=v) -> le(s,t) & ~(s=t))",
    ),
    (
        "definedness closed downwards",
        "ALL x. ALL y. ALL u. ALL v. (le(u,x) & le(v,y) & (EX s. add(x,y,s)) -> EX t. add(u,v,t))",
    ),
    (
        "add associative where defined",
        "ALL x. ALL y. ALL z. ALL w. (((EX u. add(x,y,u) & add(u,z,w)) -> EX v. add(y,z,v) & add(x,v,w)) \
         & ((EX v. add(y,z,v) & add(x,v,w)) -> EX u. add(x,y,u) & add(u,z,w)))",
    ),
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SanityReport {
    pub results: Vec<(String, bool)>,
}

impl SanityReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|(_, ok)| *ok)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.results.iter().filter(|(_, ok)| !ok).map(|(n, _)| n.as_str()).collect()
    }
}

impl fmt::Display for SanityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, ok) in &self.results {
            writeln!(f, "{} {name}", if *ok { "ok  " } else { "FAIL" })?;
        }
        Ok(())
    }
}

/// Evaluates the checks in [`CHECKS`]. Requires a binary `le` and a ternary
/// `add`; well-foundedness is not checked.
pub fn sanity_check(p: &Presentation, limit: usize) -> Result<SanityReport, FoError> {
    let sig = p.signature();
    for (name, k) in [("le", 2), ("add", 3)] {
        match sig.get(name) {
            Some(&a) if a == k => {}
            Some(&a) => return Err(FoError::Arity { name: name.into(), expected: k, found: a }),
            None => return Err(FoError::UnknownRelation(name.into())),
        }
    }
    let mut results = Vec::new();
    for (name, text) in CHECKS {
        let f = parse_formula(text).expect("built-in sentences parse");
        results.push((name.to_string(), eval_sentence_limited(p, &f, limit)?));
    }
    Ok(SanityReport { results })
}
