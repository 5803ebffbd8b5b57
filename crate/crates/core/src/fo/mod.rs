//! First-order logic over tree-automatic structures.
//!
//! A [`Presentation`] names a unary domain relation `dom` and further
//! relations, each given by an automaton over convolutions. Formulas are
//! compiled to automata whose accepted tuples are exactly the satisfying
//! assignments of domain elements; quantifiers range over `dom`.

mod compile;
mod sanity;
mod syntax;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::automaton::{intersect, reduce, reindex, AutomatonError, LetterSpace, TreeAutomaton};
use crate::tree::{SigmaTree, Symbol};

pub use compile::{compile, compile_limited, eval_sentence, eval_sentence_limited, Compiler, DEFAULT_STATE_BUDGET};
pub use sanity::{sanity_check, SanityReport, CHECKS};
pub use syntax::{parse_formula, Formula};

#[derive(Debug, Error)]
pub enum FoError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("relation '{name}' has arity {expected}, used with {found} arguments")]
    Arity { name: String, expected: usize, found: usize },
    #[error("unknown relation '{0}'")]
    UnknownRelation(String),
    #[error("free variable '{0}' is missing from the variable order")]
    FreeVarMissing(String),
    #[error("variable '{0}' repeats in the variable order")]
    DuplicateVar(String),
    #[error("sentence expected; free variables: {}", .0.join(", "))]
    FreeVarsPresent(Vec<String>),
    #[error("tree {0} is not in the domain")]
    NotInDomain(String),
    #[error("bad signature: {0}")]
    Signature(String),
    #[error("state budget of {limit} exceeded")]
    Budget { limit: usize },
    #[error(transparent)]
    Automaton(AutomatonError),
}

impl From<AutomatonError> for FoError {
    fn from(e: AutomatonError) -> Self {
        match e {
            AutomatonError::StateBudget { limit } => FoError::Budget { limit },
            other => FoError::Automaton(other),
        }
    }
}

/// A structure given by automata. Every relation is kept intersected with
/// the domain on each coordinate.
#[derive(Clone, Debug)]
pub struct Presentation {
    dom: TreeAutomaton,
    relations: BTreeMap<String, TreeAutomaton>,
}

fn valid_name(name: &str) -> bool {
    let mut cs = name.chars();
    matches!(cs.next(), Some('a'..='z')) && cs.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit())
}

impl Presentation {
    pub fn new(dom: TreeAutomaton) -> Result<Self, FoError> {
        if dom.arity() != 1 {
            return Err(FoError::Signature(format!("dom must be unary, got arity {}", dom.arity())));
        }
        Ok(Presentation { dom: reduce(&dom), relations: BTreeMap::new() })
    }

    /// Adds `name`, restricted to tuples of domain elements.
    pub fn with_relation(mut self, name: &str, aut: &TreeAutomaton) -> Result<Self, FoError> {
        if !valid_name(name) || name == "dom" {
            return Err(FoError::Signature(format!("invalid relation name '{name}'")));
        }
        if !aut.space().same_base(self.dom.space()) {
            return Err(FoError::Signature(format!("relation '{name}' uses a different alphabet")));
        }
        let k = aut.arity();
        let mut r = aut.clone();
        for i in 0..k {
            r = intersect(&r, &reindex(&self.dom, &[i], k)?)?;
        }
        self.relations.insert(name.to_string(), reduce(&r));
        Ok(self)
    }

    /// Adds a unary relation holding of `t` alone.
    pub fn bind_constant(self, name: &str, t: &SigmaTree<Symbol>) -> Result<Self, FoError> {
        let letters = self.space().base_tree_letters(t).map_err(|_| FoError::NotInDomain(t.to_string()))?;
        if !self.dom.accepts_letters(&letters) {
            return Err(FoError::NotInDomain(t.to_string()));
        }
        let single = TreeAutomaton::singleton(self.space().clone(), &letters);
        self.with_relation(name, &single)
    }

    pub fn space(&self) -> &LetterSpace {
        self.dom.space()
    }

    pub fn dom(&self) -> &TreeAutomaton {
        &self.dom
    }

    pub fn relation(&self, name: &str) -> Option<&TreeAutomaton> {
        if name == "dom" {
            Some(&self.dom)
        } else {
            self.relations.get(name)
        }
    }

    pub fn signature(&self) -> BTreeMap<String, usize> {
        let mut sig: BTreeMap<String, usize> = self.relations.iter().map(|(n, a)| (n.clone(), a.arity())).collect();
        sig.insert("dom".into(), 1);
        sig
    }

    pub fn check_formula(&self, f: &Formula) -> Result<(), FoError> {
        for (name, k) in f.relations() {
            let r = self.relation(&name).ok_or_else(|| FoError::UnknownRelation(name.clone()))?;
            if r.arity() != k {
                return Err(FoError::Arity { name, expected: r.arity(), found: k });
            }
        }
        Ok(())
    }
}
