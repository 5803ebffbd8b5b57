//! Recovering the Cantor normal form of an ordinal from a presentation with
//! order and addition.
//!
//! The additively closed elements are the powers of `w`. Their order type
//! gives the leading exponent; the maximal one `m` is peeled off by passing
//! to `{g : m + g is defined}`, which presents the remainder of the
//! normal form. Order types of sets of powers below `w^(w^w)` are below
//! `w^w` and are read off by repeatedly removing maxima and passing to limit
//! points.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::automaton::{difference_limited, reduce, TreeAutomaton};
use crate::cnf::{cmp_poly, OrdCNF, Poly};
use crate::fo::{compile_limited, eval_sentence_limited, parse_formula, FoError, Presentation, DEFAULT_STATE_BUDGET};
use crate::presentation::{PresentationBundle, PresentationError};
use crate::tree::{SigmaTree, Symbol};

pub const DEFAULT_MAX_PEELS: usize = 10_000;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Error)]
pub enum DecideError {
    #[error("empty domain")]
    EmptyDomain,
    #[error("{what} exceeded {limit} iterations; the input does not present an ordinal")]
    IterationBudget { what: &'static str, limit: usize },
    #[error("peeled exponents increase at step {step}; the input does not present an ordinal")]
    NotDescending { step: usize },
    #[error(transparent)]
    Fo(#[from] FoError),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
}

impl From<crate::automaton::AutomatonError> for DecideError {
    fn from(e: crate::automaton::AutomatonError) -> Self {
        DecideError::Fo(e.into())
    }
}

/// One round of the order type computation: the set `S_k`, the number of
/// maxima removed from it, and the remaining set `T_k`.
#[derive(Clone, Debug)]
pub struct OtpRound {
    pub set: TreeAutomaton,
    pub removed: u64,
    pub rest: TreeAutomaton,
}

#[derive(Clone, Debug)]
pub struct PeelStep {
    pub exponent: Poly,
    pub witness: Option<SigmaTree<Symbol>>,
    pub dom_states: u32,
    pub le_states: u32,
    pub add_states: u32,
    pub closed_states: u32,
    pub rounds: Vec<OtpRound>,
}

#[derive(Clone, Debug, Default)]
pub struct DecoderTrace {
    pub steps: Vec<PeelStep>,
}

impl fmt::Display for DecoderTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            let w = s.witness.as_ref().map_or_else(|| "-".to_string(), |t| t.to_string());
            writeln!(
                f,
                "peel {i} exponent {} witness {w} dom {} le {} add {} closed {} rounds {}",
                s.exponent,
                s.dom_states,
                s.le_states,
                s.add_states,
                s.closed_states,
                s.rounds.len()
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Decider {
    pub max_states: usize,
    pub max_peels: usize,
    pub max_iterations: usize,
}

impl Default for Decider {
    fn default() -> Self {
        Decider { max_states: DEFAULT_STATE_BUDGET, max_peels: DEFAULT_MAX_PEELS, max_iterations: DEFAULT_MAX_ITERATIONS }
    }
}

const CLOSED: &str = "(EX g. lt(g,b)) & ALL g. ALL h. (lt(g,b) & lt(h,b) -> EX s. add(g,h,s) & lt(s,b))";
const CLOSED_BY_ABSORPTION: &str = "(EX g. lt(g,b)) & ALL g. (lt(g,b) -> add(g,b,b))";
const TOTAL: &str = "ALL x. ALL y. EX z. add(x,y,z)";
const MAX: &str = "s(m) & ALL y. (s(y) -> le(y,m))";
const MIN_OR_LIMIT: &str =
    "s(d) & ((ALL g. (s(g) -> le(d,g))) | ALL g. (s(g) & lt(g,d) -> EX h. s(h) & lt(g,h) & lt(h,d)))";

impl Decider {
    fn working(&self, b: &PresentationBundle) -> Result<Presentation, DecideError> {
        let p = b.presentation();
        let lt = compile_limited(p, &parse_formula("le(x,y) & ~(x=y)")?, &["x", "y"], self.max_states)?;
        Ok(p.clone().with_relation("lt", &lt)?)
    }

    fn unary(&self, p: &Presentation, text: &str, var: &str) -> Result<TreeAutomaton, DecideError> {
        Ok(compile_limited(p, &parse_formula(text)?, &[var], self.max_states)?)
    }

    fn with_set(p: &Presentation, s: &TreeAutomaton) -> Result<Presentation, DecideError> {
        Ok(p.clone().with_relation("s", s)?)
    }

    /// Nonzero `b` with `g + b = b` for all `g < b`. In an ordinal these
    /// are exactly the `b` of [`Decider::closed_elements_literal`].
    pub fn closed_elements(&self, b: &PresentationBundle) -> Result<TreeAutomaton, DecideError> {
        self.unary(&self.working(b)?, CLOSED_BY_ABSORPTION, "b")
    }

    /// Nonzero `b` with `g + h < b` for all `g, h < b`.
    pub fn closed_elements_literal(&self, b: &PresentationBundle) -> Result<TreeAutomaton, DecideError> {
        self.unary(&self.working(b)?, CLOSED, "b")
    }

    /// Order type of a definable set whose order type is below `w^w`.
    pub fn otp_small(&self, b: &PresentationBundle, s: &TreeAutomaton) -> Result<(Poly, Vec<OtpRound>), DecideError> {
        let base = self.working(b)?;
        self.otp_in(&base, s)
    }

    fn otp_in(&self, base: &Presentation, s: &TreeAutomaton) -> Result<(Poly, Vec<OtpRound>), DecideError> {
        let mut rounds = Vec::new();
        let mut set = s.clone();
        let mut coeffs = Vec::new();
        loop {
            if rounds.len() >= self.max_iterations {
                return Err(DecideError::IterationBudget { what: "order type rounds", limit: self.max_iterations });
            }
            let mut rest = set.clone();
            let mut removed = 0u64;
            while !rest.is_empty() {
                let max = self.unary(&Self::with_set(base, &rest)?, MAX, "m")?;
                if max.is_empty() {
                    break;
                }
                if removed as usize >= self.max_iterations {
                    return Err(DecideError::IterationBudget { what: "maximum removal", limit: self.max_iterations });
                }
                rest = reduce(&difference_limited(&rest, &max, self.max_states)?);
                removed += 1;
            }
            coeffs.push(removed);
            let done = rest.is_empty();
            let next = if done { None } else { Some(self.unary(&Self::with_set(base, &rest)?, MIN_OR_LIMIT, "d")?) };
            rounds.push(OtpRound { set, removed, rest });
            match next {
                None => break,
                Some(n) => set = n,
            }
        }
        Ok((Poly::new(coeffs), rounds))
    }

    /// The exponent of the leading term, with the maximal closed element as
    /// witness unless the whole structure is closed under addition.
    pub fn leading_exponent(&self, b: &PresentationBundle) -> Result<PeelStep, DecideError> {
        if b.dom().is_empty() {
            return Err(DecideError::EmptyDomain);
        }
        let base = self.working(b)?;
        let closed = self.unary(&base, CLOSED_BY_ABSORPTION, "b")?;
        let mut step = PeelStep {
            exponent: Poly::zero(),
            witness: None,
            dom_states: b.dom().n_states(),
            le_states: b.le().n_states(),
            add_states: b.add().n_states(),
            closed_states: closed.n_states(),
            rounds: Vec::new(),
        };
        if closed.is_empty() {
            return Ok(step);
        }
        let total = eval_sentence_limited(&base, &parse_formula(TOTAL)?, self.max_states)?;
        let below = if total {
            closed
        } else {
            let with = Self::with_set(&base, &closed)?;
            let max = self.unary(&with, MAX, "m")?;
            let m = max.extract_witness_letters().expect("a nonempty closed set below an ordinal has a maximum");
            let m = max.space().base_tree(&m);
            let with = with.bind_constant("top", &m)?;
            step.witness = Some(m);
            self.unary(&with, "s(x) & EX t. (top(t) & lt(x,t))", "x")?
        };
        let (e, rounds) = self.otp_in(&base, &below)?;
        step.exponent = e;
        step.rounds = rounds;
        Ok(step)
    }

    /// The structure `{g : m + g is defined}`.
    pub fn peel(&self, b: &PresentationBundle, m: &SigmaTree<Symbol>) -> Result<PresentationBundle, DecideError> {
        let p = b.presentation().clone().bind_constant("top", m)?;
        let dom = self.unary(&p, "EX t. EX s. (top(t) & add(t,g,s))", "g")?;
        Ok(b.with_domain(dom, None)?)
    }

    pub fn cnf_of(&self, b: &PresentationBundle) -> Result<(OrdCNF, DecoderTrace), DecideError> {
        let mut trace = DecoderTrace::default();
        let mut cur = b.clone();
        while !cur.dom().is_empty() {
            if trace.steps.len() >= self.max_peels {
                return Err(DecideError::IterationBudget { what: "peels", limit: self.max_peels });
            }
            let step = self.leading_exponent(&cur)?;
            let next = match &step.witness {
                Some(m) => Some(self.peel(&cur, m)?),
                None => None,
            };
            trace.steps.push(step);
            match next {
                Some(n) => cur = n,
                None => break,
            }
        }
        let mut terms: Vec<(Poly, num_bigint::BigUint)> = Vec::new();
        for s in &trace.steps {
            match terms.last_mut() {
                Some((e, c)) if *e == s.exponent => *c += 1u32,
                _ => terms.push((s.exponent.clone(), 1u32.into())),
            }
        }
        if let Some(i) = trace.steps.windows(2).position(|w| cmp_poly(&w[1].exponent, &w[0].exponent) == Ordering::Greater) {
            return Err(DecideError::NotDescending { step: i + 1 });
        }
        let cnf = OrdCNF::from_terms(terms).expect("exponents are strictly decreasing after merging");
        Ok((cnf, trace))
    }

    pub fn isomorphic(&self, a: &PresentationBundle, b: &PresentationBundle) -> Result<(bool, OrdCNF, OrdCNF), DecideError> {
        let (x, _) = self.cnf_of(a)?;
        let (y, _) = self.cnf_of(b)?;
        Ok((x == y, x, y))
    }
}
