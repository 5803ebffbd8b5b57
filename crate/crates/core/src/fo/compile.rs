//! Formula to automaton compilation.
//!
//! Every intermediate automaton over `k` coordinates accepts only tuples of
//! domain elements at the free variables. Negation is the difference from
//! all tuples of domain elements, or for wide tuples the complement followed
//! by restriction to the domain; a conjunction with a negated side is a
//! single difference.

use std::collections::HashMap;

use super::{FoError, Formula, Presentation};
use crate::automaton::{
    complement_limited, diagonal, difference_limited, intersect_limited, project, reduce, reindex, union,
    valid_convolution_language, TreeAutomaton,
};

pub const DEFAULT_STATE_BUDGET: usize = 1_000_000;

/// Largest `|dom|^k`, for `k <= 2`, for which negation subtracts from the
/// product of the domain over all coordinates instead of complementing and
/// restricting.
const DOM_PRODUCT_LIMIT: u64 = 1 << 16;

/// Whether the negation of `f` compiles without a complement.
fn negates_cheaply(f: &Formula) -> bool {
    matches!(f, Formula::Not(_) | Formula::Implies(..) | Formula::Forall(..))
}

pub struct Compiler<'a> {
    p: &'a Presentation,
    limit: usize,
    dom_at: HashMap<(usize, usize), TreeAutomaton>,
    dom_all: HashMap<usize, TreeAutomaton>,
}

impl<'a> Compiler<'a> {
    pub fn new(p: &'a Presentation, limit: usize) -> Self {
        Compiler { p, limit, dom_at: HashMap::new(), dom_all: HashMap::new() }
    }

    fn dom_at(&mut self, i: usize, k: usize) -> Result<TreeAutomaton, FoError> {
        if let Some(a) = self.dom_at.get(&(i, k)) {
            return Ok(a.clone());
        }
        let a = reindex(self.p.dom(), &[i], k)?;
        self.dom_at.insert((i, k), a.clone());
        Ok(a)
    }

    /// All tuples of `k` domain elements.
    fn dom_all(&mut self, k: usize) -> Result<TreeAutomaton, FoError> {
        if let Some(a) = self.dom_all.get(&k) {
            return Ok(a.clone());
        }
        let valid = valid_convolution_language(self.p.space(), k)?;
        let a = self.relativize(valid, &[])?;
        self.dom_all.insert(k, a.clone());
        Ok(a)
    }

    fn meet(&self, a: &TreeAutomaton, b: &TreeAutomaton) -> Result<TreeAutomaton, FoError> {
        Ok(reduce(&intersect_limited(a, b, self.limit)?))
    }

    /// Intersects with the domain on every coordinate not in `done`.
    fn relativize(&mut self, mut a: TreeAutomaton, done: &[usize]) -> Result<TreeAutomaton, FoError> {
        let k = a.arity();
        for i in (0..k).filter(|i| !done.contains(i)) {
            let d = self.dom_at(i, k)?;
            a = self.meet(&a, &d)?;
        }
        Ok(a)
    }

    fn position(vars: &[String], v: &str) -> usize {
        vars.iter().position(|x| x == v).expect("free variables are checked before compiling")
    }

    /// Automaton over `vars.len()` coordinates that agrees with `f` on tuples
    /// of domain elements and accepts only domain elements at the free
    /// variables of `f`; other coordinates are unconstrained.
    pub fn compile(&mut self, f: &Formula, vars: &[String]) -> Result<TreeAutomaton, FoError> {
        let free = f.free_vars();
        let own: Vec<String> = vars.iter().filter(|v| free.contains(*v)).cloned().collect();
        if own.is_empty() {
            let valid = valid_convolution_language(self.p.space(), vars.len())?;
            return Ok(if eval(self, f)? { valid } else { TreeAutomaton::empty(valid.space().clone()) });
        }
        let a = self.compile_exact(f, &own)?;
        if own.len() == vars.len() {
            return Ok(a);
        }
        let map: Vec<usize> = own.iter().map(|v| Self::position(vars, v)).collect();
        Ok(reduce(&reindex(&a, &map, vars.len())?))
    }

    /// Like [`Compiler::compile`] but accepting only domain elements on every
    /// coordinate.
    pub fn compile_full(&mut self, f: &Formula, vars: &[String]) -> Result<TreeAutomaton, FoError> {
        let free = f.free_vars();
        let a = self.compile(f, vars)?;
        let done: Vec<usize> = (0..vars.len()).filter(|&i| free.contains(&vars[i])).collect();
        self.relativize(a, &done)
    }

    /// `vars` is exactly the free variables of `f`.
    fn compile_exact(&mut self, f: &Formula, vars: &[String]) -> Result<TreeAutomaton, FoError> {
        let k = vars.len();
        match f {
            Formula::Atom(name, args) => {
                let r = self.p.relation(name).ok_or_else(|| FoError::UnknownRelation(name.clone()))?;
                let map: Vec<usize> = args.iter().map(|v| Self::position(vars, v)).collect();
                Ok(reduce(&reindex(r, &map, k)?))
            }
            Formula::Eq(x, y) => {
                let map = [Self::position(vars, x), Self::position(vars, y)];
                let a = reindex(&diagonal(self.p.space())?, &map, k)?;
                self.relativize(a, &[])
            }
            Formula::Not(g) => self.compile_not(g, vars),
            Formula::And(a, b) => match (&**a, &**b) {
                (pos, Formula::Not(neg)) | (Formula::Not(neg), pos) => {
                    let pa = self.compile_full(pos, vars)?;
                    let na = self.compile(neg, vars)?;
                    Ok(reduce(&difference_limited(&pa, &na, self.limit)?))
                }
                _ => {
                    let a = self.compile(a, vars)?;
                    let b = self.compile(b, vars)?;
                    self.meet(&a, &b)
                }
            },
            Formula::Or(a, b) => {
                let a = self.compile_full(a, vars)?;
                let b = self.compile_full(b, vars)?;
                Ok(reduce(&union(&a, &b)?))
            }
            Formula::Implies(a, b) => {
                let f = Formula::not(Formula::and((**a).clone(), Formula::not((**b).clone())));
                self.compile_exact(&f, vars)
            }
            Formula::Exists(v, g) => {
                let mut inner = vars.to_vec();
                inner.push(v.clone());
                if !g.free_vars().contains(v) {
                    return if self.p.dom().is_empty() {
                        Ok(TreeAutomaton::empty(valid_convolution_language(self.p.space(), k)?.space().clone()))
                    } else {
                        self.compile_exact(g, vars)
                    };
                }
                let a = self.compile(g, &inner)?;
                Ok(reduce(&project(&a, k)?))
            }
            Formula::Forall(v, g) => {
                let f = Formula::not(Formula::exists(v, Formula::not((**g).clone())));
                self.compile_exact(&f, vars)
            }
        }
    }

    fn compile_not(&mut self, g: &Formula, vars: &[String]) -> Result<TreeAutomaton, FoError> {
        match g {
            Formula::Not(h) => self.compile_exact(h, vars),
            Formula::Implies(a, b) => {
                self.compile_exact(&Formula::and((**a).clone(), Formula::not((**b).clone())), vars)
            }
            Formula::Forall(v, h) => self.compile_exact(&Formula::exists(v, Formula::not((**h).clone())), vars),
            Formula::And(a, b) if negates_cheaply(a) && negates_cheaply(b) => {
                let f = Formula::or(Formula::not((**a).clone()), Formula::not((**b).clone()));
                self.compile_exact(&f, vars)
            }
            _ => {
                let a = self.compile(g, vars)?;
                let k = vars.len() as u32;
                if k <= 2 && (self.p.dom().n_states() as u64).saturating_pow(k) <= DOM_PRODUCT_LIMIT {
                    let d = self.dom_all(vars.len())?;
                    Ok(reduce(&difference_limited(&d, &a, self.limit)?))
                } else {
                    let c = reduce(&complement_limited(&a, self.limit)?);
                    self.relativize(c, &[])
                }
            }
        }
    }
}

fn check_order(f: &Formula, free_order: &[String]) -> Result<(), FoError> {
    for (i, v) in free_order.iter().enumerate() {
        if free_order[..i].contains(v) {
            return Err(FoError::DuplicateVar(v.clone()));
        }
    }
    for v in f.free_vars() {
        if !free_order.contains(&v) {
            return Err(FoError::FreeVarMissing(v));
        }
    }
    Ok(())
}

/// Automaton over `free_order.len()` coordinates accepting exactly the
/// tuples of domain elements that satisfy `f`.
pub fn compile(p: &Presentation, f: &Formula, free_order: &[&str]) -> Result<TreeAutomaton, FoError> {
    compile_limited(p, f, free_order, DEFAULT_STATE_BUDGET)
}

pub fn compile_limited(
    p: &Presentation,
    f: &Formula,
    free_order: &[&str],
    limit: usize,
) -> Result<TreeAutomaton, FoError> {
    let order: Vec<String> = free_order.iter().map(|s| s.to_string()).collect();
    check_order(f, &order)?;
    p.check_formula(f)?;
    if order.is_empty() {
        return Err(FoError::Signature("a compiled formula needs at least one variable".into()));
    }
    let f = f.alpha_rename();
    Compiler::new(p, limit).compile_full(&f, &order)
}

/// Truth value of a sentence. An empty domain makes every existential
/// sentence false and every universal one true.
pub fn eval_sentence(p: &Presentation, f: &Formula) -> Result<bool, FoError> {
    eval_sentence_limited(p, f, DEFAULT_STATE_BUDGET)
}

pub fn eval_sentence_limited(p: &Presentation, f: &Formula, limit: usize) -> Result<bool, FoError> {
    let free = f.free_vars();
    if !free.is_empty() {
        return Err(FoError::FreeVarsPresent(free.into_iter().collect()));
    }
    p.check_formula(f)?;
    let f = f.alpha_rename();
    let mut c = Compiler::new(p, limit);
    eval(&mut c, &f)
}

fn eval(c: &mut Compiler<'_>, f: &Formula) -> Result<bool, FoError> {
    Ok(match f {
        Formula::Not(g) => !eval(c, g)?,
        Formula::And(a, b) => eval(c, a)? && eval(c, b)?,
        Formula::Or(a, b) => eval(c, a)? || eval(c, b)?,
        Formula::Implies(a, b) => !eval(c, a)? || eval(c, b)?,
        Formula::Exists(v, g) => !c.compile_full(g, std::slice::from_ref(v))?.is_empty(),
        Formula::Forall(v, g) => c.compile_full(&Formula::not((**g).clone()), std::slice::from_ref(v))?.is_empty(),
        Formula::Atom(..) | Formula::Eq(..) => unreachable!("sentences have no free variables"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{equivalent, LetterSpace};
    use crate::fo::parse_formula;
    use crate::tree::SigmaTree;

    /// Unary codes `0`, `0(1,0)`, ... of 0, 1, ... with `le` and `succ`.
    fn chain() -> Presentation {
        let dom: TreeAutomaton = "alphabet 0 1\nstates d z\ninitial d\nleafaccept d 0\nleafaccept z 0\ntrans d 0 d z\n"
            .parse()
            .unwrap();
        let le: TreeAutomaton = "alphabet 0 1\narity 2\nstates l z w v\ninitial l\n\
             leafaccept l 0|0\nleafaccept z 0|0\nleafaccept w ~|0\nleafaccept v ~|0\n\
             trans l 0|0 l z\ntrans l 0|0 w v\ntrans w ~|0 w v\n"
            .parse()
            .unwrap();
        Presentation::new(dom).unwrap().with_relation("le", &le).unwrap()
    }

    fn num(n: usize) -> SigmaTree<String> {
        (0..n).fold(SigmaTree::leaf("0".to_string()), |t, _| SigmaTree::node("0".into(), t, SigmaTree::leaf("0".into())))
    }

    #[test]
    fn chain_fixture_is_the_order_of_naturals() {
        let p = chain();
        let le = p.relation("le").unwrap();
        for a in 0..5 {
            for b in 0..5 {
                assert_eq!(le.accepts_tuple(&[&num(a), &num(b)]).unwrap(), a <= b);
            }
        }
    }

    #[test]
    fn equality_compiles_to_domain() {
        let p = chain();
        let a = compile(&p, &parse_formula("x=x").unwrap(), &["x"]).unwrap();
        assert!(equivalent(&a, p.dom()).unwrap());
    }

    #[test]
    fn sentences() {
        let p = chain();
        let yes = ["EX x. x=x", "ALL x. EX y. (le(x,y) & ~(x=y))", "EX x. ALL y. le(x,y)", "ALL x. ALL y. (le(x,y) | le(y,x))"];
        let no = ["EX x. ALL y. le(y,x)", "ALL x. EX y. (le(y,x) & ~(x=y))"];
        for s in yes {
            assert!(eval_sentence(&p, &parse_formula(s).unwrap()).unwrap(), "{s}");
        }
        for s in no {
            assert!(!eval_sentence(&p, &parse_formula(s).unwrap()).unwrap(), "{s}");
        }
    }

    #[test]
    fn successor_is_definable() {
        let p = chain();
        let f = parse_formula("le(x,y) & ~(x=y) & ALL z. (le(x,z) & ~(x=z) -> le(y,z))").unwrap();
        let a = compile(&p, &f, &["x", "y"]).unwrap();
        for x in 0..6 {
            for y in 0..6 {
                assert_eq!(a.accepts_tuple(&[&num(x), &num(y)]).unwrap(), y == x + 1, "{x} {y}");
            }
        }
    }

    #[test]
    fn constants_and_errors() {
        let p = chain().bind_constant("three", &num(3)).unwrap();
        let a = compile(&p, &parse_formula("three(x)").unwrap(), &["x"]).unwrap();
        assert_eq!(a.accepted_trees(20).len(), 1);
        assert!(matches!(chain().bind_constant("c", &"1".parse().unwrap()), Err(FoError::NotInDomain(_))));
        let f = parse_formula("le(x,y)").unwrap();
        assert!(matches!(compile(&p, &f, &["x"]), Err(FoError::FreeVarMissing(_))));
        assert!(matches!(compile(&p, &f, &["x", "x", "y"]), Err(FoError::DuplicateVar(_))));
        let g = parse_formula("lt(x,y)").unwrap();
        assert!(matches!(compile(&p, &g, &["x", "y"]), Err(FoError::UnknownRelation(_))));
        let h = parse_formula("le(x)").unwrap();
        assert!(matches!(compile(&p, &h, &["x"]), Err(FoError::Arity { .. })));
        assert!(matches!(eval_sentence(&p, &f), Err(FoError::FreeVarsPresent(_))));
        assert!(matches!(
            compile_limited(&p, &parse_formula("ALL z. le(x,z)").unwrap(), &["x"], 2),
            Err(FoError::Budget { .. })
        ));
    }

    #[test]
    fn empty_domain() {
        let p = Presentation::new(TreeAutomaton::empty(LetterSpace::binary(1))).unwrap();
        assert!(!eval_sentence(&p, &parse_formula("EX x. x=x").unwrap()).unwrap());
        assert!(eval_sentence(&p, &parse_formula("ALL x. ~(x=x)").unwrap()).unwrap());
    }

    #[test]
    fn language_identities() {
        let p = chain();
        for s in ["le(x,y)", "EX z. (le(x,z) & le(z,y) & ~(z=x))", "x=y | ~le(y,x)"] {
            let f = parse_formula(s).unwrap();
            let a = compile(&p, &f, &["x", "y"]).unwrap();
            let nn = compile(&p, &Formula::not(Formula::not(f.clone())), &["x", "y"]).unwrap();
            let aa = compile(&p, &Formula::and(f.clone(), f.clone()), &["x", "y"]).unwrap();
            assert!(equivalent(&a, &nn).unwrap());
            assert!(equivalent(&a, &aa).unwrap());
        }
    }
}
