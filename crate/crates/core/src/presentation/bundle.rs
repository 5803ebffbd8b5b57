//! Presentations of ordinals with order and addition, and their on-disk form.
//!
//! A bundle directory holds `meta` (lines `level N` and optionally
//! `bound CNF`) and the automata `dom.aut`, `le.aut`, `add.aut`.

use std::fs;
use std::path::Path;

use super::{add_automaton, dom_automaton, encode, in_range, le_automaton, PresentationError};
use crate::automaton::TreeAutomaton;
use crate::cnf::OrdCNF;
use crate::fo::{compile_limited, parse_formula, Presentation, DEFAULT_STATE_BUDGET};

pub const DEFAULT_LEVEL_CEILING: usize = 4;

#[derive(Clone, Debug)]
pub struct PresentationBundle {
    level: usize,
    bound: Option<OrdCNF>,
    presentation: Presentation,
}

/// The ordinal `w^(w^n)` with order and addition on level-`n` codes.
pub fn build_presentation(n: usize) -> Result<PresentationBundle, PresentationError> {
    build_presentation_with_ceiling(n, DEFAULT_LEVEL_CEILING)
}

pub fn build_presentation_with_ceiling(n: usize, ceiling: usize) -> Result<PresentationBundle, PresentationError> {
    if n == 0 || n > ceiling {
        return Err(PresentationError::Level { level: n, ceiling });
    }
    let p = Presentation::new(dom_automaton(n))?
        .with_relation("le", &le_automaton(n)?)?
        .with_relation("add", &add_automaton(n)?)?;
    Ok(PresentationBundle { level: n, bound: None, presentation: p })
}

/// The ordinal `a` as the codes below `a`, with order and partial addition.
pub fn restrict(b: &PresentationBundle, a: &OrdCNF) -> Result<PresentationBundle, PresentationError> {
    restrict_limited(b, a, DEFAULT_STATE_BUDGET)
}

pub fn restrict_limited(b: &PresentationBundle, a: &OrdCNF, limit: usize) -> Result<PresentationBundle, PresentationError> {
    if !in_range(b.level, a) {
        return Err(PresentationError::OutOfRange(format!("{a} has no level-{} code", b.level)));
    }
    let with_c = b.presentation.clone().bind_constant("bound", &encode(b.level, a)?)?;
    let f = parse_formula("EX c. (bound(c) & le(x,c) & ~(x=c))")?;
    let dom = compile_limited(&with_c, &f, &["x"], limit)?;
    let bound = match &b.bound {
        Some(old) if old < a => old.clone(),
        _ => a.clone(),
    };
    b.with_domain(dom, Some(bound))
}

impl PresentationBundle {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn bound(&self) -> Option<&OrdCNF> {
        self.bound.as_ref()
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn dom(&self) -> &TreeAutomaton {
        self.presentation.dom()
    }

    pub fn le(&self) -> &TreeAutomaton {
        self.presentation.relation("le").expect("bundles carry le")
    }

    pub fn add(&self) -> &TreeAutomaton {
        self.presentation.relation("add").expect("bundles carry add")
    }

    /// Same order and addition on a smaller domain.
    pub fn with_domain(&self, dom: TreeAutomaton, bound: Option<OrdCNF>) -> Result<PresentationBundle, PresentationError> {
        let p = Presentation::new(dom)?
            .with_relation("le", self.le())?
            .with_relation("add", self.add())?;
        Ok(PresentationBundle { level: self.level, bound, presentation: p })
    }

    pub fn save(&self, dir: &Path) -> Result<(), PresentationError> {
        fs::create_dir_all(dir)?;
        let mut meta = format!("level {}\n", self.level);
        if let Some(b) = &self.bound {
            meta.push_str(&format!("bound {b}\n"));
        }
        fs::write(dir.join("meta"), meta)?;
        fs::write(dir.join("dom.aut"), self.dom().to_string())?;
        fs::write(dir.join("le.aut"), self.le().to_string())?;
        fs::write(dir.join("add.aut"), self.add().to_string())?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<PresentationBundle, PresentationError> {
        let bad = |msg: String| PresentationError::Format(format!("{}: {msg}", dir.display()));
        let meta = fs::read_to_string(dir.join("meta"))?;
        let mut level = None;
        let mut bound = None;
        for line in meta.lines().map(str::trim).filter(|l| !l.is_empty()) {
            match line.split_once(' ') {
                Some(("level", v)) => level = Some(v.trim().parse::<usize>().map_err(|e| bad(format!("level: {e}")))?),
                Some(("bound", v)) => bound = Some(v.trim().parse::<OrdCNF>().map_err(|e| bad(format!("bound: {e}")))?),
                _ => return Err(bad(format!("unrecognised meta line '{line}'"))),
            }
        }
        let level = level.filter(|&n| n >= 1).ok_or_else(|| bad("missing or zero level".into()))?;
        let read = |name: &str| -> Result<TreeAutomaton, PresentationError> {
            let text = fs::read_to_string(dir.join(name))?;
            text.parse().map_err(|e| bad(format!("{name}: {e}")))
        };
        let (dom, le, add) = (read("dom.aut")?, read("le.aut")?, read("add.aut")?);
        for (name, a, k) in [("dom.aut", &dom, 1), ("le.aut", &le, 2), ("add.aut", &add, 3)] {
            if a.arity() != k {
                return Err(bad(format!("{name} has arity {}, expected {k}", a.arity())));
            }
        }
        let p = Presentation::new(dom)?.with_relation("le", &le)?.with_relation("add", &add)?;
        Ok(PresentationBundle { level, bound, presentation: p })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fo::{eval_sentence, sanity_check};
    use crate::presentation::decode;

    const TOTAL: &str = "ALL x. ALL y. EX z. add(x,y,z)";

    fn c(s: &str) -> OrdCNF {
        s.parse().unwrap()
    }

    fn members(b: &PresentationBundle, max_nodes: usize) -> Vec<OrdCNF> {
        let s = b.dom().space().clone();
        let mut v: Vec<OrdCNF> = b
            .dom()
            .accepted_trees(max_nodes)
            .iter()
            .map(|t| decode(b.level(), &s.base_tree(t)).unwrap())
            .collect();
        v.sort();
        v
    }

    #[test]
    fn full_presentations_pass_sanity_checks() {
        for n in 1..=2 {
            let b = build_presentation(n).unwrap();
            let report = sanity_check(b.presentation(), DEFAULT_STATE_BUDGET).unwrap();
            assert!(report.passed(), "level {n}:\n{report}");
            assert!(eval_sentence(b.presentation(), &parse_formula(TOTAL).unwrap()).unwrap());
        }
        assert!(matches!(build_presentation(5), Err(PresentationError::Level { .. })));
    }

    #[test]
    fn restrictions() {
        let b1 = build_presentation(1).unwrap();
        for k in 1..=6u32 {
            let r = restrict(&b1, &OrdCNF::nat(k)).unwrap();
            let want: Vec<OrdCNF> = (0..k).map(OrdCNF::nat).collect();
            assert_eq!(members(&r, 15), want);
        }
        let total = parse_formula(TOTAL).unwrap();
        for (a, closed) in [("w*2", false), ("w", true), ("w^2", true), ("w^2*2+1", false), ("1", true)] {
            let r = restrict(&b1, &c(a)).unwrap();
            assert_eq!(eval_sentence(r.presentation(), &total).unwrap(), closed, "{a}");
            assert!(sanity_check(r.presentation(), DEFAULT_STATE_BUDGET).unwrap().passed(), "{a}");
        }
        let r = restrict(&b1, &c("w*2+3")).unwrap();
        let below: Vec<OrdCNF> = members(&r, 9);
        assert!(below.iter().all(|x| *x < c("w*2+3")));
        assert!(below.contains(&c("w+5")));
    }

    #[test]
    fn save_and_load() {
        let b = restrict(&build_presentation(1).unwrap(), &c("w+2")).unwrap();
        let dir = std::env::temp_dir().join(format!("ordauto-bundle-{}", std::process::id()));
        b.save(&dir).unwrap();
        let l = PresentationBundle::load(&dir).unwrap();
        assert_eq!(l.level(), 1);
        assert_eq!(l.bound(), Some(&c("w+2")));
        assert_eq!(members(&l, 13), members(&b, 13));
        fs::write(dir.join("meta"), "level x\n").unwrap();
        assert!(matches!(PresentationBundle::load(&dir), Err(PresentationError::Format(_))));
        fs::remove_dir_all(&dir).unwrap();
    }
}
