//! Deterministic bottom-up automata: subset construction and minimization.
//!
//! Transitions are stored per letter in factored form. Each state has a left
//! class and a right class per letter (the set of nondeterministic
//! transitions it can feed on that side), and a table maps pairs of classes
//! to the successor. States sharing a class share a row of the table.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use rustc_hash::FxHashMap;

use super::{AutomatonError, Letter, LetterSpace, State, Transition, TreeAutomaton};
use crate::tree::SigmaTree;

/// The implicit rejecting sink; every missing entry leads here.
pub const SINK: State = State::MAX;

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug)]
struct LetterTable {
    letter: Letter,
    lclass: Vec<u32>,
    rclass: Vec<u32>,
    table: FxHashMap<(u32, u32), State>,
}

impl LetterTable {
    fn step(&self, x: State, y: State) -> State {
        let (l, r) = (self.lclass[x as usize], self.rclass[y as usize]);
        if l == NONE || r == NONE {
            return SINK;
        }
        self.table.get(&(l, r)).copied().unwrap_or(SINK)
    }
}

#[derive(Clone, Debug)]
pub struct BottomUpDfa {
    space: LetterSpace,
    n_states: u32,
    leaf: FxHashMap<Letter, State>,
    letters: Vec<LetterTable>,
    index: FxHashMap<Letter, usize>,
    accepting: FixedBitSet,
}

/// Distinct masks of one side of one letter.
#[derive(Default)]
struct MaskSet {
    ids: HashMap<FixedBitSet, u32>,
    masks: Vec<FixedBitSet>,
}

impl MaskSet {
    fn intern(&mut self, m: FixedBitSet) -> (u32, bool) {
        if let Some(&id) = self.ids.get(&m) {
            return (id, false);
        }
        let id = self.masks.len() as u32;
        self.ids.insert(m.clone(), id);
        self.masks.push(m);
        (id, true)
    }
}

impl BottomUpDfa {
    /// Subset construction; only reachable subsets become states.
    pub fn determinize(a: &TreeAutomaton) -> Self {
        let init: FixedBitSet = {
            let mut b = FixedBitSet::with_capacity(a.n_states() as usize);
            for &s in a.initial() {
                b.insert(s as usize);
            }
            b
        };
        Self::build(a, a.n_states(), |set| !set.is_disjoint(&init), usize::MAX).expect("no budget")
    }

    /// Subset construction over `u`, where subsets containing no state
    /// below `tracked` are merged into the sink.
    pub(crate) fn build(
        u: &TreeAutomaton,
        tracked: u32,
        accept: impl Fn(&FixedBitSet) -> bool,
        limit: usize,
    ) -> Result<Self, AutomatonError> {
        let n = u.n_states() as usize;
        let tracked = tracked as usize;
        let mut letters: Vec<Letter> = u.transitions().iter().map(|t| t.letter).collect();
        letters.sort_unstable();
        letters.dedup();
        let per_letter: Vec<Vec<Transition>> = letters
            .iter()
            .map(|&l| u.transitions_with_letter(l).copied().collect())
            .collect();
        // For each letter and nondeterministic state, the transitions it
        // feeds on the left and on the right.
        let feeds: Vec<(Vec<Vec<u32>>, Vec<Vec<u32>>)> = per_letter
            .iter()
            .map(|trans| {
                let mut left = vec![Vec::new(); n];
                let mut right = vec![Vec::new(); n];
                for (ti, t) in trans.iter().enumerate() {
                    left[t.left as usize].push(ti as u32);
                    right[t.right as usize].push(ti as u32);
                }
                (left, right)
            })
            .collect();

        let mut subsets: Vec<FixedBitSet> = Vec::new();
        let mut ids: HashMap<FixedBitSet, State> = HashMap::new();
        let mut intern = |set: FixedBitSet, subsets: &mut Vec<FixedBitSet>| -> Result<State, AutomatonError> {
            if set.ones().next().is_none_or(|first| first >= tracked) {
                return Ok(SINK);
            }
            if let Some(&id) = ids.get(&set) {
                return Ok(id);
            }
            if subsets.len() >= limit {
                return Err(AutomatonError::StateBudget { limit });
            }
            let id = subsets.len() as State;
            ids.insert(set.clone(), id);
            subsets.push(set);
            Ok(id)
        };

        let mut leaf = FxHashMap::default();
        let mut leaf_sets: FxHashMap<Letter, FixedBitSet> = FxHashMap::default();
        for &(s, l) in u.leaf_rules() {
            leaf_sets
                .entry(l)
                .or_insert_with(|| FixedBitSet::with_capacity(n))
                .insert(s as usize);
        }
        let mut leaf_list: Vec<_> = leaf_sets.into_iter().collect();
        leaf_list.sort_by_key(|(l, _)| *l);
        for (l, set) in leaf_list {
            let id = intern(set, &mut subsets)?;
            if id != SINK {
                leaf.insert(l, id);
            }
        }

        let mut tables: Vec<LetterTable> = letters
            .iter()
            .map(|&letter| LetterTable { letter, lclass: Vec::new(), rclass: Vec::new(), table: FxHashMap::default() })
            .collect();
        let mut lsets: Vec<MaskSet> = letters.iter().map(|_| MaskSet::default()).collect();
        let mut rsets: Vec<MaskSet> = letters.iter().map(|_| MaskSet::default()).collect();
        let mut next = 0usize;
        while next < subsets.len() {
            let q = next;
            next += 1;
            for (li, trans) in per_letter.iter().enumerate() {
                let (fl, fr) = &feeds[li];
                let mut lm = FixedBitSet::with_capacity(trans.len());
                let mut rm = FixedBitSet::with_capacity(trans.len());
                for s in subsets[q].ones() {
                    for &ti in &fl[s] {
                        lm.insert(ti as usize);
                    }
                    for &ti in &fr[s] {
                        rm.insert(ti as usize);
                    }
                }
                let combine = |lm: &FixedBitSet, rm: &FixedBitSet| -> Option<FixedBitSet> {
                    let mut out: Option<FixedBitSet> = None;
                    for ti in lm.intersection(rm) {
                        out.get_or_insert_with(|| FixedBitSet::with_capacity(n))
                            .insert(trans[ti].src as usize);
                    }
                    out
                };
                let lid = if lm.is_clear() {
                    NONE
                } else {
                    let (lid, fresh) = lsets[li].intern(lm);
                    if fresh {
                        for rid in 0..rsets[li].masks.len() {
                            if let Some(res) = combine(&lsets[li].masks[lid as usize], &rsets[li].masks[rid]) {
                                let id = intern(res, &mut subsets)?;
                                if id != SINK {
                                    tables[li].table.insert((lid, rid as u32), id);
                                }
                            }
                        }
                    }
                    lid
                };
                let rid = if rm.is_clear() {
                    NONE
                } else {
                    let (rid, fresh) = rsets[li].intern(rm);
                    if fresh {
                        for lid in 0..lsets[li].masks.len() {
                            if let Some(res) = combine(&lsets[li].masks[lid], &rsets[li].masks[rid as usize]) {
                                let id = intern(res, &mut subsets)?;
                                if id != SINK {
                                    tables[li].table.insert((lid as u32, rid), id);
                                }
                            }
                        }
                    }
                    rid
                };
                tables[li].lclass.push(lid);
                tables[li].rclass.push(rid);
            }
        }
        let mut accepting = FixedBitSet::with_capacity(subsets.len());
        for (i, s) in subsets.iter().enumerate() {
            if accept(s) {
                accepting.insert(i);
            }
        }
        let index = letters.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        Ok(BottomUpDfa {
            space: u.space().clone(),
            n_states: subsets.len() as u32,
            leaf,
            letters: tables,
            index,
            accepting,
        })
    }

    pub fn space(&self) -> &LetterSpace {
        &self.space
    }

    /// Number of states besides the sink.
    pub fn n_states(&self) -> u32 {
        self.n_states
    }

    pub fn is_accepting(&self, q: State) -> bool {
        q != SINK && self.accepting.contains(q as usize)
    }

    /// All states are reachable, so the language is empty iff no state
    /// accepts.
    pub fn is_empty(&self) -> bool {
        self.accepting.is_clear()
    }

    pub fn step(&self, letter: Letter, x: State, y: State) -> State {
        if x == SINK || y == SINK {
            return SINK;
        }
        match self.index.get(&letter) {
            Some(&li) => self.letters[li].step(x, y),
            None => SINK,
        }
    }

    pub fn eval(&self, t: &SigmaTree<Letter>) -> State {
        match t {
            SigmaTree::Leaf(l) => self.leaf.get(l).copied().unwrap_or(SINK),
            SigmaTree::Node(l, a, b) => {
                let x = self.eval(a);
                if x == SINK {
                    return SINK;
                }
                let y = self.eval(b);
                self.step(*l, x, y)
            }
        }
    }

    pub fn accepts_letters(&self, t: &SigmaTree<Letter>) -> bool {
        self.is_accepting(self.eval(t))
    }

    /// Moore-style refinement to the coarsest congruence separating
    /// accepting from rejecting states; states equivalent to the sink are
    /// dropped.
    pub fn minimize(&self) -> Self {
        let n = self.n_states as usize;
        let sink = n;
        let mut class: Vec<u32> = (0..=n)
            .map(|q| u32::from(q < n && self.accepting.contains(q)))
            .collect();
        let mut count = if self.accepting.is_clear() { 1 } else { 2 };
        let mut rows: Vec<(Vec<u32>, Vec<u32>)>;
        loop {
            let sink_class = class[sink];
            rows = self.letters.iter().map(|t| row_ids(t, &class, sink_class)).collect();
            let mut ids: HashMap<(u32, Vec<(u32, u32)>), u32> = HashMap::new();
            let mut next = vec![0u32; n + 1];
            for q in 0..=n {
                let sig: Vec<(u32, u32)> = if q == sink {
                    vec![(NONE, NONE); self.letters.len()]
                } else {
                    self.letters
                        .iter()
                        .zip(&rows)
                        .map(|(t, (lrow, rrow))| {
                            let l = t.lclass[q];
                            let r = t.rclass[q];
                            (
                                if l == NONE { NONE } else { lrow[l as usize] },
                                if r == NONE { NONE } else { rrow[r as usize] },
                            )
                        })
                        .collect()
                };
                let len = ids.len() as u32;
                next[q] = *ids.entry((class[q], sig)).or_insert(len);
            }
            let new_count = ids.len();
            class = next;
            if new_count == count {
                break;
            }
            count = new_count;
        }
        let sink_class = class[sink];
        let mut renum: FxHashMap<u32, State> = FxHashMap::default();
        let mut rep: Vec<usize> = Vec::new();
        let mut accepting = FixedBitSet::with_capacity(count);
        for q in 0..n {
            if class[q] == sink_class {
                continue;
            }
            let len = renum.len() as State;
            let id = *renum.entry(class[q]).or_insert_with(|| {
                rep.push(q);
                len
            });
            if self.accepting.contains(q) {
                accepting.grow(id as usize + 1);
                accepting.insert(id as usize);
            }
        }
        let map = |q: State| -> State {
            if q == SINK || class[q as usize] == sink_class {
                SINK
            } else {
                renum[&class[q as usize]]
            }
        };
        let leaf = self
            .leaf
            .iter()
            .filter_map(|(&l, &q)| {
                let m = map(q);
                (m != SINK).then_some((l, m))
            })
            .collect();
        let letters = self
            .letters
            .iter()
            .zip(&rows)
            .map(|(t, (lrow, rrow))| {
                let pick = |cls: &Vec<u32>, row: &Vec<u32>| -> Vec<u32> {
                    rep.iter()
                        .map(|&q| if cls[q] == NONE { NONE } else { row[cls[q] as usize] })
                        .collect()
                };
                let mut table = FxHashMap::default();
                for (&(l, r), &res) in &t.table {
                    let (l, r, res) = (lrow[l as usize], rrow[r as usize], map(res));
                    if l != NONE && r != NONE && res != SINK {
                        table.insert((l, r), res);
                    }
                }
                LetterTable { letter: t.letter, lclass: pick(&t.lclass, lrow), rclass: pick(&t.rclass, rrow), table }
            })
            .collect();
        let n_states = renum.len() as u32;
        accepting.grow(n_states as usize);
        BottomUpDfa {
            space: self.space.clone(),
            n_states,
            leaf,
            letters,
            index: self.index.clone(),
            accepting,
        }
    }

    /// The same language as a trimmed top-down automaton.
    pub fn to_nta(&self) -> TreeAutomaton {
        let initial = self.accepting.ones().map(|q| q as State).collect();
        let leaf = self.leaf.iter().map(|(&l, &q)| (q, l)).collect();
        let mut trans = Vec::new();
        for t in &self.letters {
            let group = |cls: &Vec<u32>| {
                let mut g: FxHashMap<u32, Vec<State>> = FxHashMap::default();
                for (q, &c) in cls.iter().enumerate() {
                    if c != NONE {
                        g.entry(c).or_default().push(q as State);
                    }
                }
                g
            };
            let (lg, rg) = (group(&t.lclass), group(&t.rclass));
            for (&(l, r), &src) in &t.table {
                let (Some(ls), Some(rs)) = (lg.get(&l), rg.get(&r)) else {
                    continue;
                };
                for &left in ls {
                    for &right in rs {
                        trans.push(Transition { src, letter: t.letter, left, right });
                    }
                }
            }
        }
        TreeAutomaton::from_raw(self.space.clone(), self.n_states, initial, leaf, trans).trim()
    }
}

/// Interned rows of the table under `class`: for each left class the
/// successor classes along right classes, and vice versa. A row leading
/// only to the sink class gets `NONE`.
fn row_ids(t: &LetterTable, class: &[u32], sink_class: u32) -> (Vec<u32>, Vec<u32>) {
    let nl = t.lclass.iter().filter(|&&c| c != NONE).map(|&c| c + 1).max().unwrap_or(0) as usize;
    let nr = t.rclass.iter().filter(|&&c| c != NONE).map(|&c| c + 1).max().unwrap_or(0) as usize;
    let nl = nl.max(t.table.keys().map(|k| k.0 as usize + 1).max().unwrap_or(0));
    let nr = nr.max(t.table.keys().map(|k| k.1 as usize + 1).max().unwrap_or(0));
    let mut lrows: Vec<Vec<(u32, u32)>> = vec![Vec::new(); nl];
    let mut rrows: Vec<Vec<(u32, u32)>> = vec![Vec::new(); nr];
    for (&(l, r), &res) in &t.table {
        let c = class[res as usize];
        if c != sink_class {
            lrows[l as usize].push((r, c));
            rrows[r as usize].push((l, c));
        }
    }
    let intern = |rows: Vec<Vec<(u32, u32)>>| -> Vec<u32> {
        let mut ids: HashMap<Vec<(u32, u32)>, u32> = HashMap::new();
        rows.into_iter()
            .map(|mut row| {
                if row.is_empty() {
                    return NONE;
                }
                row.sort_unstable();
                let len = ids.len() as u32;
                *ids.entry(row).or_insert(len)
            })
            .collect()
    };
    (intern(lrows), intern(rrows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::testing::random_automaton;
    use crate::tree::enumerate_trees;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn determinization_preserves_membership() {
        let s = LetterSpace::new(["a", "b"], 1).unwrap();
        let all: Vec<_> = enumerate_trees(s.base(), 7)
            .iter()
            .map(|t| s.base_tree_letters(t).unwrap())
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..30 {
            let a = random_automaton(&mut rng, &s, 3, 0.3);
            let d = BottomUpDfa::determinize(&a);
            assert!(d.n_states() as u64 <= 1 << a.n_states());
            let m = d.minimize();
            assert!(m.n_states() <= d.n_states());
            let back = d.to_nta();
            for t in &all {
                let x = a.accepts_letters(t);
                assert_eq!(d.accepts_letters(t), x);
                assert_eq!(m.accepts_letters(t), x);
                assert_eq!(back.accepts_letters(t), x);
            }
        }
    }

    #[test]
    fn empty_language_has_no_accepting_state() {
        let s = LetterSpace::new(["a"], 1).unwrap();
        let d = BottomUpDfa::determinize(&TreeAutomaton::empty(s));
        assert!(d.is_empty());
        assert_eq!(d.minimize().n_states(), 0);
    }

    #[test]
    fn minimization_merges_redundant_copies() {
        let s = LetterSpace::new(["a", "b"], 1).unwrap();
        // two disjoint copies of "some leaf is labelled b"
        let mut trans = Vec::new();
        let mut leaf = Vec::new();
        for off in [0, 2] {
            leaf.push((off, 1));
            leaf.push((off, 2));
            leaf.push((off + 1, 2));
            for letter in [1, 2] {
                for (l, r) in [(0, 1), (1, 0)] {
                    trans.push(Transition { src: off + 1, letter, left: off + l, right: off + r });
                }
                trans.push(Transition { src: off, letter, left: off, right: off });
            }
        }
        let a = TreeAutomaton::new(s, 4, vec![1, 3], leaf, trans).unwrap();
        let m = BottomUpDfa::determinize(&a).minimize();
        assert_eq!(m.n_states(), 2);
    }
}
