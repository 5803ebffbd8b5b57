//! Top-down nondeterministic tree automata over (convolution) alphabets.
//!
//! Letters are dense integer codes. For a base alphabet of size `b` and a
//! convolution arity `k`, every part of a letter is a digit in base `b + 1`
//! where digit 0 is the pad and digit `j + 1` is base symbol `j`; the letter
//! is `sum(part_i * (b + 1)^i)`. Code 0 (all pads) is never a letter.
//!
//! Leaf acceptance is a relation between states and letters: a leaf labelled
//! `a` may carry state `q` iff `(q, a)` is a leaf rule.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;
use std::rc::Rc;
use std::sync::{Arc, OnceLock};

use fixedbitset::FixedBitSet;
use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::tree::{ConvSymbol, SigmaTree, Symbol, TreeError};

mod dfa;
mod format;
mod ops;
mod reduce;

pub use dfa::BottomUpDfa;
pub use ops::{
    complement, complement_limited, cylindrify, diagonal, difference, difference_is_empty,
    difference_limited, equivalent, intersect, intersect_limited, project, reindex, union,
    valid_convolution_language,
};
pub use reduce::reduce;

pub type State = u32;
pub type Letter = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("coordinate {position} is out of range for arity {arity}")]
    BadPosition { position: usize, arity: usize },
    #[error("unknown symbol '{0}'")]
    UnknownSymbol(String),
    #[error("state {0} is out of range")]
    BadState(State),
    #[error("invalid alphabet: {0}")]
    BadAlphabet(String),
    #[error("state budget of {limit} exceeded")]
    StateBudget { limit: usize },
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// A base alphabet together with a convolution arity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LetterSpace {
    base: Arc<[Symbol]>,
    arity: usize,
    bound: u32,
}

fn is_base_symbol(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

impl LetterSpace {
    pub fn new<I, S>(base: I, arity: usize) -> Result<Self, AutomatonError>
    where
        I: IntoIterator<Item = S>,
        S: Into<Symbol>,
    {
        let mut symbols: Vec<Symbol> = base.into_iter().map(Into::into).collect();
        symbols.sort();
        symbols.dedup();
        if symbols.is_empty() {
            return Err(AutomatonError::BadAlphabet("empty base alphabet".into()));
        }
        if let Some(bad) = symbols.iter().find(|s| !is_base_symbol(s)) {
            return Err(AutomatonError::BadAlphabet(format!("'{bad}' is not a valid symbol")));
        }
        Self::from_arc(symbols.into(), arity)
    }

    fn from_arc(base: Arc<[Symbol]>, arity: usize) -> Result<Self, AutomatonError> {
        if arity == 0 {
            return Err(AutomatonError::BadAlphabet("arity must be at least 1".into()));
        }
        let radix = base.len() as u64 + 1;
        let mut bound: u64 = 1;
        for _ in 0..arity {
            bound = bound.saturating_mul(radix);
        }
        if bound > (1 << 30) {
            return Err(AutomatonError::BadAlphabet(format!(
                "{arity}-ary convolutions over {} symbols are too large",
                base.len()
            )));
        }
        Ok(LetterSpace {
            base,
            arity,
            bound: bound as u32,
        })
    }

    /// The space over `{0, 1}` used by ordinal presentations.
    pub fn binary(arity: usize) -> Self {
        Self::new(["0", "1"], arity).expect("binary space is valid")
    }

    pub fn with_arity(&self, arity: usize) -> Result<Self, AutomatonError> {
        Self::from_arc(self.base.clone(), arity)
    }

    pub fn base(&self) -> &[Symbol] {
        &self.base
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn radix(&self) -> u32 {
        self.base.len() as u32 + 1
    }

    /// All letter codes.
    pub fn letters(&self) -> std::ops::Range<Letter> {
        1..self.bound
    }

    /// One past the largest letter code.
    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn same_base(&self, other: &LetterSpace) -> bool {
        self.base == other.base
    }

    /// Digit of coordinate `i`: 0 for the pad, `j + 1` for base symbol `j`.
    pub fn part(&self, letter: Letter, i: usize) -> u32 {
        (letter / self.radix().pow(i as u32)) % self.radix()
    }

    pub fn parts(&self, letter: Letter) -> Vec<u32> {
        (0..self.arity).map(|i| self.part(letter, i)).collect()
    }

    pub fn from_parts(&self, parts: &[u32]) -> Letter {
        debug_assert_eq!(parts.len(), self.arity);
        parts.iter().rev().fold(0, |acc, &p| acc * self.radix() + p)
    }

    pub fn base_index(&self, sym: &str) -> Option<u32> {
        self.base.binary_search_by(|s| s.as_str().cmp(sym)).ok().map(|i| i as u32)
    }

    pub fn symbol(&self, letter: Letter) -> ConvSymbol {
        ConvSymbol(
            self.parts(letter)
                .into_iter()
                .map(|p| (p > 0).then(|| self.base[p as usize - 1].clone()))
                .collect(),
        )
    }

    pub fn letter_of(&self, sym: &ConvSymbol) -> Result<Letter, AutomatonError> {
        if sym.arity() != self.arity {
            return Err(AutomatonError::AlphabetMismatch(format!(
                "symbol {sym} has {} parts, expected {}",
                sym.arity(),
                self.arity
            )));
        }
        let parts = sym
            .0
            .iter()
            .map(|p| match p {
                None => Ok(0),
                Some(s) => self
                    .base_index(s)
                    .map(|j| j + 1)
                    .ok_or_else(|| AutomatonError::UnknownSymbol(s.clone())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let letter = self.from_parts(&parts);
        if letter == 0 {
            return Err(AutomatonError::UnknownSymbol(sym.to_string()));
        }
        Ok(letter)
    }

    /// Text of a letter: the base symbol for arity 1, the convolution
    /// symbol otherwise.
    pub fn render(&self, letter: Letter) -> String {
        self.symbol(letter).to_string()
    }

    pub fn parse_letter(&self, text: &str) -> Result<Letter, AutomatonError> {
        let sym: ConvSymbol = text.parse()?;
        self.letter_of(&sym)
    }

    pub fn tree_letters(&self, t: &SigmaTree<ConvSymbol>) -> Result<SigmaTree<Letter>, AutomatonError> {
        Ok(match t {
            SigmaTree::Leaf(s) => SigmaTree::Leaf(self.letter_of(s)?),
            SigmaTree::Node(s, l, r) => {
                SigmaTree::node(self.letter_of(s)?, self.tree_letters(l)?, self.tree_letters(r)?)
            }
        })
    }

    pub fn base_tree_letters(&self, t: &SigmaTree<Symbol>) -> Result<SigmaTree<Letter>, AutomatonError> {
        if self.arity != 1 {
            return Err(AutomatonError::AlphabetMismatch(format!(
                "a plain tree needs arity 1, the automaton has arity {}",
                self.arity
            )));
        }
        Ok(match t {
            SigmaTree::Leaf(s) => SigmaTree::Leaf(self.plain_letter(s)?),
            SigmaTree::Node(s, l, r) => SigmaTree::node(
                self.plain_letter(s)?,
                self.base_tree_letters(l)?,
                self.base_tree_letters(r)?,
            ),
        })
    }

    fn plain_letter(&self, s: &str) -> Result<Letter, AutomatonError> {
        self.base_index(s)
            .map(|j| j + 1)
            .ok_or_else(|| AutomatonError::UnknownSymbol(s.to_string()))
    }

    pub fn conv_tree(&self, t: &SigmaTree<Letter>) -> SigmaTree<ConvSymbol> {
        t.map(&mut |&l| self.symbol(l))
    }

    /// Plain tree of an arity-1 letter tree.
    pub fn base_tree(&self, t: &SigmaTree<Letter>) -> SigmaTree<Symbol> {
        debug_assert_eq!(self.arity, 1);
        t.map(&mut |&l| self.base[l as usize - 1].clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub src: State,
    pub letter: Letter,
    pub left: State,
    pub right: State,
}

#[derive(Debug, Default)]
struct Index {
    trans_start: Vec<usize>,
    leaf_start: Vec<usize>,
    by_letter: FxHashMap<Letter, Vec<u32>>,
    leaf_by_letter: FxHashMap<Letter, Vec<State>>,
}

#[derive(Clone)]
pub struct TreeAutomaton {
    space: LetterSpace,
    n_states: u32,
    initial: Vec<State>,
    leaf: Vec<(State, Letter)>,
    trans: Vec<Transition>,
    index: Arc<OnceLock<Index>>,
}

impl fmt::Debug for TreeAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TreeAutomaton")
            .field("arity", &self.space.arity)
            .field("states", &self.n_states)
            .field("initial", &self.initial.len())
            .field("leaf_rules", &self.leaf.len())
            .field("transitions", &self.trans.len())
            .finish()
    }
}

impl TreeAutomaton {
    pub fn new(
        space: LetterSpace,
        n_states: u32,
        initial: Vec<State>,
        leaf: Vec<(State, Letter)>,
        trans: Vec<Transition>,
    ) -> Result<Self, AutomatonError> {
        let check_state = |s: State| if s < n_states { Ok(()) } else { Err(AutomatonError::BadState(s)) };
        let check_letter = |l: Letter| {
            if space.letters().contains(&l) {
                Ok(())
            } else {
                Err(AutomatonError::UnknownSymbol(format!("letter code {l}")))
            }
        };
        for &s in &initial {
            check_state(s)?;
        }
        for &(s, l) in &leaf {
            check_state(s)?;
            check_letter(l)?;
        }
        for t in &trans {
            check_state(t.src)?;
            check_state(t.left)?;
            check_state(t.right)?;
            check_letter(t.letter)?;
        }
        Ok(Self::from_raw(space, n_states, initial, leaf, trans))
    }

    pub(crate) fn from_raw(
        space: LetterSpace,
        n_states: u32,
        mut initial: Vec<State>,
        mut leaf: Vec<(State, Letter)>,
        mut trans: Vec<Transition>,
    ) -> Self {
        initial.sort_unstable();
        initial.dedup();
        leaf.sort_unstable();
        leaf.dedup();
        trans.sort_unstable();
        trans.dedup();
        TreeAutomaton {
            space,
            n_states,
            initial,
            leaf,
            trans,
            index: Arc::new(OnceLock::new()),
        }
    }

    /// The automaton with no states.
    pub fn empty(space: LetterSpace) -> Self {
        Self::from_raw(space, 0, vec![], vec![], vec![])
    }

    /// One state accepting every tree over the letter space (including
    /// convolution trees that do not split into valid trees).
    pub fn universal(space: LetterSpace) -> Self {
        let leaf = space.letters().map(|l| (0, l)).collect();
        let trans = space
            .letters()
            .map(|letter| Transition {
                src: 0,
                letter,
                left: 0,
                right: 0,
            })
            .collect();
        Self::from_raw(space, 1, vec![0], leaf, trans)
    }

    /// Accepts exactly `t`.
    pub fn singleton(space: LetterSpace, t: &SigmaTree<Letter>) -> Self {
        let mut leaf = Vec::new();
        let mut trans = Vec::new();
        let mut next = 0;
        fn go(
            t: &SigmaTree<Letter>,
            next: &mut u32,
            leaf: &mut Vec<(State, Letter)>,
            trans: &mut Vec<Transition>,
        ) -> State {
            let me = *next;
            *next += 1;
            match t {
                SigmaTree::Leaf(l) => leaf.push((me, *l)),
                SigmaTree::Node(l, a, b) => {
                    let left = go(a, next, leaf, trans);
                    let right = go(b, next, leaf, trans);
                    trans.push(Transition {
                        src: me,
                        letter: *l,
                        left,
                        right,
                    });
                }
            }
            me
        }
        go(t, &mut next, &mut leaf, &mut trans);
        Self::from_raw(space, next, vec![0], leaf, trans)
    }

    pub fn space(&self) -> &LetterSpace {
        &self.space
    }

    pub fn arity(&self) -> usize {
        self.space.arity
    }

    pub fn n_states(&self) -> u32 {
        self.n_states
    }

    pub fn initial(&self) -> &[State] {
        &self.initial
    }

    pub fn leaf_rules(&self) -> &[(State, Letter)] {
        &self.leaf
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.trans
    }

    /// `states + leaf rules + transitions`, a rough size measure.
    pub fn size(&self) -> usize {
        self.n_states as usize + self.leaf.len() + self.trans.len()
    }

    fn index(&self) -> &Index {
        self.index.get_or_init(|| {
            let n = self.n_states as usize;
            let mut trans_start = vec![0; n + 1];
            for t in &self.trans {
                trans_start[t.src as usize + 1] += 1;
            }
            let mut leaf_start = vec![0; n + 1];
            for &(s, _) in &self.leaf {
                leaf_start[s as usize + 1] += 1;
            }
            for i in 0..n {
                trans_start[i + 1] += trans_start[i];
                leaf_start[i + 1] += leaf_start[i];
            }
            let mut by_letter: FxHashMap<Letter, Vec<u32>> = FxHashMap::default();
            for (i, t) in self.trans.iter().enumerate() {
                by_letter.entry(t.letter).or_default().push(i as u32);
            }
            let mut leaf_by_letter: FxHashMap<Letter, Vec<State>> = FxHashMap::default();
            for &(s, l) in &self.leaf {
                leaf_by_letter.entry(l).or_default().push(s);
            }
            Index {
                trans_start,
                leaf_start,
                by_letter,
                leaf_by_letter,
            }
        })
    }

    /// Transitions leaving `s`, sorted by letter.
    pub fn transitions_from(&self, s: State) -> &[Transition] {
        let ix = self.index();
        &self.trans[ix.trans_start[s as usize]..ix.trans_start[s as usize + 1]]
    }

    /// Leaf rules of `s`, sorted by letter.
    pub fn leaves_of(&self, s: State) -> &[(State, Letter)] {
        let ix = self.index();
        &self.leaf[ix.leaf_start[s as usize]..ix.leaf_start[s as usize + 1]]
    }

    pub(crate) fn transitions_with_letter(&self, letter: Letter) -> impl Iterator<Item = &Transition> {
        self.index()
            .by_letter
            .get(&letter)
            .into_iter()
            .flatten()
            .map(move |&i| &self.trans[i as usize])
    }

    /// States from which the subtree can be accepted.
    fn run_states(&self, t: &SigmaTree<Letter>) -> FixedBitSet {
        let mut set = FixedBitSet::with_capacity(self.n_states as usize);
        match t {
            SigmaTree::Leaf(l) => {
                if let Some(states) = self.index().leaf_by_letter.get(l) {
                    for &s in states {
                        set.insert(s as usize);
                    }
                }
            }
            SigmaTree::Node(l, a, b) => {
                let left = self.run_states(a);
                if left.is_clear() {
                    return set;
                }
                let right = self.run_states(b);
                for tr in self.transitions_with_letter(*l) {
                    if left.contains(tr.left as usize) && right.contains(tr.right as usize) {
                        set.insert(tr.src as usize);
                    }
                }
            }
        }
        set
    }

    pub fn accepts_letters(&self, t: &SigmaTree<Letter>) -> bool {
        let states = self.run_states(t);
        self.initial.iter().any(|&s| states.contains(s as usize))
    }

    /// Membership of a plain tree (arity 1 only).
    pub fn accepts(&self, t: &SigmaTree<Symbol>) -> Result<bool, AutomatonError> {
        Ok(self.accepts_letters(&self.space.base_tree_letters(t)?))
    }

    pub fn accepts_conv(&self, t: &SigmaTree<ConvSymbol>) -> Result<bool, AutomatonError> {
        Ok(self.accepts_letters(&self.space.tree_letters(t)?))
    }

    /// Membership of the convolution of a tuple of plain trees.
    pub fn accepts_tuple(&self, trees: &[&SigmaTree<Symbol>]) -> Result<bool, AutomatonError> {
        if trees.len() != self.arity() {
            return Err(AutomatonError::AlphabetMismatch(format!(
                "{} trees given to an automaton of arity {}",
                trees.len(),
                self.arity()
            )));
        }
        let conv = crate::tree::convolve(trees)?;
        self.accepts_conv(&conv)
    }

    /// For every transition, the distinct child states, and per state the
    /// transitions in which it occurs as a child.
    fn watchers(&self) -> Vec<Vec<u32>> {
        let mut w = vec![Vec::new(); self.n_states as usize];
        for (i, t) in self.trans.iter().enumerate() {
            w[t.left as usize].push(i as u32);
            if t.right != t.left {
                w[t.right as usize].push(i as u32);
            }
        }
        w
    }

    /// States from which some tree is accepted.
    pub fn productive(&self) -> FixedBitSet {
        self.productive_where(|_| true)
    }

    /// States from which some tree using only letters allowed by `keep` is
    /// accepted.
    pub(crate) fn productive_where(&self, keep: impl Fn(Letter) -> bool) -> FixedBitSet {
        let n = self.n_states as usize;
        let mut prod = FixedBitSet::with_capacity(n);
        let mut queue = Vec::new();
        for &(s, l) in &self.leaf {
            if keep(l) && !prod.put(s as usize) {
                queue.push(s);
            }
        }
        let watchers = self.watchers();
        let mut missing: Vec<u8> = self
            .trans
            .iter()
            .map(|t| if t.left == t.right { 1 } else { 2 })
            .collect();
        while let Some(s) = queue.pop() {
            for &ti in &watchers[s as usize] {
                missing[ti as usize] -= 1;
                if missing[ti as usize] == 0 && keep(self.trans[ti as usize].letter) {
                    let src = self.trans[ti as usize].src;
                    if !prod.put(src as usize) {
                        queue.push(src);
                    }
                }
            }
        }
        prod
    }

    pub fn is_empty(&self) -> bool {
        let prod = self.productive();
        !self.initial.iter().any(|&s| prod.contains(s as usize))
    }

    /// Keeps only states that are productive and reachable from an initial
    /// state through transitions with productive children.
    pub fn trim(&self) -> Self {
        let n = self.n_states as usize;
        let prod = self.productive();
        let mut reach = FixedBitSet::with_capacity(n);
        let mut stack: Vec<State> = Vec::new();
        for &s in &self.initial {
            if prod.contains(s as usize) && !reach.put(s as usize) {
                stack.push(s);
            }
        }
        while let Some(s) = stack.pop() {
            for t in self.transitions_from(s) {
                if prod.contains(t.left as usize) && prod.contains(t.right as usize) {
                    for c in [t.left, t.right] {
                        if !reach.put(c as usize) {
                            stack.push(c);
                        }
                    }
                }
            }
        }
        if reach.count_ones(..) == n {
            return self.clone();
        }
        let mut renum = vec![u32::MAX; n];
        let mut next = 0;
        for s in reach.ones() {
            renum[s] = next;
            next += 1;
        }
        let keep = |s: State| renum[s as usize] != u32::MAX;
        let initial = self.initial.iter().filter(|&&s| keep(s)).map(|&s| renum[s as usize]).collect();
        let leaf = self
            .leaf
            .iter()
            .filter(|&&(s, _)| keep(s))
            .map(|&(s, l)| (renum[s as usize], l))
            .collect();
        let trans = self
            .trans
            .iter()
            .filter(|t| keep(t.src) && keep(t.left) && keep(t.right))
            .map(|t| Transition {
                src: renum[t.src as usize],
                letter: t.letter,
                left: renum[t.left as usize],
                right: renum[t.right as usize],
            })
            .collect();
        Self::from_raw(self.space.clone(), next, initial, leaf, trans)
    }

    /// Smallest accepted tree size per state.
    fn min_sizes(&self) -> Vec<Option<usize>> {
        let n = self.n_states as usize;
        let mut size: Vec<Option<usize>> = vec![None; n];
        let mut heap = BinaryHeap::new();
        for &(s, _) in &self.leaf {
            heap.push(Reverse((1usize, s)));
        }
        let watchers = self.watchers();
        while let Some(Reverse((d, s))) = heap.pop() {
            if size[s as usize].is_some() {
                continue;
            }
            size[s as usize] = Some(d);
            for &ti in &watchers[s as usize] {
                let t = &self.trans[ti as usize];
                if size[t.src as usize].is_some() {
                    continue;
                }
                if let (Some(a), Some(b)) = (size[t.left as usize], size[t.right as usize]) {
                    heap.push(Reverse((1 + a + b, t.src)));
                }
            }
        }
        size
    }

    /// A smallest accepted tree; ties are broken by the enumeration order of
    /// trees (shape in path order first, then labels in preorder, letters
    /// compared by code).
    pub fn extract_witness_letters(&self) -> Option<SigmaTree<Letter>> {
        let sizes = self.min_sizes();
        let m = self.initial.iter().filter_map(|&s| sizes[s as usize]).min()?;
        let mut memo = HashMap::new();
        let best = self
            .initial
            .iter()
            .filter_map(|&s| self.best_of_size(s, m, &sizes, &mut memo))
            .min()?;
        let mut shape = best.0.iter();
        let mut labels = best.1.iter();
        Some(rebuild(&mut shape, &mut labels))
    }

    pub fn extract_witness(&self) -> Option<SigmaTree<ConvSymbol>> {
        self.extract_witness_letters().map(|t| self.space.conv_tree(&t))
    }

    /// Lexicographically least (shape code, preorder labels) among trees of
    /// exactly `n` nodes accepted from `s`. Shape codes list nodes in
    /// preorder with 0 for internal and 1 for leaf; they are prefix-free, so
    /// the least code of a node is composed from the least codes of its
    /// children.
    fn best_of_size(
        &self,
        s: State,
        n: usize,
        sizes: &[Option<usize>],
        memo: &mut HashMap<(State, usize), Option<Rc<(Vec<u8>, Vec<Letter>)>>>,
    ) -> Option<Rc<(Vec<u8>, Vec<Letter>)>> {
        if let Some(hit) = memo.get(&(s, n)) {
            return hit.clone();
        }
        let min = sizes[s as usize];
        let result = if min.is_none_or(|m| m > n) || n % 2 == 0 {
            None
        } else if n == 1 {
            self.leaves_of(s)
                .first()
                .map(|&(_, l)| Rc::new((vec![1u8], vec![l])))
        } else {
            let mut best: Option<(Vec<u8>, Vec<Letter>)> = None;
            for t in self.transitions_from(s) {
                let (Some(ml), Some(mr)) = (sizes[t.left as usize], sizes[t.right as usize]) else {
                    continue;
                };
                let mut n1 = ml;
                while n1 + mr < n {
                    let n2 = n - 1 - n1;
                    if let Some(a) = self.best_of_size(t.left, n1, sizes, memo) {
                        if let Some(b) = self.best_of_size(t.right, n2, sizes, memo) {
                            let mut shape = Vec::with_capacity(n);
                            shape.push(0);
                            shape.extend_from_slice(&a.0);
                            shape.extend_from_slice(&b.0);
                            let mut labels = Vec::with_capacity(n);
                            labels.push(t.letter);
                            labels.extend_from_slice(&a.1);
                            labels.extend_from_slice(&b.1);
                            let cand = (shape, labels);
                            if best.as_ref().is_none_or(|b| cand < *b) {
                                best = Some(cand);
                            }
                        }
                    }
                    n1 += 2;
                }
            }
            best.map(Rc::new)
        };
        memo.insert((s, n), result.clone());
        result
    }

    /// All accepted trees with at most `max_nodes` nodes, in enumeration
    /// order. Intended for small languages.
    pub fn accepted_trees(&self, max_nodes: usize) -> Vec<SigmaTree<Letter>> {
        let n = self.n_states as usize;
        // table[s][k] = accepted trees of size 2k+1 from s, as (shape, labels)
        let levels = max_nodes.div_ceil(2);
        let mut table: Vec<Vec<Vec<(Vec<u8>, Vec<Letter>)>>> = vec![Vec::with_capacity(levels); n];
        for (s, row) in table.iter_mut().enumerate() {
            row.push(
                self.leaves_of(s as State)
                    .iter()
                    .map(|&(_, l)| (vec![1u8], vec![l]))
                    .collect(),
            );
        }
        for k in 1..levels {
            let size = 2 * k + 1;
            for s in 0..n {
                let mut here = Vec::new();
                for t in self.transitions_from(s as State) {
                    for k1 in 0..k {
                        let k2 = k - 1 - k1;
                        for a in &table[t.left as usize][k1] {
                            for b in &table[t.right as usize][k2] {
                                let mut shape = Vec::with_capacity(size);
                                shape.push(0);
                                shape.extend_from_slice(&a.0);
                                shape.extend_from_slice(&b.0);
                                let mut labels = Vec::with_capacity(size);
                                labels.push(t.letter);
                                labels.extend_from_slice(&a.1);
                                labels.extend_from_slice(&b.1);
                                here.push((shape, labels));
                            }
                        }
                    }
                }
                here.sort();
                here.dedup();
                table[s].push(here);
            }
        }
        let mut out: Vec<(usize, Vec<u8>, Vec<Letter>)> = Vec::new();
        for &s in &self.initial {
            for (k, trees) in table[s as usize].iter().enumerate() {
                out.extend(trees.iter().map(|(a, b)| (k, a.clone(), b.clone())));
            }
        }
        out.sort();
        out.dedup();
        out.into_iter()
            .map(|(_, shape, labels)| rebuild(&mut shape.iter(), &mut labels.iter()))
            .collect()
    }

    /// Renames states through `map` (entries must be `< n`).
    pub(crate) fn quotient(&self, map: &[State], n: u32) -> Self {
        let initial = self.initial.iter().map(|&s| map[s as usize]).collect();
        let leaf = self.leaf.iter().map(|&(s, l)| (map[s as usize], l)).collect();
        let trans = self
            .trans
            .iter()
            .map(|t| Transition {
                src: map[t.src as usize],
                letter: t.letter,
                left: map[t.left as usize],
                right: map[t.right as usize],
            })
            .collect();
        Self::from_raw(self.space.clone(), n, initial, leaf, trans)
    }

    pub(crate) fn check_same_space(&self, other: &TreeAutomaton) -> Result<(), AutomatonError> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(AutomatonError::AlphabetMismatch(format!(
                "arity {} over {:?} vs arity {} over {:?}",
                self.space.arity,
                self.space.base(),
                other.space.arity,
                other.space.base()
            )))
        }
    }
}

fn rebuild<'a>(
    shape: &mut impl Iterator<Item = &'a u8>,
    labels: &mut impl Iterator<Item = &'a Letter>,
) -> SigmaTree<Letter> {
    let kind = *shape.next().expect("shape code ended early");
    let label = *labels.next().expect("labels ended early");
    if kind == 1 {
        SigmaTree::Leaf(label)
    } else {
        let l = rebuild(shape, labels);
        let r = rebuild(shape, labels);
        SigmaTree::node(label, l, r)
    }
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;
    use rand::Rng;

    /// A random automaton over `space` with `n` states.
    pub fn random_automaton(rng: &mut impl Rng, space: &LetterSpace, n: u32, density: f64) -> TreeAutomaton {
        let mut leaf = Vec::new();
        let mut trans = Vec::new();
        for s in 0..n {
            for letter in space.letters() {
                if rng.gen_bool(0.3) {
                    leaf.push((s, letter));
                }
                for l in 0..n {
                    for r in 0..n {
                        if rng.gen_bool(density / n as f64) {
                            trans.push(Transition {
                                src: s,
                                letter,
                                left: l,
                                right: r,
                            });
                        }
                    }
                }
            }
        }
        let initial = (0..n).filter(|_| rng.gen_bool(0.5)).collect::<Vec<_>>();
        let initial = if initial.is_empty() { vec![0] } else { initial };
        TreeAutomaton::new(space.clone(), n, initial, leaf, trans).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::testing::random_automaton;
    use super::*;
    use crate::tree::enumerate_trees;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unary() -> LetterSpace {
        LetterSpace::new(["a", "b"], 1).unwrap()
    }

    fn plain_trees(max: usize) -> Vec<SigmaTree<Letter>> {
        let space = unary();
        enumerate_trees(space.base(), max)
            .iter()
            .map(|t| space.base_tree_letters(t).unwrap())
            .collect()
    }

    #[test]
    fn letter_codes_round_trip() {
        let space = LetterSpace::new(["0", "1"], 3).unwrap();
        assert_eq!(space.letters().len(), 26);
        for l in space.letters() {
            let sym = space.symbol(l);
            assert_eq!(space.letter_of(&sym).unwrap(), l);
            assert_eq!(space.parse_letter(&sym.to_string()).unwrap(), l);
        }
        assert!(space.parse_letter("~|~|~").is_err());
        assert!(space.parse_letter("0|2|~").is_err());
    }

    #[test]
    fn universal_and_empty() {
        let space = unary();
        let u = TreeAutomaton::universal(space.clone());
        let e = TreeAutomaton::new(space.clone(), 1, vec![0], vec![], u.transitions().to_vec()).unwrap();
        for t in plain_trees(5) {
            assert!(u.accepts_letters(&t));
            assert!(!e.accepts_letters(&t));
        }
        assert!(!u.is_empty());
        assert!(e.is_empty());
        assert!(e.extract_witness().is_none());
        assert_eq!(e.trim().n_states(), 0);
    }

    #[test]
    fn singleton_witness_is_the_tree() {
        let space = unary();
        for t in plain_trees(5) {
            let a = TreeAutomaton::singleton(space.clone(), &t);
            assert_eq!(a.extract_witness_letters().unwrap(), t);
        }
    }

    #[test]
    fn witness_is_minimal_and_first_in_order() {
        let space = unary();
        let all = plain_trees(7);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let a = random_automaton(&mut rng, &space, 3, 0.3);
            let first = all.iter().find(|t| a.accepts_letters(t));
            let w = a.extract_witness_letters();
            match (first, w) {
                (Some(f), Some(w)) => {
                    if f.size() <= 7 {
                        assert_eq!(&w, f);
                    }
                }
                (None, Some(w)) => assert!(w.size() > 7 && a.accepts_letters(&w)),
                (Some(_), None) => panic!("witness missing"),
                (None, None) => assert!(a.is_empty()),
            }
        }
    }

    #[test]
    fn emptiness_matches_bounded_search() {
        let space = unary();
        let all = plain_trees(7);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let a = random_automaton(&mut rng, &space, 3, 0.25);
            // 2|S|+1 nodes suffice for a nonempty automaton with |S| states
            let found = all.iter().any(|t| a.accepts_letters(t));
            assert_eq!(a.is_empty(), !found);
        }
    }

    #[test]
    fn trim_preserves_language() {
        let space = unary();
        let all = plain_trees(7);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let a = random_automaton(&mut rng, &space, 4, 0.2);
            let t = a.trim();
            assert!(t.n_states() <= a.n_states());
            for tree in &all {
                assert_eq!(a.accepts_letters(tree), t.accepts_letters(tree));
            }
        }
    }

    #[test]
    fn accepted_trees_lists_the_language() {
        let space = unary();
        let all = plain_trees(5);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = random_automaton(&mut rng, &space, 3, 0.3);
            let listed = a.accepted_trees(5);
            let expected: Vec<_> = all.iter().filter(|t| a.accepts_letters(t)).cloned().collect();
            assert_eq!(listed, expected);
        }
    }
}
