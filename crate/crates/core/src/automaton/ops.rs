//! Boolean and closure operations.

use fixedbitset::FixedBitSet;
use rustc_hash::FxHashMap;

use super::dfa::BottomUpDfa;
use super::{AutomatonError, Letter, LetterSpace, State, Transition, TreeAutomaton};

pub fn intersect(a: &TreeAutomaton, b: &TreeAutomaton) -> Result<TreeAutomaton, AutomatonError> {
    intersect_limited(a, b, usize::MAX)
}

/// Product construction over reachable state pairs.
pub fn intersect_limited(
    a: &TreeAutomaton,
    b: &TreeAutomaton,
    limit: usize,
) -> Result<TreeAutomaton, AutomatonError> {
    a.check_same_space(b)?;
    let mut ids: FxHashMap<(State, State), State> = FxHashMap::default();
    let mut pairs: Vec<(State, State)> = Vec::new();
    let mut intern = |p: State, q: State, pairs: &mut Vec<(State, State)>| -> Result<State, AutomatonError> {
        if let Some(&id) = ids.get(&(p, q)) {
            return Ok(id);
        }
        if pairs.len() >= limit {
            return Err(AutomatonError::StateBudget { limit });
        }
        let id = pairs.len() as State;
        ids.insert((p, q), id);
        pairs.push((p, q));
        Ok(id)
    };
    let mut initial = Vec::new();
    for &p in a.initial() {
        for &q in b.initial() {
            initial.push(intern(p, q, &mut pairs)?);
        }
    }
    let mut leaf = Vec::new();
    let mut trans = Vec::new();
    let mut next = 0;
    while next < pairs.len() {
        let (p, q) = pairs[next];
        let me = next as State;
        next += 1;
        merge_by_key(a.leaves_of(p), b.leaves_of(q), |x| x.1, |x, _| leaf.push((me, x.1)));
        let ta = a.transitions_from(p);
        let tb = b.transitions_from(q);
        let (mut i, mut j) = (0, 0);
        while i < ta.len() && j < tb.len() {
            let (la, lb) = (ta[i].letter, tb[j].letter);
            if la < lb {
                i += 1;
            } else if lb < la {
                j += 1;
            } else {
                let ei = i + ta[i..].iter().take_while(|t| t.letter == la).count();
                let ej = j + tb[j..].iter().take_while(|t| t.letter == la).count();
                for x in &ta[i..ei] {
                    for y in &tb[j..ej] {
                        let left = intern(x.left, y.left, &mut pairs)?;
                        let right = intern(x.right, y.right, &mut pairs)?;
                        trans.push(Transition {
                            src: me,
                            letter: la,
                            left,
                            right,
                        });
                    }
                }
                i = ei;
                j = ej;
            }
        }
    }
    let n = pairs.len() as u32;
    Ok(TreeAutomaton::from_raw(a.space().clone(), n, initial, leaf, trans).trim())
}

fn merge_by_key<T>(xs: &[T], ys: &[T], key: impl Fn(&T) -> Letter, mut hit: impl FnMut(&T, &T)) {
    let (mut i, mut j) = (0, 0);
    while i < xs.len() && j < ys.len() {
        let (kx, ky) = (key(&xs[i]), key(&ys[j]));
        if kx < ky {
            i += 1;
        } else if ky < kx {
            j += 1;
        } else {
            hit(&xs[i], &ys[j]);
            i += 1;
            j += 1;
        }
    }
}

/// Disjoint union; the states of `b` follow those of `a`.
pub(crate) fn disjoint_union(a: &TreeAutomaton, b: &TreeAutomaton) -> TreeAutomaton {
    let off = a.n_states();
    let initial = a.initial().iter().copied().chain(b.initial().iter().map(|s| s + off)).collect();
    let leaf = a
        .leaf_rules()
        .iter()
        .copied()
        .chain(b.leaf_rules().iter().map(|&(s, l)| (s + off, l)))
        .collect();
    let trans = a
        .transitions()
        .iter()
        .copied()
        .chain(b.transitions().iter().map(|t| Transition {
            src: t.src + off,
            letter: t.letter,
            left: t.left + off,
            right: t.right + off,
        }))
        .collect();
    TreeAutomaton::from_raw(a.space().clone(), off + b.n_states(), initial, leaf, trans)
}

pub fn union(a: &TreeAutomaton, b: &TreeAutomaton) -> Result<TreeAutomaton, AutomatonError> {
    a.check_same_space(b)?;
    Ok(disjoint_union(a, b).trim())
}

/// Moves coordinate `j` of `a` to coordinate `map[j]` of a `k`-ary
/// convolution. Coordinates of the result not hit by `map` are
/// unconstrained; coordinates hit twice must carry equal trees wherever
/// `a` reads them. Covers permutation, cylindrification and repeated
/// variables.
pub fn reindex(a: &TreeAutomaton, map: &[usize], k: usize) -> Result<TreeAutomaton, AutomatonError> {
    if map.len() != a.arity() {
        return Err(AutomatonError::BadPosition {
            position: map.len(),
            arity: a.arity(),
        });
    }
    if let Some(&bad) = map.iter().find(|&&m| m >= k) {
        return Err(AutomatonError::BadPosition { position: bad, arity: k });
    }
    let src = a.space();
    let dst = src.with_arity(k)?;
    let mut preimage: Vec<Vec<Letter>> = vec![Vec::new(); src.bound() as usize];
    let mut parts = vec![0; a.arity()];
    for letter in dst.letters() {
        for (j, &m) in map.iter().enumerate() {
            parts[j] = dst.part(letter, m);
        }
        preimage[src.from_parts(&parts) as usize].push(letter);
    }
    let free = a.n_states();
    let mut leaf = Vec::new();
    let mut trans = Vec::new();
    for t in a.transitions() {
        for &l in &preimage[t.letter as usize] {
            trans.push(Transition { letter: l, ..*t });
        }
    }
    for &(s, letter) in a.leaf_rules() {
        for &l in &preimage[letter as usize] {
            leaf.push((s, l));
            trans.push(Transition {
                src: s,
                letter: l,
                left: free,
                right: free,
            });
        }
    }
    for &l in &preimage[0] {
        leaf.push((free, l));
        trans.push(Transition {
            src: free,
            letter: l,
            left: free,
            right: free,
        });
    }
    Ok(TreeAutomaton::from_raw(dst, free + 1, a.initial().to_vec(), leaf, trans).trim())
}

/// Inserts a fresh, unconstrained coordinate at `position`.
pub fn cylindrify(a: &TreeAutomaton, position: usize) -> Result<TreeAutomaton, AutomatonError> {
    if position > a.arity() {
        return Err(AutomatonError::BadPosition {
            position,
            arity: a.arity(),
        });
    }
    let map: Vec<usize> = (0..a.arity()).map(|j| if j < position { j } else { j + 1 }).collect();
    reindex(a, &map, a.arity() + 1)
}

/// Existential projection of coordinate `position`.
///
/// Where the projected coordinate extends beyond all remaining ones, the
/// overhang is guessed away: a transition whose children can both accept
/// trees that only have the projected coordinate doubles as a leaf rule.
pub fn project(a: &TreeAutomaton, position: usize) -> Result<TreeAutomaton, AutomatonError> {
    let k = a.arity();
    if k < 2 || position >= k {
        return Err(AutomatonError::BadPosition { position, arity: k });
    }
    let src = a.space();
    let dst = src.with_arity(k - 1)?;
    let mut proj = vec![0 as Letter; src.bound() as usize];
    let mut parts = Vec::with_capacity(k - 1);
    for letter in src.letters() {
        parts.clear();
        parts.extend((0..k).filter(|&j| j != position).map(|j| src.part(letter, j)));
        proj[letter as usize] = dst.from_parts(&parts);
    }
    let overhang = a.productive_where(|l| proj[l as usize] == 0);
    let mut leaf = Vec::new();
    let mut trans = Vec::new();
    for &(s, l) in a.leaf_rules() {
        if proj[l as usize] != 0 {
            leaf.push((s, proj[l as usize]));
        }
    }
    for t in a.transitions() {
        let l = proj[t.letter as usize];
        if l == 0 {
            continue;
        }
        trans.push(Transition { letter: l, ..*t });
        if overhang.contains(t.left as usize) && overhang.contains(t.right as usize) {
            leaf.push((t.src, l));
        }
    }
    Ok(TreeAutomaton::from_raw(dst, a.n_states(), a.initial().to_vec(), leaf, trans).trim())
}

/// Accepts exactly the convolutions of `k` valid trees over the base of
/// `space`. A state is the set of coordinates present at the node.
pub fn valid_convolution_language(space: &LetterSpace, k: usize) -> Result<TreeAutomaton, AutomatonError> {
    let dst = space.with_arity(k)?;
    let full = (1u32 << k) - 1;
    let support = |letter: Letter| -> u32 {
        (0..k).filter(|&i| dst.part(letter, i) != 0).fold(0, |m, i| m | (1 << i))
    };
    let mut leaf = Vec::new();
    let mut trans = Vec::new();
    for letter in dst.letters() {
        let s = support(letter);
        leaf.push((s - 1, letter));
        // nonempty submasks of s
        let mut c = s;
        while c != 0 {
            trans.push(Transition {
                src: s - 1,
                letter,
                left: c - 1,
                right: c - 1,
            });
            c = (c - 1) & s;
        }
    }
    Ok(TreeAutomaton::from_raw(dst, full, vec![full - 1], leaf, trans))
}

/// Accepts `conv(t, t)` for every valid tree `t` over the base of `space`.
pub fn diagonal(space: &LetterSpace) -> Result<TreeAutomaton, AutomatonError> {
    let dst = space.with_arity(2)?;
    let mut leaf = Vec::new();
    let mut trans = Vec::new();
    for j in 1..dst.radix() {
        let letter = dst.from_parts(&[j, j]);
        leaf.push((0, letter));
        trans.push(Transition {
            src: 0,
            letter,
            left: 0,
            right: 0,
        });
    }
    Ok(TreeAutomaton::from_raw(dst, 1, vec![0], leaf, trans))
}

fn joint_dfa(v: &TreeAutomaton, a: &TreeAutomaton, limit: usize) -> Result<BottomUpDfa, AutomatonError> {
    v.check_same_space(a)?;
    let v = v.trim();
    let a = a.trim();
    let u = disjoint_union(&v, &a);
    let nv = v.n_states() as usize;
    let mut v_init = FixedBitSet::with_capacity(u.n_states() as usize);
    let mut a_init = FixedBitSet::with_capacity(u.n_states() as usize);
    for &s in v.initial() {
        v_init.insert(s as usize);
    }
    for &s in a.initial() {
        a_init.insert(s as usize + nv);
    }
    BottomUpDfa::build(
        &u,
        nv as u32,
        |set| !set.is_disjoint(&v_init) && set.is_disjoint(&a_init),
        limit,
    )
}

pub fn difference(v: &TreeAutomaton, a: &TreeAutomaton) -> Result<TreeAutomaton, AutomatonError> {
    difference_limited(v, a, usize::MAX)
}

/// `L(v) \ L(a)` by a joint subset construction in which subsets without a
/// state of `v` collapse into the sink.
pub fn difference_limited(
    v: &TreeAutomaton,
    a: &TreeAutomaton,
    limit: usize,
) -> Result<TreeAutomaton, AutomatonError> {
    Ok(joint_dfa(v, a, limit)?.minimize().to_nta())
}

pub fn difference_is_empty(v: &TreeAutomaton, a: &TreeAutomaton) -> Result<bool, AutomatonError> {
    Ok(joint_dfa(v, a, usize::MAX)?.is_empty())
}

/// All valid convolutions of the automaton's arity that it rejects.
pub fn complement(a: &TreeAutomaton) -> TreeAutomaton {
    complement_limited(a, usize::MAX).expect("no budget")
}

pub fn complement_limited(a: &TreeAutomaton, limit: usize) -> Result<TreeAutomaton, AutomatonError> {
    let valid = valid_convolution_language(a.space(), a.arity())?;
    difference_limited(&valid, a, limit)
}

pub fn equivalent(a: &TreeAutomaton, b: &TreeAutomaton) -> Result<bool, AutomatonError> {
    Ok(difference_is_empty(a, b)? && difference_is_empty(b, a)?)
}
