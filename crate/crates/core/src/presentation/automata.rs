//! Tree automata for the code domain, the order and addition at each level.
//!
//! The order and addition automata are built from obligations: a state is a
//! set of propositions about the subtrees of the coordinates at the current
//! node, and each proposition lists, per letter, the alternatives for what
//! must hold below the left and right child. An absent coordinate reads as
//! the code of zero. The result is intersected with the code domain on every
//! coordinate.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::automaton::{intersect, reduce, reindex, AutomatonError, Letter, LetterSpace, State, Transition, TreeAutomaton};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Dom {
    Zero,
    FinNz,
    Fin,
    Nz(u8),
    Any(u8),
}

impl Dom {
    fn leaves(self) -> Vec<u8> {
        match self {
            Dom::Zero => vec![0],
            Dom::FinNz | Dom::Nz(1) => vec![1],
            Dom::Fin | Dom::Any(1) => vec![0, 1],
            Dom::Nz(_) => vec![],
            Dom::Any(_) => vec![0],
        }
    }

    fn moves(self) -> Vec<(u8, Dom, Dom)> {
        let fin_chain = [(0, Dom::Zero, Dom::FinNz), (1, Dom::Zero, Dom::FinNz)];
        match self {
            Dom::Zero => vec![],
            Dom::FinNz | Dom::Fin => fin_chain.to_vec(),
            Dom::Nz(1) | Dom::Any(1) => {
                let mut v = fin_chain.to_vec();
                v.extend([(0, Dom::Nz(1), Dom::Fin), (1, Dom::Nz(1), Dom::Fin)]);
                v
            }
            Dom::Nz(j) | Dom::Any(j) => vec![(0, Dom::Zero, Dom::Nz(j - 1)), (0, Dom::Nz(j), Dom::Any(j - 1))],
        }
    }
}

fn explore<K, F>(space: &LetterSpace, start: K, mut expand: F) -> TreeAutomaton
where
    K: Clone + Eq + std::hash::Hash,
    F: FnMut(&K) -> (Vec<Letter>, Vec<(Letter, K, K)>),
{
    let mut ids: HashMap<K, State> = HashMap::new();
    let mut queue = VecDeque::new();
    ids.insert(start.clone(), 0);
    queue.push_back(start);
    let mut leaf = Vec::new();
    let mut trans = Vec::new();
    while let Some(k) = queue.pop_front() {
        let src = ids[&k];
        let (leaves, moves) = expand(&k);
        leaf.extend(leaves.into_iter().map(|l| (src, l)));
        for (letter, l, r) in moves {
            let mut id = |key: K| {
                let len = ids.len() as State;
                *ids.entry(key.clone()).or_insert_with(|| {
                    queue.push_back(key);
                    len
                })
            };
            let (left, right) = (id(l), id(r));
            trans.push(Transition { src, letter, left, right });
        }
    }
    TreeAutomaton::from_raw(space.clone(), ids.len() as u32, vec![0], leaf, trans)
}

/// Automaton of the level-`n` codes.
pub fn dom_automaton(n: usize) -> TreeAutomaton {
    let space = LetterSpace::binary(1);
    let sym = |b: u8| b as Letter + 1;
    explore(&space, Dom::Any(n as u8), |d| {
        let leaves = d.leaves().into_iter().map(sym).collect();
        let moves = d.moves().into_iter().map(|(b, l, r)| (sym(b), l, r)).collect();
        (leaves, moves)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Prop {
    Le(u8),
    Lt(u8),
    Eq(u8, u8),
    Add(u8),
    Carry(u8),
    ZeroAt(u8),
    NonZeroAt(u8),
    Present(u8),
}

type Obligation = BTreeSet<Prop>;
type Alternative = (Vec<Prop>, Vec<Prop>);

impl Prop {
    /// Whether the proposition holds when every coordinate is absent.
    fn holds_on_absent(self) -> bool {
        !matches!(self, Prop::Lt(_) | Prop::Carry(1) | Prop::NonZeroAt(_) | Prop::Present(_))
    }

    /// Alternatives at a node whose coordinate bits are `bits` (`None` when
    /// absent). Order and addition read coordinates `0, 1` and `0, 1, 2`.
    fn expand(self, bits: &[Option<u8>]) -> Vec<Alternative> {
        let x = |i: usize| bits[i].unwrap_or(0);
        match self {
            Prop::Le(1) | Prop::Lt(1) => {
                let strict = self == Prop::Lt(1);
                let mut v = vec![
                    (vec![Prop::Lt(1)], vec![]),
                    (vec![Prop::Eq(0, 1)], vec![Prop::Lt(1)]),
                ];
                if x(0) < x(1) || (!strict && x(0) == x(1)) {
                    v.push((vec![Prop::Eq(0, 1)], vec![Prop::Eq(0, 1)]));
                }
                v
            }
            Prop::Le(j) => vec![(vec![Prop::Lt(j)], vec![]), (vec![Prop::Eq(0, 1)], vec![Prop::Le(j - 1)])],
            Prop::Lt(j) => vec![(vec![Prop::Lt(j)], vec![]), (vec![Prop::Eq(0, 1)], vec![Prop::Lt(j - 1)])],
            Prop::Eq(i, k) => match (bits[i as usize], bits[k as usize]) {
                (None, None) => vec![(vec![], vec![])],
                (Some(p), Some(q)) if p == q => vec![(vec![Prop::Eq(i, k)], vec![Prop::Eq(i, k)])],
                (Some(0), None) | (None, Some(0)) => {
                    let z = if bits[i as usize].is_some() { i } else { k };
                    vec![(vec![Prop::ZeroAt(z)], vec![Prop::ZeroAt(z)])]
                }
                _ => vec![],
            },
            Prop::Add(1) => {
                let mut v = Vec::new();
                for k in 0..2u8 {
                    if x(0) + x(1) == x(2) + 2 * k {
                        v.push((vec![Prop::Add(1), Prop::ZeroAt(1)], vec![Prop::Carry(k)]));
                    }
                }
                if x(1) == x(2) {
                    v.push((vec![Prop::Add(1), Prop::NonZeroAt(1)], vec![Prop::Eq(1, 2)]));
                }
                v
            }
            Prop::Add(j) => vec![
                (vec![Prop::Add(j), Prop::ZeroAt(1)], vec![Prop::Add(j - 1)]),
                (vec![Prop::Add(j), Prop::NonZeroAt(1)], vec![Prop::Eq(1, 2)]),
            ],
            Prop::Carry(k) => (0..2u8)
                .filter(|&k2| x(0) + x(1) + k == x(2) + 2 * k2)
                .map(|k2| (vec![], vec![Prop::Carry(k2)]))
                .collect(),
            Prop::ZeroAt(i) => match bits[i as usize] {
                None => vec![(vec![], vec![])],
                Some(0) => vec![(vec![Prop::ZeroAt(i)], vec![Prop::ZeroAt(i)])],
                _ => vec![],
            },
            Prop::NonZeroAt(i) => match bits[i as usize] {
                Some(1) => vec![(vec![], vec![])],
                Some(0) => vec![(vec![Prop::Present(i)], vec![])],
                _ => vec![],
            },
            Prop::Present(i) => match bits[i as usize] {
                Some(_) => vec![(vec![], vec![])],
                None => vec![],
            },
        }
    }
}

/// `ZeroAt(i)` below a node that is present in coordinate `i` means the node
/// is a leaf there; the domain intersection rules out the other case, where a
/// zero-labelled node has children labelled as zero codes.
fn obligation_automaton(space: &LetterSpace, start: Prop) -> TreeAutomaton {
    let start: Obligation = [start].into_iter().collect();
    explore(space, start, |ob| {
        let mut leaves = Vec::new();
        let mut moves = Vec::new();
        for letter in space.letters() {
            let bits: Vec<Option<u8>> = space
                .parts(letter)
                .into_iter()
                .map(|p| if p == 0 { None } else { Some((p - 1) as u8) })
                .collect();
            let mut combos: Vec<(Obligation, Obligation)> = vec![(BTreeSet::new(), BTreeSet::new())];
            let mut leaf_ok = true;
            for &p in ob {
                let alts = p.expand(&bits);
                leaf_ok &= alts
                    .iter()
                    .any(|(l, r)| l.iter().chain(r).all(|q| q.holds_on_absent()));
                let mut next = Vec::with_capacity(combos.len() * alts.len());
                for (l0, r0) in &combos {
                    for (l, r) in &alts {
                        let mut l1 = l0.clone();
                        l1.extend(l.iter().copied());
                        let mut r1 = r0.clone();
                        r1.extend(r.iter().copied());
                        next.push((l1, r1));
                    }
                }
                next.sort();
                next.dedup();
                combos = next;
                if combos.is_empty() {
                    break;
                }
            }
            if leaf_ok {
                leaves.push(letter);
            }
            moves.extend(combos.into_iter().map(|(l, r)| (letter, l, r)));
        }
        (leaves, moves)
    })
}

fn restrict_to_codes(a: TreeAutomaton, n: usize) -> Result<TreeAutomaton, AutomatonError> {
    let k = a.arity();
    let dom = dom_automaton(n);
    let mut out = a;
    for i in 0..k {
        out = intersect(&out, &reindex(&dom, &[i], k)?)?;
    }
    Ok(reduce(&out))
}

/// Binary relation `x <= y` on level-`n` codes.
pub fn le_automaton(n: usize) -> Result<TreeAutomaton, AutomatonError> {
    let raw = obligation_automaton(&LetterSpace::binary(2), Prop::Le(n as u8));
    restrict_to_codes(raw, n)
}

/// Ternary relation `x + y = z` on level-`n` codes.
pub fn add_automaton(n: usize) -> Result<TreeAutomaton, AutomatonError> {
    let raw = obligation_automaton(&LetterSpace::binary(3), Prop::Add(n as u8));
    restrict_to_codes(raw, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{OrdCNF, Poly};
    use crate::presentation::codes::{decode, encode};
    use crate::tree::enumerate_trees;

    fn sample(n: usize) -> Vec<OrdCNF> {
        let mut v = Vec::new();
        let coeffs: &[u64] = &[0, 1, 2, 3];
        for &a in coeffs {
            for &b in coeffs {
                for &c in &coeffs[..3] {
                    v.push(Poly::new(vec![c, b, a]).to_cnf());
                }
            }
        }
        if n >= 2 {
            for s in ["w^(w)", "w^(w)*2+w^3+1", "w^(w+1)", "w^(w*2)*2+w", "w^(w+5)+w^(w)"] {
                v.push(s.parse().unwrap());
            }
        }
        v
    }

    #[test]
    fn domain_accepts_exactly_the_codes() {
        let alphabet = vec!["0".to_string(), "1".to_string()];
        for n in 1..=3 {
            let dom = dom_automaton(n);
            for t in enumerate_trees(&alphabet, 11) {
                assert_eq!(dom.accepts(&t).unwrap(), decode(n, &t).is_ok(), "level {n}: {t}");
            }
        }
    }

    #[test]
    fn order_matches_cnf() {
        for n in 1..=2 {
            let le = le_automaton(n).unwrap();
            let s = sample(n);
            let codes: Vec<_> = s.iter().map(|a| encode(n, a).unwrap()).collect();
            for (a, ca) in s.iter().zip(&codes) {
                for (b, cb) in s.iter().zip(&codes) {
                    assert_eq!(le.accepts_tuple(&[ca, cb]).unwrap(), a <= b, "level {n}: {a} <= {b}");
                }
            }
        }
    }

    #[test]
    fn addition_matches_cnf() {
        for n in 1..=2 {
            let add = add_automaton(n).unwrap();
            let s = sample(n);
            let codes: Vec<_> = s.iter().map(|a| encode(n, a).unwrap()).collect();
            for (a, ca) in s.iter().zip(&codes) {
                for (b, cb) in s.iter().zip(&codes) {
                    let sum = a.add(b);
                    let cs = encode(n, &sum).unwrap();
                    assert!(add.accepts_tuple(&[ca, cb, &cs]).unwrap(), "level {n}: {a} + {b}");
                    for (c, cc) in s.iter().zip(&codes).take(20) {
                        if *c != sum {
                            assert!(!add.accepts_tuple(&[ca, cb, cc]).unwrap(), "level {n}: {a} + {b} != {c}");
                        }
                    }
                }
            }
        }
    }
}
