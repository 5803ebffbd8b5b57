//! Canonical `{0,1}`-tree codes of ordinals below `w^(w^n)`.
//!
//! Level 1: `0` and `1` are the leaves `0` and `1`; any other `a` is written
//! `w*A + 2*R + x` with `R` finite and `x` a bit, and coded
//! `x(code(A), code(R))`. The leftmost branch thus walks up the powers of
//! `w` and each right branch spells a coefficient in binary, least
//! significant bit first.
//!
//! Level `n > 1`: with `d = w^(w^(n-1))`, a nonzero `a` is `d*A + r` with
//! `r < d` and is coded `0(code_n(A), code_(n-1)(r))`; zero is the leaf `0`.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::PresentationError;
use crate::cnf::{OrdCNF, Poly};
use crate::tree::{NodePath, SigmaTree, Symbol};

/// `w^(w^n)`, the first ordinal without a level-`n` code.
pub fn level_bound(n: usize) -> OrdCNF {
    OrdCNF::omega_power(Poly::omega_pow(n))
}

pub fn in_range(n: usize, a: &OrdCNF) -> bool {
    n >= 1 && a.terms().iter().all(|(p, _)| p.coeffs().len() <= n)
}

fn leaf(bit: u8) -> SigmaTree<Symbol> {
    SigmaTree::Leaf(bit.to_string())
}

fn node(bit: u8, l: SigmaTree<Symbol>, r: SigmaTree<Symbol>) -> SigmaTree<Symbol> {
    SigmaTree::node(bit.to_string(), l, r)
}

fn with_coeff(p: &Poly, i: usize, v: u64) -> Poly {
    let mut c = p.coeffs().to_vec();
    if c.len() <= i {
        c.resize(i + 1, 0);
    }
    c[i] = v;
    Poly::new(c)
}

/// `a = d*A + r` for `d = w^(w^(n-1))`.
fn split(n: usize, a: &OrdCNF) -> (OrdCNF, OrdCNF) {
    let i = n - 1;
    let (high, low): (Vec<_>, Vec<_>) = a.terms().iter().cloned().partition(|(p, _)| p.coeff(i) > 0);
    let high = high
        .into_iter()
        .map(|(p, c)| (with_coeff(&p, i, p.coeff(i) - 1), c))
        .collect();
    (
        OrdCNF::from_terms(high).expect("decrementing one coefficient keeps the order"),
        OrdCNF::from_terms(low).expect("a suffix of a normal form"),
    )
}

/// `d*A + r` for `d = w^(w^(n-1))`, `A < w^(w^n)`, `r < d`.
fn join(n: usize, a: &OrdCNF, r: &OrdCNF) -> OrdCNF {
    let i = n - 1;
    let mut terms: Vec<(Poly, BigUint)> = a
        .terms()
        .iter()
        .map(|(p, c)| (with_coeff(p, i, p.coeff(i) + 1), c.clone()))
        .collect();
    terms.extend(r.terms().iter().cloned());
    OrdCNF::from_terms(terms).expect("terms of d*A dominate r")
}

fn finite_part(a: &OrdCNF) -> BigUint {
    match a.terms().last() {
        Some((p, c)) if p.is_zero() => c.clone(),
        _ => BigUint::zero(),
    }
}

pub fn encode(n: usize, a: &OrdCNF) -> Result<SigmaTree<Symbol>, PresentationError> {
    if !in_range(n, a) {
        return Err(PresentationError::OutOfRange(format!("{a} has no level-{n} code")));
    }
    Ok(encode_unchecked(n, a))
}

fn encode_unchecked(n: usize, a: &OrdCNF) -> SigmaTree<Symbol> {
    if a.is_zero() {
        return leaf(0);
    }
    if n == 1 {
        let (big, _) = split(1, a);
        let r = finite_part(a);
        encode_level1(&big, &r)
    } else {
        let (big, r) = split(n, a);
        node(0, encode_unchecked(n, &big), encode_unchecked(n - 1, &r))
    }
}

/// Code of `w*big + r`.
fn encode_level1(big: &OrdCNF, r: &BigUint) -> SigmaTree<Symbol> {
    if big.is_zero() && *r <= BigUint::one() {
        return leaf(if r.is_zero() { 0 } else { 1 });
    }
    let x = if r.bit(0) { 1 } else { 0 };
    let (b2, _) = split(1, big);
    let left = encode_level1(&b2, &finite_part(big));
    let right = encode_level1(&OrdCNF::zero(), &(r >> 1u32));
    node(x, left, right)
}

fn bit_of(label: &str) -> Option<u8> {
    match label {
        "0" => Some(0),
        "1" => Some(1),
        _ => None,
    }
}

/// Value of a tree read as a code, without the canonicity check.
fn value(n: usize, t: &SigmaTree<Symbol>, path: &mut Vec<bool>) -> Result<OrdCNF, PresentationError> {
    let fail = |path: &Vec<bool>| PresentationError::NotACode {
        level: n,
        node: NodePath::from_bits(path),
    };
    let x = bit_of(t.label()).ok_or_else(|| fail(path))?;
    let Some((l, r)) = t.children() else {
        return if n == 1 || x == 0 {
            Ok(OrdCNF::nat(x as u32))
        } else {
            Err(fail(path))
        };
    };
    path.push(false);
    let lv = value(n, l, path)?;
    path.pop();
    path.push(true);
    let rv = value(if n == 1 { 1 } else { n - 1 }, r, path)?;
    path.pop();
    if n == 1 {
        if rv.terms().iter().any(|(p, _)| !p.is_zero()) {
            return Err(fail(path));
        }
        let fin = (finite_part(&rv) << 1u32) + BigUint::from(x);
        Ok(join(1, &lv, &OrdCNF::nat(fin)))
    } else if x != 0 {
        Err(fail(path))
    } else {
        Ok(join(n, &lv, &rv))
    }
}

pub fn decode(n: usize, t: &SigmaTree<Symbol>) -> Result<OrdCNF, PresentationError> {
    if n == 0 {
        return Err(PresentationError::OutOfRange("level must be at least 1".into()));
    }
    let v = value(n, t, &mut Vec::new())?;
    let canon = encode_unchecked(n, &v);
    if canon != *t {
        let got = t.preorder();
        let want = canon.preorder();
        let at = got
            .iter()
            .zip(&want)
            .find(|(a, b)| a != b)
            .map(|(a, _)| a.0.clone())
            .unwrap_or_else(|| got.get(want.len()).map_or_else(NodePath::root, |x| x.0.clone()));
        return Err(PresentationError::NotACode { level: n, node: at });
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::enumerate_trees;

    fn c(s: &str) -> OrdCNF {
        s.parse().unwrap()
    }

    fn t(s: &str) -> SigmaTree<Symbol> {
        s.parse().unwrap()
    }

    #[test]
    fn level_one_examples() {
        assert_eq!(encode(1, &c("1")).unwrap(), t("1"));
        assert_eq!(encode(1, &c("0")).unwrap(), t("0"));
        assert_eq!(encode(1, &c("w*2+3")).unwrap(), t("1(0(0,1),1)"));
        assert_eq!(encode(1, &c("w")).unwrap(), t("0(1,0)"));
        assert_eq!(decode(1, &t("1(0,1)")).unwrap(), c("3"));
        assert_eq!(decode(1, &t("0")).unwrap(), OrdCNF::zero());
        assert!(encode(1, &c("w^(w)")).is_err());
    }

    #[test]
    fn level_two_examples() {
        assert_eq!(encode(2, &c("w^(w)")).unwrap(), t("0(0(0,1),0)"));
        assert_eq!(encode(2, &c("1")).unwrap(), t("0(0,1)"));
        assert_eq!(decode(2, &t("0(0(0,1),0)")).unwrap(), c("w^(w)"));
        assert!(encode(2, &c("w^(w^2)")).is_err());
    }

    #[test]
    fn non_codes_are_rejected() {
        for (n, bad) in [(1, "0(0,0)"), (1, "1(0,0)"), (2, "1"), (2, "0(0,0)"), (2, "1(0,1)"), (1, "0(0(0,0),1)")] {
            assert!(matches!(decode(n, &t(bad)), Err(PresentationError::NotACode { .. })), "{bad}");
        }
    }

    #[test]
    fn round_trip_below_w_cubed() {
        for b2 in 0..4u32 {
            for b1 in 0..4u32 {
                for b0 in 0..4u32 {
                    let a = Poly::new(vec![b0 as u64, b1 as u64, b2 as u64]).to_cnf();
                    for n in 1..=3 {
                        assert_eq!(decode(n, &encode(n, &a).unwrap()).unwrap(), a);
                    }
                }
            }
        }
        let big = c("w^(w^2*2+w+1)*5+w^(w)*3+w^7*100+12345678901234567890");
        for n in 3..=4 {
            assert_eq!(decode(n, &encode(n, &big).unwrap()).unwrap(), big);
        }
    }

    #[test]
    fn codes_are_injective_on_small_trees() {
        let alphabet = vec!["0".to_string(), "1".to_string()];
        for n in 1..=2 {
            let mut seen = std::collections::HashMap::new();
            for tree in enumerate_trees(&alphabet, 9) {
                if let Ok(v) = decode(n, &tree) {
                    assert!(seen.insert(v.clone(), tree.clone()).is_none(), "{v}");
                    assert_eq!(encode(n, &v).unwrap(), tree);
                }
            }
        }
    }
}
