//! Exact ordinals below `w^w^w` in Cantor normal form.
//!
//! A [`Poly`] is an ordinal below `w^w` written `w^d*a_d + ... + w*a_1 + a_0`;
//! an [`OrdCNF`] is a strictly descending sum of `w^p * c` with polynomial
//! exponents and positive (unbounded) coefficients.
//!
//! Text syntax: `cnf := "0" | term ("+" term)*`,
//! `term := "w" ["^" pexp] ["*" nat] | nat`, `pexp := "(" poly ")" | nat`,
//! `poly := pterm ("+" pterm)*`, `pterm := "w" ["^" nat] ["*" nat] | nat`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnfError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("term {0} is not smaller than the term before it")]
    NonCanonical(usize),
}

/// Coefficients indexed by the power of `w`; no trailing zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly(Vec<u64>);

impl Poly {
    pub fn new(mut coeffs: Vec<u64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn nat(n: u64) -> Self {
        Poly::new(vec![n])
    }

    /// `w^i`.
    pub fn omega_pow(i: usize) -> Self {
        let mut c = vec![0; i + 1];
        c[i] = 1;
        Poly(c)
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.0
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    /// The natural number it denotes, if finite.
    pub fn as_nat(&self) -> Option<u64> {
        match self.0.len() {
            0 => Some(0),
            1 => Some(self.0[0]),
            _ => None,
        }
    }

    /// Ordinal sum.
    pub fn add(&self, other: &Poly) -> Poly {
        let Some(d) = other.degree() else {
            return self.clone();
        };
        let mut c: Vec<u64> = other.0.clone();
        if self.0.len() > d {
            c[d] += self.0[d];
            c.extend_from_slice(&self.0[d + 1..]);
        }
        Poly::new(c)
    }

    /// `w * p`.
    pub fn omega_times(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![0];
        c.extend_from_slice(&self.0);
        Poly(c)
    }

    /// The same ordinal as an [`OrdCNF`].
    pub fn to_cnf(&self) -> OrdCNF {
        OrdCNF {
            terms: (0..self.0.len())
                .rev()
                .filter(|&i| self.0[i] > 0)
                .map(|i| (Poly::nat(i as u64), BigUint::from(self.0[i])))
                .collect(),
        }
    }
}

pub fn cmp_poly(p: &Poly, q: &Poly) -> Ordering {
    p.0.len()
        .cmp(&q.0.len())
        .then_with(|| p.0.iter().rev().cmp(q.0.iter().rev()))
}

impl Ord for Poly {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_poly(self, other)
    }
}

impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for i in (0..self.0.len()).rev() {
            let c = self.0[i];
            if c == 0 {
                continue;
            }
            if !first {
                f.write_str("+")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => f.write_str("w")?,
                _ => write!(f, "w^{i}")?,
            }
            if i > 0 && c > 1 {
                write!(f, "*{c}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Poly {
    type Err = CnfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser::new(s);
        let poly = if s == "0" {
            p.pos = 1;
            Poly::zero()
        } else {
            p.poly(0)?
        };
        p.end()?;
        Ok(poly)
    }
}

/// `sum(w^p_i * c_i)` with strictly descending exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct OrdCNF {
    terms: Vec<(Poly, BigUint)>,
}

impl OrdCNF {
    pub fn zero() -> Self {
        OrdCNF { terms: Vec::new() }
    }

    pub fn nat(n: impl Into<BigUint>) -> Self {
        let n = n.into();
        if n.is_zero() {
            Self::zero()
        } else {
            OrdCNF {
                terms: vec![(Poly::zero(), n)],
            }
        }
    }

    /// `w^p`.
    pub fn omega_power(p: Poly) -> Self {
        OrdCNF {
            terms: vec![(p, BigUint::one())],
        }
    }

    /// Validates descending exponents and positive coefficients.
    pub fn from_terms(terms: Vec<(Poly, BigUint)>) -> Result<Self, CnfError> {
        for (i, (p, c)) in terms.iter().enumerate() {
            if c.is_zero() || (i > 0 && terms[i - 1].0 <= *p) {
                return Err(CnfError::NonCanonical(i));
            }
        }
        Ok(OrdCNF { terms })
    }

    pub fn terms(&self) -> &[(Poly, BigUint)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading_exponent(&self) -> Option<&Poly> {
        self.terms.first().map(|t| &t.0)
    }

    /// Exactly one term with coefficient 1 (`1 = w^0` included).
    pub fn is_omega_power(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].1.is_one()
    }

    /// Whether `x + y < self` for all `x, y < self`. Zero counts as closed
    /// (there is nothing below it).
    pub fn is_add_closed(&self) -> bool {
        self.is_zero() || self.is_omega_power()
    }

    /// The ordinal as a [`Poly`] when it is below `w^w`.
    pub fn to_poly(&self) -> Option<Poly> {
        let mut coeffs = Vec::new();
        for (p, c) in &self.terms {
            let i = p.as_nat()? as usize;
            let c: u64 = c.try_into().ok()?;
            if coeffs.len() <= i {
                coeffs.resize(i + 1, 0);
            }
            coeffs[i] = c;
        }
        Some(Poly::new(coeffs))
    }

    pub fn add(&self, other: &OrdCNF) -> OrdCNF {
        let Some((e, c)) = other.terms.first() else {
            return self.clone();
        };
        let mut terms: Vec<(Poly, BigUint)> = self.terms.iter().take_while(|t| t.0 >= *e).cloned().collect();
        match terms.last_mut() {
            Some(last) if last.0 == *e => last.1 += c,
            _ => terms.push((e.clone(), c.clone())),
        }
        terms.extend(other.terms[1..].iter().cloned());
        OrdCNF { terms }
    }

    pub fn render(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<Self, CnfError> {
        text.parse()
    }
}

impl Ord for OrdCNF {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(&other.terms) {
            let o = a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1));
            if o != Ordering::Equal {
                return o;
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for OrdCNF {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn cmp(a: &OrdCNF, b: &OrdCNF) -> Ordering {
    a.cmp(b)
}

impl fmt::Display for OrdCNF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (p, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            match p.as_nat() {
                Some(0) => {
                    write!(f, "{c}")?;
                    continue;
                }
                Some(1) => f.write_str("w")?,
                Some(n) => write!(f, "w^{n}")?,
                None => write!(f, "w^({p})")?,
            }
            if !c.is_one() {
                write!(f, "*{c}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for OrdCNF {
    type Err = CnfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser::new(s);
        if s == "0" {
            return Ok(OrdCNF::zero());
        }
        let mut terms = Vec::new();
        loop {
            let index = terms.len();
            let term = if p.eat(b'w') {
                let exp = if p.eat(b'^') {
                    if p.eat(b'(') {
                        let e = p.poly(index)?;
                        p.expect(b')')?;
                        e
                    } else {
                        Poly::nat(p.small_nat()?)
                    }
                } else {
                    Poly::nat(1)
                };
                let coeff = if p.eat(b'*') { p.big_nat()? } else { BigUint::one() };
                (exp, coeff)
            } else {
                (Poly::zero(), p.big_nat()?)
            };
            if terms.last().is_some_and(|prev: &(Poly, BigUint)| prev.0 <= term.0) {
                return Err(CnfError::NonCanonical(index));
            }
            terms.push(term);
            if !p.eat(b'+') {
                break;
            }
        }
        p.end()?;
        Ok(OrdCNF { terms })
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(s: &'a str) -> Self {
        Parser { s: s.as_bytes(), pos: 0 }
    }

    fn err<T>(&self, msg: &str) -> Result<T, CnfError> {
        Err(CnfError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.s.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), CnfError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(&format!("expected '{}'", c as char))
        }
    }

    fn end(&self) -> Result<(), CnfError> {
        if self.pos == self.s.len() {
            Ok(())
        } else {
            self.err("unexpected trailing input")
        }
    }

    fn digits(&mut self) -> Result<&'a str, CnfError> {
        let start = self.pos;
        if !matches!(self.s.get(self.pos), Some(b'1'..=b'9')) {
            return self.err("expected a positive number without leading zeros");
        }
        while matches!(self.s.get(self.pos), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        Ok(std::str::from_utf8(&self.s[start..self.pos]).expect("ascii digits"))
    }

    fn big_nat(&mut self) -> Result<BigUint, CnfError> {
        let d = self.digits()?;
        Ok(d.parse().expect("digits parse"))
    }

    fn small_nat(&mut self) -> Result<u64, CnfError> {
        let start = self.pos;
        let d = self.digits()?;
        d.parse().map_err(|_| CnfError::Syntax {
            pos: start,
            msg: "number too large".into(),
        })
    }

    /// A polynomial with strictly descending terms; `index` is the
    /// enclosing term for error reports.
    fn poly(&mut self, index: usize) -> Result<Poly, CnfError> {
        let mut coeffs: Vec<u64> = Vec::new();
        let mut last: Option<usize> = None;
        loop {
            let (deg, c) = if self.eat(b'w') {
                let deg = if self.eat(b'^') { self.small_nat()? as usize } else { 1 };
                let c = if self.eat(b'*') { self.small_nat()? } else { 1 };
                (deg, c)
            } else {
                (0, self.small_nat()?)
            };
            if last.is_some_and(|l| l <= deg) {
                return Err(CnfError::NonCanonical(index));
            }
            if deg > 1 << 16 {
                return self.err("exponent degree too large");
            }
            last = Some(deg);
            if coeffs.len() <= deg {
                coeffs.resize(deg + 1, 0);
            }
            coeffs[deg] = c;
            if !self.eat(b'+') {
                break;
            }
        }
        Ok(Poly::new(coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(s: &str) -> OrdCNF {
        s.parse().unwrap()
    }

    /// All ordinals below `w^3` with coefficients at most 2.
    pub(crate) fn small_sample() -> Vec<OrdCNF> {
        let mut out = Vec::new();
        for b2 in 0..3u64 {
            for b1 in 0..3u64 {
                for b0 in 0..3u64 {
                    out.push(Poly::new(vec![b0, b1, b2]).to_cnf());
                }
            }
        }
        out
    }

    #[test]
    fn poly_order() {
        assert_eq!(cmp_poly(&Poly::zero(), &Poly::nat(1)), Ordering::Less);
        assert_eq!(cmp_poly(&Poly::nat(5), &Poly::new(vec![0, 1])), Ordering::Less);
        assert_eq!(cmp_poly(&Poly::new(vec![3, 2]), &Poly::new(vec![9, 1])), Ordering::Greater);
    }

    #[test]
    fn cnf_order() {
        let a = c("w^(w)*3+w^2+7");
        assert_eq!(a.cmp(&a), Ordering::Equal);
        assert_eq!(c("w^(w)").cmp(&c("w^2*9+w*9+9")), Ordering::Greater);
        assert_eq!(c("w^2").cmp(&c("w^2+1")), Ordering::Less);
    }

    #[test]
    fn worked_sum() {
        let a = c("w^(w^3)*4+w^(w^2)*7+w^6*3+w^2+1");
        let b = c("w^(w^2)*2+w^6*3+w^5+5");
        assert_eq!(a.add(&b), c("w^(w^3)*4+w^(w^2)*9+w^6*3+w^5+5"));
        assert_eq!(c("w*2").add(&c("w*3")), c("w*5"));
        assert_eq!(OrdCNF::zero().add(&a), a);
        assert_eq!(a.add(&OrdCNF::zero()), a);
    }

    #[test]
    fn omega_powers() {
        assert!(c("1").is_omega_power());
        assert!(!c("w^2*2").is_omega_power());
        let p = OrdCNF::omega_power(Poly::nat(2));
        assert_eq!(p.render(), "w^2");
        assert_eq!(c(&p.render()), p);
        assert!(c("w^(w)").is_add_closed());
        assert!(OrdCNF::zero().is_add_closed());
        let x = c("w^2*2");
        assert!(!x.is_add_closed());
        let w2 = c("w^2");
        assert!(w2.add(&w2) >= x);
    }

    #[test]
    fn closure_is_omega_power_on_sample() {
        let sample = small_sample();
        for a in &sample {
            let closed = sample
                .iter()
                .filter(|x| *x < a)
                .all(|x| sample.iter().filter(|y| *y < a).all(|y| x.add(y) < *a));
            assert_eq!(closed, a.is_add_closed(), "{a}");
        }
    }

    #[test]
    fn parse_examples() {
        let a = c("w^(w^2*3+w)*2+w^3*5+7");
        assert_eq!(
            a.terms(),
            &[
                (Poly::new(vec![0, 1, 3]), BigUint::from(2u32)),
                (Poly::nat(3), BigUint::from(5u32)),
                (Poly::zero(), BigUint::from(7u32)),
            ]
        );
        assert_eq!(a.render(), "w^(w^2*3+w)*2+w^3*5+7");
        assert!(c("0").is_zero());
        assert_eq!("w+w^2".parse::<OrdCNF>(), Err(CnfError::NonCanonical(1)));
        assert_eq!("w+w".parse::<OrdCNF>(), Err(CnfError::NonCanonical(1)));
        assert_eq!("w^(w+w^2)".parse::<OrdCNF>(), Err(CnfError::NonCanonical(0)));
        for bad in ["", "w^", "01", "w*0", "w^0", "1+", "w^(w", "x", "0+1"] {
            assert!(bad.parse::<OrdCNF>().is_err(), "{bad}");
        }
        let big = c("w*123456789012345678901234567890");
        assert_eq!(big.render(), "w*123456789012345678901234567890");
    }

    #[test]
    fn laws_on_small_sample() {
        let s = small_sample();
        for a in &s {
            for b in &s {
                for d in &s {
                    assert_eq!(a.add(b).add(d), a.add(&b.add(d)));
                    if b < d {
                        assert!(a.add(b) < a.add(d));
                    }
                    if a <= b {
                        assert!(a.add(d) <= b.add(d));
                    }
                    if a <= b && b <= d {
                        assert!(a <= d);
                    }
                }
                if a <= b && b <= a {
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn poly_sum_matches_cnf_sum() {
        let s = small_sample();
        for a in &s {
            for b in &s {
                let (p, q) = (a.to_poly().unwrap(), b.to_poly().unwrap());
                assert_eq!(p.add(&q).to_cnf(), a.add(b));
                assert_eq!(p.cmp(&q), a.cmp(b));
            }
            let p = a.to_poly().unwrap();
            // w * a shifts every finite exponent up by one
            let shifted = OrdCNF::from_terms(
                a.terms().iter().map(|(e, k)| (Poly::nat(e.as_nat().unwrap() + 1), k.clone())).collect(),
            )
            .unwrap();
            assert_eq!(p.omega_times().to_cnf(), shifted);
        }
    }

    fn arb_poly() -> impl Strategy<Value = Poly> {
        prop::collection::vec(0u64..4, 0..4).prop_map(Poly::new)
    }

    fn arb_cnf() -> impl Strategy<Value = OrdCNF> {
        prop::collection::vec((arb_poly(), 1u64..5), 0..4).prop_map(|mut ts| {
            ts.sort_by(|a, b| b.0.cmp(&a.0));
            ts.dedup_by(|a, b| a.0 == b.0);
            OrdCNF::from_terms(ts.into_iter().map(|(p, c)| (p, BigUint::from(c))).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(a in arb_cnf()) {
            prop_assert_eq!(a.render().parse::<OrdCNF>().unwrap(), a);
        }

        #[test]
        fn absorption(a in arb_cnf(), e in arb_poly()) {
            let w = OrdCNF::omega_power(e);
            if a < w {
                prop_assert_eq!(a.add(&w), w);
            }
        }

        #[test]
        fn addition_is_monotone(a in arb_cnf(), b in arb_cnf(), d in arb_cnf()) {
            prop_assert_eq!(a.add(&b).add(&d), a.add(&b.add(&d)));
            if b < d {
                prop_assert!(a.add(&b) < a.add(&d));
            }
            prop_assert!(a.add(&b) >= b);
        }
    }
}
