//! Countable ordinals below epsilon_0 in Cantor normal form.
//!
//! An [`Ordinal`] is a strictly decreasing list of terms `w^e * c`.  The empty
//! list is zero.  Because the representation is canonical, derived equality
//! and hashing agree with ordinal equality.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Ordinal {
    terms: Vec<Term>,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Term {
    pub exp: Ordinal,
    pub coeff: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrdinalError {
    #[error("{ord} is not of the form b+w with b a limit")]
    NotLimitSuccessor { ord: Ordinal },
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        self.exp.cmp(&other.exp).then(self.coeff.cmp(&other.coeff))
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(&other.terms) {
            match a.cmp(b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn compare(a: &Ordinal, b: &Ordinal) -> Ordering {
    a.cmp(b)
}

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn nat(n: u64) -> Self {
        if n == 0 {
            return Self::zero();
        }
        Ordinal { terms: vec![Term { exp: Self::zero(), coeff: n }] }
    }

    pub fn omega() -> Self {
        Self::omega_pow(Self::nat(1))
    }

    /// `w^e`.
    pub fn omega_pow(e: Ordinal) -> Self {
        Self::omega_pow_mul(e, 1)
    }

    /// `w^e * c`; zero when `c == 0`.
    pub fn omega_pow_mul(e: Ordinal, c: u64) -> Self {
        if c == 0 {
            return Self::zero();
        }
        Ordinal { terms: vec![Term { exp: e, coeff: c }] }
    }

    /// `w * k`.
    pub fn omega_mul(k: u64) -> Self {
        Self::omega_pow_mul(Self::nat(1), k)
    }

    /// Builds from terms, checking the normal-form invariants.
    pub fn from_terms(terms: Vec<Term>) -> Option<Self> {
        if terms.iter().any(|t| t.coeff == 0) {
            return None;
        }
        if terms.windows(2).any(|w| w[0].exp <= w[1].exp) {
            return None;
        }
        Some(Ordinal { terms })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_nat(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [t] if t.exp.is_zero() => Some(t.coeff),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.as_nat().is_some()
    }

    /// Limit in the broad sense: zero counts as a limit.
    pub fn is_limit(&self) -> bool {
        match self.terms.last() {
            None => true,
            Some(t) => !t.exp.is_zero(),
        }
    }

    pub fn is_successor(&self) -> bool {
        !self.is_limit()
    }

    pub fn add(&self, other: &Ordinal) -> Ordinal {
        let Some(lead) = other.terms.first() else {
            return self.clone();
        };
        let mut terms: Vec<Term> = Vec::with_capacity(self.terms.len() + other.terms.len());
        let mut merged = None;
        for t in &self.terms {
            match t.exp.cmp(&lead.exp) {
                Ordering::Greater => terms.push(t.clone()),
                Ordering::Equal => merged = Some(t.coeff),
                Ordering::Less => break,
            }
        }
        let mut rest = other.terms.iter();
        if let Some(c) = merged {
            let t = rest.next().expect("nonempty");
            terms.push(Term { exp: t.exp.clone(), coeff: c.checked_add(t.coeff).expect("coefficient overflow") });
        }
        terms.extend(rest.cloned());
        Ordinal { terms }
    }

    pub fn add_nat(&self, k: u64) -> Ordinal {
        self.add(&Ordinal::nat(k))
    }

    pub fn succ(&self) -> Ordinal {
        self.add_nat(1)
    }

    /// Immediate predecessor of a successor ordinal.
    pub fn pred(&self) -> Option<Ordinal> {
        let (lam, k) = self.split_finite();
        (k > 0).then(|| lam.add_nat(k - 1))
    }

    /// Writes `self = lambda + k` with `lambda` a limit (possibly 0).
    pub fn split_finite(&self) -> (Ordinal, u64) {
        match self.terms.last() {
            Some(t) if t.exp.is_zero() => {
                let mut terms = self.terms.clone();
                terms.pop();
                (Ordinal { terms }, t.coeff)
            }
            _ => (self.clone(), 0),
        }
    }

    /// For `self = b + w` with `b` a limit, returns `b`.
    pub fn limit_pred(&self) -> Result<Ordinal, OrdinalError> {
        match self.terms.last() {
            Some(t) if t.exp.as_nat() == Some(1) => {
                let mut terms = self.terms.clone();
                let last = terms.last_mut().unwrap();
                if last.coeff == 1 {
                    terms.pop();
                } else {
                    last.coeff -= 1;
                }
                Ok(Ordinal { terms })
            }
            _ => Err(OrdinalError::NotLimitSuccessor { ord: self.clone() }),
        }
    }

    /// Splits a nonzero limit `self = d + w^e` into `(d, e)`.
    fn last_power(&self) -> Option<(Ordinal, Ordinal)> {
        if self.is_zero() || !self.is_limit() {
            return None;
        }
        let mut terms = self.terms.clone();
        let last = terms.last_mut().unwrap();
        let e = last.exp.clone();
        if last.coeff == 1 {
            terms.pop();
        } else {
            last.coeff -= 1;
        }
        Some((Ordinal { terms }, e))
    }

    /// True when `self = g + w` for some `g` (a successor limit).
    pub fn is_successor_limit(&self) -> bool {
        !self.is_zero() && self.terms.last().map(|t| t.exp.as_nat() == Some(1)) == Some(true)
    }

    /// The n-th point of the canonical ladder of a nonzero limit.
    ///
    /// For `d + w^(e+1)` the ladder is `d + w^e * n`; for `d + w^e` with `e`
    /// a limit it is `d + w^(e[n+1])`, so its points are limits themselves.
    pub fn ladder_point(&self, n: u64) -> Ordinal {
        let (d, e) = self.last_power().expect("ladder of a nonzero limit");
        match e.pred() {
            Some(ep) => d.add(&Ordinal::omega_pow_mul(ep, n)),
            None => d.add(&Ordinal::omega_pow(e.ladder_point(n + 1))),
        }
    }

    /// `#(C cap alpha)` for the canonical ladder `C` of `self`, i.e. the least
    /// `n` with `c_n >= alpha`.  Requires `alpha < self`.
    pub fn ladder_count(&self, alpha: &Ordinal) -> u64 {
        debug_assert!(alpha < self);
        let (d, e) = self.last_power().expect("ladder of a nonzero limit");
        if *alpha <= d {
            return 0;
        }
        let r = alpha.minus_prefix(&d);
        let lead = r.terms.first().expect("alpha > d");
        match e.pred() {
            Some(ep) => {
                if lead.exp == ep {
                    if r.terms.len() == 1 {
                        lead.coeff
                    } else {
                        lead.coeff + 1
                    }
                } else {
                    // r < w^ep
                    1
                }
            }
            None => {
                // c_n = d + w^(e[n]) with e[n] = ladder(e, n+1); find least n
                // with w^(e[n]) >= r.
                let a = &lead.exp;
                let exact = r.terms.len() == 1 && lead.coeff == 1;
                let m = e.ladder_count(a);
                let mut n = m.saturating_sub(1);
                loop {
                    let en = e.ladder_point(n + 1);
                    if en > *a || (en == *a && exact) {
                        return n;
                    }
                    n += 1;
                }
            }
        }
    }

    /// For `prefix <= self` where `prefix` is a limit with `self = prefix + r`,
    /// returns `r`.
    fn minus_prefix(&self, prefix: &Ordinal) -> Ordinal {
        let mut i = 0;
        while i < prefix.terms.len() && prefix.terms[i] == self.terms[i] {
            i += 1;
        }
        let mut terms: Vec<Term> = self.terms[i..].to_vec();
        if i < prefix.terms.len() {
            let p = &prefix.terms[i];
            let t = &mut terms[0];
            debug_assert!(p.exp == t.exp && p.coeff < t.coeff && i + 1 == prefix.terms.len());
            t.coeff -= p.coeff;
        }
        let r = Ordinal { terms };
        debug_assert_eq!(prefix.add(&r), *self);
        r
    }

    /// Renders an exponent so that the result parses back unambiguously.
    fn fmt_exp(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_finite() {
            return write!(f, "{}", self.as_nat().unwrap());
        }
        if let [t] = self.terms.as_slice() {
            if t.coeff == 1 {
                return write!(f, "{self}");
            }
        }
        write!(f, "({self})")
    }

    pub fn parse(s: &str) -> Result<Ordinal, OrdinalError> {
        let mut p = Parser { src: s.as_bytes(), pos: 0 };
        let o = p.ordinal()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("trailing input"));
        }
        Ok(o)
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            if t.exp.is_zero() {
                write!(f, "{}", t.coeff)?;
                continue;
            }
            write!(f, "w")?;
            if t.exp.as_nat() != Some(1) {
                write!(f, "^")?;
                t.exp.fmt_exp(f)?;
            }
            if t.coeff != 1 {
                write!(f, "*{}", t.coeff)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Ordinal {
    type Err = OrdinalError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ordinal::parse(s)
    }
}

impl From<u64> for Ordinal {
    fn from(n: u64) -> Self {
        Ordinal::nat(n)
    }
}

impl std::ops::Add for &Ordinal {
    type Output = Ordinal;
    fn add(self, rhs: &Ordinal) -> Ordinal {
        Ordinal::add(self, rhs)
    }
}

impl Serialize for Ordinal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Ordinal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ordinal::parse(&s).map_err(serde::de::Error::custom)
    }
}

pub(crate) struct Parser<'a> {
    pub(crate) src: &'a [u8],
    pub(crate) pos: usize,
}

impl<'a> Parser<'a> {
    pub(crate) fn err(&self, msg: &str) -> OrdinalError {
        OrdinalError::Syntax { pos: self.pos, msg: msg.to_string() }
    }

    pub(crate) fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    pub(crate) fn integer(&mut self) -> Result<u64, OrdinalError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        let txt = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        txt.parse().map_err(|_| OrdinalError::Syntax { pos: start, msg: "integer too large".into() })
    }

    /// integer | "w" ["^" exponent] | "(" ordinal ")"
    fn exponent(&mut self) -> Result<Ordinal, OrdinalError> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let o = self.ordinal()?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(o)
            }
            Some(b'w') => {
                self.pos += 1;
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    Ok(Ordinal::omega_pow(self.exponent()?))
                } else {
                    Ok(Ordinal::omega())
                }
            }
            Some(c) if c.is_ascii_digit() => Ok(Ordinal::nat(self.integer()?)),
            _ => Err(self.err("expected exponent")),
        }
    }

    fn term(&mut self) -> Result<Term, OrdinalError> {
        self.skip_ws();
        match self.peek() {
            Some(b'w') => {
                self.pos += 1;
                let exp = if self.peek() == Some(b'^') {
                    self.pos += 1;
                    self.exponent()?
                } else {
                    Ordinal::nat(1)
                };
                let coeff = if self.peek() == Some(b'*') {
                    self.pos += 1;
                    let at = self.pos;
                    let c = self.integer()?;
                    if c == 0 {
                        return Err(OrdinalError::Syntax { pos: at, msg: "coefficient must be positive".into() });
                    }
                    c
                } else {
                    1
                };
                Ok(Term { exp, coeff })
            }
            Some(c) if c.is_ascii_digit() => Ok(Term { exp: Ordinal::zero(), coeff: self.integer()? }),
            _ => Err(self.err("expected term")),
        }
    }

    pub(crate) fn ordinal(&mut self) -> Result<Ordinal, OrdinalError> {
        let mut terms: Vec<Term> = Vec::new();
        loop {
            self.skip_ws();
            let at = self.pos;
            let t = self.term()?;
            if t.coeff == 0 {
                // a bare "0" is only allowed as the whole ordinal
                self.skip_ws();
                if !terms.is_empty() || self.peek() == Some(b'+') {
                    return Err(OrdinalError::Syntax { pos: at, msg: "zero term".into() });
                }
                return Ok(Ordinal::zero());
            }
            if let Some(prev) = terms.last() {
                if prev.exp <= t.exp {
                    return Err(OrdinalError::Syntax { pos: at, msg: "exponents must strictly decrease".into() });
                }
            }
            terms.push(t);
            self.skip_ws();
            if self.peek() == Some(b'+') {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(Ordinal { terms })
    }
}

/// A finite set of ordinals kept sorted and duplicate-free.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize)]
pub struct FinOrdSet {
    elems: Vec<Ordinal>,
}

impl FinOrdSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_sorted_unchecked(elems: Vec<Ordinal>) -> Self {
        debug_assert!(elems.windows(2).all(|w| w[0] < w[1]));
        FinOrdSet { elems }
    }

    pub fn elements(&self) -> &[Ordinal] {
        &self.elems
    }

    pub fn into_vec(self) -> Vec<Ordinal> {
        self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Ordinal> {
        self.elems.iter()
    }

    pub fn min(&self) -> Option<&Ordinal> {
        self.elems.first()
    }

    pub fn max(&self) -> Option<&Ordinal> {
        self.elems.last()
    }

    pub fn contains(&self, a: &Ordinal) -> bool {
        self.elems.binary_search(a).is_ok()
    }

    pub fn insert(&mut self, a: Ordinal) -> bool {
        match self.elems.binary_search(&a) {
            Ok(_) => false,
            Err(i) => {
                self.elems.insert(i, a);
                true
            }
        }
    }

    /// `F cap alpha`, the elements below `alpha`.
    pub fn below(&self, alpha: &Ordinal) -> FinOrdSet {
        let i = self.elems.partition_point(|x| x < alpha);
        FinOrdSet { elems: self.elems[..i].to_vec() }
    }

    /// `F cap (alpha+1)`.
    pub fn up_to(&self, alpha: &Ordinal) -> FinOrdSet {
        let i = self.elems.partition_point(|x| x <= alpha);
        FinOrdSet { elems: self.elems[..i].to_vec() }
    }

    /// Smallest element `>= alpha`.
    pub fn min_at_least(&self, alpha: &Ordinal) -> Option<&Ordinal> {
        let i = self.elems.partition_point(|x| x < alpha);
        self.elems.get(i)
    }

    pub fn union(&self, other: &FinOrdSet) -> FinOrdSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.elems.len() && j < other.elems.len() {
            match self.elems[i].cmp(&other.elems[j]) {
                Ordering::Less => {
                    out.push(self.elems[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.elems[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push(self.elems[i].clone());
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.elems[i..]);
        out.extend_from_slice(&other.elems[j..]);
        FinOrdSet { elems: out }
    }

    pub fn intersection(&self, other: &FinOrdSet) -> FinOrdSet {
        FinOrdSet { elems: self.elems.iter().filter(|x| other.contains(x)).cloned().collect() }
    }

    pub fn is_subset(&self, other: &FinOrdSet) -> bool {
        self.elems.iter().all(|x| other.contains(x))
    }

    /// 1-based position of `a`.
    pub fn position(&self, a: &Ordinal) -> Option<usize> {
        self.elems.binary_search(a).ok().map(|i| i + 1)
    }

    /// The order-preserving enumeration `{1..#F} -> F`.
    pub fn order_iso(&self) -> BTreeMap<usize, Ordinal> {
        self.elems.iter().enumerate().map(|(i, a)| (i + 1, a.clone())).collect()
    }

    /// Parses a comma-separated list of ordinal literals.
    pub fn parse(s: &str) -> Result<FinOrdSet, OrdinalError> {
        let mut set = FinOrdSet::new();
        if s.trim().is_empty() {
            return Ok(set);
        }
        let mut p = Parser { src: s.as_bytes(), pos: 0 };
        loop {
            set.insert(p.ordinal()?);
            p.skip_ws();
            match p.peek() {
                Some(b',') => p.pos += 1,
                None => break,
                Some(_) => return Err(p.err("expected ','")),
            }
        }
        Ok(set)
    }
}

impl FromIterator<Ordinal> for FinOrdSet {
    fn from_iter<I: IntoIterator<Item = Ordinal>>(iter: I) -> Self {
        let mut elems: Vec<Ordinal> = iter.into_iter().collect();
        elems.sort();
        elems.dedup();
        FinOrdSet { elems }
    }
}

impl<'a> IntoIterator for &'a FinOrdSet {
    type Item = &'a Ordinal;
    type IntoIter = std::slice::Iter<'a, Ordinal>;
    fn into_iter(self) -> Self::IntoIter {
        self.elems.iter()
    }
}

impl fmt::Display for FinOrdSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.elems.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for FinOrdSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        Ordinal::parse(s).unwrap()
    }

    #[test]
    fn compare_examples() {
        assert_eq!(compare(&o("0"), &o("0")), Ordering::Equal);
        assert_eq!(compare(&o("w"), &o("w*1")), Ordering::Equal);
        assert_eq!(compare(&o("w^2+3"), &o("w*5")), Ordering::Greater);
    }

    #[test]
    fn add_examples() {
        assert_eq!(o("3").add(&o("w")), o("w"));
        assert_eq!(o("w").add(&o("3")), o("w+3"));
        assert_eq!(o("w*2+1").add(&o("w")), o("w*3"));
        assert_eq!(o("w^2+w").add(&o("w^2*2+1")), o("w^2*3+1"));
    }

    #[test]
    fn limits() {
        assert!(o("0").is_limit());
        assert!(o("w*3").is_limit());
        assert!(!o("w+5").is_limit());
        assert_eq!(o("w").limit_pred().unwrap(), o("0"));
        assert_eq!(o("w*4").limit_pred().unwrap(), o("w*3"));
        assert_eq!(o("w^2+w").limit_pred().unwrap(), o("w^2"));
        assert!(o("w^2").limit_pred().is_err());
        assert!(o("w+1").limit_pred().is_err());
    }

    #[test]
    fn parse_render() {
        assert_eq!(
            o("w^2*2+w*3+5"),
            Ordinal::from_terms(vec![
                Term { exp: Ordinal::nat(2), coeff: 2 },
                Term { exp: Ordinal::nat(1), coeff: 3 },
                Term { exp: Ordinal::zero(), coeff: 5 },
            ])
            .unwrap()
        );
        assert_eq!(o("w").to_string(), "w");
        assert_eq!(o("w^w^2*3+w^(w+1)").to_string(), "w^w^2*3+w^(w+1)");
        assert!(matches!(Ordinal::parse("w*0"), Err(OrdinalError::Syntax { pos: 2, .. })));
        assert!(Ordinal::parse("w+w^2").is_err());
        assert!(Ordinal::parse("3+w").is_err());
        assert!(Ordinal::parse("w+0").is_err());
        assert!(Ordinal::parse("").is_err());
    }

    #[test]
    fn order_iso_examples() {
        let f: FinOrdSet = [o("w*2"), o("w")].into_iter().collect();
        let m = f.order_iso();
        assert_eq!(m[&1], o("w"));
        assert_eq!(m[&2], o("w*2"));
        assert!(FinOrdSet::new().order_iso().is_empty());
        let g = FinOrdSet::parse("w^2, 5, w").unwrap();
        assert_eq!(g.elements(), &[o("5"), o("w"), o("w^2")]);
    }

    #[test]
    fn ladders() {
        let l = o("w*2");
        assert_eq!(l.ladder_point(0), o("w"));
        assert_eq!(l.ladder_point(3), o("w+3"));
        let l = o("w^2");
        assert_eq!(l.ladder_point(0), o("0"));
        assert_eq!(l.ladder_point(2), o("w*2"));
        let l = o("w^w");
        assert_eq!(l.ladder_point(0), o("w"));
        assert_eq!(l.ladder_point(2), o("w^3"));
    }

    #[test]
    fn ladder_count_matches_scan() {
        let lims = ["w", "w*3", "w^2", "w^2*2+w", "w^3", "w^w", "w^w+w^2", "w^(w+1)", "w^w^2"];
        let alphas = [
            "0", "1", "7", "w", "w+4", "w*2", "w*2+1", "w*5", "w^2", "w^2+3", "w^2*2", "w^2*2+5", "w^3", "w^4+w",
            "w^6", "w^w", "w^w+w+1", "w^w+w^2", "w^w*2", "w^(w+1)",
        ];
        for l in lims {
            let l = o(l);
            for a in alphas {
                let a = o(a);
                if a >= l {
                    continue;
                }
                let mut n = 0;
                while l.ladder_point(n) < a {
                    n += 1;
                }
                assert_eq!(l.ladder_count(&a), n, "lambda={l} alpha={a}");
            }
        }
    }

    #[test]
    fn finordset_ops() {
        let f = FinOrdSet::parse("1,3,w").unwrap();
        let g = FinOrdSet::parse("3,w,w+1").unwrap();
        assert_eq!(f.union(&g), FinOrdSet::parse("1,3,w,w+1").unwrap());
        assert_eq!(f.intersection(&g), FinOrdSet::parse("3,w").unwrap());
        assert_eq!(f.below(&o("w")), FinOrdSet::parse("1,3").unwrap());
        assert_eq!(f.up_to(&o("w")), f);
        assert_eq!(f.position(&o("w")), Some(3));
    }
}
