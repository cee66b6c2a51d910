//! Finitely supported rational vectors indexed by ordinals.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, BigRational, One, Signed, Zero};
use thiserror::Error;

use crate::ordinals::{FinOrdSet, Ordinal, OrdinalError, Parser};

pub type Q = BigRational;

pub fn rat(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VecError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("vector {0} of the sequence is zero")]
    ZeroVector(usize),
}

impl From<OrdinalError> for VecError {
    fn from(e: OrdinalError) -> Self {
        match e {
            OrdinalError::Syntax { pos, msg } => VecError::Syntax { pos, msg },
            other => VecError::Syntax { pos: 0, msg: other.to_string() },
        }
    }
}

/// Serializes a rational as the string `p/q` (or `p`).
pub fn ser_q<S: serde::Serializer>(q: &Q, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

pub fn ser_qs<S: serde::Serializer>(qs: &[Q], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(qs.iter().map(|q| q.to_string()))
}

pub fn ser_opt_q<S: serde::Serializer>(q: &Option<Q>, s: S) -> Result<S::Ok, S::Error> {
    match q {
        Some(q) => s.serialize_some(&q.to_string()),
        None => s.serialize_none(),
    }
}

/// Closed interval `[lo, hi]` of ordinals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub struct Interval {
    pub lo: Ordinal,
    pub hi: Ordinal,
}

impl Interval {
    pub fn new(lo: Ordinal, hi: Ordinal) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn contains(&self, a: &Ordinal) -> bool {
        self.lo <= *a && *a <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = (&self.lo).max(&other.lo).clone();
        let hi = (&self.hi).min(&other.hi).clone();
        (lo <= hi).then_some(Interval { lo, hi })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// A set of indices to restrict to.
#[derive(Clone, Debug)]
pub enum Region {
    All,
    Interval(Interval),
    Set(FinOrdSet),
    Not(Box<Region>),
}

impl Region {
    pub fn contains(&self, a: &Ordinal) -> bool {
        match self {
            Region::All => true,
            Region::Interval(i) => i.contains(a),
            Region::Set(s) => s.contains(a),
            Region::Not(r) => !r.contains(a),
        }
    }

    pub fn complement(self) -> Region {
        Region::Not(Box::new(self))
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Vec00 {
    entries: BTreeMap<Ordinal, Q>,
}

impl Vec00 {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `e_a`.
    pub fn basis(a: Ordinal) -> Self {
        let mut v = Self::zero();
        v.set(a, Q::one());
        v
    }

    pub fn from_pairs<I: IntoIterator<Item = (Ordinal, Q)>>(pairs: I) -> Self {
        let mut v = Self::zero();
        for (a, q) in pairs {
            let cur = v.get(&a);
            v.set(a, cur + q);
        }
        v
    }

    pub fn get(&self, a: &Ordinal) -> Q {
        self.entries.get(a).cloned().unwrap_or_else(Q::zero)
    }

    pub fn set(&mut self, a: Ordinal, q: Q) {
        if q.is_zero() {
            self.entries.remove(&a);
        } else {
            self.entries.insert(a, q);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Ordinal, &Q)> {
        self.entries.iter()
    }

    pub fn values(&self) -> impl Iterator<Item = &Q> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn support(&self) -> FinOrdSet {
        FinOrdSet::from_sorted_unchecked(self.entries.keys().cloned().collect())
    }

    pub fn min_index(&self) -> Option<&Ordinal> {
        self.entries.keys().next()
    }

    pub fn max_index(&self) -> Option<&Ordinal> {
        self.entries.keys().next_back()
    }

    /// `[min supp, max supp]`, or `None` for the zero vector.
    pub fn range_hull(&self) -> Option<Interval> {
        Some(Interval::new(self.min_index()?.clone(), self.max_index()?.clone()))
    }

    pub fn restrict(&self, r: &Region) -> Vec00 {
        Vec00 {
            entries: self.entries.iter().filter(|(a, _)| r.contains(a)).map(|(a, q)| (a.clone(), q.clone())).collect(),
        }
    }

    pub fn restrict_interval(&self, i: &Interval) -> Vec00 {
        Vec00 {
            entries: self.entries.range(i.lo.clone()..=i.hi.clone()).map(|(a, q)| (a.clone(), q.clone())).collect(),
        }
    }

    pub fn add(&self, other: &Vec00) -> Vec00 {
        let mut out = self.clone();
        for (a, q) in &other.entries {
            let cur = out.get(a);
            out.set(a.clone(), cur + q);
        }
        out
    }

    pub fn sub(&self, other: &Vec00) -> Vec00 {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> Vec00 {
        if c.is_zero() {
            return Vec00::zero();
        }
        Vec00 { entries: self.entries.iter().map(|(a, q)| (a.clone(), q * c)).collect() }
    }

    /// Coordinatewise absolute value.
    pub fn abs(&self) -> Vec00 {
        Vec00 { entries: self.entries.iter().map(|(a, q)| (a.clone(), q.abs())).collect() }
    }

    pub fn norm_inf(&self) -> Q {
        self.entries.values().map(|q| q.abs()).max().unwrap_or_else(Q::zero)
    }

    pub fn norm_l1(&self) -> Q {
        self.entries.values().fold(Q::zero(), |s, q| s + q.abs())
    }

    pub fn sum(&self) -> Q {
        self.entries.values().fold(Q::zero(), |s, q| s + q)
    }

    /// Absolute values in index order; the data the symmetric norms depend on.
    pub fn abs_values(&self) -> Vec<Q> {
        self.entries.values().map(|q| q.abs()).collect()
    }

    pub fn parse(s: &str) -> Result<Vec00, VecError> {
        let mut v = Vec00::zero();
        if s.trim().is_empty() {
            return Ok(v);
        }
        let mut p = Parser { src: s.as_bytes(), pos: 0 };
        loop {
            p.skip_ws();
            let at = p.pos;
            let idx = p.ordinal()?;
            p.skip_ws();
            if p.src.get(p.pos) != Some(&b':') {
                return Err(p.err("expected ':'").into());
            }
            p.pos += 1;
            p.skip_ws();
            let neg = p.src.get(p.pos) == Some(&b'-');
            if neg {
                p.pos += 1;
            }
            let num = p.integer()?;
            let mut den = 1;
            if p.src.get(p.pos) == Some(&b'/') {
                p.pos += 1;
                let dat = p.pos;
                den = p.integer()?;
                if den == 0 {
                    return Err(VecError::Syntax { pos: dat, msg: "zero denominator".into() });
                }
            }
            if v.entries.contains_key(&idx) {
                return Err(VecError::Syntax { pos: at, msg: format!("duplicate index {idx}") });
            }
            let mut q = BigRational::new(BigInt::from(num), BigInt::from(den));
            if neg {
                q = -q;
            }
            v.set(idx, q);
            p.skip_ws();
            match p.src.get(p.pos) {
                Some(b',') => p.pos += 1,
                None => break,
                Some(_) => return Err(p.err("expected ','").into()),
            }
        }
        Ok(v)
    }
}

impl serde::Serialize for Vec00 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(self.entries.iter().map(|(a, q)| (a.to_string(), q.to_string())))
    }
}

/// The pairing `sum_a phi(a) x(a)`.
pub fn act(phi: &Vec00, x: &Vec00) -> Q {
    let (small, big) = if phi.len() <= x.len() { (phi, x) } else { (x, phi) };
    let mut s = Q::zero();
    for (a, q) in small.iter() {
        if let Some(r) = big.entries.get(a) {
            s += q * r;
        }
    }
    s
}

/// Whether consecutive supports are strictly separated.
pub fn is_block(xs: &[Vec00]) -> Result<bool, VecError> {
    if let Some(i) = xs.iter().position(|x| x.is_zero()) {
        return Err(VecError::ZeroVector(i));
    }
    Ok(xs.windows(2).all(|w| w[0].max_index() < w[1].min_index()))
}

impl fmt::Display for Vec00 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (a, q)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}:{q}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Vec00 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        Ordinal::parse(s).unwrap()
    }

    fn v(s: &str) -> Vec00 {
        Vec00::parse(s).unwrap()
    }

    #[test]
    fn support_and_hull() {
        assert!(Vec00::zero().support().is_empty());
        assert_eq!(Vec00::zero().range_hull(), None);
        assert_eq!(v("w:1, w*2:2").support(), FinOrdSet::parse("w,w*2").unwrap());
        assert_eq!(v("3:1, 7:-1").range_hull(), Some(Interval::new(o("3"), o("7"))));
    }

    #[test]
    fn restriction() {
        let x = v("1:1, 5:1");
        assert!(x.restrict(&Region::Set(FinOrdSet::new())).is_zero());
        assert_eq!(x.restrict(&Region::Interval(Interval::new(o("0"), o("2")))), v("1:1"));
        let r = Region::Set(FinOrdSet::parse("5").unwrap());
        assert_eq!(x.restrict(&r).add(&x.restrict(&r.clone().complement())), x);
    }

    #[test]
    fn blocks() {
        let e = |s: &str| Vec00::basis(o(s));
        assert!(is_block(&[e("1"), e("2")]).unwrap());
        assert!(!is_block(&[v("1:1, 3:1"), e("2")]).unwrap());
        assert!(is_block(&[e("w"), e("w+1"), e("w*2")]).unwrap());
        assert_eq!(is_block(&[e("1"), Vec00::zero()]), Err(VecError::ZeroVector(1)));
    }

    #[test]
    fn pairing() {
        let a = o("w+4");
        assert_eq!(act(&Vec00::basis(a.clone()), &Vec00::basis(a.clone())), int(1));
        assert_eq!(act(&Vec00::basis(a), &Vec00::basis(o("3"))), int(0));
        assert_eq!(act(&v("1:1/2, 2:1/2"), &v("1:1, 2:-1")), int(0));
    }

    #[test]
    fn literal() {
        let x = v("w*2+1:3/2, w*3:-1");
        assert_eq!(x.get(&o("w*2+1")), rat(3, 2));
        assert_eq!(x.get(&o("w*3")), int(-1));
        assert_eq!(x.to_string(), "w*2+1:3/2, w*3:-1");
        assert_eq!(v(&x.to_string()), x);
        assert!(matches!(Vec00::parse("1:1, 2"), Err(VecError::Syntax { pos: 6, .. })));
        assert!(matches!(Vec00::parse("1:1/0"), Err(VecError::Syntax { pos: 4, .. })));
        assert!(matches!(Vec00::parse("w*0:1"), Err(VecError::Syntax { pos: 2, .. })));
        assert!(Vec00::parse("1:1, 1:2").is_err());
        assert!(v("4:0").is_zero());
    }
}
