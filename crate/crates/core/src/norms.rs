//! Mixed Tsirelson norms `T[(1/m_j, n_j)]`, the auxiliary norm with arities
//! `4 n_j`, James-like norms over them, and the norming trees used as
//! brute-force oracles.
//!
//! All norms here are 1-unconditional and 1-subsymmetric, so they only see
//! the ordered list of absolute values of a vector.  The evaluator is a
//! dynamic program over segments of that list: a segment's norm is either
//! its largest entry or `(1/m_j)` times the best split of the segment into
//! between 2 and `n_j` consecutive pieces.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use num::{BigInt, BigRational, BigUint, One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::ordinals::{FinOrdSet, Ordinal};
use crate::vectors::{act, ser_q, ser_qs, Interval, Region, Vec00, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormError {
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("weight index {0} is outside the schedule")]
    WeightIndex(usize),
    #[error("invalid functional: {0}")]
    Invalid(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

/// Finite prefix of the double sequence `(m_j, n_j)`, indexed from `j = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ParamSchedule {
    m: Vec<BigUint>,
    n: Vec<BigUint>,
    paper_exact: bool,
}

fn paper_terms(len: usize) -> (Vec<BigUint>, Vec<BigUint>) {
    let mut m = vec![BigUint::from(2u32)];
    let mut n = vec![BigUint::from(4u32)];
    while m.len() < len {
        let next_m = m.last().unwrap().pow(4u32);
        // s_j = log2(m_{j+1}^3); every m_j is a power of two
        let s = 3 * (next_m.bits() - 1);
        let next_n = (n.last().unwrap() * 4u32).pow(s as u32);
        m.push(next_m);
        n.push(next_n);
    }
    (m, n)
}

impl ParamSchedule {
    pub fn new(m: Vec<BigUint>, n: Vec<BigUint>) -> Result<Self, NormError> {
        if m.is_empty() || m.len() != n.len() {
            return Err(NormError::Schedule(format!(
                "m and n must be nonempty and of equal length (got {} and {})",
                m.len(),
                n.len()
            )));
        }
        if m[0] < BigUint::from(2u32) {
            return Err(NormError::Schedule("m_1 must be at least 2".into()));
        }
        if n[0].is_zero() {
            return Err(NormError::Schedule("n_1 must be positive".into()));
        }
        if m.windows(2).any(|w| w[0] >= w[1]) || n.windows(2).any(|w| w[0] >= w[1]) {
            return Err(NormError::Schedule("m and n must be strictly increasing".into()));
        }
        let (pm, pn) = paper_terms(m.len().min(4));
        let paper_exact = m.len() <= 4 && pm == m && pn == n;
        Ok(ParamSchedule { m, n, paper_exact })
    }

    pub fn from_u64(m: &[u64], n: &[u64]) -> Result<Self, NormError> {
        Self::new(m.iter().map(|&x| BigUint::from(x)).collect(), n.iter().map(|&x| BigUint::from(x)).collect())
    }

    /// The first `len` terms of `m_1 = 2, m_{j+1} = m_j^4`,
    /// `n_1 = 4, n_{j+1} = (4 n_j)^{s_j}` with `s_j = log2 m_{j+1}^3`.
    /// `n_5` already has about 3.5e8 bits, so `len` is capped at 4.
    pub fn paper(len: usize) -> Result<Self, NormError> {
        if len == 0 || len > 4 {
            return Err(NormError::Schedule(format!("paper prefix length must be in 1..=4, got {len}")));
        }
        let (m, n) = paper_terms(len);
        Ok(ParamSchedule { m, n, paper_exact: true })
    }

    /// `m_j = j + 1`, `n_j = j + 8`: long enough for coded weights, with no
    /// growth conditions.
    pub fn toy(len: usize) -> Result<Self, NormError> {
        if len == 0 {
            return Err(NormError::Schedule("toy schedule needs at least one term".into()));
        }
        let m: Vec<u64> = (2..len as u64 + 2).collect();
        let n: Vec<u64> = (9..len as u64 + 9).collect();
        Self::from_u64(&m, &n)
    }

    /// Parses `m = 2,4\nn = 3,5` (lines may also be separated by `;`),
    /// `paper:K` or `toy:K`.
    pub fn parse(text: &str) -> Result<Self, NormError> {
        let t = text.trim();
        if let Some(k) = t.strip_prefix("toy:") {
            let k: usize = k.trim().parse().map_err(|_| NormError::Schedule(format!("bad prefix length {k:?}")))?;
            return Self::toy(k);
        }
        if let Some(k) = t.strip_prefix("paper:") {
            let k: usize = k.trim().parse().map_err(|_| NormError::Schedule(format!("bad prefix length {k:?}")))?;
            return Self::paper(k);
        }
        let mut m = None;
        let mut n = None;
        for line in t.split(['\n', ';']) {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, vals) = line
                .split_once('=')
                .ok_or_else(|| NormError::Schedule(format!("expected 'key = values' in {line:?}")))?;
            let vals: Result<Vec<BigUint>, _> = vals.split(',').map(|v| v.trim().parse::<BigUint>()).collect();
            let vals = vals.map_err(|_| NormError::Schedule(format!("bad integer list in {line:?}")))?;
            match key.trim() {
                "m" if m.is_none() => m = Some(vals),
                "n" if n.is_none() => n = Some(vals),
                k => return Err(NormError::Schedule(format!("unexpected key {k:?}"))),
            }
        }
        match (m, n) {
            (Some(m), Some(n)) => Self::new(m, n),
            _ => Err(NormError::Schedule("both m and n are required".into())),
        }
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    /// Generated by the growth recursion, so estimates that need it apply.
    pub fn paper_exact(&self) -> bool {
        self.paper_exact
    }

    pub fn m(&self, j: usize) -> &BigUint {
        &self.m[j - 1]
    }

    pub fn n(&self, j: usize) -> &BigUint {
        &self.n[j - 1]
    }

    pub fn m_q(&self, j: usize) -> Q {
        BigRational::from_integer(BigInt::from(self.m[j - 1].clone()))
    }

    pub fn n_q(&self, j: usize) -> Q {
        BigRational::from_integer(BigInt::from(self.n[j - 1].clone()))
    }

    /// `min(n_j, cap)`.
    pub fn n_capped(&self, j: usize, cap: usize) -> usize {
        self.n[j - 1].to_usize().map_or(cap, |v| v.min(cap))
    }

    pub fn m_u64(&self, j: usize) -> Option<u64> {
        self.m[j - 1].to_u64()
    }

    pub fn n_u64(&self, j: usize) -> Option<u64> {
        self.n[j - 1].to_u64()
    }

    pub fn ms(&self) -> &[BigUint] {
        &self.m
    }

    pub fn ns(&self) -> &[BigUint] {
        &self.n
    }
}

impl fmt::Display for ParamSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[BigUint]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "m = {}\nn = {}", join(&self.m), join(&self.n))
    }
}

pub fn schedule_paper(len: usize) -> Result<ParamSchedule, NormError> {
    ParamSchedule::paper(len)
}

/// Which `(1/m_j, a_j)`-operations a norm or norming set uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Family {
    /// `a_j = arity * n_j`
    pub arity: u64,
    /// only even `j`
    pub even_only: bool,
}

impl Family {
    pub const T: Family = Family { arity: 1, even_only: false };
    pub const W: Family = Family { arity: 4, even_only: false };
    /// The even-weight part used as the base of the James-like comparison.
    pub const T0: Family = Family { arity: 1, even_only: true };

    pub fn weights(&self, sched: &ParamSchedule) -> Vec<usize> {
        (1..=sched.len()).filter(|j| !self.even_only || j % 2 == 0).collect()
    }

    /// `min(a_j, cap)`.
    pub fn arity_capped(&self, sched: &ParamSchedule, j: usize, cap: usize) -> usize {
        let a = sched.n(j) * BigUint::from(self.arity);
        a.to_usize().map_or(cap, |v| v.min(cap))
    }
}

/// The index set a type I functional is restricted to.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Restriction {
    Interval(Interval),
    /// Arbitrary subsets; admitted only for odd weights in the unconditional variant.
    Set(FinOrdSet),
}

impl Restriction {
    pub fn contains(&self, a: &Ordinal) -> bool {
        match self {
            Restriction::Interval(i) => i.contains(a),
            Restriction::Set(s) => s.contains(a),
        }
    }

    fn meet_interval(&self, e: &Interval) -> Option<Restriction> {
        match self {
            Restriction::Interval(i) => i.intersect(e).map(Restriction::Interval),
            Restriction::Set(s) => {
                let t: FinOrdSet = s.iter().filter(|a| e.contains(a)).cloned().collect();
                (!t.is_empty()).then_some(Restriction::Set(t))
            }
        }
    }

    fn meet_set(&self, t: &FinOrdSet) -> Option<Restriction> {
        let u: FinOrdSet = t.iter().filter(|a| self.contains(a)).cloned().collect();
        (!u.is_empty()).then_some(Restriction::Set(u))
    }

    fn apply(&self, v: &Vec00) -> Vec00 {
        match self {
            Restriction::Interval(i) => v.restrict_interval(i),
            Restriction::Set(s) => v.restrict(&Region::Set(s.clone())),
        }
    }
}

impl fmt::Display for Restriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Restriction::Interval(i) => write!(f, "{i}"),
            Restriction::Set(s) => write!(f, "{{{s}}}"),
        }
    }
}

/// A norming functional given by its construction tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Functional {
    /// `sign * e_index^*`
    Basis { sign: i8, index: Ordinal },
    /// `sign * E((1/m_j) sum children)` with `E` the optional interval.
    Weighted { sign: i8, j: usize, children: Vec<Functional>, restrict: Option<Restriction> },
    /// Rational sub-convex combination.
    Convex(#[serde(serialize_with = "ser_parts")] Vec<(Q, Functional)>),
}

fn ser_parts<S: serde::Serializer>(parts: &[(Q, Functional)], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(parts.iter().map(|(w, f)| (w.to_string(), f)))
}

impl Functional {
    pub fn basis(index: Ordinal) -> Self {
        Functional::Basis { sign: 1, index }
    }

    pub fn weighted(j: usize, children: Vec<Functional>) -> Self {
        Functional::Weighted { sign: 1, j, children, restrict: None }
    }

    /// The weight index of the root as constructed, if any.
    pub fn weight_of(&self) -> Option<usize> {
        match self {
            Functional::Weighted { j, .. } => Some(*j),
            _ => None,
        }
    }

    pub fn is_type_i(&self) -> bool {
        matches!(self, Functional::Weighted { .. })
    }

    /// Every weight index used by a node of the tree.
    pub fn tree_weights(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_weights(&mut out);
        out
    }

    fn collect_weights(&self, out: &mut BTreeSet<usize>) {
        match self {
            Functional::Basis { .. } => {}
            Functional::Weighted { j, children, .. } => {
                out.insert(*j);
                for c in children {
                    c.collect_weights(out);
                }
            }
            Functional::Convex(parts) => {
                for (_, c) in parts {
                    c.collect_weights(out);
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Functional::Basis { .. } => 0,
            Functional::Weighted { children, .. } => 1 + children.iter().map(|c| c.depth()).max().unwrap_or(0),
            Functional::Convex(parts) => parts.iter().map(|(_, c)| c.depth()).max().unwrap_or(0),
        }
    }

    pub fn negate(&self) -> Functional {
        match self {
            Functional::Basis { sign, index } => Functional::Basis { sign: -sign, index: index.clone() },
            Functional::Weighted { sign, j, children, restrict } => {
                Functional::Weighted { sign: -sign, j: *j, children: children.clone(), restrict: restrict.clone() }
            }
            Functional::Convex(parts) => {
                Functional::Convex(parts.iter().map(|(w, c)| (w.clone(), c.negate())).collect())
            }
        }
    }

    /// `E phi`; `None` when the restriction is certainly zero.
    pub fn restrict_interval(&self, e: &Interval) -> Option<Functional> {
        match self {
            Functional::Basis { index, .. } => e.contains(index).then(|| self.clone()),
            Functional::Weighted { sign, j, children, restrict } => {
                let r = match restrict {
                    Some(r) => r.meet_interval(e)?,
                    None => Restriction::Interval(e.clone()),
                };
                Some(Functional::Weighted { sign: *sign, j: *j, children: children.clone(), restrict: Some(r) })
            }
            Functional::Convex(parts) => {
                let p: Vec<_> =
                    parts.iter().filter_map(|(w, c)| c.restrict_interval(e).map(|c| (w.clone(), c))).collect();
                (!p.is_empty()).then_some(Functional::Convex(p))
            }
        }
    }

    /// `T phi` for an arbitrary index set `T`.
    pub fn restrict_set(&self, t: &FinOrdSet) -> Option<Functional> {
        match self {
            Functional::Basis { index, .. } => t.contains(index).then(|| self.clone()),
            Functional::Weighted { sign, j, children, restrict } => {
                let r = match restrict {
                    Some(r) => r.meet_set(t)?,
                    None => Restriction::Set(t.clone()),
                };
                Some(Functional::Weighted { sign: *sign, j: *j, children: children.clone(), restrict: Some(r) })
            }
            Functional::Convex(parts) => {
                let p: Vec<_> = parts.iter().filter_map(|(w, c)| c.restrict_set(t).map(|c| (w.clone(), c))).collect();
                (!p.is_empty()).then_some(Functional::Convex(p))
            }
        }
    }

    /// The functional as a vector.  Checks the weight indices against `sched`
    /// and that children of weighted nodes are successive.
    pub fn to_vec(&self, sched: &ParamSchedule) -> Result<Vec00, NormError> {
        match self {
            Functional::Basis { sign, index } => {
                if sign.abs() != 1 {
                    return Err(NormError::Invalid(format!("sign {sign}")));
                }
                let mut v = Vec00::zero();
                v.set(index.clone(), Q::from_integer(BigInt::from(*sign)));
                Ok(v)
            }
            Functional::Weighted { sign, j, children, restrict } => {
                if *j == 0 || *j > sched.len() {
                    return Err(NormError::WeightIndex(*j));
                }
                if sign.abs() != 1 {
                    return Err(NormError::Invalid(format!("sign {sign}")));
                }
                let mut sum = Vec00::zero();
                let mut last: Option<Ordinal> = None;
                for c in children {
                    let cv = c.to_vec(sched)?;
                    if let (Some(l), Some(lo)) = (&last, cv.min_index()) {
                        if lo <= l {
                            return Err(NormError::Invalid("children are not successive".into()));
                        }
                    }
                    if let Some(hi) = cv.max_index() {
                        last = Some(hi.clone());
                    }
                    sum = sum.add(&cv);
                }
                let mut v = sum.scale(&(Q::from_integer(BigInt::from(*sign)) / sched.m_q(*j)));
                if let Some(r) = restrict {
                    v = r.apply(&v);
                }
                Ok(v)
            }
            Functional::Convex(parts) => {
                let mut total = Q::zero();
                let mut v = Vec00::zero();
                for (w, c) in parts {
                    if !w.is_positive() {
                        return Err(NormError::Invalid("convex weights must be positive".into()));
                    }
                    total += w;
                    v = v.add(&c.to_vec(sched)?.scale(w));
                }
                if total > Q::one() {
                    return Err(NormError::Invalid("convex weights sum above 1".into()));
                }
                Ok(v)
            }
        }
    }

    /// Maps every basis index through `f` (used to move a functional along an
    /// order isomorphism).
    pub fn map_indices(&self, f: &dyn Fn(&Ordinal) -> Ordinal) -> Functional {
        match self {
            Functional::Basis { sign, index } => Functional::Basis { sign: *sign, index: f(index) },
            Functional::Weighted { sign, j, children, restrict } => Functional::Weighted {
                sign: *sign,
                j: *j,
                children: children.iter().map(|c| c.map_indices(f)).collect(),
                restrict: restrict.as_ref().map(|r| match r {
                    Restriction::Interval(i) => Restriction::Interval(Interval::new(f(&i.lo), f(&i.hi))),
                    Restriction::Set(s) => Restriction::Set(s.iter().map(f).collect()),
                }),
            },
            Functional::Convex(parts) => {
                Functional::Convex(parts.iter().map(|(w, c)| (w.clone(), c.map_indices(f))).collect())
            }
        }
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |sign: &i8| if *sign < 0 { "-" } else { "" };
        match self {
            Functional::Basis { sign, index } => write!(f, "{}e*[{index}]", s(sign)),
            Functional::Weighted { sign, j, children, restrict } => {
                write!(f, "{}", s(sign))?;
                if let Some(r) = restrict {
                    write!(f, "{r}")?;
                }
                write!(f, "m{j}(")?;
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
            Functional::Convex(parts) => {
                write!(f, "conv(")?;
                for (i, (w, c)) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{w}*{c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl Functional {
    /// Parses the form produced by `Display`, e.g. `[2, 5]m1(e*[1] + -e*[w])`
    /// or `conv(1/2*m1(e*[1]) + 1/2*e*[3])`.
    pub fn parse(text: &str) -> Result<Functional, NormError> {
        let mut p = FnParser { s: text.as_bytes(), text, pos: 0 };
        let f = p.term()?;
        p.ws();
        if p.pos != p.s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(f)
    }
}

struct FnParser<'a> {
    s: &'a [u8],
    text: &'a str,
    pos: usize,
}

impl<'a> FnParser<'a> {
    fn err(&self, msg: &str) -> NormError {
        NormError::Invalid(format!("syntax error at byte {}: {msg}", self.pos))
    }

    fn ws(&mut self) {
        while self.s.get(self.pos).is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, lit: &str) -> bool {
        if self.text[self.pos..].starts_with(lit) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    fn until(&mut self, end: u8) -> Result<&'a str, NormError> {
        let start = self.pos;
        let k = self.s[start..]
            .iter()
            .position(|&c| c == end)
            .ok_or_else(|| self.err(&format!("missing '{}'", end as char)))?;
        self.pos = start + k + 1;
        let text: &'a str = self.text;
        Ok(&text[start..start + k])
    }

    fn ordinal(&self, t: &str, at: usize) -> Result<Ordinal, NormError> {
        Ordinal::parse(t.trim()).map_err(|e| NormError::Invalid(format!("syntax error at byte {at}: {e}")))
    }

    fn term(&mut self) -> Result<Functional, NormError> {
        self.ws();
        let neg = self.eat("-");
        let f = if self.eat("e*[") {
            let at = self.pos;
            let t = self.until(b']')?;
            Functional::Basis { sign: 1, index: self.ordinal(t, at)? }
        } else if self.eat("conv(") {
            let mut parts = Vec::new();
            loop {
                self.ws();
                let at = self.pos;
                let w = self.until(b'*')?;
                let w: Q = w
                    .trim()
                    .parse()
                    .map_err(|_| NormError::Invalid(format!("syntax error at byte {at}: bad rational")))?;
                parts.push((w, self.term()?));
                if self.close()? {
                    break;
                }
            }
            Functional::Convex(parts)
        } else {
            let restrict = if self.eat("[") {
                let at = self.pos;
                let t = self.until(b']')?;
                let (a, b) = t
                    .split_once(',')
                    .ok_or_else(|| NormError::Invalid(format!("syntax error at byte {at}: expected '[a, b]'")))?;
                Some(Restriction::Interval(Interval::new(self.ordinal(a, at)?, self.ordinal(b, at)?)))
            } else if self.eat("{") {
                let at = self.pos;
                let t = self.until(b'}')?;
                let set =
                    FinOrdSet::parse(t).map_err(|e| NormError::Invalid(format!("syntax error at byte {at}: {e}")))?;
                Some(Restriction::Set(set))
            } else {
                None
            };
            if !self.eat("m") {
                return Err(self.err("expected 'e*[', 'm' or 'conv('"));
            }
            let start = self.pos;
            while self.s.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            let j: usize = self.text[start..self.pos].parse().map_err(|_| self.err("expected a weight index"))?;
            if !self.eat("(") {
                return Err(self.err("expected '('"));
            }
            let mut children = Vec::new();
            self.ws();
            if !self.eat(")") {
                loop {
                    children.push(self.term()?);
                    if self.close()? {
                        break;
                    }
                }
            }
            Functional::Weighted { sign: 1, j, children, restrict }
        };
        Ok(if neg { f.negate() } else { f })
    }

    /// After a list item: `true` on `)`, `false` on `+`.
    fn close(&mut self) -> Result<bool, NormError> {
        self.ws();
        if self.eat(")") {
            Ok(true)
        } else if self.eat("+") {
            Ok(false)
        } else {
            Err(self.err("expected '+' or ')'"))
        }
    }
}

pub fn weight_of(phi: &Functional) -> Option<usize> {
    phi.weight_of()
}

pub fn eval_functional(phi: &Functional, x: &Vec00, sched: &ParamSchedule) -> Result<Q, NormError> {
    Ok(act(&phi.to_vec(sched)?, x))
}

#[derive(Clone, Copy, Debug)]
enum Choice {
    Leaf(usize),
    Op { j: usize, cut: usize },
}

/// Segment tables of the norm DP over the absolute values of a vector.
///
/// `norm(a, b)` is the norm of the restriction to support positions
/// `a..b`.  Weights `j` whose capped arity does not exceed that of a smaller
/// weight are dropped: they can never attain the maximum.
pub struct SegmentDp {
    index: Vec<Ordinal>,
    signs: Vec<i8>,
    len: usize,
    kmax: usize,
    norm: Vec<Vec<Q>>,
    choice: Vec<Vec<Option<Choice>>>,
    /// `best[a][b][k]`: best sum of norms over splits of `[a,b)` into at most `k` pieces
    best: Vec<Vec<Vec<Q>>>,
    /// `None`: take `[a,b)` whole; `Some(d)`: piece `[a,d)` then the rest
    best_cut: Vec<Vec<Vec<Option<usize>>>>,
    arity: Vec<(usize, usize)>,
    fam: Family,
    inv_m: Vec<Q>,
    cap: Vec<usize>,
}

impl SegmentDp {
    pub fn new(x: &Vec00, sched: &ParamSchedule, fam: Family) -> SegmentDp {
        let index: Vec<Ordinal> = x.iter().map(|(a, _)| a.clone()).collect();
        let signs: Vec<i8> = x.iter().map(|(_, q)| if q.is_negative() { -1 } else { 1 }).collect();
        Self::run(index, signs, &x.abs_values(), sched, fam)
    }

    fn run(index: Vec<Ordinal>, signs: Vec<i8>, vals: &[Q], sched: &ParamSchedule, fam: Family) -> SegmentDp {
        let len = vals.len();
        let cap: Vec<usize> = (1..=sched.len()).map(|j| fam.arity_capped(sched, j, len.max(1))).collect();
        let mut arity: Vec<(usize, usize)> = Vec::new();
        for j in fam.weights(sched) {
            let a = cap[j - 1];
            if a >= 2 && arity.last().is_none_or(|&(_, prev)| a > prev) {
                arity.push((j, a));
            }
        }
        let kmax = cap.iter().copied().max().unwrap_or(1).max(1);
        let inv_m: Vec<Q> = (1..=sched.len()).map(|j| Q::one() / sched.m_q(j)).collect();
        let mut norm = vec![vec![Q::zero(); len + 1]; len + 1];
        let mut choice = vec![vec![None; len + 1]; len + 1];
        let mut best = vec![vec![Vec::new(); len + 1]; len + 1];
        let mut best_cut = vec![vec![Vec::new(); len + 1]; len + 1];
        for width in 1..=len {
            for a in 0..=len - width {
                let b = a + width;
                // largest entry, first on ties
                let mut top = a;
                for i in a + 1..b {
                    if vals[i] > vals[top] {
                        top = i;
                    }
                }
                let mut v = vals[top].clone();
                let mut ch = Choice::Leaf(top);
                if width >= 2 {
                    for &(j, aj) in &arity {
                        let (hv, c) = Self::split(&norm, &best, a, b, aj);
                        let cand = hv * &inv_m[j - 1];
                        if cand > v {
                            v = cand;
                            ch = Choice::Op { j, cut: c };
                        }
                    }
                }
                norm[a][b] = v;
                choice[a][b] = Some(ch);
                let mut row = vec![Q::zero(); kmax + 1];
                let mut cuts = vec![None; kmax + 1];
                for k in 1..=kmax {
                    let mut bv = norm[a][b].clone();
                    let mut bc = None;
                    if k >= 2 {
                        for d in a + 1..b {
                            let s = &norm[a][d] + &best[d][b][k - 1];
                            if s > bv {
                                bv = s;
                                bc = Some(d);
                            }
                        }
                    }
                    row[k] = bv;
                    cuts[k] = bc;
                }
                best[a][b] = row;
                best_cut[a][b] = cuts;
            }
        }
        SegmentDp { index, signs, len, kmax, norm, choice, best, best_cut, arity, fam, inv_m, cap }
    }

    /// Best sum over splits of `[a,b)` into between 2 and `aj` pieces.
    fn split(norm: &[Vec<Q>], best: &[Vec<Vec<Q>>], a: usize, b: usize, aj: usize) -> (Q, usize) {
        let mut h: Option<(Q, usize)> = None;
        for c in a + 1..b {
            let s = &norm[a][c] + &best[c][b][aj - 1];
            if h.as_ref().is_none_or(|(hv, _)| s > *hv) {
                h = Some((s, c));
            }
        }
        h.unwrap()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn family(&self) -> Family {
        self.fam
    }

    pub fn value(&self) -> Q {
        if self.len == 0 {
            Q::zero()
        } else {
            self.norm[0][self.len].clone()
        }
    }

    /// Norm of the restriction to support positions `a..b`.
    pub fn segment(&self, a: usize, b: usize) -> Q {
        if a >= b {
            Q::zero()
        } else {
            self.norm[a][b].clone()
        }
    }

    /// A norming tree for positions `a..b` with leaf signs matching the vector.
    pub fn witness(&self, a: usize, b: usize) -> Option<Functional> {
        (a < b).then(|| self.tree(a, b).to_functional(&self.index, &self.signs))
    }

    /// Best value on positions `a..b` of a type I functional whose root is a
    /// `(1/m_j, arity * n_j)`-operation over members of the family, with a
    /// witness.  `j` need not belong to the family.
    pub fn weighted_segment(&self, a: usize, b: usize, j: usize) -> Option<(Q, Functional)> {
        if a >= b || j == 0 || j > self.cap.len() {
            return None;
        }
        let aj = self.cap[j - 1].min(self.kmax);
        let mut kids = Vec::new();
        let hv = if aj >= 2 && b - a >= 2 {
            let (hv, c) = Self::split(&self.norm, &self.best, a, b, aj);
            if hv > self.norm[a][b] {
                kids.push(self.tree(a, c));
                self.chain(c, b, aj - 1, &mut kids);
                Some(hv)
            } else {
                None
            }
        } else {
            None
        };
        let hv = match hv {
            Some(v) => v,
            None => {
                kids = vec![self.tree(a, b)];
                self.norm[a][b].clone()
            }
        };
        let f = Functional::weighted(j, kids.iter().map(|k| k.to_functional(&self.index, &self.signs)).collect());
        Some((hv * &self.inv_m[j - 1], f))
    }

    fn tree(&self, a: usize, b: usize) -> PosTree {
        match self.choice[a][b].unwrap() {
            Choice::Leaf(i) => PosTree::Leaf(i),
            Choice::Op { j, cut } => {
                let aj = self.arity.iter().find(|&&(jj, _)| jj == j).unwrap().1;
                let mut kids = vec![self.tree(a, cut)];
                self.chain(cut, b, aj - 1, &mut kids);
                PosTree::Op(j, kids)
            }
        }
    }

    fn chain(&self, a: usize, b: usize, k: usize, out: &mut Vec<PosTree>) {
        let k = k.min(self.kmax);
        match self.best_cut[a][b][k] {
            None => out.push(self.tree(a, b)),
            Some(d) => {
                out.push(self.tree(a, d));
                self.chain(d, b, k - 1, out);
            }
        }
    }
}

#[derive(Clone, Debug)]
enum PosTree {
    Leaf(usize),
    Op(usize, Vec<PosTree>),
}

impl PosTree {
    fn to_functional(&self, index: &[Ordinal], signs: &[i8]) -> Functional {
        match self {
            PosTree::Leaf(i) => Functional::Basis { sign: signs[*i], index: index[*i].clone() },
            PosTree::Op(j, kids) => {
                Functional::weighted(*j, kids.iter().map(|k| k.to_functional(index, signs)).collect())
            }
        }
    }
}

/// Norm of the vector whose ordered absolute values are `vals`.
pub fn family_norm_values(vals: &[Q], sched: &ParamSchedule, fam: Family) -> Q {
    let index = (0..vals.len() as u64).map(Ordinal::nat).collect();
    let signs = vec![1; vals.len()];
    SegmentDp::run(index, signs, vals, sched, fam).value()
}

pub fn family_norm(x: &Vec00, sched: &ParamSchedule, fam: Family) -> Q {
    family_norm_values(&x.abs_values(), sched, fam)
}

/// The norm together with a norming tree attaining it.
pub fn family_norm_witness(x: &Vec00, sched: &ParamSchedule, fam: Family) -> (Q, Option<Functional>) {
    let dp = SegmentDp::new(x, sched, fam);
    (dp.value(), dp.witness(0, dp.len()))
}

pub fn tsirelson_norm(x: &Vec00, sched: &ParamSchedule) -> Q {
    family_norm(x, sched, Family::T)
}

pub fn aux_w_norm(x: &Vec00, sched: &ParamSchedule) -> Q {
    family_norm(x, sched, Family::W)
}

/// Positive norming functional on positions `0..s`, each coordinate being
/// `1/den` (den 0 meaning absent).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct PosItem {
    den: Vec<u128>,
    lo: usize,
    hi: usize,
}

/// Enumerated member of `L'` on a fixed support.
#[derive(Clone, Debug)]
pub struct Enumerated {
    pub tree: Functional,
    pub value: Vec00,
}

fn scale_den(den: &[u128], m: u128) -> Option<Vec<u128>> {
    den.iter().map(|&d| if d == 0 { Some(0) } else { d.checked_mul(m) }).collect()
}

fn combine(items: &[&PosItem], m: u128, s: usize) -> Option<PosItem> {
    let mut den = vec![0u128; s];
    for it in items {
        for (slot, &d) in den[it.lo..=it.hi].iter_mut().zip(&it.den[it.lo..=it.hi]) {
            if d != 0 {
                *slot = d;
            }
        }
    }
    Some(PosItem { den: scale_den(&den, m)?, lo: items[0].lo, hi: items.last().unwrap().hi })
}

/// Positive members of `L'` (no convex combinations) of tree depth at most
/// `depth` on positions `0..s`, each with one construction tree; duplicates
/// are removed by value, root weight and the set of node weights.
fn enumerate_positive(s: usize, sched: &ParamSchedule, depth: usize, fam: Family) -> Vec<(PosItem, PosTree)> {
    let weights: Vec<(usize, usize, u128)> = fam
        .weights(sched)
        .into_iter()
        .filter_map(|j| Some((j, fam.arity_capped(sched, j, s.max(1)), sched.m(j).to_u128()?)))
        .collect();
    type Key = (Vec<u128>, Option<usize>, BTreeSet<usize>);
    let mut seen: HashSet<Key> = HashSet::new();
    let mut all: Vec<(PosItem, PosTree, BTreeSet<usize>)> = Vec::new();
    for i in 0..s {
        let mut den = vec![0; s];
        den[i] = 1;
        let it = PosItem { den, lo: i, hi: i };
        seen.insert((it.den.clone(), None, BTreeSet::new()));
        all.push((it, PosTree::Leaf(i), BTreeSet::new()));
    }
    for _ in 0..depth {
        let prev = all.clone();
        let mut by_lo: Vec<Vec<usize>> = vec![Vec::new(); s];
        for (k, (it, _, _)) in prev.iter().enumerate() {
            by_lo[it.lo].push(k);
        }
        let mut fresh = Vec::new();
        for &(j, aj, m) in &weights {
            // every successive sequence of 1..=aj members of prev
            let mut stack: Vec<usize> = Vec::new();
            fn rec(
                start: usize,
                stack: &mut Vec<usize>,
                aj: usize,
                prev: &[(PosItem, PosTree, BTreeSet<usize>)],
                by_lo: &[Vec<usize>],
                s: usize,
                emit: &mut dyn FnMut(&[usize]),
            ) {
                for lo in start..s {
                    for &k in &by_lo[lo] {
                        stack.push(k);
                        emit(stack);
                        if stack.len() < aj {
                            rec(prev[k].0.hi + 1, stack, aj, prev, by_lo, s, emit);
                        }
                        stack.pop();
                    }
                }
            }
            let mut emit = |seq: &[usize]| {
                let items: Vec<&PosItem> = seq.iter().map(|&k| &prev[k].0).collect();
                let Some(it) = combine(&items, m, s) else {
                    return;
                };
                let mut ws: BTreeSet<usize> = BTreeSet::new();
                ws.insert(j);
                for &k in seq {
                    ws.extend(prev[k].2.iter().copied());
                }
                let key = (it.den.clone(), Some(j), ws.clone());
                if seen.insert(key) {
                    let tree = PosTree::Op(j, seq.iter().map(|&k| prev[k].1.clone()).collect());
                    fresh.push((it, tree, ws));
                }
            };
            rec(0, &mut stack, aj, &prev, &by_lo, s, &mut emit);
        }
        if fresh.is_empty() {
            break;
        }
        all.extend(fresh);
    }
    all.into_iter().map(|(it, t, _)| (it, t)).collect()
}

fn sign_variants(leaves: &[usize]) -> Vec<Vec<i8>> {
    let mut out = vec![Vec::new()];
    for _ in leaves {
        let mut next = Vec::with_capacity(out.len() * 2);
        for v in &out {
            for s in [1i8, -1] {
                let mut w: Vec<i8> = v.clone();
                w.push(s);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

fn tree_leaves(t: &PosTree, out: &mut Vec<usize>) {
    match t {
        PosTree::Leaf(i) => out.push(*i),
        PosTree::Op(_, kids) => kids.iter().for_each(|k| tree_leaves(k, out)),
    }
}

/// All members of `L'` with support in `support` and tree depth at most
/// `depth`, every leaf sign pattern included.  Intended for small supports.
pub fn norming_enumerate(support: &FinOrdSet, sched: &ParamSchedule, depth: usize, fam: Family) -> Vec<Enumerated> {
    let idx = support.elements();
    let mut out = Vec::new();
    for (_, tree) in enumerate_positive(idx.len(), sched, depth, fam) {
        let mut leaves = Vec::new();
        tree_leaves(&tree, &mut leaves);
        for pattern in sign_variants(&leaves) {
            let mut signs = vec![1i8; idx.len()];
            for (&l, &s) in leaves.iter().zip(&pattern) {
                signs[l] = s;
            }
            let f = tree.to_functional(idx, &signs);
            let value = f.to_vec(sched).expect("enumerated trees are valid");
            out.push(Enumerated { tree: f, value });
        }
    }
    out
}

/// The positive members only (one per value, root weight and node weights).
pub fn norming_enumerate_positive(
    support: &FinOrdSet,
    sched: &ParamSchedule,
    depth: usize,
    fam: Family,
) -> Vec<Enumerated> {
    let idx = support.elements();
    let signs = vec![1i8; idx.len()];
    enumerate_positive(idx.len(), sched, depth, fam)
        .into_iter()
        .map(|(_, t)| {
            let f = t.to_functional(idx, &signs);
            let value = f.to_vec(sched).expect("enumerated trees are valid");
            Enumerated { tree: f, value }
        })
        .collect()
}

/// Brute-force norm oracle on `s` points: the positive members of `L'` with
/// depth at most `depth`, kept as integer weight vectors over a common
/// denominator.
pub struct EnumOracle {
    s: usize,
    den: u128,
    rows: Vec<Vec<u128>>,
}

impl EnumOracle {
    /// `None` if the denominators overflow.
    pub fn new(s: usize, sched: &ParamSchedule, depth: usize, fam: Family) -> Option<EnumOracle> {
        let items = enumerate_positive(s, sched, depth, fam);
        let mut seen = HashSet::new();
        let mut dens = Vec::new();
        for (it, _) in items {
            if seen.insert(it.den.clone()) {
                dens.push(it.den);
            }
        }
        let mut den: u128 = 1;
        for d in dens.iter().flatten().filter(|&&d| d != 0) {
            den = num::integer::lcm(den, *d);
        }
        let rows = dens.into_iter().map(|d| d.into_iter().map(|x| den.checked_div(x).unwrap_or(0)).collect()).collect();
        Some(EnumOracle { s, den, rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `max <phi, |x|>` over the enumerated set, which is the max of
    /// `<phi, x>` over all sign patterns since signs sit on disjoint leaves.
    pub fn max_value(&self, vals: &[Q]) -> Q {
        assert_eq!(vals.len(), self.s);
        if vals.is_empty() {
            return Q::zero();
        }
        let mut l = BigInt::one();
        for v in vals {
            l = num::integer::lcm(l, v.denom().clone());
        }
        let ints: Vec<BigInt> =
            vals.iter().map(|v| (v.abs() * BigRational::from_integer(l.clone())).to_integer()).collect();
        let small: Option<Vec<i128>> = ints.iter().map(|v| v.to_i128()).collect();
        let best = match small {
            Some(xs) => {
                let mut b: i128 = 0;
                for r in &self.rows {
                    let mut s: i128 = 0;
                    for (w, x) in r.iter().zip(&xs) {
                        s += (*w as i128) * x;
                    }
                    b = b.max(s);
                }
                BigInt::from(b)
            }
            None => self
                .rows
                .iter()
                .map(|r| r.iter().zip(&ints).map(|(w, x)| BigInt::from(*w) * x).sum::<BigInt>())
                .max()
                .unwrap_or_default(),
        };
        BigRational::new(best, l * BigInt::from(self.den))
    }
}

/// One system of successive intervals on the points of a James-like norm.
#[derive(Clone, Debug, Serialize)]
pub struct JamesWitness {
    /// groups of consecutive support positions
    pub blocks: Vec<Vec<usize>>,
    #[serde(serialize_with = "ser_qs")]
    pub sums: Vec<Q>,
}

/// `J(x) = sup || sum_k (sum_{i in I_k} x(i)) t_k ||` over successive
/// intervals `I_1 < ... < I_n`, with the base norm given on ordered absolute
/// values.  Blocks are runs of consecutive support points; points may be
/// skipped.
pub fn james_norm_with(x: &Vec00, base: &dyn Fn(&[Q]) -> Q) -> (Q, Option<JamesWitness>) {
    let vals: Vec<Q> = x.values().cloned().collect();
    let l = vals.len();
    if l == 0 {
        return (Q::zero(), None);
    }
    let mut cache: HashMap<Vec<Q>, Q> = HashMap::new();
    let mut best = Q::zero();
    let mut best_w: Option<JamesWitness> = None;
    // label 0 = skip, 1 = continue the open block, 2 = open a new block
    let mut labels = vec![0u8; l];
    loop {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut ok = true;
        for i in 0..l {
            match labels[i] {
                0 => {}
                1 => {
                    if i == 0 || labels[i - 1] == 0 {
                        ok = false;
                        break;
                    }
                    blocks.last_mut().unwrap().push(i);
                }
                _ => blocks.push(vec![i]),
            }
        }
        if ok && !blocks.is_empty() {
            let sums: Vec<Q> = blocks.iter().map(|b| b.iter().fold(Q::zero(), |s, &i| s + &vals[i])).collect();
            let key: Vec<Q> = sums.iter().filter(|s| !s.is_zero()).map(|s| s.abs()).collect();
            let v = cache.entry(key.clone()).or_insert_with(|| base(&key)).clone();
            if v > best {
                best = v;
                best_w = Some(JamesWitness { blocks, sums });
            }
        }
        // next labeling
        let mut i = 0;
        while i < l && labels[i] == 2 {
            labels[i] = 0;
            i += 1;
        }
        if i == l {
            break;
        }
        labels[i] += 1;
    }
    (best, best_w)
}

/// James-like norm over the mixed Tsirelson norm of `fam`.
pub fn james_norm(x: &Vec00, sched: &ParamSchedule, fam: Family) -> Q {
    james_norm_with(x, &|v: &[Q]| family_norm_values(v, sched, fam)).0
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    pub name: String,
    #[serde(serialize_with = "ser_q")]
    pub bound: Q,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BasisEstimateReport {
    #[serde(serialize_with = "ser_q")]
    pub value: Q,
    pub weight: Option<usize>,
    pub checks: Vec<BoundCheck>,
    /// Only schedules generated by the growth recursion are held to the bounds.
    pub asserted: bool,
}

impl BasisEstimateReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Checks `|phi((1/l) sum_{a in F} e_a)|` against `2/(w m_j)` (for `w < m_j`),
/// `1/w` (for `w >= m_j`) and `2/m_j^3` (when no node has weight `m_j`).
pub fn basis_estimate_check(
    sched: &ParamSchedule,
    j: usize,
    set: &FinOrdSet,
    phi: &Functional,
) -> Result<BasisEstimateReport, NormError> {
    if j == 0 || j > sched.len() {
        return Err(NormError::WeightIndex(j));
    }
    let l = set.len();
    let lq = Q::from_integer(BigInt::from(l));
    if l == 0 || lq < sched.n_q(j) / sched.m_q(j) || lq > sched.n_q(j) {
        return Err(NormError::Precondition(format!("l = {l} is outside [n_j/m_j, n_j]")));
    }
    let Some(wj) = phi.weight_of() else {
        return Err(NormError::Precondition("functional is not of type I".into()));
    };
    let avg = Vec00::from_pairs(set.iter().map(|a| (a.clone(), Q::one() / &lq)));
    let value = eval_functional(phi, &avg, sched)?.abs();
    let w = sched.m_q(wj);
    let mj = sched.m_q(j);
    let mut checks = Vec::new();
    if w < mj {
        let b = Q::from_integer(BigInt::from(2)) / (&w * &mj);
        checks.push(BoundCheck { name: "2/(w*m_j)".into(), pass: value <= b, bound: b });
    } else {
        let b = Q::one() / &w;
        checks.push(BoundCheck { name: "1/w".into(), pass: value <= b, bound: b });
    }
    if !phi.tree_weights().contains(&j) {
        let b = Q::from_integer(BigInt::from(2)) / (&mj * &mj * &mj);
        checks.push(BoundCheck { name: "2/m_j^3".into(), pass: value <= b, bound: b });
    }
    Ok(BasisEstimateReport { value, weight: Some(wj), checks, asserted: sched.paper_exact() })
}
