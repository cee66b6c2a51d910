//! Evaluable rho-functions on ordinals below a bound, the closure operator
//! `cl(F, p)`, finite rho-models and the universality book-keeping.
//!
//! Values on a successor `lambda + k` that no universality step touches are
//! filled in by `rho(a, lambda+k) = max{k, rho(a, lambda+k-1)}`, which is the
//! extension step with an empty `M0` and a one-point model.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use num::{BigInt, BigRational};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ordinals::{FinOrdSet, Ordinal};

pub type BaseFn = Rc<dyn Fn(u64, u64) -> u64>;

pub const DEFAULT_HORIZON: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhoMode {
    Ladder,
    Smooth,
    Universal,
}

impl fmt::Display for RhoMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RhoMode::Ladder => "ladder",
            RhoMode::Smooth => "smooth",
            RhoMode::Universal => "universal",
        })
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RhoError {
    #[error("{ord} is not below the bound {bound}")]
    OutOfBound { ord: Ordinal, bound: Ordinal },
    #[error("empty set")]
    Empty,
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("target starting at {start} has room for {room} new points, model needs {need}")]
    Capacity { start: Ordinal, room: u64, need: u64 },
}

/// A finite rho-model on `{1..size}`, stored as a symmetric matrix with zero
/// diagonal (row/column `i` is the `(i+1)`-th point).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RhoModel {
    matrix: Vec<Vec<u64>>,
    p: u64,
}

impl RhoModel {
    /// Validates symmetry, zero diagonal and axioms 1-2; `p` is the largest entry.
    pub fn new(matrix: Vec<Vec<u64>>) -> Result<Self, RhoError> {
        let n = matrix.len();
        if n == 0 {
            return Err(RhoError::InvalidModel("empty model".into()));
        }
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(RhoError::InvalidModel(format!("row {} has length {}", i + 1, row.len())));
            }
            if row[i] != 0 {
                return Err(RhoError::InvalidModel(format!("nonzero diagonal at {}", i + 1)));
            }
            for j in 0..n {
                if row[j] != matrix[j][i] {
                    return Err(RhoError::InvalidModel(format!("asymmetric at ({}, {})", i + 1, j + 1)));
                }
            }
        }
        let p = matrix.iter().flatten().copied().max().unwrap_or(0);
        let m = RhoModel { matrix, p };
        let bad = verify_rho_axioms(&m, &m.points());
        if let Some(v) = bad.violations.first() {
            return Err(RhoError::InvalidModel(format!("axiom {} fails at {}", v.axiom, v.display_triple())));
        }
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.matrix.len()
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn matrix(&self) -> &[Vec<u64>] {
        &self.matrix
    }

    /// Entry for 0-based points `i`, `j`.
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.matrix[i][j]
    }

    /// The first `k` points with their induced matrix and top value.
    pub fn initial_segment(&self, k: usize) -> RhoModel {
        let matrix: Vec<Vec<u64>> = self.matrix[..k].iter().map(|r| r[..k].to_vec()).collect();
        let p = matrix.iter().flatten().copied().max().unwrap_or(0);
        RhoModel { matrix, p }
    }

    fn points(&self) -> FinOrdSet {
        (0..self.size() as u64).map(Ordinal::nat).collect()
    }

    /// All models with at most `max_size` points and entries at most `max_p`.
    /// Distinct models are pairwise non-isomorphic since the order
    /// isomorphism between equal-size models is unique.
    pub fn enumerate(max_size: usize, max_p: u64) -> Vec<RhoModel> {
        let mut out = Vec::new();
        for size in 1..=max_size {
            let pairs: Vec<(usize, usize)> = (0..size).flat_map(|i| (i + 1..size).map(move |j| (i, j))).collect();
            let mut vals = vec![0u64; pairs.len()];
            loop {
                let mut m = vec![vec![0u64; size]; size];
                for (&(i, j), &v) in pairs.iter().zip(&vals) {
                    m[i][j] = v;
                    m[j][i] = v;
                }
                if let Ok(model) = RhoModel::new(m) {
                    out.push(model);
                }
                // odometer
                let mut idx = 0;
                loop {
                    if idx == vals.len() {
                        break;
                    }
                    if vals[idx] < max_p {
                        vals[idx] += 1;
                        break;
                    }
                    vals[idx] = 0;
                    idx += 1;
                }
                if idx == vals.len() {
                    break;
                }
            }
        }
        out
    }
}

impl<'de> Deserialize<'de> for RhoModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let m = Vec::<Vec<u64>>::deserialize(d)?;
        RhoModel::new(m).map_err(serde::de::Error::custom)
    }
}

pub fn models_isomorphic(a: &RhoModel, b: &RhoModel) -> bool {
    a.size() == b.size() && a.p == b.p && a.matrix == b.matrix
}

/// Anything that can be asked for rho-values on pairs.
pub trait RhoOracle {
    fn value(&self, a: &Ordinal, b: &Ordinal) -> u64;

    /// `{a < b : rho(a, b) <= n}` when the oracle can compute it directly.
    fn level_set(&self, _b: &Ordinal, _n: u64) -> Option<FinOrdSet> {
        None
    }
}

/// Models answer for the ordinals `0..size` standing for their points.
impl RhoOracle for RhoModel {
    fn value(&self, a: &Ordinal, b: &Ordinal) -> u64 {
        let i = a.as_nat().expect("model point") as usize;
        let j = b.as_nat().expect("model point") as usize;
        self.matrix[i][j]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomViolation {
    pub axiom: u8,
    pub triple: [Ordinal; 3],
    pub values: [u64; 3],
}

impl AxiomViolation {
    pub fn display_triple(&self) -> String {
        format!("({}, {}, {})", self.triple[0], self.triple[1], self.triple[2])
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelSet {
    pub beta: Ordinal,
    pub n: u64,
    pub set: FinOrdSet,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub triples: u64,
    pub violations: Vec<AxiomViolation>,
    pub level_sets: Vec<LevelSet>,
    /// Level sets whose trace on `F` disagrees with the oracle's own `level_set`.
    pub level_mismatches: Vec<LevelSet>,
}

/// Levels above this are not compared against the oracle's own level sets,
/// which grow too fast to materialize.
pub const LEVEL_CHECK_CAP: u64 = 6;

/// Checks axioms 1 and 2 on every triple of `set` and reports the traces of
/// the axiom-3 level sets on `set` up to [`LEVEL_CHECK_CAP`].
pub fn verify_rho_axioms<R: RhoOracle + ?Sized>(rho: &R, set: &FinOrdSet) -> AxiomReport {
    let e = set.elements();
    let n = e.len();
    let mut val = vec![vec![0u64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rho.value(&e[i], &e[j]);
            val[i][j] = v;
            val[j][i] = v;
        }
    }
    let mut violations = Vec::new();
    let mut triples = 0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                triples += 1;
                let (ab, ag, bg) = (val[i][j], val[i][k], val[j][k]);
                let t = [e[i].clone(), e[j].clone(), e[k].clone()];
                if ag > ab.max(bg) {
                    violations.push(AxiomViolation { axiom: 1, triple: t.clone(), values: [ab, ag, bg] });
                }
                if ab > ag.max(bg) {
                    violations.push(AxiomViolation { axiom: 2, triple: t, values: [ab, ag, bg] });
                }
            }
        }
    }
    let p = val.iter().flatten().copied().max().unwrap_or(0).min(LEVEL_CHECK_CAP);
    let mut level_sets = Vec::new();
    let mut level_mismatches = Vec::new();
    for j in 0..n {
        for lvl in 0..=p {
            let s: FinOrdSet = (0..j).filter(|&i| val[i][j] <= lvl).map(|i| e[i].clone()).collect();
            if let Some(full) = rho.level_set(&e[j], lvl) {
                if full.intersection(set) != s {
                    level_mismatches.push(LevelSet { beta: e[j].clone(), n: lvl, set: s.clone() });
                }
            }
            level_sets.push(LevelSet { beta: e[j].clone(), n: lvl, set: s });
        }
    }
    AxiomReport { triples, violations, level_sets, level_mismatches }
}

/// One universality step: the model is copied onto `M0 cup [delta, delta+l)`.
#[derive(Clone, Debug, Serialize)]
pub struct Extension {
    pub delta: Ordinal,
    pub l: u64,
    pub m0: FinOrdSet,
    pub m1: FinOrdSet,
    pub model: RhoModel,
    #[serde(skip)]
    block: Ordinal,
    #[serde(skip)]
    end: Ordinal,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub delta: Ordinal,
    pub m1: FinOrdSet,
    pub p: u64,
    pub isomorphic: bool,
    pub closed: bool,
}

impl Certificate {
    pub fn passes(&self) -> bool {
        self.isomorphic && self.closed
    }
}

/// Where a queued model should be realized: `[start, start+len)`, or the rest
/// of the block of `start` when `len` is `None`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Target {
    pub start: Ordinal,
    pub len: Option<u64>,
}

/// Chosen `g(i) = n_i` for one limit of limits in the smooth construction.
#[derive(Clone, Debug, Default)]
struct SmoothLadder {
    n: Vec<u64>,
    certified: Vec<bool>,
    /// cumulative `sum_{k<=i} #F_n^{lambda_k}` for `n in 0..=horizon`
    cum: Vec<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothChoice {
    pub lambda: Ordinal,
    pub n: Vec<u64>,
    pub certified_up_to: u64,
    pub certified: Vec<bool>,
}

pub struct RhoFn {
    mode: RhoMode,
    bound: Ordinal,
    base: Option<BaseFn>,
    horizon: u64,
    extensions: Vec<Extension>,
    memo: RefCell<HashMap<(Ordinal, Ordinal), u64>>,
    fmemo: RefCell<HashMap<(Ordinal, u64), Rc<FinOrdSet>>>,
    smooth: RefCell<HashMap<Ordinal, SmoothLadder>>,
}

impl fmt::Debug for RhoFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RhoFn")
            .field("mode", &self.mode)
            .field("bound", &self.bound)
            .field("custom_base", &self.base.is_some())
            .field("extensions", &self.extensions.len())
            .finish()
    }
}

fn pow2_sat(i: u64) -> u64 {
    if i >= 64 {
        u64::MAX
    } else {
        1u64 << i
    }
}

impl RhoFn {
    fn with_mode(mode: RhoMode, bound: Ordinal) -> Self {
        RhoFn {
            mode,
            bound,
            base: None,
            horizon: DEFAULT_HORIZON,
            extensions: Vec::new(),
            memo: RefCell::default(),
            fmemo: RefCell::default(),
            smooth: RefCell::default(),
        }
    }

    /// Ladder recursion with `rho(m, n) = n` on the finite ordinals.
    pub fn ladder(bound: Ordinal) -> Self {
        Self::with_mode(RhoMode::Ladder, bound)
    }

    /// Ladder recursion with a caller-supplied function on `[w]^2`, called
    /// as `base(m, n)` with `m < n`.
    pub fn ladder_with_base(bound: Ordinal, base: BaseFn) -> Self {
        let mut r = Self::ladder(bound);
        r.base = Some(base);
        r
    }

    /// The smooth recursion; see [`build_smooth_rho`].
    pub fn smooth(bound: Ordinal) -> Self {
        Self::with_mode(RhoMode::Smooth, bound)
    }

    pub fn smooth_with_horizon(bound: Ordinal, horizon: u64) -> Self {
        let mut r = Self::smooth(bound);
        r.horizon = horizon;
        r
    }

    /// A ladder rho ready to receive universality steps.
    pub fn universal(bound: Ordinal) -> Self {
        Self::with_mode(RhoMode::Universal, bound)
    }

    pub fn mode(&self) -> RhoMode {
        self.mode
    }

    pub fn bound(&self) -> &Ordinal {
        &self.bound
    }

    pub fn extensions(&self) -> &[Extension] {
        &self.extensions
    }

    fn check(&self, a: &Ordinal) -> Result<(), RhoError> {
        if *a < self.bound {
            Ok(())
        } else {
            Err(RhoError::OutOfBound { ord: a.clone(), bound: self.bound.clone() })
        }
    }

    /// `rho(a, b)`; the arguments may come in either order.
    pub fn rho(&self, a: &Ordinal, b: &Ordinal) -> Result<u64, RhoError> {
        self.check(a)?;
        self.check(b)?;
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        Ok(self.raw0(lo, hi))
    }

    fn raw0(&self, a: &Ordinal, b: &Ordinal) -> u64 {
        if a == b {
            0
        } else {
            self.raw(a, b)
        }
    }

    /// Value for `a < b`, no bound check.
    fn raw(&self, a: &Ordinal, b: &Ordinal) -> u64 {
        debug_assert!(a < b);
        if let Some(&v) = self.memo.borrow().get(&(a.clone(), b.clone())) {
            return v;
        }
        let v = self.compute(a, b);
        self.memo.borrow_mut().insert((a.clone(), b.clone()), v);
        v
    }

    fn compute(&self, a: &Ordinal, b: &Ordinal) -> u64 {
        if let Some(n) = b.as_nat() {
            let m = a.as_nat().expect("a < b finite");
            return match &self.base {
                Some(f) => f(m, n),
                None => n,
            };
        }
        if b.is_limit() {
            return self.limit_value(a, b);
        }
        if let Some(ext) = self.extension_at(b) {
            return self.extension_value(ext, a, b);
        }
        let (k, h) = self.filler_anchor(b);
        if *a <= h {
            k.max(self.raw0(a, &h))
        } else {
            k
        }
    }

    fn limit_value(&self, a: &Ordinal, lam: &Ordinal) -> u64 {
        let i = lam.ladder_count(a);
        let ci = lam.ladder_point(i);
        let mut v = self.g(lam, i).max(self.raw0(a, &ci));
        for j in 0..i {
            v = v.max(self.raw(&lam.ladder_point(j), a));
        }
        v
    }

    /// For an untouched successor `b = lambda + k`, returns `k` and the point
    /// `h < b` that the filler recursion unrolls to.
    fn filler_anchor(&self, b: &Ordinal) -> (u64, Ordinal) {
        let (lam, k) = b.split_finite();
        let i = self.extensions.partition_point(|e| e.delta <= *b);
        if i > 0 {
            let e = &self.extensions[i - 1];
            if e.block == lam {
                debug_assert!(e.end <= *b);
                return (k, e.end.pred().unwrap());
            }
        }
        (k, lam)
    }

    fn extension_at(&self, b: &Ordinal) -> Option<&Extension> {
        let i = self.extensions.partition_point(|e| e.delta <= *b);
        let e = self.extensions.get(i.checked_sub(1)?)?;
        (*b < e.end).then_some(e)
    }

    fn extension_value(&self, ext: &Extension, a: &Ordinal, b: &Ordinal) -> u64 {
        if let (Some(i), Some(j)) = (ext.m1.position(a), ext.m1.position(b)) {
            return ext.model.get(i - 1, j - 1);
        }
        debug_assert!(*a < ext.delta);
        match ext.m0.max() {
            Some(top) if a < top => {
                let xi = ext.m0.min_at_least(a).unwrap();
                let mut v = self.raw(a, xi);
                for x in ext.m0.below(a).iter() {
                    v = v.max(self.raw(x, a));
                }
                v
            }
            _ => {
                let dm = ext.delta.pred().unwrap();
                let mut v = (ext.model.p() + 1).max(self.raw0(a, &dm));
                for x in ext.m0.iter() {
                    v = v.max(self.raw(x, a));
                }
                v
            }
        }
    }

    fn g(&self, lam: &Ordinal, i: u64) -> u64 {
        match self.mode {
            RhoMode::Ladder | RhoMode::Universal => i,
            RhoMode::Smooth => {
                if lam.is_successor_limit() {
                    pow2_sat(i)
                } else {
                    self.smooth_n(lam, i)
                }
            }
        }
    }

    /// `n_i` for a limit of limits: least `m > n_{i-1}` such that
    /// `sum_{k<=i} #F_n^{lambda_k} * 2^i <= n` for every `n` in `[m, horizon]`.
    fn smooth_n(&self, lam: &Ordinal, i: u64) -> u64 {
        loop {
            let (have, prev) = {
                let s = self.smooth.borrow();
                match s.get(lam) {
                    Some(sl) if sl.n.len() as u64 > i => return sl.n[i as usize],
                    Some(sl) => (sl.n.len() as u64, sl.n.last().copied().unwrap_or(0)),
                    None => (0, 0),
                }
            };
            let t = have;
            let h = self.horizon;
            let lt = lam.ladder_point(t);
            let counts: Vec<u64> = (0..=h).map(|n| self.f_set(&lt, n).len() as u64).collect();
            let mut s = self.smooth.borrow_mut();
            let sl = s.entry(lam.clone()).or_default();
            if sl.cum.is_empty() {
                sl.cum = vec![0; h as usize + 1];
            }
            for (c, k) in sl.cum.iter_mut().zip(&counts) {
                *c += k;
            }
            let scale = pow2_sat(t) as u128;
            let mut m = h + 1;
            while m > 1 && (sl.cum[(m - 1) as usize] as u128) * scale <= (m - 1) as u128 {
                m -= 1;
            }
            let m = m.max(prev + 1);
            sl.certified.push(m <= h);
            sl.n.push(m);
        }
    }

    /// The `n_i` chosen so far for every limit of limits that was visited.
    pub fn smooth_choices(&self) -> Vec<SmoothChoice> {
        let s = self.smooth.borrow();
        let mut out: Vec<SmoothChoice> = s
            .iter()
            .map(|(l, sl)| SmoothChoice {
                lambda: l.clone(),
                n: sl.n.clone(),
                certified_up_to: self.horizon,
                certified: sl.certified.clone(),
            })
            .collect();
        out.sort_by(|a, b| a.lambda.cmp(&b.lambda));
        out
    }

    /// `F_n^b = {a < b : rho(a, b) <= n}`.
    pub fn f_n_set(&self, b: &Ordinal, n: u64) -> Result<FinOrdSet, RhoError> {
        self.check(b)?;
        Ok((*self.f_set(b, n)).clone())
    }

    fn f_set(&self, b: &Ordinal, n: u64) -> Rc<FinOrdSet> {
        let key = (b.clone(), n);
        if let Some(s) = self.fmemo.borrow().get(&key) {
            return s.clone();
        }
        let s = Rc::new(self.compute_f(b, n));
        self.fmemo.borrow_mut().insert(key, s.clone());
        s
    }

    fn compute_f(&self, b: &Ordinal, n: u64) -> FinOrdSet {
        if b.is_zero() {
            return FinOrdSet::new();
        }
        if let Some(bn) = b.as_nat() {
            return match &self.base {
                None if bn <= n => (0..bn).map(Ordinal::nat).collect(),
                None => FinOrdSet::new(),
                Some(f) => (0..bn).filter(|&m| f(m, bn) <= n).map(Ordinal::nat).collect(),
            };
        }
        let mut cand = FinOrdSet::new();
        if b.is_limit() {
            let mut i = 0;
            let mut prev: Option<Ordinal> = None;
            while self.g(b, i) <= n {
                let ci = b.ladder_point(i);
                let lower = |a: &Ordinal| prev.as_ref().is_none_or(|p| a > p);
                for a in self.f_set(&ci, n).iter().chain(std::iter::once(&ci)) {
                    if lower(a) {
                        cand.insert(a.clone());
                    }
                }
                prev = Some(ci);
                i += 1;
            }
        } else if let Some(ext) = self.extension_at(b) {
            for a in ext.m1.below(b).iter() {
                cand.insert(a.clone());
            }
            let dm = ext.delta.pred().unwrap();
            cand = cand.union(&self.f_set(&dm, n));
            cand.insert(dm);
            for x in ext.m0.iter() {
                cand = cand.union(&self.f_set(x, n));
            }
        } else {
            let (k, h) = self.filler_anchor(b);
            if k > n {
                return FinOrdSet::new();
            }
            let mut out = (*self.f_set(&h, n)).clone();
            let mut a = h;
            while a < *b {
                out.insert(a.clone());
                a = a.succ();
            }
            return out;
        }
        cand.iter().filter(|a| *a < b && self.raw(a, b) <= n).cloned().collect()
    }

    /// `cl(F, p)`: every `a <= max F` with `rho(a, b) <= p` for some `b in F`, `a <= b`.
    pub fn closure(&self, set: &FinOrdSet, p: u64) -> Result<FinOrdSet, RhoError> {
        let mut out = FinOrdSet::new();
        for b in set.iter() {
            self.check(b)?;
            out = out.union(&self.f_set(b, p));
            out.insert(b.clone());
        }
        Ok(out)
    }

    pub fn is_p_closed(&self, set: &FinOrdSet, p: u64) -> Result<bool, RhoError> {
        Ok(self.closure(set, p)? == *set)
    }

    pub fn p_of(&self, set: &FinOrdSet) -> Result<u64, RhoError> {
        if set.is_empty() {
            return Err(RhoError::Empty);
        }
        let e = set.elements();
        let mut p = 0;
        for i in 0..e.len() {
            for j in i + 1..e.len() {
                p = p.max(self.rho(&e[i], &e[j])?);
            }
        }
        Ok(p)
    }

    pub fn model_of(&self, set: &FinOrdSet) -> Result<RhoModel, RhoError> {
        if set.is_empty() {
            return Err(RhoError::Empty);
        }
        let e = set.elements();
        let n = e.len();
        let mut m = vec![vec![0u64; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v = self.rho(&e[i], &e[j])?;
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        let p = m.iter().flatten().copied().max().unwrap_or(0);
        Ok(RhoModel { matrix: m, p })
    }

    /// `max{rho(a, b), #{x <= a : rho(x, a) <= rho(a, b)}}`.
    pub fn rho_bar(&self, a: &Ordinal, b: &Ordinal) -> Result<u64, RhoError> {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let r = self.rho(lo, hi)?;
        let below = self.f_set(lo, r).len() as u64 + 1;
        Ok(r.max(below))
    }

    /// Copies `model` onto `M0 cup [delta, delta+l)` and defines the values
    /// between the new points and the rest of `delta` by the two case formulas.
    ///
    /// `M0` must be `p_M`-closed, not merely closed for its own `p`: the
    /// closedness of the realized set depends on it.
    pub fn universal_extend(
        &mut self,
        delta: &Ordinal,
        model: &RhoModel,
        m0: &FinOrdSet,
    ) -> Result<Certificate, RhoError> {
        let (block, k) = delta.split_finite();
        if k == 0 || block.is_finite() {
            return Err(RhoError::Precondition(format!(
                "delta = {delta} must be lambda+k with lambda >= w a limit and k >= 1"
            )));
        }
        if m0.len() > model.size() {
            return Err(RhoError::Precondition("M0 is larger than the model".into()));
        }
        if let Some(top) = m0.max() {
            if top >= delta {
                return Err(RhoError::Precondition(format!("max M0 = {top} is not below delta = {delta}")));
            }
        }
        if let Some(last) = self.extensions.last() {
            if *delta < last.end {
                return Err(RhoError::Precondition(format!("delta = {delta} is behind the cursor {}", last.end)));
            }
        }
        let l = (model.size() - m0.len()) as u64;
        let end = delta.add_nat(l);
        if l > 0 {
            self.check(&end.pred().unwrap())?;
        }
        if !m0.is_empty() {
            let seg = model.initial_segment(m0.len());
            let got = self.model_of(m0)?;
            if got.matrix != seg.matrix {
                return Err(RhoError::Precondition(format!(
                    "model of M0 = {{{m0}}} is not the initial segment of size {} of the model",
                    m0.len()
                )));
            }
            if !self.is_p_closed(m0, model.p())? {
                return Err(RhoError::Precondition(format!("M0 = {{{m0}}} is not {}-closed", model.p())));
            }
        }
        let mut m1 = m0.clone();
        let mut x = delta.clone();
        for _ in 0..l {
            m1.insert(x.clone());
            x = x.succ();
        }
        if l > 0 {
            self.memo.borrow_mut().retain(|(_, b), _| b < delta);
            self.fmemo.borrow_mut().retain(|(b, _), _| b < delta);
            self.extensions.push(Extension {
                delta: delta.clone(),
                l,
                m0: m0.clone(),
                m1: m1.clone(),
                model: model.clone(),
                block,
                end,
            });
        }
        let got = self.model_of(&m1)?;
        Ok(Certificate {
            delta: delta.clone(),
            p: model.p(),
            isomorphic: models_isomorphic(&got, model),
            closed: self.is_p_closed(&m1, model.p())?,
            m1,
        })
    }

    /// Rows `(#F_n^lambda)` for `n = 1..=max_n` and the largest ratio.
    pub fn smoothness_report(&self, lam: &Ordinal, max_n: u64) -> Result<SmoothnessReport, RhoError> {
        self.check(lam)?;
        let mut rows = Vec::new();
        let mut best = BigRational::from_integer(BigInt::from(0));
        for n in 1..=max_n {
            let c = self.f_set(lam, n).len() as u64;
            let r = BigRational::new(BigInt::from(c), BigInt::from(n));
            if r > best {
                best = r;
            }
            rows.push((n, c));
        }
        Ok(SmoothnessReport { lambda: lam.clone(), rows, max_ratio: best })
    }
}

#[derive(Clone, Debug)]
pub struct SmoothnessReport {
    pub lambda: Ordinal,
    pub rows: Vec<(u64, u64)>,
    pub max_ratio: BigRational,
}

impl RhoOracle for RhoFn {
    fn value(&self, a: &Ordinal, b: &Ordinal) -> u64 {
        self.rho(a, b).expect("in bound")
    }

    fn level_set(&self, b: &Ordinal, n: u64) -> Option<FinOrdSet> {
        self.f_n_set(b, n).ok()
    }
}

/// Builds the smooth rho-function below `bound`: `g(i) = 2^i` with ladder
/// `{g+n}` on successor limits, and `g(i) = n_i` on limits of limits.
pub fn build_smooth_rho(bound: Ordinal) -> RhoFn {
    RhoFn::smooth(bound)
}

/// Realizes every queued model inside its target, in target order, and
/// returns the function together with one certificate per entry (in the
/// queue's original order).
pub fn build_universal_rho(
    bound: Ordinal,
    queue: &[(RhoModel, Target)],
) -> Result<(RhoFn, Vec<Certificate>), RhoError> {
    if !bound.is_limit() {
        return Err(RhoError::Precondition(format!("bound {bound} is not a limit")));
    }
    let mut rho = RhoFn::universal(bound);
    let mut order: Vec<usize> = (0..queue.len()).collect();
    order.sort_by(|&a, &b| queue[a].1.start.cmp(&queue[b].1.start));
    let mut certs: Vec<Option<Certificate>> = vec![None; queue.len()];
    let mut used: HashMap<Target, u64> = HashMap::new();
    for idx in order {
        let (model, target) = &queue[idx];
        let (lam, k0) = target.start.split_finite();
        let first = if k0 == 0 { 1 } else { k0 };
        let room_total = target.len.map(|len| (k0 + len).saturating_sub(first));
        let taken = used.get(target).copied().unwrap_or(0);
        let mut delta = lam.add_nat(first + taken);
        if let Some(last) = rho.extensions().last() {
            if delta < last.end {
                if last.block == lam {
                    delta = last.end.clone();
                } else {
                    return Err(RhoError::Precondition(format!(
                        "target {} lies behind the cursor {}",
                        target.start, last.end
                    )));
                }
            }
        }
        let need = model.size() as u64;
        let offset = delta.split_finite().1 - first;
        if let Some(room) = room_total {
            if offset + need > room {
                return Err(RhoError::Capacity {
                    start: target.start.clone(),
                    room: room.saturating_sub(offset),
                    need,
                });
            }
        }
        let cert = rho.universal_extend(&delta, model, &FinOrdSet::new())?;
        used.insert(target.clone(), offset + need);
        certs[idx] = Some(cert);
    }
    Ok((rho, certs.into_iter().map(|c| c.unwrap()).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        Ordinal::parse(s).unwrap()
    }

    fn set(s: &str) -> FinOrdSet {
        FinOrdSet::parse(s).unwrap()
    }

    fn lad() -> RhoFn {
        RhoFn::ladder(o("w^4"))
    }

    #[test]
    fn eval_examples() {
        let r = lad();
        assert_eq!(r.rho(&o("3"), &o("3")).unwrap(), 0);
        assert_eq!(r.rho(&o("3"), &o("w")).unwrap(), 3);
        assert_eq!(r.rho(&o("0"), &o("w")).unwrap(), 0);
        assert_eq!(r.rho(&o("w"), &o("3")).unwrap(), 3);
        assert!(matches!(r.rho(&o("w^4"), &o("0")), Err(RhoError::OutOfBound { .. })));
    }

    #[test]
    fn p_and_closure_examples() {
        let r = lad();
        assert_eq!(r.p_of(&set("7")).unwrap(), 0);
        assert_eq!(r.p_of(&set("2,5")).unwrap(), 5);
        assert_eq!(r.p_of(&set("1,2,5")).unwrap(), 5);
        assert_eq!(r.p_of(&FinOrdSet::new()), Err(RhoError::Empty));
        assert!(r.closure(&FinOrdSet::new(), 3).unwrap().is_empty());
        assert_eq!(r.closure(&set("5"), 3).unwrap(), set("5"));
        assert_eq!(r.closure(&set("2,5"), 5).unwrap(), set("0,1,2,3,4,5"));
        assert!(r.is_p_closed(&FinOrdSet::new(), 0).unwrap());
        assert!(r.is_p_closed(&set("0,1,2,3,4,5"), 5).unwrap());
        assert!(!r.is_p_closed(&set("2,5"), 5).unwrap());
    }

    #[test]
    fn f_sets_and_rho_bar() {
        let r = lad();
        assert!(r.f_n_set(&o("0"), 5).unwrap().is_empty());
        assert!(r.f_n_set(&o("5"), 3).unwrap().is_empty());
        assert_eq!(r.f_n_set(&o("5"), 5).unwrap(), set("0,1,2,3,4"));
        assert_eq!(r.rho_bar(&o("0"), &o("0")).unwrap(), 1);
        assert_eq!(r.rho_bar(&o("1"), &o("2")).unwrap(), 2);
    }

    #[test]
    fn models() {
        let r = lad();
        let m = r.model_of(&set("7")).unwrap();
        assert_eq!((m.size(), m.p()), (1, 0));
        let m = r.model_of(&set("1,3")).unwrap();
        assert_eq!(m.get(0, 1), 3);
        assert_eq!(m.p(), 3);
        let m = r.model_of(&set("0,1,2")).unwrap();
        assert_eq!(m.matrix(), &[vec![0, 1, 2], vec![1, 0, 2], vec![2, 2, 0]]);
        assert!(models_isomorphic(&m, &m));
        let a = RhoModel::new(vec![vec![0, 3], vec![3, 0]]).unwrap();
        let b = RhoModel::new(vec![vec![0, 4], vec![4, 0]]).unwrap();
        assert!(!models_isomorphic(&a, &b));
        let s1 = RhoModel::new(vec![vec![0]]).unwrap();
        assert!(models_isomorphic(&s1, &RhoModel::new(vec![vec![0]]).unwrap()));
        assert!(RhoModel::new(vec![vec![0, 5, 1], vec![5, 0, 1], vec![1, 1, 0]]).is_err());
    }

    #[test]
    fn axioms_examples() {
        let r = lad();
        let rep = verify_rho_axioms(&r, &set("0,1,2,3"));
        assert!(rep.violations.is_empty());
        assert!(rep.level_mismatches.is_empty());
        let zero = RhoFn::ladder_with_base(o("w"), Rc::new(|_, _| 0));
        assert!(verify_rho_axioms(&zero, &set("0,1,2")).violations.is_empty());
        let bad = RhoModel { matrix: vec![vec![0, 1, 5], vec![1, 0, 1], vec![5, 1, 0]], p: 5 };
        let rep = verify_rho_axioms(&bad, &set("0,1,2"));
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].axiom, 1);
        assert_eq!(rep.violations[0].triple, [o("0"), o("1"), o("2")]);
    }

    #[test]
    fn filler_values() {
        let r = lad();
        // rho(a, w+k) = max{k, rho(a, w)} below w, k inside the block
        assert_eq!(r.rho(&o("5"), &o("w+2")).unwrap(), 5);
        assert_eq!(r.rho(&o("1"), &o("w+2")).unwrap(), 2);
        assert_eq!(r.rho(&o("w"), &o("w+2")).unwrap(), 2);
        assert_eq!(r.rho(&o("w+1"), &o("w+2")).unwrap(), 2);
    }

    #[test]
    fn universal_singleton_step() {
        let mut r = RhoFn::universal(o("w*8"));
        let before: Vec<u64> = (0..4).map(|i| r.rho(&o(&i.to_string()), &o("w+2")).unwrap()).collect();
        let single = RhoModel::new(vec![vec![0]]).unwrap();
        let c = r.universal_extend(&o("w+3"), &single, &FinOrdSet::new()).unwrap();
        assert!(c.passes());
        assert_eq!(c.m1, set("w+3"));
        for i in 0..4u64 {
            let v = r.rho(&Ordinal::nat(i), &o("w+3")).unwrap();
            assert_eq!(v, before[i as usize].max(1));
        }
        assert_eq!(r.rho(&o("w+2"), &o("w+3")).unwrap(), 1);
    }

    #[test]
    fn universal_identity_and_capacity() {
        let mut r = RhoFn::universal(o("w*8"));
        let m = r.model_of(&set("0,1,2")).unwrap();
        let c = r.universal_extend(&o("w+1"), &m, &set("0,1,2")).unwrap();
        assert!(c.passes());
        assert!(r.extensions().is_empty());
        let model3 = RhoModel::new(vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]).unwrap();
        let q = vec![(model3, Target { start: o("w*2+1"), len: Some(2) })];
        assert!(matches!(build_universal_rho(o("w*8"), &q), Err(RhoError::Capacity { .. })));
        let (plain, certs) = build_universal_rho(o("w*8"), &[]).unwrap();
        assert!(certs.is_empty());
        assert_eq!(plain.rho(&o("3"), &o("w")).unwrap(), 3);
    }

    #[test]
    fn universal_with_m0() {
        let mut r = RhoFn::universal(o("w*8"));
        let m0 = set("w+5");
        let p = 2;
        assert!(r.is_p_closed(&m0, p).unwrap());
        let model = RhoModel::new(vec![vec![0, 2], vec![2, 0]]).unwrap();
        let c = r.universal_extend(&o("w*2+1"), &model, &m0).unwrap();
        assert!(c.passes(), "{c:?}");
        let rep = verify_rho_axioms(&r, &set("0,3,w,w+1,w+2,w+5,w*2,w*2+1,w*2+2,w*2+3"));
        assert!(rep.violations.is_empty(), "{:?}", rep.violations);
    }

    #[test]
    fn smooth_successor_bound() {
        let r = RhoFn::smooth(o("w^3"));
        for n in 1..=64u64 {
            let fw = r.f_n_set(&o("w"), n).unwrap().len() as u64;
            let fw2 = r.f_n_set(&o("w*2"), n).unwrap().len() as u64;
            let log = 63 - n.leading_zeros() as u64;
            assert!(fw2 <= fw + 1 + log, "n={n}");
        }
        let rep = verify_rho_axioms(&r, &set("0,2,5,w,w+1,w+3,w*2,w*2+4,w*3,w^2,w^2+1"));
        assert!(rep.violations.is_empty(), "{:?}", rep.violations);
        assert!(rep.level_mismatches.is_empty());
    }

    #[test]
    fn model_enumeration_counts() {
        let all = RhoModel::enumerate(2, 2);
        assert_eq!(all.len(), 1 + 3);
        for m in RhoModel::enumerate(3, 3) {
            assert!(verify_rho_axioms(&m, &m.points()).violations.is_empty());
        }
    }
}
