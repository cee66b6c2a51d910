//! The coded norming set `K`: projections of functional tuples onto
//! p-closures, the injection into even weight indices, special sequences,
//! and checkers for the finite building blocks of the space (averages, RIS,
//! exact pairs, dependent sequences).
//!
//! Weights are handled by index: a functional of weight `m_j` carries `j`.
//! Even indices come from `(1/m_{2j}, n_{2j})`-operations, odd indices only
//! from special functionals.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigInt, BigUint, One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::norms::{
    eval_functional, family_norm_witness, james_norm_with, norming_enumerate_positive, tsirelson_norm, Family,
    Functional, NormError, ParamSchedule, Restriction, SegmentDp,
};
use crate::ordinals::{FinOrdSet, Ordinal};
use crate::rho::{RhoError, RhoFn};
use crate::vectors::{act, ser_q, ser_qs, Interval, Vec00, Q};

/// Largest support on which depth-bounded enumeration is attempted.
pub const ENUM_SUPPORT_LIMIT: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("invalid tuple: {0}")]
    InvalidTuple(String),
    #[error("code {code} does not exceed the growth threshold {threshold}")]
    Growth { code: usize, threshold: String },
    #[error("schedule exhausted: weight index {need} requested, schedule has {len}")]
    ScheduleExhausted { need: usize, len: usize },
    #[error("source exhausted at step {0}")]
    SourceExhausted(usize),
    #[error("sequences come from incompatible codings: {0}")]
    Incompatible(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("search budget exhausted after {0} candidates")]
    Budget(usize),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Rho(#[from] RhoError),
}

fn q_u(v: usize) -> Q {
    Q::from_integer(BigInt::from(v))
}

fn supp_union<'a, I: IntoIterator<Item = &'a Vec00>>(vs: I) -> FinOrdSet {
    let mut out = FinOrdSet::new();
    for v in vs {
        out = out.union(&v.support());
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CodingMode {
    /// Enforces `sigma > max{p_d^2, 1/eps^2, max supp}` and the schedule length.
    Strict,
    /// Waives the growth condition; every waived assignment is recorded.
    Toy,
}

/// One entry `(phi_i, w_i, p_i)` of a tuple in `Q_s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QsEntry {
    pub phi: Vec00,
    pub w: usize,
    pub p: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct QsTuple {
    pub entries: Vec<QsEntry>,
}

impl QsTuple {
    pub fn new(entries: Vec<QsEntry>) -> Self {
        QsTuple { entries }
    }

    /// Checks successive nonzero functionals, strictly increasing `w` and `p`,
    /// and `p_i >= p` of the union of the first `i` supports.
    pub fn validate(&self, rho: &RhoFn) -> Result<(), SpaceError> {
        if self.entries.is_empty() {
            return Err(SpaceError::InvalidTuple("empty tuple".into()));
        }
        let mut union = FinOrdSet::new();
        for (i, e) in self.entries.iter().enumerate() {
            if e.phi.is_zero() {
                return Err(SpaceError::InvalidTuple(format!("functional {} has empty support", i + 1)));
            }
            if i > 0 {
                let prev = &self.entries[i - 1];
                if prev.phi.max_index() >= e.phi.min_index() {
                    return Err(SpaceError::InvalidTuple(format!("functionals {i} and {} are not successive", i + 1)));
                }
                if prev.w >= e.w || prev.p >= e.p {
                    return Err(SpaceError::InvalidTuple(format!("w or p not increasing at {}", i + 1)));
                }
            }
            union = union.union(&e.phi.support());
            let need = rho.p_of(&union)?;
            if e.p < need {
                return Err(SpaceError::InvalidTuple(format!("p_{} = {} is below p_F = {need}", i + 1, e.p)));
            }
        }
        Ok(())
    }

    /// `min |phi_k(e_a)|` over the supports.
    pub fn epsilon(&self) -> Q {
        self.entries.iter().flat_map(|e| e.phi.values().map(|q| q.abs())).min().unwrap_or_else(Q::zero)
    }
}

/// `pi_G(Phi)`: the tuple moved onto positions `1..#G` of `G = cl(supp, p_d)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Projection {
    pub closure: FinOrdSet,
    pub functionals: Vec<Vec00>,
    pub weights: Vec<usize>,
    pub ps: Vec<u64>,
    /// canonical encoding; equal projections have equal encodings
    pub encoding: String,
}

pub fn qs_project(tuple: &QsTuple, rho: &RhoFn) -> Result<Projection, SpaceError> {
    tuple.validate(rho)?;
    let union = supp_union(tuple.entries.iter().map(|e| &e.phi));
    let p = tuple.entries.last().unwrap().p;
    let g = rho.closure(&union, p)?;
    let mut functionals = Vec::new();
    let mut enc = String::new();
    for (i, e) in tuple.entries.iter().enumerate() {
        let moved = Vec00::from_pairs(
            e.phi
                .iter()
                .map(|(a, q)| (Ordinal::nat(g.position(a).expect("support lies in its closure") as u64), q.clone())),
        );
        if i > 0 {
            enc.push(';');
        }
        enc.push_str(&format!("{}|{}|{}", moved, e.w, e.p));
        functionals.push(moved);
    }
    Ok(Projection {
        closure: g,
        functionals,
        weights: tuple.entries.iter().map(|e| e.w).collect(),
        ps: tuple.entries.iter().map(|e| e.p).collect(),
        encoding: enc,
    })
}

/// Registry-backed injection of projected tuples into `{2, 6, 10, ...}`.
/// Codes are handed out in increasing order and always exceed the last
/// weight of the tuple, so extending a tuple by its code stays in `Q_s`.
#[derive(Clone, Debug)]
pub struct CodingState {
    registry: BTreeMap<String, usize>,
    next: usize,
    mode: CodingMode,
    limit: Option<usize>,
    waivers: BTreeSet<String>,
    /// fork path from the root state
    marker: Vec<u32>,
    forks: u32,
}

impl CodingState {
    pub fn toy() -> Self {
        CodingState {
            registry: BTreeMap::new(),
            next: 2,
            mode: CodingMode::Toy,
            limit: None,
            waivers: BTreeSet::new(),
            marker: Vec::new(),
            forks: 0,
        }
    }

    /// Strict mode against a schedule of `limit` weights.
    pub fn strict(limit: usize) -> Self {
        CodingState { mode: CodingMode::Strict, limit: Some(limit), ..Self::toy() }
    }

    pub fn mode(&self) -> CodingMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.registry.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registry.is_empty()
    }

    pub fn waivers(&self) -> Vec<String> {
        self.waivers.iter().cloned().collect()
    }

    pub fn marker(&self) -> &[u32] {
        &self.marker
    }

    /// Deep copy tagged with a divergence marker.  Codes assigned by the
    /// copy agree with the parent on every tuple the parent has seen.
    pub fn fork(&mut self) -> CodingState {
        self.forks += 1;
        let mut c = self.clone();
        c.marker.push(self.forks);
        c.forks = 0;
        c
    }

    /// Registered code of a projected tuple, if any.
    pub fn lookup(&self, encoding: &str) -> Option<usize> {
        self.registry.get(encoding).copied()
    }

    /// Every assignment, in encoding order.
    pub fn assignments(&self) -> impl Iterator<Item = (&String, &usize)> {
        self.registry.iter()
    }

    fn assign(&mut self, proj: &Projection, tuple: &QsTuple) -> Result<usize, SpaceError> {
        if let Some(c) = self.registry.get(&proj.encoding) {
            return Ok(*c);
        }
        let d = tuple.entries.last().unwrap();
        let mut code = self.next;
        while code <= d.w {
            code += 4;
        }
        // max{p_d^2, 1/eps^2, max supp pi_G(phi_d)}
        let eps = tuple.epsilon();
        let inv = (Q::one() / &eps) * (Q::one() / &eps);
        let top = proj.functionals.last().unwrap().max_index().and_then(|a| a.as_nat()).unwrap_or(0);
        let threshold =
            inv.max(Q::from_integer(BigInt::from(d.p) * BigInt::from(d.p))).max(Q::from_integer(BigInt::from(top)));
        match self.mode {
            CodingMode::Strict => {
                while q_u(code) <= threshold {
                    code += 4;
                }
                let limit = self.limit.unwrap_or(usize::MAX);
                if code > limit {
                    return Err(SpaceError::ScheduleExhausted { need: code, len: limit });
                }
            }
            CodingMode::Toy => {
                if q_u(code) <= threshold {
                    self.waivers.insert("sigma-growth".into());
                }
            }
        }
        self.registry.insert(proj.encoding.clone(), code);
        self.next = code + 4;
        Ok(code)
    }
}

/// `sigma_rho(Phi) = sigma(pi_G(Phi))`.
pub fn sigma_rho(tuple: &QsTuple, coding: &mut CodingState, rho: &RhoFn) -> Result<usize, SpaceError> {
    let proj = qs_project(tuple, rho)?;
    coding.assign(&proj, tuple)
}

/// Canonical exact pairs `x = (m_w/n_w) sum_F e_a`, `phi = (1/m_w) sum_F e_a^*`
/// with `#F = n_w`, on consecutive successors of `base`.
#[derive(Clone, Debug)]
pub struct PairSource {
    base: Ordinal,
    offset: u64,
    end: u64,
}

impl PairSource {
    /// Uses `base + 1, base + 2, ..., base + end`.
    pub fn new(base: Ordinal, end: u64) -> Self {
        PairSource { base, offset: 0, end }
    }

    pub fn base(&self) -> &Ordinal {
        &self.base
    }

    /// The next pair of weight index `w` placed after `after`.
    pub fn next_pair(
        &mut self,
        step: usize,
        w: usize,
        after: Option<&Ordinal>,
        sched: &ParamSchedule,
    ) -> Result<(Vec00, Functional), SpaceError> {
        let n = sched.n_u64(w).ok_or(SpaceError::SourceExhausted(step))?;
        if let Some(a) = after {
            while self.base.add_nat(self.offset + 1) <= *a && self.offset < self.end {
                self.offset += 1;
            }
        }
        if self.offset + n > self.end {
            return Err(SpaceError::SourceExhausted(step));
        }
        let pts: Vec<Ordinal> = (1..=n).map(|k| self.base.add_nat(self.offset + k)).collect();
        self.offset += n;
        Ok(canonical_pair(&pts, w, sched))
    }
}

/// `((m_w/#F) sum_F e_a, (1/m_w) sum_F e_a^*)`.
pub fn canonical_pair(points: &[Ordinal], w: usize, sched: &ParamSchedule) -> (Vec00, Functional) {
    let c = sched.m_q(w) / q_u(points.len());
    let x = Vec00::from_pairs(points.iter().map(|a| (a.clone(), c.clone())));
    let phi = Functional::weighted(w, points.iter().map(|a| Functional::basis(a.clone())).collect());
    (x, phi)
}

/// A special sequence, possibly a proper initial segment (a restriction of a
/// full one to an interval).
#[derive(Clone, Debug, Serialize)]
pub struct SpecialSequence {
    /// the special functional has weight index `2j+1`
    pub j: usize,
    pub functionals: Vec<Functional>,
    pub values: Vec<Vec00>,
    pub weights: Vec<usize>,
    /// `p_1 < ... < p_{k-1}`
    pub ps: Vec<u64>,
    /// the tuple encodings queried, with their codes
    pub codes: Vec<(String, usize)>,
    pub waivers: Vec<String>,
    /// paired vectors when the sequence was built from exact pairs
    pub paired: Vec<Vec00>,
}

impl SpecialSequence {
    pub fn len(&self) -> usize {
        self.functionals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functionals.is_empty()
    }

    pub fn odd_index(&self) -> usize {
        2 * self.j + 1
    }

    /// `(1/m_{2j+1}) sum phi_i`.
    pub fn special_functional(&self) -> Functional {
        Functional::weighted(self.odd_index(), self.functionals.clone())
    }

    fn tuple(&self, upto: usize) -> QsTuple {
        QsTuple::new(
            (0..upto).map(|i| QsEntry { phi: self.values[i].clone(), w: self.weights[i], p: self.ps[i] }).collect(),
        )
    }
}

/// Start weight `2 j_1` with `j_1` even and `m_{2j_1} > n_{2j+1}^2`; toy mode
/// falls back to the least index divisible by 4 with a waiver.
pub fn start_weight(j: usize, sched: &ParamSchedule, mode: CodingMode) -> Result<(usize, Option<String>), SpaceError> {
    let odd = 2 * j + 1;
    if odd > sched.len() {
        return Err(SpaceError::ScheduleExhausted { need: odd, len: sched.len() });
    }
    let n2 = sched.n(odd) * sched.n(odd);
    if let Some(w) = (1..=sched.len() / 4).map(|t| 4 * t).find(|&w| sched.m(w) > &n2) {
        return Ok((w, None));
    }
    match mode {
        CodingMode::Strict => Err(SpaceError::Precondition(format!("no index 4t with m_4t > n_{odd}^2"))),
        CodingMode::Toy => {
            if sched.len() < 4 {
                return Err(SpaceError::ScheduleExhausted { need: 4, len: sched.len() });
            }
            Ok((4, Some("start-weight".into())))
        }
    }
}

/// `step, weight, after -> (paired vector, functional)`
pub type StepFn<'a> = dyn FnMut(usize, usize, Option<&Ordinal>) -> Result<(Vec00, Functional), SpaceError> + 'a;

/// The steps of a special-sequence construction.
pub struct BuildPlan<'a> {
    pub j: usize,
    pub len: usize,
    /// start weight index; `None` picks it by [`start_weight`]
    pub start: Option<usize>,
    /// `step, weight, after -> (paired vector, functional)`
    pub next: &'a mut StepFn<'a>,
    /// lower bounds for `p_i`
    pub p_floor: &'a dyn Fn(usize) -> u64,
    /// stop quietly, keeping the prefix, when a code leaves the schedule
    pub truncate: bool,
}

pub fn build_with(
    plan: BuildPlan<'_>,
    sched: &ParamSchedule,
    rho: &RhoFn,
    coding: &mut CodingState,
) -> Result<SpecialSequence, SpaceError> {
    let odd = 2 * plan.j + 1;
    if plan.j == 0 || odd > sched.len() {
        return Err(SpaceError::ScheduleExhausted { need: odd, len: sched.len() });
    }
    let n = sched.n_capped(odd, usize::MAX);
    if plan.len == 0 || plan.len > n {
        return Err(SpaceError::Precondition(format!("length {} outside 1..={n}", plan.len)));
    }
    let mut waivers = BTreeSet::new();
    let w1 = match plan.start {
        Some(w) => w,
        None => {
            let (w, waiver) = start_weight(plan.j, sched, coding.mode())?;
            waivers.extend(waiver);
            w
        }
    };
    let mut seq = SpecialSequence {
        j: plan.j,
        functionals: Vec::new(),
        values: Vec::new(),
        weights: Vec::new(),
        ps: Vec::new(),
        codes: Vec::new(),
        waivers: Vec::new(),
        paired: Vec::new(),
    };
    let mut w = w1;
    let mut seen = FinOrdSet::new();
    for i in 0..plan.len {
        let after = seen.max().cloned();
        let (x, phi) = (plan.next)(i, w, after.as_ref())?;
        if phi.weight_of() != Some(w) {
            return Err(SpaceError::InvalidTuple(format!("step {} produced a functional of the wrong weight", i + 1)));
        }
        let v = phi.to_vec(sched)?;
        if v.is_zero()
            || after.as_ref().is_some_and(|a| v.min_index().unwrap() <= a || x.min_index().is_some_and(|m| m <= a))
        {
            return Err(SpaceError::InvalidTuple(format!("step {} is not after the previous ones", i + 1)));
        }
        seen = seen.union(&v.support()).union(&x.support());
        seq.functionals.push(phi);
        seq.values.push(v);
        seq.weights.push(w);
        seq.paired.push(x);
        if i + 1 == plan.len {
            break;
        }
        // p_i >= max{p_{i-1} + 1, p_{F_i}}
        let prev = seq.ps.last().map_or(0, |p| p + 1);
        let p = prev.max(rho.p_of(&seen)?).max((plan.p_floor)(i));
        seq.ps.push(p);
        let tuple = seq.tuple(i + 1);
        let proj = qs_project(&tuple, rho)?;
        let code = coding.assign(&proj, &tuple)?;
        seq.codes.push((proj.encoding, code));
        if code > sched.len() {
            if plan.truncate {
                seq.ps.pop();
                break;
            }
            return Err(SpaceError::ScheduleExhausted { need: code, len: sched.len() });
        }
        w = code;
    }
    waivers.extend(coding.waivers());
    seq.waivers = waivers.into_iter().collect();
    Ok(seq)
}

/// A special sequence of length `len` for the odd index `2j+1`, drawing
/// canonical exact pairs from `source`.
pub fn build_special_sequence(
    source: &mut PairSource,
    j: usize,
    len: usize,
    sched: &ParamSchedule,
    rho: &RhoFn,
    coding: &mut CodingState,
) -> Result<SpecialSequence, SpaceError> {
    let mut next = |i: usize, w: usize, after: Option<&Ordinal>| source.next_pair(i, w, after, sched);
    build_with(BuildPlan { j, len, start: None, next: &mut next, p_floor: &|_| 0, truncate: false }, sched, rho, coding)
}

/// Re-verifies the defining conditions of a special sequence against the
/// coding: successive type I members, `w(phi_{i+1}) = m_{sigma_rho(Phi_i)}`,
/// increasing `p`, and the start weight.
pub fn verify_special(
    seq: &SpecialSequence,
    sched: &ParamSchedule,
    rho: &RhoFn,
    coding: &CodingState,
) -> Result<Vec<String>, SpaceError> {
    let mut problems = Vec::new();
    for (i, f) in seq.functionals.iter().enumerate() {
        if f.weight_of() != Some(seq.weights[i]) {
            problems.push(format!("member {} is not type I of its weight", i + 1));
        }
        if f.to_vec(sched)? != seq.values[i] {
            problems.push(format!("member {} does not match its value", i + 1));
        }
    }
    if seq.values.windows(2).any(|w| w[0].max_index() >= w[1].min_index()) {
        problems.push("supports are not successive".into());
    }
    if seq.weights.first().is_some_and(|w| w % 4 != 0) {
        problems.push("start weight index is not 2j_1 with j_1 even".into());
    }
    for i in 1..seq.len() {
        let proj = qs_project(&seq.tuple(i), rho)?;
        match coding.lookup(&proj.encoding) {
            Some(c) if c == seq.weights[i] => {}
            other => problems.push(format!("weight {} is {} but the code is {other:?}", i + 1, seq.weights[i])),
        }
    }
    Ok(problems)
}

#[derive(Clone, Debug, Serialize)]
pub struct InterferenceReport {
    pub kappa: usize,
    pub lambda: usize,
    pub tp1: bool,
    pub tp2: bool,
    pub tp3: bool,
    pub tp4: bool,
    pub notes: Vec<String>,
}

impl InterferenceReport {
    pub fn pass(&self) -> bool {
        self.tp1 && self.tp2 && self.tp3 && self.tp4
    }
}

fn check_compatible(a: &SpecialSequence, b: &SpecialSequence) -> Result<(), SpaceError> {
    let mut by_enc: BTreeMap<&str, usize> = BTreeMap::new();
    let mut by_code: BTreeMap<usize, &str> = BTreeMap::new();
    for (e, c) in a.codes.iter().chain(&b.codes) {
        if by_enc.insert(e, *c).is_some_and(|old| old != *c) || by_code.insert(*c, e).is_some_and(|old| old != e) {
            return Err(SpaceError::Incompatible(format!("code {c} is assigned inconsistently")));
        }
    }
    Ok(())
}

/// `kappa`, `lambda` and the four tree-like properties of a pair of special
/// sequences.  When `kappa = 0` the ranges `kappa < i < lambda` are empty.
pub fn tree_interference(
    phi: &SpecialSequence,
    psi: &SpecialSequence,
    rho: &RhoFn,
) -> Result<InterferenceReport, SpaceError> {
    if phi.j != psi.j {
        return Err(SpaceError::Incompatible("different odd indices".into()));
    }
    check_compatible(phi, psi)?;
    let n = phi.len().min(psi.len());
    let lambda = (1..=n).rev().find(|&i| phi.weights[i - 1] == psi.weights[i - 1]).unwrap_or(0);
    let kappa =
        if lambda == 0 { 0 } else { (1..=lambda).find(|&i| phi.values[i - 1] != psi.values[i - 1]).unwrap_or(0) };
    let mut notes = Vec::new();
    let tp1 = (1..=lambda).all(|i| phi.weights[i - 1] == psi.weights[i - 1])
        && (1..lambda).all(|i| phi.ps.get(i - 1) == psi.ps.get(i - 1));
    let tp2 = (1..kappa).all(|i| phi.values[i - 1] == psi.values[i - 1]);
    let mut tp3 = true;
    if kappa >= 1 && lambda >= kappa + 2 {
        let p = phi.ps[lambda - 2];
        let g_psi = rho.closure(&supp_union(&psi.values[..lambda - 1]), p)?;
        let g_phi = rho.closure(&supp_union(&phi.values[..lambda - 1]), p)?;
        for i in kappa + 1..lambda {
            if !phi.values[i - 1].support().intersection(&g_psi).is_empty() {
                tp3 = false;
                notes.push(format!("supp phi_{i} meets the closure of the psi prefix"));
            }
            if !psi.values[i - 1].support().intersection(&g_phi).is_empty() {
                tp3 = false;
                notes.push(format!("supp psi_{i} meets the closure of the phi prefix"));
            }
        }
    }
    let tail = |s: &SpecialSequence| -> BTreeSet<usize> { s.weights.iter().skip(lambda).copied().collect() };
    let all = |s: &SpecialSequence| -> BTreeSet<usize> { s.weights.iter().copied().collect() };
    let tp4 = tail(phi).is_disjoint(&all(psi)) && tail(psi).is_disjoint(&all(phi));
    if !tp4 {
        notes.push("weights beyond lambda are shared".into());
    }
    Ok(InterferenceReport { kappa, lambda, tp1, tp2, tp3, tp4, notes })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeViolation {
    /// `"2"`, `"3.a"`, `"3.b"` or `"4"`
    pub clause: String,
    /// child indices from the root
    pub path: Vec<usize>,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct TreeReport {
    pub pass: bool,
    pub nodes: usize,
    pub violation: Option<TreeViolation>,
}

fn hull(v: &Vec00) -> Option<Interval> {
    v.range_hull()
}

fn range_within(inner: &Vec00, outer: &Vec00) -> bool {
    match (hull(inner), hull(outer)) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(i), Some(o)) => o.contains_interval(&i),
    }
}

fn meet(outer: &Option<Restriction>, own: &Option<Restriction>) -> Option<Option<Restriction>> {
    match (outer, own) {
        (None, r) | (r, None) => Some(r.clone()),
        (Some(a), Some(b)) => {
            let probe = Functional::Weighted { sign: 1, j: 1, children: vec![], restrict: Some(b.clone()) };
            let r = match a {
                Restriction::Interval(i) => probe.restrict_interval(i),
                Restriction::Set(s) => probe.restrict_set(s),
            };
            Some(r.and_then(|f| match f {
                Functional::Weighted { restrict, .. } => restrict,
                _ => None,
            }))
        }
    }
}

fn apply_restriction(v: Vec00, r: &Option<Restriction>) -> Vec00 {
    match r {
        None => v,
        Some(Restriction::Interval(i)) => v.restrict_interval(i),
        Some(Restriction::Set(s)) => v.restrict(&crate::vectors::Region::Set(s.clone())),
    }
}

struct TreeWalk<'a> {
    sched: &'a ParamSchedule,
    nodes: usize,
}

impl TreeWalk<'_> {
    /// Effective value of the node with the inherited restriction pushed down.
    fn walk(
        &mut self,
        f: &Functional,
        path: &mut Vec<usize>,
        outer: &Option<Restriction>,
    ) -> Result<Vec00, TreeViolation> {
        self.nodes += 1;
        let fail = |clause: &str, path: &Vec<usize>, msg: String| TreeViolation {
            clause: clause.into(),
            path: path.clone(),
            message: msg,
        };
        match f {
            Functional::Basis { sign, index } => {
                if sign.abs() != 1 {
                    return Err(fail("2", path, format!("leaf sign {sign}")));
                }
                let v = Vec00::from_pairs([(index.clone(), Q::from_integer(BigInt::from(*sign)))]);
                Ok(apply_restriction(v, outer))
            }
            Functional::Weighted { sign, j, children, restrict } => {
                if children.is_empty() {
                    return Err(fail("2", path, "maximal node is not of type 0".into()));
                }
                if *j == 0 || *j > self.sched.len() {
                    return Err(fail("3.a", path, format!("weight index {j} outside the schedule")));
                }
                if BigUint::from(children.len()) > *self.sched.n(*j) {
                    return Err(fail(
                        "3.a",
                        path,
                        format!("{} children exceed n_{j} = {}", children.len(), self.sched.n(*j)),
                    ));
                }
                let r = meet(outer, restrict).unwrap_or(None);
                let mut vals = Vec::new();
                for (k, c) in children.iter().enumerate() {
                    path.push(k);
                    let v = self.walk(c, path, &r)?;
                    path.pop();
                    vals.push(v);
                }
                let nz: Vec<&Vec00> = vals.iter().filter(|v| !v.is_zero()).collect();
                if nz.windows(2).any(|w| w[0].max_index() >= w[1].min_index()) {
                    return Err(fail("3.a", path, "children are not successive".into()));
                }
                let mut sum = Vec00::zero();
                for v in &vals {
                    sum = sum.add(v);
                }
                let out = sum.scale(&(Q::from_integer(BigInt::from(*sign)) / self.sched.m_q(*j)));
                for (k, v) in vals.iter().enumerate() {
                    if !range_within(v, &out) {
                        path.push(k);
                        let e = fail("4", path, "child range escapes the parent range".into());
                        return Err(e);
                    }
                }
                Ok(out)
            }
            Functional::Convex(parts) => {
                if parts.is_empty() {
                    return Err(fail("2", path, "maximal node is not of type 0".into()));
                }
                let mut total = Q::zero();
                let mut vals = Vec::new();
                for (k, (w, c)) in parts.iter().enumerate() {
                    path.push(k);
                    if matches!(c, Functional::Convex(_)) {
                        return Err(fail("3.b", path, "convex part is neither type 0 nor type I".into()));
                    }
                    if !w.is_positive() {
                        return Err(fail("3.b", path, "convex weights must be positive".into()));
                    }
                    let v = self.walk(c, path, outer)?;
                    path.pop();
                    total += w;
                    vals.push(v.scale(w));
                }
                if total > Q::one() {
                    return Err(fail("3.b", path, "convex weights sum above 1".into()));
                }
                let mut out = Vec00::zero();
                for v in &vals {
                    out = out.add(v);
                }
                for (k, v) in vals.iter().enumerate() {
                    if !range_within(v, &out) {
                        path.push(k);
                        return Err(fail("4", path, "child range escapes the parent range".into()));
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Checks the tree-analysis clauses: leaves of type 0 (2), weighted nodes
/// with at most `n_j` successive children (3.a), sub-convex nodes over type
/// 0/I parts (3.b) and nested ranges (4).  Restrictions are pushed down to
/// the children, which is how a restricted functional is analysed.
pub fn tree_analysis_validate(phi: &Functional, sched: &ParamSchedule) -> TreeReport {
    let mut w = TreeWalk { sched, nodes: 0 };
    match w.walk(phi, &mut Vec::new(), &None) {
        Ok(_) => TreeReport { pass: true, nodes: w.nodes, violation: None },
        Err(v) => TreeReport { pass: false, nodes: w.nodes, violation: Some(v) },
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KBounds {
    #[serde(serialize_with = "ser_q")]
    pub lower: Q,
    #[serde(serialize_with = "ser_q")]
    pub upper: Q,
    /// a member of `K` attaining `lower`
    pub witness: Option<Functional>,
    /// whether the witness is a special functional
    pub special: bool,
    pub candidates: usize,
    pub waivers: Vec<String>,
}

/// Lower bound from the even operations (an exact maximum over that part of
/// `K`) and from explicit candidate members of `K`.
pub fn k_norm_even_lower(
    x: &Vec00,
    sched: &ParamSchedule,
    fam: Family,
    extra: &[Functional],
) -> Result<(Q, Option<Functional>), SpaceError> {
    let (mut best, mut wit) = family_norm_witness(x, sched, fam);
    for f in extra {
        let v = eval_functional(f, x, sched)?;
        if v > best {
            best = v;
            wit = Some(f.clone());
        }
    }
    Ok((best, wit))
}

/// Compositions of `len` positions into `d` consecutive pieces, as cut points.
fn compositions(len: usize, d: usize, visit: &mut dyn FnMut(&[usize]) -> bool) {
    fn rec(
        start: usize,
        len: usize,
        left: usize,
        cuts: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if left == 1 {
            cuts.push(len);
            let go = visit(cuts);
            cuts.pop();
            return go;
        }
        for c in start + 1..=len - (left - 1) {
            cuts.push(c);
            if !rec(c, len, left - 1, cuts, visit) {
                cuts.pop();
                return false;
            }
            cuts.pop();
        }
        true
    }
    if d >= 1 && d <= len {
        rec(0, len, d, &mut Vec::new(), visit);
    }
}

/// Bounds on the norm of `x` in the coded space: `upper` is the mixed
/// Tsirelson norm (`K` is contained in its norming set) and `lower` is the
/// best of the even-operation maximum and up to `budget` special functionals
/// assembled on consecutive pieces of the support.
pub fn k_norm_bounds(
    x: &Vec00,
    sched: &ParamSchedule,
    rho: &RhoFn,
    coding: &mut CodingState,
    budget: usize,
) -> Result<KBounds, SpaceError> {
    let upper = tsirelson_norm(x, sched);
    let dp = SegmentDp::new(x, sched, Family::T0);
    let mut lower = dp.value();
    let mut witness = dp.witness(0, dp.len());
    let mut special = false;
    let mut tried = 0usize;
    let mut waivers = BTreeSet::new();
    let len = dp.len();
    let mut j = 1;
    while 2 * j < sched.len() && tried < budget && len > 0 {
        let odd = 2 * j + 1;
        let Ok((w1, waiver)) = start_weight(j, sched, coding.mode()) else {
            j += 1;
            continue;
        };
        let d_max = sched.n_capped(odd, len).min(len);
        let inv_m = Q::one() / sched.m_q(odd);
        for d in 1..=d_max {
            let mut stop = false;
            compositions(len, d, &mut |cuts| {
                if tried >= budget {
                    stop = true;
                    return false;
                }
                tried += 1;
                let mut sum = Q::zero();
                let mut members: Vec<Functional> = Vec::new();
                let mut entries: Vec<QsEntry> = Vec::new();
                let mut w = w1;
                let mut a = 0;
                for (t, &b) in cuts.iter().enumerate() {
                    let Some((v, f)) = dp.weighted_segment(a, b, w) else {
                        break;
                    };
                    let Ok(fv) = f.to_vec(sched) else { break };
                    sum += v;
                    members.push(f);
                    if t + 1 == cuts.len() {
                        break;
                    }
                    let union = supp_union(entries.iter().map(|e| &e.phi).chain([&fv]));
                    let Ok(pf) = rho.p_of(&union) else { break };
                    let p = entries.last().map_or(0, |e| e.p + 1).max(pf);
                    entries.push(QsEntry { phi: fv, w, p });
                    let tuple = QsTuple::new(entries.clone());
                    let Ok(code) = sigma_rho(&tuple, coding, rho) else {
                        break;
                    };
                    if code > sched.len() {
                        break;
                    }
                    w = code;
                    a = b;
                }
                let val = sum * &inv_m;
                if val > lower {
                    lower = val;
                    witness = Some(Functional::weighted(odd, members));
                    special = true;
                    if let Some(wv) = &waiver {
                        waivers.insert(wv.clone());
                    }
                }
                true
            });
            if stop {
                break;
            }
        }
        j += 1;
    }
    if special {
        waivers.extend(coding.waivers());
    }
    Ok(KBounds { lower, upper, witness, special, candidates: tried, waivers: waivers.into_iter().collect() })
}

/// A normalized `C`-`l_1^k`-average `y = (x_1 + ... + x_k)/k`.
#[derive(Clone, Debug, Serialize)]
pub struct L1kAverage {
    pub y: Vec00,
    pub parts: Vec<Vec00>,
    #[serde(serialize_with = "ser_qs")]
    pub part_norms: Vec<Q>,
    /// the block index range of every part
    pub groups: Vec<(usize, usize)>,
    #[serde(serialize_with = "ser_q")]
    pub c: Q,
}

/// Searches groupings of consecutive blocks into `k` successive parts; each
/// candidate is normalized by the mixed Tsirelson norm and accepted when every
/// part has norm at most `c`.
pub fn l1k_average_find(
    blocks: &[Vec00],
    k: usize,
    c: &Q,
    sched: &ParamSchedule,
    budget: usize,
) -> Result<L1kAverage, SpaceError> {
    if k == 0 || k > blocks.len() {
        return Err(SpaceError::Precondition(format!("k = {k} with {} blocks", blocks.len())));
    }
    if *c < Q::one() {
        return Err(SpaceError::Precondition("C must be at least 1".into()));
    }
    let mut tried = 0;
    let mut found = None;
    'outer: for start in 0..blocks.len() {
        for end in start + k..=blocks.len() {
            let mut hit = None;
            compositions(end - start, k, &mut |cuts| {
                if tried >= budget {
                    return false;
                }
                tried += 1;
                let mut groups = Vec::new();
                let mut a = 0;
                for &b in cuts {
                    groups.push((start + a, start + b));
                    a = b;
                }
                let zs: Vec<Vec00> =
                    groups.iter().map(|&(s, e)| blocks[s..e].iter().fold(Vec00::zero(), |acc, v| acc.add(v))).collect();
                let total = zs.iter().fold(Vec00::zero(), |acc, v| acc.add(v));
                let norm = tsirelson_norm(&total, sched);
                if norm.is_zero() {
                    return true;
                }
                let scale = q_u(k) / &norm;
                let parts: Vec<Vec00> = zs.iter().map(|z| z.scale(&scale)).collect();
                let norms: Vec<Q> = parts.iter().map(|p| tsirelson_norm(p, sched)).collect();
                if norms.iter().all(|n| n <= c) {
                    hit = Some(L1kAverage {
                        y: total.scale(&(Q::one() / &norm)),
                        parts,
                        part_norms: norms,
                        groups,
                        c: c.clone(),
                    });
                    return false;
                }
                true
            });
            if hit.is_some() {
                found = hit;
                break 'outer;
            }
            if tried >= budget {
                break 'outer;
            }
        }
    }
    found.ok_or(SpaceError::Budget(tried))
}

#[derive(Clone, Debug, Serialize)]
pub struct RisavReport {
    pub n: usize,
    pub k: usize,
    #[serde(serialize_with = "ser_q")]
    pub max_sum: Q,
    #[serde(serialize_with = "ser_q")]
    pub bound: Q,
    pub splits: usize,
    pub pass: bool,
}

/// `sum_i ||E_i y|| <= C (1 + 2n/k)` over every split of the support of `y`
/// into `n` successive intervals.
pub fn risav_check(avg: &L1kAverage, n: usize, sched: &ParamSchedule) -> Result<RisavReport, SpaceError> {
    let k = avg.parts.len();
    if n == 0 || n >= k {
        return Err(SpaceError::Precondition(format!("need 0 < n < k, got n = {n}, k = {k}")));
    }
    let dp = SegmentDp::new(&avg.y, sched, Family::T);
    let len = dp.len();
    let mut max_sum = Q::zero();
    let mut splits = 0;
    for d in 1..=n.min(len) {
        compositions(len, d, &mut |cuts| {
            splits += 1;
            let mut a = 0;
            let mut s = Q::zero();
            for &b in cuts {
                s += dp.segment(a, b);
                a = b;
            }
            if s > max_sum {
                max_sum = s;
            }
            true
        });
    }
    let bound = &avg.c * (Q::one() + q_u(2 * n) / q_u(k));
    Ok(RisavReport { n, k, pass: max_sum <= bound, max_sum, bound, splits })
}

/// Max over type I functionals of root weight index `i` of `|psi(x)|`: the
/// exact maximum over the mixed Tsirelson norming set, and over the
/// depth-bounded enumeration when the support is small.
#[derive(Clone, Debug, Serialize)]
pub struct WeightMax {
    pub i: usize,
    #[serde(serialize_with = "ser_q")]
    pub certified: Q,
    #[serde(serialize_with = "crate::vectors::ser_opt_q")]
    pub enumerated: Option<Q>,
}

impl WeightMax {
    /// The enumerated value when available, otherwise the certified one.
    pub fn value(&self) -> &Q {
        self.enumerated.as_ref().unwrap_or(&self.certified)
    }
}

pub fn weight_maxima(x: &Vec00, sched: &ParamSchedule, depth: usize) -> Vec<WeightMax> {
    let dp = SegmentDp::new(x, sched, Family::T);
    let enumerated = (x.len() <= ENUM_SUPPORT_LIMIT && !x.is_zero()).then(|| {
        let mut best: BTreeMap<usize, Q> = BTreeMap::new();
        let ax = x.abs();
        for e in norming_enumerate_positive(&x.support(), sched, depth, Family::T) {
            if let Some(i) = e.tree.weight_of() {
                let v = act(&e.value, &ax);
                let slot = best.entry(i).or_insert_with(Q::zero);
                if v > *slot {
                    *slot = v;
                }
            }
        }
        best
    });
    (1..=sched.len())
        .map(|i| WeightMax {
            i,
            certified: dp.weighted_segment(0, dp.len(), i).map(|(v, _)| v).unwrap_or_else(Q::zero),
            enumerated: enumerated.as_ref().map(|b| b.get(&i).cloned().unwrap_or_else(Q::zero)),
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct RisReport {
    pub pass: bool,
    pub clause1: Vec<bool>,
    pub clause2: Vec<bool>,
    pub clause3: Vec<bool>,
    /// `j_k`; indices beyond the schedule mean "some later weight"
    pub witness: Vec<usize>,
    pub depth: usize,
    pub depth_bounded: bool,
}

/// The three RIS clauses with a greedy witness `j_1 < j_2 < ...`: each `j_k`
/// is the least index that makes clause 2 hold for `x_{k-1}`; smaller indices
/// only weaken clause 3, so a failure with the greedy choice is final.
pub fn ris_check(xs: &[Vec00], c: &Q, eps: &Q, sched: &ParamSchedule, depth: usize) -> Result<RisReport, SpaceError> {
    if let Some(i) = xs.iter().position(|x| x.is_zero()) {
        return Err(SpaceError::Precondition(format!("vector {} is zero", i + 1)));
    }
    if xs.windows(2).any(|w| w[0].max_index() >= w[1].min_index()) {
        return Err(SpaceError::Precondition("not a block sequence".into()));
    }
    let big = sched.len();
    let mut witness = Vec::new();
    let mut clause1 = Vec::new();
    let mut clause2 = Vec::new();
    let mut clause3 = Vec::new();
    let mut depth_bounded = false;
    let mut j_prev = 0usize;
    for (k, x) in xs.iter().enumerate() {
        let jk = if k == 0 {
            1
        } else {
            let need = q_u(xs[k - 1].len());
            (j_prev + 1..=big).find(|&j| &sched.m_q(j) * eps >= need).unwrap_or(big + k)
        };
        if k > 0 {
            // an index past the schedule stands for a later weight
            clause2.push(true);
        }
        witness.push(jk);
        j_prev = jk;
        clause1.push(tsirelson_norm(x, sched) <= *c);
        let maxima = weight_maxima(x, sched, depth);
        depth_bounded |= maxima.iter().any(|m| m.enumerated.is_some());
        let ok = maxima.iter().filter(|m| m.i < jk).all(|m| *m.value() <= c / sched.m_q(m.i));
        clause3.push(ok);
    }
    // clause 2 for the last vector is met by a later weight
    clause2.push(true);
    let pass = clause1.iter().chain(&clause2).chain(&clause3).all(|b| *b);
    Ok(RisReport { pass, clause1, clause2, clause3, witness, depth, depth_bounded })
}

#[derive(Clone, Debug, Serialize)]
pub struct WeightBound {
    pub i: usize,
    #[serde(serialize_with = "ser_q")]
    pub value: Q,
    #[serde(serialize_with = "ser_q")]
    pub bound: Q,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactPairReport {
    #[serde(serialize_with = "ser_q")]
    pub norm_upper: Q,
    pub norm_ok: bool,
    #[serde(serialize_with = "ser_q")]
    pub value: Q,
    pub value_ok: bool,
    pub weight_ok: bool,
    pub bounds: Vec<WeightBound>,
    /// bounds are asserted only on schedules with the growth conditions
    pub asserted: bool,
}

impl ExactPairReport {
    /// The conditions that are always asserted.
    pub fn core_pass(&self) -> bool {
        self.norm_ok && self.value_ok && self.weight_ok
    }

    pub fn bounds_pass(&self) -> bool {
        self.bounds.iter().all(|b| b.pass)
    }

    pub fn pass(&self) -> bool {
        self.core_pass() && (!self.asserted || self.bounds_pass())
    }
}

/// `||x|| <= C`, `w(phi) = m_j`, `phi(x) = 1`, and `|psi(x)| <= 2C/m_i` for
/// `i < j`, `<= C/m_j^2` for `i > j` over type I `psi`.
pub fn exact_pair_check(
    x: &Vec00,
    phi: &Functional,
    c: &Q,
    j: usize,
    sched: &ParamSchedule,
    depth: usize,
) -> Result<ExactPairReport, SpaceError> {
    if j == 0 || j > sched.len() {
        return Err(SpaceError::ScheduleExhausted { need: j, len: sched.len() });
    }
    let norm_upper = tsirelson_norm(x, sched);
    let value = eval_functional(phi, x, sched)?;
    let mj = sched.m_q(j);
    let bounds = weight_maxima(x, sched, depth)
        .into_iter()
        .filter(|m| m.i != j)
        .map(|m| {
            let bound = if m.i < j { q_u(2) * c / sched.m_q(m.i) } else { c / (&mj * &mj) };
            let value = m.value().clone();
            WeightBound { i: m.i, pass: value <= bound, value, bound }
        })
        .collect();
    Ok(ExactPairReport {
        norm_ok: norm_upper <= *c,
        norm_upper,
        value_ok: value.is_one(),
        value,
        weight_ok: phi.weight_of() == Some(j),
        bounds,
        asserted: sched.paper_exact(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NiceRisReport {
    pub l: usize,
    pub ris: RisReport,
    pub bounds: Vec<WeightBound>,
    pub asserted: bool,
}

impl NiceRisReport {
    pub fn bounds_pass(&self) -> bool {
        self.bounds.iter().all(|b| b.pass)
    }
}

/// `|f((1/l) sum x_k)|` against `3C/(w m_j)` for `w < m_j` and
/// `C/w + 2C/n_j` otherwise, over type I `f`.
pub fn niceasris_check(
    xs: &[Vec00],
    c: &Q,
    eps: &Q,
    j: usize,
    sched: &ParamSchedule,
    depth: usize,
) -> Result<NiceRisReport, SpaceError> {
    if j == 0 || j > sched.len() {
        return Err(SpaceError::ScheduleExhausted { need: j, len: sched.len() });
    }
    let l = xs.len();
    let lq = q_u(l);
    if l == 0 || lq < sched.n_q(j) / sched.m_q(j) || lq > sched.n_q(j) {
        return Err(SpaceError::Precondition(format!("l = {l} is outside [n_j/m_j, n_j]")));
    }
    if *eps > Q::one() / sched.n_q(j) {
        return Err(SpaceError::Precondition("eps exceeds 1/n_j".into()));
    }
    let ris = ris_check(xs, c, eps, sched, depth)?;
    if !ris.pass {
        return Err(SpaceError::Precondition("the sequence is not a certified RIS".into()));
    }
    let avg = xs.iter().fold(Vec00::zero(), |a, x| a.add(x)).scale(&(Q::one() / &lq));
    let mj = sched.m_q(j);
    let nj = sched.n_q(j);
    let bounds = weight_maxima(&avg, sched, depth)
        .into_iter()
        .map(|m| {
            let w = sched.m_q(m.i);
            let bound = if w < mj { q_u(3) * c / (&w * &mj) } else { c / &w + q_u(2) * c / &nj };
            let value = m.value().clone();
            WeightBound { i: m.i, pass: value <= bound, value, bound }
        })
        .collect();
    Ok(NiceRisReport { l, ris, bounds, asserted: sched.paper_exact() })
}

/// `(x_1, phi_1, ..., x_n, phi_n)` built from exact pairs along a special
/// sequence.
#[derive(Clone, Debug, Serialize)]
pub struct DependentSequence {
    pub special: SpecialSequence,
    pub xs: Vec<Vec00>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdversaryResult {
    pub kind: String,
    pub len: usize,
    pub kappa: usize,
    pub lambda: usize,
    pub tree_like: bool,
    pub ds4: bool,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DependentReport {
    pub ds1: bool,
    pub ds2: Vec<String>,
    pub ds3: Vec<ExactPairReport>,
    /// `#supp x_i <= m_{2j_{i+1}} / n_{2j+1}^2`, reported
    pub ds3_support: Vec<bool>,
    pub ds4: Vec<AdversaryResult>,
    pub waivers: Vec<String>,
}

impl DependentReport {
    /// DS.1, DS.2, the asserted part of DS.3, and DS.4 over the pool.
    pub fn pass(&self) -> bool {
        self.ds1
            && self.ds2.is_empty()
            && self.ds3.iter().all(|r| r.pass())
            && self.ds4.iter().all(|a| a.ds4 && a.tree_like)
    }
}

/// DS.4 for one adversary: the supports of `x_i` and `psi_i` for
/// `kappa < i < lambda` do not meet (empty ranges when `kappa = 0`).
pub fn ds4_holds(dep: &DependentSequence, psi: &SpecialSequence, rep: &InterferenceReport) -> bool {
    if rep.kappa == 0 || rep.lambda < rep.kappa + 2 {
        return true;
    }
    let range = rep.kappa..rep.lambda - 1;
    let xs = supp_union(&dep.xs[range.clone()]);
    let ps = supp_union(&psi.values[range]);
    xs.intersection(&ps).is_empty()
}

/// Candidate starting points for relocated copies of a functional.
fn copy_bases(rho: &RhoFn, after: &Ordinal) -> Vec<Ordinal> {
    let mut out = Vec::new();
    for a in 1..=12u64 {
        for c in [0u64, 40, 80] {
            out.push(Ordinal::omega_mul(a).add_nat(c));
        }
    }
    for a in 1..=3u64 {
        for b in 0..=4u64 {
            out.push(Ordinal::omega_pow_mul(Ordinal::nat(2), a).add(&Ordinal::omega_mul(b)));
        }
    }
    out.retain(|o| o > after && o < rho.bound());
    out
}

/// Relocates a canonical functional to consecutive successors of `base`.
fn relocate(phi: &Functional, base: &Ordinal, sched: &ParamSchedule) -> Result<Functional, SpaceError> {
    let v = phi.to_vec(sched)?;
    let pos: BTreeMap<Ordinal, Ordinal> =
        v.iter().enumerate().map(|(k, (a, _))| (a.clone(), base.add_nat(k as u64 + 1))).collect();
    Ok(phi.map_indices(&|a| pos.get(a).cloned().unwrap_or_else(|| a.clone())))
}

/// A special sequence sharing the first `k` members of `seq` and drawing the
/// rest from canonical pairs after `base`; stops early when the codes leave
/// the schedule.  `coding` should be a fork of the state `seq` was built on.
pub fn fork_special(
    seq: &SpecialSequence,
    k: usize,
    base: &Ordinal,
    sched: &ParamSchedule,
    rho: &RhoFn,
    coding: &mut CodingState,
) -> Result<SpecialSequence, SpaceError> {
    let k = k.min(seq.len());
    let mut src = PairSource::new(base.clone(), 100_000);
    let mut next = |i: usize, w: usize, after: Option<&Ordinal>| {
        if i < k {
            Ok((seq.paired[i].clone(), seq.functionals[i].clone()))
        } else {
            src.next_pair(i, w, after, sched)
        }
    };
    let start = seq.weights.first().copied();
    build_with(
        BuildPlan { j: seq.j, len: seq.len().max(1), start, next: &mut next, p_floor: &|_| 0, truncate: true },
        sched,
        rho,
        coding,
    )
}

fn relocate_vec(v: &Vec00, base: &Ordinal) -> Vec00 {
    Vec00::from_pairs(v.iter().enumerate().map(|(k, (_, q))| (base.add_nat(k as u64 + 1), q.clone())))
}

/// Adversarial special sequences for DS.4: identical copies, forks of the
/// functional source after each step, relocated copies that keep the coded
/// weights, and sequences with a different start weight.  Each is built on a
/// fork of `coding`, which must already contain the tuples of `dep`.
pub fn adversary_pool(
    dep: &DependentSequence,
    count: usize,
    sched: &ParamSchedule,
    rho: &RhoFn,
    coding: &mut CodingState,
) -> Vec<(String, SpecialSequence)> {
    let phi = &dep.special;
    let n = phi.len();
    let j = phi.j;
    let top = supp_union(phi.values.iter().chain(&dep.xs)).max().cloned().unwrap_or_else(Ordinal::zero);
    let mut pool = Vec::new();
    let mut t = 0usize;
    while pool.len() < count && t < 4 * count + 8 {
        let variant = t % 4;
        let k = (t / 4) % n.max(1);
        t += 1;
        let mut fork = coding.fork();
        // a few limits past the sequence; staying in its block keeps closures small
        let far = top.split_finite().0.add(&Ordinal::omega_mul(t as u64 + 1));
        let far = if far < *rho.bound() { far } else { top.add_nat(1000 * t as u64) };
        let built = match variant {
            0 => Ok(("identical".to_string(), phi.clone())),
            1 => fork_special(phi, k, &far, sched, rho, &mut fork).map(|s| (format!("fork-after-{k}"), s)),
            2 => {
                // prefix of length k, then relocated copies for as long as the
                // coded weights agree
                let mut next =
                    |i: usize, w: usize, after: Option<&Ordinal>| -> Result<(Vec00, Functional), SpaceError> {
                        if i < k {
                            return Ok((dep.xs[i].clone(), phi.functionals[i].clone()));
                        }
                        let a = after.cloned().unwrap_or_else(Ordinal::zero);
                        if i < n && w == phi.weights[i] {
                            let floor = a.clone().max(top.clone());
                            if let Some(b) = copy_bases(rho, &floor).into_iter().next() {
                                let f = relocate(&phi.functionals[i], &b, sched)?;
                                let x = relocate_vec(&dep.xs[i], &b);
                                return Ok((x, f));
                            }
                        }
                        let mut src = PairSource::new(a, 100_000);
                        src.next_pair(i, w, None, sched)
                    };
                let ps = phi.ps.clone();
                let floor = move |i: usize| ps.get(i).copied().unwrap_or(0);
                build_with(
                    BuildPlan {
                        j,
                        len: n,
                        start: Some(phi.weights[0]),
                        next: &mut next,
                        p_floor: &floor,
                        truncate: true,
                    },
                    sched,
                    rho,
                    &mut fork,
                )
                .map(|s| (format!("copy-after-{k}"), s))
            }
            _ => {
                let start = (phi.weights[0] + 4..=sched.len()).step_by(4).next();
                match start {
                    Some(s) => {
                        let mut src = PairSource::new(far.clone(), 100_000);
                        let mut next = |i: usize, w: usize, after: Option<&Ordinal>| src.next_pair(i, w, after, sched);
                        build_with(
                            BuildPlan { j, len: n, start: Some(s), next: &mut next, p_floor: &|_| 0, truncate: true },
                            sched,
                            rho,
                            &mut fork,
                        )
                        .map(|s| ("other-start".to_string(), s))
                    }
                    None => Err(SpaceError::ScheduleExhausted { need: phi.weights[0] + 4, len: sched.len() }),
                }
            }
        };
        if let Ok(s) = built {
            pool.push(s);
        }
    }
    pool
}

/// Builds a dependent sequence of length `len` (default `n_{2j+1}`) from
/// canonical exact pairs and checks DS.1-DS.4, the last against
/// `adversaries` forked special sequences.
pub fn dependent_sequence_build(
    j: usize,
    len: Option<usize>,
    source: &mut PairSource,
    sched: &ParamSchedule,
    rho: &RhoFn,
    coding: &mut CodingState,
    adversaries: usize,
) -> Result<(DependentSequence, DependentReport), SpaceError> {
    let odd = 2 * j + 1;
    if j == 0 || odd > sched.len() {
        return Err(SpaceError::ScheduleExhausted { need: odd, len: sched.len() });
    }
    let len = len.unwrap_or_else(|| sched.n_capped(odd, 64));
    let special = build_special_sequence(source, j, len, sched, rho, coding)?;
    let dep = DependentSequence { xs: special.paired.clone(), special };
    let phi = &dep.special;
    let blocks: Vec<Vec00> = dep.xs.iter().zip(&phi.values).map(|(x, f)| x.add(&f.abs())).collect();
    let ds1 = blocks.windows(2).all(|w| w[0].max_index() < w[1].min_index());
    let ds2 = verify_special(phi, sched, rho, coding)?;
    let six = q_u(6);
    let mut ds3 = Vec::new();
    for i in 0..len {
        ds3.push(exact_pair_check(&dep.xs[i], &phi.functionals[i], &six, phi.weights[i], sched, 2)?);
    }
    let n2 = sched.n_q(odd) * sched.n_q(odd);
    let ds3_support = (0..len)
        .map(|i| match phi.weights.get(i + 1) {
            Some(&w) => q_u(dep.xs[i].len()) <= sched.m_q(w) / &n2,
            None => true,
        })
        .collect();
    let mut ds4 = Vec::new();
    for (kind, psi) in adversary_pool(&dep, adversaries, sched, rho, coding) {
        let rep = tree_interference(phi, &psi, rho)?;
        ds4.push(AdversaryResult {
            kind,
            len: psi.len(),
            kappa: rep.kappa,
            lambda: rep.lambda,
            tree_like: rep.pass(),
            notes: rep.notes.clone(),
            ds4: ds4_holds(&dep, &psi, &rep),
        });
    }
    let mut waivers: BTreeSet<String> = phi.waivers.iter().cloned().collect();
    if !sched.paper_exact() {
        waivers.insert("exact-pair-bounds".into());
        waivers.insert("ds3-support".into());
    }
    let report = DependentReport { ds1, ds2, ds3, ds3_support, ds4, waivers: waivers.into_iter().collect() };
    Ok((dep, report))
}

#[derive(Clone, Debug, Serialize)]
pub struct HiDemo {
    pub len: usize,
    pub odd_index: usize,
    /// `(1/m_{2j+1}) sum phi_i` on the plain average
    #[serde(serialize_with = "ser_q")]
    pub plain_lower: Q,
    #[serde(serialize_with = "ser_q")]
    pub plain_upper: Q,
    #[serde(serialize_with = "ser_q")]
    pub alternating_lower: Q,
    #[serde(serialize_with = "ser_q")]
    pub alternating_upper: Q,
    /// `alternating_upper < plain_lower`
    pub separated: bool,
    pub waivers: Vec<String>,
}

/// Compares the plain average `(1/n) sum x_i` (lower bound from the special
/// functional, exactly `1/m_{2j+1}`) with the alternating average
/// `(1/n) sum (-1)^{i+1} x_i` (upper bound from [`k_norm_bounds`]).
pub fn alternating_sum_demo(
    dep: &DependentSequence,
    sched: &ParamSchedule,
    rho: &RhoFn,
    coding: &mut CodingState,
    budget: usize,
) -> Result<HiDemo, SpaceError> {
    let n = dep.xs.len();
    let odd = dep.special.odd_index();
    if n == 0 {
        return Ok(HiDemo {
            len: 0,
            odd_index: odd,
            plain_lower: Q::zero(),
            plain_upper: Q::zero(),
            alternating_lower: Q::zero(),
            alternating_upper: Q::zero(),
            separated: false,
            waivers: Vec::new(),
        });
    }
    let inv = Q::one() / q_u(n);
    let mut plain = Vec00::zero();
    let mut alt = Vec00::zero();
    for (i, x) in dep.xs.iter().enumerate() {
        plain = plain.add(x);
        alt = if i % 2 == 0 { alt.add(x) } else { alt.sub(x) };
    }
    let plain = plain.scale(&inv);
    let alt = alt.scale(&inv);
    let plain_lower = eval_functional(&dep.special.special_functional(), &plain, sched)?;
    let plain_upper = tsirelson_norm(&plain, sched);
    let kb = k_norm_bounds(&alt, sched, rho, coding, budget)?;
    let mut waivers: BTreeSet<String> = dep.special.waivers.iter().cloned().collect();
    waivers.extend(kb.waivers.iter().cloned());
    Ok(HiDemo {
        len: n,
        odd_index: odd,
        separated: kb.upper < plain_lower,
        plain_lower,
        plain_upper,
        alternating_lower: kb.lower,
        alternating_upper: kb.upper,
        waivers: waivers.into_iter().collect(),
    })
}

/// Restriction rules of the norming family.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FamilyRules {
    /// odd-weight functionals may be restricted to arbitrary subsets
    pub unconditional: bool,
}

/// `target phi` when the family admits it: interval restrictions always,
/// arbitrary subsets only for odd weights under the unconditional rule.
pub fn restrict_in_family(phi: &Functional, target: &Restriction, rules: FamilyRules) -> Option<Option<Functional>> {
    match target {
        Restriction::Interval(i) => Some(phi.restrict_interval(i)),
        Restriction::Set(s) => {
            let odd = phi.weight_of().is_some_and(|j| j % 2 == 1);
            (rules.unconditional && odd).then(|| phi.restrict_set(s))
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RestrictionAudit {
    pub checked: usize,
    pub admitted: usize,
    pub refused: usize,
    pub failures: Vec<String>,
}

impl RestrictionAudit {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// For every functional and every interval between support points (and,
/// under the unconditional rule, every subset of the support of odd-weight
/// functionals up to `max_sets`), checks that an admitted restriction is a
/// valid tree whose value is the restricted vector, and that a refused one is
/// refused for the documented reason.
pub fn audit_restrictions(
    family: &[Functional],
    rules: FamilyRules,
    sched: &ParamSchedule,
    max_sets: usize,
) -> Result<RestrictionAudit, SpaceError> {
    let mut audit = RestrictionAudit::default();
    for phi in family {
        let v = phi.to_vec(sched)?;
        let pts = v.support();
        let e = pts.elements();
        let mut targets = Vec::new();
        for a in 0..e.len() {
            for b in a..e.len() {
                targets.push(Restriction::Interval(Interval::new(e[a].clone(), e[b].clone())));
            }
        }
        let subsets = (1u64 << e.len().min(16)).min(max_sets as u64 + 1);
        for mask in 1..subsets {
            let s: FinOrdSet =
                e.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, a)| a.clone()).collect();
            targets.push(Restriction::Set(s));
        }
        for t in targets {
            audit.checked += 1;
            let expect = match &t {
                Restriction::Interval(i) => v.restrict_interval(i),
                Restriction::Set(s) => v.restrict(&crate::vectors::Region::Set(s.clone())),
            };
            match restrict_in_family(phi, &t, rules) {
                Some(r) => {
                    audit.admitted += 1;
                    let got = match &r {
                        Some(f) => {
                            let rep = tree_analysis_validate(f, sched);
                            if !rep.pass {
                                audit.failures.push(format!("{f}: {:?}", rep.violation));
                            }
                            f.to_vec(sched)?
                        }
                        None => Vec00::zero(),
                    };
                    if got != expect {
                        audit.failures.push(format!("restriction of {phi} to {t} has the wrong value"));
                    }
                }
                None => {
                    audit.refused += 1;
                    let allowed = matches!(t, Restriction::Interval(_))
                        || (rules.unconditional && phi.weight_of().is_some_and(|j| j % 2 == 1));
                    if allowed {
                        audit.failures.push(format!("restriction of {phi} to {t} refused"));
                    }
                }
            }
        }
    }
    Ok(audit)
}

#[derive(Clone, Debug, Serialize)]
pub struct Lkio1Report {
    #[serde(serialize_with = "ser_qs")]
    pub r: Vec<Q>,
    #[serde(serialize_with = "ser_q")]
    pub left: Q,
    #[serde(serialize_with = "ser_q")]
    pub right: Q,
    /// value of the transported functional on `x_1 + ... + x_n`
    #[serde(serialize_with = "ser_q")]
    pub transported: Q,
    pub pass: bool,
}

/// `||sum r_i v_i||_J <= ||x_1 + ... + x_n||` with `r_i = phi(x_i)`.  Every
/// operation of `sched` counts as an even operation, so its mixed Tsirelson
/// norm is the base of the James-like norm.  The right side is certified by
/// the even-operation lower bound together with the functional obtained by
/// sending each interval `I` of an optimal system to
/// `phi | [min supp x_{min I}, max supp x_{max I}]`.
pub fn lkio1_check(xs: &[Vec00], phi: &Functional, sched: &ParamSchedule) -> Result<Lkio1Report, SpaceError> {
    if xs.iter().any(|x| x.is_zero()) || xs.windows(2).any(|w| w[0].max_index() >= w[1].min_index()) {
        return Err(SpaceError::Precondition("not a block sequence".into()));
    }
    let pv = phi.to_vec(sched)?;
    let r: Vec<Q> = xs.iter().map(|x| act(&pv, x)).collect();
    let rv = Vec00::from_pairs(r.iter().enumerate().map(|(i, q)| (Ordinal::nat(i as u64 + 1), q.clone())));
    let positions: Vec<usize> = r.iter().enumerate().filter(|(_, q)| !q.is_zero()).map(|(i, _)| i).collect();
    let (left, wit) = james_norm_with(&rv, &|vals: &[Q]| crate::norms::family_norm_values(vals, sched, Family::T));
    let total = xs.iter().fold(Vec00::zero(), |a, x| a.add(x));
    let mut extra = Vec::new();
    if let Some(w) = wit {
        let nonzero: Vec<(usize, &Q)> = w.sums.iter().enumerate().filter(|(_, s)| !s.is_zero()).collect();
        let collapsed =
            Vec00::from_pairs(nonzero.iter().enumerate().map(|(k, (_, s))| (Ordinal::nat(k as u64), (*s).clone())));
        let (_, tree) = family_norm_witness(&collapsed, sched, Family::T);
        let intervals: Vec<Interval> = nonzero
            .iter()
            .map(|(b, _)| {
                let blk = &w.blocks[*b];
                let first = positions[blk[0]];
                let last = positions[*blk.last().unwrap()];
                Interval::new(xs[first].min_index().unwrap().clone(), xs[last].max_index().unwrap().clone())
            })
            .collect();
        if let Some(t) = tree {
            if let Some(f) = transport(&t, phi, &intervals) {
                extra.push(f);
            }
        }
    }
    let transported = match extra.first() {
        Some(f) => eval_functional(f, &total, sched)?,
        None => Q::zero(),
    };
    let (right, _) = k_norm_even_lower(&total, sched, Family::T, &extra)?;
    Ok(Lkio1Report { pass: left <= right, r, left, right, transported })
}

fn transport(tree: &Functional, phi: &Functional, intervals: &[Interval]) -> Option<Functional> {
    match tree {
        Functional::Basis { sign, index } => {
            let k = index.as_nat()? as usize;
            let f = phi.restrict_interval(&intervals[k])?;
            Some(if *sign < 0 { f.negate() } else { f })
        }
        Functional::Weighted { sign, j, children, .. } => {
            let kids: Vec<Functional> = children.iter().filter_map(|c| transport(c, phi, intervals)).collect();
            (!kids.is_empty()).then_some(Functional::Weighted { sign: *sign, j: *j, children: kids, restrict: None })
        }
        Functional::Convex(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectors::{int, rat};

    fn o(s: &str) -> Ordinal {
        Ordinal::parse(s).unwrap()
    }

    fn toy_long() -> ParamSchedule {
        let m: Vec<u64> = (2..=31).collect();
        let n: Vec<u64> = (9..=38).collect();
        ParamSchedule::from_u64(&m, &n).unwrap()
    }

    fn ladder() -> RhoFn {
        RhoFn::ladder(o("w^4"))
    }

    #[test]
    fn projection_example() {
        let rho = ladder();
        let t = QsTuple::new(vec![QsEntry { phi: Vec00::basis(o("5")), w: 1, p: 5 }]);
        let pr = qs_project(&t, &rho).unwrap();
        assert_eq!(pr.closure, (0..=5).map(Ordinal::nat).collect());
        assert_eq!(pr.functionals[0], Vec00::basis(o("6")));
        assert!(qs_project(&QsTuple::default(), &rho).is_err());
        let z = QsTuple::new(vec![QsEntry { phi: Vec00::zero(), w: 1, p: 5 }]);
        assert!(qs_project(&z, &rho).is_err());
    }

    #[test]
    fn sigma_examples() {
        let rho = ladder();
        let mut c = CodingState::toy();
        let t = QsTuple::new(vec![QsEntry { phi: Vec00::basis(o("5")), w: 1, p: 5 }]);
        assert_eq!(sigma_rho(&t, &mut c, &rho).unwrap(), 2);
        assert_eq!(sigma_rho(&t, &mut c, &rho).unwrap(), 2);
        let u = QsTuple::new(vec![QsEntry { phi: Vec00::basis(o("4")), w: 1, p: 5 }]);
        assert_eq!(sigma_rho(&u, &mut c, &rho).unwrap(), 6);
        let mut s = CodingState::strict(30);
        // threshold max{25, 1, 6} = 25
        assert_eq!(sigma_rho(&t, &mut s, &rho).unwrap(), 26);
        let mut short = CodingState::strict(10);
        assert!(matches!(sigma_rho(&t, &mut short, &rho), Err(SpaceError::ScheduleExhausted { .. })));
    }

    #[test]
    fn codes_follow_projections() {
        let rho = ladder();
        let mut c = CodingState::toy();
        let t = |s: &str, p| QsTuple::new(vec![QsEntry { phi: Vec00::parse(s).unwrap(), w: 2, p }]);
        let a = sigma_rho(&t("w+1:1/2, w+2:1/2", 3), &mut c, &rho).unwrap();
        let mut f = c.fork();
        assert_eq!(sigma_rho(&t("w+1:1/2, w+2:1/2", 3), &mut f, &rho).unwrap(), a);
        assert_ne!(sigma_rho(&t("w+1:1/2, w+2:1/2", 4), &mut f, &rho).unwrap(), a);
        assert_ne!(sigma_rho(&t("w*2+1:1/2, w*2+2:1/2", 3), &mut c, &rho).unwrap(), a);
        assert_eq!(f.marker(), &[1]);
    }

    #[test]
    fn special_sequences() {
        let s = toy_long();
        let rho = ladder();
        let mut c = CodingState::toy();
        let mut src = PairSource::new(o("w*2"), 1000);
        let one = build_special_sequence(&mut src, 1, 1, &s, &rho, &mut c).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one.weights, vec![4]);
        let mut c = CodingState::toy();
        let mut src = PairSource::new(o("w*2"), 1000);
        let two = build_special_sequence(&mut src, 1, 2, &s, &rho, &mut c).unwrap();
        let code = sigma_rho(&two.tuple(1), &mut c.clone(), &rho).unwrap();
        assert_eq!(two.weights[1], code);
        assert!(verify_special(&two, &s, &rho, &c).unwrap().is_empty());
        assert!(two.waivers.contains(&"start-weight".to_string()));
        let mut c2 = CodingState::toy();
        let mut src2 = PairSource::new(o("w*2"), 1000);
        let again = build_special_sequence(&mut src2, 1, 2, &s, &rho, &mut c2).unwrap();
        assert_eq!(again.values, two.values);
        assert_eq!(again.weights, two.weights);
    }

    #[test]
    fn interference_identical_and_disjoint() {
        let s = toy_long();
        let rho = ladder();
        let mut c = CodingState::toy();
        let mut src = PairSource::new(o("w*2"), 1000);
        let phi = build_special_sequence(&mut src, 1, 3, &s, &rho, &mut c).unwrap();
        let r = tree_interference(&phi, &phi, &rho).unwrap();
        assert_eq!((r.kappa, r.lambda), (0, 3));
        assert!(r.pass());
        let mut f = c.fork();
        let mut src = PairSource::new(o("w*5"), 1000);
        let mut next = |i: usize, w: usize, after: Option<&Ordinal>| src.next_pair(i, w, after, &s);
        let psi = build_with(
            BuildPlan { j: 1, len: 3, start: Some(8), next: &mut next, p_floor: &|_| 0, truncate: true },
            &s,
            &rho,
            &mut f,
        )
        .unwrap();
        let r = tree_interference(&phi, &psi, &rho).unwrap();
        assert_eq!((r.kappa, r.lambda), (0, 0));
        assert!(r.tp4 && r.pass());
    }

    #[test]
    fn incompatible_codings() {
        let s = toy_long();
        let rho = ladder();
        let mut c1 = CodingState::toy();
        let mut c2 = CodingState::toy();
        let a = build_special_sequence(&mut PairSource::new(o("w*2"), 1000), 1, 2, &s, &rho, &mut c1).unwrap();
        let b = build_special_sequence(&mut PairSource::new(o("w*6"), 1000), 1, 2, &s, &rho, &mut c2).unwrap();
        assert!(matches!(tree_interference(&a, &b, &rho), Err(SpaceError::Incompatible(_))));
    }

    #[test]
    fn tree_validation() {
        let s = ParamSchedule::from_u64(&[2], &[3]).unwrap();
        let leaf = Functional::basis(o("w"));
        assert!(tree_analysis_validate(&leaf, &s).pass);
        let four = Functional::weighted(1, (1..=4).map(|i| Functional::basis(Ordinal::nat(i))).collect());
        let r = tree_analysis_validate(&four, &s);
        assert_eq!(r.violation.unwrap().clause, "3.a");
        let e = |i| Functional::basis(Ordinal::nat(i));
        let plus = Functional::weighted(1, vec![e(1), e(3)]);
        let minus = Functional::weighted(1, vec![e(1), e(3).negate()]);
        let conv = Functional::Convex(vec![(rat(1, 2), plus), (rat(1, 2), minus)]);
        let r = tree_analysis_validate(&conv, &s);
        assert_eq!(r.violation.as_ref().unwrap().clause, "4");
        assert_eq!(r.violation.unwrap().path, vec![0]);
        let restricted =
            Functional::weighted(1, vec![e(1), e(2), e(3)]).restrict_interval(&Interval::new(o("2"), o("3"))).unwrap();
        assert!(tree_analysis_validate(&restricted, &s).pass);
    }

    #[test]
    fn k_bounds_examples() {
        let s = toy_long();
        let rho = ladder();
        let mut c = CodingState::toy();
        let b = k_norm_bounds(&Vec00::basis(o("w+1")), &s, &rho, &mut c, 50).unwrap();
        assert_eq!((b.lower, b.upper), (int(1), int(1)));
        let x = Vec00::parse("1:3/2, 2:-1/2, 3:1").unwrap();
        let b = k_norm_bounds(&x, &s, &rho, &mut c, 50).unwrap();
        assert!(b.lower >= rat(3, 2) && b.lower <= b.upper);
        // n_2 ones and the explicit even functional (1/m_2) sum e^*
        let sched = ParamSchedule::from_u64(&[2, 4], &[3, 5]).unwrap();
        let y = Vec00::from_pairs((1..=5).map(|i| (Ordinal::nat(i), int(1))));
        let b = k_norm_bounds(&y, &sched, &rho, &mut c, 10).unwrap();
        assert!(b.lower >= rat(5, 4));
        let small = k_norm_bounds(&y, &toy_long(), &rho, &mut CodingState::toy(), 1).unwrap();
        let large = k_norm_bounds(&y, &toy_long(), &rho, &mut CodingState::toy(), 40).unwrap();
        assert!(small.lower <= large.lower);
    }

    #[test]
    fn l1k_examples() {
        let s = ParamSchedule::from_u64(&[2], &[3]).unwrap();
        let blocks: Vec<Vec00> = (1..=3).map(|i| Vec00::basis(Ordinal::nat(i))).collect();
        let avg = l1k_average_find(&blocks, 3, &int(2), &s, 100).unwrap();
        assert_eq!(avg.y, Vec00::from_pairs((1..=3).map(|i| (Ordinal::nat(i), rat(2, 3)))));
        assert!(avg.part_norms.iter().all(|n| *n == int(2)));
        let one = l1k_average_find(&blocks, 1, &int(1), &s, 100).unwrap();
        assert_eq!(tsirelson_norm(&one.y, &s), int(1));
        assert!(l1k_average_find(&blocks, 3, &int(1), &s, 100).is_err());
        let r = risav_check(&avg, 2, &s).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn ris_examples() {
        let s = ParamSchedule::from_u64(&[2, 4], &[3, 5]).unwrap();
        let xs: Vec<Vec00> = ["1", "w", "w+7"].iter().map(|a| Vec00::basis(o(a))).collect();
        assert!(ris_check(&xs, &int(1), &rat(1, 100), &s, 2).unwrap().pass);
        let single = [Vec00::parse("1:2, 2:1").unwrap()];
        assert!(!ris_check(&single, &int(1), &rat(1, 2), &s, 2).unwrap().pass);
        assert!(ris_check(&single, &int(2), &rat(1, 2), &s, 2).unwrap().pass);
        let big = [Vec00::parse("1:1/4, 2:1/4, 3:1/4, 4:1/4").unwrap(), Vec00::basis(o("9"))];
        let r = ris_check(&big, &int(1), &rat(1, 2), &s, 2).unwrap();
        assert_eq!(r.witness, vec![1, 3]);
    }

    #[test]
    fn exact_pair_examples() {
        let s = ParamSchedule::from_u64(&[2, 4], &[3, 5]).unwrap();
        let pts: Vec<Ordinal> = (1..=5).map(Ordinal::nat).collect();
        let (x, phi) = canonical_pair(&pts, 2, &s);
        let r = exact_pair_check(&x, &phi, &int(6), 2, &s, 2).unwrap();
        assert_eq!(r.value, int(1));
        assert!(r.core_pass() && !r.asserted);
        let r = exact_pair_check(&x.scale(&int(2)), &phi, &int(6), 2, &s, 2).unwrap();
        assert!(!r.value_ok && !r.pass());
    }

    #[test]
    fn niceasris_examples() {
        let s = ParamSchedule::from_u64(&[2, 4], &[3, 5]).unwrap();
        let xs: Vec<Vec00> = (1..=4).map(|i| Vec00::basis(Ordinal::nat(i))).collect();
        let r = niceasris_check(&xs, &int(1), &rat(1, 5), 2, &s, 2).unwrap();
        let top = r.bounds.iter().find(|b| b.i == 2).unwrap();
        assert_eq!(top.bound, rat(1, 4) + rat(2, 5));
        assert!(top.pass);
        assert!(niceasris_check(&xs[..1], &int(1), &rat(1, 5), 2, &s, 2).is_err());
    }

    #[test]
    fn dependent_and_demo() {
        let s = toy_long();
        let rho = ladder();
        let mut c = CodingState::toy();
        let mut src = PairSource::new(o("w*2"), 10_000);
        let (dep, rep) = dependent_sequence_build(1, Some(3), &mut src, &s, &rho, &mut c, 8).unwrap();
        assert!(rep.ds1 && rep.ds2.is_empty(), "{rep:?}");
        assert!(rep.ds3.iter().all(|r| r.core_pass()));
        assert!(rep.ds4.iter().all(|a| a.ds4 && a.tree_like), "{:?}", rep.ds4);
        let own = tree_interference(&dep.special, &dep.special, &rho).unwrap();
        assert_eq!((own.kappa, own.lambda), (0, 3));
        let demo = alternating_sum_demo(&dep, &s, &rho, &mut c, 20).unwrap();
        assert_eq!(demo.plain_lower, Q::one() / s.m_q(3));
        assert_eq!(demo.alternating_upper, demo.plain_upper);
        assert!(!demo.separated);
        let mut src = PairSource::new(o("w*2"), 10_000);
        let (one, rep) = dependent_sequence_build(1, Some(1), &mut src, &s, &rho, &mut CodingState::toy(), 2).unwrap();
        assert_eq!(one.xs.len(), 1);
        assert!(rep.ds1 && rep.ds2.is_empty());
    }

    #[test]
    fn restriction_rules() {
        let s = ParamSchedule::from_u64(&[2, 4], &[3, 5]).unwrap();
        let e = |i| Functional::basis(Ordinal::nat(i));
        let odd = Functional::weighted(1, vec![e(1), e(2), e(3)]);
        let even = Functional::weighted(2, vec![e(1), e(2), e(3)]);
        let set = Restriction::Set(FinOrdSet::parse("1,3").unwrap());
        assert!(restrict_in_family(&odd, &set, FamilyRules { unconditional: false }).is_none());
        assert!(restrict_in_family(&odd, &set, FamilyRules { unconditional: true }).is_some());
        assert!(restrict_in_family(&even, &set, FamilyRules { unconditional: true }).is_none());
        for u in [false, true] {
            let a = audit_restrictions(&[odd.clone(), even.clone()], FamilyRules { unconditional: u }, &s, 64).unwrap();
            assert!(a.pass(), "{a:?}");
        }
    }

    #[test]
    fn lkio1_examples() {
        let s = ParamSchedule::from_u64(&[2], &[3]).unwrap();
        let xs = [Vec00::basis(o("1")), Vec00::basis(o("2"))];
        let phi = Functional::weighted(1, vec![Functional::basis(o("1")), Functional::basis(o("2"))]);
        let r = lkio1_check(&xs, &phi, &s).unwrap();
        assert_eq!((r.left.clone(), r.right.clone()), (int(1), int(1)));
        assert!(r.pass);
        let r = lkio1_check(&xs, &Functional::basis(o("1")), &s).unwrap();
        assert_eq!(r.left, int(1));
        assert!(r.pass);
    }
}
