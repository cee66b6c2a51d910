//! Named invariant suites.  Each case is exact; the seed only fixes which
//! fuzz inputs are drawn.

use std::collections::HashMap;

use num::{BigRational, BigUint, One, Signed};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use tn_core::norms::{
    basis_estimate_check, james_norm, norming_enumerate, schedule_paper, tsirelson_norm, EnumOracle, Family,
    Functional, ParamSchedule,
};
use tn_core::rho::{build_universal_rho, models_isomorphic, verify_rho_axioms, RhoFn, RhoModel};
use tn_core::space::{
    alternating_sum_demo, audit_restrictions, build_special_sequence, canonical_pair, dependent_sequence_build,
    exact_pair_check, fork_special, l1k_average_find, lkio1_check, risav_check, sigma_rho, start_weight,
    tree_analysis_validate, tree_interference, CodingMode, CodingState, FamilyRules, PairSource, QsEntry, QsTuple,
};
use tn_core::vectors::{int, rat, Interval, Vec00, Q};
use tn_core::{FinOrdSet, Ordinal};

use crate::{queue_targets, CliError, Report, RunConfig};

pub const SUITES: &[&str] = &[
    "oracle-equivalence",
    "symmetries",
    "closure-laws",
    "rho-axioms",
    "universality",
    "smoothness",
    "interference",
    "lkio1",
    "hi-demo",
    "james",
    "schedule",
    "space-checks",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// a relaxed check; counted separately and never fails the suite
    Reported,
}

#[derive(Clone, Debug, Serialize)]
pub struct Case {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub cases: Vec<Case>,
    pub passed: usize,
    pub failed: usize,
    pub reported: usize,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }

    pub fn case(&self, name: &str) -> Option<&Case> {
        self.cases.iter().find(|c| c.name == name)
    }
}

struct Cases(Vec<Case>);

impl Cases {
    fn check(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        let status = if ok { Status::Pass } else { Status::Fail };
        self.0.push(Case { name: name.into(), status, detail: detail.into() });
    }

    fn report(&mut self, name: impl Into<String>, detail: impl Into<String>) {
        self.0.push(Case { name: name.into(), status: Status::Reported, detail: detail.into() });
    }
}

fn o(s: &str) -> Ordinal {
    Ordinal::parse(s).expect("static ordinal")
}

fn rng(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn rand_q(r: &mut ChaCha8Rng) -> Q {
    let n = r.gen_range(1..=6i64) * if r.gen_bool(0.5) { 1 } else { -1 };
    rat(n, r.gen_range(1..=4))
}

/// A random increasing set of `k` ordinals `w*a + b` with `a < 4`, `b < 12`.
fn rand_support(r: &mut ChaCha8Rng, k: usize) -> Vec<Ordinal> {
    let mut all: Vec<Ordinal> =
        (0..4u64).flat_map(|a| (0..12u64).map(move |b| Ordinal::omega_mul(a).add_nat(b))).collect();
    all.shuffle(r);
    let mut pts: Vec<Ordinal> = all.into_iter().take(k).collect();
    pts.sort();
    pts
}

fn rand_vector(r: &mut ChaCha8Rng, max: usize) -> Vec00 {
    let k = r.gen_range(1..=max);
    Vec00::from_pairs(rand_support(r, k).into_iter().map(|a| (a, rand_q(r))))
}

pub fn toy_schedule() -> ParamSchedule {
    ParamSchedule::toy(30).expect("toy schedule")
}

pub fn enumeration_schedule() -> ParamSchedule {
    ParamSchedule::from_u64(&[2, 4], &[3, 5]).expect("schedule")
}

/// Ladder, smooth, and a universal rho carrying the models of size `<= 2`.
pub fn rho_instances() -> Vec<(&'static str, RhoFn)> {
    let queue = queue_targets(RhoModel::enumerate(2, 2));
    let (uni, _) = build_universal_rho(o("w*8"), &queue).expect("small queue fits");
    vec![("ladder", RhoFn::ladder(o("w^3"))), ("smooth", RhoFn::smooth(o("w^3"))), ("universal", uni)]
}

pub fn run_suite(name: &str, cfg: &RunConfig) -> Result<SuiteReport, CliError> {
    let mut c = Cases(Vec::new());
    match name {
        "oracle-equivalence" => oracle_equivalence(&mut c),
        "symmetries" => symmetries(&mut c, cfg.seed),
        "closure-laws" => closure_laws(&mut c)?,
        "rho-axioms" => rho_axioms(&mut c, cfg.seed),
        "universality" => universality(&mut c)?,
        "smoothness" => smoothness(&mut c)?,
        "interference" => interference(&mut c)?,
        "lkio1" => lkio1(&mut c, cfg.seed)?,
        "hi-demo" => hi_demo(&mut c, cfg.budget)?,
        "james" => james(&mut c, cfg.seed),
        "schedule" => schedule(&mut c),
        "space-checks" => space_checks(&mut c)?,
        other => return Err(CliError::Usage(format!("unknown suite {other:?}; known: {}", SUITES.join(", ")))),
    }
    let count = |s| c.0.iter().filter(|k| k.status == s).count();
    Ok(SuiteReport {
        suite: name.into(),
        seed: cfg.seed,
        passed: count(Status::Pass),
        failed: count(Status::Fail),
        reported: count(Status::Reported),
        cases: c.0,
    })
}

pub fn cmd_suite(cfg: &RunConfig, name: &str) -> Result<Report, CliError> {
    if name == "list" {
        return Ok(Report::new("suite list", SUITES.join("\n"), serde_json::json!(SUITES)));
    }
    let rep = run_suite(name, cfg)?;
    let mut text = String::new();
    for k in &rep.cases {
        let tag = match k.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Reported => "REPORTED",
        };
        text.push_str(&format!("{tag} {} {}\n", k.name, k.detail));
    }
    text.push_str(&format!("{}: {} passed, {} failed, {} reported", rep.suite, rep.passed, rep.failed, rep.reported));
    let mut r = Report::new(&format!("suite {name}"), text, serde_json::to_value(&rep).expect("serializable"));
    if rep.reported > 0 && name == "space-checks" {
        r.waivers.push("toy-schedule".into());
    }
    r.failed = !rep.ok();
    Ok(r)
}

/// Every coefficient pattern of length `s` over `values`.
fn patterns(values: &[Q], s: usize) -> Vec<Vec<Q>> {
    let mut out = vec![Vec::new()];
    for _ in 0..s {
        out = out
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(v.clone());
                    q
                })
            })
            .collect();
    }
    out
}

fn oracle_equivalence(c: &mut Cases) {
    let sched = enumeration_schedule();
    let pts: Vec<Ordinal> = ["1", "2", "5", "w", "w+1", "w+4", "w*2", "w*2+3"].iter().map(|s| o(s)).collect();
    let coeffs = [int(1), int(-1), rat(1, 2), rat(-1, 2), int(2), int(-2)];
    for s in 1..=5usize {
        let Some(oracle) = EnumOracle::new(s, &sched, s, Family::T) else {
            c.check(format!("support-{s}"), false, "enumeration did not fit");
            continue;
        };
        let mut bad = 0;
        let mut total = 0;
        // the enumerated maximum only sees `|x|`
        let mut seen: HashMap<Vec<Q>, Q> = HashMap::new();
        for (t, pat) in patterns(&coeffs, s).into_iter().enumerate() {
            let off = t % (pts.len() - s + 1);
            let x = Vec00::from_pairs(pts[off..off + s].iter().cloned().zip(pat));
            total += 1;
            let abs = x.abs_values();
            let want = seen.entry(abs.clone()).or_insert_with(|| oracle.max_value(&abs)).clone();
            if tsirelson_norm(&x, &sched) != want {
                bad += 1;
            }
        }
        c.check(
            format!("support-{s}"),
            bad == 0,
            format!("{total} vectors, {} functionals, {bad} mismatches", oracle.len()),
        );
    }
}

fn symmetries(c: &mut Cases, seed: u64) {
    let sched = enumeration_schedule();
    let mut r = rng(seed, 2);
    let (mut unc, mut sub) = (0, 0);
    for _ in 0..1000 {
        let x = rand_vector(&mut r, 7);
        let v = tsirelson_norm(&x, &sched);
        let flipped =
            Vec00::from_pairs(x.iter().map(|(a, q)| (a.clone(), if r.gen_bool(0.5) { -q.clone() } else { q.clone() })));
        if tsirelson_norm(&flipped, &sched) != v {
            unc += 1;
        }
        let target = rand_support(&mut r, x.len());
        let spread = Vec00::from_pairs(target.into_iter().zip(x.values().cloned()));
        if tsirelson_norm(&spread, &sched) != v {
            sub += 1;
        }
    }
    c.check("unconditional", unc == 0, format!("1000 vectors, {unc} mismatches"));
    c.check("subsymmetric", sub == 0, format!("1000 vectors, {sub} mismatches"));
}

/// Closures of subsets of a fixed sample, keyed by bit mask, and closures of
/// arbitrary sets keyed by their rendering.
struct Closures<'a> {
    rho: &'a RhoFn,
    sample: &'a [Ordinal],
    masks: HashMap<(u32, u64), FinOrdSet>,
    sets: HashMap<(String, u64), FinOrdSet>,
    ps: HashMap<u32, u64>,
}

impl Closures<'_> {
    fn set(&self, mask: u32) -> FinOrdSet {
        self.sample.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, a)| a.clone()).collect()
    }

    fn p(&mut self, mask: u32) -> Result<u64, CliError> {
        if let Some(p) = self.ps.get(&mask) {
            return Ok(*p);
        }
        let s = self.set(mask);
        let p = if s.len() < 2 { 0 } else { self.rho.p_of(&s)? };
        self.ps.insert(mask, p);
        Ok(p)
    }

    fn cl_mask(&mut self, mask: u32, p: u64) -> Result<FinOrdSet, CliError> {
        if let Some(s) = self.masks.get(&(mask, p)) {
            return Ok(s.clone());
        }
        let s = self.cl(&self.set(mask), p)?;
        self.masks.insert((mask, p), s.clone());
        Ok(s)
    }

    fn cl(&mut self, set: &FinOrdSet, p: u64) -> Result<FinOrdSet, CliError> {
        if set.is_empty() {
            return Ok(FinOrdSet::new());
        }
        let key = (set.to_string(), p);
        if let Some(s) = self.sets.get(&key) {
            return Ok(s.clone());
        }
        let s = self.rho.closure(set, p)?;
        self.sets.insert(key, s.clone());
        Ok(s)
    }
}

fn is_initial_part(a: &FinOrdSet, b: &FinOrdSet) -> bool {
    a.is_subset(b) && a.max().is_none_or(|m| b.up_to(m) == *a)
}

/// Monotonicity and idempotence on every subset of the sample, and the three
/// clauses of the intersection proposition on the `p`-closed sets
/// `cl(F, p)`, `cl(G, p)` with `p = max(p_F, p_G)`.  The proofs of the
/// clauses use `p`-closedness; on arbitrary sets the literal statements fail
/// and the counterexamples are reported.
fn closure_laws(c: &mut Cases) -> Result<(), CliError> {
    let sample: Vec<Ordinal> = ["2", "5", "w", "w+1", "w+4", "w*2+1", "w*3", "w*3+2"].iter().map(|s| o(s)).collect();
    let full = 1u32 << sample.len();
    for (label, rho) in rho_instances() {
        let mut k =
            Closures { rho: &rho, sample: &sample, masks: HashMap::new(), sets: HashMap::new(), ps: HashMap::new() };
        let (mut mono, mut idem, mut bounded, mut c1, mut c2, mut c3) = (0u64, 0u64, 0u64, 0u64, 0u64, 0u64);
        let (mut literal, mut literal1) = (0u64, 0u64);
        let (mut example, mut example1) = (String::new(), String::new());
        let mut pairs = 0u64;
        for f in 0..full {
            let pf = k.p(f)?;
            let raw = k.set(f);
            let cf = k.cl_mask(f, pf)?;
            for a in &sample {
                if k.cl(&raw.below(a), pf)? != cf.below(a) {
                    literal1 += 1;
                    if example1.is_empty() {
                        example1 = format!("F = {{{raw}}}, alpha = {a}, p = {pf}");
                    }
                }
            }
            for p in [pf, pf + 1] {
                let cf = k.cl_mask(f, p)?;
                if k.cl(&cf, p)? != cf {
                    idem += 1;
                }
                if cf.len() >= 2 && rho.p_of(&cf)? > p {
                    bounded += 1;
                }
                // clause 1 on the closed set, cut at each of its points and at the sample points
                for a in cf.iter().chain(&sample) {
                    let lhs = k.cl(&cf.below(a), p)?;
                    if lhs != cf.below(a) || !is_initial_part(&lhs, &cf) {
                        c1 += 1;
                    }
                }
            }
        }
        for f in 0..full {
            for g in 0..full {
                pairs += 1;
                let p = k.p(f)?.max(k.p(g)?);
                let (cf, cg) = (k.cl_mask(f, p)?, k.cl_mask(g, p)?);
                if f & g == f && !cf.is_subset(&cg) {
                    mono += 1;
                }
                let meet = cf.intersection(&cg);
                if k.cl(&meet, p)? != meet || !is_initial_part(&meet, &cf) || !is_initial_part(&meet, &cg) {
                    c3 += 1;
                }
                for a in meet.iter() {
                    let (fa, ga) = (cf.up_to(a), cg.up_to(a));
                    if k.cl(&fa, p)? != k.cl(&ga, p)? || fa != ga {
                        c2 += 1;
                    }
                }
                if k.cl_mask(f & g, p)? != meet {
                    literal += 1;
                    if example.is_empty() {
                        example = format!("F = {{{}}}, G = {{{}}}, p = {p}", k.set(f), k.set(g));
                    }
                }
            }
        }
        c.check(format!("{label}/monotone"), mono == 0, format!("{pairs} pairs, {mono} violations"));
        c.check(format!("{label}/idempotent"), idem == 0, format!("{idem} violations"));
        c.check(format!("{label}/p-bounded"), bounded == 0, format!("{bounded} violations"));
        c.check(format!("{label}/initial-segment"), c1 == 0, format!("{c1} violations"));
        c.check(format!("{label}/common-point"), c2 == 0, format!("{c2} violations"));
        c.check(format!("{label}/intersection"), c3 == 0, format!("{pairs} pairs, {c3} violations"));
        c.report(
            format!("{label}/initial-segment-unclosed"),
            format!("{literal1} cuts with cl(F&alpha) != cl F & alpha, e.g. {example1}"),
        );
        c.report(
            format!("{label}/intersection-unclosed"),
            format!("{literal} pairs with cl(F&G) != cl F & cl G, e.g. {example}"),
        );
    }
    Ok(())
}

fn rand_below(r: &mut ChaCha8Rng, bound: &Ordinal) -> Ordinal {
    loop {
        let a = Ordinal::omega_pow_mul(Ordinal::nat(2), r.gen_range(0..3))
            .add(&Ordinal::omega_mul(r.gen_range(0..4)))
            .add_nat(r.gen_range(0..8));
        if a < *bound {
            return a;
        }
    }
}

fn rho_axioms(c: &mut Cases, seed: u64) {
    let mut r = rng(seed, 4);
    for (label, rho) in rho_instances() {
        let mut bad = 0;
        let mut mism = 0;
        for _ in 0..500 {
            let set: FinOrdSet = loop {
                let s: FinOrdSet = (0..3).map(|_| rand_below(&mut r, rho.bound())).collect();
                if s.len() == 3 {
                    break s;
                }
            };
            let rep = verify_rho_axioms(&rho, &set);
            bad += rep.violations.len();
            mism += rep.level_mismatches.len();
        }
        c.check(label, bad == 0 && mism == 0, format!("500 triples, {bad} violations, {mism} level-set mismatches"));
    }
}

fn universality(c: &mut Cases) -> Result<(), CliError> {
    let models = RhoModel::enumerate(3, 3);
    let count = models.len() as u64;
    let queue = queue_targets(models);
    let (rho, certs) = build_universal_rho(Ordinal::omega_mul(count + 2), &queue)?;
    let mut bad = 0;
    for (cert, (model, target)) in certs.iter().zip(&queue) {
        let inside = cert.m1.iter().all(|a| a < &target.start || a.split_finite().0 == target.start.split_finite().0);
        let iso = models_isomorphic(&rho.model_of(&cert.m1)?, model);
        if !(cert.passes() && iso && inside) {
            bad += 1;
        }
    }
    c.check("certificates", bad == 0 && certs.len() == queue.len(), format!("{} models, {bad} failures", queue.len()));
    Ok(())
}

fn smoothness(c: &mut Cases) -> Result<(), CliError> {
    let rho = RhoFn::smooth(o("w^3"));
    for lam in ["w", "w*2", "w^2"] {
        let l = o(lam);
        let rep = rho.smoothness_report(&l, 64)?;
        c.check(format!("{lam}/ratio"), rep.rows.len() == 64, format!("max #F_n/n = {}", rep.max_ratio));
        if l.is_successor_limit() {
            let (gamma, _) = successor_limit_base(&l);
            let mut bad = 0;
            for n in 1..=64u64 {
                let fl = rho.f_n_set(&l, n)?.len() as u64;
                let fg = if gamma.is_zero() { 0 } else { rho.f_n_set(&gamma, n)?.len() as u64 };
                if fl > fg + 1 + (63 - n.leading_zeros() as u64) {
                    bad += 1;
                }
            }
            c.check(format!("{lam}/successor-bound"), bad == 0, format!("gamma = {gamma}, {bad} violations"));
        }
    }
    Ok(())
}

/// `lambda = gamma + w`.
fn successor_limit_base(l: &Ordinal) -> (Ordinal, ()) {
    let mut t = l.terms().to_vec();
    let last = t.pop().expect("nonzero");
    if last.coeff > 1 {
        t.push(tn_core::ordinals::Term { exp: last.exp, coeff: last.coeff - 1 });
    }
    (Ordinal::from_terms(t).unwrap_or_else(Ordinal::zero), ())
}

fn interference(c: &mut Cases) -> Result<(), CliError> {
    let sched = toy_schedule();
    let rho = RhoFn::ladder(o("w^4"));
    let mut pairs = 0;
    // below w^2 the ladder closures stay small
    for (base, far, fork_base) in [("w*2", "w*4", "w*5"), ("w*6", "w*8", "w*9")] {
        for len in 2..=6usize {
            let mut coding = CodingState::toy();
            let mut src = PairSource::new(o(base), 1_000_000);
            let phi = build_special_sequence(&mut src, 1, len, &sched, &rho, &mut coding)?;
            let same = tree_interference(&phi, &phi, &rho)?;
            pairs += 1;
            c.check(
                format!("{base}/len-{len}/identical"),
                same.pass() && same.kappa == 0 && same.lambda == len,
                format!("kappa = {} lambda = {}", same.kappa, same.lambda),
            );
            let mut fork = coding.fork();
            let mut src2 = PairSource::new(o(far), 1_000_000);
            let mut next = |i: usize, w: usize, after: Option<&Ordinal>| src2.next_pair(i, w, after, &sched);
            let other = tn_core::space::build_with(
                tn_core::space::BuildPlan {
                    j: 1,
                    len,
                    start: Some(phi.weights[0] + 4),
                    next: &mut next,
                    p_floor: &|_| 0,
                    truncate: true,
                },
                &sched,
                &rho,
                &mut fork,
            )?;
            let dis = tree_interference(&phi, &other, &rho)?;
            pairs += 1;
            c.check(
                format!("{base}/len-{len}/disjoint"),
                dis.pass() && dis.kappa == 0 && dis.lambda == 0,
                format!("kappa = {} lambda = {}", dis.kappa, dis.lambda),
            );
            for k in 1..len {
                let mut fork = coding.fork();
                let psi = fork_special(&phi, k, &o(fork_base), &sched, &rho, &mut fork)?;
                let rep = tree_interference(&phi, &psi, &rho)?;
                pairs += 1;
                c.check(
                    format!("{base}/len-{len}/fork-{k}"),
                    rep.pass() && rep.kappa == k + 1 && rep.kappa <= rep.lambda,
                    format!("kappa = {} lambda = {}", rep.kappa, rep.lambda),
                );
            }
        }
    }
    c.check("pair-count", pairs == 50, format!("{pairs} pairs"));
    Ok(())
}

fn lkio1(c: &mut Cases, seed: u64) -> Result<(), CliError> {
    let sched = enumeration_schedule();
    let mut r = rng(seed, 8);
    let mut trees: HashMap<usize, Vec<Functional>> = HashMap::new();
    let mut bad = 0;
    let mut detail = String::new();
    for case in 0..500 {
        let total = r.gen_range(2..=6usize);
        let pts = rand_support(&mut r, total);
        let blocks = r.gen_range(1..=total.min(4));
        let mut cuts: Vec<usize> = (1..total).collect();
        cuts.shuffle(&mut r);
        let mut cuts: Vec<usize> = cuts.into_iter().take(blocks - 1).collect();
        cuts.sort();
        cuts.push(total);
        let mut xs = Vec::new();
        let mut a = 0;
        for b in cuts {
            xs.push(Vec00::from_pairs(pts[a..b].iter().cloned().map(|p| (p, rand_q(&mut r)))));
            a = b;
        }
        let family = trees.entry(total).or_insert_with(|| {
            let sup: FinOrdSet = (0..total as u64).map(Ordinal::nat).collect();
            let depth = if total <= 4 { 3 } else { 2 };
            norming_enumerate(&sup, &sched, depth, Family::T).into_iter().map(|e| e.tree).collect()
        });
        let pick = family[r.gen_range(0..family.len())].clone();
        let phi = pick.map_indices(&|a| pts[a.as_nat().expect("position") as usize].clone());
        let rep = lkio1_check(&xs, &phi, &sched)?;
        if !rep.pass {
            bad += 1;
            if detail.is_empty() {
                detail = format!(" first at case {case}: {} > {}", rep.left, rep.right);
            }
        }
    }
    c.check("domination", bad == 0, format!("500 cases, {bad} violations{detail}"));
    Ok(())
}

fn hi_demo(c: &mut Cases, budget: usize) -> Result<(), CliError> {
    let sched = toy_schedule();
    let rho = RhoFn::ladder(o("w^4"));
    let mut coding = CodingState::toy();
    let mut src = PairSource::new(o("w*2"), 1_000_000);
    let (dep, rep) = dependent_sequence_build(1, Some(4), &mut src, &sched, &rho, &mut coding, 8)?;
    c.check("dependent", rep.pass(), format!("DS.1-DS.4 over {} adversaries", rep.ds4.len()));
    let demo = alternating_sum_demo(&dep, &sched, &rho, &mut coding, budget)?;
    let target = BigRational::one() / sched.m_q(dep.special.odd_index());
    c.check("plain-lower", demo.plain_lower == target, format!("lower = {} (1/m = {target})", demo.plain_lower));
    c.check(
        "alternating-upper",
        demo.separated,
        format!("upper = {} vs plain lower = {}", demo.alternating_upper, demo.plain_lower),
    );
    Ok(())
}

fn james(c: &mut Cases, seed: u64) {
    let sched = ParamSchedule::from_u64(&[2], &[3]).expect("schedule");
    let v = |t: &str| Vec00::parse(t).expect("literal");
    for (lit, want) in [("1:1", int(1)), ("1:1, 2:-1", int(1)), ("1:1, 2:1", int(2))] {
        let got = james_norm(&v(lit), &sched, Family::T);
        c.check(format!("fixture {lit}"), got == want, format!("{got}"));
    }
    let mut r = rng(seed, 10);
    let mut bad = 0;
    for _ in 0..500 {
        let k = r.gen_range(1..=6u64);
        let x = Vec00::from_pairs((1..=k).map(|i| (Ordinal::nat(i), rand_q(&mut r))));
        if x.sum().abs() > james_norm(&x, &sched, Family::T) {
            bad += 1;
        }
    }
    c.check("summing-functional", bad == 0, format!("500 vectors, {bad} violations"));
}

fn schedule(c: &mut Cases) {
    let s = schedule_paper(2).expect("paper prefix");
    let want_m = [BigUint::from(2u32), BigUint::from(16u32)];
    let want_n = [BigUint::from(4u32), BigUint::one() << 48];
    c.check("paper-2", s.ms() == want_m && s.ns() == want_n, s.to_string());
    let s3 = schedule_paper(3).expect("paper prefix");
    c.check("paper-3-m", s3.m(3) == &BigUint::from(65536u32), format!("m_3 = {}", s3.m(3)));
    c.check("paper-5", schedule_paper(5).is_err(), "rejected");
}

fn space_checks(c: &mut Cases) -> Result<(), CliError> {
    let small = enumeration_schedule();
    let rho = RhoFn::ladder(o("w^4"));
    let mut coding = CodingState::toy();
    let t = QsTuple::new(vec![QsEntry { phi: Vec00::basis(o("5")), w: 1, p: 5 }]);
    let code = sigma_rho(&t, &mut coding, &rho)?;
    c.check("sigma-first", code == 2, format!("code {code}"));
    let pts: Vec<Ordinal> = (1..=5).map(Ordinal::nat).collect();
    let (x, phi) = canonical_pair(&pts, 2, &small);
    let ep = exact_pair_check(&x, &phi, &int(6), 2, &small, 2)?;
    c.check("exact-pair-core", ep.core_pass(), format!("phi(x) = {}", ep.value));
    if ep.asserted {
        c.check("exact-pair-bounds", ep.bounds_pass(), "");
    } else {
        c.report("exact-pair-bounds", format!("{} on a schedule without growth conditions", ep.bounds_pass()));
    }
    let blocks: Vec<Vec00> = (1..=6).map(|i| Vec00::basis(Ordinal::nat(i))).collect();
    let avg = l1k_average_find(&blocks, 3, &int(2), &small, 500)?;
    let rv = risav_check(&avg, 2, &small)?;
    c.check("l1k-average", rv.pass, format!("max split sum {} <= {}", rv.max_sum, rv.bound));
    let two = Functional::weighted(1, vec![Functional::basis(Ordinal::nat(1)), Functional::basis(Ordinal::nat(3))]);
    let minus =
        Functional::weighted(1, vec![Functional::basis(Ordinal::nat(1)), Functional::basis(Ordinal::nat(3)).negate()]);
    let conv = Functional::Convex(vec![(rat(1, 2), two.clone()), (rat(1, 2), minus)]);
    let tv = tree_analysis_validate(&conv, &small);
    c.check(
        "tree-clause-4",
        !tv.pass && tv.violation.is_some_and(|v| v.clause == "4"),
        "convex of opposite halves is rejected",
    );
    c.check("tree-leaf", tree_analysis_validate(&Functional::basis(o("w")), &small).pass, "");
    for u in [false, true] {
        let fam = [two.clone(), Functional::weighted(2, (1..=4).map(|i| Functional::basis(Ordinal::nat(i))).collect())];
        let a = audit_restrictions(&fam, FamilyRules { unconditional: u }, &small, 64)?;
        c.check(
            format!("restrictions/unconditional={u}"),
            a.pass(),
            format!("{} admitted, {} refused", a.admitted, a.refused),
        );
    }
    let be_sched = ParamSchedule::from_u64(&[2, 4], &[3, 6]).expect("schedule");
    let f: FinOrdSet = (1..=6).map(Ordinal::nat).collect();
    let deep = Functional::weighted(
        1,
        vec![
            Functional::weighted(1, vec![Functional::basis(Ordinal::nat(1)), Functional::basis(Ordinal::nat(2))]),
            Functional::basis(Ordinal::nat(3)),
        ],
    );
    let be = basis_estimate_check(&be_sched, 2, &f, &deep)?;
    if be.asserted {
        c.check("basis-estimate", be.pass(), format!("{}", be.value));
    } else {
        c.report("basis-estimate", format!("value {} pass={}", be.value, be.pass()));
    }
    let strict = start_weight(1, &toy_schedule(), CodingMode::Strict);
    let toy = start_weight(1, &toy_schedule(), CodingMode::Toy);
    c.check(
        "start-weight",
        strict.is_err() && matches!(toy, Ok((4, Some(_)))),
        "strict mode refuses m_4t <= n_3^2, toy mode waives it",
    );
    let restricted = two.restrict_interval(&Interval::new(o("2"), o("3")));
    c.check("interval-restriction", restricted.is_some_and(|f| tree_analysis_validate(&f, &small).pass), "");
    Ok(())
}
