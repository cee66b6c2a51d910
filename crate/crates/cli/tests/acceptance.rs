//! One PASS/FAIL line per acceptance criterion.  Every comparison is exact
//! (tolerance 0); each criterion also has a pinned wall-clock budget.
//!
//! Where a suite of the crate already covers a criterion, it is run and then
//! cross-checked against an oracle written here from the definitions.

use std::collections::HashMap;
use std::time::Instant;

use num::{BigRational, BigUint, One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tn_cli::suites::{run_suite, Status, SuiteReport};
use tn_cli::{queue_targets, RunConfig};
use tn_core::norms::{james_norm, schedule_paper, tsirelson_norm, Family, ParamSchedule};
use tn_core::rho::{build_universal_rho, RhoFn, RhoModel};
use tn_core::space::{
    alternating_sum_demo, build_special_sequence, dependent_sequence_build, fork_special, tree_interference,
    CodingState, PairSource, SpecialSequence,
};
use tn_core::vectors::{Vec00, Q};
use tn_core::{FinOrdSet, Ordinal};

/// Exact comparisons only.
const TOLERANCE: &str = "0";

/// Seconds allowed per criterion.
const BUDGET: [f64; 12] = [60.0, 30.0, 60.0, 30.0, 120.0, 60.0, 60.0, 120.0, 120.0, 30.0, 1.0, 10.0];

/// Criteria whose literal statement is expected not to hold; each asserts
/// the reason instead.
const EXPECTED_FAIL: [usize; 2] = [3, 9];

struct Outcome {
    pass: bool,
    detail: String,
    /// the time the budget applies to, when not the whole criterion
    timed: Option<f64>,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Outcome { pass, detail, timed: None }
    }
}

fn o(s: &str) -> Ordinal {
    Ordinal::parse(s).expect("ordinal literal")
}

fn q(n: i64, d: i64) -> Q {
    BigRational::new(n.into(), d.into())
}

fn suite(name: &str) -> SuiteReport {
    run_suite(name, &RunConfig::default()).expect("suite runs")
}

fn summary(rep: &SuiteReport) -> String {
    format!("{}: {} passed, {} failed, {} reported", rep.suite, rep.passed, rep.failed, rep.reported)
}

fn small_schedule() -> ParamSchedule {
    ParamSchedule::from_u64(&[2, 4], &[3, 5]).unwrap()
}

/// The norm on positions `0..v.len()` straight from the implicit formula:
/// sup-norm, or `1/m_j` times the best split into at most `n_j` consecutive
/// pieces.  Splitting into one piece never helps, and gaps never help since
/// the norm is monotone under restriction.
fn interval_norm(v: &[Q], m: &[i64], n: &[usize]) -> Q {
    fn rec(v: &[Q], a: usize, b: usize, m: &[i64], n: &[usize], memo: &mut HashMap<(usize, usize), Q>) -> Q {
        if let Some(x) = memo.get(&(a, b)) {
            return x.clone();
        }
        let mut best = v[a..b].iter().map(|x| x.abs()).max().unwrap_or_else(Q::zero);
        for (&mj, &nj) in m.iter().zip(n) {
            let mut split: HashMap<(usize, usize), Q> = HashMap::new();
            // split[(c, d)]: best sum of norms of d pieces covering [c, b)
            for d in 1..=nj.min(b - a) {
                for c in (a..b).rev() {
                    let val = if d == 1 {
                        if c == a {
                            continue;
                        }
                        rec(v, c, b, m, n, memo)
                    } else {
                        let mut s: Option<Q> = None;
                        for e in c + 1..b {
                            if let Some(rest) = split.get(&(e, d - 1)) {
                                let t = rec(v, c, e, m, n, memo) + rest;
                                if s.as_ref().is_none_or(|x| t > *x) {
                                    s = Some(t);
                                }
                            }
                        }
                        match s {
                            Some(t) => t,
                            None => continue,
                        }
                    };
                    split.insert((c, d), val);
                }
                if d >= 2 {
                    if let Some(t) = split.get(&(a, d)) {
                        let t = t / BigRational::from_integer(mj.into());
                        if t > best {
                            best = t;
                        }
                    }
                }
            }
        }
        memo.insert((a, b), best.clone());
        best
    }
    rec(v, 0, v.len(), m, n, &mut HashMap::new())
}

fn patterns(values: &[Q], s: usize) -> Vec<Vec<Q>> {
    let mut out = vec![Vec::new()];
    for _ in 0..s {
        out = out.into_iter().flat_map(|p| values.iter().map(move |v| [p.clone(), vec![v.clone()]].concat())).collect();
    }
    out
}

fn ac1() -> Outcome {
    let rep = suite("oracle-equivalence");
    let sched = small_schedule();
    let pts: Vec<Ordinal> = ["1", "w", "w+4", "w*2", "w*2+3"].iter().map(|s| o(s)).collect();
    let mut bad = 0;
    let mut checked = 0;
    // the suite compares against the enumerated norming set; this compares
    // against the formula itself
    for s in 1..=5 {
        for abs in patterns(&[q(1, 1), q(1, 2), q(2, 1)], s) {
            let x = Vec00::from_pairs(pts[..s].iter().cloned().zip(abs.iter().cloned()));
            let want = interval_norm(&abs, &[2, 4], &[3, 5]);
            checked += 1;
            if tsirelson_norm(&x, &sched) != want {
                bad += 1;
            }
        }
    }
    Outcome::new(
        rep.ok() && bad == 0,
        format!("{}; direct recursion on {checked} magnitude patterns, {bad} mismatches", summary(&rep)),
    )
}

fn ac2() -> Outcome {
    let rep = suite("symmetries");
    let sched = small_schedule();
    let mut bad = 0;
    for abs in patterns(&[q(1, 1), q(1, 2), q(2, 1)], 3) {
        let base = Vec00::from_pairs([o("2"), o("w"), o("w*2+1")].into_iter().zip(abs.iter().cloned()));
        let want = tsirelson_norm(&base, &sched);
        for signs in 0..8u32 {
            let x =
                Vec00::from_pairs([o("0"), o("7"), o("w+3")].into_iter().zip(abs.iter().enumerate().map(|(i, v)| {
                    if signs >> i & 1 == 1 {
                        -v.clone()
                    } else {
                        v.clone()
                    }
                })));
            if tsirelson_norm(&x, &sched) != want {
                bad += 1;
            }
        }
    }
    Outcome::new(
        rep.ok() && bad == 0,
        format!("{}; every sign and spread of 27 patterns, {bad} mismatches", summary(&rep)),
    )
}

/// `cl(F, p)` restricted to candidates below `omega * 3`, from the definition.
fn closure_by_definition(rho: &RhoFn, f: &[Ordinal], p: u64) -> FinOrdSet {
    let top = f.iter().max().cloned().unwrap_or_else(Ordinal::zero);
    let mut out = FinOrdSet::new();
    for a in 0..3u64 {
        for b in 0..64u64 {
            let alpha = Ordinal::omega_mul(a).add_nat(b);
            if alpha > top {
                continue;
            }
            if f.iter().any(|beta| alpha == *beta || (alpha < *beta && rho.rho(&alpha, beta).unwrap() <= p)) {
                out.insert(alpha);
            }
        }
    }
    out
}

fn ac3() -> Outcome {
    let rep = suite("closure-laws");
    let rho = RhoFn::ladder(o("w^3"));
    let (f, g) = ([o("2")], [o("5"), o("w")]);
    let p = 5;
    assert!(rho.p_of(&g.iter().cloned().collect()).unwrap() <= p);
    let meet = closure_by_definition(&rho, &f, p).intersection(&closure_by_definition(&rho, &g, p));
    let two_five = [o("2"), o("5")];
    assert_eq!(rho.rho(&o("2"), &o("5")).unwrap(), p);
    let cut = closure_by_definition(&rho, &two_five, p).below(&o("2"));
    assert_eq!(meet, FinOrdSet::parse("0,1,2").unwrap(), "cl{{2}} & cl{{5,w}} at p = 5");
    assert_eq!(cut, FinOrdSet::parse("0,1").unwrap(), "cl{{2,5}} & 2 at p = 5");
    // the literal clauses fail on these sets while the p-closed form holds throughout
    assert_eq!(rep.failed, 0, "{}", summary(&rep));
    let literal = rep.cases.iter().filter(|c| c.status == Status::Reported).count();
    assert_eq!(literal, 6);
    Outcome::new(
        false,
        format!(
            "{}; literal clause 3 refuted by F = {{2}}, G = {{5,w}}, p = 5 (cl F & cl G = {{{meet}}}, F & G empty) \
             and clause 1 by F = {{2,5}}, alpha = 2 (cl F & alpha = {{{cut}}}, F & alpha empty); \
             all clauses hold on p-closed F, G",
            summary(&rep)
        ),
    )
}

fn universal_small() -> RhoFn {
    let models = RhoModel::enumerate(2, 2);
    let n = models.len() as u64;
    build_universal_rho(Ordinal::omega_mul(n + 2), &queue_targets(models)).unwrap().0
}

fn ac4() -> Outcome {
    let rep = suite("rho-axioms");
    let mut r = ChaCha8Rng::seed_from_u64(44);
    let mut bad = 0;
    let instances = [RhoFn::ladder(o("w^3")), RhoFn::smooth(o("w^3")), universal_small()];
    for rho in &instances {
        let mut done = 0;
        while done < 200 {
            let mut t: Vec<Ordinal> = (0..3)
                .map(|_| {
                    Ordinal::omega_pow_mul(Ordinal::nat(2), r.gen_range(0..3))
                        .add(&Ordinal::omega_mul(r.gen_range(0..4)))
                        .add_nat(r.gen_range(0..8))
                })
                .filter(|a| a < rho.bound())
                .collect();
            t.sort();
            t.dedup();
            if t.len() < 3 {
                continue;
            }
            done += 1;
            let v = |i: usize, j: usize| rho.rho(&t[i], &t[j]).unwrap();
            if v(0, 2) > v(0, 1).max(v(1, 2)) || v(0, 1) > v(0, 2).max(v(1, 2)) {
                bad += 1;
            }
        }
    }
    Outcome::new(rep.ok() && bad == 0, format!("{}; 600 triples rechecked directly, {bad} violations", summary(&rep)))
}

fn ac5() -> Outcome {
    let rep = suite("universality");
    // up to isomorphism a model is its matrix; count them from the axioms
    let mut count = 1 + 4;
    for (a, b, c) in (0..4).flat_map(|a| (0..4).flat_map(move |b| (0..4).map(move |c| (a, b, c)))) {
        if b <= a.max(c) && a <= b.max(c) {
            count += 1;
        }
    }
    let models = RhoModel::enumerate(3, 3);
    let queue = queue_targets(models.clone());
    let (rho, certs) = build_universal_rho(Ordinal::omega_mul(models.len() as u64 + 2), &queue).unwrap();
    let mut bad = 0;
    for (cert, (model, _)) in certs.iter().zip(&queue) {
        let e = cert.m1.elements();
        let same = e.len() == model.size()
            && (0..e.len()).all(|i| (i + 1..e.len()).all(|j| rho.rho(&e[i], &e[j]).unwrap() == model.get(i, j)));
        if !same {
            bad += 1;
        }
    }
    Outcome::new(
        rep.ok() && bad == 0 && count == models.len(),
        format!("{}; {count} models counted directly, {bad} matrices differ", summary(&rep)),
    )
}

fn ac6() -> Outcome {
    let rep = suite("smoothness");
    let rho = RhoFn::smooth(o("w^3"));
    let mut bad = 0;
    for (lam, blocks) in [("w", 1u64), ("w*2", 2)] {
        let l = o(lam);
        for n in 0..=6u64 {
            let got = rho.f_n_set(&l, n).unwrap();
            let scan = 1024u64;
            let want: FinOrdSet = (0..blocks)
                .flat_map(|a| (0..scan).map(move |b| Ordinal::omega_mul(a).add_nat(b)))
                .filter(|a| rho.rho(a, &l).unwrap() <= n)
                .collect();
            let inside = got.iter().all(|a| a.split_finite().1 < scan);
            if got != want || !inside {
                bad += 1;
            }
        }
    }
    Outcome::new(
        rep.ok() && bad == 0,
        format!("{}; F_n of w and w*2 rescanned for n <= 6, {bad} mismatches", summary(&rep)),
    )
}

fn supp(f: &tn_core::norms::Functional, sched: &ParamSchedule) -> FinOrdSet {
    f.to_vec(sched).unwrap().support()
}

/// `kappa`, `lambda` and the three tree-like properties, from the sequences.
fn tree_like(a: &SpecialSequence, b: &SpecialSequence, sched: &ParamSchedule) -> (usize, usize, bool) {
    let n = a.len().min(b.len());
    let lambda = (1..=n).rev().find(|&i| a.weights[i - 1] == b.weights[i - 1]).unwrap_or(0);
    let kappa = (1..=lambda).find(|&i| a.functionals[i - 1] != b.functionals[i - 1]).unwrap_or(0);
    let mid = |k: usize| kappa > 0 && kappa < k && k < lambda;
    let first = (1..kappa.max(1)).all(|k| a.functionals[k - 1] == b.functionals[k - 1])
        && (1..=n).filter(|&k| mid(k)).all(|k| a.weights[k - 1] == b.weights[k - 1]);
    let ua = (1..=n).filter(|&k| mid(k)).fold(FinOrdSet::new(), |s, k| s.union(&supp(&a.functionals[k - 1], sched)));
    let ub = (1..=n).filter(|&k| mid(k)).fold(FinOrdSet::new(), |s, k| s.union(&supp(&b.functionals[k - 1], sched)));
    let second = ua.intersection(&ub).is_empty();
    let wa: Vec<usize> = (lambda + 1..=a.len()).map(|k| a.weights[k - 1]).collect();
    let third = (lambda + 1..=b.len()).all(|k| !wa.contains(&b.weights[k - 1]));
    (kappa, lambda, first && second && third)
}

fn ac7() -> Outcome {
    let rep = suite("interference");
    let sched = ParamSchedule::toy(30).unwrap();
    let rho = RhoFn::ladder(o("w^4"));
    let mut bad = 0;
    let mut pairs = 0;
    for len in 2..=6 {
        let mut coding = CodingState::toy();
        let phi = build_special_sequence(&mut PairSource::new(o("w*2"), 1_000_000), 1, len, &sched, &rho, &mut coding)
            .unwrap();
        for k in 0..len {
            let mut fork = coding.fork();
            let psi =
                if k == 0 { phi.clone() } else { fork_special(&phi, k, &o("w*5"), &sched, &rho, &mut fork).unwrap() };
            let (kappa, lambda, ok) = tree_like(&phi, &psi, &sched);
            let got = tree_interference(&phi, &psi, &rho).unwrap();
            let expected = if k == 0 { (0, len) } else { (k + 1, k + 1) };
            pairs += 1;
            if !ok || (kappa, lambda) != expected || (got.kappa, got.lambda) != expected || !got.pass() {
                bad += 1;
            }
        }
    }
    Outcome::new(rep.ok() && bad == 0, format!("{}; {pairs} pairs rederived, {bad} disagreements", summary(&rep)))
}

fn ac8() -> Outcome {
    let rep = suite("lkio1");
    Outcome::new(rep.ok(), summary(&rep))
}

fn ac9() -> Outcome {
    let sched = ParamSchedule::toy(30).unwrap();
    let rho = RhoFn::ladder(o("w^4"));
    let mut coding = CodingState::toy();
    let mut src = PairSource::new(o("w*2"), 1_000_000);
    let (dep, rep) = dependent_sequence_build(1, Some(4), &mut src, &sched, &rho, &mut coding, 8).unwrap();
    assert!(rep.pass());
    let demo = alternating_sum_demo(&dep, &sched, &rho, &mut coding, RunConfig::default().budget).unwrap();
    // toy schedule m_j = j + 1, so m_3 = 4
    let target = q(1, 4);
    assert_eq!(demo.plain_lower, target);
    // the certified upper bound is the mixed Tsirelson norm, which ignores signs
    assert_eq!(demo.alternating_upper, demo.plain_upper);
    assert!(demo.plain_upper >= demo.plain_lower);
    Outcome::new(
        demo.plain_lower == target && demo.alternating_upper < demo.plain_lower,
        format!(
            "plain lower = {} = 1/m_3; alternating upper = {} equals the plain upper, not below 1/4",
            demo.plain_lower, demo.alternating_upper
        ),
    )
}

fn ac10() -> Outcome {
    let rep = suite("james");
    let sched = ParamSchedule::from_u64(&[2], &[3]).unwrap();
    let v = |pairs: &[(u64, i64)]| Vec00::from_pairs(pairs.iter().map(|&(i, c)| (Ordinal::nat(i), q(c, 1))));
    let fixtures = [(v(&[(1, 1)]), q(1, 1)), (v(&[(1, 1), (2, -1)]), q(1, 1)), (v(&[(1, 1), (2, 1)]), q(2, 1))];
    let bad = fixtures.iter().filter(|(x, want)| james_norm(x, &sched, Family::T) != *want).count();
    Outcome::new(rep.ok() && bad == 0, format!("{}; 3 hand fixtures, {bad} mismatches", summary(&rep)))
}

fn ac11() -> Outcome {
    let s = schedule_paper(2).unwrap();
    // m_2 = 2^4, s_1 = log2(m_2^3), n_2 = (4 n_1)^{s_1}
    let m2 = 2u32.pow(4);
    let s1 = 3 * m2.trailing_zeros();
    let n2 = BigUint::from(16u32).pow(s1);
    assert_eq!(n2, BigUint::one() << 48u32);
    let ok = s.ms() == [BigUint::from(2u32), BigUint::from(m2)] && s.ns() == [BigUint::from(4u32), n2.clone()];
    let shown = |v: &[BigUint]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
    Outcome::new(ok, format!("m = ({}), n = ({}); expected (2, {m2}), (4, {n2})", shown(s.ms()), shown(s.ns())))
}

fn ac12() -> Outcome {
    let mut same = true;
    let mut reruns = 0.0;
    for name in ["symmetries", "james", "universality", "schedule"] {
        let args = ["tn", "suite", name, "--seed", "7", "--format", "json"];
        let a = tn_cli::execute(args);
        let t = Instant::now();
        let b = tn_cli::execute(args);
        reruns += t.elapsed().as_secs_f64();
        same &= a.0 == 0 && a.1 == b.1 && !a.1.is_empty();
    }
    Outcome { pass: same, detail: format!("4 suites rerun, byte-identical JSON: {same}"), timed: Some(reruns) }
}

#[test]
fn acceptance() {
    let criteria: [fn() -> Outcome; 12] = [ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9, ac10, ac11, ac12];
    let mut lines = Vec::new();
    let mut unexpected = Vec::new();
    for (i, run) in criteria.iter().enumerate() {
        let id = i + 1;
        let t = Instant::now();
        let out = run();
        let secs = out.timed.unwrap_or_else(|| t.elapsed().as_secs_f64());
        let in_time = secs <= BUDGET[i];
        let pass = out.pass && in_time;
        let line = format!(
            "AC{id} {} {} [tol {TOLERANCE}, {secs:.1}s of {:.0}s]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            BUDGET[i]
        );
        println!("{line}");
        lines.push(line);
        if pass == EXPECTED_FAIL.contains(&id) {
            unexpected.push(id);
        }
    }
    assert!(unexpected.is_empty(), "unexpected outcome for {unexpected:?}:\n{}", lines.join("\n"));
}
