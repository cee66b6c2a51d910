use num::{BigRational, Signed, Zero};
use proptest::prelude::*;

use tn_core::norms::{norming_enumerate, tsirelson_norm, Family, Functional, ParamSchedule};
use tn_core::rho::RhoFn;
use tn_core::vectors::{Interval, Vec00, Q};
use tn_core::{FinOrdSet, Ordinal};

fn ordinal() -> impl Strategy<Value = Ordinal> {
    (0u64..3, 0u64..4, 0u64..12, any::<bool>()).prop_map(|(a, b, c, top)| {
        let low = Ordinal::omega_pow_mul(Ordinal::nat(2), a).add(&Ordinal::omega_mul(b)).add_nat(c);
        if top && a == 0 {
            Ordinal::omega_pow(Ordinal::omega()).add(&low)
        } else {
            low
        }
    })
}

/// Ordinals below `w^2`, where ladder closures stay small.
fn small_ordinal() -> impl Strategy<Value = Ordinal> {
    (0u64..4, 0u64..10).prop_map(|(b, c)| Ordinal::omega_mul(b).add_nat(c))
}

fn rational() -> impl Strategy<Value = Q> {
    (-6i64..=6, 1i64..=3).prop_map(|(n, d)| BigRational::new(n.into(), d.into()))
}

fn vector() -> impl Strategy<Value = Vec00> {
    prop::collection::vec((small_ordinal(), rational()), 0..6).prop_map(Vec00::from_pairs)
}

fn schedule() -> ParamSchedule {
    ParamSchedule::from_u64(&[2, 4], &[3, 5]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn addition_is_associative(a in ordinal(), b in ordinal(), c in ordinal()) {
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
    }

    #[test]
    fn addition_is_monotone_on_the_right(a in ordinal(), b in ordinal(), c in ordinal()) {
        prop_assume!(b < c);
        prop_assert!(a.add(&b) < a.add(&c));
        prop_assert!(b <= a.add(&b));
        prop_assert!(a <= a.add(&b));
    }

    #[test]
    fn finite_parts_are_absorbed(n in 1u64..50, a in ordinal()) {
        prop_assume!(!a.is_finite());
        prop_assert_eq!(Ordinal::nat(n).add(&a), a);
    }

    #[test]
    fn ordinal_text_roundtrip(a in ordinal()) {
        prop_assert_eq!(Ordinal::parse(&a.to_string()).unwrap(), a);
    }

    #[test]
    fn vector_text_roundtrip(x in vector()) {
        prop_assert_eq!(Vec00::parse(&x.to_string()).unwrap(), x);
    }

    #[test]
    fn tsirelson_between_sup_and_l1(x in vector()) {
        let t = tsirelson_norm(&x, &schedule());
        prop_assert!(x.norm_inf() <= t);
        prop_assert!(t <= x.norm_l1());
    }

    #[test]
    fn tsirelson_is_a_norm(x in vector(), y in vector(), c in rational()) {
        let s = schedule();
        prop_assert_eq!(tsirelson_norm(&x.scale(&c), &s), c.abs() * tsirelson_norm(&x, &s));
        prop_assert!(tsirelson_norm(&x.add(&y), &s) <= tsirelson_norm(&x, &s) + tsirelson_norm(&y, &s));
        prop_assert_eq!(tsirelson_norm(&x, &s).is_zero(), x.is_zero());
    }

    #[test]
    fn tsirelson_shrinks_under_restriction(x in vector(), lo in small_ordinal(), hi in small_ordinal()) {
        prop_assume!(lo <= hi);
        let s = schedule();
        prop_assert!(tsirelson_norm(&x.restrict_interval(&Interval::new(lo, hi)), &s) <= tsirelson_norm(&x, &s));
    }

    #[test]
    fn closure_is_extensive_monotone_idempotent(
        f in prop::collection::btree_set(small_ordinal(), 1..4),
        extra in small_ordinal(),
        p in 0u64..4,
    ) {
        let rho = RhoFn::ladder(Ordinal::omega_pow(Ordinal::nat(2)));
        let f: FinOrdSet = f.into_iter().collect();
        let mut g = f.clone();
        g.insert(extra);
        let cf = rho.closure(&f, p).unwrap();
        prop_assert!(f.is_subset(&cf));
        prop_assert!(cf.is_subset(&rho.closure(&g, p).unwrap()));
        prop_assert!(cf.is_subset(&rho.closure(&f, p + 1).unwrap()));
        prop_assert_eq!(rho.closure(&cf, p).unwrap(), cf.clone());
        let pf = if f.len() < 2 { 0 } else { rho.p_of(&f).unwrap() };
        if cf.len() >= 2 && p >= pf {
            prop_assert!(rho.p_of(&cf).unwrap() <= p);
        }
    }

    #[test]
    fn ladder_triangle_axioms(t in prop::collection::btree_set(ordinal(), 3..=3)) {
        let rho = RhoFn::ladder(Ordinal::parse("w^(w+1)").unwrap());
        let e: Vec<Ordinal> = t.into_iter().collect();
        let v = |i: usize, j: usize| rho.rho(&e[i], &e[j]).unwrap();
        prop_assert!(v(0, 2) <= v(0, 1).max(v(1, 2)));
        prop_assert!(v(0, 1) <= v(0, 2).max(v(1, 2)));
    }

    #[test]
    fn enumerated_functionals_norm_below(x in vector()) {
        prop_assume!(x.len() <= 3);
        let s = schedule();
        let t = tsirelson_norm(&x, &s);
        for e in norming_enumerate(&x.support(), &s, 2, Family::T) {
            let v = e.tree.to_vec(&s).unwrap();
            let pairing: Q = x.iter().map(|(a, q)| q * v.get(a)).sum();
            prop_assert!(pairing <= t);
        }
    }
}

#[test]
fn functional_text_roundtrip() {
    let s = schedule();
    let sup = FinOrdSet::parse("1, w, w+3").unwrap();
    let all = norming_enumerate(&sup, &s, 3, Family::T);
    assert!(!all.is_empty());
    for e in all {
        let text = e.tree.to_string();
        assert_eq!(Functional::parse(&text).unwrap(), e.tree, "{text}");
    }
}
