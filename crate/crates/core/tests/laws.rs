mod common;

use common::{f1, f2, f3};
use mltc_core::cell::{classify, Kind};
use mltc_core::enumerate::*;
use mltc_core::laws::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn assert_all(reports: &[LawReport]) {
    for r in reports {
        assert!(r.passed(), "{}: {:?}", r.law, r.failures);
    }
    assert!(total_checked(reports) > 0);
}

// F1 is the cycle a -x-> b -y-> a: one path of each length from each object
#[test]
fn f1_counts_are_paths() {
    let p = f1();
    for bound in 0..8 {
        assert_eq!(enumerate_many_to_one(&p, 1, bound).len(), 2 + 2 * bound);
        assert_eq!(enumerate_cells(&p, 1, bound).len(), 2 + 2 * bound);
    }
}

// F2: chains X1 -> X -> f1 etc; 2-cells are chain cells plus predets whose
// arguments are one chain cell per factor
#[test]
fn f2_counts_by_hand() {
    let p = f2();
    let f_chains = 3 + 2 + 1;
    let g_chains = 3 + 2 + 1;
    assert_eq!(enumerate_cells(&p, 1, 6).len(), 3 + 3 + 3 + 9);
    let dim2 = f_chains + g_chains + 3 + f_chains * g_chains;
    for bound in 6..9 {
        assert_eq!(enumerate_cells(&p, 2, bound).len(), dim2);
        assert_eq!(enumerate_cells(&p, 3, bound).len(), dim2);
    }
    assert_eq!(enumerate_many_to_one(&p, 2, 6).len(), f_chains + g_chains);
}

#[test]
fn enumeration_is_canonical_and_distinct() {
    let p = f3();
    for n in 0..=3 {
        let cells = enumerate_cells(&p, n, 4);
        let mut sorted = cells.clone();
        sort_canonical(&mut sorted);
        assert_eq!(sorted, cells);
        let set: std::collections::BTreeSet<_> = cells.iter().collect();
        assert_eq!(set.len(), cells.len());
        assert!(cells.iter().all(|u| weight(u) <= 4 && u.dim() == n));
    }
    assert_eq!(
        (1..=3).map(|n| enumerate_cells(&p, n, 4).len()).collect::<Vec<_>>(),
        [23, 152, 154]
    );
}

#[test]
fn random_cells_are_valid() {
    let p = f3();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let n = rand::Rng::random_range(&mut rng, 0..=4);
        let u = random_cell(&p, &mut rng, n, 6);
        assert_eq!(u.dim(), n);
        assert!(weight(&u) <= 6);
        mltc_core::cell::validate_cell(&p, &u).unwrap();
    }
}

#[test]
fn suites_hold_on_small_fixtures() {
    let cfg = SuiteConfig { bound: 4, random_instances: 1000, seed: 11 };
    for p in [f1(), f2()] {
        assert_all(&multicategory_suite(&p, &cfg));
        assert_all(&omega_suite(&p, &cfg));
        assert_all(&placed_suite(&p, &cfg));
        assert_all(&indet_suite(&p, 4, 6));
    }
}

#[test]
fn suites_hold_on_f3() {
    let cfg = SuiteConfig { bound: 2, random_instances: 300, seed: 5 };
    let p = f3();
    assert_all(&multicategory_suite(&p, &cfg));
    assert_all(&omega_suite(&p, &cfg));
    assert_all(&placed_suite(&p, &cfg));
    assert_all(&indet_suite(&p, 2, 4));
}

#[test]
fn every_law_group_is_exercised() {
    let cfg = SuiteConfig { bound: 4, random_instances: 500, seed: 1 };
    let p = f2();
    let reports: Vec<LawReport> =
        [multicategory_suite(&p, &cfg), omega_suite(&p, &cfg), placed_suite(&p, &cfg)].concat();
    for r in &reports {
        assert!(r.checked > 0, "{} never checked", r.law);
    }
    for key in ["exchange", "commutativity", "interchange", "mixed", "associativity"] {
        assert!(reports.iter().any(|r| r.law.contains(key)), "{key}");
    }
}

#[test]
fn ledger_caps_examples() {
    let mut led = Ledger::new();
    for i in 0..50 {
        led.check("law", i % 2 == 0, || format!("case {i}"));
    }
    let r = led.into_reports();
    assert_eq!((r[0].checked, r[0].failure_count, r[0].failures.len()), (50, 25, 20));
    assert!(!all_passed(&r));
}

#[test]
fn indets_are_exactly_indecomposable() {
    let p = f2();
    let pop = Population::exhaustive(&p, 3, 4);
    let dec = decomposable(&p, &Population::exhaustive(&p, 3, 6));
    for u in pop.iter().filter(|u| u.dim() >= 1) {
        let c = classify(&p, u);
        if c.is_indet {
            assert!(!dec.contains(u) && mltc_core::cell::occurrence_count(u, Kind::Indets) == 1);
        }
    }
}
