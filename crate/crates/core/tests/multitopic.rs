mod common;

use std::collections::BTreeMap;

use common::{cell, f1, f2, f3};
use mltc_core::cell::{multicompose, replace, Kind};
use mltc_core::multitopic::*;
use mltc_core::presentation::truncate_presentation;

fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

fn renders(v: &[mltc_core::Cell]) -> Vec<String> {
    v.iter().map(|c| c.render()).collect()
}

#[test]
fn generators() {
    let s = mlt_of_presentation(&f1()).unwrap();
    let names: Vec<String> = s.generators(0).iter().map(|x| x.to_string()).collect();
    assert_eq!(names, ["a", "b"]);
    let names: Vec<String> = s.generators(1).iter().map(|x| x.to_string()).collect();
    assert_eq!(names, ["x", "y"]);
    let s = mlt_of_presentation(&f2()).unwrap();
    let names: Vec<String> = s.generators(2).iter().map(|x| x.to_string()).collect();
    assert_eq!(names, ["X", "X1", "Y", "Y1"]);
    assert!(s.generators(3).is_empty());
}

#[test]
fn truncation_commutes() {
    let p = f2();
    let s = mlt_of_presentation(&p).unwrap();
    assert_eq!(mlt_of_presentation(&truncate_presentation(&p, 1).unwrap()).unwrap(), s.truncate(1).unwrap());
}

#[test]
fn pasting_diagram_counts() {
    let s = mlt_of_presentation(&f1()).unwrap();
    let got = enumerate_pasting_diagrams(&s, 1, 2);
    let mut want = vec!["#a", "#b", "x(#a)", "y(#b)", "x(y(#b))", "y(x(#a))"];
    let mut have = renders(&got);
    want.sort();
    have.sort();
    assert_eq!(have, want);
    // size-lexicographic
    assert_eq!(renders(&got), ["#a", "#b", "x(#a)", "y(#b)", "x(y(#b))", "y(x(#a))"]);
    let s2 = mlt_of_presentation(&f2()).unwrap();
    assert_eq!(enumerate_pasting_diagrams(&s2, 2, 1).len(), 10);
    for (s, n) in [(&s, 1), (&s2, 1), (&s2, 2)] {
        let ids = enumerate_pasting_diagrams(s, n, 0);
        assert_eq!(ids.len(), s.generators(n - 1).len());
        assert!(ids.iter().all(|u| mltc_core::cell::occurrence_count(u, Kind::Indets) == 0));
    }
}

#[test]
fn structural_laws_hold() {
    for p in [f1(), f2()] {
        let s = mlt_of_presentation(&p).unwrap();
        let rep = check_all_levels(&s, 4);
        assert!(rep.is_empty(), "{:?}", rep.violations);
        assert!(rep.checked > 100);
    }
    let s = mlt_of_presentation(&f3()).unwrap();
    let rep = check_all_levels(&s, 3);
    assert!(rep.is_empty(), "{:?}", rep.violations);
}

#[test]
fn corrupted_boundary_is_reported() {
    let p = f2();
    let s = mlt_of_presentation(&p).unwrap();
    let bad = s.with_corrupted_boundary("X", cell(&p, "f2(#a)"), "f3");
    let rep = check_multitopic_laws(&bad, 2, 3);
    assert!(rep.violations.iter().any(|v| v.law == "T u = c u"), "{:?}", rep.violations);
    let bad = s.with_corrupted_boundary("X", cell(&p, "#a"), "f1");
    let rep = check_multitopic_laws(&bad, 2, 3);
    assert!(rep.violations.iter().any(|v| v.law == "d and c defined"), "{:?}", rep.violations);
    assert!(check_multitopic_laws(&s, 2, 3).is_empty());
}

#[test]
fn morphisms() {
    let p = f1();
    let s = mlt_of_presentation(&p).unwrap();
    let swap = build_morphism(&s, &s, &map(&[("a", "b"), ("b", "a"), ("x", "y"), ("y", "x")])).unwrap();
    assert_eq!(apply_morphism(&swap, &cell(&p, "x(y(#b))")).unwrap().render(), "y(x(#a))");
    assert_eq!(apply_morphism(&swap, &cell(&p, "#a")).unwrap().render(), "#b");
    let err = build_morphism(&s, &s, &map(&[("y", "x")])).unwrap_err();
    assert!(matches!(err, MltError::Morphism { dim: 1, ref indet, .. } if indet == "y"), "{err}");
    let id = identity_morphism(&s);
    for u in enumerate_pasting_diagrams(&s, 1, 5) {
        assert_eq!(apply_morphism(&id, &u).unwrap(), u);
        let uu = apply_morphism(&swap, &apply_morphism(&swap, &u).unwrap()).unwrap();
        assert_eq!(apply_morphism(&swap.then(&swap).unwrap(), &u).unwrap(), uu);
        assert_eq!(uu, u);
    }
    let p2 = f2();
    assert!(apply_morphism(&identity_morphism(&mlt_of_presentation(&p2).unwrap()), &cell(&p2, "e{g1(f1(#a))}(#g1, X(#f2))")).is_err());
}

const TWO_CHAINS: &str = "name: G\ndim 0: a b\ndim 1:\n  f1 : a -> b\n  f2 : a -> b\n  f3 : a -> b\n  g1 : a -> b\n  g2 : a -> b\n  g3 : a -> b\ndim 2:\n  X : f2 => f1\n  X1 : f3 => f2\n  Y : g2 => g1\n  Y1 : g3 => g2\n";

#[test]
fn morphisms_commute_with_structure() {
    let p = mltc_core::parse_presentation(TWO_CHAINS).unwrap();
    let s = mlt_of_presentation(&p).unwrap();
    let swap = build_morphism(
        &s,
        &s,
        &map(&[("f1", "g1"), ("f2", "g2"), ("f3", "g3"), ("g1", "f1"), ("g2", "f2"), ("g3", "f3"), ("X", "Y"), ("X1", "Y1"), ("Y", "X"), ("Y1", "X1")]),
    )
    .unwrap();
    let fold = build_morphism(&s, &s, &map(&[("g1", "f1"), ("g2", "f2"), ("g3", "f3"), ("Y", "X"), ("Y1", "X1")])).unwrap();
    let err = build_morphism(&s, &s, &map(&[("Y", "X1")])).unwrap_err();
    assert!(matches!(err, MltError::Morphism { dim: 2, .. }), "{err}");
    let both = swap.then(&fold).unwrap();
    for n in 0..=2 {
        let cells = enumerate_pasting_diagrams(&s, n, 3);
        for m in [&swap, &fold] {
            for u in &cells {
                let mu = m.apply(u).unwrap();
                assert_eq!(both.apply(u).unwrap(), fold.apply(&swap.apply(u).unwrap()).unwrap());
                if n == 0 {
                    continue;
                }
                assert_eq!(s.d(&mu).unwrap(), m.apply(&s.d(u).unwrap()).unwrap());
                assert_eq!(s.c_cell(&mu).unwrap(), m.apply(&s.c_cell(u).unwrap()).unwrap());
                for v in &cells {
                    for r in 0..mltc_core::cell::occurrence_count(u, Kind::Objects) {
                        if let Ok((w, _)) = multicompose(&p, u, r, v) {
                            let mw = multicompose(&p, &mu, r, &m.apply(v).unwrap()).unwrap().0;
                            assert_eq!(m.apply(&w).unwrap(), mw);
                        }
                    }
                    for r in 0..mltc_core::cell::occurrence_count(u, Kind::Indets) {
                        if let Ok(w) = replace(&p, u, r, v) {
                            let mw = replace(&p, &mu, r, &m.apply(v).unwrap()).unwrap();
                            assert_eq!(m.apply(&w).unwrap(), mw);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn round_trips() {
    for p in [f1(), f2(), f3()] {
        let s = mlt_of_presentation(&p).unwrap();
        assert_eq!(computad_of_mlt(&s), p);
        assert_eq!(mlt_of_presentation(&computad_of_mlt(&s)).unwrap(), s);
    }
}

#[test]
fn map_files() {
    let m = parse_map("# swap\ndim 0:\n  a -> b\n  b -> a\ndim 1:\n  x -> y\n  y -> x\n").unwrap();
    assert_eq!(m, map(&[("a", "b"), ("b", "a"), ("x", "y"), ("y", "x")]));
    assert!(matches!(parse_map("a => b"), Err(MltError::MapSyntax { line: 1, .. })));
    assert!(matches!(parse_map("a -> b\na -> c"), Err(MltError::MapSyntax { line: 2, .. })));
    assert_eq!(parse_map_flags(&["x=y", "y=x"]).unwrap(), map(&[("x", "y"), ("y", "x")]));
}

#[test]
fn export_shape() {
    let s = mlt_of_presentation(&f1()).unwrap();
    let e = export(&s, 2).unwrap();
    assert_eq!(e.dims, 1);
    assert_eq!(e.cells[&1].len(), 6);
    assert_eq!(e.d.len(), 6);
    let json = serde_json::to_value(&e).unwrap();
    for key in ["dims", "cells", "d", "c"] {
        assert!(json.get(key).is_some());
    }
    let back: MltExport = serde_json::from_value(json).unwrap();
    assert_eq!(back, e);
}
