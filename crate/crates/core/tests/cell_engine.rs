mod common;

use common::{cell, ceval, f1, f2, f3};
use mltc_core::cell::*;

fn names(v: Vec<Name>) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

#[test]
fn indet_cells() {
    let (p1, p2) = (f1(), f2());
    assert_eq!(indet_cell(&p1, "x").unwrap().render(), "x(#a)");
    assert_eq!(indet_cell(&p2, "X").unwrap().render(), "X(#f2)");
    assert_eq!(indet_cell(&p1, "a").unwrap().render(), "a");
    assert!(indet_cell(&p1, "q").is_err());
}

#[test]
fn identities() {
    let p = f1();
    assert_eq!(identity_over(&cell(&p, "a")).render(), "#a");
    assert_eq!(identity_over(&cell(&p, "x(y(#b))")).render(), "e{x(y(#b))}(#x, #y)");
    assert_eq!(identity_over(&cell(&p, "#a")).render(), "e{#a}()");
    assert_eq!(iterated_identity(&cell(&p, "a"), 2).render(), "e{#a}()");
    assert_eq!(iterated_identity(&cell(&p, "x(#a)"), 2).render(), "#x");
    assert_eq!(iterated_identity(&cell(&p, "x(y(#b))"), 3).render(), "e{e{x(y(#b))}(#x, #y)}()");
    let c = cell(&p, "x(y(#b))");
    assert_eq!(iterated_identity(&c, 1), c);
}

#[test]
fn occurrence_sequences() {
    let p = f1();
    assert_eq!(names(occurrences(&cell(&p, "x(y(x(#a)))"), Kind::Indets)), ["x", "y", "x"]);
    assert_eq!(names(occurrences(&cell(&p, "x(y(#b))"), Kind::Objects)), ["b"]);
    assert!(occurrences(&cell(&p, "e{#a}()"), Kind::Indets).is_empty());
}

#[test]
fn boundaries() {
    let (p1, p2) = (f1(), f2());
    let (d, c) = boundary(&p1, &cell(&p1, "x(y(#b))"));
    assert_eq!((d.render(), c.render()), ("b".into(), "b".into()));
    let (d, c) = boundary(&p2, &cell(&p2, "X(X1(#f3))"));
    assert_eq!((d.render(), c.render()), ("f3(#a)".into(), "f1(#a)".into()));
    let (d, c) = boundary(&p1, &cell(&p1, "#a"));
    assert_eq!((d.render(), c.render()), ("a".into(), "a".into()));
    let u = cell(&p2, "X(X1(#f3))");
    assert_eq!(iterated_boundary(&p2, &u, 0, Side::Domain).unwrap().render(), "a");
    assert_eq!(iterated_boundary(&p2, &u, 1, Side::Codomain).unwrap(), boundary(&p2, &u).1);
    assert!(iterated_boundary(&p2, &u, 2, Side::Domain).is_err());
}

#[test]
fn multicomposition() {
    let (p1, p2) = (f1(), f2());
    let (c, prov) = multicompose(&p1, &cell(&p1, "x(#a)"), 0, &cell(&p1, "y(#b)")).unwrap();
    assert_eq!(c.render(), "x(y(#b))");
    assert_eq!(prov.right, [0]);
    let u = cell(&p1, "x(y(#b))");
    assert_eq!(multicompose(&p1, &u, 0, &cell(&p1, "#b")).unwrap().0, u);
    let w = identity_over(&cell(&p2, "g1(f1(#a))"));
    let (c, prov) = multicompose(&p2, &w, 1, &cell(&p2, "X(#f2)")).unwrap();
    assert_eq!(c.render(), "e{g1(f1(#a))}(#g1, X(#f2))");
    assert_eq!((prov.left.clone(), prov.right.clone()), (vec![0], vec![1]));
    assert!(matches!(
        multicompose(&p1, &cell(&p1, "x(#a)"), 0, &cell(&p1, "x(#a)")),
        Err(CellError::TargetMismatch { .. })
    ));
    assert!(matches!(
        multicompose(&p1, &cell(&p1, "x(#a)"), 1, &cell(&p1, "y(#b)")),
        Err(CellError::OutOfRange { .. })
    ));
}

#[test]
fn replacement() {
    let p = f1();
    let u = cell(&p, "x(y(x(#a)))");
    let r = replace(&p, &u, 1, &cell(&p, "y(x(y(#b)))")).unwrap();
    assert_eq!(r.render(), "x(y(x(y(x(#a)))))");
    assert_eq!(replace(&p, &cell(&p, "x(#a)"), 0, &u).unwrap(), u);
    assert_eq!(replace(&p, &u, 2, &cell(&p, "x(#a)")).unwrap(), u);
    assert_eq!(replace(&p, &u, 0, &u).unwrap().render(), "x(y(x(y(x(#a)))))");
    assert!(matches!(replace(&p, &u, 0, &cell(&p, "y(#b)")), Err(CellError::Parallelism(_))));
    assert_eq!(replace(&p, &cell(&p, "a"), 0, &cell(&p, "b")).unwrap().render(), "b");
}

#[test]
fn whiskering_and_placed_composition() {
    let p = f2();
    assert_eq!(whisker(&p, &cell(&p, "f2(#a)"), 0, &cell(&p, "X1(#f3)")).unwrap().render(), "X1(#f3)");
    assert_eq!(
        whisker(&p, &cell(&p, "g1(f1(#a))"), 1, &cell(&p, "X(#f2)")).unwrap().render(),
        "e{g1(f1(#a))}(#g1, X(#f2))"
    );
    let w = cell(&p, "g1(f1(#a))");
    assert_eq!(whisker(&p, &w, 0, &cell(&p, "#g1")).unwrap(), identity_over(&w));
    assert_eq!(placed_compose(&p, &cell(&p, "X(#f2)"), 0, &cell(&p, "X1(#f3)")).unwrap().render(), "X(X1(#f3))");
    let u = cell(&p, "X(#f2)");
    assert_eq!(placed_compose(&p, &u, 0, &cell(&p, "#f2")).unwrap(), u);
    assert_eq!(placed_compose(&p, &cell(&p, "#f1"), 0, &u).unwrap(), u);
}

#[test]
fn composition() {
    let (p1, p2) = (f1(), f2());
    assert_eq!(compose(&p1, &cell(&p1, "x(#a)"), 0, &cell(&p1, "y(#b)")).unwrap().0.render(), "x(y(#b))");
    assert_eq!(compose(&p2, &cell(&p2, "X(#f2)"), 1, &cell(&p2, "X1(#f3)")).unwrap().0.render(), "X(X1(#f3))");
    let yy = compose(&p2, &cell(&p2, "Y(#g2)"), 1, &cell(&p2, "Y1(#g3)")).unwrap().0;
    let xx = compose(&p2, &cell(&p2, "X(#f2)"), 1, &cell(&p2, "X1(#f3)")).unwrap().0;
    let (c, prov) = compose(&p2, &yy, 0, &xx).unwrap();
    assert_eq!(c.render(), "e{g1(f1(#a))}(Y(Y1(#g3)), X(X1(#f3)))");
    assert_eq!(prov, ProvenancePair { left: vec![0, 1], right: vec![2, 3] });
    let u = cell(&p2, "X(X1(#f3))");
    for k in 0..2 {
        let id = iterated_identity(&iterated_boundary(&p2, &u, k, Side::Domain).unwrap(), 2);
        assert_eq!(compose(&p2, &u, k, &id).unwrap().0, u);
        let id = iterated_identity(&iterated_boundary(&p2, &u, k, Side::Codomain).unwrap(), 2);
        assert_eq!(compose(&p2, &id, k, &u).unwrap().0, u);
    }
    assert!(matches!(compose(&p1, &cell(&p1, "x(#a)"), 0, &cell(&p1, "x(#a)")), Err(CellError::BoundaryMismatch(_))));
    assert!(matches!(compose(&p1, &cell(&p1, "x(#a)"), 1, &cell(&p1, "x(#a)")), Err(CellError::KOutOfRange { .. })));
}

#[test]
fn exchange_example() {
    let p = f2();
    let a = ceval(&p, "((Y *1 Y1) *0 (X *1 X1))");
    let b = ceval(&p, "((Y *0 X) *1 (Y1 *0 X1))");
    assert_eq!(a.render(), "e{g1(f1(#a))}(Y(Y1(#g3)), X(X1(#f3)))");
    assert_eq!(a, b);
}

#[test]
fn classification() {
    let p = f2();
    let c = classify(&p, &cell(&p, "e{#a}()"));
    assert_eq!(
        c,
        Classification { is_identity: true, is_indet: false, is_many_to_one: false, identity_depth: 2 }
    );
    let c = classify(&p, &cell(&p, "X(#f2)"));
    assert!(c.is_indet && c.is_many_to_one && !c.is_identity);
    let c = classify(&p, &cell(&p, "e{g1(f1(#a))}(Y(Y1(#g3)), X(X1(#f3)))"));
    assert!(!c.is_identity && !c.is_indet && !c.is_many_to_one);
    assert_eq!(classify(&p, &cell(&p, "#f1")).identity_depth, 1);
    assert_eq!(classify(&p, &cell(&p, "a")).identity_depth, 0);
}

#[test]
fn binary_and_nullary_indets() {
    let p = f3();
    assert_eq!(indet_cell(&p, "m").unwrap().render(), "m(#g, #f)");
    assert_eq!(indet_cell(&p, "z").unwrap().render(), "z()");
    assert_eq!(indet_cell(&p, "A").unwrap().render(), "A(#n, #m)");
    let u = ceval(&p, "(n *1 m)");
    assert_eq!(u.render(), "n(m(#g, #f))");
    assert_eq!(names(occurrences(&u, Kind::Objects)), ["g", "f"]);
    let (d, c) = boundary(&p, &u);
    assert_eq!((d.render(), c.render()), ("g(f(#a))".into(), "k(#a)".into()));
    let w = ceval(&p, "(l *0 z)");
    assert_eq!(w.render(), "e{l(l(#a))}(#l, z())");
    assert_eq!(boundary(&p, &w).0.render(), "l(#a)");
}

#[test]
fn structured_export_round_trip() {
    let p = f2();
    let c = cell(&p, "e{g1(f1(#a))}(Y(Y1(#g3)), X(X1(#f3)))");
    let rec = c.to_record();
    let json = serde_json::to_string(&rec).unwrap();
    let back: CellRecord = serde_json::from_str(&json).unwrap();
    assert_eq!(Cell::from_record(&back), c);
    assert!(json.starts_with(r#"{"dim":2,"head":{"kind":"predet","payload":"#));
}
