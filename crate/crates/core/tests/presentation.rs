mod common;

use common::{f1, f2, f3, fixture};
use mltc_core::presentation::*;
use mltc_core::Presentation;

fn counts(p: &Presentation) -> Vec<usize> {
    (0..=p.top_dim()).map(|n| p.indets(n).len()).collect()
}

fn f2_text() -> String {
    std::fs::read_to_string(format!("{}/../../fixtures/f2.cmp", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

#[test]
fn fixtures_parse() {
    assert_eq!(counts(&f1()), [2, 2]);
    assert_eq!(counts(&f2()), [3, 6, 4]);
    assert_eq!(counts(&f3()), [3, 5, 5, 1]);
    for p in [f1(), f2(), f3()] {
        assert!(validate_presentation(&p).is_empty());
    }
    assert_eq!(f2().domain_of("X1").unwrap().render(), "f3(#a)");
    assert_eq!(&**f2().codomain_of("X1").unwrap(), "f2");
}

#[test]
fn parallelism_error() {
    let text = f2_text().replace("X : f2 => f1", "X : f2 => g1");
    let err = parse_presentation(&text).unwrap_err();
    assert!(matches!(err, PresentationError::Parallelism { ref indet, .. } if indet == "X"), "{err}");
    assert!(err.to_string().contains("parallelism violated"));
}

#[test]
fn parse_errors_carry_positions() {
    assert!(matches!(
        parse_presentation("dim 0: a b\ndim 1:\n  x : a -> q\n"),
        Err(PresentationError::Unresolved { line: 3, .. })
    ));
    assert!(matches!(
        parse_presentation("dim 0: a a\n"),
        Err(PresentationError::Duplicate { line: 1, .. })
    ));
    assert!(parse_presentation("dim 0: a b\ndim 1:\n  x a -> b\n").is_err());
}

#[test]
fn domains_in_either_language() {
    let c = "dim 0: a b c\ndim 1:\n  f : a -> b\n  g : b -> c\n  h : a -> c\ndim 2:\n  m : (g *0 f) => h\n";
    let m = c.replace("(g *0 f)", "(g o[0] f)");
    assert_eq!(parse_presentation(c).unwrap().levels(), parse_presentation(&m).unwrap().levels());
}

#[test]
fn validation_reports() {
    let p = f2();
    let mut levels = p.levels().to_vec();
    levels[2].entries.get_mut("X1").unwrap().as_mut().unwrap().codomain = "a".into();
    let bad = Presentation::new("bad", levels);
    let rep = validate_presentation(&bad);
    assert_eq!(rep.violations.len(), 1);
    assert_eq!(rep.violations[0].indet, "X1");
    assert_eq!(rep.violations[0].message, "codomain not an indet of dimension 1");

    // f3 runs a -> b like f1, so this stays valid
    let mut levels = p.levels().to_vec();
    let f3cell = p.default_cell("f3").unwrap().clone();
    levels[2].entries.get_mut("X").unwrap().as_mut().unwrap().domain = f3cell;
    assert!(validate_presentation(&Presentation::new("ok", levels)).is_empty());

    let mut levels = p.levels().to_vec();
    let g1 = p.default_cell("g1").unwrap().clone();
    levels[2].entries.get_mut("X").unwrap().as_mut().unwrap().domain = g1;
    let rep = validate_presentation(&Presentation::new("bad", levels));
    assert_eq!(rep.violations.len(), 1);
    assert_eq!(rep.violations[0].message, "domain not parallel to codomain");
}

#[test]
fn truncation() {
    let t = truncate_presentation(&f2(), 1).unwrap();
    assert_eq!(counts(&t), [3, 6]);
    assert!(validate_presentation(&t).is_empty());
    assert_eq!(t.levels(), &f2().levels()[..2]);
    let t = truncate_presentation(&f1(), 0).unwrap();
    assert_eq!(counts(&t), [2]);
    assert_eq!(truncate_presentation(&f1(), 5).unwrap_err(), PresentationError::Truncation(5, 1));
    for n in 0..=3 {
        assert!(validate_presentation(&truncate_presentation(&f3(), n).unwrap()).is_empty());
    }
}

#[test]
fn print_parse_round_trip() {
    for name in ["f1", "f2", "f3"] {
        let p = fixture(name);
        let printed = p.to_string();
        assert_eq!(parse_presentation(&printed).unwrap(), p, "{printed}");
    }
}
