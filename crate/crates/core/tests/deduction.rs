mod common;

use common::{f1, f2, f3};
use mltc_core::deduction::*;
use mltc_core::term::{decide_equal, parse_term, Lang};
use mltc_core::Presentation;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn key(p: &Presentation, lang: Lang, s: &str) -> Key {
    key_of(p, &parse_term(s, p, lang, None).unwrap()).unwrap()
}

fn rejected_at(text: &str, p: &Presentation) -> (usize, String) {
    match check_proof_text(text, p, None) {
        Err(ProofError::InvalidStep { step, reason, .. }) => (step, reason),
        other => panic!("expected an invalid step, got {other:?}"),
    }
}

#[test]
fn associativity_instance() {
    let p = f1();
    let eq = check_proof_text("1. associativity: ((x *0 y) *0 x) = (x *0 (y *0 x))", &p, None).unwrap();
    assert_eq!(eq.to_string(), "((x *0 y) *0 x) = (x *0 (y *0 x))");
    assert_eq!((eq.lang, eq.dim), (Lang::C, 1));
    // reversed orientation is the same schema
    check_proof_text("1. associativity: (x *0 (y *0 x)) = ((x *0 y) *0 x)", &p, None).unwrap();
    let (step, _) = rejected_at("1. associativity: ((x *0 y) *0 x) = (y *0 (x *0 x))", &p);
    assert_eq!(step, 1);
}

#[test]
fn exchange_then_symmetry() {
    let p = f2();
    let text = "1. exchange: ((Y *1 Y1) *0 (X *1 X1)) = ((Y *0 X) *1 (Y1 *0 X1))\n\
                2. symmetry [1]: ((Y *0 X) *1 (Y1 *0 X1)) = ((Y *1 Y1) *0 (X *1 X1))\n";
    let eq = check_proof_text(text, &p, None).unwrap();
    assert!(decide_equal(&eq.left, &eq.right, &p).unwrap());
    assert_eq!(eq.left.to_string(), "((Y *0 X) *1 (Y1 *0 X1))");
}

#[test]
fn undefined_congruence_is_rejected() {
    let p = f1();
    let text = "1. reflexivity: x = x\n2. congruence-left [1]: (x *0 x) = (x *0 x)\n";
    let (step, reason) = rejected_at(text, &p);
    assert_eq!(step, 2);
    assert!(reason.starts_with("composite undefined"), "{reason}");
}

#[test]
fn identity_axioms_check_boundaries() {
    let p = f1();
    check_proof_text("1. identity-left: (1_b *0 x) = x", &p, None).unwrap();
    check_proof_text("1. identity-right: (x *0 1_a) = x", &p, None).unwrap();
    check_proof_text("1. identity-right: x = (x *0 1_a)", &p, None).unwrap();
    // 1_a *0 x is undefined, so the side condition never gets to run
    let (_, reason) = rejected_at("1. identity-left: (1_a *0 x) = x", &p);
    assert!(reason.starts_with("composite undefined"), "{reason}");
    // well-defined but the wrong rule
    let (_, reason) = rejected_at("1. identity-left: (x *0 1_a) = x", &p);
    assert!(reason.contains("not an instance"), "{reason}");
    let p = f2();
    check_proof_text("1. identity-merge: (1_f1 *0 1_g1) = 1_{(g1 *0 f1)}", &p, Some(Lang::C))
        .expect_err("subscripts compose in the other order");
    check_proof_text("1. identity-merge: (1_g1 *0 1_f1) = 1_{(g1 *0 f1)}", &p, None).unwrap();
    check_proof_text("1. identity-left: (1_f1 *1 X) = X", &p, None).unwrap();
    check_proof_text("1. identity-left: (1_{1_b} *0 X) = X", &p, None).unwrap();
}

#[test]
fn mixed_dimension_congruence() {
    let p = f2();
    let text = "1. exchange: ((Y *1 Y1) *0 (X *1 X1)) = ((Y *0 X) *1 (Y1 *0 X1))\n\
                2. reflexivity: g1 = g1\n\
                3. congruence-left [2]: (g1 *0 (X *1 X1)) = (g1 *0 (X *1 X1))\n";
    let eq = check_proof_text(text, &p, None).unwrap();
    assert_eq!(eq.dim, 2);
}

#[test]
fn transitivity_and_paths() {
    let p = f1();
    let text = "1. identity-right: (x *0 1_a) = x\n\
                2. identity-left: x = (1_b *0 x)\n\
                3. transitivity [1, 2]: (x *0 1_a) = (1_b *0 x)\n\
                4. congruence-right [3]: (y *0 (x *0 1_a)) = (y *0 (1_b *0 x))\n";
    let eq = check_proof_text(text, &p, None).unwrap();
    assert_eq!(eq.to_string(), "(y *0 (x *0 1_a)) = (y *0 (1_b *0 x))");
    let bad = text.replace("2. identity-left: x = (1_b *0 x)", "2. identity-left: x = (1_b *0 (1_b *0 x))");
    match check_proof_text(&bad, &p, None) {
        Err(ProofError::InvalidStep { step, path, .. }) => {
            assert_eq!(step, 2);
            assert_eq!(path, [4, 3, 2]);
        }
        other => panic!("{other:?}"),
    }
    let (step, reason) = rejected_at("1. symmetry [2]: x = x\n2. reflexivity: x = x\n", &p);
    assert_eq!(step, 1);
    assert!(reason.contains("not an earlier step"));
    assert!(matches!(
        parse_proof("1. reflexivity: x = x\n1. reflexivity: y = y", &p, None),
        Err(ProofError::Parse { line: 2, .. })
    ));
    assert!(matches!(parse_proof("", &p, None), Err(ProofError::Empty)));
    assert!(matches!(parse_proof("1. frobnicate: x = x", &p, None), Err(ProofError::Parse { line: 1, .. })));
}

#[test]
fn m_term_axioms() {
    let p = f1();
    check_proof_text("1. identity-left: (1_b o[0] x) = x", &p, None).unwrap();
    check_proof_text("1. identity-right: (x o[0] 1_a) = x", &p, None).unwrap();
    check_proof_text("1. associativity: ((x o[0] y) o[0] x) = (x o[0] (y o[0] x))", &p, None).unwrap();
    let (_, reason) = rejected_at("1. exchange: (x o[0] y) = (x o[0] y)", &p);
    assert!(reason.contains("not available"));
    let p = f3();
    // t : (l, l) -> l, z : () -> l
    check_proof_text("1. commutativity: ((t o[0] z) o[0] z) = ((t o[1] z) o[0] z)", &p, None).unwrap();
    check_proof_text("1. commutativity: ((t o[0] t) o[2] z) = ((t o[1] z) o[0] t)", &p, None).unwrap();
    check_proof_text("1. commutativity: ((t o[0] t) o[1] z) = ((t o[1] z) o[0] t)", &p, None).unwrap_err();
    check_proof_text("1. associativity: ((t o[0] t) o[1] z) = (t o[0] (t o[1] z))", &p, None).unwrap();
}

#[test]
fn proof_text_round_trip() {
    let p = f2();
    let text = "1. exchange: ((Y *1 Y1) *0 (X *1 X1)) = ((Y *0 X) *1 (Y1 *0 X1))\n\
                2. symmetry [1]: ((Y *0 X) *1 (Y1 *0 X1)) = ((Y *1 Y1) *0 (X *1 X1))\n";
    let pf = parse_proof(text, &p, None).unwrap();
    assert_eq!(pf.to_string(), text);
    assert_eq!(parse_proof(&pf.to_string(), &p, None).unwrap(), pf);
}

#[test]
fn oracle_spec_examples() {
    let p = f1();
    let part = closure_oracle(&p, Lang::C, 1, 5).unwrap();
    let x = key(&p, Lang::C, "x");
    assert_eq!(part.same_block(&x, &key(&p, Lang::C, "(x *0 1_a)")), Some(true));
    assert_eq!(part.same_block(&x, &key(&p, Lang::C, "(1_b *0 x)")), Some(true));
    assert_eq!(part.same_block(&x, &key(&p, Lang::C, "y")), Some(false));
    let p = f2();
    let part = closure_oracle(&p, Lang::C, 2, 7).unwrap();
    let a = key(&p, Lang::C, "((Y *1 Y1) *0 (X *1 X1))");
    let b = key(&p, Lang::C, "((Y *0 X) *1 (Y1 *0 X1))");
    assert_eq!(part.same_block(&a, &b), Some(true));
}

#[test]
fn oracle_budget() {
    let p = f2();
    assert_eq!(enumerate_terms(&p, Lang::C, 2, 7, 100).unwrap_err(), OracleError::Budget(100));
}

// frozen from the oracle runs; the eval-kernel block counts are computed independently
#[test]
fn oracle_agrees_with_evaluation() {
    for (p, lang, dim, bound, terms, blocks) in [
        (f1(), Lang::C, 1, 8, 204, 10),
        (f1(), Lang::M, 1, 8, 204, 10),
        (f2(), Lang::C, 2, 7, 6321, 51),
        (f2(), Lang::M, 2, 9, 888, 12),
        (f3(), Lang::C, 1, 7, 492, 23),
        (f3(), Lang::M, 2, 7, 1180, 67),
    ] {
        let ag = oracle_agreement(&p, lang, dim, bound, bound + 2).unwrap();
        assert!(ag.holds(), "{}: {ag:?}", p.name());
        assert_eq!((ag.terms, ag.oracle_blocks, ag.eval_blocks), (terms, blocks, blocks), "{}", p.name());
    }
}

#[test]
fn oracle_is_monotone() {
    let p = f2();
    let small = closure_oracle(&p, Lang::C, 2, 5).unwrap();
    let big = closure_oracle(&p, Lang::C, 2, 7).unwrap();
    let ts = &small.terms;
    for block in small.blocks() {
        for &i in &block[1..] {
            assert_eq!(big.same_block(ts.key(block[0]), ts.key(i)), Some(true));
        }
    }
}

#[test]
fn random_proofs_check() {
    let p = f2();
    let pool = enumerate_terms(&p, Lang::C, 2, 5, DEFAULT_TERM_BUDGET).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let pf = random_proof(&p, &pool, &mut rng, 12);
        let text = pf.to_string();
        let eq = check_proof_text(&text, &p, None).unwrap_or_else(|e| panic!("{e}\n{text}"));
        assert!(decide_equal(&eq.left, &eq.right, &p).unwrap());
    }
}
