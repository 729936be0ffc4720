mod common;

use std::sync::OnceLock;

use common::{f1, f2, f3};
use mltc_core::cell::{boundary, compose, iterated_boundary, multicompose, occurrences, validate_cell, Kind};
use mltc_core::deduction::{check_proof_text, enumerate_terms, judge, mutate_proof_text, proof_vocabulary, random_proof, TermSet, Verdict, DEFAULT_TERM_BUDGET};
use mltc_core::enumerate::{random_cell, random_many_to_one, weight};
use mltc_core::multitopic::{apply_morphism, mlt_of_presentation};
use mltc_core::term::{decide_equal, eval_cterm, eval_mterm, readback_c, readback_m, Lang};
use mltc_core::{Presentation, Side};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fixtures() -> &'static [Presentation; 3] {
    static F: OnceLock<[Presentation; 3]> = OnceLock::new();
    F.get_or_init(|| [f1(), f2(), f3()])
}

fn pool(which: usize, lang: Lang) -> &'static TermSet {
    static P: OnceLock<Vec<TermSet>> = OnceLock::new();
    let v = P.get_or_init(|| {
        let (a, b) = (&fixtures()[0], &fixtures()[1]);
        vec![
            enumerate_terms(a, Lang::C, 1, 6, DEFAULT_TERM_BUDGET).unwrap(),
            enumerate_terms(a, Lang::M, 1, 6, DEFAULT_TERM_BUDGET).unwrap(),
            enumerate_terms(b, Lang::C, 2, 5, DEFAULT_TERM_BUDGET).unwrap(),
            enumerate_terms(b, Lang::M, 2, 6, DEFAULT_TERM_BUDGET).unwrap(),
        ]
    });
    &v[2 * which + usize::from(lang == Lang::M)]
}

fn top(p: &Presentation) -> usize {
    p.top_dim() + 1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn random_cells_validate_and_read_back(which in 0usize..3, seed: u64, budget in 0usize..7) {
        let p = &fixtures()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = (seed % (top(p) as u64 + 1)) as usize;
        let u = random_cell(p, &mut rng, n, budget);
        validate_cell(p, &u).unwrap();
        prop_assert!(weight(&u) <= budget);
        prop_assert_eq!(eval_cterm(&readback_c(p, &u), p).unwrap(), u.clone());
        if u.is_many_to_one() {
            prop_assert_eq!(eval_mterm(&readback_m(p, &u).unwrap(), p).unwrap(), u);
        }
    }

    #[test]
    fn boundaries_are_globular(which in 0usize..3, seed: u64, budget in 0usize..6) {
        let p = &fixtures()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 2 + (seed % (top(p) as u64 - 1)) as usize;
        let u = random_cell(p, &mut rng, n, budget);
        let (d, c) = boundary(p, &u);
        prop_assert_eq!(boundary(p, &d), boundary(p, &c));
        for k in 0..n {
            let s = iterated_boundary(p, &u, k, Side::Domain).unwrap();
            let t = iterated_boundary(p, &u, k, Side::Codomain).unwrap();
            prop_assert_eq!((s.dim(), t.dim()), (k, k));
        }
    }

    #[test]
    fn unit_laws_for_many_to_one(which in 0usize..3, seed: u64, budget in 0usize..6) {
        let p = &fixtures()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs = p.indets(seed as usize % top(p).min(p.top_dim() + 1));
        let x = &xs[seed as usize % xs.len()];
        let u = random_many_to_one(p, &mut rng, x, budget);
        let slots = occurrences(&mltc_core::cell::domain(p, &u), Kind::Indets);
        for (r, y) in slots.iter().enumerate() {
            let one = mltc_core::Cell::obj(u.dim(), y.clone());
            prop_assert_eq!(multicompose(p, &u, r, &one).unwrap().0, u.clone());
        }
        let one = mltc_core::Cell::obj(u.dim(), x.clone());
        prop_assert_eq!(multicompose(p, &one, 0, &u).unwrap().0, u.clone());
        let k = u.dim() - 1;
        let (d, c) = boundary(p, &u);
        let id_d = mltc_core::cell::identity_over(&d);
        let id_c = mltc_core::cell::identity_over(&c);
        prop_assert_eq!(compose(p, &u, k, &id_d).unwrap().0, u.clone());
        prop_assert_eq!(compose(p, &id_c, k, &u).unwrap().0, u);
    }

    #[test]
    fn random_proofs_are_sound(which in 0usize..2, m: bool, seed: u64, steps in 1usize..16) {
        let p = &fixtures()[which];
        let lang = if m { Lang::M } else { Lang::C };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let text = random_proof(p, pool(which, lang), &mut rng, steps).to_string();
        let eq = check_proof_text(&text, p, None).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert!(decide_equal(&eq.left, &eq.right, p).unwrap());
        let vocab = proof_vocabulary(p);
        let bad = mutate_proof_text(&text, &vocab, &mut rng);
        prop_assert!(!matches!(judge(&bad, p, lang), Verdict::Unsound(_)), "{}", bad);
    }

    #[test]
    fn identity_morphism_fixes_cells(which in 0usize..3, seed: u64, budget in 0usize..6) {
        let p = &fixtures()[which];
        let s = mlt_of_presentation(p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs = p.indets(seed as usize % (p.top_dim() + 1));
        let u = random_many_to_one(p, &mut rng, &xs[seed as usize % xs.len()], budget);
        let id = mltc_core::multitopic::identity_morphism(&s);
        prop_assert_eq!(apply_morphism(&id, &u).unwrap(), u);
    }
}
