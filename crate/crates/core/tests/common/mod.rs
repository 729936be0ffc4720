#![allow(dead_code)]

use mltc_core::term::{parse_cell, parse_cterm_opt, eval_cterm};
use mltc_core::{parse_presentation, Cell, Presentation};

pub fn fixture(name: &str) -> Presentation {
    let path = format!("{}/../../fixtures/{name}.cmp", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    parse_presentation(&text).unwrap()
}

pub fn f1() -> Presentation {
    fixture("f1")
}

pub fn f2() -> Presentation {
    fixture("f2")
}

pub fn f3() -> Presentation {
    fixture("f3")
}

pub fn cell(p: &Presentation, s: &str) -> Cell {
    parse_cell(s, p).unwrap_or_else(|e| panic!("{s}: {e}"))
}

pub fn ceval(p: &Presentation, s: &str) -> Cell {
    let t = parse_cterm_opt(s, p, None).unwrap_or_else(|e| panic!("{s}: {e}"));
    eval_cterm(&t, p).unwrap_or_else(|e| panic!("{s}: {e}"))
}
