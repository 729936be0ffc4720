//! Exhaustive and seeded random generation of cells.
//!
//! The size measure is [`weight`]: the number of indet symbols in the
//! rendering, predet payloads included. For many-to-one cells this is the
//! length of the indet occurrence sequence.

use std::collections::HashMap;

use rand::Rng;

use crate::cell::{default_cell_of, occurrences, Body, Cell, Head, Kind, Name};
use crate::presentation::Presentation;

pub fn weight(u: &Cell) -> usize {
    match u.body() {
        Body::Name(_) | Body::ObjId(_) => 0,
        Body::App(h, args) => {
            let own = match h {
                Head::Indet(_) => 1,
                Head::Predet(w) => weight(w),
            };
            own + args.iter().map(weight).sum::<usize>()
        }
    }
}

/// Size-lexicographic order on renderings.
pub fn sort_canonical(cells: &mut [Cell]) {
    cells.sort_by_cached_key(|c| {
        let s = c.render();
        (s.len(), s)
    });
}

/// Memoizing enumerator over one presentation.
pub struct Enumerator<'a> {
    p: &'a Presentation,
    mto: HashMap<(Name, usize), Vec<Cell>>,
    all: HashMap<(usize, usize), Vec<Cell>>,
}

impl<'a> Enumerator<'a> {
    pub fn new(p: &'a Presentation) -> Self {
        Enumerator { p, mto: HashMap::new(), all: HashMap::new() }
    }

    /// Many-to-one cells with target `x` and exactly `c` indet occurrences.
    pub fn many_to_one_exact(&mut self, x: &Name, c: usize) -> Vec<Cell> {
        if let Some(v) = self.mto.get(&(x.clone(), c)) {
            return v.clone();
        }
        let n = self.p.dim_of(x).expect("unknown object") + 1;
        let mut out = Vec::new();
        if c == 0 {
            out.push(Cell::obj(n, x.clone()));
        } else if n <= self.p.top_dim() {
            for f in self.p.indets_with_codomain(n, x) {
                let slots = occurrences(&default_cell_of(self.p, &f), Kind::Objects);
                for args in self.fill(&slots, c - 1) {
                    out.push(Cell::app(n, Head::Indet(f.clone()), args));
                }
            }
        }
        self.mto.insert((x.clone(), c), out.clone());
        out
    }

    /// All argument tuples with targets `slots` and total weight exactly `c`.
    fn fill(&mut self, slots: &[Name], c: usize) -> Vec<Vec<Cell>> {
        let Some((first, rest)) = slots.split_first() else {
            return if c == 0 { vec![vec![]] } else { vec![] };
        };
        let mut out = Vec::new();
        for c0 in 0..=c {
            let heads = self.many_to_one_exact(first, c0);
            if heads.is_empty() {
                continue;
            }
            let tails = self.fill(rest, c - c0);
            for h in &heads {
                for t in &tails {
                    let mut v = Vec::with_capacity(slots.len());
                    v.push(h.clone());
                    v.extend(t.iter().cloned());
                    out.push(v);
                }
            }
        }
        out
    }

    /// All `n`-cells of weight exactly `c`, predet-headed ones included.
    pub fn all_exact(&mut self, n: usize, c: usize) -> Vec<Cell> {
        if let Some(v) = self.all.get(&(n, c)) {
            return v.clone();
        }
        let mut out = Vec::new();
        if n == 0 {
            if c == 0 {
                out.extend(self.p.indets(0).into_iter().map(Cell::name));
            }
        } else {
            for x in self.p.indets(n - 1) {
                out.extend(self.many_to_one_exact(&x, c));
            }
            if n >= 2 {
                for b in 0..=c {
                    for w in self.all_exact(n - 1, b) {
                        if w.is_indet_default() {
                            continue;
                        }
                        let slots = occurrences(&w, Kind::Indets);
                        for args in self.fill(&slots, c - b) {
                            out.push(Cell::app(n, Head::Predet(w.clone()), args));
                        }
                    }
                }
            }
        }
        self.all.insert((n, c), out.clone());
        out
    }

    pub fn many_to_one(&mut self, n: usize, max_indets: usize) -> Vec<Cell> {
        let mut out = Vec::new();
        if n == 0 {
            out.extend(self.p.indets(0).into_iter().map(Cell::name));
        } else {
            for c in 0..=max_indets {
                for x in self.p.indets(n - 1) {
                    out.extend(self.many_to_one_exact(&x, c));
                }
            }
        }
        sort_canonical(&mut out);
        out
    }

    pub fn all_cells(&mut self, n: usize, max_weight: usize) -> Vec<Cell> {
        let mut out: Vec<Cell> = (0..=max_weight).flat_map(|c| self.all_exact(n, c)).collect();
        if n == 0 {
            out = self.all_exact(0, 0);
        }
        sort_canonical(&mut out);
        out
    }
}

pub fn enumerate_many_to_one(p: &Presentation, n: usize, max_indets: usize) -> Vec<Cell> {
    Enumerator::new(p).many_to_one(n, max_indets)
}

pub fn enumerate_cells(p: &Presentation, n: usize, max_weight: usize) -> Vec<Cell> {
    Enumerator::new(p).all_cells(n, max_weight)
}

/// Random many-to-one cell with target `x` and weight at most `budget`.
/// Budget left over at dead ends (no indet with the required codomain) is
/// dropped.
pub fn random_many_to_one<R: Rng>(p: &Presentation, rng: &mut R, x: &Name, budget: usize) -> Cell {
    let n = p.dim_of(x).expect("unknown object") + 1;
    let fs = if n <= p.top_dim() { p.indets_with_codomain(n, x) } else { vec![] };
    if budget == 0 || fs.is_empty() {
        return Cell::obj(n, x.clone());
    }
    let f = &fs[rng.random_range(0..fs.len())];
    let slots = occurrences(&default_cell_of(p, f), Kind::Objects);
    let args = random_args(p, rng, &slots, budget - 1);
    Cell::app(n, Head::Indet(f.clone()), args)
}

fn random_args<R: Rng>(p: &Presentation, rng: &mut R, slots: &[Name], budget: usize) -> Vec<Cell> {
    let mut shares = vec![0usize; slots.len()];
    if !slots.is_empty() {
        for _ in 0..budget {
            shares[rng.random_range(0..slots.len())] += 1;
        }
    }
    slots.iter().zip(shares).map(|(y, b)| random_many_to_one(p, rng, y, b)).collect()
}

/// Random `n`-cell of weight at most `budget`; predet heads are chosen with
/// probability one half when `n >= 2`.
pub fn random_cell<R: Rng>(p: &Presentation, rng: &mut R, n: usize, budget: usize) -> Cell {
    if n == 0 {
        let xs = p.indets(0);
        return Cell::name(xs[rng.random_range(0..xs.len())].clone());
    }
    if n >= 2 && rng.random_bool(0.5) {
        let b = rng.random_range(0..=budget);
        let w = random_cell(p, rng, n - 1, b);
        if w.is_indet_default() {
            let x = w.head_name().unwrap().clone();
            return random_many_to_one(p, rng, &x, budget);
        }
        let slots = occurrences(&w, Kind::Indets);
        let args = random_args(p, rng, &slots, budget - b);
        return Cell::app(n, Head::Predet(w), args);
    }
    let xs = p.indets(n - 1);
    let x = &xs[rng.random_range(0..xs.len())];
    random_many_to_one(p, rng, x, budget)
}
