//! Executable law suites over enumerated and sampled cells.
//!
//! Every check compares canonical cells structurally. A suite returns one
//! [`LawReport`] per law with the number of instances examined and the
//! first failures found.

use std::collections::{BTreeSet, HashMap};

use indexmap::IndexMap;
use rand::seq::IndexedRandom;
use rand::Rng;

use crate::cell::{
    classify, codomain, compose, domain, indet_cell, iterated_boundary, iterated_identity,
    multicompose, occurrence_count, occurrences, placed_compose, replace, target_object, whisker, Cell, Kind,
    Name, Side,
};
use crate::enumerate::{random_cell, sort_canonical, Enumerator};
use crate::presentation::Presentation;

const MAX_FAILURES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawReport {
    pub law: String,
    pub checked: usize,
    pub failures: Vec<String>,
    pub failure_count: usize,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }
}

/// Collects law outcomes in first-seen order.
#[derive(Debug, Default)]
pub struct Ledger {
    reports: IndexMap<String, LawReport>,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn check(&mut self, law: &str, ok: bool, msg: impl FnOnce() -> String) {
        let r = self.reports.entry(law.to_string()).or_insert_with(|| LawReport {
            law: law.to_string(),
            checked: 0,
            failures: vec![],
            failure_count: 0,
        });
        r.checked += 1;
        if !ok {
            r.failure_count += 1;
            if r.failures.len() < MAX_FAILURES {
                r.failures.push(msg());
            }
        }
    }

    pub fn into_reports(self) -> Vec<LawReport> {
        self.reports.into_values().collect()
    }
}

pub fn all_passed(reports: &[LawReport]) -> bool {
    reports.iter().all(LawReport::passed)
}

pub fn total_checked(reports: &[LawReport]) -> usize {
    reports.iter().map(|r| r.checked).sum()
}

/// Cells grouped by dimension, `cells[n]` holding the `n`-cells.
#[derive(Debug, Clone, Default)]
pub struct Population {
    pub cells: Vec<Vec<Cell>>,
}

impl Population {
    /// All cells of dimension `0..=max_dim` with weight at most `bound`.
    pub fn exhaustive(p: &Presentation, max_dim: usize, bound: usize) -> Self {
        let mut e = Enumerator::new(p);
        Population { cells: (0..=max_dim).map(|n| e.all_cells(n, bound)).collect() }
    }

    /// Many-to-one cells only.
    pub fn many_to_one(p: &Presentation, max_dim: usize, bound: usize) -> Self {
        let mut e = Enumerator::new(p);
        Population { cells: (0..=max_dim).map(|n| e.many_to_one(n, bound)).collect() }
    }

    /// `per_dim` random cells in each dimension `1..=max_dim` with weights
    /// drawn from `lo..=hi`.
    pub fn random<R: Rng>(p: &Presentation, rng: &mut R, max_dim: usize, per_dim: usize, lo: usize, hi: usize) -> Self {
        let mut cells = vec![p.indets(0).into_iter().map(Cell::name).collect::<Vec<_>>()];
        for n in 1..=max_dim {
            let mut v: Vec<Cell> = (0..per_dim)
                .map(|_| {
                    let b = rng.random_range(lo..=hi);
                    random_cell(p, rng, n, b)
                })
                .collect();
            sort_canonical(&mut v);
            v.dedup();
            cells.push(v);
        }
        Population { cells }
    }

    pub fn merge(&self, other: &Population) -> Population {
        let n = self.cells.len().max(other.cells.len());
        let cells = (0..n)
            .map(|d| {
                let set: BTreeSet<Cell> = self
                    .cells
                    .get(d)
                    .into_iter()
                    .chain(other.cells.get(d))
                    .flat_map(|v| v.iter().cloned())
                    .collect();
                let mut v: Vec<Cell> = set.into_iter().collect();
                sort_canonical(&mut v);
                v
            })
            .collect();
        Population { cells }
    }

    pub fn max_dim(&self) -> usize {
        self.cells.len().saturating_sub(1)
    }

    pub fn dim(&self, n: usize) -> &[Cell] {
        self.cells.get(n).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The `k`-boundary of `u` after promotion to a dimension above `k`.
pub fn k_boundary(p: &Presentation, u: &Cell, k: usize, side: Side) -> Cell {
    if k >= u.dim() {
        iterated_identity(u, k)
    } else {
        iterated_boundary(p, u, k, side).expect("k below dimension")
    }
}

/// True when `u`, viewed in dimension `m`, is an identity on a `k`-cell.
pub fn is_k_identity(p: &Presentation, u: &Cell, m: usize, k: usize) -> bool {
    let u = iterated_identity(u, m.max(u.dim()));
    classify(p, &u).identity_depth >= u.dim() - k
}

/// Lookup tables over a population.
struct Index<'a> {
    p: &'a Presentation,
    /// many-to-one `n`-cells by target object
    by_target: Vec<HashMap<Name, Vec<Cell>>>,
    /// many-to-one `n`-cells by (source, target)
    by_parallel: Vec<HashMap<(Vec<Name>, Name), Vec<Cell>>>,
    /// all cells by `k`-codomain and by `k`-domain, for each `k`
    by_kcod: Vec<HashMap<Cell, Vec<Cell>>>,
    by_kdom: Vec<HashMap<Cell, Vec<Cell>>>,
}

impl<'a> Index<'a> {
    fn new(p: &'a Presentation, pop: &Population) -> Self {
        let top = pop.max_dim();
        let mut by_target = vec![HashMap::new(); top + 1];
        let mut by_parallel = vec![HashMap::new(); top + 1];
        let mut by_kcod: Vec<HashMap<Cell, Vec<Cell>>> = vec![HashMap::new(); top.max(1)];
        let mut by_kdom = by_kcod.clone();
        for u in pop.iter() {
            let n = u.dim();
            if n >= 1 {
                if let Some(x) = target_object(p, u) {
                    by_target[n].entry(x.clone()).or_insert_with(Vec::new).push(u.clone());
                    by_parallel[n]
                        .entry((occurrences(u, Kind::Objects), x.clone()))
                        .or_insert_with(Vec::new)
                        .push(u.clone());
                }
            }
            for k in 0..by_kcod.len() {
                by_kcod[k].entry(k_boundary(p, u, k, Side::Codomain)).or_default().push(u.clone());
                by_kdom[k].entry(k_boundary(p, u, k, Side::Domain)).or_default().push(u.clone());
            }
        }
        Index { p, by_target, by_parallel, by_kcod, by_kdom }
    }

    fn targeting(&self, n: usize, x: &Name) -> &[Cell] {
        self.by_target.get(n).and_then(|m| m.get(x)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Many-to-one cells parallel to the indet `f`.
    fn parallel_to(&self, f: &Name) -> &[Cell] {
        let fc = indet_cell(self.p, f).expect("known indet");
        if fc.dim() == 0 {
            return &[];
        }
        let key = (occurrences(&fc, Kind::Objects), target_object(self.p, &fc).unwrap().clone());
        self.by_parallel.get(fc.dim()).and_then(|m| m.get(&key)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Cells `v` with `k`-codomain `b`, i.e. candidates for `_ *k v`.
    fn with_kcod(&self, k: usize, b: &Cell) -> &[Cell] {
        self.by_kcod.get(k).and_then(|m| m.get(b)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Cells `u` with `k`-domain `b`, i.e. candidates for `u *k _`.
    fn with_kdom(&self, k: usize, b: &Cell) -> &[Cell] {
        self.by_kdom.get(k).and_then(|m| m.get(b)).map(Vec::as_slice).unwrap_or(&[])
    }
}

fn mc(p: &Presentation, u: &Cell, r: usize, v: &Cell) -> Option<Cell> {
    multicompose(p, u, r, v).ok().map(|x| x.0)
}

fn cmp(p: &Presentation, u: &Cell, k: usize, v: &Cell) -> Option<Cell> {
    compose(p, u, k, v).ok().map(|x| x.0)
}

fn show(x: &Option<Cell>) -> String {
    x.as_ref().map(Cell::render).unwrap_or_else(|| "undefined".into())
}

// ---------------------------------------------------------------------------
// multicategory laws

fn mc_unit_and_bookkeeping(p: &Presentation, u: &Cell, r: usize, v: &Cell, led: &mut Ledger) {
    let su = occurrences(u, Kind::Objects);
    let x = su[r].clone();
    let id = Cell::obj(u.dim(), x.clone());
    let got = mc(p, u, r, &id);
    led.check("multicategory: right identity", got.as_ref() == Some(u), || {
        format!("{u} o[{r}] #{x} gave {}", show(&got))
    });
    let (c, prov) = match multicompose(p, u, r, v) {
        Ok(x) => x,
        Err(e) => {
            led.check("multicategory: defined on matching targets", false, || format!("{u} o[{r}] {v}: {e}"));
            return;
        }
    };
    let sv = occurrences(v, Kind::Objects);
    let mut expect = su.clone();
    expect.splice(r..=r, sv.iter().cloned());
    let sc = occurrences(&c, Kind::Objects);
    led.check("multicategory: source splice", sc == expect, || format!("S({u} o[{r}] {v}) = {sc:?}"));
    let mut seen = vec![false; sc.len()];
    let mut ok = prov.left.len() + 1 == su.len() && prov.right.len() == sv.len();
    let lefts = (0..su.len()).filter(|&i| i != r).zip(prov.left.iter());
    for (i, &j) in lefts {
        ok &= j < sc.len() && !seen[j] && sc[j] == su[i];
        if j < sc.len() {
            seen[j] = true;
        }
    }
    for (i, &j) in prov.right.iter().enumerate() {
        ok &= j < sc.len() && !seen[j] && sc[j] == sv[i];
        if j < sc.len() {
            seen[j] = true;
        }
    }
    ok &= seen.iter().all(|&b| b);
    led.check("multicategory: provenance is a coproduct", ok, || format!("{u} o[{r}] {v}: {prov:?}"));
    let dc = domain(p, &c);
    let want = replace(p, &domain(p, u), r, &domain(p, v)).ok();
    led.check("multicategory: domain of composite", want.as_ref() == Some(&dc), || {
        format!("d({u} o[{r}] {v}) = {dc}, expected {}", show(&want))
    });
    led.check("multicategory: codomain of composite", codomain(p, &c) == codomain(p, u), || {
        format!("c({u} o[{r}] {v}) differs from c({u})")
    });
}

fn mc_left_identity(p: &Presentation, v: &Cell, led: &mut Ledger) {
    let x = target_object(p, v).unwrap().clone();
    let id = Cell::obj(v.dim(), x.clone());
    let got = mc(p, &id, 0, v);
    led.check("multicategory: left identity", got.as_ref() == Some(v), || format!("#{x} o[0] {v} gave {}", show(&got)));
    let (d, c) = (domain(p, &id), codomain(p, &id));
    let xc = indet_cell(p, &x).unwrap();
    led.check("multicategory: identity boundary", d == xc && c == xc, || format!("boundary of #{x}"));
}

/// `(u o[r] v) o[q'] w = (u o[q] w) o[r'] v` for `r < q`.
fn mc_commutativity(p: &Presentation, u: &Cell, r: usize, q: usize, v: &Cell, w: &Cell, led: &mut Ledger) {
    let nv = occurrence_count(v, Kind::Objects);
    let lhs = mc(p, u, r, v).and_then(|t| mc(p, &t, q + nv - 1, w));
    let rhs = mc(p, u, q, w).and_then(|t| mc(p, &t, r, v));
    led.check("multicategory: commutativity", lhs.is_some() && lhs == rhs, || {
        format!("u={u} r={r} q={q} v={v} w={w}: {} vs {}", show(&lhs), show(&rhs))
    });
    // the reindexing must agree with the provenance map
    if let Ok((_, prov)) = multicompose(p, u, r, v) {
        let j = prov.left.get(q - 1).copied();
        led.check("multicategory: commutativity reindexing", j == Some(q + nv - 1), || {
            format!("u={u} r={r} q={q}: provenance sends q to {j:?}")
        });
    }
}

/// `(u o[r] v) o[r+q] w = u o[r] (v o[q] w)`.
fn mc_associativity(p: &Presentation, u: &Cell, r: usize, v: &Cell, q: usize, w: &Cell, led: &mut Ledger) {
    let lhs = mc(p, u, r, v).and_then(|t| mc(p, &t, r + q, w));
    let rhs = mc(p, v, q, w).and_then(|t| mc(p, u, r, &t));
    led.check("multicategory: associativity", lhs.is_some() && lhs == rhs, || {
        format!("u={u} r={r} v={v} q={q} w={w}: {} vs {}", show(&lhs), show(&rhs))
    });
}

/// Every multicategory law instance drawn from `pop`.
pub fn multicategory_exhaustive(p: &Presentation, pop: &Population, led: &mut Ledger) {
    let ix = Index::new(p, pop);
    for u in pop.iter().filter(|u| u.dim() >= 1) {
        let n = u.dim();
        let su = occurrences(u, Kind::Objects);
        if target_object(p, u).is_some() {
            mc_left_identity(p, u, led);
        }
        for r in 0..su.len() {
            for v in ix.targeting(n, &su[r]) {
                mc_unit_and_bookkeeping(p, u, r, v, led);
                let sv = occurrences(v, Kind::Objects);
                for q in 0..sv.len() {
                    for w in ix.targeting(n, &sv[q]) {
                        mc_associativity(p, u, r, v, q, w, led);
                    }
                }
                for q in r + 1..su.len() {
                    for w in ix.targeting(n, &su[q]) {
                        mc_commutativity(p, u, r, q, v, w, led);
                    }
                }
            }
        }
    }
}

/// `count` law instances with the outer cell drawn from `outer` and the
/// inner cells from `pool`.
pub fn multicategory_sampled<R: Rng>(
    p: &Presentation,
    outer: &Population,
    pool: &Population,
    rng: &mut R,
    count: usize,
    led: &mut Ledger,
) {
    let ix = Index::new(p, &pool.merge(outer));
    let us: Vec<&Cell> = outer.iter().filter(|u| u.dim() >= 1).collect();
    if us.is_empty() {
        return;
    }
    let mut done = 0;
    let mut attempts = 0;
    while done < count && attempts < count * 50 {
        attempts += 1;
        let u = us[rng.random_range(0..us.len())];
        let n = u.dim();
        let su = occurrences(u, Kind::Objects);
        if su.is_empty() {
            if target_object(p, u).is_some() {
                mc_left_identity(p, u, led);
                done += 1;
            }
            continue;
        }
        let r = rng.random_range(0..su.len());
        let Some(v) = ix.targeting(n, &su[r]).choose(rng) else { continue };
        match rng.random_range(0..4) {
            0 => mc_unit_and_bookkeeping(p, u, r, v, led),
            1 => {
                if target_object(p, u).is_none() {
                    continue;
                }
                mc_left_identity(p, u, led)
            }
            2 => {
                let sv = occurrences(v, Kind::Objects);
                if sv.is_empty() {
                    continue;
                }
                let q = rng.random_range(0..sv.len());
                let Some(w) = ix.targeting(n, &sv[q]).choose(rng) else { continue };
                mc_associativity(p, u, r, v, q, w, led)
            }
            _ => {
                if su.len() < 2 {
                    continue;
                }
                let q = rng.random_range(0..su.len());
                if q == r {
                    continue;
                }
                let (r, q) = (r.min(q), r.max(q));
                let Some(v) = ix.targeting(n, &su[r]).choose(rng) else { continue };
                let Some(w) = ix.targeting(n, &su[q]).choose(rng) else { continue };
                mc_commutativity(p, u, r, q, v, w, led)
            }
        }
        done += 1;
    }
}

// ---------------------------------------------------------------------------
// omega-category laws

fn compose_identity(p: &Presentation, u: &Cell, k: usize, led: &mut Ledger) {
    let m = u.dim();
    let a = k_boundary(p, u, k, Side::Domain);
    let b = k_boundary(p, u, k, Side::Codomain);
    let r = cmp(p, u, k, &iterated_identity(&a, m));
    led.check("omega: right identity", r.as_ref() == Some(u), || format!("{u} *{k} 1({a}) gave {}", show(&r)));
    let l = cmp(p, &iterated_identity(&b, m), k, u);
    led.check("omega: left identity", l.as_ref() == Some(u), || format!("1({b}) *{k} {u} gave {}", show(&l)));
    if k + 1 < m {
        let r = cmp(p, u, k, &a);
        led.check("omega: whiskering by a boundary cell", r.as_ref() == Some(u), || {
            format!("{u} *{k} {a} gave {}", show(&r))
        });
    }
}

fn compose_bookkeeping(p: &Presentation, u: &Cell, k: usize, v: &Cell, led: &mut Ledger) {
    let (c, prov) = match compose(p, u, k, v) {
        Ok(x) => x,
        Err(e) => {
            led.check("omega: defined on matching boundaries", false, || format!("{u} *{k} {v}: {e}"));
            return;
        }
    };
    let m = c.dim();
    let (u, v) = (iterated_identity(u, m), iterated_identity(v, m));
    let occ = occurrences(&c, Kind::Indets);
    let (ou, ov) = (occurrences(&u, Kind::Indets), occurrences(&v, Kind::Indets));
    let mut seen = vec![false; occ.len()];
    let mut ok = prov.left.len() == ou.len() && prov.right.len() == ov.len();
    for (names, map) in [(&ou, &prov.left), (&ov, &prov.right)] {
        for (i, &j) in map.iter().enumerate() {
            ok &= j < occ.len() && !seen[j] && occ[j] == names[i];
            if j < occ.len() {
                seen[j] = true;
            }
        }
    }
    ok &= seen.iter().all(|&b| b);
    led.check("omega: provenance is a bijection", ok, || format!("{u} *{k} {v}: {prov:?}"));
    let (dc, cc) = (domain(p, &c), codomain(p, &c));
    let (wd, wc) = if k + 1 == m {
        (Some(domain(p, &v)), Some(codomain(p, &u)))
    } else {
        (cmp(p, &domain(p, &u), k, &domain(p, &v)), cmp(p, &codomain(p, &u), k, &codomain(p, &v)))
    };
    led.check("omega: boundary of composite", wd.as_ref() == Some(&dc) && wc.as_ref() == Some(&cc), || {
        format!("{u} *{k} {v}: boundary ({dc}, {cc}), expected ({}, {})", show(&wd), show(&wc))
    });
}

fn compose_associativity(p: &Presentation, u: &Cell, k: usize, v: &Cell, w: &Cell, led: &mut Ledger) {
    let lhs = cmp(p, u, k, v).and_then(|t| cmp(p, &t, k, w));
    let rhs = cmp(p, v, k, w).and_then(|t| cmp(p, u, k, &t));
    led.check("omega: associativity", lhs.is_some() && lhs == rhs, || {
        format!("({u} *{k} {v}) *{k} {w}: {} vs {}", show(&lhs), show(&rhs))
    });
}

/// `(a *k b) *l (c *k d) = (a *l c) *k (b *l d)` for `l < k`.
fn compose_exchange(p: &Presentation, quad: [&Cell; 4], k: usize, l: usize, led: &mut Ledger) {
    let m = quad.iter().map(|x| x.dim()).max().unwrap();
    let [a, b, c, d] = quad.map(|x| iterated_identity(x, m));
    let (a, b, c, d) = (&a, &b, &c, &d);
    let lhs = cmp(p, a, k, b).zip(cmp(p, c, k, d)).and_then(|(x, y)| cmp(p, &x, l, &y));
    let rhs = cmp(p, a, l, c).zip(cmp(p, b, l, d)).and_then(|(x, y)| cmp(p, &x, k, &y));
    led.check("omega: exchange", lhs.is_some() && lhs == rhs, || {
        format!("a={a} b={b} c={c} d={d} k={k} l={l}: {} vs {}", show(&lhs), show(&rhs))
    });
}

fn globularity(p: &Presentation, u: &Cell, led: &mut Ledger) {
    if u.dim() < 2 {
        return;
    }
    let (d, c) = (domain(p, u), codomain(p, u));
    let ok = domain(p, &d) == domain(p, &c) && codomain(p, &d) == codomain(p, &c);
    led.check("globularity", ok, || format!("{u}: d = {d}, c = {c}"));
}

fn well_behaved(p: &Presentation, u: &Cell, k: usize, v: &Cell, c: &Cell, led: &mut Ledger) {
    let m = c.dim();
    if is_k_identity(p, c, m, k) {
        let ok = is_k_identity(p, u, m, k) && is_k_identity(p, v, m, k);
        led.check("well-behaved: identities are indecomposable", ok, || format!("{u} *{k} {v} = {c}"));
    }
    if c.is_indet_default() {
        let ok = is_k_identity(p, u, m, k) || is_k_identity(p, v, m, k);
        led.check("well-behaved: indets are indecomposable", ok, || format!("{u} *{k} {v} = {c}"));
    }
}

/// Composable pairs `(u, k, v)` within `pop`, with the composite.
pub fn composable_pairs(p: &Presentation, pop: &Population) -> Vec<(Cell, usize, Cell, Cell)> {
    let ix = Index::new(p, pop);
    let mut out = Vec::new();
    for u in pop.iter() {
        for k in 0..pop.max_dim() {
            let b = k_boundary(p, u, k, Side::Domain);
            for v in ix.with_kcod(k, &b) {
                if k >= u.dim().max(v.dim()) {
                    continue;
                }
                if let Some(c) = cmp(p, u, k, v) {
                    out.push((u.clone(), k, v.clone(), c));
                }
            }
        }
    }
    out
}

pub fn omega_exhaustive(p: &Presentation, pop: &Population, led: &mut Ledger) {
    let ix = Index::new(p, pop);
    for u in pop.iter() {
        globularity(p, u, led);
        for k in 0..u.dim() {
            compose_identity(p, u, k, led);
        }
    }
    let pairs = composable_pairs(p, pop);
    for (u, k, v, c) in &pairs {
        compose_bookkeeping(p, u, *k, v, led);
        well_behaved(p, u, *k, v, c, led);
        let b = k_boundary(p, v, *k, Side::Domain);
        for w in ix.with_kcod(*k, &b) {
            if *k < v.dim().max(w.dim()) {
                compose_associativity(p, u, *k, v, w, led);
            }
        }
    }
    // exchange: join k-composites on their l-boundaries
    let mut by_lcod: HashMap<(usize, usize, Cell), Vec<usize>> = HashMap::new();
    for (i, (_, k, _, c)) in pairs.iter().enumerate() {
        for l in 0..*k {
            by_lcod.entry((*k, l, k_boundary(p, c, l, Side::Codomain))).or_default().push(i);
        }
    }
    for (a, k, b, c1) in &pairs {
        for l in 0..*k {
            let key = (*k, l, k_boundary(p, c1, l, Side::Domain));
            for &j in by_lcod.get(&key).map(Vec::as_slice).unwrap_or(&[]) {
                let (c, _, d, _) = &pairs[j];
                compose_exchange(p, [a, b, c, d], *k, l, led);
            }
        }
    }
}

pub fn omega_sampled<R: Rng>(
    p: &Presentation,
    outer: &Population,
    pool: &Population,
    rng: &mut R,
    count: usize,
    led: &mut Ledger,
) {
    let all = pool.merge(outer);
    let ix = Index::new(p, &all);
    let us: Vec<&Cell> = outer.iter().filter(|u| u.dim() >= 1).collect();
    if us.is_empty() {
        return;
    }
    let top = all.max_dim();
    let mut done = 0;
    let mut attempts = 0;
    while done < count && attempts < count * 50 {
        attempts += 1;
        let u = us[rng.random_range(0..us.len())];
        let k = rng.random_range(0..top);
        let pick = |rng: &mut R, x: &Cell| -> Option<Cell> {
            let b = k_boundary(p, x, k, Side::Domain);
            ix.with_kcod(k, &b).choose(rng).cloned()
        };
        match rng.random_range(0..4) {
            0 => {
                if k >= u.dim() {
                    continue;
                }
                globularity(p, u, led);
                compose_identity(p, u, k, led)
            }
            1 => {
                let Some(v) = pick(rng, u) else { continue };
                if k >= u.dim().max(v.dim()) {
                    continue;
                }
                let Some(c) = cmp(p, u, k, &v) else { continue };
                compose_bookkeeping(p, u, k, &v, led);
                well_behaved(p, u, k, &v, &c, led)
            }
            2 => {
                let Some(v) = pick(rng, u) else { continue };
                let Some(w) = pick(rng, &v) else { continue };
                if k >= u.dim().max(v.dim()) || k >= v.dim().max(w.dim()) {
                    continue;
                }
                compose_associativity(p, u, k, &v, &w, led)
            }
            _ => {
                if k == 0 {
                    continue;
                }
                let l = rng.random_range(0..k);
                let Some(b) = pick(rng, u) else { continue };
                let Some(x) = cmp(p, u, k, &b) else { continue };
                let bl = k_boundary(p, &x, l, Side::Domain);
                let Some(c) = ix.by_kcod[l].get(&bl).and_then(|v| v.choose(rng)).cloned() else { continue };
                let Some(d) = pick(rng, &c) else { continue };
                if cmp(p, &c, k, &d).and_then(|y| cmp(p, &x, l, &y)).is_none() {
                    continue;
                }
                compose_exchange(p, [u, &b, &c, &d], k, l, led)
            }
        }
        done += 1;
    }
}

// ---------------------------------------------------------------------------
// placed composition, replacement, the mixed law and interchange

fn placed_laws(p: &Presentation, ix: &Index, u: &Cell, led: &mut Ledger) {
    let m = u.dim();
    let du = domain(p, u);
    let occ = occurrences(&du, Kind::Indets);
    let su = occurrences(u, Kind::Objects);
    led.check("placed: source equals domain occurrences", su == occ, || format!("{u}: S = {su:?}, <d> = {occ:?}"));
    for (r, x) in occ.iter().enumerate() {
        let id = Cell::obj(m, x.clone());
        let got = placed_compose(p, u, r, &id).ok();
        led.check("placed: right identity", got.as_ref() == Some(u), || format!("{u} o[{r}] #{x}: {}", show(&got)));
        for v in ix.targeting(m, x) {
            let c = placed_compose(p, u, r, v).ok();
            let via = whisker(p, &du, r, v).ok().and_then(|wv| cmp(p, u, m - 1, &wv));
            led.check("placed: agrees with whiskered composition", c.is_some() && c == via, || {
                format!("{u} o[{r}] {v}: {} vs {}", show(&c), show(&via))
            });
            let Some(c) = c else { continue };
            let want = replace(p, &du, r, &domain(p, v)).ok();
            led.check("placed: domain of composite", want.as_ref() == Some(&domain(p, &c)), || {
                format!("{u} o[{r}] {v}")
            });
            led.check("placed: codomain of composite", codomain(p, &c) == codomain(p, u), || format!("{u} o[{r}] {v}"));
            let dv = domain(p, v);
            let nv = occurrence_count(&dv, Kind::Indets);
            for q in r + 1..occ.len() {
                for w in ix.targeting(m, &occ[q]) {
                    let lhs = placed_compose(p, &c, q + nv - 1, w).ok();
                    let rhs = placed_compose(p, u, q, w).ok().and_then(|t| placed_compose(p, &t, r, v).ok());
                    led.check("placed: commutativity", lhs.is_some() && lhs == rhs, || {
                        format!("u={u} r={r} q={q} v={v} w={w}")
                    });
                }
            }
            let docc = occurrences(&dv, Kind::Indets);
            for (q, y) in docc.iter().enumerate() {
                for w in ix.targeting(m, y) {
                    let lhs = placed_compose(p, &c, r + q, w).ok();
                    let rhs = placed_compose(p, v, q, w).ok().and_then(|t| placed_compose(p, u, r, &t).ok());
                    led.check("placed: associativity", lhs.is_some() && lhs == rhs, || {
                        format!("u={u} r={r} v={v} q={q} w={w}")
                    });
                }
            }
        }
    }
    if let Some(x) = target_object(p, u) {
        let id = Cell::obj(m, x.clone());
        let got = placed_compose(p, &id, 0, u).ok();
        led.check("placed: left identity", got.as_ref() == Some(u), || format!("#{x} o[0] {u}: {}", show(&got)));
    }
}

fn replacement_laws(p: &Presentation, ix: &Index, u: &Cell, led: &mut Ledger) {
    let occ = occurrences(u, Kind::Indets);
    if u.dim() == 0 {
        return;
    }
    if u.is_indet_default() {
        for v in ix.parallel_to(&occ[0]) {
            let got = replace(p, u, 0, v).ok();
            led.check("replacement: indet is a left unit", got.as_ref() == Some(v), || format!("{u} [0] {v}"));
        }
    }
    let bu = (domain(p, u), codomain(p, u));
    for (r, f) in occ.iter().enumerate() {
        let fc = indet_cell(p, f).unwrap();
        let got = replace(p, u, r, &fc).ok();
        led.check("replacement: indet is a right unit", got.as_ref() == Some(u), || format!("{u} [{r}] {fc}"));
        for v in ix.parallel_to(f) {
            let Some(c) = replace(p, u, r, v).ok() else {
                led.check("replacement: defined on parallel cells", false, || format!("{u} [{r}] {v}"));
                continue;
            };
            let ok = occurrences(&c, Kind::Objects) == occurrences(u, Kind::Objects)
                && target_object(p, &c) == target_object(p, u)
                && (domain(p, &c), codomain(p, &c)) == bu;
            led.check("replacement: preserves source, target and boundary", ok, || format!("{u} [{r}] {v} = {c}"));
            let nv = occurrence_count(v, Kind::Indets);
            for q in r + 1..occ.len() {
                for w in ix.parallel_to(&occ[q]) {
                    let lhs = replace(p, &c, q + nv - 1, w).ok();
                    let rhs = replace(p, u, q, w).ok().and_then(|t| replace(p, &t, r, v).ok());
                    led.check("replacement: commutativity", lhs.is_some() && lhs == rhs, || {
                        format!("u={u} r={r} q={q} v={v} w={w}: {} vs {}", show(&lhs), show(&rhs))
                    });
                }
            }
            for (q, g) in occurrences(v, Kind::Indets).iter().enumerate() {
                for w in ix.parallel_to(g) {
                    let lhs = replace(p, &c, r + q, w).ok();
                    let rhs = replace(p, v, q, w).ok().and_then(|t| replace(p, u, r, &t).ok());
                    led.check("replacement: associativity", lhs.is_some() && lhs == rhs, || {
                        format!("u={u} r={r} v={v} q={q} w={w}: {} vs {}", show(&lhs), show(&rhs))
                    });
                }
            }
        }
    }
}

/// `w [q] (u [r] v) = (w [q] u) [r] v`, whiskering then replacing.
fn mixed_law(p: &Presentation, ix: &Index, w: &Cell, led: &mut Ledger) {
    let m = w.dim() + 1;
    let occ = occurrences(w, Kind::Indets);
    for (q, x) in occ.iter().enumerate() {
        for u in ix.targeting(m, x) {
            let Some(wu) = whisker(p, w, q, u).ok() else {
                led.check("mixed: whiskering defined", false, || format!("{w} [{q}] {u}"));
                continue;
            };
            for (r, f) in occurrences(u, Kind::Indets).iter().enumerate() {
                for v in ix.parallel_to(f) {
                    let lhs = replace(p, &wu, r, v).ok();
                    let rhs = replace(p, u, r, v).ok().and_then(|t| whisker(p, w, q, &t).ok());
                    led.check("mixed: whiskering and replacement commute", lhs.is_some() && lhs == rhs, || {
                        format!("w={w} q={q} u={u} r={r} v={v}: {} vs {}", show(&lhs), show(&rhs))
                    });
                }
            }
        }
    }
}

fn interchange(p: &Presentation, ix: &Index, v1: &Cell, led: &mut Ledger) {
    let m = v1.dim();
    let dv1 = domain(p, v1);
    let occ = occurrences(&dv1, Kind::Indets);
    for (r, x) in occ.iter().enumerate() {
        for v2 in ix.targeting(m, x) {
            let Some(pc) = placed_compose(p, v1, r, v2).ok() else { continue };
            for k in 0..m {
                // u *k (v1 o[r] v2) = (u *k v1) o[r'] v2
                let b = k_boundary(p, &pc, k, Side::Codomain);
                for u in ix.with_kdom(k, &b).iter().filter(|u| u.dim() == m) {
                    let r2 = if k + 1 == m {
                        Some(r)
                    } else {
                        compose(p, &domain(p, u), k, &dv1).ok().map(|(_, pr)| pr.right[r])
                    };
                    let lhs = cmp(p, u, k, &pc);
                    let rhs = r2.and_then(|r2| cmp(p, u, k, v1).and_then(|t| placed_compose(p, &t, r2, v2).ok()));
                    led.check("interchange: left operand", lhs.is_some() && lhs == rhs, || {
                        format!("u={u} k={k} v1={v1} r={r} v2={v2}: {} vs {}", show(&lhs), show(&rhs))
                    });
                }
                if k + 1 == m {
                    continue;
                }
                // (v1 o[r] v2) *k w = (v1 *k w) o[r'] v2
                let b = k_boundary(p, &pc, k, Side::Domain);
                for w in ix.with_kcod(k, &b).iter().filter(|w| w.dim() == m) {
                    let r2 = compose(p, &dv1, k, &domain(p, w)).ok().map(|(_, pr)| pr.left[r]);
                    let lhs = cmp(p, &pc, k, w);
                    let rhs = r2.and_then(|r2| cmp(p, v1, k, w).and_then(|t| placed_compose(p, &t, r2, v2).ok()));
                    led.check("interchange: right operand", lhs.is_some() && lhs == rhs, || {
                        format!("v1={v1} r={r} v2={v2} k={k} w={w}: {} vs {}", show(&lhs), show(&rhs))
                    });
                }
            }
        }
    }
}

pub fn placed_exhaustive(p: &Presentation, pop: &Population, led: &mut Ledger) {
    let ix = Index::new(p, pop);
    for u in pop.iter().filter(|u| u.dim() >= 1) {
        placed_laws(p, &ix, u, led);
        replacement_laws(p, &ix, u, led);
        interchange(p, &ix, u, led);
    }
    for w in pop.iter() {
        if w.dim() < pop.max_dim() {
            mixed_law(p, &ix, w, led);
        }
    }
    for u in pop.dim(0) {
        for v in pop.dim(0) {
            let got = replace(p, u, 0, v).ok();
            led.check("replacement: dimension 0 is constant", got.as_ref() == Some(v), || format!("{u} [0] {v}"));
        }
    }
}

// ---------------------------------------------------------------------------
// indet characterization

/// Cells of `pop` that are a composite of two cells of `factors`, neither
/// being an identity on the composition dimension.
pub fn decomposable(p: &Presentation, factors: &Population) -> BTreeSet<Cell> {
    let mut out = BTreeSet::new();
    for (u, k, v, c) in composable_pairs(p, factors) {
        let m = c.dim();
        if !is_k_identity(p, &u, m, k) && !is_k_identity(p, &v, m, k) {
            out.insert(c);
        }
    }
    out
}

pub fn indet_characterization(p: &Presentation, pop: &Population, factors: &Population, led: &mut Ledger) {
    let dec = decomposable(p, factors);
    for u in pop.iter().filter(|u| u.dim() >= 1) {
        let c = classify(p, u);
        let predicted = !c.is_identity && !dec.contains(u);
        led.check("indet iff indecomposable non-identity", predicted == c.is_indet, || {
            format!("{u}: indet = {}, indecomposable non-identity = {predicted}", c.is_indet)
        });
    }
}

// ---------------------------------------------------------------------------
// suites

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub bound: usize,
    pub random_instances: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { bound: 6, random_instances: 10_000, seed: 0x6d6c_7463 }
    }
}

pub fn random_population(p: &Presentation, seed: u64, bound: usize) -> Population {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    Population::random(p, &mut rng, p.top_dim() + 1, 200, bound + 1, bound + 6)
}

pub fn multicategory_suite(p: &Presentation, cfg: &SuiteConfig) -> Vec<LawReport> {
    use rand::SeedableRng;
    let mut led = Ledger::new();
    let pop = Population::exhaustive(p, p.top_dim() + 1, cfg.bound);
    multicategory_exhaustive(p, &pop, &mut led);
    let big = random_population(p, cfg.seed, cfg.bound);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed ^ 1);
    multicategory_sampled(p, &big, &pop, &mut rng, cfg.random_instances, &mut led);
    led.into_reports()
}

pub fn omega_suite(p: &Presentation, cfg: &SuiteConfig) -> Vec<LawReport> {
    use rand::SeedableRng;
    let mut led = Ledger::new();
    let pop = Population::exhaustive(p, p.top_dim() + 1, cfg.bound);
    omega_exhaustive(p, &pop, &mut led);
    let big = random_population(p, cfg.seed, cfg.bound);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed ^ 2);
    omega_sampled(p, &big, &pop, &mut rng, cfg.random_instances, &mut led);
    led.into_reports()
}

pub fn placed_suite(p: &Presentation, cfg: &SuiteConfig) -> Vec<LawReport> {
    let mut led = Ledger::new();
    let pop = Population::exhaustive(p, p.top_dim() + 1, cfg.bound);
    placed_exhaustive(p, &pop, &mut led);
    led.into_reports()
}

pub fn indet_suite(p: &Presentation, bound: usize, factor_bound: usize) -> Vec<LawReport> {
    let mut led = Ledger::new();
    let pop = Population::exhaustive(p, p.top_dim() + 1, bound);
    let factors = Population::exhaustive(p, p.top_dim() + 1, factor_bound);
    indet_characterization(p, &pop, &factors, &mut led);
    led.into_reports()
}
