//! The multitopic set of a presentation: at level `n` the many-to-one
//! `n`-cells, generated by the `n`-indets, with domain and codomain maps to
//! level `n-1`. Also morphisms, determined by their values on indets, and the
//! way back to a presentation.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cell::{self, multicompose, occurrences, replace, Body, Cell, CellError, CellRecord, Head, Kind, Name};
use crate::enumerate::enumerate_many_to_one;
use crate::presentation::{
    truncate_presentation, validate_presentation, IndetBoundary, IndetTable, Presentation, PresentationError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MltError {
    #[error("invalid presentation:\n{0}")]
    Invalid(String),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error("`{0}` is not a many-to-one cell")]
    NotManyToOne(String),
    #[error("{0}")]
    Cell(#[from] CellError),
    #[error("dimension {dim}: `{indet}`: {msg}")]
    Morphism { dim: usize, indet: String, msg: String },
    #[error("line {line}: {msg}")]
    MapSyntax { line: usize, msg: String },
}

/// A multitopic set backed by a presentation, with the boundaries of the
/// generators held in a table that the `d` and `c` maps read from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultitopicSet {
    base: Presentation,
    gens: HashMap<Name, (Cell, Name)>,
}

pub fn mlt_of_presentation(p: &Presentation) -> Result<MultitopicSet, MltError> {
    let report = validate_presentation(p);
    if !report.is_empty() {
        return Err(MltError::Invalid(report.to_string()));
    }
    let mut gens = HashMap::new();
    for n in 1..=p.top_dim() {
        for f in p.indets(n) {
            let d = p.domain_of(&f).unwrap().clone();
            let c = p.codomain_of(&f).unwrap().clone();
            gens.insert(f, (d, c));
        }
    }
    Ok(MultitopicSet { base: p.clone(), gens })
}

/// The presentation whose `n`-indets are the level-`n` generators with
/// their `d` and `c` as boundaries.
pub fn computad_of_mlt(s: &MultitopicSet) -> Presentation {
    let levels = (0..=s.top_dim())
        .map(|n| {
            let entries = s
                .generators(n)
                .into_iter()
                .map(|f| {
                    let b = s.gens.get(&f).map(|(d, c)| IndetBoundary { domain: d.clone(), codomain: c.clone() });
                    (f, b)
                })
                .collect();
            IndetTable { entries }
        })
        .collect();
    Presentation::new(s.base.name().to_string(), levels)
}

impl MultitopicSet {
    pub fn base(&self) -> &Presentation {
        &self.base
    }

    pub fn top_dim(&self) -> usize {
        self.base.top_dim()
    }

    /// `C_n`, in declaration order.
    pub fn generators(&self, n: usize) -> Vec<Name> {
        if n > self.top_dim() {
            return vec![];
        }
        self.base.indets(n)
    }

    /// `P_n` up to `max_indets` indet occurrences.
    pub fn pasting_diagrams(&self, n: usize, max_indets: usize) -> Vec<Cell> {
        enumerate_many_to_one(&self.base, n, max_indets)
    }

    pub fn truncate(&self, n: usize) -> Result<MultitopicSet, MltError> {
        mlt_of_presentation(&truncate_presentation(&self.base, n)?)
    }

    /// Overwrite the recorded boundary of a generator without any checks.
    /// Only useful for exercising [`check_multitopic_laws`].
    pub fn with_corrupted_boundary(&self, f: &str, domain: Cell, codomain: &str) -> MultitopicSet {
        let mut out = self.clone();
        if let Some(e) = out.gens.get_mut(f) {
            *e = (domain, codomain.into());
        }
        out
    }

    fn gen_domain(&self, f: &Name) -> Result<&Cell, CellError> {
        self.gens.get(f).map(|e| &e.0).ok_or_else(|| CellError::UnknownName(f.to_string()))
    }

    /// `d u` for a pasting diagram of positive dimension, computed from the
    /// generator table: the domain of the head with each indet occurrence
    /// replaced by the domain of the matching argument.
    pub fn d(&self, u: &Cell) -> Result<Cell, CellError> {
        match u.body() {
            Body::Name(x) => Err(CellError::Invalid(format!("0-cell `{x}` has no domain"))),
            Body::ObjId(x) => Ok(cell::default_cell_of(&self.base, x)),
            Body::App(Head::Predet(_), _) => Err(CellError::Invalid(format!("`{u}` is not many-to-one"))),
            Body::App(Head::Indet(f), args) => {
                let mut acc = self.gen_domain(f)?.clone();
                for (r, a) in args.iter().enumerate().rev() {
                    acc = replace(&self.base, &acc, r, &self.d(a)?)?;
                }
                Ok(acc)
            }
        }
    }

    /// `c u`, the target generator.
    pub fn c(&self, u: &Cell) -> Result<Name, CellError> {
        match u.body() {
            Body::Name(x) => Err(CellError::Invalid(format!("0-cell `{x}` has no codomain"))),
            Body::ObjId(x) => Ok(x.clone()),
            Body::App(Head::Predet(_), _) => Err(CellError::Invalid(format!("`{u}` is not many-to-one"))),
            Body::App(Head::Indet(f), _) => {
                self.gens.get(f).map(|e| e.1.clone()).ok_or_else(|| CellError::UnknownName(f.to_string()))
            }
        }
    }

    /// `c u` as a pasting diagram one level down.
    pub fn c_cell(&self, u: &Cell) -> Result<Cell, CellError> {
        Ok(cell::default_cell_of(&self.base, &self.c(u)?))
    }
}

pub fn enumerate_pasting_diagrams(s: &MultitopicSet, n: usize, max_indets: usize) -> Vec<Cell> {
    s.pasting_diagrams(n, max_indets)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MltViolation {
    pub law: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MltReport {
    pub checked: usize,
    pub violations: Vec<MltViolation>,
}

impl MltReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    fn check(&mut self, law: &'static str, ok: bool, detail: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations.push(MltViolation { law, detail: detail() });
        }
    }
}

/// Check the free-extension and globularity conditions on the level-`n`
/// pasting diagrams with at most `bound` indet occurrences.
pub fn check_multitopic_laws(s: &MultitopicSet, n: usize, bound: usize) -> MltReport {
    let mut rep = MltReport::default();
    if n == 0 {
        return rep;
    }
    let p = &s.base;
    let cells = s.pasting_diagrams(n, bound);
    let mut ds: Vec<Option<Cell>> = Vec::with_capacity(cells.len());
    for u in &cells {
        let (d, c) = match (s.d(u), s.c(u)) {
            (Ok(d), Ok(c)) => (d, c),
            (d, c) => {
                rep.check("d and c defined", false, || format!("{u}: {:?} {:?}", d.err(), c.err()));
                ds.push(None);
                continue;
            }
        };
        rep.check("S u = <d u>", occurrences(u, Kind::Objects) == occurrences(&d, Kind::Indets), || {
            format!("{u}: d u = {d}")
        });
        rep.check("T u = c u", cell::target_object(p, u) == Some(&c), || format!("{u}: c u = {c}"));
        rep.check("d agrees with the cell boundary", cell::domain(p, u) == d, || {
            format!("{u}: {d} vs {}", cell::domain(p, u))
        });
        let cd = cell::default_cell_of(p, &c);
        if n >= 2 {
            let par = match (s.d(&d), s.c(&d), s.d(&cd), s.c(&cd)) {
                (Ok(dd), Ok(cdd), Ok(dc), Ok(cc)) => Some((dd == dc, cdd == cc)),
                _ => None,
            };
            rep.check("globularity dd = dc", par.is_some_and(|x| x.0), || format!("{u}"));
            rep.check("globularity cd = cc", par.is_some_and(|x| x.1), || format!("{u}"));
        }
        if matches!(u.body(), Body::ObjId(_)) {
            rep.check("d 1x = c 1x = x", d == cd, || format!("{u}: d = {d}, c = {cd}"));
        }
        ds.push(Some(d));
    }
    let mut by_target: HashMap<Name, Vec<usize>> = HashMap::new();
    for (i, v) in cells.iter().enumerate() {
        if let Some(x) = cell::target_object(p, v) {
            by_target.entry(x.clone()).or_default().push(i);
        }
    }
    for (i, u) in cells.iter().enumerate() {
        let Some(du) = &ds[i] else { continue };
        for (r, x) in occurrences(u, Kind::Objects).iter().enumerate() {
            for &j in by_target.get(x).map(|v| v.as_slice()).unwrap_or(&[]) {
                let Some(dv) = &ds[j] else { continue };
                let v = &cells[j];
                let Ok((w, _)) = multicompose(p, u, r, v) else {
                    rep.check("composite defined", false, || format!("{u} o[{r}] {v}"));
                    continue;
                };
                let lhs = s.d(&w);
                let rhs = replace(p, du, r, dv);
                rep.check("d(u o[r] v) = du [r] dv", matches!((&lhs, &rhs), (Ok(a), Ok(b)) if a == b), || {
                    format!("{u} o[{r}] {v}: {lhs:?} vs {rhs:?}")
                });
                rep.check("c(u o[r] v) = c u", s.c(&w).ok() == s.c(u).ok(), || format!("{u} o[{r}] {v}"));
            }
        }
    }
    rep
}

/// Every level from 1 to one past the top, where only identities remain.
pub fn check_all_levels(s: &MultitopicSet, bound: usize) -> MltReport {
    let mut rep = MltReport::default();
    for n in 1..=s.top_dim() + 1 {
        let r = check_multitopic_laws(s, n, bound);
        rep.checked += r.checked;
        rep.violations.extend(r.violations);
    }
    rep
}

/// A morphism given by generator images, one map per dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MltMorphism {
    source: MultitopicSet,
    target: MultitopicSet,
    images: Vec<BTreeMap<Name, Name>>,
}

/// Build a morphism level by level. Generators missing from `images` map to
/// the target generator of the same name and dimension when there is one.
pub fn build_morphism(
    s: &MultitopicSet,
    t: &MultitopicSet,
    images: &BTreeMap<String, String>,
) -> Result<MltMorphism, MltError> {
    if s.top_dim() > t.top_dim() {
        return Err(MltError::Morphism {
            dim: s.top_dim(),
            indet: String::new(),
            msg: format!("source dimension {} exceeds target dimension {}", s.top_dim(), t.top_dim()),
        });
    }
    for k in images.keys() {
        if s.base.dim_of(k).is_none() {
            return Err(MltError::Morphism { dim: 0, indet: k.clone(), msg: "not a source generator".into() });
        }
    }
    let mut m = MltMorphism { source: s.clone(), target: t.clone(), images: Vec::new() };
    for n in 0..=s.top_dim() {
        let mut level = BTreeMap::new();
        for f in s.generators(n) {
            let g: Name = images.get(&*f).map(|g| g.as_str().into()).unwrap_or_else(|| f.clone());
            let err = |msg: String| MltError::Morphism { dim: n, indet: f.to_string(), msg };
            if t.base.dim_of(&g) != Some(n) {
                return Err(err(format!("image `{g}` is not a target generator of dimension {n}")));
            }
            if n >= 1 {
                let sd = s.gen_domain(&f)?;
                let want_d = m.apply(sd)?;
                let got_d = t.gen_domain(&g)?;
                if *got_d != want_d {
                    return Err(err(format!("d `{g}` = {got_d}, but the image of d `{f}` is {want_d}")));
                }
                let want_c = m.image(&s.gens[&f].1).unwrap().clone();
                let got_c = &t.gens[&g].1;
                if *got_c != want_c {
                    return Err(err(format!("c `{g}` = {got_c}, but the image of c `{f}` is {want_c}")));
                }
            }
            level.insert(f, g);
        }
        m.images.push(level);
    }
    Ok(m)
}

pub fn identity_morphism(s: &MultitopicSet) -> MltMorphism {
    build_morphism(s, s, &BTreeMap::new()).expect("identity images preserve boundaries")
}

impl MltMorphism {
    pub fn source(&self) -> &MultitopicSet {
        &self.source
    }

    pub fn target(&self) -> &MultitopicSet {
        &self.target
    }

    pub fn image(&self, f: &Name) -> Option<&Name> {
        self.images.iter().find_map(|m| m.get(f))
    }

    /// The images as `(source, target)` pairs, by dimension.
    pub fn pairs(&self) -> Vec<(Name, Name)> {
        self.images.iter().flat_map(|m| m.iter().map(|(a, b)| (a.clone(), b.clone()))).collect()
    }

    /// Relabel every head of a pasting diagram.
    pub fn apply(&self, u: &Cell) -> Result<Cell, MltError> {
        let look = |x: &Name| self.image(x).cloned().ok_or_else(|| MltError::Cell(CellError::UnknownName(x.to_string())));
        Ok(match u.body() {
            Body::Name(x) => Cell::name(look(x)?),
            Body::ObjId(x) => Cell::obj(u.dim(), look(x)?),
            Body::App(Head::Indet(f), args) => {
                let args = args.iter().map(|a| self.apply(a)).collect::<Result<Vec<_>, _>>()?;
                Cell::app(u.dim(), Head::Indet(look(f)?), args)
            }
            Body::App(Head::Predet(_), _) => return Err(MltError::NotManyToOne(u.to_string())),
        })
    }

    /// `g` after `self`.
    pub fn then(&self, g: &MltMorphism) -> Result<MltMorphism, MltError> {
        if self.target != g.source {
            return Err(MltError::Morphism {
                dim: 0,
                indet: String::new(),
                msg: "target of the first morphism is not the source of the second".into(),
            });
        }
        let images = self
            .images
            .iter()
            .map(|m| m.iter().map(|(a, b)| (a.clone(), g.image(b).expect("total on generators").clone())).collect())
            .collect();
        Ok(MltMorphism { source: self.source.clone(), target: g.target.clone(), images })
    }
}

pub fn apply_morphism(m: &MltMorphism, u: &Cell) -> Result<Cell, MltError> {
    m.apply(u)
}

/// Parse `name -> name` lines. Blank lines, `#` comments and `dim n:`
/// headers are skipped.
pub fn parse_map(text: &str) -> Result<BTreeMap<String, String>, MltError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let s = raw.split('#').next().unwrap().trim();
        if s.is_empty() || (s.starts_with("dim ") && s.ends_with(':')) {
            continue;
        }
        let err = |msg: &str| MltError::MapSyntax { line: i + 1, msg: msg.to_string() };
        let (a, b) = s.split_once("->").ok_or_else(|| err("expected `name -> name`"))?;
        let (a, b) = (a.trim(), b.trim());
        if a.is_empty() || b.is_empty() || a.contains(char::is_whitespace) || b.contains(char::is_whitespace) {
            return Err(err("expected `name -> name`"));
        }
        if out.insert(a.to_string(), b.to_string()).is_some() {
            return Err(err("name mapped twice"));
        }
    }
    Ok(out)
}

/// Parse repeated `f=g` flags.
pub fn parse_map_flags<S: AsRef<str>>(flags: &[S]) -> Result<BTreeMap<String, String>, MltError> {
    let mut out = BTreeMap::new();
    for (i, f) in flags.iter().enumerate() {
        let (a, b) = f
            .as_ref()
            .split_once('=')
            .ok_or_else(|| MltError::MapSyntax { line: i + 1, msg: format!("expected `f=g`, got `{}`", f.as_ref()) })?;
        out.insert(a.trim().to_string(), b.trim().to_string());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryEntry {
    pub dim: usize,
    pub index: usize,
    pub cell: CellRecord,
}

/// Bounded truncation of a multitopic set as plain data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MltExport {
    pub dims: usize,
    pub cells: BTreeMap<usize, Vec<CellRecord>>,
    pub d: Vec<BoundaryEntry>,
    pub c: Vec<BoundaryEntry>,
}

pub fn export(s: &MultitopicSet, max_indets: usize) -> Result<MltExport, MltError> {
    let mut out = MltExport { dims: s.top_dim(), cells: BTreeMap::new(), d: vec![], c: vec![] };
    for n in 0..=s.top_dim() {
        let cells = s.pasting_diagrams(n, max_indets);
        if n >= 1 {
            for (index, u) in cells.iter().enumerate() {
                out.d.push(BoundaryEntry { dim: n, index, cell: s.d(u)?.to_record() });
                out.c.push(BoundaryEntry { dim: n, index, cell: s.c_cell(u)?.to_record() });
            }
        }
        out.cells.insert(n, cells.iter().map(Cell::to_record).collect());
    }
    Ok(out)
}
