//! Canonical cells and the composition, replacement and boundary operations.
//!
//! An `m`-cell with `m >= 1` is a reduced Polish term over three kinds of
//! symbols: object slots `#x` (with `x` an `(m-1)`-indet), indets of
//! dimension `m`, and predets `e{w}` for non-indet `(m-1)`-cells `w`.
//! Arguments of any head always have an indet as target, so predets can
//! only occur as the outermost head.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::presentation::Presentation;

pub type Name = Arc<str>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CellError {
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("position {index} out of range ({len} occurrences)")]
    OutOfRange { index: usize, len: usize },
    #[error("target mismatch: slot expects `{expected}`, cell has target `{found}`")]
    TargetMismatch { expected: String, found: String },
    #[error("parallelism violated: {0}")]
    Parallelism(String),
    #[error("boundary mismatch: {0}")]
    BoundaryMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("k out of range: k = {k}, dimension {dim}")]
    KOutOfRange { k: usize, dim: usize },
    #[error("invalid cell: {0}")]
    Invalid(String),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell(Arc<Node>);

#[derive(Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Node {
    dim: usize,
    body: Body,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Body {
    Name(Name),
    ObjId(Name),
    App(Head, Vec<Cell>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Head {
    Indet(Name),
    Predet(Cell),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Objects,
    Indets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Domain,
    Codomain,
}

/// Coprojections of a composite: `left[i]` is where occurrence `i` of the
/// left operand lands in the result, likewise `right`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProvenancePair {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub is_identity: bool,
    pub is_indet: bool,
    pub is_many_to_one: bool,
    pub identity_depth: usize,
}

impl Cell {
    /// A 0-cell.
    pub fn name(x: impl Into<Name>) -> Cell {
        Cell(Arc::new(Node { dim: 0, body: Body::Name(x.into()) }))
    }

    /// The identity arrow `#x` in dimension `dim`.
    pub fn obj(dim: usize, x: impl Into<Name>) -> Cell {
        assert!(dim >= 1, "object slots live in dimension >= 1");
        Cell(Arc::new(Node { dim, body: Body::ObjId(x.into()) }))
    }

    /// Unchecked application node; use [`validate_cell`] on untrusted input.
    pub fn app(dim: usize, head: Head, args: Vec<Cell>) -> Cell {
        assert!(dim >= 1, "applications live in dimension >= 1");
        Cell(Arc::new(Node { dim, body: Body::App(head, args) }))
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn body(&self) -> &Body {
        &self.0.body
    }

    pub fn args(&self) -> &[Cell] {
        match &self.0.body {
            Body::App(_, args) => args,
            _ => &[],
        }
    }

    /// Name of the head symbol for `Name`, `ObjId` and indet applications.
    pub fn head_name(&self) -> Option<&Name> {
        match &self.0.body {
            Body::Name(x) | Body::ObjId(x) | Body::App(Head::Indet(x), _) => Some(x),
            Body::App(Head::Predet(_), _) => None,
        }
    }

    /// True for 0-cells and for `f(#x0, ..)`, the default cell of an indet.
    pub fn is_indet_default(&self) -> bool {
        match &self.0.body {
            Body::Name(_) => true,
            Body::App(Head::Indet(_), args) => args.iter().all(|a| matches!(a.body(), Body::ObjId(_))),
            _ => false,
        }
    }

    pub fn is_many_to_one(&self) -> bool {
        !matches!(self.0.body, Body::App(Head::Predet(_), _))
    }

    /// Number of symbols in the rendering, payloads included.
    pub fn size(&self) -> usize {
        match &self.0.body {
            Body::Name(_) | Body::ObjId(_) => 1,
            Body::App(h, args) => {
                let head = match h {
                    Head::Indet(_) => 1,
                    Head::Predet(w) => 1 + w.size(),
                };
                head + args.iter().map(Cell::size).sum::<usize>()
            }
        }
    }

    pub fn render(&self) -> String {
        self.to_string()
    }

    pub fn to_record(&self) -> CellRecord {
        let (head, args) = match &self.0.body {
            Body::Name(x) => (HeadRecord::Name { name: x.to_string() }, vec![]),
            Body::ObjId(x) => (HeadRecord::Identity { name: x.to_string() }, vec![]),
            Body::App(Head::Indet(f), args) => (HeadRecord::Indet { name: f.to_string() }, args.clone()),
            Body::App(Head::Predet(w), args) => {
                (HeadRecord::Predet { payload: Box::new(w.to_record()) }, args.clone())
            }
        };
        CellRecord { dim: self.dim(), head, args: args.iter().map(Cell::to_record).collect() }
    }

    pub fn from_record(rec: &CellRecord) -> Cell {
        let args: Vec<Cell> = rec.args.iter().map(Cell::from_record).collect();
        match &rec.head {
            HeadRecord::Name { name } => Cell::name(name.as_str()),
            HeadRecord::Identity { name } => Cell::obj(rec.dim, name.as_str()),
            HeadRecord::Indet { name } => Cell::app(rec.dim, Head::Indet(name.as_str().into()), args),
            HeadRecord::Predet { payload } => Cell::app(rec.dim, Head::Predet(Cell::from_record(payload)), args),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.body {
            Body::Name(x) => write!(f, "{x}"),
            Body::ObjId(x) => write!(f, "#{x}"),
            Body::App(head, args) => {
                match head {
                    Head::Indet(g) => write!(f, "{g}(")?,
                    Head::Predet(w) => write!(f, "e{{{w}}}(")?,
                }
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Debug for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Structured export of a cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRecord {
    pub dim: usize,
    pub head: HeadRecord,
    pub args: Vec<CellRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum HeadRecord {
    Name { name: String },
    Identity { name: String },
    Indet { name: String },
    Predet { payload: Box<CellRecord> },
}

pub fn indet_cell(p: &Presentation, f: &str) -> Result<Cell, CellError> {
    p.default_cell(f).cloned().ok_or_else(|| CellError::UnknownName(f.to_string()))
}

pub(crate) fn default_cell_of(p: &Presentation, x: &str) -> Cell {
    match p.default_cell(x) {
        Some(c) => c.clone(),
        None => panic!("no indet `{x}` in presentation `{}`", p.name()),
    }
}

/// `εw`: `#x` when `w` is the indet `x`, otherwise the predet over `w`.
pub fn identity_over(w: &Cell) -> Cell {
    let m = w.dim() + 1;
    if w.is_indet_default() {
        return Cell::obj(m, w.head_name().unwrap().clone());
    }
    let slots = occurrences(w, Kind::Indets).into_iter().map(|x| Cell::obj(m, x)).collect();
    Cell::app(m, Head::Predet(w.clone()), slots)
}

pub fn iterated_identity(w: &Cell, m: usize) -> Cell {
    assert!(m >= w.dim(), "iterated_identity cannot lower dimension");
    let mut c = w.clone();
    while c.dim() < m {
        c = identity_over(&c);
    }
    c
}

pub fn occurrences(u: &Cell, kind: Kind) -> Vec<Name> {
    fn walk(u: &Cell, kind: Kind, out: &mut Vec<Name>) {
        match u.body() {
            Body::Name(x) => out.push(x.clone()),
            Body::ObjId(x) => {
                if kind == Kind::Objects {
                    out.push(x.clone())
                }
            }
            Body::App(h, args) => {
                if let (Kind::Indets, Head::Indet(f)) = (kind, h) {
                    out.push(f.clone());
                }
                for a in args {
                    walk(a, kind, out);
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(u, kind, &mut out);
    out
}

pub fn occurrence_count(u: &Cell, kind: Kind) -> usize {
    match u.body() {
        Body::Name(_) => 1,
        Body::ObjId(_) => usize::from(kind == Kind::Objects),
        Body::App(h, args) => {
            let own = usize::from(kind == Kind::Indets && matches!(h, Head::Indet(_)));
            own + args.iter().map(|a| occurrence_count(a, kind)).sum::<usize>()
        }
    }
}

/// `Tu` as a cell one dimension down.
pub fn codomain(p: &Presentation, u: &Cell) -> Cell {
    match u.body() {
        Body::Name(_) => panic!("0-cells have no boundary"),
        Body::ObjId(x) => default_cell_of(p, x),
        Body::App(Head::Indet(f), _) => {
            let c = p.codomain_of(f).unwrap_or_else(|| panic!("indet `{f}` has no codomain"));
            default_cell_of(p, c)
        }
        Body::App(Head::Predet(w), _) => w.clone(),
    }
}

pub fn domain(p: &Presentation, u: &Cell) -> Cell {
    match u.body() {
        Body::Name(_) => panic!("0-cells have no boundary"),
        Body::ObjId(x) => default_cell_of(p, x),
        Body::App(h, args) => {
            let head_dom = match h {
                Head::Indet(f) => {
                    p.domain_of(f).unwrap_or_else(|| panic!("indet `{f}` has no domain")).clone()
                }
                Head::Predet(w) => w.clone(),
            };
            let reps: Vec<Cell> = args.iter().map(|a| domain(p, a)).collect();
            substitute_occurrences(&head_dom, &reps)
        }
    }
}

pub fn boundary(p: &Presentation, u: &Cell) -> (Cell, Cell) {
    (domain(p, u), codomain(p, u))
}

pub fn iterated_boundary(p: &Presentation, u: &Cell, k: usize, side: Side) -> Result<Cell, CellError> {
    if k >= u.dim() {
        return Err(CellError::KOutOfRange { k, dim: u.dim() });
    }
    let mut c = u.clone();
    while c.dim() > k {
        c = match side {
            Side::Domain => domain(p, &c),
            Side::Codomain => codomain(p, &c),
        };
    }
    Ok(c)
}

/// Replace the `i`-th object slot of `u` by `vals[i]`, for all `i` at once.
pub(crate) fn fill_slots(u: &Cell, vals: &[Cell]) -> Cell {
    fn go(u: &Cell, vals: &[Cell], next: &mut usize) -> Cell {
        match u.body() {
            Body::Name(_) => u.clone(),
            Body::ObjId(_) => {
                let v = vals[*next].clone();
                *next += 1;
                v
            }
            Body::App(h, args) => {
                let args = args.iter().map(|a| go(a, vals, next)).collect();
                Cell::app(u.dim(), h.clone(), args)
            }
        }
    }
    let mut next = 0;
    let out = go(u, vals, &mut next);
    debug_assert_eq!(next, vals.len());
    out
}

/// Replace every indet occurrence `i` of `w` by `reps[i]` simultaneously;
/// the arguments found at an occurrence are wired into the slots of its
/// replacement.
pub(crate) fn substitute_occurrences(w: &Cell, reps: &[Cell]) -> Cell {
    fn go(w: &Cell, reps: &[Cell], next: &mut usize) -> Cell {
        match w.body() {
            Body::Name(_) => {
                let v = reps[*next].clone();
                *next += 1;
                v
            }
            Body::ObjId(_) => w.clone(),
            Body::App(Head::Indet(_), args) => {
                let rep = reps[*next].clone();
                *next += 1;
                let args: Vec<Cell> = args.iter().map(|a| go(a, reps, next)).collect();
                fill_slots(&rep, &args)
            }
            Body::App(h @ Head::Predet(_), args) => {
                let args = args.iter().map(|a| go(a, reps, next)).collect();
                Cell::app(w.dim(), h.clone(), args)
            }
        }
    }
    let mut next = 0;
    let out = go(w, reps, &mut next);
    debug_assert_eq!(next, reps.len());
    out
}

/// Target object of a many-to-one cell, `None` for predet-headed cells.
pub(crate) fn target_object<'a>(p: &'a Presentation, v: &'a Cell) -> Option<&'a Name> {
    match v.body() {
        Body::ObjId(x) => Some(x),
        Body::App(Head::Indet(f), _) => p.codomain_of(f),
        _ => None,
    }
}

pub fn multicompose(p: &Presentation, u: &Cell, r: usize, v: &Cell) -> Result<(Cell, ProvenancePair), CellError> {
    if u.dim() != v.dim() {
        return Err(CellError::DimensionMismatch(format!("{u} has dimension {}, {v} has {}", u.dim(), v.dim())));
    }
    if u.dim() == 0 {
        return Err(CellError::DimensionMismatch("multicomposition needs dimension >= 1".into()));
    }
    let su = occurrences(u, Kind::Objects);
    if r >= su.len() {
        return Err(CellError::OutOfRange { index: r, len: su.len() });
    }
    match target_object(p, v) {
        Some(x) if *x == su[r] => {}
        found => {
            return Err(CellError::TargetMismatch {
                expected: su[r].to_string(),
                found: found.map(|x| x.to_string()).unwrap_or_else(|| codomain(p, v).to_string()),
            })
        }
    }
    let nv = occurrence_count(v, Kind::Objects);
    let mut vals: Vec<Cell> = su.iter().map(|x| Cell::obj(u.dim(), x.clone())).collect();
    vals[r] = v.clone();
    let left = (0..su.len()).filter(|&i| i != r).map(|i| if i < r { i } else { i + nv - 1 }).collect();
    let right = (0..nv).map(|j| r + j).collect();
    Ok((fill_slots(u, &vals), ProvenancePair { left, right }))
}

pub fn replace(p: &Presentation, u: &Cell, r: usize, v: &Cell) -> Result<Cell, CellError> {
    if u.dim() != v.dim() {
        return Err(CellError::DimensionMismatch(format!("{u} has dimension {}, {v} has {}", u.dim(), v.dim())));
    }
    if u.dim() == 0 {
        if r != 0 {
            return Err(CellError::OutOfRange { index: r, len: 1 });
        }
        return Ok(v.clone());
    }
    let occ = occurrences(u, Kind::Indets);
    if r >= occ.len() {
        return Err(CellError::OutOfRange { index: r, len: occ.len() });
    }
    let f = default_cell_of(p, &occ[r]);
    let sf = occurrences(&f, Kind::Objects);
    let sv = occurrences(v, Kind::Objects);
    if sf != sv || target_object(p, v) != target_object(p, &f) {
        return Err(CellError::Parallelism(format!("{v} is not parallel to occurrence {r} (`{}`) of {u}", occ[r])));
    }
    let reps: Vec<Cell> =
        occ.iter().enumerate().map(|(i, x)| if i == r { v.clone() } else { default_cell_of(p, x) }).collect();
    Ok(substitute_occurrences(u, &reps))
}

pub fn whisker(p: &Presentation, w: &Cell, r: usize, v: &Cell) -> Result<Cell, CellError> {
    if v.dim() != w.dim() + 1 {
        return Err(CellError::DimensionMismatch(format!("whiskering {v} into {w}")));
    }
    Ok(multicompose(p, &identity_over(w), r, v)?.0)
}

pub fn placed_compose(p: &Presentation, u: &Cell, r: usize, v: &Cell) -> Result<Cell, CellError> {
    Ok(multicompose(p, u, r, v)?.0)
}

pub fn compose(p: &Presentation, u: &Cell, k: usize, v: &Cell) -> Result<(Cell, ProvenancePair), CellError> {
    let m = u.dim().max(v.dim());
    if k >= m {
        return Err(CellError::KOutOfRange { k, dim: m });
    }
    let u = iterated_identity(u, m);
    let v = iterated_identity(v, m);
    let du = iterated_boundary(p, &u, k, Side::Domain)?;
    let cv = iterated_boundary(p, &v, k, Side::Codomain)?;
    if du != cv {
        return Err(CellError::BoundaryMismatch(format!("{k}-domain {du} of {u} differs from {k}-codomain {cv} of {v}")));
    }
    Ok(compose_unchecked(p, &u, k, &v).0)
}

/// Composite together with its object-slot provenance. The left map is
/// partial when `k = m - 1`, since slots of `u` are consumed.
pub(crate) fn compose_unchecked(
    p: &Presentation,
    u: &Cell,
    k: usize,
    v: &Cell,
) -> ((Cell, ProvenancePair), (Vec<Option<usize>>, Vec<Option<usize>>)) {
    let m = u.dim();
    let mut cx = Ctx { p, next_hole: 0 };
    let tu = TNode::from_cell(u, Tag::Left);
    let tv = TNode::from_cell(v, Tag::Right);
    let t = cx.compose(tu, k, tv, m);
    let cell = t.to_cell(m);
    let (obj, ind) = t.tags();
    let nu = occurrence_count(u, Kind::Indets);
    let nv = occurrence_count(v, Kind::Indets);
    let (il, ir) = invert(&ind, nu, nv);
    let (ol, or) = invert(&obj, occurrence_count(u, Kind::Objects), occurrence_count(v, Kind::Objects));
    let il = il.into_iter().map(|x| x.expect("lost indet occurrence of left operand")).collect();
    let ir = ir.into_iter().map(|x| x.expect("lost indet occurrence of right operand")).collect();
    ((cell, ProvenancePair { left: il, right: ir }), (ol, or))
}

fn invert(tags: &[Tag], nl: usize, nr: usize) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
    let mut l = vec![None; nl];
    let mut r = vec![None; nr];
    for (pos, t) in tags.iter().enumerate() {
        match *t {
            Tag::Left(i) => l[i] = Some(pos),
            Tag::Right(j) => r[j] = Some(pos),
            _ => {}
        }
    }
    (l, r)
}

pub fn classify(p: &Presentation, u: &Cell) -> Classification {
    let is_identity = u.dim() >= 1 && occurrence_count(u, Kind::Indets) == 0;
    let is_indet = u.is_indet_default();
    let mut depth = 0;
    let mut c = u.clone();
    while c.dim() >= 1 && occurrence_count(&c, Kind::Indets) == 0 {
        c = domain(p, &c);
        depth += 1;
    }
    Classification { is_identity, is_indet, is_many_to_one: u.is_many_to_one(), identity_depth: depth }
}

/// Check the arity, typing and reducedness invariants against `p`.
pub fn validate_cell(p: &Presentation, u: &Cell) -> Result<(), CellError> {
    let m = u.dim();
    match u.body() {
        Body::Name(x) => {
            if m != 0 || p.dim_of(x) != Some(0) {
                return Err(CellError::Invalid(format!("`{x}` is not a 0-indet")));
            }
        }
        Body::ObjId(x) => {
            if m == 0 || p.dim_of(x) != Some(m - 1) {
                return Err(CellError::Invalid(format!("`#{x}` needs a {}-indet", m.saturating_sub(1))));
            }
        }
        Body::App(h, args) => {
            if m == 0 {
                return Err(CellError::Invalid("application in dimension 0".into()));
            }
            let source: Vec<Name> = match h {
                Head::Indet(f) => {
                    if p.dim_of(f) != Some(m) {
                        return Err(CellError::Invalid(format!("`{f}` is not a {m}-indet")));
                    }
                    occurrences(&default_cell_of(p, f), Kind::Objects)
                }
                Head::Predet(w) => {
                    if w.dim() + 1 != m {
                        return Err(CellError::Invalid(format!("predet payload {w} has wrong dimension")));
                    }
                    validate_cell(p, w)?;
                    if w.is_indet_default() {
                        return Err(CellError::Invalid(format!("predet over indet cell {w}")));
                    }
                    occurrences(w, Kind::Indets)
                }
            };
            if source.len() != args.len() {
                return Err(CellError::Invalid(format!("{u}: expected {} arguments, found {}", source.len(), args.len())));
            }
            for (a, x) in args.iter().zip(&source) {
                if a.dim() != m {
                    return Err(CellError::Invalid(format!("argument {a} of {u} has wrong dimension")));
                }
                validate_cell(p, a)?;
                if target_object(p, a) != Some(x) {
                    return Err(CellError::Invalid(format!("argument {a} of {u} does not have target `{x}`")));
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tag {
    None,
    Left(usize),
    Right(usize),
    Hole(usize),
}

/// A cell whose object slots and indet heads carry provenance tags.
#[derive(Debug, Clone)]
enum TNode {
    Obj(Name, Tag),
    App(Head, Tag, Vec<TNode>),
}

impl TNode {
    fn from_cell(c: &Cell, side: fn(usize) -> Tag) -> TNode {
        fn go(c: &Cell, side: fn(usize) -> Tag, obj: &mut usize, ind: &mut usize) -> TNode {
            match c.body() {
                Body::Name(_) => unreachable!("tagged cells have dimension >= 1"),
                Body::ObjId(x) => {
                    *obj += 1;
                    TNode::Obj(x.clone(), side(*obj - 1))
                }
                Body::App(h, args) => {
                    let tag = match h {
                        Head::Indet(_) => {
                            *ind += 1;
                            side(*ind - 1)
                        }
                        Head::Predet(_) => Tag::None,
                    };
                    TNode::App(h.clone(), tag, args.iter().map(|a| go(a, side, obj, ind)).collect())
                }
            }
        }
        go(c, side, &mut 0, &mut 0)
    }

    fn to_cell(&self, m: usize) -> Cell {
        match self {
            TNode::Obj(x, _) => Cell::obj(m, x.clone()),
            TNode::App(h, _, args) => Cell::app(m, h.clone(), args.iter().map(|a| a.to_cell(m)).collect()),
        }
    }

    /// Object tags and indet tags in Polish order.
    fn tags(&self) -> (Vec<Tag>, Vec<Tag>) {
        fn go(t: &TNode, obj: &mut Vec<Tag>, ind: &mut Vec<Tag>) {
            match t {
                TNode::Obj(_, tag) => obj.push(*tag),
                TNode::App(h, tag, args) => {
                    if matches!(h, Head::Indet(_)) {
                        ind.push(*tag);
                    }
                    for a in args {
                        go(a, obj, ind);
                    }
                }
            }
        }
        let (mut obj, mut ind) = (Vec::new(), Vec::new());
        go(self, &mut obj, &mut ind);
        (obj, ind)
    }

    fn fill_slots(&self, vals: &[TNode]) -> TNode {
        fn go(t: &TNode, vals: &[TNode], next: &mut usize) -> TNode {
            match t {
                TNode::Obj(..) => {
                    *next += 1;
                    vals[*next - 1].clone()
                }
                TNode::App(h, tag, args) => TNode::App(h.clone(), *tag, args.iter().map(|a| go(a, vals, next)).collect()),
            }
        }
        go(self, vals, &mut 0)
    }

    fn plug_holes(&self, holes: &HashMap<usize, TNode>) -> TNode {
        match self {
            TNode::Obj(_, Tag::Hole(h)) if holes.contains_key(h) => holes[h].clone(),
            TNode::Obj(..) => self.clone(),
            TNode::App(h, tag, args) => TNode::App(h.clone(), *tag, args.iter().map(|a| a.plug_holes(holes)).collect()),
        }
    }
}

struct Ctx<'a> {
    p: &'a Presentation,
    next_hole: usize,
}

impl Ctx<'_> {
    fn hole(&mut self) -> usize {
        self.next_hole += 1;
        self.next_hole - 1
    }

    /// `Some((w, slot tags))` when `t` is `εw`.
    fn as_eps(&self, t: &TNode) -> Option<(Cell, Vec<Tag>)> {
        match t {
            TNode::Obj(x, tag) => Some((default_cell_of(self.p, x), vec![*tag])),
            TNode::App(Head::Predet(w), _, args) => {
                let mut tags = Vec::with_capacity(args.len());
                for a in args {
                    match a {
                        TNode::Obj(_, tag) => tags.push(*tag),
                        _ => return None,
                    }
                }
                Some((w.clone(), tags))
            }
            _ => None,
        }
    }

    /// `εw` with the given slot tags, `m = dim(w) + 1`.
    fn eps(&self, w: &Cell, tags: &[Tag]) -> TNode {
        if w.is_indet_default() {
            return TNode::Obj(w.head_name().unwrap().clone(), tags[0]);
        }
        let slots = occurrences(w, Kind::Indets).into_iter().zip(tags).map(|(x, t)| TNode::Obj(x, *t)).collect();
        TNode::App(Head::Predet(w.clone()), Tag::None, slots)
    }

    fn compose(&mut self, t: TNode, k: usize, s: TNode, m: usize) -> TNode {
        if k + 1 == m {
            self.compose_top(t, s, m)
        } else {
            self.compose_low(t, k, s, m)
        }
    }

    fn compose_top(&mut self, t: TNode, s: TNode, m: usize) -> TNode {
        let dt = domain(self.p, &t.to_cell(m));
        if dt.is_indet_default() {
            return t.fill_slots(&[s]);
        }
        match s {
            TNode::App(Head::Predet(w0), _, args) => {
                debug_assert_eq!(w0, dt);
                t.fill_slots(&args)
            }
            _ => unreachable!("codomain of right operand must be the predet payload {dt}"),
        }
    }

    fn compose_low(&mut self, t: TNode, k: usize, s: TNode, m: usize) -> TNode {
        if let Some((w, tags)) = self.as_eps(&t) {
            return self.eps_left(&w, &tags, k, s, m);
        }
        match &t {
            TNode::App(Head::Indet(f), _, _) => {
                let x = self.p.codomain_of(f).expect("indet without codomain");
                let xc = default_cell_of(self.p, x);
                let h = self.hole();
                let e = self.eps_left(&xc, &[Tag::Hole(h)], k, s, m);
                e.plug_holes(&HashMap::from([(h, t)]))
            }
            TNode::App(Head::Predet(w), _, args) => {
                let hs: Vec<usize> = args.iter().map(|_| self.hole()).collect();
                let tags: Vec<Tag> = hs.iter().map(|&h| Tag::Hole(h)).collect();
                let e = self.eps_left(w, &tags, k, s, m);
                e.plug_holes(&hs.into_iter().zip(args.iter().cloned()).collect())
            }
            TNode::Obj(..) => unreachable!(),
        }
    }

    /// `εw •ₖ s` for `k < m - 1`.
    fn eps_left(&mut self, w: &Cell, wtags: &[Tag], k: usize, s: TNode, m: usize) -> TNode {
        if let Some((w2, stags)) = self.as_eps(&s) {
            let ((low, prov), _) = compose_unchecked(self.p, w, k, &w2);
            let mut tags = vec![Tag::None; occurrence_count(&low, Kind::Indets)];
            for (i, &pos) in prov.left.iter().enumerate() {
                tags[pos] = wtags[i];
            }
            for (j, &pos) in prov.right.iter().enumerate() {
                tags[pos] = stags[j];
            }
            return self.eps(&low, &tags);
        }
        match &s {
            TNode::App(Head::Indet(f), _, _) => {
                let x = self.p.codomain_of(f).expect("indet without codomain");
                let xc = default_cell_of(self.p, x);
                let ((low, prov), _) = compose_unchecked(self.p, w, k, &xc);
                let mut tags = vec![Tag::None; occurrence_count(&low, Kind::Indets)];
                for (i, &pos) in prov.left.iter().enumerate() {
                    tags[pos] = wtags[i];
                }
                let h = self.hole();
                tags[prov.right[0]] = Tag::Hole(h);
                self.eps(&low, &tags).plug_holes(&HashMap::from([(h, s)]))
            }
            TNode::App(Head::Predet(w2), _, args) => {
                let hs: Vec<usize> = args.iter().map(|_| self.hole()).collect();
                let tags: Vec<Tag> = hs.iter().map(|&h| Tag::Hole(h)).collect();
                let bare = self.eps(w2, &tags);
                let e = self.eps_left(w, wtags, k, bare, m);
                e.plug_holes(&hs.into_iter().zip(args.iter().cloned()).collect())
            }
            TNode::Obj(..) => unreachable!(),
        }
    }
}

/// Object-slot provenance of a composite, exposed for bookkeeping checks.
pub fn compose_sources(
    p: &Presentation,
    u: &Cell,
    k: usize,
    v: &Cell,
) -> Result<(Vec<Option<usize>>, Vec<Option<usize>>), CellError> {
    compose(p, u, k, v)?;
    let m = u.dim().max(v.dim());
    let u = iterated_identity(u, m);
    let v = iterated_identity(v, m);
    Ok(compose_unchecked(p, &u, k, &v).1)
}
