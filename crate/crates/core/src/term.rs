//! C-terms (ω-categorical composites) and M-terms (multicompositions):
//! parsing, evaluation to canonical cells, and readback.

use std::fmt;

use thiserror::Error;

use crate::cell::{self, validate_cell, Body, Cell, CellError, Head, Name};
use crate::presentation::Presentation;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("syntax error at column {col}: {msg}")]
    Syntax { col: usize, msg: String },
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("k ≥ dimension: `*{k}` applied in dimension {dim}")]
    KTooLarge { k: usize, dim: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("composite undefined: `{term}`: {reason}")]
    Undefined { term: String, reason: CellError },
    #[error("{0} is not many-to-one")]
    NotManyToOne(String),
    #[error("invalid cell: {0}")]
    InvalidCell(CellError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lang {
    C,
    M,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CTerm {
    dim: usize,
    node: CNode,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CNode {
    Indet(Name),
    Id(Box<CTerm>),
    Comp(usize, Box<CTerm>, Box<CTerm>),
}

impl CTerm {
    pub fn indet(p: &Presentation, name: &str) -> Result<CTerm, TermError> {
        let dim = p.dim_of(name).ok_or_else(|| TermError::UnknownName(name.to_string()))?;
        Ok(CTerm { dim, node: CNode::Indet(name.into()) })
    }

    pub fn id(inner: CTerm) -> CTerm {
        CTerm { dim: inner.dim + 1, node: CNode::Id(Box::new(inner)) }
    }

    /// Identity applied until the term reaches dimension `m`.
    pub fn lift(self, m: usize) -> CTerm {
        let mut t = self;
        while t.dim < m {
            t = CTerm::id(t);
        }
        t
    }

    pub fn comp(k: usize, left: CTerm, right: CTerm) -> Result<CTerm, TermError> {
        let dim = left.dim.max(right.dim);
        if k >= dim {
            return Err(TermError::KTooLarge { k, dim });
        }
        Ok(CTerm { dim, node: CNode::Comp(k, Box::new(left), Box::new(right)) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node(&self) -> &CNode {
        &self.node
    }

    /// Node count: atoms and identities count one, composites one plus operands.
    pub fn size(&self) -> usize {
        match &self.node {
            CNode::Indet(_) | CNode::Id(_) => 1,
            CNode::Comp(_, l, r) => 1 + l.size() + r.size(),
        }
    }
}

impl fmt::Display for CTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            CNode::Indet(x) => write!(f, "{x}"),
            CNode::Id(inner) => match &inner.node {
                CNode::Indet(x) => write!(f, "1_{x}"),
                _ => write!(f, "1_{{{inner}}}"),
            },
            CNode::Comp(k, l, r) => write!(f, "({l} *{k} {r})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MTerm {
    dim: usize,
    node: MNode,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MNode {
    Indet(Name),
    Id(Name),
    MComp(usize, Box<MTerm>, Box<MTerm>),
}

impl MTerm {
    pub fn indet(p: &Presentation, name: &str) -> Result<MTerm, TermError> {
        let dim = p.dim_of(name).ok_or_else(|| TermError::UnknownName(name.to_string()))?;
        Ok(MTerm { dim, node: MNode::Indet(name.into()) })
    }

    pub fn id(p: &Presentation, x: &str) -> Result<MTerm, TermError> {
        let d = p.dim_of(x).ok_or_else(|| TermError::UnknownName(x.to_string()))?;
        Ok(MTerm { dim: d + 1, node: MNode::Id(x.into()) })
    }

    pub fn mcomp(r: usize, left: MTerm, right: MTerm) -> Result<MTerm, TermError> {
        if left.dim != right.dim {
            return Err(TermError::DimensionMismatch(format!(
                "`{left}` has dimension {}, `{right}` has {}",
                left.dim, right.dim
            )));
        }
        Ok(MTerm { dim: left.dim, node: MNode::MComp(r, Box::new(left), Box::new(right)) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node(&self) -> &MNode {
        &self.node
    }

    pub fn size(&self) -> usize {
        match &self.node {
            MNode::Indet(_) | MNode::Id(_) => 1,
            MNode::MComp(_, l, r) => 1 + l.size() + r.size(),
        }
    }
}

impl fmt::Display for MTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            MNode::Indet(x) => write!(f, "{x}"),
            MNode::Id(x) => write!(f, "1_{x}"),
            MNode::MComp(r, l, s) => write!(f, "({l} o[{r}] {s})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    C(CTerm),
    M(MTerm),
}

impl Term {
    pub fn lang(&self) -> Lang {
        match self {
            Term::C(_) => Lang::C,
            Term::M(_) => Lang::M,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Term::C(t) => t.dim(),
            Term::M(t) => t.dim(),
        }
    }

    pub fn eval(&self, p: &Presentation) -> Result<Cell, TermError> {
        match self {
            Term::C(t) => eval_cterm(t, p),
            Term::M(t) => eval_mterm(t, p),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::C(t) => t.fmt(f),
            Term::M(t) => t.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(usize),
    Sym(char),
}

pub(crate) fn lex(text: &str) -> Result<Vec<(Tok, usize)>, TermError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s.parse().map_err(|_| TermError::Syntax { col, msg: format!("number `{s}` too large") })?;
            out.push((Tok::Int(n), col));
        } else if c.is_ascii_alphabetic() || c == '_' {
            if c == '_' && matches!(out.last(), Some((Tok::Int(_), _))) {
                out.push((Tok::Sym('_'), col));
                i += 1;
                continue;
            }
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if "(){}[],#*^".contains(c) {
            out.push((Tok::Sym(c), col));
            i += 1;
        } else {
            return Err(TermError::Syntax { col, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    p: &'a Presentation,
}

impl<'a> Parser<'a> {
    fn new(text: &str, p: &'a Presentation) -> Result<Self, TermError> {
        let toks = lex(text)?;
        Ok(Parser { toks, pos: 0, end: text.chars().count() + 1, p })
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, TermError> {
        Err(TermError::Syntax { col: self.col(), msg: msg.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn expect_sym(&mut self, c: char) -> Result<(), TermError> {
        match self.peek() {
            Some(Tok::Sym(d)) if *d == c => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(format!("expected `{c}`")),
        }
    }

    fn expect_int(&mut self) -> Result<usize, TermError> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => self.err("expected a number"),
        }
    }

    fn finish(&self) -> Result<(), TermError> {
        if self.pos < self.toks.len() {
            return self.err("unexpected trailing input");
        }
        Ok(())
    }

    fn cterm(&mut self) -> Result<CTerm, TermError> {
        match self.peek().cloned() {
            Some(Tok::Ident(n)) => {
                self.pos += 1;
                CTerm::indet(self.p, &n)
            }
            Some(Tok::Int(1)) => {
                self.pos += 1;
                let mut times = 1;
                if let Some(Tok::Sym('^')) = self.peek() {
                    self.pos += 1;
                    times = self.expect_int()?;
                    if times == 0 {
                        return self.err("iterated identity needs a positive exponent");
                    }
                }
                self.expect_sym('_')?;
                let inner = match self.peek().cloned() {
                    Some(Tok::Ident(n)) => {
                        self.pos += 1;
                        CTerm::indet(self.p, &n)?
                    }
                    Some(Tok::Sym('{')) => {
                        self.pos += 1;
                        let t = self.cterm()?;
                        self.expect_sym('}')?;
                        t
                    }
                    _ => return self.err("expected a name or `{` after `1_`"),
                };
                Ok((0..times).fold(inner, |t, _| CTerm::id(t)))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let l = self.cterm()?;
                self.expect_sym('*')?;
                let k = self.expect_int()?;
                let r = self.cterm()?;
                self.expect_sym(')')?;
                CTerm::comp(k, l, r)
            }
            _ => self.err("expected a C-term"),
        }
    }

    fn mterm(&mut self) -> Result<MTerm, TermError> {
        match self.peek().cloned() {
            Some(Tok::Ident(n)) => {
                self.pos += 1;
                MTerm::indet(self.p, &n)
            }
            Some(Tok::Int(1)) => {
                self.pos += 1;
                self.expect_sym('_')?;
                match self.next() {
                    Some(Tok::Ident(n)) => MTerm::id(self.p, &n),
                    _ => {
                        self.pos -= 1;
                        self.err("expected an object name after `1_`")
                    }
                }
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let l = self.mterm()?;
                match self.peek() {
                    Some(Tok::Ident(o)) if o == "o" => self.pos += 1,
                    _ => return self.err("expected `o[r]`"),
                }
                self.expect_sym('[')?;
                let r = self.expect_int()?;
                self.expect_sym(']')?;
                let s = self.mterm()?;
                self.expect_sym(')')?;
                MTerm::mcomp(r, l, s)
            }
            _ => self.err("expected an M-term"),
        }
    }

    fn cell(&mut self) -> Result<Cell, TermError> {
        match self.peek().cloned() {
            Some(Tok::Sym('#')) => {
                self.pos += 1;
                match self.next() {
                    Some(Tok::Ident(x)) => {
                        let d = self.p.dim_of(&x).ok_or(TermError::UnknownName(x.clone()))?;
                        Ok(Cell::obj(d + 1, x.as_str()))
                    }
                    _ => {
                        self.pos -= 1;
                        self.err("expected a name after `#`")
                    }
                }
            }
            Some(Tok::Ident(x)) => {
                self.pos += 1;
                match self.peek() {
                    Some(Tok::Sym('{')) if x == "e" => {
                        self.pos += 1;
                        let w = self.cell()?;
                        self.expect_sym('}')?;
                        let args = self.cell_args()?;
                        Ok(Cell::app(w.dim() + 1, Head::Predet(w), args))
                    }
                    Some(Tok::Sym('(')) => {
                        let d = self.p.dim_of(&x).ok_or(TermError::UnknownName(x.clone()))?;
                        if d == 0 {
                            return self.err(format!("0-cell `{x}` takes no arguments"));
                        }
                        let args = self.cell_args()?;
                        Ok(Cell::app(d, Head::Indet(x.as_str().into()), args))
                    }
                    _ => {
                        self.p.dim_of(&x).ok_or(TermError::UnknownName(x.clone()))?;
                        Ok(Cell::name(x.as_str()))
                    }
                }
            }
            _ => self.err("expected a cell"),
        }
    }

    fn cell_args(&mut self) -> Result<Vec<Cell>, TermError> {
        self.expect_sym('(')?;
        let mut args = Vec::new();
        if let Some(Tok::Sym(')')) = self.peek() {
            self.pos += 1;
            return Ok(args);
        }
        loop {
            args.push(self.cell()?);
            match self.next() {
                Some(Tok::Sym(',')) => continue,
                Some(Tok::Sym(')')) => return Ok(args),
                _ => {
                    self.pos -= 1;
                    return self.err("expected `,` or `)`");
                }
            }
        }
    }
}

fn check_dim(found: usize, want: Option<usize>, text: &str) -> Result<(), TermError> {
    match want {
        Some(d) if d != found => {
            Err(TermError::DimensionMismatch(format!("`{}` has dimension {found}, expected {d}", text.trim())))
        }
        _ => Ok(()),
    }
}

pub fn parse_cterm(text: &str, p: &Presentation, dim: usize) -> Result<CTerm, TermError> {
    parse_cterm_opt(text, p, Some(dim))
}

pub fn parse_cterm_opt(text: &str, p: &Presentation, dim: Option<usize>) -> Result<CTerm, TermError> {
    let mut ps = Parser::new(text, p)?;
    let t = ps.cterm()?;
    ps.finish()?;
    check_dim(t.dim, dim, text)?;
    Ok(t)
}

pub fn parse_mterm(text: &str, p: &Presentation, dim: usize) -> Result<MTerm, TermError> {
    parse_mterm_opt(text, p, Some(dim))
}

pub fn parse_mterm_opt(text: &str, p: &Presentation, dim: Option<usize>) -> Result<MTerm, TermError> {
    let mut ps = Parser::new(text, p)?;
    let t = ps.mterm()?;
    ps.finish()?;
    check_dim(t.dim, dim, text)?;
    Ok(t)
}

pub fn parse_term(text: &str, p: &Presentation, lang: Lang, dim: Option<usize>) -> Result<Term, TermError> {
    match lang {
        Lang::C => parse_cterm_opt(text, p, dim).map(Term::C),
        Lang::M => parse_mterm_opt(text, p, dim).map(Term::M),
    }
}

/// Parse a canonical cell rendering and check it against `p`.
pub fn parse_cell(text: &str, p: &Presentation) -> Result<Cell, TermError> {
    let mut ps = Parser::new(text, p)?;
    let c = ps.cell()?;
    ps.finish()?;
    validate_cell(p, &c).map_err(TermError::InvalidCell)?;
    Ok(c)
}

/// Guess the language from the operator tags present in `text`.
pub fn detect_lang(text: &str) -> Lang {
    if text.contains("o[") {
        Lang::M
    } else {
        Lang::C
    }
}

pub(crate) fn parse_and_eval_any(text: &str, p: &Presentation, dim: usize) -> Result<Cell, TermError> {
    parse_term(text, p, detect_lang(text), Some(dim))?.eval(p)
}

pub fn eval_cterm(t: &CTerm, p: &Presentation) -> Result<Cell, TermError> {
    match &t.node {
        CNode::Indet(x) => cell::indet_cell(p, x).map_err(|_| TermError::UnknownName(x.to_string())),
        CNode::Id(inner) => Ok(cell::identity_over(&eval_cterm(inner, p)?)),
        CNode::Comp(k, l, r) => {
            let (a, b) = (eval_cterm(l, p)?, eval_cterm(r, p)?);
            cell::compose(p, &a, *k, &b)
                .map(|c| c.0)
                .map_err(|reason| TermError::Undefined { term: t.to_string(), reason })
        }
    }
}

pub fn eval_mterm(t: &MTerm, p: &Presentation) -> Result<Cell, TermError> {
    match &t.node {
        MNode::Indet(x) => cell::indet_cell(p, x).map_err(|_| TermError::UnknownName(x.to_string())),
        MNode::Id(x) => {
            let d = p.dim_of(x).ok_or_else(|| TermError::UnknownName(x.to_string()))?;
            Ok(Cell::obj(d + 1, x.clone()))
        }
        MNode::MComp(r, l, s) => {
            let (a, b) = (eval_mterm(l, p)?, eval_mterm(s, p)?);
            cell::multicompose(p, &a, *r, &b)
                .map(|c| c.0)
                .map_err(|reason| TermError::Undefined { term: t.to_string(), reason })
        }
    }
}

/// The normal M-term of a many-to-one cell: slots filled from last to first,
/// identity arguments omitted.
pub fn readback_m(p: &Presentation, u: &Cell) -> Result<MTerm, TermError> {
    match u.body() {
        Body::Name(x) => MTerm::indet(p, x),
        Body::ObjId(x) => MTerm::id(p, x),
        Body::App(Head::Predet(_), _) => Err(TermError::NotManyToOne(u.to_string())),
        Body::App(Head::Indet(f), args) => {
            let mut t = MTerm::indet(p, f)?;
            for (i, a) in args.iter().enumerate().rev() {
                if !matches!(a.body(), Body::ObjId(_)) {
                    t = MTerm::mcomp(i, t, readback_m(p, a)?)?;
                }
            }
            Ok(t)
        }
    }
}

/// A C-term for `u`: multicompositions become `*(m-1)` composites with a
/// whiskered right operand, predets become identity terms.
pub fn readback_c(p: &Presentation, u: &Cell) -> CTerm {
    let m = u.dim();
    let atom = |x: &Name| CTerm { dim: p.dim_of(x).expect("name of a valid cell"), node: CNode::Indet(x.clone()) };
    let (mut t, mut cur) = match u.body() {
        Body::Name(x) => return atom(x),
        Body::ObjId(x) => return CTerm::id(atom(x)),
        Body::App(Head::Indet(f), _) => (atom(f), cell::default_cell_of(p, f)),
        Body::App(Head::Predet(w), _) => (CTerm::id(readback_c(p, w)), cell::identity_over(w)),
    };
    for (i, a) in u.args().iter().enumerate().rev() {
        if matches!(a.body(), Body::ObjId(_)) {
            continue;
        }
        let dom = readback_c(p, &cell::domain(p, &cur));
        let w = whisker_term(p, &dom, i, readback_c(p, a));
        t = CTerm { dim: m, node: CNode::Comp(m - 1, Box::new(t), Box::new(w)) };
        cur = cell::multicompose(p, &cur, i, a).expect("argument typed by its slot").0;
    }
    t
}

/// A C-term for `w ⊡ᵣ v`, walking a C-term for `w`.
fn whisker_term(p: &Presentation, tw: &CTerm, r: usize, v: CTerm) -> CTerm {
    let m = v.dim;
    match &tw.node {
        CNode::Indet(_) => v,
        CNode::Id(_) => unreachable!("identity terms have no indet occurrences"),
        CNode::Comp(k, l, rt) => {
            let a = eval_cterm(l, p).expect("readback terms evaluate");
            let b = eval_cterm(rt, p).expect("readback terms evaluate");
            let (_, prov) = cell::compose(p, &a, *k, &b).expect("readback terms evaluate");
            let (nl, nr) = if let Some(i) = prov.left.iter().position(|&x| x == r) {
                (whisker_term(p, l, i, v), (**rt).clone().lift(m))
            } else {
                let j = prov.right.iter().position(|&x| x == r).expect("occurrence covered by provenance");
                ((**l).clone().lift(m), whisker_term(p, rt, j, v))
            };
            CTerm { dim: m, node: CNode::Comp(*k, Box::new(nl), Box::new(nr)) }
        }
    }
}

pub fn readback(p: &Presentation, u: &Cell, lang: Lang) -> Result<String, TermError> {
    match lang {
        Lang::C => Ok(readback_c(p, u).to_string()),
        Lang::M => Ok(readback_m(p, u)?.to_string()),
    }
}

pub fn decide_equal(t1: &Term, t2: &Term, p: &Presentation) -> Result<bool, TermError> {
    Ok(t1.eval(p)? == t2.eval(p)?)
}
