//! Many-to-one computad presentations: indets per dimension with their
//! domain cells and codomain names.

use std::collections::HashMap;
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::cell::{self, occurrences, validate_cell, Body, Cell, Head, Kind, Name};
use crate::term;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndetBoundary {
    pub domain: Cell,
    pub codomain: Name,
}

/// The indets of one dimension, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IndetTable {
    pub entries: IndexMap<Name, Option<IndetBoundary>>,
}

#[derive(Debug, Clone)]
pub struct Presentation {
    name: String,
    levels: Vec<IndetTable>,
    index: HashMap<Name, Entry>,
}

#[derive(Debug, Clone)]
struct Entry {
    dim: usize,
    boundary: Option<IndetBoundary>,
    default: Cell,
}

impl PartialEq for Presentation {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.levels == other.levels
    }
}

impl Eq for Presentation {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresentationError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}: unresolved name `{name}`")]
    Unresolved { line: usize, name: String },
    #[error("line {line}: dimension mismatch: {msg}")]
    DimensionMismatch { line: usize, msg: String },
    #[error("line {line}: parallelism violated for `{indet}`: {msg}")]
    Parallelism { line: usize, indet: String, msg: String },
    #[error("line {line}: duplicate indet `{name}`")]
    Duplicate { line: usize, name: String },
    #[error("dimension {0} exceeds the top dimension {1}")]
    Truncation(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub indet: String,
    pub dim: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{} (dim {}): {}", v.indet, v.dim, v.message)?;
        }
        Ok(())
    }
}

impl Presentation {
    /// Build without validation; see [`validate_presentation`].
    pub fn new(name: impl Into<String>, levels: Vec<IndetTable>) -> Presentation {
        let mut index: HashMap<Name, Entry> = HashMap::new();
        for (n, table) in levels.iter().enumerate() {
            for (f, b) in &table.entries {
                if index.contains_key(f) {
                    continue;
                }
                let default = if n == 0 {
                    Cell::name(f.clone())
                } else {
                    let slots = match b {
                        Some(b) => occurrences(&b.domain, Kind::Indets).into_iter().map(|x| Cell::obj(n, x)).collect(),
                        None => vec![],
                    };
                    Cell::app(n, Head::Indet(f.clone()), slots)
                };
                index.insert(f.clone(), Entry { dim: n, boundary: b.clone(), default });
            }
        }
        Presentation { name: name.into(), levels, index }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn levels(&self) -> &[IndetTable] {
        &self.levels
    }

    pub fn top_dim(&self) -> usize {
        self.levels.len().saturating_sub(1)
    }

    pub fn dim_of(&self, f: &str) -> Option<usize> {
        self.index.get(f).map(|e| e.dim)
    }

    pub fn domain_of(&self, f: &str) -> Option<&Cell> {
        self.index.get(f)?.boundary.as_ref().map(|b| &b.domain)
    }

    pub fn codomain_of(&self, f: &str) -> Option<&Name> {
        self.index.get(f)?.boundary.as_ref().map(|b| &b.codomain)
    }

    pub fn default_cell(&self, f: &str) -> Option<&Cell> {
        self.index.get(f).map(|e| &e.default)
    }

    /// Indet names of dimension `n` in declaration order.
    pub fn indets(&self, n: usize) -> Vec<Name> {
        self.levels.get(n).map(|t| t.entries.keys().cloned().collect()).unwrap_or_default()
    }

    /// Indets of dimension `n` whose codomain is `x`.
    pub fn indets_with_codomain(&self, n: usize, x: &str) -> Vec<Name> {
        self.indets(n).into_iter().filter(|f| self.codomain_of(f).map(|c| &**c == x).unwrap_or(false)).collect()
    }

    pub fn with_name(&self, name: impl Into<String>) -> Presentation {
        Presentation::new(name, self.levels.clone())
    }
}

pub fn validate_presentation(p: &Presentation) -> ValidationReport {
    let mut out = Vec::new();
    let mut seen: HashMap<&Name, usize> = HashMap::new();
    for (n, table) in p.levels().iter().enumerate() {
        for (f, b) in &table.entries {
            let mut push = |message: String| out.push(Violation { indet: f.to_string(), dim: n, message });
            if let Some(&d) = seen.get(f) {
                push(format!("indet name already declared in dimension {d}"));
                continue;
            }
            seen.insert(f, n);
            if n == 0 {
                if b.is_some() {
                    push("0-indet carries boundary data".into());
                }
                continue;
            }
            let Some(b) = b else {
                push("missing boundary data".into());
                continue;
            };
            let cod_ok = p.dim_of(&b.codomain) == Some(n - 1);
            if !cod_ok {
                push(format!("codomain not an indet of dimension {}", n - 1));
            }
            let dom_ok = b.domain.dim() == n - 1 && b.domain.is_many_to_one() && validate_cell(p, &b.domain).is_ok();
            if !dom_ok {
                push(format!("domain not a valid many-to-one cell of dimension {}", n - 1));
            }
            if cod_ok && dom_ok && n >= 2 {
                let cc = cell::default_cell_of(p, &b.codomain);
                if cell::boundary(p, &b.domain) != cell::boundary(p, &cc) {
                    push("domain not parallel to codomain".into());
                }
            }
        }
    }
    ValidationReport { violations: out }
}

pub fn truncate_presentation(p: &Presentation, n: usize) -> Result<Presentation, PresentationError> {
    if n > p.top_dim() {
        return Err(PresentationError::Truncation(n, p.top_dim()));
    }
    Ok(Presentation::new(p.name.clone(), p.levels[..=n].to_vec()))
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn parse_presentation(text: &str) -> Result<Presentation, PresentationError> {
    let mut name = String::from("unnamed");
    let mut levels: Vec<IndetTable> = Vec::new();
    let mut current: Option<usize> = None;
    let mut lines: HashMap<Name, usize> = HashMap::new();
    let mut p = Presentation::new(name.clone(), vec![]);

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let body = raw.split('#').next().unwrap();
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lead = body.len() - body.trim_start().len();
        let syntax = |col: usize, msg: &str| PresentationError::Syntax { line: lineno, col, msg: msg.to_string() };

        let mut content = trimmed;
        let mut offset = lead;
        if let Some(rest) = trimmed.strip_prefix("name:") {
            let n = rest.trim();
            if !is_ident(n) {
                return Err(syntax(lead + 6, "expected a presentation name"));
            }
            name = n.to_string();
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("dim") {
            if rest.starts_with(|c: char| c.is_whitespace()) {
                let colon = rest.find(':').ok_or_else(|| syntax(lead + 3, "expected `:` after dimension"))?;
                let d: usize = rest[..colon].trim().parse().map_err(|_| syntax(lead + 4, "expected a dimension"))?;
                if d != levels.len() {
                    return Err(syntax(lead + 1, &format!("expected section `dim {}`", levels.len())));
                }
                if d > 0 {
                    p = Presentation::new(name.clone(), levels.clone());
                    check_level(&p, d - 1, &lines)?;
                }
                levels.push(IndetTable::default());
                current = Some(d);
                offset = lead + 3 + colon + 1;
                content = &rest[colon + 1..];
                if content.trim().is_empty() {
                    continue;
                }
            }
        }
        let Some(d) = current else {
            return Err(syntax(lead + 1, "expected `dim 0:` section header"));
        };
        if d == 0 {
            for tok in content.split_whitespace() {
                let at = offset + (tok.as_ptr() as usize - content.as_ptr() as usize);
                if !is_ident(tok) {
                    return Err(syntax(at + 1, &format!("`{tok}` is not an identifier")));
                }
                let n: Name = tok.into();
                if lines.contains_key(&n) {
                    return Err(PresentationError::Duplicate { line: lineno, name: tok.to_string() });
                }
                lines.insert(n.clone(), lineno);
                levels[0].entries.insert(n, None);
            }
            continue;
        }
        let colon = content.find(':').ok_or_else(|| syntax(offset + 1, "expected `name : domain -> codomain`"))?;
        let fname = content[..colon].trim();
        if !is_ident(fname) {
            return Err(syntax(offset + 1, "expected an indet name"));
        }
        let rest = &content[colon + 1..];
        let arrow = match (rest.rfind("->"), rest.rfind("=>")) {
            (Some(a), Some(b)) => a.max(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => return Err(syntax(offset + colon + 2, "expected `->` or `=>`")),
        };
        let dom_text = &rest[..arrow];
        let cod = rest[arrow + 2..].trim();
        if !is_ident(cod) {
            return Err(syntax(offset + colon + arrow + 4, "expected a codomain name"));
        }
        let dom_col = offset + colon + 2;
        let dom = term::parse_and_eval_any(dom_text, &p, d - 1).map_err(|e| match e {
            term::TermError::Syntax { col, msg } => syntax(dom_col + col - 1, &msg),
            term::TermError::UnknownName(n) => PresentationError::Unresolved { line: lineno, name: n },
            other => PresentationError::DimensionMismatch { line: lineno, msg: other.to_string() },
        })?;
        let fname: Name = fname.into();
        if lines.contains_key(&fname) {
            return Err(PresentationError::Duplicate { line: lineno, name: fname.to_string() });
        }
        lines.insert(fname.clone(), lineno);
        levels[d].entries.insert(fname, Some(IndetBoundary { domain: dom, codomain: cod.into() }));
    }
    let p = Presentation::new(name, levels);
    if let Some(top) = p.levels().len().checked_sub(1) {
        check_level(&p, top, &lines)?;
    }
    Ok(p)
}

fn check_level(p: &Presentation, n: usize, lines: &HashMap<Name, usize>) -> Result<(), PresentationError> {
    if n == 0 {
        return Ok(());
    }
    for (f, b) in &p.levels()[n].entries {
        let b = b.as_ref().unwrap();
        let line = lines[f];
        match p.dim_of(&b.codomain) {
            None => return Err(PresentationError::Unresolved { line, name: b.codomain.to_string() }),
            Some(d) if d != n - 1 => {
                return Err(PresentationError::DimensionMismatch {
                    line,
                    msg: format!("codomain `{}` of `{f}` has dimension {d}, expected {}", b.codomain, n - 1),
                })
            }
            _ => {}
        }
        if !b.domain.is_many_to_one() {
            return Err(PresentationError::Parallelism {
                line,
                indet: f.to_string(),
                msg: format!("domain {} is not many-to-one", b.domain),
            });
        }
        if n >= 2 {
            let cc = cell::default_cell_of(p, &b.codomain);
            let (dd, dc) = cell::boundary(p, &b.domain);
            let (cd, ccc) = cell::boundary(p, &cc);
            if dd != cd || dc != ccc {
                return Err(PresentationError::Parallelism {
                    line,
                    indet: f.to_string(),
                    msg: format!("domain {} runs {dd} -> {dc}, codomain `{}` runs {cd} -> {ccc}", b.domain, b.codomain),
                });
            }
        }
    }
    Ok(())
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "name: {}", self.name)?;
        for (n, table) in self.levels.iter().enumerate() {
            if n == 0 {
                let names: Vec<&str> = table.entries.keys().map(|k| &**k).collect();
                writeln!(f, "dim 0: {}", names.join(" "))?;
                continue;
            }
            writeln!(f, "dim {n}:")?;
            let arrow = if n == 1 { "->" } else { "=>" };
            for (g, b) in &table.entries {
                if let Some(b) = b {
                    let dom = match b.domain.body() {
                        Body::Name(x) => x.to_string(),
                        _ => term::readback_m(self, &b.domain).map(|t| t.to_string()).unwrap_or_else(|_| {
                            term::readback_c(self, &b.domain).to_string()
                        }),
                    };
                    writeln!(f, "  {g} : {dom} {arrow} {}", b.codomain)?;
                }
            }
        }
        Ok(())
    }
}
