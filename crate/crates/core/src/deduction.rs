//! Derivations in the equational systems for C-terms and M-terms, a proof
//! checker, and a bounded provability oracle.
//!
//! Proof files are numbered lines `n. rule [premises]: lhs = rhs`; the last
//! line is the root. Identity subscripts `1_a` are compared as cells, so
//! `1_{(x *0 1_a)}` and `1_x` name the same identity term.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use petgraph::unionfind::UnionFind;
use rand::seq::IndexedRandom;
use rand::Rng;
use thiserror::Error;

use crate::cell::{
    self, compose, identity_over, iterated_identity, multicompose, occurrence_count, target_object, Cell, CellError,
    Kind, Name, Side,
};
use crate::enumerate::enumerate_cells;
use crate::laws::k_boundary;
use crate::presentation::Presentation;
use crate::term::{
    decide_equal, detect_lang, eval_cterm, parse_term, readback_c, CNode, CTerm, Lang, MNode, MTerm, Term, TermError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    Reflexivity,
    Associativity,
    Exchange,
    IdentityLeft,
    IdentityRight,
    IdentityMerge,
    Commutativity,
    Symmetry,
    Transitivity,
    CongruenceLeft,
    CongruenceRight,
}

impl Rule {
    pub const ALL: [Rule; 11] = [
        Rule::Reflexivity,
        Rule::Associativity,
        Rule::Exchange,
        Rule::IdentityLeft,
        Rule::IdentityRight,
        Rule::IdentityMerge,
        Rule::Commutativity,
        Rule::Symmetry,
        Rule::Transitivity,
        Rule::CongruenceLeft,
        Rule::CongruenceRight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Reflexivity => "reflexivity",
            Rule::Associativity => "associativity",
            Rule::Exchange => "exchange",
            Rule::IdentityLeft => "identity-left",
            Rule::IdentityRight => "identity-right",
            Rule::IdentityMerge => "identity-merge",
            Rule::Commutativity => "commutativity",
            Rule::Symmetry => "symmetry",
            Rule::Transitivity => "transitivity",
            Rule::CongruenceLeft => "congruence-left",
            Rule::CongruenceRight => "congruence-right",
        }
    }

    pub fn premise_count(self) -> usize {
        match self {
            Rule::Symmetry | Rule::CongruenceLeft | Rule::CongruenceRight => 1,
            Rule::Transitivity => 2,
            _ => 0,
        }
    }

    pub fn allowed_in(self, lang: Lang) -> bool {
        match self {
            Rule::Exchange | Rule::IdentityMerge => lang == Lang::C,
            Rule::Commutativity => lang == Lang::M,
            _ => true,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Rule::ALL.into_iter().find(|r| r.name() == s).ok_or_else(|| format!("unknown rule `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    pub left: Term,
    pub right: Term,
    pub lang: Lang,
    pub dim: usize,
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.left, self.right)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub number: usize,
    pub rule: Rule,
    pub premises: Vec<usize>,
    pub left: Term,
    pub right: Term,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}. {}", self.number, self.rule)?;
        if !self.premises.is_empty() {
            let ps: Vec<String> = self.premises.iter().map(|n| n.to_string()).collect();
            write!(f, " [{}]", ps.join(", "))?;
        }
        write!(f, ": {} = {}", self.left, self.right)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proof {
    pub lang: Lang,
    pub steps: Vec<Step>,
}

impl fmt::Display for Proof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("empty proof")]
    Empty,
    #[error("step {step} (path {}): {rule}: {reason}", fmt_path(.path))]
    InvalidStep { step: usize, path: Vec<usize>, rule: Rule, reason: String },
}

fn fmt_path(path: &[usize]) -> String {
    path.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" > ")
}

impl ProofError {
    /// Step number of an invalid step, or the line of a parse error.
    pub fn location(&self) -> Option<usize> {
        match self {
            ProofError::Parse { line, .. } => Some(*line),
            ProofError::InvalidStep { step, .. } => Some(*step),
            ProofError::Empty => None,
        }
    }
}

/// Parse a proof file. The language is detected from the text when `lang`
/// is `None`.
pub fn parse_proof(text: &str, p: &Presentation, lang: Option<Lang>) -> Result<Proof, ProofError> {
    let lang = lang.unwrap_or_else(|| detect_lang(text));
    let mut steps: Vec<Step> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let err = |msg: String| ProofError::Parse { line, msg };
        let (num, rest) = s.split_once('.').ok_or_else(|| err("expected `n.`".into()))?;
        let number: usize = num.trim().parse().map_err(|_| err(format!("bad step number `{}`", num.trim())))?;
        let (head, eq) = rest.split_once(':').ok_or_else(|| err("expected `:` before the equation".into()))?;
        let head = head.trim();
        let (rule_text, premises) = match head.find('[') {
            Some(b) => {
                let close = head.rfind(']').filter(|&c| c > b).ok_or_else(|| err("unclosed `[`".into()))?;
                if !head[close + 1..].trim().is_empty() {
                    return Err(err("unexpected text after premises".into()));
                }
                let inner = head[b + 1..close].trim();
                let ps = if inner.is_empty() {
                    vec![]
                } else {
                    inner
                        .split(',')
                        .map(|x| x.trim().parse::<usize>().map_err(|_| err(format!("bad premise `{}`", x.trim()))))
                        .collect::<Result<Vec<_>, _>>()?
                };
                (head[..b].trim(), ps)
            }
            None => (head, vec![]),
        };
        let rule: Rule = rule_text.parse().map_err(err)?;
        let (l, r) = eq.split_once('=').ok_or_else(|| err("expected `lhs = rhs`".into()))?;
        if r.contains('=') {
            return Err(err("more than one `=`".into()));
        }
        let left = parse_term(l, p, lang, None).map_err(|e| err(e.to_string()))?;
        let right = parse_term(r, p, lang, None).map_err(|e| err(e.to_string()))?;
        if let Some(prev) = steps.last() {
            if number <= prev.number {
                return Err(err(format!("step numbers must increase ({number} after {})", prev.number)));
            }
        }
        steps.push(Step { number, rule, premises, left, right });
    }
    if steps.is_empty() {
        return Err(ProofError::Empty);
    }
    Ok(Proof { lang, steps })
}

// ---------------------------------------------------------------------------
// keys: terms at a fixed dimension with identity subscripts as cells

/// A term of a fixed dimension `n`: an `n`-indet, an identity on an
/// `(n-1)`-cell, or a composite. For M-terms `Id` holds the default cell of
/// the object and `Comp` carries the position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Key {
    Atom(Name),
    Id(Cell),
    Comp(usize, Box<Key>, Box<Key>),
}

impl Key {
    pub fn size(&self) -> usize {
        match self {
            Key::Atom(_) | Key::Id(_) => 1,
            Key::Comp(_, l, r) => 1 + l.size() + r.size(),
        }
    }

    fn comp(k: usize, l: &Key, r: &Key) -> Key {
        Key::Comp(k, Box::new(l.clone()), Box::new(r.clone()))
    }
}

/// Key of a C-term at its own dimension; lower-dimensional operands become
/// identities on their values.
pub fn key_of_cterm(p: &Presentation, t: &CTerm) -> Result<Key, TermError> {
    fn go(p: &Presentation, t: &CTerm, n: usize) -> Result<Key, TermError> {
        if t.dim() < n {
            return Ok(Key::Id(iterated_identity(&eval_cterm(t, p)?, n - 1)));
        }
        Ok(match t.node() {
            CNode::Indet(x) => Key::Atom(x.clone()),
            CNode::Id(inner) => Key::Id(eval_cterm(inner, p)?),
            CNode::Comp(k, l, r) => Key::Comp(*k, Box::new(go(p, l, n)?), Box::new(go(p, r, n)?)),
        })
    }
    go(p, t, t.dim())
}

pub fn key_of_mterm(p: &Presentation, t: &MTerm) -> Key {
    match t.node() {
        MNode::Indet(x) => Key::Atom(x.clone()),
        MNode::Id(x) => Key::Id(cell::default_cell_of(p, x)),
        MNode::MComp(r, l, s) => Key::Comp(*r, Box::new(key_of_mterm(p, l)), Box::new(key_of_mterm(p, s))),
    }
}

pub fn key_of(p: &Presentation, t: &Term) -> Result<Key, TermError> {
    match t {
        Term::C(c) => key_of_cterm(p, c),
        Term::M(m) => Ok(key_of_mterm(p, m)),
    }
}

pub fn eval_key(p: &Presentation, lang: Lang, key: &Key) -> Result<Cell, CellError> {
    match key {
        Key::Atom(x) => cell::indet_cell(p, x),
        Key::Id(a) => Ok(identity_over(a)),
        Key::Comp(k, l, r) => {
            let (a, b) = (eval_key(p, lang, l)?, eval_key(p, lang, r)?);
            match lang {
                Lang::C => compose(p, &a, *k, &b).map(|x| x.0),
                Lang::M => multicompose(p, &a, *k, &b).map(|x| x.0),
            }
        }
    }
}

/// Render a key as a term of dimension `n`.
pub fn term_of_key(p: &Presentation, lang: Lang, n: usize, key: &Key) -> Term {
    match lang {
        Lang::C => Term::C(cterm_of_key(p, n, key)),
        Lang::M => Term::M(mterm_of_key(p, key)),
    }
}

fn cterm_of_key(p: &Presentation, n: usize, key: &Key) -> CTerm {
    match key {
        Key::Atom(x) => CTerm::indet(p, x).expect("key atoms are indets"),
        Key::Id(a) => CTerm::id(readback_c(p, a)),
        Key::Comp(k, l, r) => {
            CTerm::comp(*k, cterm_of_key(p, n, l), cterm_of_key(p, n, r)).expect("key composites are well formed")
        }
    }
}

fn mterm_of_key(p: &Presentation, key: &Key) -> MTerm {
    match key {
        Key::Atom(x) => MTerm::indet(p, x).expect("key atoms are indets"),
        Key::Id(a) => MTerm::id(p, a.head_name().expect("identity on an indet")).expect("known object"),
        Key::Comp(r, l, s) => MTerm::mcomp(*r, mterm_of_key(p, l), mterm_of_key(p, s)).expect("same dimension"),
    }
}

// ---------------------------------------------------------------------------
// checking

struct Checked {
    left: Term,
    right: Term,
    lk: Key,
    rk: Key,
    dim: usize,
}

fn object_count(p: &Presentation, lang: Lang, key: &Key) -> Result<usize, String> {
    eval_key(p, lang, key).map(|c| occurrence_count(&c, Kind::Objects)).map_err(|e| e.to_string())
}

/// Axiom schemata on keys, in the stated orientation.
fn axiom_matches(p: &Presentation, lang: Lang, n: usize, rule: Rule, l: &Key, r: &Key) -> Result<bool, String> {
    use Key::*;
    Ok(match (lang, rule) {
        (_, Rule::Reflexivity) => l == r,
        (Lang::C, Rule::Associativity) => match (l, r) {
            (Comp(k, a, w), Comp(k2, t, b)) if k == k2 => match (&**a, &**b) {
                (Comp(ka, t1, s1), Comp(kb, s2, w2)) => ka == k && kb == k && t1 == t && s1 == s2 && w2 == w,
                _ => false,
            },
            _ => false,
        },
        (Lang::C, Rule::Exchange) => match (l, r) {
            (Comp(lo, a, b), Comp(hi, c, d)) if lo < hi => match (&**a, &**b, &**c, &**d) {
                (Comp(k1, t, t1), Comp(k2, s, s1), Comp(l1, t_, s_), Comp(l2, t1_, s1_)) => {
                    k1 == hi && k2 == hi && l1 == lo && l2 == lo && t == t_ && s == s_ && t1 == t1_ && s1 == s1_
                }
                _ => false,
            },
            _ => false,
        },
        (Lang::C, Rule::IdentityLeft) => match l {
            Comp(k, id, t) if **t == *r => match &**id {
                Id(b) => {
                    let tv = eval_key(p, lang, t).map_err(|e| e.to_string())?;
                    *b == iterated_identity(&k_boundary(p, &tv, *k, Side::Codomain), n - 1)
                }
                _ => false,
            },
            _ => false,
        },
        (Lang::C, Rule::IdentityRight) => match l {
            Comp(k, t, id) if **t == *r => match &**id {
                Id(a) => {
                    let tv = eval_key(p, lang, t).map_err(|e| e.to_string())?;
                    *a == iterated_identity(&k_boundary(p, &tv, *k, Side::Domain), n - 1)
                }
                _ => false,
            },
            _ => false,
        },
        (Lang::C, Rule::IdentityMerge) => match (l, r) {
            (Comp(k, a, b), Id(c)) if k + 1 < n => match (&**a, &**b) {
                (Id(a), Id(b)) => compose(p, a, *k, b).map(|x| x.0 == *c).unwrap_or(false),
                _ => false,
            },
            _ => false,
        },
        (Lang::M, Rule::IdentityLeft) => match l {
            Comp(0, id, t) => matches!(**id, Id(_)) && **t == *r,
            _ => false,
        },
        (Lang::M, Rule::IdentityRight) => match l {
            Comp(_, t, id) => matches!(**id, Id(_)) && **t == *r,
            _ => false,
        },
        (Lang::M, Rule::Commutativity) => match (l, r) {
            (Comp(b, ts, w), Comp(e, tw, s)) => match (&**ts, &**tw) {
                (Comp(a, t, s1), Comp(c, t2, w2)) if t == t2 && s1 == s && w2 == w && a != c => {
                    let ns = object_count(p, lang, s)?;
                    let nw = object_count(p, lang, w)?;
                    let want_b = if c < a { *c } else { c + ns - 1 };
                    let want_e = if a < c { *a } else { a + nw - 1 };
                    *b == want_b && *e == want_e
                }
                _ => false,
            },
            _ => false,
        },
        (Lang::M, Rule::Associativity) => match (l, r) {
            (Comp(q, ts, w), Comp(r1, t, sw)) => match (&**ts, &**sw) {
                (Comp(r0, t0, s0), Comp(q1, s1, w1)) => {
                    r0 == r1 && t0 == t && s0 == s1 && w1 == w && *q == r0 + q1 && *q1 < object_count(p, lang, s0)?
                }
                _ => false,
            },
            _ => false,
        },
        _ => false,
    })
}

/// Split a composite term into `(k, left, right)`.
fn split_comp(t: &Term) -> Option<(usize, Term, Term)> {
    match t {
        Term::C(c) => match c.node() {
            CNode::Comp(k, l, r) => Some((*k, Term::C((**l).clone()), Term::C((**r).clone()))),
            _ => None,
        },
        Term::M(m) => match m.node() {
            MNode::MComp(r, l, s) => Some((*r, Term::M((**l).clone()), Term::M((**s).clone()))),
            _ => None,
        },
    }
}

fn same_term(p: &Presentation, a: &Term, b: &Term) -> Result<bool, TermError> {
    Ok(a.dim() == b.dim() && key_of(p, a)? == key_of(p, b)?)
}

fn check_step(p: &Presentation, lang: Lang, step: &Step, done: &HashMap<usize, Checked>) -> Result<Checked, String> {
    if !step.rule.allowed_in(lang) {
        return Err(format!("rule not available for {} terms", if lang == Lang::C { "C" } else { "M" }));
    }
    if step.premises.len() != step.rule.premise_count() {
        return Err(format!("expects {} premise(s), got {}", step.rule.premise_count(), step.premises.len()));
    }
    let mut prem = Vec::new();
    for n in &step.premises {
        match done.get(n) {
            Some(c) => prem.push(c),
            None => return Err(format!("premise {n} is not an earlier step")),
        }
    }
    let (left, right) = (&step.left, &step.right);
    if left.lang() != lang || right.lang() != lang {
        return Err("term language differs from the proof language".into());
    }
    if left.dim() != right.dim() {
        return Err(format!("sides have dimensions {} and {}", left.dim(), right.dim()));
    }
    left.eval(p).map_err(|e| e.to_string())?;
    right.eval(p).map_err(|e| e.to_string())?;
    let lk = key_of(p, left).map_err(|e| e.to_string())?;
    let rk = key_of(p, right).map_err(|e| e.to_string())?;
    let n = left.dim();
    let ok = match step.rule {
        Rule::Symmetry => prem[0].lk == rk && prem[0].rk == lk && prem[0].dim == n,
        Rule::Transitivity => {
            let (a, b) = (prem[0], prem[1]);
            a.dim == n && b.dim == n && a.lk == lk && a.rk == b.lk && b.rk == rk
        }
        Rule::CongruenceLeft | Rule::CongruenceRight => {
            let (Some((k1, l1, r1)), Some((k2, l2, r2))) = (split_comp(left), split_comp(right)) else {
                return Err("conclusion sides are not composites".into());
            };
            let (moved, fixed) = if step.rule == Rule::CongruenceLeft { ((l1, l2), (r1, r2)) } else { ((r1, r2), (l1, l2)) };
            let pr = prem[0];
            k1 == k2
                && same_term(p, &fixed.0, &fixed.1).map_err(|e| e.to_string())?
                && same_term(p, &moved.0, &pr.left).map_err(|e| e.to_string())?
                && same_term(p, &moved.1, &pr.right).map_err(|e| e.to_string())?
        }
        rule => axiom_matches(p, lang, n, rule, &lk, &rk)? || axiom_matches(p, lang, n, rule, &rk, &lk)?,
    };
    if !ok {
        return Err(format!("`{left} = {right}` is not an instance of the rule"));
    }
    Ok(Checked { left: left.clone(), right: right.clone(), lk, rk, dim: n })
}

fn path_to(pf: &Proof, target: usize) -> Vec<usize> {
    let by_num: HashMap<usize, &Step> = pf.steps.iter().map(|s| (s.number, s)).collect();
    let root = pf.steps.last().unwrap().number;
    fn dfs(n: usize, target: usize, by: &HashMap<usize, &Step>, path: &mut Vec<usize>, depth: usize) -> bool {
        path.push(n);
        if n == target {
            return true;
        }
        if depth < by.len() {
            if let Some(s) = by.get(&n) {
                for &m in &s.premises {
                    if m < n && dfs(m, target, by, path, depth + 1) {
                        return true;
                    }
                }
            }
        }
        path.pop();
        false
    }
    let mut path = Vec::new();
    if dfs(root, target, &by_num, &mut path, 0) {
        path
    } else {
        vec![target]
    }
}

/// Validate every step in file order and return the root equation.
pub fn check_proof(pf: &Proof, p: &Presentation) -> Result<Equation, ProofError> {
    let mut done: HashMap<usize, Checked> = HashMap::new();
    for step in &pf.steps {
        match check_step(p, pf.lang, step, &done) {
            Ok(c) => {
                done.insert(step.number, c);
            }
            Err(reason) => {
                return Err(ProofError::InvalidStep {
                    step: step.number,
                    path: path_to(pf, step.number),
                    rule: step.rule,
                    reason,
                })
            }
        }
    }
    let root = pf.steps.last().ok_or(ProofError::Empty)?;
    let c = &done[&root.number];
    Ok(Equation { left: c.left.clone(), right: c.right.clone(), lang: pf.lang, dim: c.dim })
}

pub fn check_proof_text(text: &str, p: &Presentation, lang: Option<Lang>) -> Result<Equation, ProofError> {
    check_proof(&parse_proof(text, p, lang)?, p)
}

// ---------------------------------------------------------------------------
// the closure oracle

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("enumeration budget exceeded: more than {0} terms")]
    Budget(usize),
}

pub const DEFAULT_TERM_BUDGET: usize = 2_000_000;

#[derive(Debug, Clone)]
struct Entry {
    key: Key,
    val: Cell,
    kids: Option<(usize, usize)>,
}

/// Well-formed terms of one dimension up to a size bound, each with its value.
#[derive(Debug, Clone)]
pub struct TermSet {
    pub lang: Lang,
    pub dim: usize,
    pub bound: usize,
    entries: Vec<Entry>,
    index: HashMap<Key, usize>,
}

impl TermSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn key(&self, i: usize) -> &Key {
        &self.entries[i].key
    }

    pub fn value(&self, i: usize) -> &Cell {
        &self.entries[i].val
    }

    pub fn position(&self, key: &Key) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn keys(&self) -> impl Iterator<Item = &Key> {
        self.entries.iter().map(|e| &e.key)
    }
}

/// Enumerate all well-formed terms of dimension `n` with at most `bound`
/// nodes. Identity atoms range over the `(n-1)`-cells of weight at most
/// `bound`.
pub fn enumerate_terms(
    p: &Presentation,
    lang: Lang,
    n: usize,
    bound: usize,
    budget: usize,
) -> Result<TermSet, OracleError> {
    let mut entries: Vec<Entry> = Vec::new();
    let mut by_size: Vec<Vec<usize>> = vec![vec![]; bound + 1];
    let mut index = HashMap::new();
    if n == 0 || bound == 0 {
        return Ok(TermSet { lang, dim: n, bound, entries, index });
    }
    let mut push = |e: Entry, size: usize, entries: &mut Vec<Entry>, by_size: &mut Vec<Vec<usize>>| {
        index.insert(e.key.clone(), entries.len());
        by_size[size].push(entries.len());
        entries.push(e);
    };
    if n <= p.top_dim() {
        for f in p.indets(n) {
            let val = cell::indet_cell(p, &f).unwrap();
            push(Entry { key: Key::Atom(f), val, kids: None }, 1, &mut entries, &mut by_size);
        }
    }
    let ids: Vec<Cell> = match lang {
        Lang::C => enumerate_cells(p, n - 1, bound),
        Lang::M => p.indets(n - 1).iter().map(|x| cell::default_cell_of(p, x)).collect(),
    };
    for a in ids {
        let val = match lang {
            Lang::C => identity_over(&a),
            Lang::M => Cell::obj(n, a.head_name().unwrap().clone()),
        };
        push(Entry { key: Key::Id(a), val, kids: None }, 1, &mut entries, &mut by_size);
    }
    // right operands indexed by what they must match
    let mut join: HashMap<(usize, usize, Cell), Vec<usize>> = HashMap::new();
    let add_join = |i: usize, size: usize, entries: &Vec<Entry>, join: &mut HashMap<(usize, usize, Cell), Vec<usize>>| {
        let v = &entries[i].val;
        match lang {
            Lang::C => {
                for k in 0..n {
                    join.entry((size, k, k_boundary(p, v, k, Side::Codomain))).or_default().push(i);
                }
            }
            Lang::M => {
                if let Some(x) = target_object(p, v) {
                    join.entry((size, 0, cell::default_cell_of(p, x))).or_default().push(i);
                }
            }
        }
    };
    for &i in &by_size[1] {
        add_join(i, 1, &entries, &mut join);
    }
    for size in 3..=bound {
        let mut fresh = Vec::new();
        for ls in 1..size - 1 {
            let rs = size - 1 - ls;
            for &li in &by_size[ls] {
                let lv = entries[li].val.clone();
                let slots: Vec<(usize, Cell)> = match lang {
                    Lang::C => (0..n).map(|k| (k, k_boundary(p, &lv, k, Side::Domain))).collect(),
                    Lang::M => cell::occurrences(&lv, Kind::Objects)
                        .into_iter()
                        .enumerate()
                        .map(|(r, x)| (r, cell::default_cell_of(p, &x)))
                        .collect(),
                };
                for (k, b) in slots {
                    let jk = if lang == Lang::C { k } else { 0 };
                    let Some(rights) = join.get(&(rs, jk, b)) else { continue };
                    for &ri in rights {
                        let rv = &entries[ri].val;
                        let val = match lang {
                            Lang::C => compose(p, &lv, k, rv).map(|x| x.0),
                            Lang::M => multicompose(p, &lv, k, rv).map(|x| x.0),
                        };
                        let Ok(val) = val else { continue };
                        let key = Key::comp(k, &entries[li].key, &entries[ri].key);
                        fresh.push(Entry { key, val, kids: Some((li, ri)) });
                        if entries.len() + fresh.len() > budget {
                            return Err(OracleError::Budget(budget));
                        }
                    }
                }
            }
        }
        for e in fresh {
            push(e, size, &mut entries, &mut by_size);
        }
        for i in by_size[size].clone() {
            add_join(i, size, &entries, &mut join);
        }
    }
    Ok(TermSet { lang, dim: n, bound, entries, index })
}

/// Axiom rewrites applied at the root of `key`, in both directions where
/// the result has the same size and in the shrinking direction otherwise.
pub fn root_rewrites(p: &Presentation, lang: Lang, n: usize, key: &Key) -> Vec<(Rule, Key)> {
    use Key::*;
    let mut out = Vec::new();
    let Comp(k, l, r) = key else { return out };
    let k = *k;
    match lang {
        Lang::C => {
            if let Comp(k2, t, s) = &**l {
                if *k2 == k {
                    out.push((Rule::Associativity, Key::comp(k, t, &Key::comp(k, s, r))));
                }
            }
            if let Comp(k2, s, w) = &**r {
                if *k2 == k {
                    out.push((Rule::Associativity, Key::comp(k, &Key::comp(k, l, s), w)));
                }
            }
            if let (Comp(a, t, t1), Comp(b, s, s1)) = (&**l, &**r) {
                if a == b && k < *a {
                    out.push((Rule::Exchange, Key::comp(*a, &Key::comp(k, t, s), &Key::comp(k, t1, s1))));
                }
                if a == b && *a < k {
                    out.push((Rule::Exchange, Key::comp(*a, &Key::comp(k, t, s), &Key::comp(k, t1, s1))));
                }
            }
            if let Id(b) = &**l {
                if let Ok(tv) = eval_key(p, lang, r) {
                    if *b == iterated_identity(&k_boundary(p, &tv, k, Side::Codomain), n - 1) {
                        out.push((Rule::IdentityLeft, (**r).clone()));
                    }
                }
            }
            if let Id(a) = &**r {
                if let Ok(tv) = eval_key(p, lang, l) {
                    if *a == iterated_identity(&k_boundary(p, &tv, k, Side::Domain), n - 1) {
                        out.push((Rule::IdentityRight, (**l).clone()));
                    }
                }
            }
            if let (Id(a), Id(b)) = (&**l, &**r) {
                if k + 1 < n {
                    if let Ok((c, _)) = compose(p, a, k, b) {
                        out.push((Rule::IdentityMerge, Id(c)));
                    }
                }
            }
        }
        Lang::M => {
            if matches!(**l, Id(_)) && k == 0 {
                out.push((Rule::IdentityLeft, (**r).clone()));
            }
            if matches!(**r, Id(_)) {
                out.push((Rule::IdentityRight, (**l).clone()));
            }
            if let Comp(a, t, s) = &**l {
                let (Ok(ns), Ok(nw)) = (object_count(p, lang, s), object_count(p, lang, r)) else { return out };
                let b = k;
                if b >= *a && b < a + ns {
                    out.push((Rule::Associativity, Key::comp(*a, t, &Key::comp(b - a, s, r))));
                } else {
                    let c = if b < *a { b } else { b + 1 - ns };
                    let e = if *a < c { *a } else { a + nw - 1 };
                    out.push((Rule::Commutativity, Key::comp(e, &Key::comp(c, t, r), s)));
                }
            }
            if let Comp(q, s, w) = &**r {
                out.push((Rule::Associativity, Key::comp(k + q, &Key::comp(k, l, s), w)));
            }
        }
    }
    out
}

/// The partition of a term set into provable-equality blocks.
#[derive(Debug, Clone)]
pub struct Partition {
    pub terms: TermSet,
    block: Vec<usize>,
}

impl Partition {
    pub fn block_of(&self, i: usize) -> usize {
        self.block[i]
    }

    pub fn same_block(&self, a: &Key, b: &Key) -> Option<bool> {
        Some(self.block[self.terms.position(a)?] == self.block[self.terms.position(b)?])
    }

    /// Blocks as lists of term indices, ordered by first member.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut order: Vec<usize> = Vec::new();
        let mut map: HashMap<usize, usize> = HashMap::new();
        let mut out: Vec<Vec<usize>> = Vec::new();
        for (i, &b) in self.block.iter().enumerate() {
            let slot = *map.entry(b).or_insert_with(|| {
                order.push(b);
                out.push(vec![]);
                out.len() - 1
            });
            out[slot].push(i);
        }
        out
    }

    pub fn block_count(&self) -> usize {
        self.blocks().len()
    }
}

/// Least equivalence on `terms` closed under axiom instances between
/// members and under congruence.
pub fn saturate(p: &Presentation, terms: TermSet) -> Partition {
    let n = terms.dim;
    let mut uf = UnionFind::<usize>::new(terms.len());
    for (i, e) in terms.entries.iter().enumerate() {
        for (_, target) in root_rewrites(p, terms.lang, n, &e.key) {
            if let Some(j) = terms.position(&target) {
                uf.union(i, j);
            }
        }
    }
    loop {
        let mut changed = false;
        let mut sig: HashMap<(usize, usize, usize), usize> = HashMap::new();
        for (i, e) in terms.entries.iter().enumerate() {
            let (Some((l, r)), Key::Comp(k, _, _)) = (e.kids, &e.key) else { continue };
            let s = (*k, uf.find_mut(l), uf.find_mut(r));
            match sig.get(&s) {
                Some(&j) => changed |= uf.union(i, j),
                None => {
                    sig.insert(s, i);
                }
            }
        }
        if !changed {
            break;
        }
    }
    let block = (0..terms.len()).map(|i| uf.find_mut(i)).collect();
    Partition { terms, block }
}

pub fn closure_oracle(p: &Presentation, lang: Lang, dim: usize, size_bound: usize) -> Result<Partition, OracleError> {
    closure_oracle_within(p, lang, dim, size_bound, DEFAULT_TERM_BUDGET)
}

pub fn closure_oracle_within(
    p: &Presentation,
    lang: Lang,
    dim: usize,
    size_bound: usize,
    budget: usize,
) -> Result<Partition, OracleError> {
    Ok(saturate(p, enumerate_terms(p, lang, dim, size_bound, budget)?))
}

/// Comparison of the oracle partition with the kernel of evaluation.
#[derive(Debug, Clone, Default)]
pub struct Agreement {
    pub terms: usize,
    pub oracle_blocks: usize,
    pub eval_blocks: usize,
    /// oracle-equal pairs with different values (soundness failures)
    pub unsound: Vec<(String, String)>,
    /// eval-equal pairs split at the bound and merged at the raised bound
    pub rescued: usize,
    /// eval-equal pairs still split at the raised bound
    pub unresolved: Vec<(String, String)>,
}

impl Agreement {
    pub fn holds(&self) -> bool {
        self.unsound.is_empty() && self.unresolved.is_empty()
    }
}

/// Check oracle-equal implies eval-equal exactly, and eval-equal implies
/// oracle-equal, retrying split pairs at `raised_bound`.
pub fn oracle_agreement(
    p: &Presentation,
    lang: Lang,
    dim: usize,
    bound: usize,
    raised_bound: usize,
) -> Result<Agreement, OracleError> {
    oracle_agreement_within(p, lang, dim, bound, raised_bound, DEFAULT_TERM_BUDGET)
}

pub fn oracle_agreement_within(
    p: &Presentation,
    lang: Lang,
    dim: usize,
    bound: usize,
    raised_bound: usize,
    budget: usize,
) -> Result<Agreement, OracleError> {
    let part = closure_oracle_within(p, lang, dim, bound, budget)?;
    let ts = &part.terms;
    let render = |k: &Key| term_of_key(p, lang, dim, k).to_string();
    let mut ag = Agreement { terms: ts.len(), oracle_blocks: part.block_count(), ..Default::default() };
    let mut block_value: HashMap<usize, usize> = HashMap::new();
    let mut by_value: HashMap<&Cell, Vec<usize>> = HashMap::new();
    for i in 0..ts.len() {
        let b = part.block_of(i);
        let rep = *block_value.entry(b).or_insert(i);
        if ts.value(rep) != ts.value(i) {
            ag.unsound.push((render(ts.key(rep)), render(ts.key(i))));
        }
        by_value.entry(ts.value(i)).or_default().push(i);
    }
    ag.eval_blocks = by_value.len();
    let mut split: Vec<(Key, Key)> = Vec::new();
    let mut values: Vec<_> = by_value.into_iter().collect();
    values.sort_by_key(|(_, v)| v[0]);
    for (_, members) in values {
        let first = members[0];
        let mut seen = vec![part.block_of(first)];
        for &i in &members[1..] {
            if !seen.contains(&part.block_of(i)) {
                seen.push(part.block_of(i));
                split.push((ts.key(first).clone(), ts.key(i).clone()));
            }
        }
    }
    if !split.is_empty() {
        let raised = closure_oracle_within(p, lang, dim, raised_bound, budget)?;
        for (a, b) in split {
            if raised.same_block(&a, &b) == Some(true) {
                ag.rescued += 1;
            } else {
                ag.unresolved.push((render(&a), render(&b)));
            }
        }
    }
    Ok(ag)
}

// ---------------------------------------------------------------------------
// random proofs and mutations

fn boundary_key(p: &Presentation, v: &Cell, k: usize, side: Side) -> Cell {
    k_boundary(p, v, k, side)
}

/// A random valid proof of `steps` lines over terms from `pool`; axiom
/// instances are root rewrites of pool members, possibly reversed, and
/// identity introductions.
pub fn random_proof<R: Rng>(p: &Presentation, pool: &TermSet, rng: &mut R, steps: usize) -> Proof {
    let lang = pool.lang;
    let n = pool.dim;
    let mk = |k: &Key| term_of_key(p, lang, n, k);
    let mut out: Vec<Step> = Vec::new();
    let mut eqs: Vec<(Term, Term, Cell)> = Vec::new();
    let mut attempts = 0;
    while out.len() < steps && attempts < steps * 100 {
        attempts += 1;
        let num = out.len() + 1;
        let choice = if eqs.is_empty() { 0 } else { rng.random_range(0..6) };
        let step = match choice {
            0 | 1 => {
                let i = pick_term(pool, rng);
                let key = pool.key(i);
                let rws = root_rewrites(p, lang, n, key);
                let intro = if choice == 1 { identity_intro(p, lang, n, key, pool.value(i), rng) } else { None };
                let (rule, target) = match intro.or_else(|| rws.choose(rng).cloned()) {
                    Some(x) => x,
                    None => (Rule::Reflexivity, key.clone()),
                };
                let (l, r) = if rng.random_bool(0.5) { (mk(key), mk(&target)) } else { (mk(&target), mk(key)) };
                Step { number: num, rule, premises: vec![], left: l, right: r }
            }
            2 => {
                let j = rng.random_range(0..eqs.len());
                let (a, b, _) = &eqs[j];
                Step { number: num, rule: Rule::Symmetry, premises: vec![j + 1], left: b.clone(), right: a.clone() }
            }
            3 => {
                let j = rng.random_range(0..eqs.len());
                let mid = &eqs[j].1;
                let mk_key = key_of(p, mid).ok();
                let cands: Vec<usize> =
                    (0..eqs.len()).filter(|&i| key_of(p, &eqs[i].0).ok() == mk_key && eqs[i].0.dim() == mid.dim()).collect();
                let Some(&i) = cands.choose(rng) else { continue };
                Step {
                    number: num,
                    rule: Rule::Transitivity,
                    premises: vec![j + 1, i + 1],
                    left: eqs[j].0.clone(),
                    right: eqs[i].1.clone(),
                }
            }
            _ => {
                let j = rng.random_range(0..eqs.len());
                let (a, b, v) = eqs[j].clone();
                let left_side = rng.random_bool(0.5);
                let Some((k, w)) = congruence_partner(p, pool, lang, &v, left_side, rng) else { continue };
                let wt = mk(&w);
                let (l, r) = if left_side {
                    (combine(k, a, wt.clone()), combine(k, b, wt))
                } else {
                    (combine(k, wt.clone(), a), combine(k, wt, b))
                };
                let (Some(l), Some(r)) = (l, r) else { continue };
                let rule = if left_side { Rule::CongruenceLeft } else { Rule::CongruenceRight };
                Step { number: num, rule, premises: vec![j + 1], left: l, right: r }
            }
        };
        let Ok(v) = step.left.eval(p) else { continue };
        if step.right.eval(p).is_err() {
            continue;
        }
        eqs.push((step.left.clone(), step.right.clone(), v));
        out.push(step);
    }
    Proof { lang, steps: out }
}

fn has_atom(k: &Key) -> bool {
    match k {
        Key::Atom(_) => true,
        Key::Id(_) => false,
        Key::Comp(_, l, r) => has_atom(l) || has_atom(r),
    }
}

/// A pool index, preferring terms that mention an indet.
fn pick_term<R: Rng>(pool: &TermSet, rng: &mut R) -> usize {
    let mut i = rng.random_range(0..pool.len());
    for _ in 0..4 {
        if has_atom(pool.key(i)) {
            break;
        }
        i = rng.random_range(0..pool.len());
    }
    i
}

fn combine(k: usize, a: Term, b: Term) -> Option<Term> {
    match (a, b) {
        (Term::C(a), Term::C(b)) => CTerm::comp(k, a, b).ok().map(Term::C),
        (Term::M(a), Term::M(b)) => MTerm::mcomp(k, a, b).ok().map(Term::M),
        _ => None,
    }
}

fn identity_intro<R: Rng>(p: &Presentation, lang: Lang, n: usize, key: &Key, v: &Cell, rng: &mut R) -> Option<(Rule, Key)> {
    match lang {
        Lang::C => {
            let k = rng.random_range(0..n);
            if rng.random_bool(0.5) {
                let b = iterated_identity(&boundary_key(p, v, k, Side::Codomain), n - 1);
                Some((Rule::IdentityLeft, Key::comp(k, &Key::Id(b), key)))
            } else {
                let a = iterated_identity(&boundary_key(p, v, k, Side::Domain), n - 1);
                Some((Rule::IdentityRight, Key::comp(k, key, &Key::Id(a))))
            }
        }
        Lang::M => {
            if rng.random_bool(0.5) {
                let x = target_object(p, v)?;
                Some((Rule::IdentityLeft, Key::comp(0, &Key::Id(cell::default_cell_of(p, x)), key)))
            } else {
                let src = cell::occurrences(v, Kind::Objects);
                if src.is_empty() {
                    return None;
                }
                let r = rng.random_range(0..src.len());
                Some((Rule::IdentityRight, Key::comp(r, key, &Key::Id(cell::default_cell_of(p, &src[r])))))
            }
        }
    }
}

/// A pool term `w` and an operator index making `v op w` (or `w op v`) defined.
fn congruence_partner<R: Rng>(
    p: &Presentation,
    pool: &TermSet,
    lang: Lang,
    v: &Cell,
    v_on_left: bool,
    rng: &mut R,
) -> Option<(usize, Key)> {
    for _ in 0..20 {
        let i = rng.random_range(0..pool.len());
        let w = pool.value(i);
        let k = match lang {
            Lang::C => rng.random_range(0..pool.dim),
            Lang::M => {
                let host = if v_on_left { v } else { w };
                let slots = occurrence_count(host, Kind::Objects);
                if slots == 0 {
                    continue;
                }
                rng.random_range(0..slots)
            }
        };
        let ok = match (lang, v_on_left) {
            (Lang::C, true) => compose(p, v, k, w).is_ok(),
            (Lang::C, false) => compose(p, w, k, v).is_ok(),
            (Lang::M, true) => multicompose(p, v, k, w).is_ok(),
            (Lang::M, false) => multicompose(p, w, k, v).is_ok(),
        };
        if ok {
            return Some((k, pool.key(i).clone()));
        }
    }
    None
}

/// Replace, insert or delete one token of a proof text.
pub fn mutate_proof_text<R: Rng>(text: &str, vocab: &[String], rng: &mut R) -> String {
    let mut toks: Vec<String> = Vec::new();
    let mut cur = String::new();
    let mut kind = 0u8;
    for ch in text.chars() {
        let k = if ch.is_ascii_alphanumeric() || ch == '_' || ch == '-' {
            1
        } else if ch.is_whitespace() {
            2
        } else {
            3
        };
        if k != kind || k == 3 {
            if !cur.is_empty() {
                toks.push(std::mem::take(&mut cur));
            }
            kind = k;
        }
        cur.push(ch);
    }
    if !cur.is_empty() {
        toks.push(cur);
    }
    let real: Vec<usize> = (0..toks.len()).filter(|&i| !toks[i].trim().is_empty()).collect();
    let Some(&i) = real.choose(rng) else { return text.to_string() };
    const SYMS: [&str; 10] = ["(", ")", "[", "]", "*", "=", ",", ".", "{", "}"];
    let tok = &toks[i];
    let replacement = if tok.chars().all(|c| c.is_ascii_digit()) {
        let mut d: usize = tok.parse().unwrap_or(0);
        while d.to_string() == *tok {
            d = rng.random_range(0..5);
        }
        d.to_string()
    } else if tok.chars().next().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
        let mut w = vocab.choose(rng).cloned().unwrap_or_default();
        if w == *tok {
            w = format!("{tok}{}", rng.random_range(0..3));
        }
        w
    } else {
        SYMS.choose(rng).unwrap().to_string()
    };
    match rng.random_range(0..5) {
        0 => toks[i] = String::new(),
        1 => toks.insert(i, replacement),
        _ => toks[i] = replacement,
    }
    toks.concat()
}

/// Identifiers a mutation may substitute: rule names, indet names and
/// operator letters.
pub fn proof_vocabulary(p: &Presentation) -> Vec<String> {
    let mut v: Vec<String> = Rule::ALL.iter().map(|r| r.name().to_string()).collect();
    for n in 0..=p.top_dim() {
        v.extend(p.indets(n).iter().map(|x| x.to_string()));
    }
    v.extend(["o", "1_a", "1_b", "1_x"].map(String::from));
    v
}

/// Outcome of checking a possibly mutated proof text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Rejected(String),
    Sound(String),
    Unsound(String),
}

pub fn judge(text: &str, p: &Presentation, lang: Lang) -> Verdict {
    match check_proof_text(text, p, Some(lang)) {
        Err(e) => Verdict::Rejected(e.to_string()),
        Ok(eq) => match decide_equal(&eq.left, &eq.right, p) {
            Ok(true) => Verdict::Sound(eq.to_string()),
            _ => Verdict::Unsound(eq.to_string()),
        },
    }
}
