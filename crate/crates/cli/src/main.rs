use std::cell::RefCell;
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mltc_core::cell::{self, classify, compose, iterated_boundary, occurrences, Cell, Kind, Side};
use mltc_core::deduction::{self, check_proof_text, ProofError};
use mltc_core::enumerate::{enumerate_cells, enumerate_many_to_one};
use mltc_core::laws::{self, LawReport, SuiteConfig};
use mltc_core::multitopic::{self, mlt_of_presentation};
use mltc_core::presentation::validate_presentation;
use mltc_core::term::{decide_equal, detect_lang, parse_cell, parse_term, readback, Lang, Term};
use mltc_core::{parse_presentation, Presentation};

thread_local! {
    static OUT: RefCell<String> = const { RefCell::new(String::new()) };
}

// Output is buffered and written once, so a closed pipe is not a crash.
macro_rules! out {
    ($($t:tt)*) => {
        OUT.with(|o| {
            use std::fmt::Write as _;
            let _ = write!(o.borrow_mut(), $($t)*);
        })
    };
}

macro_rules! outln {
    ($($t:tt)*) => {
        OUT.with(|o| {
            use std::fmt::Write as _;
            let _ = writeln!(o.borrow_mut(), $($t)*);
        })
    };
}

#[derive(Parser)]
#[command(name = "mltc", version, about = "Cells, terms and proofs over many-to-one computad presentations")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args, Clone)]
struct Common {
    /// presentation file, or `-` for standard input
    #[arg(short = 'p', long = "presentation")]
    presentation: String,
    /// structured output
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LangArg {
    C,
    M,
    /// canonical cell renderings
    Cell,
}

#[derive(Subcommand)]
enum Verb {
    /// Validate a presentation
    Check {
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a term to its canonical cell
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        lang: Option<LangArg>,
        term: String,
    },
    /// Decide whether two terms denote the same cell
    Eq {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        lang: Option<LangArg>,
        left: String,
        right: String,
    },
    /// Compose two cells along dimension k
    Compose {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        lang: Option<LangArg>,
        #[arg(short = 'k')]
        k: usize,
        left: String,
        right: String,
    },
    /// Domain and codomain, or the k-boundaries with -k
    Boundary {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        lang: Option<LangArg>,
        #[arg(short = 'k')]
        k: Option<usize>,
        cell: String,
    },
    /// Indet and object occurrence sequences
    Occurrences {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        lang: Option<LangArg>,
        cell: String,
    },
    /// List cells in canonical order
    Enumerate {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'n')]
        n: usize,
        #[arg(long = "max-indets", default_value_t = 3)]
        max_indets: usize,
        #[arg(long = "many-to-one-only")]
        many_to_one_only: bool,
    },
    /// Check a proof file and print the certified equation
    CheckProof {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        lang: Option<LangArg>,
        file: String,
    },
    /// Dump the bounded provability partition
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "c")]
        lang: LangArg,
        #[arg(short = 'n')]
        n: usize,
        /// term size bound in nodes
        #[arg(long, default_value_t = 5)]
        bound: usize,
    },
    /// Apply a morphism given by generator images
    MorphismApply {
        #[command(flatten)]
        common: Common,
        /// target presentation (defaults to the source)
        #[arg(long)]
        target: Option<String>,
        /// `f=g` pair, or a `.map` file of `f -> g` lines
        #[arg(long = "map")]
        map: Vec<String>,
        cells: Vec<String>,
    },
    /// Export a bounded truncation of the multitopic set as JSON
    Export {
        #[command(flatten)]
        common: Common,
        #[arg(long = "max-indets", default_value_t = 3)]
        max_indets: usize,
    },
    /// Run every law suite against the presentation
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0x6d6c_7463)]
        seed: u64,
        /// exhaustive bound in indet occurrences
        #[arg(long = "max-indets", default_value_t = 4)]
        max_indets: usize,
        /// random instances per sampled law group
        #[arg(long, default_value_t = 2000)]
        instances: usize,
    },
}

/// A failed invocation: 1 for a negative answer, 2 for bad input.
struct Fail(u8, String);

fn input_err(e: impl ToString) -> Fail {
    Fail(2, e.to_string())
}

fn read_source(arg: &str) -> Result<String, Fail> {
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(input_err)?;
        Ok(s)
    } else {
        std::fs::read_to_string(arg).map_err(|e| Fail(2, format!("{arg}: {e}")))
    }
}

/// Positional input: `-` reads standard input.
fn read_arg(arg: &str) -> Result<String, Fail> {
    if arg == "-" {
        Ok(read_source(arg)?.trim().to_string())
    } else {
        Ok(arg.to_string())
    }
}

fn load(c: &Common) -> Result<Presentation, Fail> {
    parse_presentation(&read_source(&c.presentation)?).map_err(|e| Fail(2, format!("{}: {e}", c.presentation)))
}

fn term_lang(lang: Option<LangArg>, text: &str) -> Lang {
    match lang {
        Some(LangArg::M) => Lang::M,
        Some(LangArg::C) => Lang::C,
        _ => detect_lang(text),
    }
}

fn lang_name(l: Lang) -> &'static str {
    match l {
        Lang::C => "c",
        Lang::M => "m",
    }
}

fn parse_any_term(p: &Presentation, lang: Option<LangArg>, text: &str) -> Result<Term, Fail> {
    parse_term(text, p, term_lang(lang, text), None).map_err(input_err)
}

/// A cell given as a term, or as a rendering under `--lang cell`. Without
/// `--lang`, renderings are recognised by `#` or an application.
fn cell_arg(p: &Presentation, lang: Option<LangArg>, text: &str) -> Result<Cell, Fail> {
    let text = read_arg(text)?;
    let as_cell = match lang {
        Some(LangArg::Cell) => true,
        Some(_) => false,
        None => {
            text.contains('#') || text.contains("e{") || (text.contains("()") && !text.contains('*') && !text.contains("o["))
        }
    };
    if as_cell {
        parse_cell(&text, p).map_err(input_err)
    } else {
        parse_any_term(p, lang, &text)?.eval(p).map_err(input_err)
    }
}

fn print_json(v: &Value) {
    outln!("{}", serde_json::to_string_pretty(v).expect("json values serialize"));
}

fn report_lines(reports: &[LawReport]) -> (Vec<String>, bool) {
    let mut lines = Vec::new();
    for r in reports {
        let mark = if r.passed() { "ok  " } else { "FAIL" };
        lines.push(format!("{mark} {} ({} checked, {} failures)", r.law, r.checked, r.failure_count));
        for f in &r.failures {
            lines.push(format!("       {f}"));
        }
    }
    (lines, laws::all_passed(reports))
}

fn run(verb: Verb) -> Result<(), Fail> {
    match verb {
        Verb::Check { common } => {
            let p = load(&common)?;
            let rep = validate_presentation(&p);
            let counts: Vec<usize> = (0..=p.top_dim()).map(|n| p.indets(n).len()).collect();
            if common.json {
                let v: Vec<Value> = rep
                    .violations
                    .iter()
                    .map(|v| json!({"indet": v.indet, "dim": v.dim, "message": v.message}))
                    .collect();
                print_json(&json!({"name": p.name(), "dim": p.top_dim(), "indets": counts, "violations": v}));
            } else if rep.is_empty() {
                outln!("ok: {} (dimension {}, indets per dimension {:?})", p.name(), p.top_dim(), counts);
            } else {
                out!("{rep}");
            }
            if rep.is_empty() {
                Ok(())
            } else {
                Err(Fail(1, format!("{} violation(s)", rep.violations.len())))
            }
        }
        Verb::Eval { common, lang, term } => {
            let p = load(&common)?;
            let text = read_arg(&term)?;
            let u = if lang == Some(LangArg::Cell) {
                parse_cell(&text, &p).map_err(input_err)?
            } else {
                parse_any_term(&p, lang, &text)?.eval(&p).map_err(input_err)?
            };
            if common.json {
                let back_c = readback(&p, &u, Lang::C).ok();
                let back_m = readback(&p, &u, Lang::M).ok();
                print_json(&json!({
                    "dim": u.dim(),
                    "cell": u.render(),
                    "record": u.to_record(),
                    "readback": {"c": back_c, "m": back_m},
                }));
            } else {
                outln!("{u}");
            }
            Ok(())
        }
        Verb::Eq { common, lang, left, right } => {
            let p = load(&common)?;
            let (l, r) = (read_arg(&left)?, read_arg(&right)?);
            let (a, b) = if lang == Some(LangArg::Cell) {
                (parse_cell(&l, &p).map_err(input_err)?, parse_cell(&r, &p).map_err(input_err)?)
            } else {
                let (tl, tr) = (parse_any_term(&p, lang, &l)?, parse_any_term(&p, lang, &r)?);
                (tl.eval(&p).map_err(input_err)?, tr.eval(&p).map_err(input_err)?)
            };
            let eq = a == b;
            if common.json {
                print_json(&json!({"equal": eq, "left": a.render(), "right": b.render()}));
            } else if eq {
                outln!("equal");
            } else {
                outln!("not equal\n  {a}\n  {b}");
            }
            if eq {
                Ok(())
            } else {
                Err(Fail(1, String::new()))
            }
        }
        Verb::Compose { common, lang, k, left, right } => {
            let p = load(&common)?;
            let (a, b) = (cell_arg(&p, lang, &left)?, cell_arg(&p, lang, &right)?);
            let (c, prov) = compose(&p, &a, k, &b).map_err(|e| Fail(1, e.to_string()))?;
            if common.json {
                print_json(&json!({"cell": c.render(), "record": c.to_record(), "provenance": {"left": prov.left, "right": prov.right}}));
            } else {
                outln!("{c}");
                outln!("provenance left {:?} right {:?}", prov.left, prov.right);
            }
            Ok(())
        }
        Verb::Boundary { common, lang, k, cell } => {
            let p = load(&common)?;
            let u = cell_arg(&p, lang, &cell)?;
            if u.dim() == 0 {
                return Err(Fail(2, "0-cells have no boundary".into()));
            }
            let (d, c) = match k {
                None => cell::boundary(&p, &u),
                Some(k) => (
                    iterated_boundary(&p, &u, k, Side::Domain).map_err(input_err)?,
                    iterated_boundary(&p, &u, k, Side::Codomain).map_err(input_err)?,
                ),
            };
            if common.json {
                print_json(&json!({"domain": d.render(), "codomain": c.render()}));
            } else {
                outln!("domain   {d}\ncodomain {c}");
            }
            Ok(())
        }
        Verb::Occurrences { common, lang, cell } => {
            let p = load(&common)?;
            let u = cell_arg(&p, lang, &cell)?;
            let ind: Vec<String> = occurrences(&u, Kind::Indets).iter().map(|x| x.to_string()).collect();
            let obj: Vec<String> = occurrences(&u, Kind::Objects).iter().map(|x| x.to_string()).collect();
            let cls = classify(&p, &u);
            if common.json {
                print_json(&json!({
                    "indets": ind,
                    "objects": obj,
                    "is_identity": cls.is_identity,
                    "is_indet": cls.is_indet,
                    "is_many_to_one": cls.is_many_to_one,
                }));
            } else {
                outln!("indets  ({})", ind.join(", "));
                outln!("objects ({})", obj.join(", "));
            }
            Ok(())
        }
        Verb::Enumerate { common, n, max_indets, many_to_one_only } => {
            let p = load(&common)?;
            if n > p.top_dim() + 1 {
                return Err(Fail(2, format!("dimension {n} exceeds {}", p.top_dim() + 1)));
            }
            let cells =
                if many_to_one_only { enumerate_many_to_one(&p, n, max_indets) } else { enumerate_cells(&p, n, max_indets) };
            if common.json {
                let v: Vec<Value> = cells.iter().map(|c| json!(c.render())).collect();
                print_json(&json!({"dim": n, "count": cells.len(), "cells": v}));
            } else {
                for c in &cells {
                    outln!("{c}");
                }
            }
            Ok(())
        }
        Verb::CheckProof { common, lang, file } => {
            let p = load(&common)?;
            let text = read_source(&file)?;
            let lang = match lang {
                Some(LangArg::C) => Some(Lang::C),
                Some(LangArg::M) => Some(Lang::M),
                _ => None,
            };
            match check_proof_text(&text, &p, lang) {
                Ok(eq) => {
                    let ok = decide_equal(&eq.left, &eq.right, &p).unwrap_or(false);
                    if common.json {
                        print_json(&json!({"valid": true, "equation": eq.to_string(), "lang": lang_name(eq.lang), "dim": eq.dim, "sound": ok}));
                    } else {
                        outln!("{eq}");
                    }
                    Ok(())
                }
                Err(e) => {
                    if common.json {
                        let path = match &e {
                            ProofError::InvalidStep { path, .. } => path.clone(),
                            _ => vec![],
                        };
                        print_json(&json!({"valid": false, "step": e.location(), "path": path, "error": e.to_string()}));
                    }
                    let code = if matches!(e, ProofError::InvalidStep { .. }) { 1 } else { 2 };
                    Err(Fail(code, e.to_string()))
                }
            }
        }
        Verb::Oracle { common, lang, n, bound } => {
            let p = load(&common)?;
            let lang = if lang == LangArg::M { Lang::M } else { Lang::C };
            let part = deduction::closure_oracle(&p, lang, n, bound).map_err(|e| Fail(2, e.to_string()))?;
            let ts = &part.terms;
            let blocks = part.blocks();
            let rendered: Vec<Vec<String>> = blocks
                .iter()
                .map(|b| b.iter().map(|&i| deduction::term_of_key(&p, lang, n, ts.key(i)).to_string()).collect())
                .collect();
            if common.json {
                let v: Vec<Value> = blocks
                    .iter()
                    .zip(&rendered)
                    .map(|(b, terms)| json!({"cell": ts.value(b[0]).render(), "terms": terms}))
                    .collect();
                print_json(&json!({"lang": lang_name(lang), "dim": n, "bound": bound, "terms": ts.len(), "blocks": v}));
            } else {
                outln!("{} terms, {} blocks", ts.len(), blocks.len());
                for (b, terms) in blocks.iter().zip(&rendered) {
                    outln!("[{}] {}", terms.len(), ts.value(b[0]));
                    for t in terms {
                        outln!("  {t}");
                    }
                }
            }
            Ok(())
        }
        Verb::MorphismApply { common, target, map, cells } => {
            let p = load(&common)?;
            let q = match &target {
                Some(t) => parse_presentation(&read_source(t)?).map_err(|e| Fail(2, format!("{t}: {e}")))?,
                None => p.clone(),
            };
            let mut images = BTreeMap::new();
            for m in &map {
                let part = if m.contains('=') {
                    multitopic::parse_map_flags(&[m.as_str()])
                } else if Path::new(m).exists() || m == "-" {
                    multitopic::parse_map(&read_source(m)?)
                } else {
                    return Err(Fail(2, format!("`{m}` is neither `f=g` nor a map file")));
                };
                images.extend(part.map_err(input_err)?);
            }
            let s = mlt_of_presentation(&p).map_err(input_err)?;
            let t = mlt_of_presentation(&q).map_err(input_err)?;
            let m = multitopic::build_morphism(&s, &t, &images).map_err(|e| Fail(1, e.to_string()))?;
            let mut out = Vec::new();
            for c in &cells {
                let u = cell_arg(&p, Some(LangArg::Cell), c).or_else(|_| cell_arg(&p, None, c))?;
                out.push((u.render(), m.apply(&u).map_err(input_err)?.render()));
            }
            if common.json {
                let pairs: Vec<Value> = m.pairs().iter().map(|(a, b)| json!([a.to_string(), b.to_string()])).collect();
                let v: Vec<Value> = out.iter().map(|(a, b)| json!({"cell": a, "image": b})).collect();
                print_json(&json!({"images": pairs, "results": v}));
            } else {
                for (_, b) in &out {
                    outln!("{b}");
                }
            }
            Ok(())
        }
        Verb::Export { common, max_indets } => {
            let p = load(&common)?;
            let s = mlt_of_presentation(&p).map_err(input_err)?;
            let e = multitopic::export(&s, max_indets).map_err(input_err)?;
            print_json(&serde_json::to_value(&e).expect("export serializes"));
            Ok(())
        }
        Verb::Verify { common, seed, max_indets, instances } => {
            let p = load(&common)?;
            let rep = validate_presentation(&p);
            if !rep.is_empty() {
                return Err(Fail(1, format!("invalid presentation:\n{rep}")));
            }
            let cfg = SuiteConfig { bound: max_indets, random_instances: instances, seed };
            let mut groups: Vec<(&str, Vec<LawReport>)> = vec![
                ("multicategory", laws::multicategory_suite(&p, &cfg)),
                ("omega", laws::omega_suite(&p, &cfg)),
                ("placed", laws::placed_suite(&p, &cfg)),
                ("indet", laws::indet_suite(&p, max_indets, max_indets + 2)),
            ];
            groups.push(("multitopic", multitopic_reports(&p, max_indets)?));
            groups.push(("deduction", deduction_reports(&p, seed)));
            groups.push(("readback", readback_reports(&p, max_indets)));
            let mut all_ok = true;
            let mut json_groups = Vec::new();
            for (name, reports) in &groups {
                let (lines, ok) = report_lines(reports);
                all_ok &= ok;
                if common.json {
                    let v: Vec<Value> = reports
                        .iter()
                        .map(|r| json!({"law": r.law, "checked": r.checked, "failures": r.failure_count, "examples": r.failures}))
                        .collect();
                    json_groups.push(json!({"group": name, "passed": ok, "laws": v}));
                } else {
                    outln!("{name}: {}", if ok { "pass" } else { "FAIL" });
                    for l in lines {
                        outln!("  {l}");
                    }
                }
            }
            if common.json {
                print_json(&json!({"passed": all_ok, "groups": json_groups}));
            }
            if all_ok {
                Ok(())
            } else {
                Err(Fail(1, "some properties failed".into()))
            }
        }
    }
}

fn multitopic_reports(p: &Presentation, bound: usize) -> Result<Vec<LawReport>, Fail> {
    let s = mlt_of_presentation(p).map_err(input_err)?;
    let rep = multitopic::check_all_levels(&s, bound);
    let structure = LawReport {
        law: "free extension and globularity".into(),
        checked: rep.checked,
        failures: rep.violations.iter().take(20).map(|v| format!("{}: {}", v.law, v.detail)).collect(),
        failure_count: rep.violations.len(),
    };
    let mut led = laws::Ledger::new();
    led.check("computad_of_mlt after mlt_of_presentation", multitopic::computad_of_mlt(&s) == *p, String::new);
    let back = mlt_of_presentation(&multitopic::computad_of_mlt(&s)).map_err(input_err)?;
    led.check("mlt_of_presentation after computad_of_mlt", back == s, String::new);
    let id = multitopic::identity_morphism(&s);
    for n in 0..=p.top_dim() {
        for u in s.pasting_diagrams(n, bound) {
            led.check("identity morphism", id.apply(&u).ok() == Some(u.clone()), || u.to_string());
        }
    }
    let mut out = vec![structure];
    out.extend(led.into_reports());
    Ok(out)
}

const VERIFY_BUDGET: usize = 200_000;

fn deduction_reports(p: &Presentation, seed: u64) -> Vec<LawReport> {
    use rand::SeedableRng;
    let mut led = laws::Ledger::new();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let vocab = deduction::proof_vocabulary(p);
    for n in 1..=p.top_dim() {
        for lang in [Lang::C, Lang::M] {
            let tag = lang_name(lang);
            let law = format!("oracle agreement ({tag}, dim {n})");
            match deduction::oracle_agreement_within(p, lang, n, 5, 7, VERIFY_BUDGET) {
                Ok(ag) => led.check(&law, ag.holds(), || format!("{ag:?}")),
                Err(deduction::OracleError::Budget(_)) => {
                    led.check(&format!("{law} skipped, term budget exceeded"), true, String::new)
                }
            }
            let pool = [5, 3]
                .into_iter()
                .find_map(|b| deduction::enumerate_terms(p, lang, n, b, VERIFY_BUDGET).ok().filter(|t| !t.is_empty()));
            let Some(pool) = pool else { continue };
            for _ in 0..100 {
                let pf = deduction::random_proof(p, &pool, &mut rng, 10);
                let text = pf.to_string();
                let v = deduction::judge(&text, p, lang);
                led.check(&format!("random proofs check ({tag})"), matches!(v, deduction::Verdict::Sound(_)), || {
                    format!("{v:?}\n{text}")
                });
                let m = deduction::mutate_proof_text(&text, &vocab, &mut rng);
                let v = deduction::judge(&m, p, lang);
                led.check(&format!("mutated proofs rejected or sound ({tag})"), !matches!(v, deduction::Verdict::Unsound(_)), || {
                    format!("{v:?}\n{m}")
                });
            }
        }
    }
    led.into_reports()
}

fn readback_reports(p: &Presentation, bound: usize) -> Vec<LawReport> {
    let mut led = laws::Ledger::new();
    for n in 0..=p.top_dim() + 1 {
        for u in enumerate_cells(p, n, bound) {
            let c = readback(p, &u, Lang::C).and_then(|t| parse_term(&t, p, Lang::C, Some(n))).and_then(|t| t.eval(p));
            led.check("eval after C readback", c.as_ref().ok() == Some(&u), || u.to_string());
            if u.is_many_to_one() {
                let m = readback(p, &u, Lang::M).and_then(|t| parse_term(&t, p, Lang::M, Some(n))).and_then(|t| t.eval(p));
                led.check("eval after M readback", m.as_ref().ok() == Some(&u), || u.to_string());
            }
        }
    }
    led.into_reports()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = run(cli.verb);
    OUT.with(|o| {
        let mut stdout = std::io::stdout().lock();
        let _ = stdout.write_all(o.borrow().as_bytes());
        let _ = stdout.flush();
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail(code, msg)) => {
            if !msg.is_empty() {
                eprintln!("mltc: {msg}");
            }
            ExitCode::from(code)
        }
    }
}
