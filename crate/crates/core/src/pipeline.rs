//! Per-declaration checking against `--expect` directives, and report records.

use crate::check::{CheckError, Checker, DEFAULT_FUEL};
use crate::fitch::FChecker;
use crate::itt::{print_term, print_type, IChecker, ICtx};
use crate::surface::{self, DeclBody, Expect, ParseError, Printer, SourceFile, Span};
use crate::syntax::*;
use crate::translate::{TraceStep, Translator};
use std::time::Instant;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    TypeError(String),
    Unknown,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Ok => "ok",
            Verdict::TypeError(_) => "type-error",
            Verdict::Unknown => "unknown",
        }
    }
}

#[derive(Clone, Debug)]
pub struct DeclOutcome {
    pub name: String,
    pub span: Span,
    pub judgment: String,
    pub verdict: Verdict,
    pub message: Option<String>,
    pub expect: Expect,
    /// Verdict agrees with the directive.
    pub matches: bool,
    pub ms: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct FileReport {
    pub file: String,
    pub mode: Mode,
    pub decls: Vec<DeclOutcome>,
}

impl FileReport {
    pub fn all_match(&self) -> bool {
        self.decls.iter().all(|d| d.matches)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub fuel: u64,
    pub mode: Option<Mode>,
    pub timings: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options { fuel: DEFAULT_FUEL, mode: None, timings: false }
    }
}

pub fn parse_source(src: &str, opts: &Options) -> Result<SourceFile, ParseError> {
    match opts.mode {
        Some(m) => surface::parse_with_mode(src, m),
        None => surface::parse(src),
    }
}

/// A checker primed with every earlier well-typed declaration of `sf`
/// preceding index `upto`.
pub fn checker_for(sf: &SourceFile, upto: usize, fuel: u64) -> Checker {
    let mut c = Checker::with_fuel(sf.mode, fuel);
    for d in &sf.decls[..upto] {
        if let DeclBody::Term { ty, body } = &d.body {
            c.add_global(body.clone(), ty.clone());
        }
    }
    c
}

fn verdict_of(e: &CheckError) -> Verdict {
    match e {
        CheckError::FuelExhausted => Verdict::Unknown,
        e => Verdict::TypeError(e.class().to_string()),
    }
}

/// Check one declaration of a parsed file.
pub fn check_decl(sf: &SourceFile, idx: usize, opts: &Options) -> DeclOutcome {
    let d = &sf.decls[idx];
    let start = Instant::now();
    let mut p = Printer::new(sf.mode);
    let (judgment, result) = match &d.body {
        DeclBody::Ctx(c) => {
            let c2 = Checker::with_fuel(sf.mode, opts.fuel);
            (format!("{} : ctx = {}", d.name, p.dom_ctx(c)), c2.check_dom_ctx(&[], c).map(|_| None))
        }
        DeclBody::Term { ty, body } => {
            let c = checker_for(sf, idx, opts.fuel);
            let r = c.check_decl(ty, body).and_then(|_| match &d.expect {
                Expect::Eval(want) => {
                    c.reset_fuel();
                    let got = c.nf_comp(&[], body, ty)?;
                    let want_nf = c.nf_comp(&[], want, ty)?;
                    Ok(Some(got == want_nf))
                }
                _ => Ok(None),
            });
            (format!("{} : {}", d.name, p.comp_type(ty)), r)
        }
    };
    let ms = opts.timings.then(|| start.elapsed().as_secs_f64() * 1e3);
    let (verdict, message, eval_ok) = match result {
        Ok(e) => (Verdict::Ok, None, e),
        Err(e) => (verdict_of(&e), Some(format!("{}: {}", e.class(), e)), None),
    };
    let matches = match (&d.expect, &verdict) {
        (Expect::Ok, Verdict::Ok) => true,
        (Expect::Eval(_), Verdict::Ok) => eval_ok == Some(true),
        (Expect::TypeError(None), Verdict::TypeError(_)) => true,
        (Expect::TypeError(Some(want)), Verdict::TypeError(got)) => want == got,
        _ => false,
    };
    let message = match (&message, eval_ok) {
        (None, Some(false)) => Some("normal form differs from the expected value".to_string()),
        _ => message,
    };
    DeclOutcome {
        name: d.name.clone(),
        span: d.span,
        judgment,
        verdict,
        message,
        expect: d.expect.clone(),
        matches,
        ms,
    }
}

pub fn check_file(file: &str, sf: &SourceFile, opts: &Options) -> FileReport {
    let decls = (0..sf.decls.len()).map(|i| check_decl(sf, i, opts)).collect();
    FileReport { file: file.to_string(), mode: sf.mode, decls }
}

/// Parse and check a source text. A scope error rejects the declaration it
/// occurs in and ends the file there; syntax errors are returned.
pub fn check_source(file: &str, src: &str, opts: &Options) -> Result<FileReport, ParseError> {
    let e = match parse_source(src, opts) {
        Ok(sf) => return Ok(check_file(file, &sf, opts)),
        Err(e @ ParseError::Syntax { .. }) => return Err(e),
        Err(e) => e,
    };
    let span = e.span();
    let upto: Vec<&str> = src.lines().take(span.line).collect();
    let def_at = upto.iter().rposition(|l| l.trim_start().starts_with("def "));
    let name = def_at
        .and_then(|i| upto[i].trim_start()[4..].split(|c: char| c.is_whitespace() || c == ':').next())
        .unwrap_or("-")
        .to_string();
    // the directive block directly above the declaration
    let expect = def_at
        .map(|i| &upto[..i])
        .and_then(|above| {
            above
                .iter()
                .rev()
                .take_while(|l| l.trim_start().starts_with("--"))
                .find_map(|l| l.trim().strip_prefix("--expect:"))
        })
        .map(|d| match d.trim().strip_prefix("type-error") {
            Some(c) => {
                let c = c.trim_start_matches(':').trim();
                Expect::TypeError((!c.is_empty()).then(|| c.to_string()))
            }
            None => Expect::Ok,
        })
        .unwrap_or(Expect::Ok);
    let verdict = Verdict::TypeError(e.class().to_string());
    let matches = match &expect {
        Expect::TypeError(None) => true,
        Expect::TypeError(Some(c)) => c == e.class(),
        _ => false,
    };
    let mode = src.lines().find_map(|l| l.trim().strip_prefix("--mode:")).map_or(Mode::Simple, |m| {
        if m.trim() == "dep" {
            Mode::Dep
        } else {
            Mode::Simple
        }
    });
    let decl = DeclOutcome {
        name,
        span,
        judgment: "(not parsed)".into(),
        verdict,
        message: Some(format!("{}: {e}", e.class())),
        expect,
        matches,
        ms: None,
    };
    Ok(FileReport { file: file.to_string(), mode: opts.mode.unwrap_or(mode), decls: vec![decl] })
}

pub fn text_line(file: &str, d: &DeclOutcome) -> String {
    let v = match &d.verdict {
        Verdict::TypeError(c) => format!("type-error: {c}"),
        v => v.as_str().to_string(),
    };
    let tag = if d.matches { "" } else { "  MISMATCH" };
    format!("{file}:{}: {} -> {v}{tag}", d.span, d.judgment)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Internal,
    Fitch,
}

/// A translated declaration and the verdict of re-checking it in the target.
#[derive(Clone, Debug)]
pub struct Translation {
    pub name: String,
    pub term: String,
    pub ty: String,
    pub trace: Vec<TraceStep>,
    /// `Err(class: message)` when the target rejects the image.
    pub recheck: Result<(), String>,
    /// Uses of box idempotence while re-checking; flagged for audit since
    /// the target only validates it for two modal levels.
    pub idempotence: u64,
}

/// Translate the term declaration at `idx`; `None` for context definitions
/// and for declarations the source checker rejects.
pub fn translate_decl(sf: &SourceFile, idx: usize, target: Target, opts: &Options, trace: bool) -> Option<Translation> {
    let d = &sf.decls[idx];
    let DeclBody::Term { ty, body } = &d.body else { return None };
    let ck = checker_for(sf, idx, opts.fuel);
    ck.check_decl(ty, body).ok()?;
    ck.reset_fuel();
    let name = d.name.clone();
    match target {
        Target::Internal => {
            let tr = Translator::new(&ck, sf.mode, trace);
            let (e, t) = match tr.decl(ty, body) {
                Ok(x) => x,
                Err(err) => {
                    return Some(Translation {
                        name,
                        term: String::new(),
                        ty: String::new(),
                        trace: tr.take_trace(),
                        recheck: Err(format!("TranslationFailed: {err}")),
                        idempotence: 0,
                    })
                }
            };
            let ic = IChecker::with_fuel(opts.fuel);
            let cx = ICtx::new();
            let recheck = ic
                .wf_type(&cx, &t)
                .and_then(|_| ic.check(&cx, &e, &t))
                .map_err(|err| format!("{}: {err}", err.class()));
            let idempotence = ic.idempotence_uses();
            Some(Translation {
                name,
                term: print_term(&e),
                ty: print_type(&t),
                trace: tr.take_trace(),
                recheck,
                idempotence,
            })
        }
        Target::Fitch => {
            let (r, term, fty) = match crate::fitch::translate_decl(&ck, sf.mode, ty, body) {
                Ok((e, t)) => {
                    let fc = FChecker::with_fuel(opts.fuel);
                    let r = fc.check_decl(&e, &t).map_err(|err| format!("{}: {err}", err.class()));
                    (r, crate::fitch::print_term(&e), crate::fitch::print_term(&t))
                }
                Err(err) => (Err(format!("{}: {err}", err.class())), String::new(), String::new()),
            };
            Some(Translation { name, term, ty: fty, trace: Vec::new(), recheck: r, idempotence: 0 })
        }
    }
}
