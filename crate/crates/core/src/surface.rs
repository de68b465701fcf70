//! Concrete syntax: lexer, scope-resolving parser and printer for `.ccn`.

use crate::syntax::*;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl std::fmt::Display for Span {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{span}: syntax error: expected {expected}, found {found}")]
    Syntax { span: Span, expected: String, found: String },
    #[error("{span}: scope error: {msg}")]
    Scope { span: Span, msg: String },
}

impl ParseError {
    pub fn class(&self) -> &'static str {
        match self {
            ParseError::Syntax { .. } => "SyntaxError",
            ParseError::Scope { .. } => "ScopeError",
        }
    }
    pub fn span(&self) -> Span {
        match self {
            ParseError::Syntax { span, .. } | ParseError::Scope { span, .. } => *span,
        }
    }
}

type PResult<T> = Result<T, ParseError>;

#[derive(Clone, Debug, PartialEq)]
pub enum Expect {
    Ok,
    TypeError(Option<String>),
    Eval(CompTerm),
}

#[derive(Clone, Debug, PartialEq)]
pub enum DeclBody {
    Term { ty: CompType, body: CompTerm },
    Ctx(DomCtx),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decl {
    pub name: String,
    pub span: Span,
    pub body: DeclBody,
    pub expect: Expect,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SourceFile {
    pub mode: Mode,
    pub decls: Vec<Decl>,
}

impl Decl {
    pub fn uses_rec(&self) -> bool {
        matches!(&self.body, DeclBody::Term { body, .. } if contains_rec(body))
    }
}

impl SourceFile {
    pub fn decl(&self, name: &str) -> Option<&Decl> {
        self.decls.iter().find(|d| d.name == name)
    }
}

// ---------------------------------------------------------------------------
// lexer

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(usize),
    Sym(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    span: Span,
}

const SYMS: &[&str] = &["|-#", "|-", "->", "=>", "(", ")", "[", "]", "<", ">", ",", ";", ":", ".", "\\", "="];

const KEYWORDS: &[&str] =
    &["def", "fn", "box", "unbox", "rec", "wk", "id", "ctx", "tm", "ty", "trm", "Pi", "lam", "app", "o", "arr"];

fn lex(src: &str, line0: usize) -> PResult<Vec<Token>> {
    let mut out = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        let line_no = line0 + ln + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        'outer: while i < chars.len() {
            let c = chars[i];
            let span = Span { line: line_no, col: i + 1 };
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == '-' && chars.get(i + 1) == Some(&'-') {
                break;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let st = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                    i += 1;
                }
                out.push(Token { tok: Tok::Ident(chars[st..i].iter().collect()), span });
                continue;
            }
            if c.is_ascii_digit() {
                let st = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[st..i].iter().collect();
                let n = s.parse().map_err(|_| ParseError::Syntax {
                    span,
                    expected: "a number".into(),
                    found: s.clone(),
                })?;
                out.push(Token { tok: Tok::Num(n), span });
                continue;
            }
            for s in SYMS {
                let sc: Vec<char> = s.chars().collect();
                if chars[i..].starts_with(&sc) {
                    out.push(Token { tok: Tok::Sym(s), span });
                    i += sc.len();
                    continue 'outer;
                }
            }
            return Err(ParseError::Syntax { span, expected: "a token".into(), found: format!("`{c}`") });
        }
    }
    let span = Span { line: line0 + src.lines().count() + 1, col: 1 };
    out.push(Token { tok: Tok::Eof, span });
    Ok(out)
}

// ---------------------------------------------------------------------------
// parser

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum CKind {
    Ctx,
    Term,
    Unknown,
}

#[derive(Clone)]
enum Global {
    Term(CompTerm),
    Ctx(DomCtx, Vec<String>),
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    mode: Mode,
    comp: Vec<(String, CKind)>,
    dom: Vec<String>,
    globals: &'a [(String, Global)],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }
    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }
    fn span(&self) -> Span {
        self.toks[self.pos].span
    }
    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }
    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }
    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }
    fn err<T>(&self, expected: &str) -> PResult<T> {
        Err(ParseError::Syntax { span: self.span(), expected: expected.into(), found: self.peek().describe() })
    }
    fn scope_err<T>(&self, msg: String) -> PResult<T> {
        Err(ParseError::Scope { span: self.span(), msg })
    }
    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.err(&format!("`{s}`"))
        }
    }
    fn expect_kw(&mut self, s: &str) -> PResult<()> {
        if self.is_kw(s) {
            self.bump();
            Ok(())
        } else {
            self.err(&format!("`{s}`"))
        }
    }
    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => self.err("an identifier"),
        }
    }
    fn num(&mut self) -> PResult<usize> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.err("a number"),
        }
    }

    fn comp_lookup(&self, name: &str) -> Option<(usize, CKind)> {
        self.comp.iter().rev().position(|(n, _)| n == name).map(|i| (i, self.comp[self.comp.len() - 1 - i].1))
    }
    fn global(&self, name: &str) -> Option<&Global> {
        self.globals.iter().rev().find(|(n, _)| n == name).map(|(_, g)| g)
    }

    fn with_dom<T>(&mut self, dom: Vec<String>, f: impl FnOnce(&mut Self) -> PResult<T>) -> PResult<T> {
        let saved = std::mem::replace(&mut self.dom, dom);
        let r = f(self);
        self.dom = saved;
        r
    }

    // ----- contexts

    /// Parses a domain context and leaves its names as the domain scope.
    fn dom_ctx(&mut self) -> PResult<DomCtx> {
        self.dom.clear();
        let mut ctx = DomCtx::Empty;
        if self.is_sym("|-") || self.is_sym("|-#") || self.is_sym(")") {
            return Ok(ctx);
        }
        if self.is_sym(".") {
            self.bump();
        } else if matches!(self.peek_at(1), Tok::Sym(":")) {
            ctx = self.ctx_decl(ctx)?;
        } else {
            let name = self.ident()?;
            ctx = self.ctx_head(&name)?;
        }
        while self.is_sym(",") {
            self.bump();
            ctx = self.ctx_decl(ctx)?;
        }
        Ok(ctx)
    }

    fn ctx_head(&mut self, name: &str) -> PResult<DomCtx> {
        if let Some((i, kind)) = self.comp_lookup(name) {
            if kind == CKind::Term {
                return self.scope_err(format!("`{name}` is not a context variable"));
            }
            return Ok(DomCtx::Var(i));
        }
        match self.global(name).cloned() {
            Some(Global::Ctx(c, names)) => {
                self.dom = names;
                Ok(c)
            }
            Some(Global::Term(_)) => self.scope_err(format!("`{name}` is not a context")),
            None => self.scope_err(format!("unbound context `{name}`")),
        }
    }

    fn ctx_decl(&mut self, ctx: DomCtx) -> PResult<DomCtx> {
        let x = self.ident()?;
        self.expect_sym(":")?;
        let a = self.dom_type()?;
        self.dom.push(x);
        Ok(snoc(ctx, a))
    }

    // ----- domain types

    fn dom_type(&mut self) -> PResult<DomType> {
        if self.is_kw("Pi") {
            self.bump();
            let x = self.ident()?;
            self.expect_sym(":")?;
            let a = self.dom_type()?;
            self.expect_sym(".")?;
            self.dom.push(x);
            let b = self.dom_type();
            self.dom.pop();
            return Ok(pi(a, b?));
        }
        let a = self.dom_type_atom()?;
        if self.is_sym("->") {
            self.bump();
            return Ok(match self.mode {
                Mode::Simple => arrow(a, self.dom_type()?),
                Mode::Dep => {
                    self.dom.push("_".into());
                    let b = self.dom_type();
                    self.dom.pop();
                    pi(a, b?)
                }
            });
        }
        Ok(a)
    }

    fn dom_type_atom(&mut self) -> PResult<DomType> {
        if self.is_kw("tm") {
            self.bump();
            Ok(DomType::Tm)
        } else if self.is_kw("ty") {
            self.bump();
            Ok(DomType::Ty)
        } else if self.is_kw("trm") {
            self.bump();
            Ok(trm(self.dom_atom()?))
        } else if self.is_sym("(") {
            self.bump();
            let a = self.dom_type()?;
            self.expect_sym(")")?;
            Ok(a)
        } else {
            self.err("a domain type")
        }
    }

    // ----- domain terms

    fn dom_term(&mut self) -> PResult<DomTerm> {
        if self.is_sym("\\") {
            self.bump();
            let x = self.ident()?;
            self.expect_sym(".")?;
            self.dom.push(x);
            let b = self.dom_term();
            self.dom.pop();
            return Ok(dlam(b?));
        }
        let span = self.span();
        let head = self.dom_head()?;
        let mut args = Vec::new();
        while self.starts_dom_atom() {
            args.push(self.dom_atom()?);
        }
        // a lambda may close an application spine
        if self.is_sym("\\") {
            args.push(self.dom_term()?);
        }
        match head {
            Head::Con(k) => {
                if args.len() != k.arity() {
                    return Err(ParseError::Syntax {
                        span,
                        expected: format!("{} arguments to `{}`", k.arity(), k.name()),
                        found: format!("{}", args.len()),
                    });
                }
                Ok(DomTerm::Con(k, args))
            }
            Head::Term(t) => Ok(args.into_iter().fold(t, dapp)),
        }
    }

    fn starts_dom_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => {
                !matches!(s.as_str(), "def" | "fn" | "box" | "rec" | "wk" | "id" | "ctx" | "tm" | "ty" | "trm" | "Pi")
            }
            Tok::Sym("(") => true,
            _ => false,
        }
    }

    fn dom_head(&mut self) -> PResult<Head> {
        if self.mode == Mode::Dep {
            for (kw, k) in [("o", DCon::O), ("arr", DCon::Arr), ("lam", DCon::Lam), ("app", DCon::App)] {
                if self.is_kw(kw) {
                    self.bump();
                    return Ok(Head::Con(k));
                }
            }
        }
        Ok(Head::Term(self.dom_atom()?))
    }

    fn dom_atom(&mut self) -> PResult<DomTerm> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Sym("(") => {
                self.bump();
                let m = self.dom_term()?;
                self.expect_sym(")")?;
                Ok(m)
            }
            Tok::Ident(s) => match s.as_str() {
                "unbox" => {
                    self.bump();
                    self.expect_sym("(")?;
                    let dom = std::mem::take(&mut self.dom);
                    let t = self.comp_term();
                    self.dom = dom;
                    let t = t?;
                    self.expect_sym(";")?;
                    let s = self.subst()?;
                    self.expect_sym(")")?;
                    Ok(unbox(t, s))
                }
                "lam" | "app" if self.mode == Mode::Simple => {
                    self.bump();
                    Ok(DomTerm::Const(if s == "lam" { SConst::Lam } else { SConst::App }))
                }
                "o" | "arr" | "lam" | "app" => {
                    self.bump();
                    let k = match s.as_str() {
                        "o" => DCon::O,
                        "arr" => DCon::Arr,
                        "lam" => DCon::Lam,
                        _ => DCon::App,
                    };
                    if k.arity() == 0 {
                        Ok(DomTerm::Con(k, vec![]))
                    } else {
                        Err(ParseError::Syntax {
                            span,
                            expected: format!("`{}` applied to {} arguments", k.name(), k.arity()),
                            found: "a bare constructor".into(),
                        })
                    }
                }
                _ => {
                    let x = self.ident()?;
                    match self.dom.iter().rev().position(|n| *n == x) {
                        Some(i) => Ok(DomTerm::Var(i)),
                        None => Err(ParseError::Scope { span, msg: format!("unbound domain variable `{x}`") }),
                    }
                }
            },
            _ => self.err("a domain term"),
        }
    }

    fn subst(&mut self) -> PResult<DomSubst> {
        let mut s = if self.is_sym(".") {
            self.bump();
            DomSubst::Empty
        } else if self.is_kw("wk") {
            self.bump();
            DomSubst::Wk(self.num()?)
        } else if self.is_kw("id") {
            self.bump();
            DomSubst::Wk(0)
        } else {
            return self.err("`.`, `wk k` or `id`");
        };
        while self.is_sym(",") {
            self.bump();
            s = ssnoc(s, self.dom_term()?);
        }
        Ok(s)
    }

    // ----- computation types

    fn ann_type(&mut self) -> PResult<AnnType> {
        if self.is_kw("ctx") {
            self.bump();
            Ok(AnnType::Ctx)
        } else {
            Ok(AnnType::Ty(self.comp_type()?))
        }
    }

    fn comp_type(&mut self) -> PResult<CompType> {
        if self.is_sym("(") && matches!(self.peek_at(2), Tok::Sym(":")) {
            self.bump();
            let y = self.ident()?;
            self.expect_sym(":")?;
            let a = self.ann_type()?;
            self.expect_sym(")")?;
            self.expect_sym("=>")?;
            let kind = if a == AnnType::Ctx { CKind::Ctx } else { CKind::Term };
            self.comp.push((y, kind));
            let b = self.comp_type();
            self.comp.pop();
            return Ok(fnty(a, b?));
        }
        let a = self.comp_type_atom()?;
        if self.is_sym("=>") {
            self.bump();
            self.comp.push(("_".into(), CKind::Term));
            let b = self.comp_type();
            self.comp.pop();
            return Ok(fnty(AnnType::Ty(a), b?));
        }
        Ok(a)
    }

    fn comp_type_atom(&mut self) -> PResult<CompType> {
        if self.is_sym("(") {
            self.bump();
            let t = self.comp_type()?;
            self.expect_sym(")")?;
            return Ok(t);
        }
        self.expect_sym("[")?;
        let saved = std::mem::take(&mut self.dom);
        let r = (|| {
            let ctx = self.dom_ctx()?;
            let kind = if self.is_sym("|-#") {
                CtxKind::Var
            } else if self.is_sym("|-") {
                CtxKind::Term
            } else {
                return self.err("`|-` or `|-#`");
            };
            self.bump();
            let ty = self.dom_type()?;
            self.expect_sym("]")?;
            Ok(CompType::Box(CtxType { kind, ctx, ty }))
        })();
        self.dom = saved;
        r
    }

    // ----- computation terms

    fn comp_term(&mut self) -> PResult<CompTerm> {
        if self.is_kw("fn") {
            self.bump();
            let y = self.ident()?;
            self.expect_sym(".")?;
            self.comp.push((y, CKind::Unknown));
            let b = self.comp_term();
            self.comp.pop();
            return Ok(cfn(b?));
        }
        let mut t = self.comp_atom()?;
        while self.starts_arg() {
            let a = self.arg()?;
            t = CompTerm::App(Box::new(t), Box::new(a));
        }
        Ok(t)
    }

    fn starts_arg(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => !KEYWORDS.contains(&s.as_str()) || s == "box" || s == "rec",
            Tok::Sym("(") | Tok::Sym(".") => true,
            _ => false,
        }
    }

    fn looks_like_ctx(&self) -> bool {
        // after `(`
        matches!(
            (self.peek_at(1), self.peek_at(2)),
            (Tok::Sym("."), _) | (Tok::Ident(_), Tok::Sym(",")) | (Tok::Ident(_), Tok::Sym(":"))
        )
    }

    fn arg(&mut self) -> PResult<Arg> {
        if self.is_sym(".") {
            self.bump();
            return Ok(Arg::Ctx(DomCtx::Empty));
        }
        if self.is_sym("(") && self.looks_like_ctx() {
            self.bump();
            let c = self.with_dom(Vec::new(), |p| p.dom_ctx())?;
            self.expect_sym(")")?;
            return Ok(Arg::Ctx(c));
        }
        if let Tok::Ident(x) = self.peek().clone() {
            if self.comp_lookup(&x).is_none() {
                if let Some(Global::Ctx(c, _)) = self.global(&x) {
                    let c = c.clone();
                    self.bump();
                    return Ok(Arg::Ctx(c));
                }
            }
        }
        Ok(Arg::Term(self.comp_atom()?))
    }

    fn ctx_arg(&mut self) -> PResult<DomCtx> {
        match self.arg()? {
            Arg::Ctx(c) => Ok(c),
            Arg::Term(CompTerm::Var(i)) => Ok(DomCtx::Var(i)),
            Arg::Term(_) => self.err("a context"),
        }
    }

    fn comp_atom(&mut self) -> PResult<CompTerm> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Sym("(") => {
                self.bump();
                let t = self.comp_term()?;
                self.expect_sym(")")?;
                Ok(t)
            }
            Tok::Ident(s) if s == "box" => {
                self.bump();
                self.expect_sym("(")?;
                let names = self.hat()?;
                self.expect_sym("|-")?;
                let m = self.with_dom(names.clone(), |p| p.dom_term())?;
                self.expect_sym(")")?;
                Ok(CompTerm::Box(Names(names), Box::new(m)))
            }
            Tok::Ident(s) if s == "rec" => self.rec(),
            Tok::Ident(_) => {
                let x = self.ident()?;
                if let Some((i, _)) = self.comp_lookup(&x) {
                    return Ok(CompTerm::Var(i));
                }
                match self.global(&x) {
                    Some(Global::Term(t)) => Ok(t.clone()),
                    Some(Global::Ctx(..)) => {
                        Err(ParseError::Scope { span, msg: format!("context `{x}` used as a term") })
                    }
                    None => Err(ParseError::Scope { span, msg: format!("unbound name `{x}`") }),
                }
            }
            _ => self.err("a computation term"),
        }
    }

    /// Erased context: domain names, optionally led by `.` or a context variable.
    fn hat(&mut self) -> PResult<Vec<String>> {
        let mut names = Vec::new();
        if self.is_sym("|-") {
            return Ok(names);
        }
        if self.is_sym(".") {
            self.bump();
        } else {
            let x = self.ident()?;
            if self.comp_lookup(&x).is_none() {
                match self.global(&x) {
                    Some(Global::Ctx(_, ns)) => names.extend(ns.iter().cloned()),
                    _ => names.push(x),
                }
            }
        }
        while self.is_sym(",") {
            self.bump();
            names.push(self.ident()?);
        }
        Ok(names)
    }

    fn rec(&mut self) -> PResult<CompTerm> {
        let span = self.span();
        self.expect_kw("rec")?;
        self.expect_sym("<")?;
        let motive = self.comp_type()?;
        self.expect_sym(">")?;
        let kind = match rec_kind(&motive) {
            Some(k) => k,
            None => {
                return Err(ParseError::Syntax {
                    span,
                    expected: "a recursor motive over [ψ |- tm], [ψ |- ty] or [|- ty]".into(),
                    found: "another motive shape".into(),
                })
            }
        };
        self.expect_sym("(")?;
        let mut branches = Vec::new();
        loop {
            branches.push(self.branch()?);
            if self.is_sym(";") {
                self.bump();
            } else {
                break;
            }
        }
        self.expect_sym(")")?;
        let ctx = self.ctx_arg()?;
        let first = self.comp_atom()?;
        let (index, scrut) = if kind == RecKind::Trm { (Some(first), self.comp_atom()?) } else { (None, first) };
        Ok(CompTerm::Rec(Box::new(Rec { kind, motive, branches, ctx, index, scrut })))
    }

    fn branch(&mut self) -> PResult<Branch> {
        self.expect_sym("(")?;
        let mut names = vec![self.ident()?];
        while self.is_sym(",") {
            self.bump();
            names.push(self.ident()?);
        }
        self.expect_sym("->")?;
        let n = self.comp.len();
        for (i, x) in names.iter().enumerate() {
            let k = if i == 0 { CKind::Ctx } else { CKind::Term };
            self.comp.push((x.clone(), k));
        }
        let body = self.comp_term();
        self.comp.truncate(n);
        self.expect_sym(")")?;
        Ok(Branch { names: Names(names), body: body? })
    }
}

enum Head {
    Con(DCon),
    Term(DomTerm),
}

/// Recursor kind from the shape of the motive's second binder.
pub fn rec_kind(motive: &CompType) -> Option<RecKind> {
    let CompType::Fn(a, rest) = motive else { return None };
    if **a != AnnType::Ctx {
        return None;
    }
    let CompType::Fn(b, _) = &**rest else { return None };
    let AnnType::Ty(CompType::Box(ct)) = &**b else { return None };
    match (&ct.ctx, &ct.ty) {
        (_, DomType::Tm) => Some(RecKind::Tm),
        (DomCtx::Empty, DomType::Ty) => Some(RecKind::Trm),
        (_, DomType::Ty) => Some(RecKind::Ty),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// files

fn directive(line: &str) -> Option<(&str, &str)> {
    let t = line.trim_start();
    for key in ["--expect:", "--mode:"] {
        if let Some(rest) = t.strip_prefix(key) {
            return Some((key, rest.trim()));
        }
    }
    None
}

fn parse_mode(s: &str, span: Span) -> PResult<Mode> {
    match s {
        "simple" => Ok(Mode::Simple),
        "dep" => Ok(Mode::Dep),
        _ => Err(ParseError::Syntax { span, expected: "`simple` or `dep`".into(), found: s.into() }),
    }
}

/// Mode named by a `--mode:` directive, if any.
pub fn file_mode(text: &str) -> PResult<Option<Mode>> {
    for (i, line) in text.lines().enumerate() {
        if let Some(("--mode:", m)) = directive(line) {
            return parse_mode(m, Span { line: i + 1, col: 1 }).map(Some);
        }
    }
    Ok(None)
}

pub fn parse(text: &str) -> PResult<SourceFile> {
    let mode = file_mode(text)?.unwrap_or(Mode::Simple);
    parse_with_mode(text, mode)
}

pub fn parse_with_mode(text: &str, mode: Mode) -> PResult<SourceFile> {
    // expectation directives, keyed by line
    let mut pending: Vec<(usize, String)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if let Some(("--expect:", rest)) = directive(line) {
            pending.push((i + 1, rest.to_string()));
        }
    }
    let toks = lex(text, 0)?;
    let mut globals: Vec<(String, Global)> = Vec::new();
    let mut decls = Vec::new();
    let mut pos = 0;
    let mut last_line = 0;
    loop {
        let mut p = Parser { toks: toks.clone(), pos, mode, comp: vec![], dom: vec![], globals: &globals };
        if *p.peek() == Tok::Eof {
            break;
        }
        let span = p.span();
        p.expect_kw("def")?;
        let name_span = p.span();
        let name = p.ident()?;
        if globals.iter().any(|(n, _)| *n == name) {
            return Err(ParseError::Scope { span: name_span, msg: format!("duplicate declaration `{name}`") });
        }
        p.expect_sym(":")?;
        let ann = p.ann_type()?;
        p.expect_sym("=")?;
        let (body, global) = match ann {
            AnnType::Ctx => {
                let c = p.dom_ctx()?;
                let names = p.dom.clone();
                (DeclBody::Ctx(c.clone()), Global::Ctx(c, names))
            }
            AnnType::Ty(ty) => {
                let t = p.comp_term()?;
                (DeclBody::Term { ty, body: t.clone() }, Global::Term(t))
            }
        };
        p.expect_sym(";")?;
        pos = p.pos;
        let dirs: Vec<&(usize, String)> = pending.iter().filter(|(l, _)| *l > last_line && *l < span.line).collect();
        last_line = span.line;
        let expect = match dirs.last() {
            None => Expect::Ok,
            Some((line, d)) => parse_expect(d, Span { line: *line, col: 1 }, mode, &globals)?,
        };
        globals.push((name.clone(), global));
        decls.push(Decl { name, span, body, expect });
    }
    Ok(SourceFile { mode, decls })
}

fn parse_expect(d: &str, span: Span, mode: Mode, globals: &[(String, Global)]) -> PResult<Expect> {
    if d == "ok" {
        return Ok(Expect::Ok);
    }
    if let Some(rest) = d.strip_prefix("type-error") {
        let class = rest.trim_start_matches(':').trim();
        return Ok(Expect::TypeError(if class.is_empty() { None } else { Some(class.to_string()) }));
    }
    if let Some(rest) = d.strip_prefix("eval:") {
        let toks = lex(rest, span.line - 1)?;
        let mut p = Parser { toks, pos: 0, mode, comp: vec![], dom: vec![], globals };
        let t = p.comp_term()?;
        if *p.peek() != Tok::Eof {
            return p.err("end of directive");
        }
        return Ok(Expect::Eval(t));
    }
    Err(ParseError::Syntax { span, expected: "`ok`, `type-error` or `eval:`".into(), found: d.into() })
}

/// Parses a standalone computation term with no free variables.
pub fn parse_comp_term(text: &str, mode: Mode) -> PResult<CompTerm> {
    let toks = lex(text, 0)?;
    let mut p = Parser { toks, pos: 0, mode, comp: vec![], dom: vec![], globals: &[] };
    let t = p.comp_term()?;
    if *p.peek() != Tok::Eof {
        return p.err("end of input");
    }
    Ok(t)
}

pub fn parse_comp_type(text: &str, mode: Mode) -> PResult<CompType> {
    let toks = lex(text, 0)?;
    let mut p = Parser { toks, pos: 0, mode, comp: vec![], dom: vec![], globals: &[] };
    let t = p.comp_type()?;
    if *p.peek() != Tok::Eof {
        return p.err("end of input");
    }
    Ok(t)
}

/// Parses a domain term in a domain scope given by `names` (innermost last).
pub fn parse_dom_term(text: &str, mode: Mode, names: &[&str]) -> PResult<DomTerm> {
    let toks = lex(text, 0)?;
    let dom = names.iter().map(|s| s.to_string()).collect();
    let mut p = Parser { toks, pos: 0, mode, comp: vec![], dom, globals: &[] };
    let t = p.dom_term()?;
    if *p.peek() != Tok::Eof {
        return p.err("end of input");
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// printer

/// Printer with canonical names: `y<k>` for computation variables and
/// `x<k>` for domain variables, `k` being the binding depth.
pub struct Printer {
    mode: Mode,
    comp: usize,
    dom: usize,
}

impl Printer {
    pub fn new(mode: Mode) -> Printer {
        Printer { mode, comp: 0, dom: 0 }
    }
    /// A printer for terms living under `comp` computation binders.
    pub fn in_context(mode: Mode, comp: usize) -> Printer {
        Printer { mode, comp, dom: 0 }
    }

    fn cname(&self, i: usize) -> String {
        match self.comp.checked_sub(i + 1) {
            Some(k) => format!("y{k}"),
            None => format!("y_free{}", i - self.comp),
        }
    }
    fn dname(&self, i: usize) -> String {
        match self.dom.checked_sub(i + 1) {
            Some(k) => format!("x{k}"),
            None => format!("x_free{}", i - self.dom),
        }
    }

    pub fn comp_term(&mut self, t: &CompTerm) -> String {
        let mut s = String::new();
        self.ct(&mut s, t, 0);
        s
    }
    pub fn comp_type(&mut self, t: &CompType) -> String {
        let mut s = String::new();
        self.cty(&mut s, t);
        s
    }
    pub fn ann_type(&mut self, t: &AnnType) -> String {
        match t {
            AnnType::Ctx => "ctx".into(),
            AnnType::Ty(t) => self.comp_type(t),
        }
    }
    pub fn dom_ctx(&mut self, c: &DomCtx) -> String {
        let mut s = String::new();
        let d = self.dom;
        self.ctx(&mut s, c);
        self.dom = d;
        s
    }
    pub fn dom_term(&mut self, t: &DomTerm) -> String {
        let mut s = String::new();
        self.dt(&mut s, t, 0);
        s
    }
    pub fn dom_type(&mut self, t: &DomType) -> String {
        let mut s = String::new();
        self.dty(&mut s, t, 0);
        s
    }

    // prec: 0 = top, 1 = application head, 2 = argument
    fn ct(&mut self, s: &mut String, t: &CompTerm, prec: u8) {
        match t {
            CompTerm::Var(i) => s.push_str(&self.cname(*i)),
            CompTerm::Box(names, m) => {
                let n = names.0.len().max(free_dom_bound(m));
                let saved = self.dom;
                self.dom = 0;
                s.push_str("box(");
                for i in 0..n {
                    if i > 0 {
                        s.push_str(", ");
                    }
                    let _ = write!(s, "x{i}");
                }
                self.dom = n;
                s.push_str(if n == 0 { "|- " } else { " |- " });
                self.dt(s, m, 0);
                s.push(')');
                self.dom = saved;
            }
            CompTerm::Fn(b) => {
                if prec > 0 {
                    s.push('(');
                }
                let _ = write!(s, "fn y{}. ", self.comp);
                self.comp += 1;
                self.ct(s, b, 0);
                self.comp -= 1;
                if prec > 0 {
                    s.push(')');
                }
            }
            CompTerm::App(f, a) => {
                if prec > 1 {
                    s.push('(');
                }
                self.ct(s, f, 1);
                s.push(' ');
                self.arg(s, a);
                if prec > 1 {
                    s.push(')');
                }
            }
            CompTerm::Rec(r) => {
                if prec > 0 {
                    s.push('(');
                }
                s.push_str("rec<");
                self.cty(s, &r.motive);
                s.push_str(">(");
                for (i, b) in r.branches.iter().enumerate() {
                    if i > 0 {
                        s.push_str("; ");
                    }
                    s.push('(');
                    let k = r.kind.branch_arities().get(i).copied().unwrap_or(b.names.0.len()).max(1);
                    for j in 0..k {
                        if j > 0 {
                            s.push_str(", ");
                        }
                        let _ = write!(s, "y{}", self.comp + j);
                    }
                    s.push_str(" -> ");
                    self.comp += k;
                    self.ct(s, &b.body, 0);
                    self.comp -= k;
                    s.push(')');
                }
                s.push_str(") ");
                self.arg(s, &Arg::Ctx(r.ctx.clone()));
                if let Some(i) = &r.index {
                    s.push(' ');
                    self.ct(s, i, 2);
                }
                s.push(' ');
                self.ct(s, &r.scrut, 2);
                if prec > 0 {
                    s.push(')');
                }
            }
        }
    }

    fn arg(&mut self, s: &mut String, a: &Arg) {
        match a {
            Arg::Term(t) => self.ct(s, t, 2),
            Arg::Ctx(DomCtx::Empty) => s.push('.'),
            Arg::Ctx(DomCtx::Var(i)) => s.push_str(&self.cname(*i)),
            Arg::Ctx(c) => {
                s.push('(');
                let d = self.dom;
                self.ctx(s, c);
                self.dom = d;
                s.push(')');
            }
        }
    }

    /// Prints a context and leaves its declarations bound.
    fn ctx(&mut self, s: &mut String, c: &DomCtx) {
        self.dom = 0;
        self.ctx_rec(s, c);
    }

    fn ctx_rec(&mut self, s: &mut String, c: &DomCtx) {
        match c {
            DomCtx::Empty => s.push('.'),
            DomCtx::Var(i) => s.push_str(&self.cname(*i)),
            DomCtx::Snoc(c, a) => {
                if **c != DomCtx::Empty {
                    self.ctx_rec(s, c);
                    s.push_str(", ");
                }
                let _ = write!(s, "x{}:", self.dom);
                self.dty(s, a, 0);
                self.dom += 1;
            }
        }
    }

    fn cty(&mut self, s: &mut String, t: &CompType) {
        match t {
            CompType::Box(ct) => {
                s.push('[');
                let d = self.dom;
                self.ctx(s, &ct.ctx);
                s.push_str(match ct.kind {
                    CtxKind::Term => " |- ",
                    CtxKind::Var => " |-# ",
                });
                self.dty(s, &ct.ty, 0);
                self.dom = d;
                s.push(']');
            }
            CompType::Fn(a, b) => {
                let _ = write!(s, "(y{}:", self.comp);
                match &**a {
                    AnnType::Ctx => s.push_str("ctx"),
                    AnnType::Ty(t) => self.cty(s, t),
                }
                s.push_str(") => ");
                self.comp += 1;
                self.cty(s, b);
                self.comp -= 1;
            }
        }
    }

    // prec: 0 = top, 1 = left of an arrow / Pi domain, 2 = argument of trm
    fn dty(&mut self, s: &mut String, t: &DomType, prec: u8) {
        match t {
            DomType::Tm => s.push_str("tm"),
            DomType::Ty => s.push_str("ty"),
            DomType::Trm(m) => {
                if prec > 1 {
                    s.push('(');
                }
                s.push_str("trm ");
                self.dt(s, m, 2);
                if prec > 1 {
                    s.push(')');
                }
            }
            DomType::Arrow(a, b) => {
                if prec > 0 {
                    s.push('(');
                }
                self.dty(s, a, 1);
                s.push_str(" -> ");
                self.dty(s, b, 0);
                if prec > 0 {
                    s.push(')');
                }
            }
            DomType::Pi(a, b) => {
                if prec > 0 {
                    s.push('(');
                }
                let _ = write!(s, "Pi x{}:", self.dom);
                self.dty(s, a, 1);
                s.push_str(". ");
                self.dom += 1;
                self.dty(s, b, 0);
                self.dom -= 1;
                if prec > 0 {
                    s.push(')');
                }
            }
        }
    }

    // prec: 0 = top, 1 = application head, 2 = argument
    fn dt(&mut self, s: &mut String, t: &DomTerm, prec: u8) {
        match t {
            DomTerm::Var(i) => s.push_str(&self.dname(*i)),
            DomTerm::Const(SConst::Lam) => s.push_str("lam"),
            DomTerm::Const(SConst::App) => s.push_str("app"),
            DomTerm::Con(k, xs) if xs.is_empty() => s.push_str(k.name()),
            DomTerm::Con(k, xs) => {
                if prec > 0 {
                    s.push('(');
                }
                s.push_str(k.name());
                for x in xs {
                    s.push(' ');
                    self.dt(s, x, 2);
                }
                if prec > 0 {
                    s.push(')');
                }
            }
            DomTerm::Lam(b) => {
                if prec > 0 {
                    s.push('(');
                }
                let _ = write!(s, "\\x{}. ", self.dom);
                self.dom += 1;
                self.dt(s, b, 0);
                self.dom -= 1;
                if prec > 0 {
                    s.push(')');
                }
            }
            DomTerm::App(f, x) => {
                if prec > 1 {
                    s.push('(');
                }
                self.dt(s, f, 1);
                s.push(' ');
                self.dt(s, x, 2);
                if prec > 1 {
                    s.push(')');
                }
            }
            DomTerm::Unbox(t, sub) => {
                s.push_str("unbox(");
                let d = self.dom;
                self.ct(s, t, 0);
                self.dom = d;
                s.push_str("; ");
                self.subst(s, sub);
                s.push(')');
            }
        }
    }

    fn subst(&mut self, s: &mut String, sub: &DomSubst) {
        match sub {
            DomSubst::Empty => s.push('.'),
            DomSubst::Wk(k) => {
                let _ = write!(s, "wk {k}");
            }
            DomSubst::Snoc(r, m) => {
                self.subst(s, r);
                s.push_str(", ");
                self.dt(s, m, 0);
            }
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }
}

/// One more than the largest free domain index in `m` (0 if closed).
fn free_dom_bound(m: &DomTerm) -> usize {
    fn go(m: &DomTerm, d: usize) -> usize {
        match m {
            DomTerm::Var(i) if *i >= d => i - d + 1,
            DomTerm::Var(_) | DomTerm::Const(_) => 0,
            DomTerm::Lam(b) => go(b, d + 1),
            DomTerm::App(f, x) => go(f, d).max(go(x, d)),
            DomTerm::Con(_, xs) => xs.iter().map(|x| go(x, d)).max().unwrap_or(0),
            DomTerm::Unbox(_, s) => sub(s, d),
        }
    }
    fn sub(s: &DomSubst, d: usize) -> usize {
        match s {
            DomSubst::Empty => 0,
            DomSubst::Wk(k) => k.saturating_sub(d),
            DomSubst::Snoc(s, m) => sub(s, d).max(go(m, d)),
        }
    }
    go(m, 0)
}

pub fn print_comp_term(t: &CompTerm, mode: Mode) -> String {
    Printer::new(mode).comp_term(t)
}
pub fn print_comp_type(t: &CompType, mode: Mode) -> String {
    Printer::new(mode).comp_type(t)
}

pub fn print_file(f: &SourceFile) -> String {
    let mut out = format!("--mode: {}\n", f.mode.as_str());
    for d in &f.decls {
        let mut p = Printer::new(f.mode);
        match &d.expect {
            Expect::Ok => {}
            Expect::TypeError(None) => out.push_str("--expect: type-error\n"),
            Expect::TypeError(Some(c)) => {
                let _ = writeln!(out, "--expect: type-error: {c}");
            }
            Expect::Eval(t) => {
                let _ = writeln!(out, "--expect: eval: {}", p.comp_term(t));
            }
        }
        match &d.body {
            DeclBody::Ctx(c) => {
                let _ = writeln!(out, "def {} : ctx = {};", d.name, p.dom_ctx(c));
            }
            DeclBody::Term { ty, body } => {
                let _ = writeln!(out, "def {} : {} =\n  {};", d.name, p.comp_type(ty), p.comp_term(body));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        let t = parse_comp_term("box(x, y |- app x y)", Mode::Simple).unwrap();
        assert_eq!(t, cbox(simple_app(dvar(1), dvar(0))));
        assert_eq!(parse_comp_term("fn y. y", Mode::Simple).unwrap(), cfn(cvar(0)));
        assert_eq!(print_comp_term(&cfn(cvar(0)), Mode::Simple), "fn y0. y0");
        let t = parse_comp_term("fn t. box(x |- unbox(t; wk 1))", Mode::Simple).unwrap();
        assert_eq!(t, cfn(cbox(unbox(cvar(0), DomSubst::Wk(1)))));
    }

    #[test]
    fn nested_pi_roundtrip() {
        let ty = parse_comp_type("[x:Pi a:ty. (Pi b:trm a. ty) -> ty |- ty]", Mode::Dep).unwrap();
        let s = print_comp_type(&ty, Mode::Dep);
        assert!(s.contains("(Pi"));
        assert_eq!(parse_comp_type(&s, Mode::Dep).unwrap(), ty);
    }

    #[test]
    fn unbound_is_scope_error() {
        let e = parse_comp_term("fn y. z", Mode::Simple).unwrap_err();
        assert_eq!(e.class(), "ScopeError");
        let e = parse_comp_term("fn y. (", Mode::Simple).unwrap_err();
        assert_eq!(e.class(), "SyntaxError");
    }

    #[test]
    fn directives_attach_to_next_decl() {
        let src = "--mode: simple\n--expect: type-error: NotAVariable\ndef a : [x:tm |-# tm] = box(x |- lam \\y. y);\ndef b : [|- tm] = box(|- lam \\y. y);\n";
        let f = parse(src).unwrap();
        assert_eq!(f.decls[0].expect, Expect::TypeError(Some("NotAVariable".into())));
        assert_eq!(f.decls[1].expect, Expect::Ok);
    }
}
