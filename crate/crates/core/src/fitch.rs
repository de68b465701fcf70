//! Fitch-style modal calculus with locks, `Type : Type`, Σ for contexts and
//! an LF-style signature for the object language; plus the translation of
//! recursor-free Cocon into it.
//!
//! `Unbox(k, m)` records the `k` variables bound after the last lock; `m`
//! lives in the context before that lock.

use crate::check::{CheckError, Checker};
use crate::syntax::*;
use std::cell::Cell;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FC {
    // dep signature
    Ty,
    Trm,
    O,
    Arr,
    Lam,
    App,
    // simple signature
    Tm,
    SLam,
    SApp,
}

impl FC {
    pub fn name(self) -> &'static str {
        match self {
            FC::Ty => "ty",
            FC::Trm => "trm",
            FC::O => "o",
            FC::Arr => "arr",
            FC::Lam => "lam",
            FC::App => "app",
            FC::Tm => "tm",
            FC::SLam => "lam",
            FC::SApp => "app",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FTerm {
    Var(usize),
    Type,
    /// Contexts as a sub-universe of `Type`: `Top` and `Sigma` over a
    /// context are contexts.
    Ctx,
    Pi(Box<FTerm>, Box<FTerm>),
    Lam(Box<FTerm>, Box<FTerm>),
    App(Box<FTerm>, Box<FTerm>),
    Sigma(Box<FTerm>, Box<FTerm>),
    Pair(Box<FTerm>, Box<FTerm>),
    Fst(Box<FTerm>),
    Snd(Box<FTerm>),
    Top,
    Unit,
    BoxT(Box<FTerm>),
    BoxI(Box<FTerm>),
    Unbox(usize, Box<FTerm>),
    Const(FC),
}

use FTerm as F;

fn bx(t: FTerm) -> Box<FTerm> {
    Box::new(t)
}
pub fn fapp(f: FTerm, a: FTerm) -> FTerm {
    F::App(bx(f), bx(a))
}
fn fapps(f: FTerm, args: Vec<FTerm>) -> FTerm {
    args.into_iter().fold(f, fapp)
}
fn fpi(a: FTerm, b: FTerm) -> FTerm {
    F::Pi(bx(a), bx(b))
}
fn ffst(t: FTerm) -> FTerm {
    F::Fst(bx(t))
}
fn fsnd(t: FTerm) -> FTerm {
    F::Snd(bx(t))
}
fn fpair(a: FTerm, b: FTerm) -> FTerm {
    F::Pair(bx(a), bx(b))
}

// ---------------------------------------------------------------------------
// traversal

pub fn shift(t: &FTerm, cutoff: usize, d: isize) -> FTerm {
    try_shift(t, cutoff, d).expect("shift below zero")
}

/// Shift free variables at or above `cutoff` by `d`; `None` if one would
/// fall below the cutoff.
pub fn try_shift(t: &FTerm, cutoff: usize, d: isize) -> Option<FTerm> {
    if d == 0 {
        return Some(t.clone());
    }
    go_shift(t, cutoff, d, 0).ok()
}

/// `locks` counts the locks crossed inside `t`; an unbox meeting one of
/// those strips to a point before the cut, otherwise the cut may fall in
/// its segment.
fn go_shift(t: &FTerm, c: usize, d: isize, locks: usize) -> Result<FTerm, ()> {
    let r = |t: &FTerm, c: usize| go_shift(t, c, d, locks);
    Ok(match t {
        F::Var(i) if *i < c => F::Var(*i),
        F::Var(i) => {
            let j = *i as isize + d;
            if j < c as isize {
                return Err(());
            }
            F::Var(j as usize)
        }
        F::Type | F::Ctx | F::Top | F::Unit | F::Const(_) => t.clone(),
        F::Pi(a, b) => F::Pi(bx(r(a, c)?), bx(r(b, c + 1)?)),
        F::Lam(a, b) => F::Lam(bx(r(a, c)?), bx(r(b, c + 1)?)),
        F::Sigma(a, b) => F::Sigma(bx(r(a, c)?), bx(r(b, c + 1)?)),
        F::App(a, b) => F::App(bx(r(a, c)?), bx(r(b, c)?)),
        F::Pair(a, b) => F::Pair(bx(r(a, c)?), bx(r(b, c)?)),
        F::Fst(a) => F::Fst(bx(r(a, c)?)),
        F::Snd(a) => F::Snd(bx(r(a, c)?)),
        F::BoxT(a) => F::BoxT(bx(go_shift(a, c, d, locks + 1)?)),
        F::BoxI(a) => F::BoxI(bx(go_shift(a, c, d, locks + 1)?)),
        F::Unbox(k, a) if locks > 0 => F::Unbox(*k, bx(go_shift(a, c.checked_sub(*k).ok_or(())?, d, locks - 1)?)),
        F::Unbox(k, a) if c > *k => F::Unbox(*k, bx(r(a, c - k)?)),
        // the cut falls after the lock: only the segment length moves
        F::Unbox(k, a) => {
            let k2 = *k as isize + d;
            if k2 < c as isize {
                return Err(());
            }
            F::Unbox(k2 as usize, a.clone())
        }
    })
}

/// Substitute for variable 0; `arg` lives in the context without it.
pub fn subst0(t: &FTerm, arg: &FTerm) -> FTerm {
    subst_at(t, 0, arg, 0)
}

fn subst_at(t: &FTerm, depth: usize, arg: &FTerm, locks: usize) -> FTerm {
    let r = |t: &FTerm, dp: usize| subst_at(t, dp, arg, locks);
    match t {
        F::Var(i) if *i == depth => shift(arg, 0, depth as isize),
        F::Var(i) if *i > depth => F::Var(i - 1),
        F::Var(_) | F::Type | F::Ctx | F::Top | F::Unit | F::Const(_) => t.clone(),
        F::Pi(a, b) => F::Pi(bx(r(a, depth)), bx(r(b, depth + 1))),
        F::Lam(a, b) => F::Lam(bx(r(a, depth)), bx(r(b, depth + 1))),
        F::Sigma(a, b) => F::Sigma(bx(r(a, depth)), bx(r(b, depth + 1))),
        F::App(a, b) => F::App(bx(r(a, depth)), bx(r(b, depth))),
        F::Pair(a, b) => F::Pair(bx(r(a, depth)), bx(r(b, depth))),
        F::Fst(a) => F::Fst(bx(r(a, depth))),
        F::Snd(a) => F::Snd(bx(r(a, depth))),
        F::BoxT(a) => F::BoxT(bx(subst_at(a, depth, arg, locks + 1))),
        F::BoxI(a) => F::BoxI(bx(subst_at(a, depth, arg, locks + 1))),
        F::Unbox(k, a) if locks > 0 => F::Unbox(*k, bx(subst_at(a, depth - k, arg, locks - 1))),
        F::Unbox(k, a) => {
            if depth > *k {
                F::Unbox(*k, bx(r(a, depth - k)))
            } else {
                // the substituted variable sat after the lock
                F::Unbox(k - 1, a.clone())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// printer

pub fn print_term(t: &FTerm) -> String {
    let mut s = String::new();
    pr(&mut s, t, 0, 0);
    s
}

fn pr(s: &mut String, t: &FTerm, n: usize, prec: u8) {
    let open = |s: &mut String, on: bool| {
        if on {
            s.push('(')
        }
    };
    let close = |s: &mut String, on: bool| {
        if on {
            s.push(')')
        }
    };
    match t {
        F::Var(i) => {
            if *i < n {
                let _ = write!(s, "v{}", n - 1 - i);
            } else {
                let _ = write!(s, "v?{i}");
            }
        }
        F::Type => s.push_str("Type"),
        F::Ctx => s.push_str("Ctx"),
        F::Top => s.push_str("Unit"),
        F::Unit => s.push_str("()"),
        F::Const(c) => s.push_str(c.name()),
        F::Pi(a, b) | F::Sigma(a, b) => {
            open(s, prec > 0);
            let _ = write!(s, "({}v{n} : ", if matches!(t, F::Pi(..)) { "" } else { "&" });
            pr(s, a, n, 0);
            s.push_str(if matches!(t, F::Pi(..)) { ") -> " } else { ") * " });
            pr(s, b, n + 1, 0);
            close(s, prec > 0);
        }
        F::Lam(a, b) => {
            open(s, prec > 0);
            let _ = write!(s, "\\v{n}:");
            pr(s, a, n, 2);
            s.push_str(". ");
            pr(s, b, n + 1, 0);
            close(s, prec > 0);
        }
        F::App(f, a) => {
            open(s, prec > 1);
            pr(s, f, n, 1);
            s.push(' ');
            pr(s, a, n, 2);
            close(s, prec > 1);
        }
        F::Pair(a, b) => {
            s.push('(');
            pr(s, a, n, 0);
            s.push_str(", ");
            pr(s, b, n, 0);
            s.push(')');
        }
        F::Fst(a) | F::Snd(a) | F::BoxT(a) | F::BoxI(a) => {
            s.push_str(match t {
                F::Fst(_) => "fst(",
                F::Snd(_) => "snd(",
                F::BoxT(_) => "Box(",
                _ => "box(",
            });
            pr(s, a, n, 0);
            s.push(')');
        }
        F::Unbox(k, a) => {
            s.push_str("unbox(");
            pr(s, a, n.saturating_sub(*k), 0);
            s.push(')');
        }
    }
}

// ---------------------------------------------------------------------------
// contexts and errors

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FEntry {
    Ty(FTerm),
    Lock,
}

#[derive(Clone, Debug, Default)]
pub struct FCtx {
    entries: Vec<FEntry>,
}

impl FCtx {
    pub fn new() -> FCtx {
        FCtx::default()
    }
    pub fn push(&self, t: FTerm) -> FCtx {
        let mut c = self.clone();
        c.entries.push(FEntry::Ty(t));
        c
    }
    pub fn lock(&self) -> FCtx {
        let mut c = self.clone();
        c.entries.push(FEntry::Lock);
        c
    }
    pub fn vars(&self) -> usize {
        self.entries.iter().filter(|e| matches!(e, FEntry::Ty(_))).count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FError {
    #[error("variable {0} sits behind a lock")]
    VariableBehindLock(usize),
    #[error("unbox would strip past a lock")]
    LockInResidue,
    #[error("unbox with no lock in scope")]
    NoLock,
    #[error("unbound variable {0}")]
    Unbound(usize),
    #[error("type mismatch: expected {expected}, got {got}")]
    TypeMismatch { expected: String, got: String },
    #[error("expected {0}")]
    Expected(&'static str),
    #[error("recursors have no image in this target")]
    RecursorPresent,
    #[error("source: {0}")]
    Source(String),
    #[error("step bound exhausted")]
    FuelExhausted,
}

impl FError {
    pub fn class(&self) -> &'static str {
        match self {
            FError::VariableBehindLock(_) => "VariableBehindLock",
            FError::LockInResidue => "LockInResidue",
            FError::NoLock => "NoLock",
            FError::Unbound(_) => "Unbound",
            FError::TypeMismatch { .. } => "TypeMismatch",
            FError::Expected(_) => "Expected",
            FError::RecursorPresent => "RecursorPresent",
            FError::Source(_) => "SourceError",
            FError::FuelExhausted => "FuelExhausted",
        }
    }
}

impl From<CheckError> for FError {
    fn from(e: CheckError) -> FError {
        match e {
            CheckError::FuelExhausted => FError::FuelExhausted,
            e => FError::Source(e.to_string()),
        }
    }
}

impl From<SyntaxError> for FError {
    fn from(e: SyntaxError) -> FError {
        FError::Source(e.to_string())
    }
}

pub type FResult<T> = Result<T, FError>;

/// Scope check by locks alone: every variable reachable without crossing a
/// lock, every unbox matching the segment after the last lock.
pub fn lock_scan(t: &FTerm, ctx: &[bool]) -> FResult<()> {
    // ctx: true = variable, false = lock; outermost first
    fn go(t: &FTerm, ctx: &mut Vec<bool>) -> FResult<()> {
        match t {
            F::Var(i) => {
                let mut seen = 0;
                for e in ctx.iter().rev() {
                    if !*e {
                        return Err(FError::VariableBehindLock(*i));
                    }
                    if seen == *i {
                        return Ok(());
                    }
                    seen += 1;
                }
                Err(FError::Unbound(*i))
            }
            F::Type | F::Ctx | F::Top | F::Unit | F::Const(_) => Ok(()),
            F::Pi(a, b) | F::Lam(a, b) | F::Sigma(a, b) => {
                go(a, ctx)?;
                ctx.push(true);
                let r = go(b, ctx);
                ctx.pop();
                r
            }
            F::App(a, b) | F::Pair(a, b) => {
                go(a, ctx)?;
                go(b, ctx)
            }
            F::Fst(a) | F::Snd(a) => go(a, ctx),
            F::BoxT(a) | F::BoxI(a) => {
                ctx.push(false);
                let r = go(a, ctx);
                ctx.pop();
                r
            }
            F::Unbox(k, a) => {
                let lock = ctx.iter().rposition(|e| !*e).ok_or(FError::NoLock)?;
                let after = ctx.len() - lock - 1;
                if *k > after {
                    return Err(FError::LockInResidue);
                }
                if *k < after {
                    return Err(FError::VariableBehindLock(*k));
                }
                let mut pre = ctx[..lock].to_vec();
                go(a, &mut pre)
            }
        }
    }
    go(t, &mut ctx.to_vec())
}

// ---------------------------------------------------------------------------
// checker

pub struct FChecker {
    limit: u64,
    fuel: Cell<u64>,
}

impl Default for FChecker {
    fn default() -> Self {
        Self::new()
    }
}

fn sig_type(c: FC) -> FTerm {
    let ty = || F::Const(FC::Ty);
    let trm = |a: FTerm| fapp(F::Const(FC::Trm), a);
    let tm = || F::Const(FC::Tm);
    let arrow = |a: FTerm, b: FTerm| fpi(a, shift(&b, 0, 1));
    match c {
        FC::Ty | FC::Tm => F::Type,
        FC::Trm => fpi(ty(), F::Type),
        FC::O => ty(),
        FC::Arr => arrow(ty(), arrow(ty(), ty())),
        // (a b : ty) -> (trm a -> trm b) -> trm (arr a b)
        FC::Lam => fpi(
            ty(),
            fpi(
                ty(),
                arrow(fpi(trm(F::Var(1)), trm(F::Var(1))), trm(fapps(F::Const(FC::Arr), vec![F::Var(1), F::Var(0)]))),
            ),
        ),
        // (a b : ty) -> trm (arr a b) -> trm a -> trm b
        FC::App => fpi(
            ty(),
            fpi(
                ty(),
                arrow(trm(fapps(F::Const(FC::Arr), vec![F::Var(1), F::Var(0)])), arrow(trm(F::Var(1)), trm(F::Var(0)))),
            ),
        ),
        FC::SLam => arrow(arrow(tm(), tm()), tm()),
        FC::SApp => arrow(tm(), arrow(tm(), tm())),
    }
}

impl FChecker {
    pub fn new() -> FChecker {
        FChecker::with_fuel(crate::check::DEFAULT_FUEL)
    }

    pub fn with_fuel(limit: u64) -> FChecker {
        FChecker { limit, fuel: Cell::new(limit) }
    }

    pub fn reset_fuel(&self) {
        self.fuel.set(self.limit);
    }

    fn tick(&self) -> FResult<()> {
        let f = self.fuel.get();
        if f == 0 {
            return Err(FError::FuelExhausted);
        }
        self.fuel.set(f - 1);
        Ok(())
    }

    /// Check a closed declaration: its type is a type, its body inhabits it.
    pub fn check_decl(&self, body: &FTerm, ty: &FTerm) -> FResult<()> {
        let cx = FCtx::new();
        self.check(&cx, ty, &F::Type)?;
        self.check(&cx, body, ty)
    }

    fn lookup(&self, cx: &FCtx, i: usize) -> FResult<FTerm> {
        let mut seen = 0;
        for e in cx.entries.iter().rev() {
            match e {
                FEntry::Lock => return Err(FError::VariableBehindLock(i)),
                FEntry::Ty(t) => {
                    if seen == i {
                        return Ok(shift(t, 0, i as isize + 1));
                    }
                    seen += 1;
                }
            }
        }
        Err(FError::Unbound(i))
    }

    pub fn check(&self, cx: &FCtx, m: &FTerm, t: &FTerm) -> FResult<()> {
        self.tick()?;
        let tw = self.whnf(t)?;
        match (m, &tw) {
            (F::Lam(a, b), F::Pi(a2, b2)) => {
                self.check(cx, a, &F::Type)?;
                self.conv_or(a2, a)?;
                self.check(&cx.push((**a2).clone()), b, b2)
            }
            (F::Pair(a, b), F::Sigma(a2, b2)) => {
                self.check(cx, a, a2)?;
                self.check(cx, b, &subst0(b2, a))
            }
            (F::BoxI(a), F::BoxT(a2)) => self.check(&cx.lock(), a, a2),
            _ => {
                let got = self.infer(cx, m)?;
                if tw == F::Type && self.whnf(&got)? == F::Ctx {
                    return Ok(());
                }
                self.conv_or(&tw, &got)
            }
        }
    }

    fn conv_or(&self, want: &FTerm, got: &FTerm) -> FResult<()> {
        if self.conv(want, got)? {
            Ok(())
        } else {
            Err(FError::TypeMismatch { expected: print_term(want), got: print_term(got) })
        }
    }

    pub fn infer(&self, cx: &FCtx, m: &FTerm) -> FResult<FTerm> {
        self.tick()?;
        match m {
            F::Var(i) => self.lookup(cx, *i),
            F::Type | F::Ctx => Ok(F::Type),
            F::Top => Ok(F::Ctx),
            F::Unit => Ok(F::Top),
            F::Const(c) => Ok(sig_type(*c)),
            F::Pi(a, b) | F::Sigma(a, b) => {
                let ctx_head = matches!(m, F::Sigma(..)) && self.whnf(&self.infer(cx, a)?)? == F::Ctx;
                self.check(cx, a, &F::Type)?;
                self.check(&cx.push((**a).clone()), b, &F::Type)?;
                Ok(if ctx_head { F::Ctx } else { F::Type })
            }
            F::BoxT(a) => {
                self.check(&cx.lock(), a, &F::Type)?;
                Ok(F::Type)
            }
            F::Lam(a, b) => {
                self.check(cx, a, &F::Type)?;
                let bt = self.infer(&cx.push((**a).clone()), b)?;
                Ok(fpi((**a).clone(), bt))
            }
            F::App(f, a) => match self.whnf(&self.infer(cx, f)?)? {
                F::Pi(a1, b1) => {
                    self.check(cx, a, &a1)?;
                    Ok(subst0(&b1, a))
                }
                _ => Err(FError::Expected("a function")),
            },
            F::Pair(a, b) => {
                let at = self.infer(cx, a)?;
                let bt = self.infer(cx, b)?;
                Ok(F::Sigma(bx(at), bx(shift(&bt, 0, 1))))
            }
            F::Fst(p) | F::Snd(p) => match self.whnf(&self.infer(cx, p)?)? {
                F::Sigma(a, b) => Ok(if matches!(m, F::Fst(_)) { *a } else { subst0(&b, &ffst((**p).clone())) }),
                _ => Err(FError::Expected("a pair")),
            },
            F::BoxI(a) => Ok(F::BoxT(bx(self.infer(&cx.lock(), a)?))),
            F::Unbox(k, a) => {
                let lock = cx.entries.iter().rposition(|e| *e == FEntry::Lock).ok_or(FError::NoLock)?;
                let after = cx.entries.len() - lock - 1;
                if *k > after {
                    return Err(FError::LockInResidue);
                }
                if *k < after {
                    return Err(FError::VariableBehindLock(*k));
                }
                let pre = FCtx { entries: cx.entries[..lock].to_vec() };
                match self.whnf(&self.infer(&pre, a)?)? {
                    F::BoxT(t) => Ok(shift(&t, 0, *k as isize)),
                    _ => Err(FError::Expected("a box")),
                }
            }
        }
    }

    pub fn whnf(&self, t: &FTerm) -> FResult<FTerm> {
        self.tick()?;
        Ok(match t {
            F::App(f, a) => match self.whnf(f)? {
                F::Lam(_, b) => self.whnf(&subst0(&b, a))?,
                f => fapp(f, (**a).clone()),
            },
            F::Fst(p) | F::Snd(p) => match self.whnf(p)? {
                F::Pair(a, b) => self.whnf(if matches!(t, F::Fst(_)) { &a } else { &b })?,
                p => {
                    if matches!(t, F::Fst(_)) {
                        ffst(p)
                    } else {
                        fsnd(p)
                    }
                }
            },
            F::Unbox(k, a) => match self.whnf(a)? {
                F::BoxI(m) => self.whnf(&shift(&m, 0, *k as isize))?,
                a => F::Unbox(*k, bx(a)),
            },
            F::BoxI(a) => match &**a {
                F::Unbox(0, m) => self.whnf(m)?,
                _ => t.clone(),
            },
            _ => t.clone(),
        })
    }

    /// Conversion up to β, projections, box rules and η for functions and pairs.
    pub fn conv(&self, a: &FTerm, b: &FTerm) -> FResult<bool> {
        if a == b {
            return Ok(true);
        }
        let (a, b) = (self.whnf(a)?, self.whnf(b)?);
        Ok(match (&a, &b) {
            (F::Lam(_, x), F::Lam(_, y)) => self.conv(x, y)?,
            (F::Lam(_, x), o) | (o, F::Lam(_, x)) => self.conv(x, &fapp(shift(o, 0, 1), F::Var(0)))?,
            (F::Pair(x1, y1), F::Pair(x2, y2)) => self.conv(x1, x2)? && self.conv(y1, y2)?,
            (F::Pair(x, y), o) | (o, F::Pair(x, y)) => {
                self.conv(x, &ffst(o.clone()))? && self.conv(y, &fsnd(o.clone()))?
            }
            (F::Unit, _) | (_, F::Unit) => true,
            (F::BoxI(x), F::BoxI(y)) => self.conv(x, y)?,
            (F::BoxI(x), o) | (o, F::BoxI(x)) => self.conv(x, &F::Unbox(0, bx(o.clone())))?,
            (F::Pi(a1, b1), F::Pi(a2, b2)) | (F::Sigma(a1, b1), F::Sigma(a2, b2)) => {
                std::mem::discriminant(&a) == std::mem::discriminant(&b) && self.conv(a1, a2)? && self.conv(b1, b2)?
            }
            (F::App(f1, x1), F::App(f2, x2)) => self.conv(f1, f2)? && self.conv(x1, x2)?,
            (F::Fst(x), F::Fst(y)) | (F::Snd(x), F::Snd(y)) => self.conv(x, y)?,
            (F::BoxT(x), F::BoxT(y)) => self.conv(x, y)?,
            (F::Unbox(k1, x), F::Unbox(k2, y)) => k1 == k2 && self.conv(x, y)?,
            _ => a == b,
        })
    }
}

// ---------------------------------------------------------------------------
// translation

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ent {
    /// a computation variable of the source
    Src,
    /// an environment or domain binder made by the translation
    Aux,
    Lock,
}

struct Tr<'a> {
    ck: &'a Checker,
    mode: Mode,
}

fn lay_with(lay: &[Ent], e: Ent) -> Vec<Ent> {
    let mut l = lay.to_vec();
    l.push(e);
    l
}

fn gwith(g: &[AnnType], a: AnnType) -> Vec<AnnType> {
    let mut g = g.to_vec();
    g.push(a);
    g
}

/// Layout before the last lock, and the number of variables after it.
fn strip(lay: &[Ent]) -> FResult<(Vec<Ent>, usize)> {
    let pos = lay.iter().rposition(|e| *e == Ent::Lock).ok_or(FError::NoLock)?;
    Ok((lay[..pos].to_vec(), lay.len() - pos - 1))
}

fn cvar(lay: &[Ent], i: usize) -> FResult<FTerm> {
    let (mut seen, mut idx) = (0, 0);
    for e in lay.iter().rev() {
        match e {
            Ent::Lock => return Err(FError::VariableBehindLock(i)),
            Ent::Aux => idx += 1,
            Ent::Src => {
                if seen == i {
                    return Ok(F::Var(idx));
                }
                seen += 1;
                idx += 1;
            }
        }
    }
    Err(FError::Unbound(i))
}

fn fst_k(k: usize, t: FTerm) -> FTerm {
    (0..k).fold(t, |t, _| ffst(t))
}

impl Tr<'_> {
    /// A domain context as a type, at a point where `lay` is in scope.
    fn ctx_ty(&self, g: &[AnnType], lay: &[Ent], psi: &DomCtx) -> FResult<FTerm> {
        match psi {
            DomCtx::Empty => Ok(F::Top),
            DomCtx::Var(i) => {
                let (pre, k) = strip(lay)?;
                Ok(F::Unbox(k, bx(cvar(&pre, *i)?)))
            }
            DomCtx::Snoc(c, a) => {
                let head = self.ctx_ty(g, lay, c)?;
                let tail = self.dty(g, &lay_with(lay, Ent::Aux), c, a, &F::Var(0))?;
                Ok(F::Sigma(bx(head), bx(tail)))
            }
        }
    }

    /// A domain type over the environment `env`.
    fn dty(&self, g: &[AnnType], lay: &[Ent], psi: &DomCtx, a: &DomType, env: &FTerm) -> FResult<FTerm> {
        match a {
            DomType::Tm => Ok(F::Const(FC::Tm)),
            DomType::Ty => Ok(F::Const(FC::Ty)),
            DomType::Arrow(x, y) => {
                let ex = self.dty(g, lay, psi, x, env)?;
                let ey = self.dty(g, lay, psi, y, env)?;
                Ok(fpi(ex, shift(&ey, 0, 1)))
            }
            DomType::Trm(m) => Ok(fapp(F::Const(FC::Trm), self.dterm(g, lay, psi, m, &DomType::Ty, env)?)),
            DomType::Pi(x, y) => {
                let ex = self.dty(g, lay, psi, x, env)?;
                let env1 = fpair(shift(env, 0, 1), F::Var(0));
                let ey = self.dty(g, &lay_with(lay, Ent::Aux), &snoc(psi.clone(), (**x).clone()), y, &env1)?;
                Ok(fpi(ex, ey))
            }
        }
    }

    fn dterm(&self, g: &[AnnType], lay: &[Ent], psi: &DomCtx, m: &DomTerm, a: &DomType, env: &FTerm) -> FResult<FTerm> {
        match m {
            DomTerm::Var(k) => Ok(fsnd(fst_k(*k, env.clone()))),
            DomTerm::Lam(b) => {
                let (x, y) = match a {
                    DomType::Arrow(x, y) | DomType::Pi(x, y) => (x, y),
                    _ => return Err(FError::Expected("a function type")),
                };
                let ex = self.dty(g, lay, psi, x, env)?;
                let env1 = fpair(shift(env, 0, 1), F::Var(0));
                let eb = self.dterm(g, &lay_with(lay, Ent::Aux), &snoc(psi.clone(), (**x).clone()), b, y, &env1)?;
                Ok(F::Lam(bx(ex), bx(eb)))
            }
            DomTerm::App(f, x) => {
                let fty = match &**f {
                    DomTerm::Lam(b) => {
                        let xt = self.ck.infer_dom_term(g, psi, x)?;
                        let bt = self.ck.infer_dom_term(g, &snoc(psi.clone(), xt.clone()), b)?;
                        match self.mode {
                            Mode::Simple => arrow(xt, bt),
                            Mode::Dep => pi(xt, bt),
                        }
                    }
                    _ => self.ck.infer_dom_term(g, psi, f)?,
                };
                let xt = match &fty {
                    DomType::Arrow(x1, _) | DomType::Pi(x1, _) => (**x1).clone(),
                    _ => return Err(FError::Expected("a function")),
                };
                Ok(fapp(self.dterm(g, lay, psi, f, &fty, env)?, self.dterm(g, lay, psi, x, &xt, env)?))
            }
            DomTerm::Const(SConst::Lam) => Ok(F::Const(FC::SLam)),
            DomTerm::Const(SConst::App) => Ok(F::Const(FC::SApp)),
            DomTerm::Con(k, xs) => {
                let ty = DomType::Ty;
                let args = match k {
                    DCon::O => vec![],
                    DCon::Arr => {
                        vec![self.dterm(g, lay, psi, &xs[0], &ty, env)?, self.dterm(g, lay, psi, &xs[1], &ty, env)?]
                    }
                    DCon::Lam => {
                        let fty = pi(trm(xs[0].clone()), trm(shift_dom(&xs[1], 0, 1)?));
                        vec![
                            self.dterm(g, lay, psi, &xs[0], &ty, env)?,
                            self.dterm(g, lay, psi, &xs[1], &ty, env)?,
                            self.dterm(g, lay, psi, &xs[2], &fty, env)?,
                        ]
                    }
                    DCon::App => {
                        let arr = DomTerm::Con(DCon::Arr, vec![xs[0].clone(), xs[1].clone()]);
                        vec![
                            self.dterm(g, lay, psi, &xs[0], &ty, env)?,
                            self.dterm(g, lay, psi, &xs[1], &ty, env)?,
                            self.dterm(g, lay, psi, &xs[2], &trm(arr), env)?,
                            self.dterm(g, lay, psi, &xs[3], &trm(xs[0].clone()), env)?,
                        ]
                    }
                };
                let c = match k {
                    DCon::O => FC::O,
                    DCon::Arr => FC::Arr,
                    DCon::Lam => FC::Lam,
                    DCon::App => FC::App,
                };
                Ok(fapps(F::Const(c), args))
            }
            DomTerm::Unbox(t, s) => {
                if let CompTerm::Box(_, n) = &**t {
                    if self.ck.global_type(t).is_none() {
                        let phi = self.ck.infer_subst_target(g, psi, s)?;
                        let nt = self.ck.infer_dom_term(g, &phi, n)?;
                        let env1 = self.senv(g, lay, psi, s, &phi, env)?;
                        return self.dterm(g, lay, &phi, n, &nt, &env1);
                    }
                }
                let ct = match self.ck.infer_comp(g, t)? {
                    AnnType::Ty(CompType::Box(ct)) => ct,
                    _ => return Err(FError::Expected("a box")),
                };
                let (pre, k) = strip(lay)?;
                let (et, _) = self.comp_infer(g, &pre, t)?;
                Ok(fapp(F::Unbox(k, bx(et)), self.senv(g, lay, psi, s, &ct.ctx, env)?))
            }
        }
    }

    /// The environment for `phi` obtained from `env` through `s`.
    fn senv(
        &self,
        g: &[AnnType],
        lay: &[Ent],
        psi: &DomCtx,
        s: &DomSubst,
        phi: &DomCtx,
        env: &FTerm,
    ) -> FResult<FTerm> {
        match s {
            DomSubst::Empty => Ok(F::Unit),
            DomSubst::Wk(k) => Ok(fst_k(*k, env.clone())),
            DomSubst::Snoc(r, m) => {
                let DomCtx::Snoc(phi1, a) = phi else { return Err(FError::Expected("a longer context")) };
                let er = self.senv(g, lay, psi, r, phi1, env)?;
                let em = self.dterm(g, lay, psi, m, &subst_dom_ty(a, r)?, env)?;
                Ok(fpair(er, em))
            }
        }
    }

    fn ann(&self, g: &[AnnType], lay: &[Ent], a: &AnnType) -> FResult<FTerm> {
        match a {
            AnnType::Ctx => Ok(F::BoxT(bx(F::Ctx))),
            AnnType::Ty(t) => self.comp_ty(g, lay, t),
        }
    }

    fn comp_ty(&self, g: &[AnnType], lay: &[Ent], t: &CompType) -> FResult<FTerm> {
        match t {
            CompType::Box(ct) => {
                let l1 = lay_with(lay, Ent::Lock);
                let c = self.ctx_ty(g, &l1, &ct.ctx)?;
                let a = self.dty(g, &lay_with(&l1, Ent::Aux), &ct.ctx, &ct.ty, &F::Var(0))?;
                Ok(F::BoxT(bx(fpi(c, a))))
            }
            CompType::Fn(a, r) => {
                let ea = self.ann(g, lay, a)?;
                Ok(fpi(ea, self.comp_ty(&gwith(g, (**a).clone()), &lay_with(lay, Ent::Src), r)?))
            }
        }
    }

    fn comp_check(&self, g: &[AnnType], lay: &[Ent], t: &CompTerm, ty: &CompType) -> FResult<FTerm> {
        match (t, ty) {
            (CompTerm::Fn(b), CompType::Fn(a, r)) => {
                let ea = self.ann(g, lay, a)?;
                Ok(F::Lam(bx(ea), bx(self.comp_check(&gwith(g, (**a).clone()), &lay_with(lay, Ent::Src), b, r)?)))
            }
            (CompTerm::Box(_, m), CompType::Box(ct)) => {
                let l1 = lay_with(lay, Ent::Lock);
                let c = self.ctx_ty(g, &l1, &ct.ctx)?;
                let body = self.dterm(g, &lay_with(&l1, Ent::Aux), &ct.ctx, m, &ct.ty, &F::Var(0))?;
                Ok(F::BoxI(bx(F::Lam(bx(c), bx(body)))))
            }
            // variable-kind and term-kind boxes share an image
            _ => Ok(self.comp_infer(g, lay, t)?.0),
        }
    }

    fn comp_infer(&self, g: &[AnnType], lay: &[Ent], t: &CompTerm) -> FResult<(FTerm, CompType)> {
        match t {
            CompTerm::Var(i) => match self.ck.lookup_comp(g, *i)? {
                AnnType::Ty(ty) => Ok((cvar(lay, *i)?, ty)),
                AnnType::Ctx => Err(FError::Source("context variable used as a term".into())),
            },
            CompTerm::Box(..) | CompTerm::Fn(_) => match self.ck.global_type(t) {
                Some(ty) => Ok((self.comp_check(g, lay, t, &ty)?, ty)),
                None => Err(FError::Source("cannot infer a literal".into())),
            },
            CompTerm::Rec(_) => Err(FError::RecursorPresent),
            CompTerm::App(f, a) => {
                let is_ctx = match &**a {
                    Arg::Ctx(_) => true,
                    Arg::Term(CompTerm::Var(i)) => self.ck.lookup_comp(g, *i)? == AnnType::Ctx,
                    Arg::Term(_) => false,
                };
                let arg = match &**a {
                    Arg::Term(CompTerm::Var(i)) if is_ctx => Arg::Ctx(DomCtx::Var(*i)),
                    a => a.clone(),
                };
                let (ef, res, want) = if let (CompTerm::Fn(body), None) = (&**f, self.ck.global_type(f)) {
                    let ann = match &arg {
                        Arg::Ctx(_) => AnnType::Ctx,
                        Arg::Term(v) => self.ck.infer_comp(g, v)?,
                    };
                    let (eb, tb) = self.comp_infer(&gwith(g, ann.clone()), &lay_with(lay, Ent::Src), body)?;
                    (F::Lam(bx(self.ann(g, lay, &ann)?), bx(eb)), tb, ann.clone())
                } else {
                    match self.comp_infer(g, lay, f)? {
                        (ef, CompType::Fn(ann2, res)) => {
                            if (*ann2 == AnnType::Ctx) != is_ctx {
                                return Err(FError::Source("argument kind".into()));
                            }
                            (ef, *res, *ann2)
                        }
                        _ => return Err(FError::Expected("a function")),
                    }
                };
                let ea = match &arg {
                    Arg::Ctx(c) => F::BoxI(bx(self.ctx_ty(g, &lay_with(lay, Ent::Lock), c)?)),
                    Arg::Term(v) => match want {
                        AnnType::Ty(wt) => self.comp_check(g, lay, v, &wt)?,
                        AnnType::Ctx => return Err(FError::Source("argument kind".into())),
                    },
                };
                Ok((fapp(ef, ea), inst_ty(&res, &[arg])?))
            }
        }
    }
}

/// Translate a closed, recursor-free declaration: (body, type).
pub fn translate_decl(ck: &Checker, mode: Mode, ty: &CompType, body: &CompTerm) -> FResult<(FTerm, FTerm)> {
    if contains_rec(body) {
        return Err(FError::RecursorPresent);
    }
    let tr = Tr { ck, mode };
    Ok((tr.comp_check(&[], &[], body, ty)?, tr.comp_ty(&[], &[], ty)?))
}
