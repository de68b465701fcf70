//! Nameless syntax for both Cocon variants.
//!
//! Domain variables count from the right of the explicit declarations of the
//! enclosing domain context. Computation variables (including context
//! variables) index the computation context Γ.

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Simple,
    Dep,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Simple => "simple",
            Mode::Dep => "dep",
        }
    }
}

/// Binder names kept for diagnostics only. Equality ignores them.
#[derive(Clone, Debug, Default)]
pub struct Names(pub Vec<String>);

impl PartialEq for Names {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}
impl Eq for Names {}

impl Names {
    pub fn none() -> Names {
        Names(Vec::new())
    }
    pub fn of(xs: &[&str]) -> Names {
        Names(xs.iter().map(|s| s.to_string()).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DomType {
    Tm,
    Arrow(Box<DomType>, Box<DomType>),
    Ty,
    Trm(Box<DomTerm>),
    /// Codomain binds one more domain variable.
    Pi(Box<DomType>, Box<DomType>),
}

/// Simple-mode constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SConst {
    Lam,
    App,
}

/// Dep-mode constructors, always fully applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DCon {
    O,
    Arr,
    Lam,
    App,
}

impl DCon {
    pub fn arity(self) -> usize {
        match self {
            DCon::O => 0,
            DCon::Arr => 2,
            DCon::Lam => 3,
            DCon::App => 4,
        }
    }
    pub fn name(self) -> &'static str {
        match self {
            DCon::O => "o",
            DCon::Arr => "arr",
            DCon::Lam => "lam",
            DCon::App => "app",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DomTerm {
    Var(usize),
    Lam(Box<DomTerm>),
    App(Box<DomTerm>, Box<DomTerm>),
    Const(SConst),
    Con(DCon, Vec<DomTerm>),
    Unbox(Box<CompTerm>, Box<DomSubst>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DomCtx {
    Empty,
    Var(usize),
    Snoc(Box<DomCtx>, DomType),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DomSubst {
    Empty,
    /// Drops the last k declarations. `Wk(0)` is the identity.
    Wk(usize),
    Snoc(Box<DomSubst>, DomTerm),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CtxKind {
    Term,
    Var,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtxType {
    pub kind: CtxKind,
    pub ctx: DomCtx,
    pub ty: DomType,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnnType {
    Ctx,
    Ty(CompType),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CompType {
    Box(CtxType),
    Fn(Box<AnnType>, Box<CompType>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Arg {
    Ctx(DomCtx),
    Term(CompTerm),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RecKind {
    /// simple mode, over `tm`
    Tm,
    /// dep mode, over `ty`
    Ty,
    /// dep mode, over `trm`, with an extra closed type index
    Trm,
}

impl RecKind {
    pub fn branch_count(self) -> usize {
        match self {
            RecKind::Tm | RecKind::Trm => 3,
            RecKind::Ty => 2,
        }
    }
    /// Binders of each branch, in branch order.
    pub fn branch_arities(self) -> &'static [usize] {
        match self {
            RecKind::Tm => &[2, 5, 3],
            RecKind::Ty => &[1, 5],
            RecKind::Trm => &[3, 5, 7],
        }
    }
    /// Binders of the motive before the result type.
    pub fn motive_binders(self) -> usize {
        match self {
            RecKind::Tm | RecKind::Ty => 2,
            RecKind::Trm => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub names: Names,
    pub body: CompTerm,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rec {
    pub kind: RecKind,
    pub motive: CompType,
    pub branches: Vec<Branch>,
    pub ctx: DomCtx,
    /// The closed type scrutinee of the `trm` recursor.
    pub index: Option<CompTerm>,
    pub scrut: CompTerm,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CompTerm {
    Var(usize),
    Box(Names, Box<DomTerm>),
    Fn(Box<CompTerm>),
    App(Box<CompTerm>, Box<Arg>),
    Rec(Box<Rec>),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("index would become negative")]
    NegativeIndex,
    #[error("substitution is shorter than the context")]
    ArityMismatch,
    #[error("argument kind does not match the binder")]
    KindMismatch,
}

pub type SResult<T> = Result<T, SyntaxError>;

// ---------------------------------------------------------------------------
// constructors

pub fn dvar(i: usize) -> DomTerm {
    DomTerm::Var(i)
}
pub fn dlam(b: DomTerm) -> DomTerm {
    DomTerm::Lam(Box::new(b))
}
pub fn dapp(f: DomTerm, a: DomTerm) -> DomTerm {
    DomTerm::App(Box::new(f), Box::new(a))
}
pub fn unbox(t: CompTerm, s: DomSubst) -> DomTerm {
    DomTerm::Unbox(Box::new(t), Box::new(s))
}
pub fn arrow(a: DomType, b: DomType) -> DomType {
    DomType::Arrow(Box::new(a), Box::new(b))
}
pub fn pi(a: DomType, b: DomType) -> DomType {
    DomType::Pi(Box::new(a), Box::new(b))
}
pub fn trm(m: DomTerm) -> DomType {
    DomType::Trm(Box::new(m))
}
pub fn snoc(c: DomCtx, a: DomType) -> DomCtx {
    DomCtx::Snoc(Box::new(c), a)
}
pub fn ssnoc(s: DomSubst, m: DomTerm) -> DomSubst {
    DomSubst::Snoc(Box::new(s), m)
}
pub fn cvar(i: usize) -> CompTerm {
    CompTerm::Var(i)
}
pub fn cbox(m: DomTerm) -> CompTerm {
    CompTerm::Box(Names::none(), Box::new(m))
}
pub fn cfn(b: CompTerm) -> CompTerm {
    CompTerm::Fn(Box::new(b))
}
pub fn capp(f: CompTerm, a: CompTerm) -> CompTerm {
    CompTerm::App(Box::new(f), Box::new(Arg::Term(a)))
}
pub fn capp_ctx(f: CompTerm, c: DomCtx) -> CompTerm {
    CompTerm::App(Box::new(f), Box::new(Arg::Ctx(c)))
}
pub fn boxty(ctx: DomCtx, ty: DomType) -> CompType {
    CompType::Box(CtxType { kind: CtxKind::Term, ctx, ty })
}
pub fn varty(ctx: DomCtx, ty: DomType) -> CompType {
    CompType::Box(CtxType { kind: CtxKind::Var, ctx, ty })
}
pub fn fnty(a: AnnType, b: CompType) -> CompType {
    CompType::Fn(Box::new(a), Box::new(b))
}
pub fn simple_app(m: DomTerm, n: DomTerm) -> DomTerm {
    dapp(dapp(DomTerm::Const(SConst::App), m), n)
}
pub fn simple_lam(f: DomTerm) -> DomTerm {
    dapp(DomTerm::Const(SConst::Lam), f)
}

impl DomCtx {
    /// Number of explicit declarations.
    pub fn len(&self) -> usize {
        match self {
            DomCtx::Snoc(c, _) => c.len() + 1,
            _ => 0,
        }
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// The context with its last `k` declarations removed.
    pub fn drop(&self, k: usize) -> Option<&DomCtx> {
        if k == 0 {
            return Some(self);
        }
        match self {
            DomCtx::Snoc(c, _) => DomCtx::drop(c, k - 1),
            _ => None,
        }
    }
    pub fn head(&self) -> &DomCtx {
        match self {
            DomCtx::Snoc(c, _) => c.head(),
            h => h,
        }
    }
}

impl DomSubst {
    pub fn id() -> DomSubst {
        DomSubst::Wk(0)
    }
}

// ---------------------------------------------------------------------------
// domain-variable shifting

pub fn shift_dom(t: &DomTerm, c: usize, a: isize) -> SResult<DomTerm> {
    Ok(match t {
        DomTerm::Var(i) => DomTerm::Var(shift_index(*i, c, a)?),
        DomTerm::Lam(b) => dlam(shift_dom(b, c + 1, a)?),
        DomTerm::App(f, x) => dapp(shift_dom(f, c, a)?, shift_dom(x, c, a)?),
        DomTerm::Const(k) => DomTerm::Const(*k),
        DomTerm::Con(k, xs) => DomTerm::Con(*k, xs.iter().map(|x| shift_dom(x, c, a)).collect::<SResult<_>>()?),
        DomTerm::Unbox(t, s) => unbox((**t).clone(), shift_subst(s, c, a)?),
    })
}

fn shift_index(i: usize, c: usize, a: isize) -> SResult<usize> {
    if i < c {
        return Ok(i);
    }
    let j = i as isize + a;
    if j < c as isize {
        Err(SyntaxError::NegativeIndex)
    } else {
        Ok(j as usize)
    }
}

pub fn shift_dom_ty(t: &DomType, c: usize, a: isize) -> SResult<DomType> {
    Ok(match t {
        DomType::Tm | DomType::Ty => t.clone(),
        DomType::Arrow(x, y) => arrow(shift_dom_ty(x, c, a)?, shift_dom_ty(y, c, a)?),
        DomType::Trm(m) => trm(shift_dom(m, c, a)?),
        DomType::Pi(x, y) => pi(shift_dom_ty(x, c, a)?, shift_dom_ty(y, c + 1, a)?),
    })
}

pub fn shift_subst(s: &DomSubst, c: usize, a: isize) -> SResult<DomSubst> {
    Ok(match s {
        DomSubst::Empty => DomSubst::Empty,
        DomSubst::Wk(k) if *k >= c => DomSubst::Wk(shift_index(*k, c, a)?),
        // the image of variable 0 sits below the cutoff: expose it
        DomSubst::Wk(k) => ssnoc(shift_subst(&DomSubst::Wk(k + 1), c, a)?, DomTerm::Var(*k)),
        DomSubst::Snoc(s, m) => ssnoc(shift_subst(s, c, a)?, shift_dom(m, c, a)?),
    })
}

// ---------------------------------------------------------------------------
// domain substitution

/// `⇑σ`, the substitution under one more binder.
pub fn lift_subst(s: &DomSubst) -> DomSubst {
    ssnoc(shift_subst(s, 0, 1).expect("positive shift"), DomTerm::Var(0))
}

pub fn lookup_subst(s: &DomSubst, i: usize) -> SResult<DomTerm> {
    match s {
        DomSubst::Empty => Err(SyntaxError::ArityMismatch),
        DomSubst::Wk(k) => Ok(DomTerm::Var(i + k)),
        DomSubst::Snoc(_, m) if i == 0 => Ok(m.clone()),
        DomSubst::Snoc(s, _) => lookup_subst(s, i - 1),
    }
}

/// `σ` with its first `k` entries (from the right) removed, i.e. `σ ∘ wk k`.
pub fn drop_subst(s: &DomSubst, k: usize) -> SResult<DomSubst> {
    if k == 0 {
        return Ok(s.clone());
    }
    match s {
        DomSubst::Empty => Err(SyntaxError::ArityMismatch),
        DomSubst::Wk(j) => Ok(DomSubst::Wk(j + k)),
        DomSubst::Snoc(s, _) => drop_subst(s, k - 1),
    }
}

pub fn subst_dom(t: &DomTerm, s: &DomSubst) -> SResult<DomTerm> {
    Ok(match t {
        DomTerm::Var(i) => lookup_subst(s, *i)?,
        DomTerm::Lam(b) => dlam(subst_dom(b, &lift_subst(s))?),
        DomTerm::App(f, x) => dapp(subst_dom(f, s)?, subst_dom(x, s)?),
        DomTerm::Const(k) => DomTerm::Const(*k),
        DomTerm::Con(k, xs) => DomTerm::Con(*k, xs.iter().map(|x| subst_dom(x, s)).collect::<SResult<_>>()?),
        DomTerm::Unbox(t, tau) => unbox((**t).clone(), compose(s, tau)?),
    })
}

pub fn subst_dom_ty(t: &DomType, s: &DomSubst) -> SResult<DomType> {
    Ok(match t {
        DomType::Tm | DomType::Ty => t.clone(),
        DomType::Arrow(x, y) => arrow(subst_dom_ty(x, s)?, subst_dom_ty(y, s)?),
        DomType::Trm(m) => trm(subst_dom(m, s)?),
        DomType::Pi(x, y) => pi(subst_dom_ty(x, s)?, subst_dom_ty(y, &lift_subst(s))?),
    })
}

/// `σ ∘ τ`: apply `σ` to every entry of `τ`.
pub fn compose(s: &DomSubst, tau: &DomSubst) -> SResult<DomSubst> {
    Ok(match tau {
        DomSubst::Empty => DomSubst::Empty,
        DomSubst::Wk(k) => drop_subst(s, *k)?,
        DomSubst::Snoc(t, m) => ssnoc(compose(s, t)?, subst_dom(m, s)?),
    })
}

/// `[N/x]` for the innermost domain variable.
pub fn subst_dom0(t: &DomTerm, n: &DomTerm) -> SResult<DomTerm> {
    subst_dom(t, &ssnoc(DomSubst::id(), n.clone()))
}

pub fn subst_dom_ty0(t: &DomType, n: &DomTerm) -> SResult<DomType> {
    subst_dom_ty(t, &ssnoc(DomSubst::id(), n.clone()))
}

// ---------------------------------------------------------------------------
// computation-variable traversal

/// Callbacks for a pass over computation variables; `depth` counts the
/// computation binders crossed so far.
trait CompMap {
    fn var(&self, depth: usize, i: usize) -> SResult<Arg>;
}

struct Shift {
    cutoff: usize,
    amount: isize,
}

impl CompMap for Shift {
    fn var(&self, depth: usize, i: usize) -> SResult<Arg> {
        Ok(Arg::Term(CompTerm::Var(shift_index(i, self.cutoff + depth, self.amount)?)))
    }
}

struct Subst0<'a> {
    arg: &'a Arg,
}

impl CompMap for Subst0<'_> {
    fn var(&self, depth: usize, i: usize) -> SResult<Arg> {
        use std::cmp::Ordering::*;
        match i.cmp(&depth) {
            Less => Ok(Arg::Term(CompTerm::Var(i))),
            Greater => Ok(Arg::Term(CompTerm::Var(i - 1))),
            Equal => shift_arg(self.arg, 0, depth as isize),
        }
    }
}

fn map_term(t: &CompTerm, d: usize, m: &dyn CompMap) -> SResult<CompTerm> {
    Ok(match t {
        CompTerm::Var(i) => match m.var(d, *i)? {
            Arg::Term(t) => t,
            // a context variable standing in term position
            Arg::Ctx(DomCtx::Var(j)) => CompTerm::Var(j),
            Arg::Ctx(_) => return Err(SyntaxError::KindMismatch),
        },
        CompTerm::Box(n, b) => CompTerm::Box(n.clone(), Box::new(map_dterm(b, d, m)?)),
        CompTerm::Fn(b) => cfn(map_term(b, d + 1, m)?),
        CompTerm::App(f, a) => CompTerm::App(Box::new(map_term(f, d, m)?), Box::new(map_arg(a, d, m)?)),
        CompTerm::Rec(r) => {
            let arities = r.kind.branch_arities();
            let branches = r
                .branches
                .iter()
                .enumerate()
                .map(|(i, b)| {
                    // a malformed branch count is reported by the checker
                    let k = arities.get(i).copied().unwrap_or(b.names.0.len());
                    Ok(Branch { names: b.names.clone(), body: map_term(&b.body, d + k, m)? })
                })
                .collect::<SResult<_>>()?;
            CompTerm::Rec(Box::new(Rec {
                kind: r.kind,
                motive: map_type(&r.motive, d, m)?,
                branches,
                ctx: map_ctx(&r.ctx, d, m)?,
                index: r.index.as_ref().map(|t| map_term(t, d, m)).transpose()?,
                scrut: map_term(&r.scrut, d, m)?,
            }))
        }
    })
}

fn map_arg(a: &Arg, d: usize, m: &dyn CompMap) -> SResult<Arg> {
    Ok(match a {
        Arg::Ctx(c) => Arg::Ctx(map_ctx(c, d, m)?),
        Arg::Term(CompTerm::Var(i)) => m.var(d, *i)?,
        Arg::Term(t) => Arg::Term(map_term(t, d, m)?),
    })
}

fn map_type(t: &CompType, d: usize, m: &dyn CompMap) -> SResult<CompType> {
    Ok(match t {
        CompType::Box(c) => CompType::Box(map_ctxtype(c, d, m)?),
        CompType::Fn(a, b) => fnty(map_ann(a, d, m)?, map_type(b, d + 1, m)?),
    })
}

fn map_ann(a: &AnnType, d: usize, m: &dyn CompMap) -> SResult<AnnType> {
    Ok(match a {
        AnnType::Ctx => AnnType::Ctx,
        AnnType::Ty(t) => AnnType::Ty(map_type(t, d, m)?),
    })
}

fn map_ctxtype(c: &CtxType, d: usize, m: &dyn CompMap) -> SResult<CtxType> {
    Ok(CtxType { kind: c.kind, ctx: map_ctx(&c.ctx, d, m)?, ty: map_dtype(&c.ty, d, m)? })
}

fn map_ctx(c: &DomCtx, d: usize, m: &dyn CompMap) -> SResult<DomCtx> {
    Ok(match c {
        DomCtx::Empty => DomCtx::Empty,
        DomCtx::Var(i) => match m.var(d, *i)? {
            Arg::Ctx(c) => c,
            Arg::Term(CompTerm::Var(j)) => DomCtx::Var(j),
            Arg::Term(_) => return Err(SyntaxError::KindMismatch),
        },
        DomCtx::Snoc(c, a) => snoc(map_ctx(c, d, m)?, map_dtype(a, d, m)?),
    })
}

fn map_dtype(t: &DomType, d: usize, m: &dyn CompMap) -> SResult<DomType> {
    Ok(match t {
        DomType::Tm | DomType::Ty | DomType::Arrow(..) => t.clone(),
        DomType::Trm(x) => trm(map_dterm(x, d, m)?),
        DomType::Pi(a, b) => pi(map_dtype(a, d, m)?, map_dtype(b, d, m)?),
    })
}

fn map_dterm(t: &DomTerm, d: usize, m: &dyn CompMap) -> SResult<DomTerm> {
    Ok(match t {
        DomTerm::Var(_) | DomTerm::Const(_) => t.clone(),
        DomTerm::Lam(b) => dlam(map_dterm(b, d, m)?),
        DomTerm::App(f, x) => dapp(map_dterm(f, d, m)?, map_dterm(x, d, m)?),
        DomTerm::Con(k, xs) => DomTerm::Con(*k, xs.iter().map(|x| map_dterm(x, d, m)).collect::<SResult<_>>()?),
        DomTerm::Unbox(h, s) => unbox(map_term(h, d, m)?, map_dsubst(s, d, m)?),
    })
}

fn map_dsubst(s: &DomSubst, d: usize, m: &dyn CompMap) -> SResult<DomSubst> {
    Ok(match s {
        DomSubst::Empty | DomSubst::Wk(_) => s.clone(),
        DomSubst::Snoc(s, x) => ssnoc(map_dsubst(s, d, m)?, map_dterm(x, d, m)?),
    })
}

// ---------------------------------------------------------------------------
// public computation-level operations

pub fn shift_comp(t: &CompTerm, c: usize, a: isize) -> SResult<CompTerm> {
    map_term(t, 0, &Shift { cutoff: c, amount: a })
}
pub fn shift_comp_ty(t: &CompType, c: usize, a: isize) -> SResult<CompType> {
    map_type(t, 0, &Shift { cutoff: c, amount: a })
}
pub fn shift_ann(t: &AnnType, c: usize, a: isize) -> SResult<AnnType> {
    map_ann(t, 0, &Shift { cutoff: c, amount: a })
}
pub fn shift_arg(t: &Arg, c: usize, a: isize) -> SResult<Arg> {
    map_arg(t, 0, &Shift { cutoff: c, amount: a })
}
pub fn shift_ctx(t: &DomCtx, c: usize, a: isize) -> SResult<DomCtx> {
    map_ctx(t, 0, &Shift { cutoff: c, amount: a })
}
pub fn shift_ctxtype(t: &CtxType, c: usize, a: isize) -> SResult<CtxType> {
    map_ctxtype(t, 0, &Shift { cutoff: c, amount: a })
}
/// Shift computation variables occurring inside a domain term.
pub fn shift_comp_in_dom(t: &DomTerm, c: usize, a: isize) -> SResult<DomTerm> {
    map_dterm(t, 0, &Shift { cutoff: c, amount: a })
}
pub fn shift_comp_in_dty(t: &DomType, c: usize, a: isize) -> SResult<DomType> {
    map_dtype(t, 0, &Shift { cutoff: c, amount: a })
}
pub fn shift_comp_in_subst(t: &DomSubst, c: usize, a: isize) -> SResult<DomSubst> {
    map_dsubst(t, 0, &Shift { cutoff: c, amount: a })
}

/// `[s/y]t` for the innermost computation variable `y`.
pub fn subst_comp(t: &CompTerm, arg: &Arg) -> SResult<CompTerm> {
    map_term(t, 0, &Subst0 { arg })
}
pub fn subst_comp_ty(t: &CompType, arg: &Arg) -> SResult<CompType> {
    map_type(t, 0, &Subst0 { arg })
}
pub fn subst_comp_ctx(t: &DomCtx, arg: &Arg) -> SResult<DomCtx> {
    map_ctx(t, 0, &Subst0 { arg })
}
pub fn subst_comp_ctxtype(t: &CtxType, arg: &Arg) -> SResult<CtxType> {
    map_ctxtype(t, 0, &Subst0 { arg })
}
pub fn subst_comp_dom(t: &DomTerm, arg: &Arg) -> SResult<DomTerm> {
    map_dterm(t, 0, &Subst0 { arg })
}
pub fn subst_comp_dty(t: &DomType, arg: &Arg) -> SResult<DomType> {
    map_dtype(t, 0, &Subst0 { arg })
}

/// Instantiate the innermost `args.len()` binders; `args[0]` is the
/// outermost and all arguments live in the context outside the binders.
pub fn inst(t: &CompTerm, args: &[Arg]) -> SResult<CompTerm> {
    let mut t = t.clone();
    for (j, a) in args.iter().enumerate().rev() {
        t = subst_comp(&t, &shift_arg(a, 0, j as isize)?)?;
    }
    Ok(t)
}

pub fn inst_ty(t: &CompType, args: &[Arg]) -> SResult<CompType> {
    let mut t = t.clone();
    for (j, a) in args.iter().enumerate().rev() {
        t = subst_comp_ty(&t, &shift_arg(a, 0, j as isize)?)?;
    }
    Ok(t)
}

/// Peel the motive's own binders, returning their annotations and the
/// result type (which lives under them).
pub fn motive_parts(motive: &CompType, n: usize) -> Option<(Vec<AnnType>, CompType)> {
    let mut anns = Vec::new();
    let mut t = motive;
    for _ in 0..n {
        match t {
            CompType::Fn(a, b) => {
                anns.push((**a).clone());
                t = b;
            }
            _ => return None,
        }
    }
    Some((anns, t.clone()))
}

/// The motive's result type, taken to a context with `extra` more entries
/// and instantiated with `args` (which live in that extended context).
pub fn motive_at(motive: &CompType, kind: RecKind, extra: usize, args: &[Arg]) -> SResult<CompType> {
    let n = kind.motive_binders();
    let (_, tau) = motive_parts(motive, n).ok_or(SyntaxError::KindMismatch)?;
    let tau = shift_comp_ty(&tau, n, extra as isize)?;
    inst_ty(&tau, args)
}

impl Arg {
    pub fn as_ctx(&self) -> Option<DomCtx> {
        match self {
            Arg::Ctx(c) => Some(c.clone()),
            Arg::Term(CompTerm::Var(i)) => Some(DomCtx::Var(*i)),
            _ => None,
        }
    }
}

pub fn contains_rec(t: &CompTerm) -> bool {
    fn dom(t: &DomTerm) -> bool {
        match t {
            DomTerm::Var(_) | DomTerm::Const(_) => false,
            DomTerm::Lam(b) => dom(b),
            DomTerm::App(f, x) => dom(f) || dom(x),
            DomTerm::Con(_, xs) => xs.iter().any(dom),
            DomTerm::Unbox(t, s) => contains_rec(t) || sub(s),
        }
    }
    fn sub(s: &DomSubst) -> bool {
        match s {
            DomSubst::Snoc(s, m) => sub(s) || dom(m),
            _ => false,
        }
    }
    match t {
        CompTerm::Var(_) => false,
        CompTerm::Box(_, m) => dom(m),
        CompTerm::Fn(b) => contains_rec(b),
        CompTerm::App(f, a) => {
            contains_rec(f)
                || match &**a {
                    Arg::Term(t) => contains_rec(t),
                    Arg::Ctx(_) => false,
                }
        }
        CompTerm::Rec(_) => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_examples() {
        assert_eq!(shift_dom(&dvar(0), 0, 1).unwrap(), dvar(1));
        assert_eq!(shift_dom(&dlam(dvar(0)), 0, 5).unwrap(), dlam(dvar(0)));
        assert_eq!(shift_dom(&dapp(dvar(0), dvar(2)), 1, 1).unwrap(), dapp(dvar(0), dvar(3)));
        assert_eq!(shift_dom(&dvar(0), 0, -1), Err(SyntaxError::NegativeIndex));
    }

    #[test]
    fn subst_examples() {
        let m = simple_lam(dlam(dvar(0)));
        let t = simple_app(dvar(0), dvar(0));
        let s = ssnoc(DomSubst::Empty, m.clone());
        assert_eq!(subst_dom(&t, &s).unwrap(), simple_app(m.clone(), m.clone()));
        assert_eq!(subst_dom(&t, &DomSubst::id()).unwrap(), t);
        assert_eq!(subst_dom(&dvar(1), &s), Err(SyntaxError::ArityMismatch));
    }

    #[test]
    fn comp_subst_examples() {
        // [Ψ/ψ](ψ ⊢ tm)
        let psi = snoc(DomCtx::Empty, DomType::Tm);
        let t = boxty(DomCtx::Var(0), DomType::Tm);
        assert_eq!(subst_comp_ty(&t, &Arg::Ctx(psi.clone())).unwrap(), boxty(psi, DomType::Tm));
        // [t/y](unbox y σ)
        let body = cbox(unbox(cvar(0), DomSubst::Wk(1)));
        let arg = cvar(3);
        assert_eq!(subst_comp(&body, &Arg::Term(arg)).unwrap(), cbox(unbox(cvar(3), DomSubst::Wk(1))));
        // vacuous
        let t = boxty(DomCtx::Var(1), DomType::Tm);
        assert_eq!(subst_comp_ty(&t, &Arg::Term(cbox(dvar(0)))).unwrap(), boxty(DomCtx::Var(0), DomType::Tm));
    }

    #[test]
    fn kind_mismatch() {
        let body = capp(cvar(0), cvar(0));
        let r = subst_comp(&body, &Arg::Ctx(DomCtx::Empty));
        assert_eq!(r, Err(SyntaxError::KindMismatch));
    }

    #[test]
    fn wk_shift_expands_below_cutoff() {
        let s = shift_subst(&DomSubst::Wk(0), 1, 1).unwrap();
        assert_eq!(s, ssnoc(DomSubst::Wk(2), dvar(0)));
    }
}
