//! Target type theory: dual-zone (crisp | ordinary) modal dependent types
//! with the universe-of-representables signature for both modes.
//!
//! One context holds both zones in binding order; `Var(zone, i)` counts
//! entries of that zone from the right. Box clears the ordinary zone.

use crate::syntax::RecKind;
use std::cell::Cell;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Zone {
    Crisp,
    Ord,
}

/// Signature constants. Argument lists are positional; see [`K::arity`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum K {
    // object codes
    Tm,
    Unit,
    Times,
    Arrow,
    // elements of El
    Terminal,
    Pair,
    Fst,
    Snd,
    ArrowI,
    ArrowE,
    SApp,
    SLam,
    True,
    False,
    // variable subtype intro/elim, and crisp opening of a box
    VMark,
    VCoe,
    Open,
    // contexts
    Top,
    Ext,
    // substitutions
    Bang,
    Pk(usize),
    Comp,
    PairH,
    // types in a context
    TyC,
    TrmC,
    Pi,
    TSub,
    // terms in a context
    V,
    MSub,
    Abs,
    AppT,
    O,
    Arr,
    DLam,
    DApp,
    // helpers, unfolded by the normalizer
    Lift,
    ArrP,
    LamP,
    AppP,
}

impl K {
    pub fn arity(self) -> usize {
        use K::*;
        match self {
            Tm | Unit | Terminal | True | False | Top | Bang | Pk(_) | TyC | V | O => 0,
            Fst | Snd | ArrowI | ArrowE | SLam | VMark | VCoe | Open | TrmC => 1,
            Times | Arrow | Pair | SApp | Ext | Comp | Pi | TSub | MSub | Abs | AppT | Arr | Lift | ArrP => 2,
            PairH | DLam => 3,
            DApp | LamP => 4,
            AppP => 5,
        }
    }

    pub fn name(self) -> String {
        use K::*;
        match self {
            Tm => "tm".into(),
            Unit => "unit".into(),
            Times => "times".into(),
            Arrow => "arrow".into(),
            Terminal => "terminal".into(),
            Pair => "pair".into(),
            Fst => "fst".into(),
            Snd => "snd".into(),
            ArrowI => "arrow-i".into(),
            ArrowE => "arrow-e".into(),
            SApp => "app".into(),
            SLam => "lam".into(),
            True => "true".into(),
            False => "false".into(),
            VMark => "var".into(),
            VCoe => "coe".into(),
            Open => "open".into(),
            Top => "top".into(),
            Ext => "ext".into(),
            Bang => "!".into(),
            Pk(0) => "id".into(),
            Pk(1) => "p".into(),
            Pk(k) => format!("p^{k}"),
            Comp => "comp".into(),
            PairH => "extend".into(),
            TyC => "ty'".into(),
            TrmC => "trm".into(),
            Pi => "Pi".into(),
            TSub => "tsub".into(),
            V => "v".into(),
            MSub => "sub".into(),
            Abs => "Lam".into(),
            AppT => "App".into(),
            O => "o".into(),
            Arr => "arr".into(),
            DLam => "lam".into(),
            DApp => "app".into(),
            Lift => "lift".into(),
            ArrP => "arr'".into(),
            LamP => "lam'".into(),
            AppP => "app'".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TK {
    Obj,
    El,
    ElV,
    Bool,
    Ctx,
    Ty,
    Tm,
    TmV,
    Hom,
}

impl TK {
    pub fn arity(self) -> usize {
        match self {
            TK::Obj | TK::Bool | TK::Ctx => 0,
            TK::El | TK::Ty => 1,
            TK::ElV | TK::Tm | TK::TmV | TK::Hom => 2,
        }
    }
    pub fn name(self) -> &'static str {
        match self {
            TK::Obj => "Obj",
            TK::El => "El",
            TK::ElV => "ElV",
            TK::Bool => "Bool",
            TK::Ctx => "Ctx",
            TK::Ty => "Ty",
            TK::Tm => "Tm",
            TK::TmV => "TmV",
            TK::Hom => "Hom",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ITerm {
    Var(Zone, usize),
    Lam(Box<IType>, Box<ITerm>),
    CLam(Box<IType>, Box<ITerm>),
    App(Box<ITerm>, Box<ITerm>),
    CApp(Box<ITerm>, Box<ITerm>),
    Box(Box<ITerm>),
    /// `letbox u = e in b`; `b` binds a crisp variable.
    LetBox(Box<ITerm>, Box<ITerm>),
    Const(K, Vec<ITerm>),
    Rec(Box<IRec>),
    /// Type ascription.
    Ann(Box<ITerm>, Box<IType>),
}

/// Recursor. The motive binds 2 crisp variables (3 for `Trm`);
/// `args` are the context, the optional type index and the scrutinee.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IRec {
    pub kind: RecKind,
    pub motive: IType,
    pub branches: Vec<ITerm>,
    pub args: Vec<ITerm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum IType {
    /// Ordinary function; the codomain binds an ordinary variable.
    Fn(Box<IType>, Box<IType>),
    /// Crisp function; the codomain binds a crisp variable.
    CFn(Box<IType>, Box<IType>),
    Box(Box<IType>),
    Base(TK, Vec<ITerm>),
}

// ---------------------------------------------------------------------------
// constructors

pub fn cv(i: usize) -> ITerm {
    ITerm::Var(Zone::Crisp, i)
}
pub fn ov(i: usize) -> ITerm {
    ITerm::Var(Zone::Ord, i)
}
pub fn k0(k: K) -> ITerm {
    ITerm::Const(k, vec![])
}
pub fn k1(k: K, a: ITerm) -> ITerm {
    ITerm::Const(k, vec![a])
}
pub fn k2(k: K, a: ITerm, b: ITerm) -> ITerm {
    ITerm::Const(k, vec![a, b])
}
pub fn ilam(a: IType, b: ITerm) -> ITerm {
    ITerm::Lam(Box::new(a), Box::new(b))
}
pub fn iclam(a: IType, b: ITerm) -> ITerm {
    ITerm::CLam(Box::new(a), Box::new(b))
}
pub fn iapp(f: ITerm, a: ITerm) -> ITerm {
    ITerm::App(Box::new(f), Box::new(a))
}
pub fn icapp(f: ITerm, a: ITerm) -> ITerm {
    ITerm::CApp(Box::new(f), Box::new(a))
}
pub fn iann(m: ITerm, t: IType) -> ITerm {
    ITerm::Ann(Box::new(m), Box::new(t))
}
pub fn ibox(m: ITerm) -> ITerm {
    ITerm::Box(Box::new(m))
}
pub fn iletbox(e: ITerm, b: ITerm) -> ITerm {
    ITerm::LetBox(Box::new(e), Box::new(b))
}
pub fn tfn(a: IType, b: IType) -> IType {
    IType::Fn(Box::new(a), Box::new(b))
}
pub fn tcfn(a: IType, b: IType) -> IType {
    IType::CFn(Box::new(a), Box::new(b))
}
pub fn tbox(a: IType) -> IType {
    IType::Box(Box::new(a))
}
pub fn obj() -> IType {
    IType::Base(TK::Obj, vec![])
}
pub fn el(c: ITerm) -> IType {
    IType::Base(TK::El, vec![c])
}
pub fn elv(c: ITerm, a: ITerm) -> IType {
    IType::Base(TK::ElV, vec![c, a])
}
pub fn bool_ty() -> IType {
    IType::Base(TK::Bool, vec![])
}
pub fn ctx_ty() -> IType {
    IType::Base(TK::Ctx, vec![])
}
pub fn ty_in(phi: ITerm) -> IType {
    IType::Base(TK::Ty, vec![phi])
}
pub fn tm_in(phi: ITerm, a: ITerm) -> IType {
    IType::Base(TK::Tm, vec![phi, a])
}
pub fn tmv_in(phi: ITerm, a: ITerm) -> IType {
    IType::Base(TK::TmV, vec![phi, a])
}
pub fn hom(src: ITerm, tgt: ITerm) -> IType {
    IType::Base(TK::Hom, vec![src, tgt])
}
pub fn times(a: ITerm, b: ITerm) -> ITerm {
    k2(K::Times, a, b)
}
pub fn arrow_code(a: ITerm, b: ITerm) -> ITerm {
    k2(K::Arrow, a, b)
}
pub fn ext(phi: ITerm, a: ITerm) -> ITerm {
    k2(K::Ext, phi, a)
}
pub fn pk(k: usize) -> ITerm {
    k0(K::Pk(k))
}
pub fn msub(m: ITerm, s: ITerm) -> ITerm {
    k2(K::MSub, m, s)
}
pub fn tsub(a: ITerm, s: ITerm) -> ITerm {
    k2(K::TSub, a, s)
}
pub fn comp(s: ITerm, d: ITerm) -> ITerm {
    k2(K::Comp, s, d)
}
pub fn pairh(s: ITerm, m: ITerm, a: ITerm) -> ITerm {
    ITerm::Const(K::PairH, vec![s, m, a])
}
pub fn trmc(a: ITerm) -> ITerm {
    k1(K::TrmC, a)
}
pub fn lift(phi: ITerm, a: ITerm) -> ITerm {
    k2(K::Lift, phi, a)
}
/// `⟨σ∘p, v⟩`, the lifting of `σ` under a binder of type `a`.
pub fn qsub(s: ITerm, a: ITerm) -> ITerm {
    pairh(comp(s, pk(1)), k0(K::V), a)
}
/// `v{p^k}` in canonical form.
pub fn dvar_k(k: usize) -> ITerm {
    if k == 0 {
        k0(K::V)
    } else {
        msub(k0(K::V), pk(k))
    }
}
pub fn fst_k(k: usize, u: ITerm) -> ITerm {
    (0..k).fold(u, |t, _| k1(K::Fst, t))
}

// ---------------------------------------------------------------------------
// traversal

trait Map {
    /// Replacement for `Var(z, i)` under `dc` crisp and `do_` ordinary binders.
    fn var(&self, z: Zone, dc: usize, do_: usize, i: usize) -> Result<ITerm, ()>;
}

fn map_t(t: &ITerm, dc: usize, do_: usize, m: &dyn Map) -> Result<ITerm, ()> {
    Ok(match t {
        ITerm::Var(z, i) => m.var(*z, dc, do_, *i)?,
        ITerm::Lam(a, b) => ilam(map_ty(a, dc, do_, m)?, map_t(b, dc, do_ + 1, m)?),
        ITerm::CLam(a, b) => iclam(map_ty(a, dc, do_, m)?, map_t(b, dc + 1, do_, m)?),
        ITerm::App(f, a) => iapp(map_t(f, dc, do_, m)?, map_t(a, dc, do_, m)?),
        ITerm::CApp(f, a) => icapp(map_t(f, dc, do_, m)?, map_t(a, dc, do_, m)?),
        ITerm::Box(b) => ibox(map_t(b, dc, do_, m)?),
        ITerm::Ann(b, t) => iann(map_t(b, dc, do_, m)?, map_ty(t, dc, do_, m)?),
        ITerm::LetBox(e, b) => iletbox(map_t(e, dc, do_, m)?, map_t(b, dc + 1, do_, m)?),
        ITerm::Const(k, xs) => ITerm::Const(*k, xs.iter().map(|x| map_t(x, dc, do_, m)).collect::<Result<_, _>>()?),
        ITerm::Rec(r) => {
            let n = motive_binders(r.kind);
            ITerm::Rec(Box::new(IRec {
                kind: r.kind,
                motive: map_ty(&r.motive, dc + n, do_, m)?,
                branches: r.branches.iter().map(|x| map_t(x, dc, do_, m)).collect::<Result<_, _>>()?,
                args: r.args.iter().map(|x| map_t(x, dc, do_, m)).collect::<Result<_, _>>()?,
            }))
        }
    })
}

fn map_ty(t: &IType, dc: usize, do_: usize, m: &dyn Map) -> Result<IType, ()> {
    Ok(match t {
        IType::Fn(a, b) => tfn(map_ty(a, dc, do_, m)?, map_ty(b, dc, do_ + 1, m)?),
        IType::CFn(a, b) => tcfn(map_ty(a, dc, do_, m)?, map_ty(b, dc + 1, do_, m)?),
        IType::Box(a) => tbox(map_ty(a, dc, do_, m)?),
        IType::Base(k, xs) => IType::Base(*k, xs.iter().map(|x| map_t(x, dc, do_, m)).collect::<Result<_, _>>()?),
    })
}

pub fn motive_binders(kind: RecKind) -> usize {
    kind.motive_binders()
}

struct Shift {
    zone: Zone,
    cutoff: usize,
    d: isize,
}

impl Map for Shift {
    fn var(&self, z: Zone, dc: usize, do_: usize, i: usize) -> Result<ITerm, ()> {
        let depth = if z == Zone::Crisp { dc } else { do_ };
        if z != self.zone || i < depth + self.cutoff {
            return Ok(ITerm::Var(z, i));
        }
        let j = i as isize + self.d;
        if j < (depth + self.cutoff) as isize {
            return Err(());
        }
        Ok(ITerm::Var(z, j as usize))
    }
}

struct Subst<'a> {
    zone: Zone,
    arg: &'a ITerm,
}

impl Map for Subst<'_> {
    fn var(&self, z: Zone, dc: usize, do_: usize, i: usize) -> Result<ITerm, ()> {
        let depth = if z == Zone::Crisp { dc } else { do_ };
        if z != self.zone || i < depth {
            return Ok(ITerm::Var(z, i));
        }
        if i == depth {
            let a = shift(self.arg, Zone::Crisp, 0, dc as isize);
            return Ok(shift(&a, Zone::Ord, 0, do_ as isize));
        }
        Ok(ITerm::Var(z, i - 1))
    }
}

/// Shift variables of `zone` at or above `cutoff` by `d`. Panics if a
/// variable would go negative; use [`try_shift`] to strengthen.
pub fn shift(t: &ITerm, zone: Zone, cutoff: usize, d: isize) -> ITerm {
    try_shift(t, zone, cutoff, d).expect("shift below zero")
}

pub fn try_shift(t: &ITerm, zone: Zone, cutoff: usize, d: isize) -> Option<ITerm> {
    if d == 0 {
        return Some(t.clone());
    }
    map_t(t, 0, 0, &Shift { zone, cutoff, d }).ok()
}

pub fn shift_ty(t: &IType, zone: Zone, cutoff: usize, d: isize) -> IType {
    try_shift_ty(t, zone, cutoff, d).expect("shift below zero")
}

pub fn try_shift_ty(t: &IType, zone: Zone, cutoff: usize, d: isize) -> Option<IType> {
    if d == 0 {
        return Some(t.clone());
    }
    map_ty(t, 0, 0, &Shift { zone, cutoff, d }).ok()
}

/// Substitute for variable 0 of `zone`; `arg` lives in the outer context.
pub fn subst(t: &ITerm, zone: Zone, arg: &ITerm) -> ITerm {
    map_t(t, 0, 0, &Subst { zone, arg }).expect("substitution is total")
}

pub fn subst_ty(t: &IType, zone: Zone, arg: &ITerm) -> IType {
    map_ty(t, 0, 0, &Subst { zone, arg }).expect("substitution is total")
}

/// Instantiate the innermost `args.len()` variables of `zone`; `args[0]` is
/// the outermost.
pub fn inst_ty(t: &IType, zone: Zone, args: &[ITerm]) -> IType {
    let mut t = t.clone();
    for (j, a) in args.iter().enumerate().rev() {
        t = subst_ty(&t, zone, &shift(a, zone, 0, j as isize));
    }
    t
}

pub fn inst(t: &ITerm, zone: Zone, args: &[ITerm]) -> ITerm {
    let mut t = t.clone();
    for (j, a) in args.iter().enumerate().rev() {
        t = subst(&t, zone, &shift(a, zone, 0, j as isize));
    }
    t
}

/// Motive at `args`, from a context `extra` crisp binders below the recursor.
pub fn motive_at(motive: &IType, kind: RecKind, extra: usize, args: &[ITerm]) -> IType {
    let n = motive_binders(kind);
    let m = shift_ty(motive, Zone::Crisp, n, extra as isize);
    inst_ty(&m, Zone::Crisp, args)
}

/// No free ordinary variables.
pub fn crisp_closed(t: &ITerm) -> bool {
    struct Probe;
    impl Map for Probe {
        fn var(&self, z: Zone, _dc: usize, do_: usize, i: usize) -> Result<ITerm, ()> {
            if z == Zone::Ord && i >= do_ {
                Err(())
            } else {
                Ok(ITerm::Var(z, i))
            }
        }
    }
    map_t(t, 0, 0, &Probe).is_ok()
}

pub fn mentions_crisp0(t: &IType) -> bool {
    try_shift_ty(t, Zone::Crisp, 0, -1).is_none()
}

// ---------------------------------------------------------------------------
// printer

pub struct IPrinter {
    crisp: usize,
    ord: usize,
}

impl Default for IPrinter {
    fn default() -> Self {
        Self::new()
    }
}

impl IPrinter {
    pub fn new() -> IPrinter {
        IPrinter { crisp: 0, ord: 0 }
    }

    /// Printer for terms under `crisp` and `ord` free variables.
    pub fn in_context(crisp: usize, ord: usize) -> IPrinter {
        IPrinter { crisp, ord }
    }

    fn vname(&self, z: Zone, i: usize) -> String {
        match z {
            Zone::Crisp if i < self.crisp => format!("u{}", self.crisp - 1 - i),
            Zone::Ord if i < self.ord => format!("x{}", self.ord - 1 - i),
            Zone::Crisp => format!("u?{i}"),
            Zone::Ord => format!("x?{i}"),
        }
    }

    pub fn term(&mut self, t: &ITerm) -> String {
        let mut s = String::new();
        self.t(&mut s, t, 0);
        s
    }

    pub fn ty(&mut self, t: &IType) -> String {
        let mut s = String::new();
        self.ty_(&mut s, t, 0);
        s
    }

    // prec: 0 top, 1 application head, 2 argument
    fn t(&mut self, s: &mut String, t: &ITerm, prec: u8) {
        match t {
            ITerm::Var(z, i) => s.push_str(&self.vname(*z, *i)),
            ITerm::Lam(a, b) => {
                paren(s, prec > 0, |s| {
                    let _ = write!(s, "\\x{}:", self.ord);
                    self.ty_(s, a, 1);
                    s.push_str(". ");
                    self.ord += 1;
                    self.t(s, b, 0);
                    self.ord -= 1;
                });
            }
            ITerm::CLam(a, b) => {
                paren(s, prec > 0, |s| {
                    let _ = write!(s, "\\u{}::", self.crisp);
                    self.ty_(s, a, 1);
                    s.push_str(". ");
                    self.crisp += 1;
                    self.t(s, b, 0);
                    self.crisp -= 1;
                });
            }
            ITerm::App(f, a) => paren(s, prec > 1, |s| {
                self.t(s, f, 1);
                s.push(' ');
                self.t(s, a, 2);
            }),
            ITerm::CApp(f, a) => paren(s, prec > 1, |s| {
                self.t(s, f, 1);
                s.push_str(" @");
                self.t(s, a, 2);
            }),
            ITerm::Ann(m, t) => {
                s.push('(');
                self.t(s, m, 0);
                s.push_str(" : ");
                self.ty_(s, t, 0);
                s.push(')');
            }
            ITerm::Box(m) => {
                s.push_str("box(");
                self.t(s, m, 0);
                s.push(')');
            }
            ITerm::LetBox(e, b) => paren(s, prec > 0, |s| {
                let _ = write!(s, "letbox u{} = ", self.crisp);
                self.t(s, e, 0);
                s.push_str(" in ");
                self.crisp += 1;
                self.t(s, b, 0);
                self.crisp -= 1;
            }),
            ITerm::Const(k, xs) => {
                s.push_str(&k.name());
                if !xs.is_empty() {
                    s.push('(');
                    for (i, x) in xs.iter().enumerate() {
                        if i > 0 {
                            s.push_str(", ");
                        }
                        self.t(s, x, 0);
                    }
                    s.push(')');
                }
            }
            ITerm::Rec(r) => {
                let name = match r.kind {
                    RecKind::Tm => "rec",
                    RecKind::Ty => "rec_ty",
                    RecKind::Trm => "rec_trm",
                };
                let _ = write!(s, "{name}<");
                let n = motive_binders(r.kind);
                for i in 0..n {
                    if i > 0 {
                        s.push(' ');
                    }
                    let _ = write!(s, "u{}", self.crisp + i);
                }
                s.push_str(". ");
                self.crisp += n;
                self.ty_(s, &r.motive, 0);
                self.crisp -= n;
                s.push_str(">(");
                for (i, b) in r.branches.iter().enumerate() {
                    if i > 0 {
                        s.push_str("; ");
                    }
                    self.t(s, b, 0);
                }
                s.push_str(" | ");
                for (i, a) in r.args.iter().enumerate() {
                    if i > 0 {
                        s.push_str(", ");
                    }
                    self.t(s, a, 0);
                }
                s.push(')');
            }
        }
    }

    fn ty_(&mut self, s: &mut String, t: &IType, prec: u8) {
        match t {
            IType::Fn(a, b) => paren(s, prec > 0, |s| {
                let _ = write!(s, "(x{}:", self.ord);
                self.ty_(s, a, 0);
                s.push_str(") -> ");
                self.ord += 1;
                self.ty_(s, b, 0);
                self.ord -= 1;
            }),
            IType::CFn(a, b) => paren(s, prec > 0, |s| {
                let _ = write!(s, "(u{}::", self.crisp);
                self.ty_(s, a, 0);
                s.push_str(") -> ");
                self.crisp += 1;
                self.ty_(s, b, 0);
                self.crisp -= 1;
            }),
            IType::Box(a) => {
                s.push_str("Box ");
                self.ty_(s, a, 1);
            }
            IType::Base(k, xs) => {
                s.push_str(k.name());
                if !xs.is_empty() {
                    s.push('(');
                    for (i, x) in xs.iter().enumerate() {
                        if i > 0 {
                            s.push_str(", ");
                        }
                        self.t(s, x, 0);
                    }
                    s.push(')');
                }
            }
        }
    }
}

fn paren(s: &mut String, on: bool, f: impl FnOnce(&mut String)) {
    if on {
        s.push('(');
    }
    f(s);
    if on {
        s.push(')');
    }
}

pub fn print_term(t: &ITerm) -> String {
    IPrinter::new().term(t)
}

pub fn print_type(t: &IType) -> String {
    IPrinter::new().ty(t)
}

// ---------------------------------------------------------------------------
// contexts

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Cleared {
    Box,
    CrispArg,
}

#[derive(Clone, Debug, Default)]
pub struct ICtx {
    entries: Vec<(Zone, IType)>,
    cleared: Option<Cleared>,
}

impl ICtx {
    pub fn new() -> ICtx {
        ICtx::default()
    }

    /// Crisp context with the given types, outermost first.
    pub fn crisp(tys: &[IType]) -> ICtx {
        let mut c = ICtx::new();
        for t in tys {
            c = c.push(Zone::Crisp, t.clone());
        }
        c
    }

    pub fn push(&self, z: Zone, t: IType) -> ICtx {
        let mut c = self.clone();
        c.entries.push((z, t));
        c
    }

    fn clear(&self, why: Cleared) -> ICtx {
        ICtx { entries: self.entries.iter().filter(|(z, _)| *z == Zone::Crisp).cloned().collect(), cleared: Some(why) }
    }

    pub fn boxed(&self) -> ICtx {
        self.clear(Cleared::Box)
    }

    pub fn count(&self, z: Zone) -> usize {
        self.entries.iter().filter(|(y, _)| *y == z).count()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn printer(&self) -> IPrinter {
        IPrinter::in_context(self.count(Zone::Crisp), self.count(Zone::Ord))
    }

    fn lookup(&self, z: Zone, i: usize) -> Result<IType, IError> {
        let (mut seen, mut crisp_after, mut ord_after) = (0, 0usize, 0usize);
        for (y, t) in self.entries.iter().rev() {
            if *y == z {
                if seen == i {
                    let t = shift_ty(t, Zone::Crisp, 0, crisp_after as isize + if z == Zone::Crisp { 1 } else { 0 });
                    return Ok(shift_ty(&t, Zone::Ord, 0, ord_after as isize + if z == Zone::Ord { 1 } else { 0 }));
                }
                seen += 1;
            }
            match y {
                Zone::Crisp => crisp_after += 1,
                Zone::Ord => ord_after += 1,
            }
        }
        Err(match (z, self.cleared) {
            (Zone::Ord, Some(Cleared::Box)) => IError::OrdinaryVarUnderBox,
            (Zone::Ord, Some(Cleared::CrispArg)) => IError::OpenCrispArgument,
            _ => IError::Unbound(format!("{z:?} {i}")),
        })
    }
}

// ---------------------------------------------------------------------------
// errors

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum IError {
    #[error("ordinary variable used under box")]
    OrdinaryVarUnderBox,
    #[error("crisp argument mentions an ordinary variable")]
    OpenCrispArgument,
    #[error("unknown constant {0}")]
    UnknownConstant(String),
    #[error("type mismatch: expected {expected}, got {got}")]
    TypeMismatch { expected: String, got: String },
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("ill-formed: {0}")]
    IllFormed(String),
    #[error("cannot infer a type for {0}")]
    CannotInfer(String),
    #[error("not a variable projection: {0}")]
    NotAVariable(String),
    #[error("step bound exhausted")]
    FuelExhausted,
}

impl IError {
    pub fn class(&self) -> &'static str {
        match self {
            IError::OrdinaryVarUnderBox => "OrdinaryVarUnderBox",
            IError::OpenCrispArgument => "OpenCrispArgument",
            IError::UnknownConstant(_) => "UnknownConstant",
            IError::TypeMismatch { .. } => "TypeMismatch",
            IError::Unbound(_) => "Unbound",
            IError::IllFormed(_) => "IllFormed",
            IError::CannotInfer(_) => "CannotInfer",
            IError::NotAVariable(_) => "NotAVariable",
            IError::FuelExhausted => "FuelExhausted",
        }
    }
}

pub type IResult<T> = Result<T, IError>;

pub struct IChecker {
    limit: u64,
    fuel: Cell<u64>,
    idem: Cell<u64>,
}

impl Default for IChecker {
    fn default() -> Self {
        Self::new()
    }
}

impl IChecker {
    pub fn new() -> IChecker {
        IChecker::with_fuel(crate::check::DEFAULT_FUEL)
    }

    pub fn with_fuel(limit: u64) -> IChecker {
        IChecker { limit, fuel: Cell::new(limit), idem: Cell::new(0) }
    }

    /// How often `box(letbox u = t in u) = t` has been used so far.
    pub fn idempotence_uses(&self) -> u64 {
        self.idem.get()
    }

    fn idem_used(&self) {
        self.idem.set(self.idem.get() + 1);
    }

    pub fn reset_fuel(&self) {
        self.fuel.set(self.limit);
    }

    fn tick(&self) -> IResult<()> {
        let f = self.fuel.get();
        if f == 0 {
            return Err(IError::FuelExhausted);
        }
        self.fuel.set(f - 1);
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// recursor signatures

fn tyc() -> ITerm {
    k0(K::TyC)
}
fn top() -> ITerm {
    k0(K::Top)
}
fn fn_tm(c: ITerm) -> IType {
    tfn(el(c), el(k0(K::Tm)))
}
fn closed_ty_box() -> IType {
    tbox(tm_in(top(), tyc()))
}
fn sh(t: &ITerm, d: usize) -> ITerm {
    shift(t, Zone::Crisp, 0, d as isize)
}

/// `letbox u = p in box(coe u)`: a variable object seen as a term.
pub fn up(p: ITerm) -> ITerm {
    iletbox(p, ibox(k1(K::VCoe, cv(0))))
}

fn app_prime(c: ITerm, m: ITerm, n: ITerm) -> ITerm {
    iletbox(m, iletbox(sh(&n, 1), ibox(ilam(el(sh(&c, 2)), k2(K::SApp, iapp(cv(1), ov(0)), iapp(cv(0), ov(0)))))))
}

fn lam_prime(c: ITerm, m: ITerm) -> ITerm {
    let body = k1(K::SLam, ilam(el(k0(K::Tm)), iapp(cv(0), k2(K::Pair, ov(1), ov(0)))));
    iletbox(m, ibox(ilam(el(sh(&c, 1)), body)))
}

fn arr_box(a: ITerm, b: ITerm) -> ITerm {
    iletbox(a, iletbox(sh(&b, 1), ibox(k2(K::Arr, cv(1), cv(0)))))
}

fn arrp(a: ITerm, b: ITerm) -> ITerm {
    k2(K::ArrP, a, b)
}

/// Types of the motive binders; binder `j` lives under binders `0..j`.
pub fn binder_types(kind: RecKind) -> Vec<IType> {
    match kind {
        RecKind::Tm => vec![obj(), tbox(fn_tm(cv(0)))],
        RecKind::Ty => vec![ctx_ty(), tbox(tm_in(cv(0), tyc()))],
        RecKind::Trm => vec![ctx_ty(), closed_ty_box(), tbox(tm_in(cv(1), trmc(lift(cv(1), cv(0)))))],
    }
}

/// Branch types, in the order var, app, lam (Tm); o, arr (Ty); var, lam, app (Trm).
pub fn branch_types(kind: RecKind, motive: &IType) -> Vec<IType> {
    let r = |extra: usize, args: Vec<ITerm>| motive_at(motive, kind, extra, &args);
    let tm = || k0(K::Tm);
    match kind {
        RecKind::Tm => vec![
            tcfn(obj(), tcfn(tbox(elv(cv(0), tm())), r(2, vec![cv(1), up(cv(0))]))),
            tcfn(
                obj(),
                tcfn(
                    tbox(fn_tm(cv(0))),
                    tcfn(
                        tbox(fn_tm(cv(1))),
                        tcfn(
                            r(3, vec![cv(2), cv(1)]),
                            tcfn(r(4, vec![cv(3), cv(1)]), r(5, vec![cv(4), app_prime(cv(4), cv(3), cv(2))])),
                        ),
                    ),
                ),
            ),
            tcfn(
                obj(),
                tcfn(
                    tbox(fn_tm(times(cv(0), tm()))),
                    tcfn(r(2, vec![times(cv(1), tm()), cv(0)]), r(3, vec![cv(2), lam_prime(cv(2), cv(1))])),
                ),
            ),
        ],
        RecKind::Ty => vec![
            tcfn(ctx_ty(), r(1, vec![cv(0), ibox(k0(K::O))])),
            tcfn(
                ctx_ty(),
                tcfn(
                    tbox(tm_in(cv(0), tyc())),
                    tcfn(
                        tbox(tm_in(cv(1), tyc())),
                        tcfn(
                            r(3, vec![cv(2), cv(1)]),
                            tcfn(r(4, vec![cv(3), cv(1)]), r(5, vec![cv(4), arr_box(cv(3), cv(2))])),
                        ),
                    ),
                ),
            ),
        ],
        RecKind::Trm => {
            let bty = closed_ty_box;
            let ext_a = |psi: ITerm, a: ITerm| ext(psi.clone(), trmc(lift(psi, a)));
            vec![
                tcfn(
                    ctx_ty(),
                    tcfn(
                        bty(),
                        tcfn(tbox(tmv_in(cv(1), trmc(lift(cv(1), cv(0))))), r(3, vec![cv(2), cv(1), up(cv(0))])),
                    ),
                ),
                tcfn(
                    ctx_ty(),
                    tcfn(
                        bty(),
                        tcfn(
                            bty(),
                            tcfn(
                                tbox(tm_in(ext_a(cv(2), cv(1)), trmc(lift(ext_a(cv(2), cv(1)), cv(0))))),
                                tcfn(
                                    r(4, vec![ext_a(cv(3), cv(2)), cv(1), cv(0)]),
                                    r(
                                        5,
                                        vec![
                                            cv(4),
                                            arrp(cv(3), cv(2)),
                                            ITerm::Const(K::LamP, vec![cv(4), cv(3), cv(2), cv(1)]),
                                        ],
                                    ),
                                ),
                            ),
                        ),
                    ),
                ),
                tcfn(
                    ctx_ty(),
                    tcfn(
                        bty(),
                        tcfn(
                            bty(),
                            tcfn(
                                tbox(tm_in(cv(2), trmc(lift(cv(2), arrp(cv(1), cv(0)))))),
                                tcfn(
                                    tbox(tm_in(cv(3), trmc(lift(cv(3), cv(2))))),
                                    tcfn(
                                        r(5, vec![cv(4), arrp(cv(3), cv(2)), cv(1)]),
                                        tcfn(
                                            r(6, vec![cv(5), cv(4), cv(1)]),
                                            r(
                                                7,
                                                vec![
                                                    cv(6),
                                                    cv(4),
                                                    ITerm::Const(K::AppP, vec![cv(6), cv(5), cv(4), cv(3), cv(2)]),
                                                ],
                                            ),
                                        ),
                                    ),
                                ),
                            ),
                        ),
                    ),
                ),
            ]
        }
    }
}

/// `snd (fst^k x0)`.
fn is_proj_spine(t: &ITerm) -> bool {
    let ITerm::Const(K::Snd, xs) = t else { return false };
    let mut t = &xs[0];
    loop {
        match t {
            ITerm::Var(Zone::Ord, 0) => return true,
            ITerm::Const(K::Fst, xs) => t = &xs[0],
            _ => return false,
        }
    }
}

fn fst_spine_of_x0(t: &ITerm) -> bool {
    match t {
        ITerm::Var(Zone::Ord, 0) => true,
        ITerm::Const(K::Fst, xs) => fst_spine_of_x0(&xs[0]),
        _ => false,
    }
}

fn is_dvar(t: &ITerm) -> bool {
    match t {
        ITerm::Const(K::V, _) => true,
        ITerm::Const(K::MSub, xs) => {
            matches!(xs[0], ITerm::Const(K::V, _)) && matches!(xs[1], ITerm::Const(K::Pk(_), _))
        }
        _ => false,
    }
}

/// Term valid in the empty context as is: no `v`, no weakening.
fn context_free(t: &ITerm) -> bool {
    match t {
        ITerm::Const(K::V, _) | ITerm::Const(K::Pk(_), _) => false,
        ITerm::Const(_, xs) => xs.iter().all(context_free),
        ITerm::Var(..) => true,
        ITerm::Box(_) => true,
        ITerm::App(f, a) | ITerm::CApp(f, a) => context_free(f) && context_free(a),
        ITerm::LetBox(e, b) => context_free(e) && context_free(b),
        ITerm::Rec(_) | ITerm::Lam(..) | ITerm::CLam(..) => true,
        ITerm::Ann(m, _) => context_free(m),
    }
}

fn mismatch(cx: &ICtx, want: &IType, got: &IType) -> IError {
    IError::TypeMismatch { expected: cx.printer().ty(want), got: cx.printer().ty(got) }
}

fn mismatch_tm(cx: &ICtx, want: &ITerm, got: &ITerm) -> IError {
    IError::TypeMismatch { expected: cx.printer().term(want), got: cx.printer().term(got) }
}

fn apply(f: &ITerm, args: Vec<ITerm>) -> ITerm {
    args.into_iter().fold(f.clone(), icapp)
}

// ---------------------------------------------------------------------------
// checking

impl IChecker {
    pub fn wf_type(&self, cx: &ICtx, t: &IType) -> IResult<()> {
        self.tick()?;
        match t {
            IType::Fn(a, b) => {
                self.wf_type(cx, a)?;
                self.wf_type(&cx.push(Zone::Ord, (**a).clone()), b)
            }
            IType::CFn(a, b) => {
                self.wf_type(cx, a)?;
                self.wf_type(&cx.push(Zone::Crisp, (**a).clone()), b)
            }
            IType::Box(a) => self.wf_type(&cx.boxed(), a),
            IType::Base(k, xs) => {
                if xs.len() != k.arity() {
                    return Err(IError::IllFormed(format!("{} expects {} arguments", k.name(), k.arity())));
                }
                match k {
                    TK::Obj | TK::Bool | TK::Ctx => Ok(()),
                    TK::El => self.check(cx, &xs[0], &obj()),
                    TK::ElV => {
                        self.check(cx, &xs[0], &obj())?;
                        self.check(cx, &xs[1], &obj())
                    }
                    TK::Ty => self.ctx_check(cx, &xs[0]),
                    TK::Tm | TK::TmV => {
                        self.ctx_check(cx, &xs[0])?;
                        self.ty_check(cx, &xs[0], &xs[1])
                    }
                    TK::Hom => {
                        self.ctx_check(cx, &xs[0])?;
                        self.ctx_check(cx, &xs[1])
                    }
                }
            }
        }
    }

    pub fn check(&self, cx: &ICtx, m: &ITerm, t: &IType) -> IResult<()> {
        self.tick()?;
        match (m, t) {
            (ITerm::Lam(a, b), IType::Fn(a2, b2)) => {
                self.wf_type(cx, a)?;
                self.conv_type(cx, a2, a)?;
                self.check(&cx.push(Zone::Ord, (**a2).clone()), b, b2)
            }
            (ITerm::CLam(a, b), IType::CFn(a2, b2)) => {
                self.wf_type(cx, a)?;
                self.conv_type(cx, a2, a)?;
                self.check(&cx.push(Zone::Crisp, (**a2).clone()), b, b2)
            }
            (ITerm::Box(b), IType::Box(s)) => self.check(&cx.boxed(), b, s),
            (ITerm::LetBox(e, b), _) => {
                let s = self.infer_box(cx, e)?;
                self.check(&cx.push(Zone::Crisp, s), b, &shift_ty(t, Zone::Crisp, 0, 1))
            }
            (ITerm::Const(K::VMark, xs), IType::Base(TK::ElV, a)) if xs.len() == 1 => {
                self.check(cx, &xs[0], &tfn(el(a[0].clone()), el(shift(&a[1], Zone::Ord, 0, 1))))?;
                self.var_shape(&xs[0])
            }
            (ITerm::Const(K::VMark, xs), IType::Base(TK::TmV, a)) if xs.len() == 1 => {
                self.check(cx, &xs[0], &tm_in(a[0].clone(), a[1].clone()))?;
                self.var_shape(&xs[0])
            }
            (_, IType::Base(TK::Tm, a)) if a.len() == 2 => {
                let got = self.tm_infer(cx, &a[0], m)?;
                self.conv_at(cx, &a[1], &got, &ty_in(a[0].clone()))
            }
            (_, IType::Base(TK::Hom, a)) if a.len() == 2 => {
                let got = self.hom_infer(cx, &a[0], m)?;
                self.conv_at(cx, &a[1], &got, &ctx_ty())
            }
            (_, IType::Base(TK::Ty, a)) if a.len() == 1 => self.ty_check(cx, &a[0], m),
            (_, IType::Base(TK::Ctx, _)) => self.ctx_check(cx, m),
            _ => {
                let got = self.infer(cx, m)?;
                self.conv_type(cx, t, &got)
            }
        }
    }

    fn var_shape(&self, m: &ITerm) -> IResult<()> {
        let n = self.normalize(m)?;
        let ok = match &n {
            ITerm::Lam(_, body) => {
                is_proj_spine(body)
                    || matches!(&**body, ITerm::App(f, a)
                        if matches!(&**f, ITerm::Const(K::VCoe, _)) && fst_spine_of_x0(a))
            }
            ITerm::Const(K::VCoe, _) => true,
            ITerm::Const(K::MSub, xs) => {
                matches!(xs[0], ITerm::Const(K::V, _) | ITerm::Const(K::VCoe, _))
                    && matches!(xs[1], ITerm::Const(K::Pk(_), _))
            }
            ITerm::Const(K::V, _) => true,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(IError::NotAVariable(print_term(&n)))
        }
    }

    fn infer_box(&self, cx: &ICtx, e: &ITerm) -> IResult<IType> {
        match self.infer(cx, e)? {
            IType::Box(s) => Ok(*s),
            t => Err(mismatch(cx, &tbox(IType::Base(TK::Obj, vec![])), &t)),
        }
    }

    fn strengthen_ty(&self, cx1: &ICtx, t: &IType) -> IResult<IType> {
        if let Some(t) = try_shift_ty(t, Zone::Crisp, 0, -1) {
            return Ok(t);
        }
        let n = self.nf_type(cx1, t)?;
        try_shift_ty(&n, Zone::Crisp, 0, -1).ok_or_else(|| IError::CannotInfer("letbox with a dependent result".into()))
    }

    fn strengthen_tm(&self, t: &ITerm) -> IResult<ITerm> {
        if let Some(t) = try_shift(t, Zone::Crisp, 0, -1) {
            return Ok(t);
        }
        let n = self.normalize(t)?;
        try_shift(&n, Zone::Crisp, 0, -1).ok_or_else(|| IError::CannotInfer("letbox with a dependent result".into()))
    }

    pub fn infer(&self, cx: &ICtx, m: &ITerm) -> IResult<IType> {
        self.tick()?;
        match m {
            ITerm::Var(z, i) => cx.lookup(*z, *i),
            ITerm::Lam(a, b) => {
                self.wf_type(cx, a)?;
                let bt = self.infer(&cx.push(Zone::Ord, (**a).clone()), b)?;
                Ok(tfn((**a).clone(), bt))
            }
            ITerm::CLam(a, b) => {
                self.wf_type(cx, a)?;
                let bt = self.infer(&cx.push(Zone::Crisp, (**a).clone()), b)?;
                Ok(tcfn((**a).clone(), bt))
            }
            ITerm::App(f, a) => match self.infer(cx, f)? {
                IType::Fn(a1, b1) => {
                    self.check(cx, a, &a1)?;
                    Ok(subst_ty(&b1, Zone::Ord, a))
                }
                t => Err(IError::TypeMismatch { expected: "a function".into(), got: cx.printer().ty(&t) }),
            },
            ITerm::CApp(f, a) => match self.infer(cx, f)? {
                IType::CFn(a1, b1) => {
                    self.check(&cx.clear(Cleared::CrispArg), a, &a1)?;
                    Ok(subst_ty(&b1, Zone::Crisp, a))
                }
                t => Err(IError::TypeMismatch { expected: "a crisp function".into(), got: cx.printer().ty(&t) }),
            },
            ITerm::Box(b) => Ok(tbox(self.infer(&cx.boxed(), b)?)),
            ITerm::Ann(m, t) => {
                self.wf_type(cx, t)?;
                self.check(cx, m, t)?;
                Ok((**t).clone())
            }
            ITerm::LetBox(e, b) => {
                let s = self.infer_box(cx, e)?;
                let cx1 = cx.push(Zone::Crisp, s);
                let t = self.infer(&cx1, b)?;
                self.strengthen_ty(&cx1, &t)
            }
            ITerm::Const(k, xs) => self.infer_const(cx, *k, xs),
            ITerm::Rec(r) => self.infer_rec(cx, r),
        }
    }

    fn el_code(&self, cx: &ICtx, x: &ITerm) -> IResult<ITerm> {
        match self.infer(cx, x)? {
            IType::Base(TK::El, a) => Ok(a[0].clone()),
            t => Err(mismatch(cx, &el(k0(K::Tm)), &t)),
        }
    }

    fn el_fn_codes(&self, cx: &ICtx, g: &ITerm) -> IResult<(ITerm, ITerm)> {
        let t = self.infer(cx, g)?;
        if let IType::Fn(a, b) = &t {
            if let (IType::Base(TK::El, x), IType::Base(TK::El, y)) = (&**a, &**b) {
                if let Some(y0) = try_shift(&y[0], Zone::Ord, 0, -1) {
                    return Ok((x[0].clone(), y0));
                }
            }
        }
        Err(mismatch(cx, &fn_tm(k0(K::Tm)), &t))
    }

    fn infer_const(&self, cx: &ICtx, k: K, xs: &[ITerm]) -> IResult<IType> {
        if xs.len() != k.arity() {
            return Err(IError::IllFormed(format!("{} expects {} arguments", k.name(), k.arity())));
        }
        let tm = || k0(K::Tm);
        match k {
            K::Tm | K::Unit => Ok(obj()),
            K::Times | K::Arrow => {
                self.check(cx, &xs[0], &obj())?;
                self.check(cx, &xs[1], &obj())?;
                Ok(obj())
            }
            K::Terminal => Ok(el(k0(K::Unit))),
            K::Pair => Ok(el(times(self.el_code(cx, &xs[0])?, self.el_code(cx, &xs[1])?))),
            K::Fst | K::Snd => {
                let c = self.el_code(cx, &xs[0])?;
                match self.whnf(&c)? {
                    ITerm::Const(K::Times, ab) => Ok(el(ab[if k == K::Fst { 0 } else { 1 }].clone())),
                    c => Err(mismatch(cx, &el(times(tm(), tm())), &el(c))),
                }
            }
            K::ArrowI => {
                let (a, b) = self.el_fn_codes(cx, &xs[0])?;
                Ok(el(arrow_code(a, b)))
            }
            K::ArrowE => {
                let c = self.el_code(cx, &xs[0])?;
                match self.whnf(&c)? {
                    ITerm::Const(K::Arrow, ab) => Ok(tfn(el(ab[0].clone()), el(shift(&ab[1], Zone::Ord, 0, 1)))),
                    c => Err(mismatch(cx, &el(arrow_code(tm(), tm())), &el(c))),
                }
            }
            K::SApp => {
                self.check(cx, &xs[0], &el(tm()))?;
                self.check(cx, &xs[1], &el(tm()))?;
                Ok(el(tm()))
            }
            K::SLam => {
                self.check(cx, &xs[0], &fn_tm(tm()))?;
                Ok(el(tm()))
            }
            K::True | K::False => Ok(bool_ty()),
            K::VMark => {
                let (c, a) = self.el_fn_codes(cx, &xs[0])?;
                self.var_shape(&xs[0])?;
                Ok(elv(c, a))
            }
            K::VCoe => match self.infer(cx, &xs[0])? {
                IType::Base(TK::ElV, a) => Ok(tfn(el(a[0].clone()), el(shift(&a[1], Zone::Ord, 0, 1)))),
                IType::Base(TK::TmV, a) => Ok(tm_in(a[0].clone(), a[1].clone())),
                t => Err(mismatch(cx, &elv(tm(), tm()), &t)),
            },
            K::Open => match self.infer(&cx.boxed(), &xs[0])? {
                IType::Box(s) => Ok(*s),
                t => Err(mismatch(cx, &tbox(obj()), &t)),
            },
            K::Top => Ok(ctx_ty()),
            K::Ext => {
                self.ctx_check(cx, &xs[0])?;
                self.ty_check(cx, &xs[0], &xs[1])?;
                Ok(ctx_ty())
            }
            K::Lift => {
                self.ctx_check(cx, &xs[0])?;
                self.check(cx, &xs[1], &closed_ty_box())?;
                Ok(tm_in(xs[0].clone(), tyc()))
            }
            K::ArrP => {
                self.check(cx, &xs[0], &closed_ty_box())?;
                self.check(cx, &xs[1], &closed_ty_box())?;
                Ok(closed_ty_box())
            }
            K::LamP => {
                let (psi, a, b) = (&xs[0], &xs[1], &xs[2]);
                self.ctx_check(cx, psi)?;
                self.check(cx, a, &closed_ty_box())?;
                self.check(cx, b, &closed_ty_box())?;
                let psi1 = ext(psi.clone(), trmc(lift(psi.clone(), a.clone())));
                self.check(cx, &xs[3], &tbox(tm_in(psi1.clone(), trmc(lift(psi1, b.clone())))))?;
                Ok(tbox(tm_in(psi.clone(), trmc(lift(psi.clone(), arrp(a.clone(), b.clone()))))))
            }
            K::AppP => {
                let (psi, a, b) = (&xs[0], &xs[1], &xs[2]);
                self.ctx_check(cx, psi)?;
                self.check(cx, a, &closed_ty_box())?;
                self.check(cx, b, &closed_ty_box())?;
                self.check(cx, &xs[3], &tbox(tm_in(psi.clone(), trmc(lift(psi.clone(), arrp(a.clone(), b.clone()))))))?;
                self.check(cx, &xs[4], &tbox(tm_in(psi.clone(), trmc(lift(psi.clone(), a.clone())))))?;
                Ok(tbox(tm_in(psi.clone(), trmc(lift(psi.clone(), b.clone())))))
            }
            _ => Err(IError::CannotInfer(format!("{} needs its context from the expected type", k.name()))),
        }
    }

    /// Type (a code in `Ty(phi)`) of a term in `Tm(phi, _)`.
    pub fn tm_infer(&self, cx: &ICtx, phi: &ITerm, m: &ITerm) -> IResult<ITerm> {
        self.tick()?;
        let arity = |xs: &[ITerm], k: K| {
            if xs.len() == k.arity() {
                Ok(())
            } else {
                Err(IError::IllFormed(format!("{} expects {} arguments", k.name(), k.arity())))
            }
        };
        let tmc = |a: ITerm| tm_in(phi.clone(), a);
        match m {
            ITerm::Const(k, xs) => {
                arity(xs, *k)?;
                match k {
                    K::V => match self.whnf(phi)? {
                        ITerm::Const(K::Ext, pa) => Ok(tsub(pa[1].clone(), pk(1))),
                        p => Err(IError::IllFormed(format!("v in context {}", cx.printer().term(&p)))),
                    },
                    K::MSub => {
                        let psi = self.hom_infer(cx, phi, &xs[1])?;
                        let a = self.tm_infer(cx, &psi, &xs[0])?;
                        Ok(tsub(a, xs[1].clone()))
                    }
                    K::Abs => {
                        self.ty_check(cx, phi, &xs[0])?;
                        let b = self.tm_infer(cx, &ext(phi.clone(), xs[0].clone()), &xs[1])?;
                        Ok(k2(K::Pi, xs[0].clone(), b))
                    }
                    K::AppT => {
                        let ft = self.tm_infer(cx, phi, &xs[0])?;
                        match self.whnf(&ft)? {
                            ITerm::Const(K::Pi, ab) => {
                                self.check(cx, &xs[1], &tmc(ab[0].clone()))?;
                                Ok(tsub(ab[1].clone(), pairh(pk(0), xs[1].clone(), ab[0].clone())))
                            }
                            t => Err(mismatch_tm(cx, &k2(K::Pi, tyc(), tyc()), &t)),
                        }
                    }
                    K::O => Ok(tyc()),
                    K::Arr => {
                        self.check(cx, &xs[0], &tmc(tyc()))?;
                        self.check(cx, &xs[1], &tmc(tyc()))?;
                        Ok(tyc())
                    }
                    K::DLam => {
                        self.check(cx, &xs[0], &tmc(tyc()))?;
                        self.check(cx, &xs[1], &tmc(tyc()))?;
                        let phi1 = ext(phi.clone(), trmc(xs[0].clone()));
                        self.check(cx, &xs[2], &tm_in(phi1, trmc(msub(xs[1].clone(), pk(1)))))?;
                        Ok(trmc(k2(K::Arr, xs[0].clone(), xs[1].clone())))
                    }
                    K::DApp => {
                        self.check(cx, &xs[0], &tmc(tyc()))?;
                        self.check(cx, &xs[1], &tmc(tyc()))?;
                        self.check(cx, &xs[2], &tmc(trmc(k2(K::Arr, xs[0].clone(), xs[1].clone()))))?;
                        self.check(cx, &xs[3], &tmc(trmc(xs[0].clone())))?;
                        Ok(trmc(xs[1].clone()))
                    }
                    K::Lift => {
                        self.conv_at(cx, phi, &xs[0], &ctx_ty())?;
                        self.check(cx, &xs[1], &closed_ty_box())?;
                        Ok(tyc())
                    }
                    _ => self.tm_generic(cx, phi, m),
                }
            }
            ITerm::LetBox(e, b) => {
                let s = self.infer_box(cx, e)?;
                let a = self.tm_infer(&cx.push(Zone::Crisp, s), &sh(phi, 1), b)?;
                self.strengthen_tm(&a)
            }
            _ => self.tm_generic(cx, phi, m),
        }
    }

    fn tm_generic(&self, cx: &ICtx, phi: &ITerm, m: &ITerm) -> IResult<ITerm> {
        match self.infer(cx, m)? {
            IType::Base(TK::Tm, a) => {
                self.conv_at(cx, phi, &a[0], &ctx_ty())?;
                Ok(a[1].clone())
            }
            t => Err(mismatch(cx, &tm_in(phi.clone(), tyc()), &t)),
        }
    }

    /// Target of a substitution out of `phi`.
    pub fn hom_infer(&self, cx: &ICtx, phi: &ITerm, s: &ITerm) -> IResult<ITerm> {
        self.tick()?;
        match s {
            ITerm::Const(K::Bang, _) => Ok(top()),
            ITerm::Const(K::Pk(k), _) => {
                let mut p = phi.clone();
                for _ in 0..*k {
                    p = match self.whnf(&p)? {
                        ITerm::Const(K::Ext, pa) => pa[0].clone(),
                        q => return Err(IError::IllFormed(format!("weakening past {}", cx.printer().term(&q)))),
                    };
                }
                Ok(p)
            }
            ITerm::Const(K::PairH, xs) if xs.len() == 3 => {
                let psi = self.hom_infer(cx, phi, &xs[0])?;
                self.ty_check(cx, &psi, &xs[2])?;
                self.check(cx, &xs[1], &tm_in(phi.clone(), tsub(xs[2].clone(), xs[0].clone())))?;
                Ok(ext(psi, xs[2].clone()))
            }
            ITerm::Const(K::Comp, xs) if xs.len() == 2 => {
                let theta = self.hom_infer(cx, phi, &xs[1])?;
                self.hom_infer(cx, &theta, &xs[0])
            }
            _ => match self.infer(cx, s)? {
                IType::Base(TK::Hom, a) => {
                    self.conv_at(cx, phi, &a[0], &ctx_ty())?;
                    Ok(a[1].clone())
                }
                t => Err(mismatch(cx, &hom(phi.clone(), top()), &t)),
            },
        }
    }

    pub fn ty_check(&self, cx: &ICtx, phi: &ITerm, a: &ITerm) -> IResult<()> {
        self.tick()?;
        match a {
            ITerm::Const(K::TyC, xs) if xs.is_empty() => Ok(()),
            ITerm::Const(K::TrmC, xs) if xs.len() == 1 => self.check(cx, &xs[0], &tm_in(phi.clone(), tyc())),
            ITerm::Const(K::Pi, xs) if xs.len() == 2 => {
                self.ty_check(cx, phi, &xs[0])?;
                self.ty_check(cx, &ext(phi.clone(), xs[0].clone()), &xs[1])
            }
            ITerm::Const(K::TSub, xs) if xs.len() == 2 => {
                let psi = self.hom_infer(cx, phi, &xs[1])?;
                self.ty_check(cx, &psi, &xs[0])
            }
            ITerm::LetBox(e, b) => {
                let s = self.infer_box(cx, e)?;
                self.ty_check(&cx.push(Zone::Crisp, s), &sh(phi, 1), b)
            }
            _ => match self.infer(cx, a)? {
                IType::Base(TK::Ty, p) => self.conv_at(cx, phi, &p[0], &ctx_ty()),
                t => Err(mismatch(cx, &ty_in(phi.clone()), &t)),
            },
        }
    }

    pub fn ctx_check(&self, cx: &ICtx, p: &ITerm) -> IResult<()> {
        self.tick()?;
        match p {
            ITerm::Const(K::Top, xs) if xs.is_empty() => Ok(()),
            ITerm::Const(K::Ext, xs) if xs.len() == 2 => {
                self.ctx_check(cx, &xs[0])?;
                self.ty_check(cx, &xs[0], &xs[1])
            }
            ITerm::LetBox(e, b) => {
                let s = self.infer_box(cx, e)?;
                self.ctx_check(&cx.push(Zone::Crisp, s), b)
            }
            _ => match self.infer(cx, p)? {
                IType::Base(TK::Ctx, _) => Ok(()),
                t => Err(mismatch(cx, &ctx_ty(), &t)),
            },
        }
    }

    fn infer_rec(&self, cx: &ICtx, r: &IRec) -> IResult<IType> {
        let n = motive_binders(r.kind);
        let bts = binder_types(r.kind);
        if r.args.len() != n {
            return Err(IError::IllFormed(format!("recursor expects {n} arguments")));
        }
        if r.branches.len() != r.kind.branch_count() {
            return Err(IError::IllFormed(format!("recursor expects {} branches", r.kind.branch_count())));
        }
        let mut mcx = cx.clone();
        for t in &bts {
            mcx = mcx.push(Zone::Crisp, t.clone());
        }
        self.wf_type(&mcx, &r.motive)?;
        let crisp = cx.clear(Cleared::CrispArg);
        for (b, t) in r.branches.iter().zip(branch_types(r.kind, &r.motive)) {
            self.check(&crisp, b, &t)?;
        }
        for (j, a) in r.args.iter().enumerate() {
            let t = inst_ty(&bts[j], Zone::Crisp, &r.args[..j]);
            self.check(&crisp, a, &t)?;
        }
        Ok(motive_at(&r.motive, r.kind, 0, &r.args))
    }

    // -----------------------------------------------------------------------
    // conversion

    pub fn conv_type(&self, cx: &ICtx, want: &IType, got: &IType) -> IResult<()> {
        if want == got || self.nf_type(cx, want)? == self.nf_type(cx, got)? {
            Ok(())
        } else {
            Err(mismatch(cx, want, got))
        }
    }

    fn conv_at(&self, cx: &ICtx, want: &ITerm, got: &ITerm, t: &IType) -> IResult<()> {
        if self.iequal(cx, want, got, t)? {
            Ok(())
        } else {
            Err(mismatch_tm(cx, want, got))
        }
    }

    /// Equality of two terms at a type, by comparing η-long normal forms.
    pub fn iequal(&self, cx: &ICtx, a: &ITerm, b: &ITerm, t: &IType) -> IResult<bool> {
        if a == b {
            return Ok(true);
        }
        Ok(self.nf(cx, a, t)? == self.nf(cx, b, t)?)
    }

    // -----------------------------------------------------------------------
    // reduction

    pub fn whnf(&self, m: &ITerm) -> IResult<ITerm> {
        match m {
            ITerm::App(f, a) => match self.whnf(f)? {
                ITerm::Lam(_, b) => {
                    self.tick()?;
                    self.whnf(&subst(&b, Zone::Ord, a))
                }
                f => Ok(iapp(f, (**a).clone())),
            },
            ITerm::CApp(f, a) => match self.whnf(f)? {
                ITerm::CLam(_, b) => {
                    self.tick()?;
                    self.whnf(&subst(&b, Zone::Crisp, a))
                }
                f => Ok(icapp(f, (**a).clone())),
            },
            ITerm::LetBox(e, b) => match self.whnf(e)? {
                ITerm::Box(v) => {
                    self.tick()?;
                    self.whnf(&subst(b, Zone::Crisp, &v))
                }
                e if crisp_closed(&e) => {
                    self.tick()?;
                    self.whnf(&subst(b, Zone::Crisp, &k1(K::Open, e)))
                }
                e => Ok(iletbox(e, (**b).clone())),
            },
            ITerm::Box(b) => match &**b {
                ITerm::Const(K::Open, xs) if xs.len() == 1 => {
                    self.tick()?;
                    self.idem_used();
                    self.whnf(&xs[0])
                }
                _ => Ok(m.clone()),
            },
            ITerm::Const(k, xs) if xs.len() == k.arity() => self.whnf_const(*k, xs),
            ITerm::Rec(r) => self.whnf_rec(r),
            ITerm::Ann(m, _) => self.whnf(m),
            _ => Ok(m.clone()),
        }
    }

    fn whnf_const(&self, k: K, xs: &[ITerm]) -> IResult<ITerm> {
        let x = |i: usize| xs[i].clone();
        match k {
            K::Fst | K::Snd => match self.whnf(&xs[0])? {
                ITerm::Const(K::Pair, p) => {
                    self.tick()?;
                    self.whnf(&p[if k == K::Fst { 0 } else { 1 }])
                }
                z => Ok(k1(k, z)),
            },
            K::ArrowE => match self.whnf(&xs[0])? {
                ITerm::Const(K::ArrowI, g) => {
                    self.tick()?;
                    self.whnf(&g[0])
                }
                f => Ok(k1(k, f)),
            },
            K::ArrowI => match self.whnf(&xs[0])? {
                ITerm::Const(K::ArrowE, f) => {
                    self.tick()?;
                    self.whnf(&f[0])
                }
                g => Ok(k1(k, g)),
            },
            K::VCoe => match self.whnf(&xs[0])? {
                ITerm::Const(K::VMark, m) => {
                    self.tick()?;
                    self.whnf(&m[0])
                }
                v => Ok(k1(k, v)),
            },
            K::Open => match self.whnf(&xs[0])? {
                ITerm::Box(m) => {
                    self.tick()?;
                    self.whnf(&m)
                }
                t => Ok(k1(k, t)),
            },
            K::Lift => {
                self.tick()?;
                self.whnf(&iletbox(x(1), msub(cv(0), k0(K::Bang))))
            }
            K::ArrP => {
                self.tick()?;
                self.whnf(&arr_box(x(0), x(1)))
            }
            K::LamP => {
                self.tick()?;
                let body = ITerm::Const(
                    K::DLam,
                    vec![lift(sh(&xs[0], 1), sh(&xs[1], 1)), lift(sh(&xs[0], 1), sh(&xs[2], 1)), cv(0)],
                );
                self.whnf(&iletbox(x(3), ibox(body)))
            }
            K::AppP => {
                self.tick()?;
                let body = ITerm::Const(
                    K::DApp,
                    vec![lift(sh(&xs[0], 2), sh(&xs[1], 2)), lift(sh(&xs[0], 2), sh(&xs[2], 2)), cv(1), cv(0)],
                );
                self.whnf(&iletbox(x(3), iletbox(sh(&xs[4], 1), ibox(body))))
            }
            K::AppT => match self.whnf(&xs[0])? {
                ITerm::Const(K::Abs, ab) => {
                    self.tick()?;
                    self.whnf(&msub(ab[1].clone(), pairh(pk(0), x(1), ab[0].clone())))
                }
                f => Ok(k2(K::AppT, f, x(1))),
            },
            K::MSub => self.whnf_msub(&xs[0], &xs[1]),
            K::TSub => self.whnf_tsub(&xs[0], &xs[1]),
            K::Comp => self.whnf_comp(&xs[0], &xs[1]),
            _ => Ok(ITerm::Const(k, xs.to_vec())),
        }
    }

    fn whnf_msub(&self, n: &ITerm, s: &ITerm) -> IResult<ITerm> {
        let s2 = self.whnf(s)?;
        if s2 == pk(0) {
            return self.whnf(n);
        }
        let n2 = self.whnf(n)?;
        self.tick()?;
        let sub = |t: &ITerm| msub(t.clone(), s2.clone());
        Ok(match &n2 {
            ITerm::Const(K::V, _) => match &s2 {
                ITerm::Const(K::PairH, p) => return self.whnf(&p[1]),
                _ => msub(n2.clone(), s2.clone()),
            },
            ITerm::Const(K::MSub, xs) if matches!(xs[0], ITerm::Const(K::V, _)) => {
                return self.whnf(&msub(xs[0].clone(), comp(xs[1].clone(), s2.clone())));
            }
            ITerm::Const(K::MSub, xs) => msub(xs[0].clone(), comp(xs[1].clone(), s2.clone())),
            ITerm::Const(K::O, _) => n2.clone(),
            ITerm::Const(K::Arr, xs) => k2(K::Arr, sub(&xs[0]), sub(&xs[1])),
            ITerm::Const(K::DLam, xs) => ITerm::Const(
                K::DLam,
                vec![sub(&xs[0]), sub(&xs[1]), msub(xs[2].clone(), qsub(s2.clone(), trmc(xs[0].clone())))],
            ),
            ITerm::Const(K::DApp, xs) => ITerm::Const(K::DApp, xs.iter().map(sub).collect()),
            ITerm::Const(K::Abs, xs) => {
                k2(K::Abs, tsub(xs[0].clone(), s2.clone()), msub(xs[1].clone(), qsub(s2.clone(), xs[0].clone())))
            }
            ITerm::Const(K::AppT, xs) => return self.whnf(&k2(K::AppT, sub(&xs[0]), sub(&xs[1]))),
            ITerm::LetBox(e, b) => iletbox((**e).clone(), msub((**b).clone(), sh(&s2, 1))),
            _ => msub(n2.clone(), s2.clone()),
        })
    }

    fn whnf_tsub(&self, a: &ITerm, s: &ITerm) -> IResult<ITerm> {
        let s2 = self.whnf(s)?;
        if s2 == pk(0) {
            return self.whnf(a);
        }
        let a2 = self.whnf(a)?;
        self.tick()?;
        Ok(match &a2 {
            ITerm::Const(K::TyC, _) => a2.clone(),
            ITerm::Const(K::TrmC, xs) => trmc(msub(xs[0].clone(), s2)),
            ITerm::Const(K::Pi, xs) => {
                k2(K::Pi, tsub(xs[0].clone(), s2.clone()), tsub(xs[1].clone(), qsub(s2, xs[0].clone())))
            }
            ITerm::Const(K::TSub, xs) => return self.whnf(&tsub(xs[0].clone(), comp(xs[1].clone(), s2))),
            ITerm::LetBox(e, b) => iletbox((**e).clone(), tsub((**b).clone(), sh(&s2, 1))),
            _ => tsub(a2.clone(), s2),
        })
    }

    fn whnf_comp(&self, s: &ITerm, d: &ITerm) -> IResult<ITerm> {
        let d2 = self.whnf(d)?;
        let s2 = self.whnf(s)?;
        if d2 == pk(0) {
            return Ok(s2);
        }
        self.tick()?;
        match &s2 {
            ITerm::Const(K::Pk(0), _) => Ok(d2),
            ITerm::Const(K::Bang, _) => Ok(s2.clone()),
            ITerm::Const(K::PairH, p) => {
                Ok(pairh(comp(p[0].clone(), d2.clone()), msub(p[1].clone(), d2), p[2].clone()))
            }
            ITerm::Const(K::Pk(k), _) => match &d2 {
                ITerm::Const(K::Pk(j), _) => Ok(pk(k + j)),
                ITerm::Const(K::PairH, p) => self.whnf(&comp(pk(k - 1), p[0].clone())),
                ITerm::Const(K::Comp, c) if matches!(c[0], ITerm::Const(K::Pk(_), _)) => {
                    let ITerm::Const(K::Pk(j), _) = c[0] else { unreachable!() };
                    Ok(comp(pk(k + j), c[1].clone()))
                }
                _ => Ok(comp(s2.clone(), d2)),
            },
            ITerm::Const(K::Comp, c) => Ok(comp(c[0].clone(), comp(c[1].clone(), d2))),
            _ => Ok(comp(s2.clone(), d2)),
        }
    }

    fn whnf_rec(&self, r: &IRec) -> IResult<ITerm> {
        let last = r.args.len() - 1;
        let s = self.whnf(&r.args[last])?;
        let with = |args: Vec<ITerm>| {
            ITerm::Rec(Box::new(IRec { kind: r.kind, motive: r.motive.clone(), branches: r.branches.clone(), args }))
        };
        let mut stuck_args = r.args.clone();
        stuck_args[last] = s.clone();
        let ITerm::Box(m) = &s else { return Ok(with(stuck_args)) };
        let b = &r.branches;
        let fired = match r.kind {
            RecKind::Tm => {
                let c = r.args[0].clone();
                let (a, body) = match self.whnf(m)? {
                    ITerm::Lam(a, body) => (*a, self.whnf(&body)?),
                    f => (el(c.clone()), self.whnf(&iapp(shift(&f, Zone::Ord, 0, 1), ov(0)))?),
                };
                if is_proj_spine(&body) {
                    Some(apply(&b[0], vec![c, ibox(k1(K::VMark, ilam(a, body)))]))
                } else {
                    match &body {
                        ITerm::Const(K::SApp, xs) => {
                            let s1 = ibox(ilam(a.clone(), xs[0].clone()));
                            let s2 = ibox(ilam(a, xs[1].clone()));
                            let f1 = with(vec![c.clone(), s1.clone()]);
                            let f2 = with(vec![c.clone(), s2.clone()]);
                            Some(apply(&b[1], vec![c, s1, s2, f1, f2]))
                        }
                        ITerm::Const(K::SLam, xs) => {
                            let gb = match self.whnf(&xs[0])? {
                                ITerm::Lam(_, gb) => *gb,
                                g => iapp(shift(&g, Zone::Ord, 0, 1), ov(0)),
                            };
                            let gb = shift(&gb, Zone::Ord, 2, 1);
                            let w = ov(0);
                            let body = inst(&gb, Zone::Ord, &[k1(K::Fst, w.clone()), k1(K::Snd, w)]);
                            let c1 = times(c.clone(), k0(K::Tm));
                            let s1 = ibox(ilam(el(c1.clone()), body));
                            Some(apply(&b[2], vec![c, s1.clone(), with(vec![c1, s1])]))
                        }
                        _ => None,
                    }
                }
            }
            RecKind::Ty => {
                let psi = r.args[0].clone();
                match self.whnf(m)? {
                    ITerm::Const(K::O, _) => Some(apply(&b[0], vec![psi])),
                    ITerm::Const(K::Arr, xs) => {
                        let (ba, bb) = (ibox(xs[0].clone()), ibox(xs[1].clone()));
                        let fa = with(vec![psi.clone(), ba.clone()]);
                        let fb = with(vec![psi.clone(), bb.clone()]);
                        Some(apply(&b[1], vec![psi, ba, bb, fa, fb]))
                    }
                    _ => None,
                }
            }
            RecKind::Trm => {
                let (psi, a) = (r.args[0].clone(), r.args[1].clone());
                let m = self.whnf(m)?;
                let closed = |t: &ITerm| -> IResult<Option<ITerm>> {
                    let n = self.normalize(t)?;
                    Ok(context_free(&n).then_some(n))
                };
                match &m {
                    _ if is_dvar(&m) => Some(apply(&b[0], vec![psi, a, ibox(k1(K::VMark, m.clone()))])),
                    ITerm::Const(K::DLam, xs) => match (closed(&xs[0])?, closed(&xs[1])?) {
                        (Some(ac), Some(bc)) => {
                            let body = ibox(xs[2].clone());
                            let psi1 = ext(psi.clone(), trmc(xs[0].clone()));
                            let f = with(vec![psi1, ibox(bc.clone()), body.clone()]);
                            Some(apply(&b[1], vec![psi, ibox(ac), ibox(bc), body, f]))
                        }
                        _ => None,
                    },
                    ITerm::Const(K::DApp, xs) => match (closed(&xs[0])?, closed(&xs[1])?) {
                        (Some(ac), Some(bc)) => {
                            let (bm, bn) = (ibox(xs[2].clone()), ibox(xs[3].clone()));
                            let fm = with(vec![psi.clone(), ibox(k2(K::Arr, ac.clone(), bc.clone())), bm.clone()]);
                            let fn_ = with(vec![psi.clone(), ibox(ac.clone()), bn.clone()]);
                            Some(apply(&b[2], vec![psi, ibox(ac), ibox(bc), bm, bn, fm, fn_]))
                        }
                        _ => None,
                    },
                    _ => None,
                }
            }
        };
        match fired {
            Some(t) => {
                self.tick()?;
                self.whnf(&t)
            }
            None => Ok(with(stuck_args)),
        }
    }

    /// Untyped full normalization.
    pub fn normalize(&self, m: &ITerm) -> IResult<ITerm> {
        self.tick()?;
        let w = self.whnf(m)?;
        Ok(match &w {
            ITerm::Var(..) => w,
            ITerm::Lam(a, b) => ilam(self.normalize_ty(a)?, self.normalize(b)?),
            ITerm::CLam(a, b) => iclam(self.normalize_ty(a)?, self.normalize(b)?),
            ITerm::App(f, a) => iapp(self.normalize(f)?, self.normalize(a)?),
            ITerm::CApp(f, a) => icapp(self.normalize(f)?, self.normalize(a)?),
            ITerm::Box(b) => match self.normalize(b)? {
                ITerm::Const(K::Open, xs) => {
                    self.idem_used();
                    xs[0].clone()
                }
                b => ibox(b),
            },
            ITerm::LetBox(e, b) => iletbox(self.normalize(e)?, self.normalize(b)?),
            ITerm::Ann(m, _) => self.normalize(m)?,
            ITerm::Const(k, xs) => ITerm::Const(*k, xs.iter().map(|x| self.normalize(x)).collect::<IResult<_>>()?),
            ITerm::Rec(r) => ITerm::Rec(Box::new(IRec {
                kind: r.kind,
                motive: self.normalize_ty(&r.motive)?,
                branches: r.branches.iter().map(|x| self.normalize(x)).collect::<IResult<_>>()?,
                args: r.args.iter().map(|x| self.normalize(x)).collect::<IResult<_>>()?,
            })),
        })
    }

    pub fn normalize_ty(&self, t: &IType) -> IResult<IType> {
        Ok(match t {
            IType::Fn(a, b) => tfn(self.normalize_ty(a)?, self.normalize_ty(b)?),
            IType::CFn(a, b) => tcfn(self.normalize_ty(a)?, self.normalize_ty(b)?),
            IType::Box(a) => tbox(self.normalize_ty(a)?),
            IType::Base(k, xs) => IType::Base(*k, xs.iter().map(|x| self.normalize(x)).collect::<IResult<_>>()?),
        })
    }

    // -----------------------------------------------------------------------
    // η-long normal forms

    pub fn nf(&self, cx: &ICtx, m: &ITerm, t: &IType) -> IResult<ITerm> {
        self.tick()?;
        match t {
            IType::Fn(a, b) => {
                let body = match self.whnf(m)? {
                    ITerm::Lam(_, body) => *body,
                    f => iapp(shift(&f, Zone::Ord, 0, 1), ov(0)),
                };
                Ok(ilam(self.nf_type(cx, a)?, self.nf(&cx.push(Zone::Ord, (**a).clone()), &body, b)?))
            }
            IType::CFn(a, b) => {
                let body = match self.whnf(m)? {
                    ITerm::CLam(_, body) => *body,
                    f => icapp(shift(&f, Zone::Crisp, 0, 1), cv(0)),
                };
                Ok(iclam(self.nf_type(cx, a)?, self.nf(&cx.push(Zone::Crisp, (**a).clone()), &body, b)?))
            }
            IType::Box(s) => match self.whnf(m)? {
                ITerm::Box(b) => Ok(ibox(self.nf(&cx.boxed(), &b, s)?)),
                m2 if crisp_closed(&m2) => {
                    self.idem_used();
                    Ok(ibox(self.nf(&cx.boxed(), &k1(K::Open, m2), s)?))
                }
                m2 => Ok(self.nf_ne(cx, &m2)?.0),
            },
            IType::Base(k, xs) => self.nf_base(cx, m, *k, xs),
        }
    }

    fn nf_base(&self, cx: &ICtx, m: &ITerm, k: TK, xs: &[ITerm]) -> IResult<ITerm> {
        let ne = |m2: &ITerm| -> IResult<ITerm> { Ok(self.nf_ne(cx, m2)?.0) };
        let tm = || k0(K::Tm);
        match k {
            TK::Obj => {
                let m2 = self.whnf(m)?;
                match &m2 {
                    ITerm::Const(K::Tm | K::Unit, _) => Ok(m2),
                    ITerm::Const(c @ (K::Times | K::Arrow), ab) => {
                        Ok(k2(*c, self.nf(cx, &ab[0], &obj())?, self.nf(cx, &ab[1], &obj())?))
                    }
                    _ => ne(&m2),
                }
            }
            TK::El => match self.whnf(&xs[0])? {
                ITerm::Const(K::Unit, _) => Ok(k0(K::Terminal)),
                ITerm::Const(K::Times, ab) => Ok(k2(
                    K::Pair,
                    self.nf(cx, &k1(K::Fst, m.clone()), &el(ab[0].clone()))?,
                    self.nf(cx, &k1(K::Snd, m.clone()), &el(ab[1].clone()))?,
                )),
                ITerm::Const(K::Arrow, ab) => {
                    let ft = tfn(el(ab[0].clone()), el(shift(&ab[1], Zone::Ord, 0, 1)));
                    Ok(k1(K::ArrowI, self.nf(cx, &k1(K::ArrowE, m.clone()), &ft)?))
                }
                _ => {
                    let m2 = self.whnf(m)?;
                    match &m2 {
                        ITerm::Const(K::SApp, ab) => {
                            Ok(k2(K::SApp, self.nf(cx, &ab[0], &el(tm()))?, self.nf(cx, &ab[1], &el(tm()))?))
                        }
                        ITerm::Const(K::SLam, g) => Ok(k1(K::SLam, self.nf(cx, &g[0], &fn_tm(tm()))?)),
                        _ => ne(&m2),
                    }
                }
            },
            TK::ElV => {
                let ft = tfn(el(xs[0].clone()), el(shift(&xs[1], Zone::Ord, 0, 1)));
                Ok(k1(K::VMark, self.nf(cx, &k1(K::VCoe, m.clone()), &ft)?))
            }
            TK::TmV => Ok(k1(K::VMark, self.nf(cx, &k1(K::VCoe, m.clone()), &tm_in(xs[0].clone(), xs[1].clone()))?)),
            TK::Bool => {
                let m2 = self.whnf(m)?;
                match &m2 {
                    ITerm::Const(K::True | K::False, _) => Ok(m2),
                    _ => ne(&m2),
                }
            }
            TK::Ctx => {
                let m2 = self.whnf(m)?;
                match &m2 {
                    ITerm::Const(K::Top, _) => Ok(m2),
                    ITerm::Const(K::Ext, pa) => {
                        Ok(ext(self.nf(cx, &pa[0], &ctx_ty())?, self.nf(cx, &pa[1], &ty_in(pa[0].clone()))?))
                    }
                    _ => ne(&m2),
                }
            }
            TK::Ty => {
                let phi = &xs[0];
                let m2 = self.whnf(m)?;
                match &m2 {
                    ITerm::Const(K::TyC, _) => Ok(m2),
                    ITerm::Const(K::TrmC, a) => Ok(trmc(self.nf(cx, &a[0], &tm_in(phi.clone(), tyc()))?)),
                    ITerm::Const(K::Pi, ab) => Ok(k2(
                        K::Pi,
                        self.nf(cx, &ab[0], &ty_in(phi.clone()))?,
                        self.nf(cx, &ab[1], &ty_in(ext(phi.clone(), ab[0].clone())))?,
                    )),
                    ITerm::Const(K::TSub, ab) => {
                        let (n, t) = self.nf_ne(cx, &ab[0])?;
                        let IType::Base(TK::Ty, p0) = t else {
                            return Err(IError::IllFormed("tsub of a non-type".into()));
                        };
                        Ok(tsub(n, self.nf(cx, &ab[1], &hom(phi.clone(), p0[0].clone()))?))
                    }
                    _ => ne(&m2),
                }
            }
            TK::Tm => {
                let (phi, a) = (&xs[0], &xs[1]);
                if let ITerm::Const(K::Pi, ab) = self.whnf(a)? {
                    let phi1 = ext(phi.clone(), ab[0].clone());
                    let body = k2(K::AppT, msub(m.clone(), pk(1)), k0(K::V));
                    return Ok(k2(
                        K::Abs,
                        self.nf(cx, &ab[0], &ty_in(phi.clone()))?,
                        self.nf(cx, &body, &tm_in(phi1, ab[1].clone()))?,
                    ));
                }
                let m2 = self.whnf(m)?;
                let at = |t: ITerm| tm_in(phi.clone(), t);
                match &m2 {
                    ITerm::Const(K::O, _) => Ok(m2),
                    _ if is_dvar(&m2) => Ok(m2),
                    ITerm::Const(K::Arr, ab) => {
                        Ok(k2(K::Arr, self.nf(cx, &ab[0], &at(tyc()))?, self.nf(cx, &ab[1], &at(tyc()))?))
                    }
                    ITerm::Const(K::DLam, ab) => {
                        let phi1 = ext(phi.clone(), trmc(ab[0].clone()));
                        Ok(ITerm::Const(
                            K::DLam,
                            vec![
                                self.nf(cx, &ab[0], &at(tyc()))?,
                                self.nf(cx, &ab[1], &at(tyc()))?,
                                self.nf(cx, &ab[2], &tm_in(phi1, trmc(msub(ab[1].clone(), pk(1)))))?,
                            ],
                        ))
                    }
                    ITerm::Const(K::DApp, ab) => Ok(ITerm::Const(
                        K::DApp,
                        vec![
                            self.nf(cx, &ab[0], &at(tyc()))?,
                            self.nf(cx, &ab[1], &at(tyc()))?,
                            self.nf(cx, &ab[2], &at(trmc(k2(K::Arr, ab[0].clone(), ab[1].clone()))))?,
                            self.nf(cx, &ab[3], &at(trmc(ab[0].clone())))?,
                        ],
                    )),
                    _ => Ok(self.nf_tm_ne(cx, phi, &m2)?.0),
                }
            }
            TK::Hom => {
                let (src, tgt) = (&xs[0], &xs[1]);
                match self.whnf(tgt)? {
                    ITerm::Const(K::Top, _) => Ok(k0(K::Bang)),
                    ITerm::Const(K::Ext, pa) => {
                        let s1 = comp(pk(1), m.clone());
                        let head = self.nf(cx, &s1, &hom(src.clone(), pa[0].clone()))?;
                        let last =
                            self.nf(cx, &msub(k0(K::V), m.clone()), &tm_in(src.clone(), tsub(pa[1].clone(), s1)))?;
                        Ok(pairh(head, last, self.nf(cx, &pa[1], &ty_in(pa[0].clone()))?))
                    }
                    _ => self.normalize(m),
                }
            }
        }
    }

    fn nf_tm_ne(&self, cx: &ICtx, phi: &ITerm, n: &ITerm) -> IResult<(ITerm, ITerm)> {
        match n {
            _ if is_dvar(n) => Ok((n.clone(), self.tm_infer(cx, phi, n)?)),
            ITerm::Const(K::MSub, xs) if xs.len() == 2 => {
                let (x, t) = self.nf_ne(cx, &xs[0])?;
                let IType::Base(TK::Tm, pa) = t else {
                    return Err(IError::IllFormed("substitution into a non-term".into()));
                };
                let s = self.nf(cx, &xs[1], &hom(phi.clone(), pa[0].clone()))?;
                let p0 = self.nf(cx, &pa[0], &ctx_ty())?;
                if p0 == self.nf(cx, phi, &ctx_ty())? && s == self.nf(cx, &pk(0), &hom(p0.clone(), p0))? {
                    return Ok((x, pa[1].clone()));
                }
                Ok((msub(x, s), tsub(pa[1].clone(), xs[1].clone())))
            }
            ITerm::Const(K::AppT, xs) if xs.len() == 2 => {
                let (f, ft) = self.nf_tm_ne(cx, phi, &xs[0])?;
                match self.whnf(&ft)? {
                    ITerm::Const(K::Pi, ab) => {
                        let a = self.nf(cx, &xs[1], &tm_in(phi.clone(), ab[0].clone()))?;
                        Ok((k2(K::AppT, f, a), tsub(ab[1].clone(), pairh(pk(0), xs[1].clone(), ab[0].clone()))))
                    }
                    _ => Err(IError::IllFormed("application of a non-function".into())),
                }
            }
            _ => {
                let (x, t) = self.nf_ne(cx, n)?;
                match t {
                    IType::Base(TK::Tm, pa) => Ok((x, pa[1].clone())),
                    t => Err(mismatch(cx, &tm_in(phi.clone(), tyc()), &t)),
                }
            }
        }
    }

    /// Normal form of a neutral term, with its type.
    fn nf_ne(&self, cx: &ICtx, n: &ITerm) -> IResult<(ITerm, IType)> {
        self.tick()?;
        match n {
            ITerm::Var(z, i) => Ok((n.clone(), cx.lookup(*z, *i)?)),
            ITerm::App(f, a) => {
                let (f2, t) = self.nf_ne(cx, f)?;
                match t {
                    IType::Fn(a1, b1) => Ok((iapp(f2, self.nf(cx, a, &a1)?), subst_ty(&b1, Zone::Ord, a))),
                    t => Err(mismatch(cx, &fn_tm(k0(K::Tm)), &t)),
                }
            }
            ITerm::CApp(f, a) => {
                let (f2, t) = self.nf_ne(cx, f)?;
                match t {
                    IType::CFn(a1, b1) => {
                        Ok((icapp(f2, self.nf(&cx.clear(Cleared::CrispArg), a, &a1)?), subst_ty(&b1, Zone::Crisp, a)))
                    }
                    t => Err(mismatch(cx, &tcfn(obj(), obj()), &t)),
                }
            }
            ITerm::Const(K::Open, xs) => {
                let (t2, t) = self.nf_ne(&cx.boxed(), &xs[0])?;
                match t {
                    IType::Box(s) => Ok((k1(K::Open, t2), *s)),
                    t => Err(mismatch(cx, &tbox(obj()), &t)),
                }
            }
            ITerm::Const(k @ (K::Fst | K::Snd), xs) => {
                let (z, t) = self.nf_ne(cx, &xs[0])?;
                if let IType::Base(TK::El, c) = &t {
                    if let ITerm::Const(K::Times, ab) = self.whnf(&c[0])? {
                        return Ok((k1(*k, z), el(ab[if *k == K::Fst { 0 } else { 1 }].clone())));
                    }
                }
                Err(mismatch(cx, &el(times(k0(K::Tm), k0(K::Tm))), &t))
            }
            ITerm::Const(K::ArrowE, xs) => {
                let (f, t) = self.nf_ne(cx, &xs[0])?;
                if let IType::Base(TK::El, c) = &t {
                    if let ITerm::Const(K::Arrow, ab) = self.whnf(&c[0])? {
                        return Ok((k1(K::ArrowE, f), tfn(el(ab[0].clone()), el(shift(&ab[1], Zone::Ord, 0, 1)))));
                    }
                }
                Err(mismatch(cx, &el(arrow_code(k0(K::Tm), k0(K::Tm))), &t))
            }
            ITerm::Const(K::VCoe, xs) => {
                let (x, t) = self.nf_ne(cx, &xs[0])?;
                match t {
                    IType::Base(TK::ElV, a) => {
                        Ok((k1(K::VCoe, x), tfn(el(a[0].clone()), el(shift(&a[1], Zone::Ord, 0, 1)))))
                    }
                    IType::Base(TK::TmV, a) => Ok((k1(K::VCoe, x), tm_in(a[0].clone(), a[1].clone()))),
                    t => Err(mismatch(cx, &elv(k0(K::Tm), k0(K::Tm)), &t)),
                }
            }
            ITerm::Rec(r) => {
                let n = motive_binders(r.kind);
                let bts = binder_types(r.kind);
                let mut mcx = cx.clone();
                for t in &bts {
                    mcx = mcx.push(Zone::Crisp, t.clone());
                }
                let crisp = cx.clear(Cleared::CrispArg);
                let motive = self.nf_type(&mcx, &r.motive)?;
                let branches = r
                    .branches
                    .iter()
                    .zip(branch_types(r.kind, &r.motive))
                    .map(|(b, t)| self.nf(&crisp, b, &t))
                    .collect::<IResult<Vec<_>>>()?;
                let mut args = vec![];
                for (j, a) in r.args.iter().enumerate() {
                    args.push(self.nf(&crisp, a, &inst_ty(&bts[j], Zone::Crisp, &r.args[..j]))?);
                }
                let _ = n;
                let ty = motive_at(&r.motive, r.kind, 0, &r.args);
                Ok((ITerm::Rec(Box::new(IRec { kind: r.kind, motive, branches, args })), ty))
            }
            ITerm::LetBox(..) => Ok((self.normalize(n)?, self.infer(cx, n)?)),
            _ => Err(IError::IllFormed(format!("not a neutral term: {}", cx.printer().term(n)))),
        }
    }

    pub fn nf_type(&self, cx: &ICtx, t: &IType) -> IResult<IType> {
        self.tick()?;
        Ok(match t {
            IType::Fn(a, b) => tfn(self.nf_type(cx, a)?, self.nf_type(&cx.push(Zone::Ord, (**a).clone()), b)?),
            IType::CFn(a, b) => tcfn(self.nf_type(cx, a)?, self.nf_type(&cx.push(Zone::Crisp, (**a).clone()), b)?),
            IType::Box(a) => tbox(self.nf_type(&cx.boxed(), a)?),
            IType::Base(k, xs) => {
                if xs.len() != k.arity() {
                    return Err(IError::IllFormed(format!("{} expects {} arguments", k.name(), k.arity())));
                }
                let args = match k {
                    TK::Obj | TK::Bool | TK::Ctx => vec![],
                    TK::El => vec![self.nf(cx, &xs[0], &obj())?],
                    TK::ElV => vec![self.nf(cx, &xs[0], &obj())?, self.nf(cx, &xs[1], &obj())?],
                    TK::Ty => vec![self.nf(cx, &xs[0], &ctx_ty())?],
                    TK::Tm | TK::TmV => {
                        vec![self.nf(cx, &xs[0], &ctx_ty())?, self.nf(cx, &xs[1], &ty_in(xs[0].clone()))?]
                    }
                    TK::Hom => vec![self.nf(cx, &xs[0], &ctx_ty())?, self.nf(cx, &xs[1], &ctx_ty())?],
                };
                IType::Base(*k, args)
            }
        })
    }
}

/// `rec` returning `true` exactly on `lam`-headed scrutinees, at context code `c`.
pub fn is_lam(c: ITerm, x: ITerm) -> ITerm {
    let f = || k0(K::False);
    let tm = || k0(K::Tm);
    let tv = iclam(obj(), iclam(tbox(elv(cv(0), tm())), f()));
    let tapp =
        iclam(obj(), iclam(tbox(fn_tm(cv(0))), iclam(tbox(fn_tm(cv(1))), iclam(bool_ty(), iclam(bool_ty(), f())))));
    let tlam = iclam(obj(), iclam(tbox(fn_tm(times(cv(0), tm()))), iclam(bool_ty(), k0(K::True))));
    ITerm::Rec(Box::new(IRec {
        kind: RecKind::Tm,
        motive: bool_ty(),
        branches: vec![tv, tapp, tlam],
        args: vec![c, x],
    }))
}
