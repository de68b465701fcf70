//! Bidirectional checker and normalizer for both Cocon modes.
//!
//! Reduction is untyped (β for both levels, unbox of a box, recursor
//! equations on canonical scrutinees). Equality compares η-long normal forms
//! computed by a type-directed readback.

use crate::surface::Printer;
use crate::syntax::*;
use std::cell::Cell;
use thiserror::Error;

pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("context variable {0} is unbound")]
    UnboundCtxVar(usize),
    #[error("variable {0} is not unbound or out of range")]
    UnboundVariable(usize),
    #[error("{0} is not annotated `ctx`")]
    NotCtxKind(String),
    #[error("ill-formed type: {0}")]
    IllFormedType(String),
    #[error("not a function: {0}")]
    NotAFunction(String),
    #[error("type mismatch: expected {expected}, got {got}")]
    TypeMismatch { expected: String, got: String },
    #[error("unbox of a term whose type is not contextual: {0}")]
    BoxExpected(String),
    #[error("weakening does not fit: {0}")]
    WeakenShapeMismatch(String),
    #[error("not a variable: {0}")]
    NotAVariable(String),
    #[error("argument kind clash: {0}")]
    AnnKindMismatch(String),
    #[error("recursor expects {expected} branches, got {got}")]
    BranchCountMismatch { expected: usize, got: usize },
    #[error("branch {branch} binds {got} variables, expected {expected}")]
    BranchArityMismatch { branch: usize, expected: usize, got: usize },
    #[error("type scrutinee is not closed: {0}")]
    NotClosed(String),
    #[error("motive does not fit the recursor: {0}")]
    BadMotive(String),
    #[error("not available in this mode: {0}")]
    ModeMismatch(String),
    #[error("cannot infer a type for {0}; add an ascription")]
    CannotInfer(String),
    #[error("step bound exhausted")]
    FuelExhausted,
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
}

impl CheckError {
    pub fn class(&self) -> &'static str {
        match self {
            CheckError::UnboundCtxVar(_) => "UnboundCtxVar",
            CheckError::UnboundVariable(_) => "UnboundVariable",
            CheckError::NotCtxKind(_) => "NotCtxKind",
            CheckError::IllFormedType(_) => "IllFormedType",
            CheckError::NotAFunction(_) => "NotAFunction",
            CheckError::TypeMismatch { .. } => "TypeMismatch",
            CheckError::BoxExpected(_) => "BoxExpected",
            CheckError::WeakenShapeMismatch(_) => "WeakenShapeMismatch",
            CheckError::NotAVariable(_) => "NotAVariable",
            CheckError::AnnKindMismatch(_) => "AnnKindMismatch",
            CheckError::BranchCountMismatch { .. } => "BranchCountMismatch",
            CheckError::BranchArityMismatch { .. } => "BranchArityMismatch",
            CheckError::NotClosed(_) => "NotClosed",
            CheckError::BadMotive(_) => "BadMotive",
            CheckError::ModeMismatch(_) => "ModeMismatch",
            CheckError::CannotInfer(_) => "CannotInfer",
            CheckError::FuelExhausted => "FuelExhausted",
            CheckError::Syntax(SyntaxError::NegativeIndex) => "NegativeIndex",
            CheckError::Syntax(SyntaxError::ArityMismatch) => "ArityMismatch",
            CheckError::Syntax(SyntaxError::KindMismatch) => "KindMismatch",
        }
    }
}

pub type CResult<T> = Result<T, CheckError>;

/// Computation context Γ; the last entry is variable 0.
pub type Gamma = Vec<AnnType>;

/// Redex selection order for [`Checker::normalize_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Weak-head first, then under constructors.
    Outermost,
    /// Subterms first, then the root.
    Innermost,
}

pub struct Checker {
    pub mode: Mode,
    limit: u64,
    fuel: Cell<u64>,
    // inlined earlier declarations, closed, with their ascribed types
    globals: Vec<(CompTerm, CompType)>,
}

fn ext(g: &[AnnType], a: AnnType) -> Gamma {
    let mut v = g.to_vec();
    v.push(a);
    v
}

fn ext_many(g: &[AnnType], xs: &[AnnType]) -> Gamma {
    let mut v = g.to_vec();
    v.extend(xs.iter().cloned());
    v
}

fn ua(i: usize) -> DomTerm {
    unbox(cvar(i), DomSubst::Empty)
}

fn uid(i: usize) -> DomTerm {
    unbox(cvar(i), DomSubst::id())
}

fn var_arg(a: &AnnType) -> Arg {
    match a {
        AnnType::Ctx => Arg::Ctx(DomCtx::Var(0)),
        AnnType::Ty(_) => Arg::Term(cvar(0)),
    }
}

fn cv(i: usize) -> Arg {
    Arg::Ctx(DomCtx::Var(i))
}
fn tv(i: usize) -> Arg {
    Arg::Term(cvar(i))
}

/// Binders and expected result type of every branch, in branch order.
/// Binder annotations are relative to the prefix before them.
pub fn branch_sigs(kind: RecKind, motive: &CompType) -> SResult<Vec<(Vec<AnnType>, CompType)>> {
    let m = |extra: usize, args: Vec<Arg>| motive_at(motive, kind, extra, &args);
    let ty = |t: CompType| AnnType::Ty(t);
    let v = |i: usize| DomCtx::Var(i);
    Ok(match kind {
        RecKind::Tm => vec![
            (vec![AnnType::Ctx, ty(varty(v(0), DomType::Tm))], m(2, vec![cv(1), tv(0)])?),
            (
                vec![
                    AnnType::Ctx,
                    ty(boxty(v(0), DomType::Tm)),
                    ty(boxty(v(1), DomType::Tm)),
                    ty(m(3, vec![cv(2), tv(1)])?),
                    ty(m(4, vec![cv(3), tv(1)])?),
                ],
                m(5, vec![cv(4), Arg::Term(cbox(simple_app(uid(3), uid(2))))])?,
            ),
            (
                vec![
                    AnnType::Ctx,
                    ty(boxty(snoc(v(0), DomType::Tm), DomType::Tm)),
                    ty(m(2, vec![Arg::Ctx(snoc(v(1), DomType::Tm)), tv(0)])?),
                ],
                m(3, vec![cv(2), Arg::Term(cbox(simple_lam(dlam(uid(1)))))])?,
            ),
        ],
        RecKind::Ty => vec![
            (vec![AnnType::Ctx], m(1, vec![cv(0), Arg::Term(cbox(DomTerm::Con(DCon::O, vec![])))])?),
            (
                vec![
                    AnnType::Ctx,
                    ty(boxty(v(0), DomType::Ty)),
                    ty(boxty(v(1), DomType::Ty)),
                    ty(m(3, vec![cv(2), tv(1)])?),
                    ty(m(4, vec![cv(3), tv(1)])?),
                ],
                m(5, vec![cv(4), Arg::Term(cbox(DomTerm::Con(DCon::Arr, vec![uid(3), uid(2)])))])?,
            ),
        ],
        RecKind::Trm => {
            let closed_ty = || ty(boxty(DomCtx::Empty, DomType::Ty));
            vec![
                (vec![AnnType::Ctx, closed_ty(), ty(varty(v(1), trm(ua(0))))], m(3, vec![cv(2), tv(1), tv(0)])?),
                (
                    vec![
                        AnnType::Ctx,
                        closed_ty(),
                        closed_ty(),
                        ty(boxty(snoc(v(2), trm(ua(1))), trm(ua(0)))),
                        ty(m(4, vec![Arg::Ctx(snoc(v(3), trm(ua(2)))), tv(1), tv(0)])?),
                    ],
                    m(
                        5,
                        vec![
                            cv(4),
                            Arg::Term(cbox(DomTerm::Con(DCon::Arr, vec![ua(3), ua(2)]))),
                            Arg::Term(cbox(DomTerm::Con(DCon::Lam, vec![ua(3), ua(2), dlam(uid(1))]))),
                        ],
                    )?,
                ),
                (
                    vec![
                        AnnType::Ctx,
                        closed_ty(),
                        closed_ty(),
                        ty(boxty(v(2), trm(DomTerm::Con(DCon::Arr, vec![ua(1), ua(0)])))),
                        ty(boxty(v(3), trm(ua(2)))),
                        ty(m(5, vec![cv(4), Arg::Term(cbox(DomTerm::Con(DCon::Arr, vec![ua(3), ua(2)]))), tv(1)])?),
                        ty(m(6, vec![cv(5), tv(4), tv(1)])?),
                    ],
                    m(
                        7,
                        vec![
                            cv(6),
                            tv(4),
                            Arg::Term(cbox(DomTerm::Con(DCon::App, vec![ua(5), ua(4), uid(3), uid(2)]))),
                        ],
                    )?,
                ),
            ]
        }
    })
}

/// The binders a motive of this kind must start with.
pub fn motive_binders(kind: RecKind) -> Vec<AnnType> {
    let v = |i| DomCtx::Var(i);
    match kind {
        RecKind::Tm => vec![AnnType::Ctx, AnnType::Ty(boxty(v(0), DomType::Tm))],
        RecKind::Ty => vec![AnnType::Ctx, AnnType::Ty(boxty(v(0), DomType::Ty))],
        RecKind::Trm => {
            vec![AnnType::Ctx, AnnType::Ty(boxty(DomCtx::Empty, DomType::Ty)), AnnType::Ty(boxty(v(1), trm(ua(0))))]
        }
    }
}

impl Checker {
    pub fn new(mode: Mode) -> Checker {
        Checker::with_fuel(mode, DEFAULT_FUEL)
    }

    pub fn with_fuel(mode: Mode, limit: u64) -> Checker {
        Checker { mode, limit, fuel: Cell::new(limit), globals: Vec::new() }
    }

    /// Record a checked closed declaration so inlined copies of it infer.
    pub fn add_global(&mut self, body: CompTerm, ty: CompType) {
        self.globals.push((body, ty));
    }

    pub fn global_type(&self, t: &CompTerm) -> Option<CompType> {
        self.globals.iter().rev().find(|(b, _)| b == t).map(|(_, ty)| ty.clone())
    }

    pub fn reset_fuel(&self) {
        self.fuel.set(self.limit);
    }

    pub fn fuel_used(&self) -> u64 {
        self.limit - self.fuel.get()
    }

    fn tick(&self) -> CResult<()> {
        let f = self.fuel.get();
        if f == 0 {
            return Err(CheckError::FuelExhausted);
        }
        self.fuel.set(f - 1);
        Ok(())
    }

    fn show_ty(&self, g: &[AnnType], t: &CompType) -> String {
        Printer::in_context(self.mode, g.len()).comp_type(t)
    }
    fn show_ann(&self, g: &[AnnType], t: &AnnType) -> String {
        Printer::in_context(self.mode, g.len()).ann_type(t)
    }
    fn show_term(&self, g: &[AnnType], t: &CompTerm) -> String {
        Printer::in_context(self.mode, g.len()).comp_term(t)
    }
    fn show_dty(&self, g: &[AnnType], t: &DomType) -> String {
        Printer::in_context(self.mode, g.len()).dom_type(t)
    }
    fn show_dom(&self, g: &[AnnType], t: &DomTerm) -> String {
        Printer::in_context(self.mode, g.len()).dom_term(t)
    }

    // -----------------------------------------------------------------------
    // lookup

    pub fn lookup_comp(&self, g: &[AnnType], i: usize) -> CResult<AnnType> {
        if i >= g.len() {
            return Err(CheckError::UnboundVariable(i));
        }
        Ok(shift_ann(&g[g.len() - 1 - i], 0, i as isize + 1)?)
    }

    pub fn lookup_dom(&self, psi: &DomCtx, i: usize) -> CResult<DomType> {
        match psi {
            DomCtx::Snoc(_, a) if i == 0 => Ok(shift_dom_ty(a, 0, 1)?),
            DomCtx::Snoc(c, _) => Ok(shift_dom_ty(&self.lookup_dom(c, i - 1)?, 0, 1)?),
            _ => Err(CheckError::UnboundVariable(i)),
        }
    }

    // -----------------------------------------------------------------------
    // domain level

    fn check_simple_ty(&self, a: &DomType) -> CResult<()> {
        match a {
            DomType::Tm => Ok(()),
            DomType::Arrow(x, y) => {
                self.check_simple_ty(x)?;
                self.check_simple_ty(y)
            }
            _ => Err(CheckError::ModeMismatch(format!("`{}` in simple mode", self.show_dty(&[], a)))),
        }
    }

    pub fn check_dom_type(&self, g: &[AnnType], psi: &DomCtx, a: &DomType) -> CResult<()> {
        if self.mode == Mode::Simple {
            return self.check_simple_ty(a);
        }
        match a {
            DomType::Ty => Ok(()),
            DomType::Trm(m) => self.check_dom_term(g, psi, m, &DomType::Ty),
            DomType::Pi(x, y) => {
                self.check_dom_type(g, psi, x)?;
                self.check_dom_type(g, &snoc(psi.clone(), (**x).clone()), y)
            }
            DomType::Tm | DomType::Arrow(..) => {
                Err(CheckError::ModeMismatch(format!("`{}` in dep mode", self.show_dty(g, a))))
            }
        }
    }

    pub fn check_dom_ctx(&self, g: &[AnnType], psi: &DomCtx) -> CResult<()> {
        match psi {
            DomCtx::Empty => Ok(()),
            DomCtx::Var(i) => {
                if *i >= g.len() {
                    return Err(CheckError::UnboundCtxVar(*i));
                }
                match self.lookup_comp(g, *i)? {
                    AnnType::Ctx => Ok(()),
                    _ => Err(CheckError::NotCtxKind(Printer::in_context(self.mode, g.len()).dom_ctx(psi))),
                }
            }
            DomCtx::Snoc(c, a) => {
                self.check_dom_ctx(g, c)?;
                self.check_dom_type(g, c, a).map_err(|e| match e {
                    CheckError::FuelExhausted | CheckError::IllFormedType(_) | CheckError::ModeMismatch(_) => e,
                    e => CheckError::IllFormedType(e.to_string()),
                })
            }
        }
    }

    fn sconst_type(&self, c: SConst) -> DomType {
        let tm = || DomType::Tm;
        match c {
            SConst::Lam => arrow(arrow(tm(), tm()), tm()),
            SConst::App => arrow(tm(), arrow(tm(), tm())),
        }
    }

    pub fn infer_dom_term(&self, g: &[AnnType], psi: &DomCtx, m: &DomTerm) -> CResult<DomType> {
        match m {
            DomTerm::Var(i) => self.lookup_dom(psi, *i),
            DomTerm::Const(c) => {
                if self.mode != Mode::Simple {
                    return Err(CheckError::ModeMismatch(format!("`{}` in dep mode", self.show_dom(g, m))));
                }
                Ok(self.sconst_type(*c))
            }
            DomTerm::Con(k, xs) => {
                if self.mode != Mode::Dep {
                    return Err(CheckError::ModeMismatch(format!("`{}` in simple mode", k.name())));
                }
                if xs.len() != k.arity() {
                    return Err(CheckError::Syntax(SyntaxError::ArityMismatch));
                }
                let tyt = DomType::Ty;
                match k {
                    DCon::O => Ok(tyt),
                    DCon::Arr => {
                        self.check_dom_term(g, psi, &xs[0], &tyt)?;
                        self.check_dom_term(g, psi, &xs[1], &tyt)?;
                        Ok(tyt)
                    }
                    DCon::Lam => {
                        let (a, b, f) = (&xs[0], &xs[1], &xs[2]);
                        self.check_dom_term(g, psi, a, &tyt)?;
                        self.check_dom_term(g, psi, b, &tyt)?;
                        let fty = pi(trm(a.clone()), trm(shift_dom(b, 0, 1)?));
                        self.check_dom_term(g, psi, f, &fty)?;
                        Ok(trm(DomTerm::Con(DCon::Arr, vec![a.clone(), b.clone()])))
                    }
                    DCon::App => {
                        let (a, b, m1, n) = (&xs[0], &xs[1], &xs[2], &xs[3]);
                        self.check_dom_term(g, psi, a, &tyt)?;
                        self.check_dom_term(g, psi, b, &tyt)?;
                        self.check_dom_term(g, psi, m1, &trm(DomTerm::Con(DCon::Arr, vec![a.clone(), b.clone()])))?;
                        self.check_dom_term(g, psi, n, &trm(a.clone()))?;
                        Ok(trm(b.clone()))
                    }
                }
            }
            DomTerm::App(f, a) => {
                if let DomTerm::Lam(body) = &**f {
                    // a source-level redex: the argument fixes the domain
                    let at = self.infer_dom_term(g, psi, a)?;
                    let bt = self.infer_dom_term(g, &snoc(psi.clone(), at), body)?;
                    return Ok(subst_dom_ty0(&bt, a)?);
                }
                match self.infer_dom_term(g, psi, f)? {
                    DomType::Arrow(x, y) => {
                        self.check_dom_term(g, psi, a, &x)?;
                        Ok(*y)
                    }
                    DomType::Pi(x, y) => {
                        self.check_dom_term(g, psi, a, &x)?;
                        Ok(subst_dom_ty0(&y, a)?)
                    }
                    t => Err(CheckError::NotAFunction(format!(
                        "`{}` has type {}",
                        self.show_dom(g, f),
                        self.show_dty(g, &t)
                    ))),
                }
            }
            DomTerm::Lam(_) => Err(CheckError::CannotInfer(self.show_dom(g, m))),
            DomTerm::Unbox(t, s) => {
                if let CompTerm::Box(_, n) = &**t {
                    let phi = self.infer_subst_target(g, psi, s)?;
                    let a = self.infer_dom_term(g, &phi, n)?;
                    return Ok(subst_dom_ty(&a, s)?);
                }
                match self.infer_comp(g, t)? {
                    AnnType::Ty(CompType::Box(ct)) => {
                        self.check_dom_subst(g, psi, s, &ct.ctx)?;
                        Ok(subst_dom_ty(&ct.ty, s)?)
                    }
                    other => Err(CheckError::BoxExpected(format!(
                        "`{}` has type {}",
                        self.show_term(g, t),
                        self.show_ann(g, &other)
                    ))),
                }
            }
        }
    }

    /// Codomain of a substitution, for unboxing a literal box.
    pub fn infer_subst_target(&self, g: &[AnnType], psi: &DomCtx, s: &DomSubst) -> CResult<DomCtx> {
        match s {
            DomSubst::Empty => Ok(DomCtx::Empty),
            DomSubst::Wk(k) => psi
                .drop(*k)
                .cloned()
                .ok_or_else(|| CheckError::WeakenShapeMismatch(format!("wk {k} from a shorter context"))),
            DomSubst::Snoc(r, m) => {
                let phi = self.infer_subst_target(g, psi, r)?;
                let b = self.infer_dom_term(g, psi, m)?;
                let b = match (self.mode, &**r) {
                    (Mode::Simple, _) => b,
                    (Mode::Dep, DomSubst::Empty) => shift_dom_ty(&b, 0, -(psi.len() as isize))
                        .map_err(|_| CheckError::CannotInfer("the type of a substitution entry".into()))?,
                    (Mode::Dep, DomSubst::Wk(k)) => shift_dom_ty(&b, 0, -(*k as isize))
                        .map_err(|_| CheckError::CannotInfer("the type of a substitution entry".into()))?,
                    _ => {
                        let b = self.norm_dty(&b, Strategy::Outermost)?;
                        if !closed_dty(&b) {
                            return Err(CheckError::CannotInfer("the codomain of a substitution".into()));
                        }
                        b
                    }
                };
                Ok(snoc(phi, b))
            }
        }
    }

    pub fn check_dom_term(&self, g: &[AnnType], psi: &DomCtx, m: &DomTerm, a: &DomType) -> CResult<()> {
        if let DomTerm::Lam(b) = m {
            return match a {
                DomType::Arrow(x, y) | DomType::Pi(x, y) => {
                    self.check_dom_term(g, &snoc(psi.clone(), (**x).clone()), b, y)
                }
                _ => Err(CheckError::TypeMismatch { expected: self.show_dty(g, a), got: "a function".into() }),
            };
        }
        let got = self.infer_dom_term(g, psi, m)?;
        if self.equal_dom_ty(g, psi, a, &got)? {
            Ok(())
        } else {
            Err(CheckError::TypeMismatch { expected: self.show_dty(g, a), got: self.show_dty(g, &got) })
        }
    }

    pub fn check_dom_subst(&self, g: &[AnnType], psi: &DomCtx, s: &DomSubst, phi: &DomCtx) -> CResult<()> {
        match s {
            DomSubst::Empty => match phi {
                DomCtx::Empty => Ok(()),
                _ => Err(CheckError::TypeMismatch {
                    expected: format!("a substitution for {}", Printer::in_context(self.mode, g.len()).dom_ctx(phi)),
                    got: "`.`".into(),
                }),
            },
            DomSubst::Wk(k) => match psi.drop(*k) {
                Some(p) if self.equal_ctx(g, p, phi)? => Ok(()),
                _ => {
                    let mut pr = Printer::in_context(self.mode, g.len());
                    Err(CheckError::WeakenShapeMismatch(format!(
                        "wk {k} from {} to {}",
                        pr.dom_ctx(psi),
                        pr.dom_ctx(phi)
                    )))
                }
            },
            DomSubst::Snoc(r, m) => match phi {
                DomCtx::Snoc(phi2, a) => {
                    self.check_dom_subst(g, psi, r, phi2)?;
                    self.check_dom_term(g, psi, m, &subst_dom_ty(a, r)?)
                }
                _ => Err(CheckError::TypeMismatch {
                    expected: format!("a substitution for {}", Printer::in_context(self.mode, g.len()).dom_ctx(phi)),
                    got: "a longer substitution".into(),
                }),
            },
        }
    }

    // -----------------------------------------------------------------------
    // computation level

    pub fn check_ctx_type(&self, g: &[AnnType], ct: &CtxType) -> CResult<()> {
        self.check_dom_ctx(g, &ct.ctx)?;
        self.check_dom_type(g, &ct.ctx, &ct.ty)
    }

    pub fn check_comp_type(&self, g: &[AnnType], t: &CompType) -> CResult<()> {
        match t {
            CompType::Box(ct) => self.check_ctx_type(g, ct),
            CompType::Fn(a, b) => {
                self.check_ann(g, a)?;
                self.check_comp_type(&ext(g, (**a).clone()), b)
            }
        }
    }

    pub fn check_ann(&self, g: &[AnnType], a: &AnnType) -> CResult<()> {
        match a {
            AnnType::Ctx => Ok(()),
            AnnType::Ty(t) => self.check_comp_type(g, t),
        }
    }

    pub fn check_ctx_obj(&self, g: &[AnnType], m: &DomTerm, ct: &CtxType) -> CResult<()> {
        match ct.kind {
            CtxKind::Term => self.check_dom_term(g, &ct.ctx, m, &ct.ty),
            CtxKind::Var => {
                let got = match m {
                    DomTerm::Var(i) => self.lookup_dom(&ct.ctx, *i)?,
                    DomTerm::Unbox(t, s) if matches!(**s, DomSubst::Wk(_)) => match self.infer_comp(g, t)? {
                        AnnType::Ty(CompType::Box(c2)) if c2.kind == CtxKind::Var => {
                            self.check_dom_subst(g, &ct.ctx, s, &c2.ctx)?;
                            subst_dom_ty(&c2.ty, s)?
                        }
                        _ => return Err(CheckError::NotAVariable(self.show_dom(g, m))),
                    },
                    _ => return Err(CheckError::NotAVariable(self.show_dom(g, m))),
                };
                if self.equal_dom_ty(g, &ct.ctx, &ct.ty, &got)? {
                    Ok(())
                } else {
                    Err(CheckError::TypeMismatch { expected: self.show_dty(g, &ct.ty), got: self.show_dty(g, &got) })
                }
            }
        }
    }

    pub fn check_comp(&self, g: &[AnnType], t: &CompTerm, ty: &CompType) -> CResult<()> {
        match (t, ty) {
            (CompTerm::Fn(b), CompType::Fn(a, r)) => self.check_comp(&ext(g, (**a).clone()), b, r),
            (CompTerm::Box(_, m), CompType::Box(ct)) => self.check_ctx_obj(g, m, ct),
            (CompTerm::Fn(_), _) => {
                Err(CheckError::TypeMismatch { expected: self.show_ty(g, ty), got: "a function".into() })
            }
            (CompTerm::Box(..), _) => {
                Err(CheckError::TypeMismatch { expected: self.show_ty(g, ty), got: "a box".into() })
            }
            _ => match self.infer_comp(g, t)? {
                AnnType::Ty(got) => {
                    if self.subtype(g, &got, ty)? {
                        Ok(())
                    } else {
                        Err(CheckError::TypeMismatch { expected: self.show_ty(g, ty), got: self.show_ty(g, &got) })
                    }
                }
                AnnType::Ctx => Err(CheckError::AnnKindMismatch(format!(
                    "context variable `{}` used as a term",
                    self.show_term(g, t)
                ))),
            },
        }
    }

    fn arg_ann(&self, g: &[AnnType], a: &Arg) -> CResult<AnnType> {
        match a {
            Arg::Ctx(c) => {
                self.check_dom_ctx(g, c)?;
                Ok(AnnType::Ctx)
            }
            Arg::Term(t) => self.infer_comp(g, t),
        }
    }

    fn is_ctx_var(&self, g: &[AnnType], t: &CompTerm) -> bool {
        matches!(t, CompTerm::Var(i) if matches!(self.lookup_comp(g, *i), Ok(AnnType::Ctx)))
    }

    pub fn infer_comp(&self, g: &[AnnType], t: &CompTerm) -> CResult<AnnType> {
        match t {
            CompTerm::Var(i) => self.lookup_comp(g, *i),
            CompTerm::Box(..) | CompTerm::Fn(_) => match self.global_type(t) {
                Some(ty) => Ok(AnnType::Ty(ty)),
                None => Err(CheckError::CannotInfer(self.show_term(g, t))),
            },
            CompTerm::Rec(r) => Ok(AnnType::Ty(self.check_recursor(g, r)?)),
            CompTerm::App(f, a) => {
                if let (CompTerm::Fn(body), None) = (&**f, self.global_type(f)) {
                    let ann = self.arg_ann(g, a)?;
                    let a = self.normal_arg(&ann, a);
                    return match self.infer_comp(&ext(g, ann), body)? {
                        AnnType::Ty(r) => Ok(AnnType::Ty(inst_ty(&r, &[a])?)),
                        AnnType::Ctx => Err(CheckError::CannotInfer(self.show_term(g, t))),
                    };
                }
                let (ann, res) = match self.infer_comp(g, f)? {
                    AnnType::Ty(CompType::Fn(ann, res)) => (*ann, *res),
                    other => {
                        return Err(CheckError::NotAFunction(format!(
                            "`{}` has type {}",
                            self.show_term(g, f),
                            self.show_ann(g, &other)
                        )))
                    }
                };
                let arg = match (&ann, &**a) {
                    (AnnType::Ctx, Arg::Ctx(c)) => Arg::Ctx(c.clone()),
                    (AnnType::Ctx, Arg::Term(v)) if self.is_ctx_var(g, v) => Arg::Ctx(a.as_ctx().expect("variable")),
                    (AnnType::Ctx, Arg::Term(v)) => {
                        return Err(CheckError::AnnKindMismatch(format!(
                            "`{}` expects a context, got the term `{}`",
                            self.show_term(g, f),
                            self.show_term(g, v)
                        )))
                    }
                    (AnnType::Ty(_), Arg::Ctx(c)) => {
                        return Err(CheckError::AnnKindMismatch(format!(
                            "`{}` expects a term, got the context {}",
                            self.show_term(g, f),
                            Printer::in_context(self.mode, g.len()).dom_ctx(c)
                        )))
                    }
                    (AnnType::Ty(_), Arg::Term(v)) if self.is_ctx_var(g, v) => {
                        return Err(CheckError::AnnKindMismatch(format!(
                            "`{}` expects a term, got the context variable `{}`",
                            self.show_term(g, f),
                            self.show_term(g, v)
                        )))
                    }
                    (AnnType::Ty(_), Arg::Term(v)) => Arg::Term(v.clone()),
                };
                match (&ann, &arg) {
                    (AnnType::Ctx, Arg::Ctx(c)) => self.check_dom_ctx(g, c)?,
                    (AnnType::Ty(t1), Arg::Term(v)) => self.check_comp(g, v, t1)?,
                    _ => unreachable!(),
                }
                Ok(AnnType::Ty(inst_ty(&res, &[arg])?))
            }
        }
    }

    fn normal_arg(&self, ann: &AnnType, a: &Arg) -> Arg {
        match (ann, a) {
            (AnnType::Ctx, Arg::Term(CompTerm::Var(i))) => Arg::Ctx(DomCtx::Var(*i)),
            _ => a.clone(),
        }
    }

    pub fn check_recursor(&self, g: &[AnnType], r: &Rec) -> CResult<CompType> {
        let want = match r.kind {
            RecKind::Tm => Mode::Simple,
            RecKind::Ty | RecKind::Trm => Mode::Dep,
        };
        if self.mode != want {
            return Err(CheckError::ModeMismatch(format!("{:?} recursor in {} mode", r.kind, self.mode.as_str())));
        }
        self.check_comp_type(g, &r.motive)?;
        let n = r.kind.motive_binders();
        let (anns, _) = motive_parts(&r.motive, n).ok_or_else(|| CheckError::BadMotive(self.show_ty(g, &r.motive)))?;
        let expected = motive_binders(r.kind);
        let mut g2 = g.to_vec();
        for (a, e) in anns.iter().zip(&expected) {
            let e = shift_ann(e, 0, 0)?;
            let same = match (a, &e) {
                (AnnType::Ctx, AnnType::Ctx) => true,
                (AnnType::Ty(x), AnnType::Ty(y)) => self.nf_comp_type(&g2, x)? == self.nf_comp_type(&g2, y)?,
                _ => false,
            };
            if !same {
                return Err(CheckError::BadMotive(self.show_ty(g, &r.motive)));
            }
            g2.push(a.clone());
        }
        if r.branches.len() != r.kind.branch_count() {
            return Err(CheckError::BranchCountMismatch { expected: r.kind.branch_count(), got: r.branches.len() });
        }
        for (i, (b, k)) in r.branches.iter().zip(r.kind.branch_arities()).enumerate() {
            if !b.names.0.is_empty() && b.names.0.len() != *k {
                return Err(CheckError::BranchArityMismatch { branch: i, expected: *k, got: b.names.0.len() });
            }
        }
        self.check_dom_ctx(g, &r.ctx)?;
        let mut args = vec![Arg::Ctx(r.ctx.clone())];
        match r.kind {
            RecKind::Tm => self.check_comp(g, &r.scrut, &boxty(r.ctx.clone(), DomType::Tm))?,
            RecKind::Ty => self.check_comp(g, &r.scrut, &boxty(r.ctx.clone(), DomType::Ty))?,
            RecKind::Trm => {
                let idx = r.index.as_ref().ok_or_else(|| CheckError::BadMotive("missing type scrutinee".into()))?;
                self.check_closed(g, idx)?;
                self.check_comp(g, idx, &boxty(DomCtx::Empty, DomType::Ty))?;
                let st = boxty(r.ctx.clone(), trm(unbox(idx.clone(), DomSubst::Empty)));
                self.check_comp(g, &r.scrut, &st)?;
                args.push(Arg::Term(idx.clone()));
            }
        }
        args.push(Arg::Term(r.scrut.clone()));
        for (b, (binders, ty)) in r.branches.iter().zip(branch_sigs(r.kind, &r.motive)?) {
            self.check_comp(&ext_many(g, &binders), &b.body, &ty)?;
        }
        Ok(motive_at(&r.motive, r.kind, 0, &args)?)
    }

    fn check_closed(&self, g: &[AnnType], idx: &CompTerm) -> CResult<()> {
        match idx {
            CompTerm::Box(names, _) if !names.0.is_empty() => Err(CheckError::NotClosed(self.show_term(g, idx))),
            CompTerm::Box(..) | CompTerm::Fn(_) => Ok(()),
            _ => match self.infer_comp(g, idx)? {
                AnnType::Ty(CompType::Box(ct)) if ct.ctx != DomCtx::Empty => Err(CheckError::NotClosed(format!(
                    "`{}` lives in {}",
                    self.show_term(g, idx),
                    Printer::in_context(self.mode, g.len()).dom_ctx(&ct.ctx)
                ))),
                _ => Ok(()),
            },
        }
    }

    /// Top-level declaration: the type must be well formed and closed.
    pub fn check_decl(&self, ty: &CompType, body: &CompTerm) -> CResult<()> {
        self.check_comp_type(&[], ty)?;
        self.check_comp(&[], body, ty)
    }

    // -----------------------------------------------------------------------
    // equality

    /// `a ≤ b`: equal, or a variable-kind box where a term-kind one is wanted.
    fn subtype(&self, g: &[AnnType], a: &CompType, b: &CompType) -> CResult<bool> {
        let a = self.nf_comp_type(g, a)?;
        let b = self.nf_comp_type(g, b)?;
        Ok(sub_nf(&a, &b))
    }

    pub fn equal_dom_ty(&self, g: &[AnnType], psi: &DomCtx, a: &DomType, b: &DomType) -> CResult<bool> {
        if a == b {
            return Ok(true);
        }
        Ok(self.nf_dom_type(g, psi, a)? == self.nf_dom_type(g, psi, b)?)
    }

    pub fn equal_ctx(&self, g: &[AnnType], a: &DomCtx, b: &DomCtx) -> CResult<bool> {
        if a == b {
            return Ok(true);
        }
        Ok(self.nf_ctx(g, a)? == self.nf_ctx(g, b)?)
    }

    pub fn equal_comp_type(&self, g: &[AnnType], a: &CompType, b: &CompType) -> CResult<bool> {
        Ok(self.nf_comp_type(g, a)? == self.nf_comp_type(g, b)?)
    }

    pub fn equal_dom(&self, g: &[AnnType], psi: &DomCtx, m: &DomTerm, n: &DomTerm, a: &DomType) -> CResult<bool> {
        Ok(self.nf_dom(g, psi, m, a)? == self.nf_dom(g, psi, n, a)?)
    }

    pub fn equal_comp(&self, g: &[AnnType], t: &CompTerm, s: &CompTerm, ty: &CompType) -> CResult<bool> {
        Ok(self.nf_comp(g, t, ty)? == self.nf_comp(g, s, ty)?)
    }

    // -----------------------------------------------------------------------
    // reduction

    pub fn whnf_comp(&self, t: &CompTerm) -> CResult<CompTerm> {
        let mut t = t.clone();
        loop {
            match t {
                CompTerm::App(f, a) => {
                    let f = self.whnf_comp(&f)?;
                    match f {
                        CompTerm::Fn(b) => {
                            self.tick()?;
                            t = subst_comp(&b, &a)?;
                        }
                        f => return Ok(CompTerm::App(Box::new(f), a)),
                    }
                }
                CompTerm::Rec(r) => {
                    let scrut = self.whnf_comp(&r.scrut)?;
                    let r = Rec { scrut, ..*r };
                    match self.fire(&r)? {
                        Some(next) => {
                            self.tick()?;
                            t = next;
                        }
                        None => return Ok(CompTerm::Rec(Box::new(r))),
                    }
                }
                other => return Ok(other),
            }
        }
    }

    pub fn whnf_dom(&self, m: &DomTerm) -> CResult<DomTerm> {
        let mut m = m.clone();
        loop {
            match m {
                DomTerm::App(f, a) => match self.whnf_dom(&f)? {
                    DomTerm::Lam(b) => {
                        self.tick()?;
                        m = subst_dom0(&b, &a)?;
                    }
                    f => return Ok(DomTerm::App(Box::new(f), a)),
                },
                DomTerm::Unbox(t, s) => match self.whnf_comp(&t)? {
                    CompTerm::Box(_, n) => {
                        self.tick()?;
                        m = subst_dom(&n, &s)?;
                    }
                    t => return Ok(DomTerm::Unbox(Box::new(t), s)),
                },
                other => return Ok(other),
            }
        }
    }

    fn rec_on(&self, r: &Rec, ctx: DomCtx, index: Option<CompTerm>, scrut: CompTerm) -> CompTerm {
        CompTerm::Rec(Box::new(Rec {
            kind: r.kind,
            motive: r.motive.clone(),
            branches: r.branches.clone(),
            ctx,
            index,
            scrut,
        }))
    }

    /// Domain body of `lam f` one binder down.
    fn lam_body(&self, f: &DomTerm) -> CResult<DomTerm> {
        Ok(match self.whnf_dom(f)? {
            DomTerm::Lam(b) => *b,
            f => dapp(shift_dom(&f, 0, 1)?, dvar(0)),
        })
    }

    /// Strengthen a type annotation to the empty context.
    fn close(&self, a: &DomTerm, n: usize) -> CResult<Option<DomTerm>> {
        let a = self.normalize_dom(a, Strategy::Outermost)?;
        Ok(shift_dom(&a, 0, -(n as isize)).ok())
    }

    /// One recursor step on a weak-head scrutinee, if it is canonical.
    fn fire(&self, r: &Rec) -> CResult<Option<CompTerm>> {
        if r.branches.len() != r.kind.branch_count() {
            return Ok(None);
        }
        let CompTerm::Box(names, m) = &r.scrut else { return Ok(None) };
        let m = self.whnf_dom(m)?;
        let bx = |n: &Names, d: DomTerm| CompTerm::Box(n.clone(), Box::new(d));
        let closed = |d: DomTerm| CompTerm::Box(Names::none(), Box::new(d));
        let body = |i: usize| &r.branches[i].body;
        let psi = || Arg::Ctx(r.ctx.clone());
        let mut xnames = names.clone();
        xnames.0.push("x".into());
        let s = bx(names, m.clone());
        let out = match r.kind {
            RecKind::Tm => match &m {
                DomTerm::Var(_) => inst(body(0), &[psi(), Arg::Term(s)])?,
                DomTerm::App(f, n) => match &**f {
                    DomTerm::App(c, m1) if **c == DomTerm::Const(SConst::App) => {
                        let b1 = bx(names, (**m1).clone());
                        let b2 = bx(names, (**n).clone());
                        let r1 = self.rec_on(r, r.ctx.clone(), None, b1.clone());
                        let r2 = self.rec_on(r, r.ctx.clone(), None, b2.clone());
                        inst(body(1), &[psi(), Arg::Term(b1), Arg::Term(b2), Arg::Term(r1), Arg::Term(r2)])?
                    }
                    DomTerm::Const(SConst::Lam) => {
                        let mb = bx(&xnames, self.lam_body(n)?);
                        let rr = self.rec_on(r, snoc(r.ctx.clone(), DomType::Tm), None, mb.clone());
                        inst(body(2), &[psi(), Arg::Term(mb), Arg::Term(rr)])?
                    }
                    _ => return Ok(None),
                },
                _ => return Ok(None),
            },
            RecKind::Ty => match &m {
                DomTerm::Con(DCon::O, _) => inst(body(0), &[psi()])?,
                DomTerm::Con(DCon::Arr, xs) => {
                    let b1 = bx(names, xs[0].clone());
                    let b2 = bx(names, xs[1].clone());
                    let r1 = self.rec_on(r, r.ctx.clone(), None, b1.clone());
                    let r2 = self.rec_on(r, r.ctx.clone(), None, b2.clone());
                    inst(body(1), &[psi(), Arg::Term(b1), Arg::Term(b2), Arg::Term(r1), Arg::Term(r2)])?
                }
                _ => return Ok(None),
            },
            RecKind::Trm => {
                let n = r.ctx.len();
                match &m {
                    DomTerm::Var(_) => {
                        let idx = r.index.clone().expect("checked recursor");
                        inst(body(0), &[psi(), Arg::Term(idx), Arg::Term(s)])?
                    }
                    DomTerm::Con(DCon::Lam, xs) => {
                        let (Some(a), Some(b)) = (self.close(&xs[0], n)?, self.close(&xs[1], n)?) else {
                            return Ok(None);
                        };
                        let mb = bx(&xnames, self.lam_body(&xs[2])?);
                        let ctx2 = snoc(r.ctx.clone(), trm(xs[0].clone()));
                        let rr = self.rec_on(r, ctx2, Some(closed(b.clone())), mb.clone());
                        inst(
                            body(1),
                            &[psi(), Arg::Term(closed(a)), Arg::Term(closed(b)), Arg::Term(mb), Arg::Term(rr)],
                        )?
                    }
                    DomTerm::Con(DCon::App, xs) => {
                        let (Some(a), Some(b)) = (self.close(&xs[0], n)?, self.close(&xs[1], n)?) else {
                            return Ok(None);
                        };
                        let bm = bx(names, xs[2].clone());
                        let bn = bx(names, xs[3].clone());
                        let arr = closed(DomTerm::Con(DCon::Arr, vec![a.clone(), b.clone()]));
                        let rm = self.rec_on(r, r.ctx.clone(), Some(arr), bm.clone());
                        let rn = self.rec_on(r, r.ctx.clone(), Some(closed(a.clone())), bn.clone());
                        inst(
                            body(2),
                            &[
                                psi(),
                                Arg::Term(closed(a)),
                                Arg::Term(closed(b)),
                                Arg::Term(bm),
                                Arg::Term(bn),
                                Arg::Term(rm),
                                Arg::Term(rn),
                            ],
                        )?
                    }
                    _ => return Ok(None),
                }
            }
        };
        Ok(Some(out))
    }

    // -----------------------------------------------------------------------
    // β-normalization (untyped)

    pub fn normalize(&self, t: &CompTerm) -> CResult<CompTerm> {
        self.normalize_with(t, Strategy::Outermost)
    }

    pub fn normalize_with(&self, t: &CompTerm, st: Strategy) -> CResult<CompTerm> {
        match st {
            Strategy::Outermost => {
                let w = self.whnf_comp(t)?;
                self.norm_children(&w, st)
            }
            Strategy::Innermost => {
                let c = self.norm_children(t, st)?;
                match &c {
                    CompTerm::App(f, a) => {
                        if let CompTerm::Fn(b) = &**f {
                            self.tick()?;
                            return self.normalize_with(&subst_comp(b, a)?, st);
                        }
                        Ok(c)
                    }
                    CompTerm::Rec(r) => match self.fire(r)? {
                        Some(next) => {
                            self.tick()?;
                            self.normalize_with(&next, st)
                        }
                        None => Ok(c),
                    },
                    _ => Ok(c),
                }
            }
        }
    }

    fn norm_children(&self, t: &CompTerm, st: Strategy) -> CResult<CompTerm> {
        Ok(match t {
            CompTerm::Var(_) => t.clone(),
            CompTerm::Box(n, m) => CompTerm::Box(n.clone(), Box::new(self.normalize_dom(m, st)?)),
            CompTerm::Fn(b) => cfn(self.normalize_with(b, st)?),
            CompTerm::App(f, a) => {
                CompTerm::App(Box::new(self.normalize_with(f, st)?), Box::new(self.norm_arg(a, st)?))
            }
            CompTerm::Rec(r) => CompTerm::Rec(Box::new(Rec {
                kind: r.kind,
                motive: self.norm_cty(&r.motive, st)?,
                branches: r
                    .branches
                    .iter()
                    .map(|b| Ok(Branch { names: b.names.clone(), body: self.normalize_with(&b.body, st)? }))
                    .collect::<CResult<_>>()?,
                ctx: self.norm_ctx(&r.ctx, st)?,
                index: r.index.as_ref().map(|i| self.normalize_with(i, st)).transpose()?,
                scrut: self.normalize_with(&r.scrut, st)?,
            })),
        })
    }

    fn norm_arg(&self, a: &Arg, st: Strategy) -> CResult<Arg> {
        Ok(match a {
            Arg::Ctx(c) => Arg::Ctx(self.norm_ctx(c, st)?),
            Arg::Term(t) => Arg::Term(self.normalize_with(t, st)?),
        })
    }

    pub fn normalize_dom(&self, m: &DomTerm, st: Strategy) -> CResult<DomTerm> {
        match st {
            Strategy::Outermost => {
                let w = self.whnf_dom(m)?;
                self.norm_dom_children(&w, st)
            }
            Strategy::Innermost => {
                let c = self.norm_dom_children(m, st)?;
                match &c {
                    DomTerm::App(f, a) => {
                        if let DomTerm::Lam(b) = &**f {
                            self.tick()?;
                            return self.normalize_dom(&subst_dom0(b, a)?, st);
                        }
                        Ok(c)
                    }
                    DomTerm::Unbox(t, s) => {
                        if let CompTerm::Box(_, n) = &**t {
                            self.tick()?;
                            return self.normalize_dom(&subst_dom(n, s)?, st);
                        }
                        Ok(c)
                    }
                    _ => Ok(c),
                }
            }
        }
    }

    fn norm_dom_children(&self, m: &DomTerm, st: Strategy) -> CResult<DomTerm> {
        Ok(match m {
            DomTerm::Var(_) | DomTerm::Const(_) => m.clone(),
            DomTerm::Lam(b) => dlam(self.normalize_dom(b, st)?),
            DomTerm::App(f, a) => dapp(self.normalize_dom(f, st)?, self.normalize_dom(a, st)?),
            DomTerm::Con(k, xs) => {
                DomTerm::Con(*k, xs.iter().map(|x| self.normalize_dom(x, st)).collect::<CResult<_>>()?)
            }
            DomTerm::Unbox(t, s) => unbox(self.normalize_with(t, st)?, self.norm_subst(s, st)?),
        })
    }

    fn norm_subst(&self, s: &DomSubst, st: Strategy) -> CResult<DomSubst> {
        Ok(match s {
            DomSubst::Snoc(r, m) => ssnoc(self.norm_subst(r, st)?, self.normalize_dom(m, st)?),
            _ => s.clone(),
        })
    }

    fn norm_ctx(&self, c: &DomCtx, st: Strategy) -> CResult<DomCtx> {
        Ok(match c {
            DomCtx::Snoc(r, a) => snoc(self.norm_ctx(r, st)?, self.norm_dty(a, st)?),
            _ => c.clone(),
        })
    }

    fn norm_dty(&self, a: &DomType, st: Strategy) -> CResult<DomType> {
        Ok(match a {
            DomType::Trm(m) => trm(self.normalize_dom(m, st)?),
            DomType::Pi(x, y) => pi(self.norm_dty(x, st)?, self.norm_dty(y, st)?),
            _ => a.clone(),
        })
    }

    fn norm_cty(&self, t: &CompType, st: Strategy) -> CResult<CompType> {
        Ok(match t {
            CompType::Box(ct) => CompType::Box(CtxType {
                kind: ct.kind,
                ctx: self.norm_ctx(&ct.ctx, st)?,
                ty: self.norm_dty(&ct.ty, st)?,
            }),
            CompType::Fn(a, b) => fnty(
                match &**a {
                    AnnType::Ctx => AnnType::Ctx,
                    AnnType::Ty(t) => AnnType::Ty(self.norm_cty(t, st)?),
                },
                self.norm_cty(b, st)?,
            ),
        })
    }

    // -----------------------------------------------------------------------
    // η-long normal forms (typed readback)

    pub fn nf_comp(&self, g: &[AnnType], t: &CompTerm, ty: &CompType) -> CResult<CompTerm> {
        match ty {
            CompType::Fn(a, r) => {
                let body = match self.whnf_comp(t)? {
                    CompTerm::Fn(b) => *b,
                    w => CompTerm::App(Box::new(shift_comp(&w, 0, 1)?), Box::new(var_arg(a))),
                };
                Ok(cfn(self.nf_comp(&ext(g, (**a).clone()), &body, r)?))
            }
            CompType::Box(ct) => {
                let m = match self.whnf_comp(t)? {
                    CompTerm::Box(_, m) => *m,
                    w => unbox(w, DomSubst::id()),
                };
                Ok(cbox(self.nf_dom(g, &ct.ctx, &m, &ct.ty)?))
            }
        }
    }

    pub fn nf_dom(&self, g: &[AnnType], psi: &DomCtx, m: &DomTerm, a: &DomType) -> CResult<DomTerm> {
        match a {
            DomType::Arrow(x, y) | DomType::Pi(x, y) => {
                let body = match self.whnf_dom(m)? {
                    DomTerm::Lam(b) => *b,
                    w => dapp(shift_dom(&w, 0, 1)?, dvar(0)),
                };
                Ok(dlam(self.nf_dom(g, &snoc(psi.clone(), (**x).clone()), &body, y)?))
            }
            _ => {
                let w = self.whnf_dom(m)?;
                match &w {
                    DomTerm::Con(k, xs) => {
                        let tyt = DomType::Ty;
                        let out = match k {
                            DCon::O => vec![],
                            DCon::Arr => vec![self.nf_dom(g, psi, &xs[0], &tyt)?, self.nf_dom(g, psi, &xs[1], &tyt)?],
                            DCon::Lam => {
                                let fty = pi(trm(xs[0].clone()), trm(shift_dom(&xs[1], 0, 1)?));
                                vec![
                                    self.nf_dom(g, psi, &xs[0], &tyt)?,
                                    self.nf_dom(g, psi, &xs[1], &tyt)?,
                                    self.nf_dom(g, psi, &xs[2], &fty)?,
                                ]
                            }
                            DCon::App => {
                                let arr = DomTerm::Con(DCon::Arr, vec![xs[0].clone(), xs[1].clone()]);
                                vec![
                                    self.nf_dom(g, psi, &xs[0], &tyt)?,
                                    self.nf_dom(g, psi, &xs[1], &tyt)?,
                                    self.nf_dom(g, psi, &xs[2], &trm(arr))?,
                                    self.nf_dom(g, psi, &xs[3], &trm(xs[0].clone()))?,
                                ]
                            }
                        };
                        Ok(DomTerm::Con(*k, out))
                    }
                    _ => Ok(self.nf_dom_ne(g, psi, &w)?.0),
                }
            }
        }
    }

    fn nf_dom_ne(&self, g: &[AnnType], psi: &DomCtx, m: &DomTerm) -> CResult<(DomTerm, DomType)> {
        match m {
            DomTerm::Var(i) => Ok((m.clone(), self.lookup_dom(psi, *i)?)),
            DomTerm::Const(c) => Ok((m.clone(), self.sconst_type(*c))),
            DomTerm::App(f, a) => {
                let (f2, ft) = self.nf_dom_ne(g, psi, f)?;
                match ft {
                    DomType::Arrow(x, y) => Ok((dapp(f2, self.nf_dom(g, psi, a, &x)?), *y)),
                    DomType::Pi(x, y) => Ok((dapp(f2, self.nf_dom(g, psi, a, &x)?), subst_dom_ty0(&y, a)?)),
                    t => Err(CheckError::NotAFunction(self.show_dty(g, &t))),
                }
            }
            DomTerm::Unbox(t, s) => {
                let (t2, tt) = self.nf_comp_ne(g, t)?;
                match tt {
                    AnnType::Ty(CompType::Box(ct)) => {
                        let s2 = self.nf_subst(g, psi, s, &ct.ctx)?;
                        Ok((unbox(t2, s2), subst_dom_ty(&ct.ty, s)?))
                    }
                    other => Err(CheckError::BoxExpected(self.show_ann(g, &other))),
                }
            }
            DomTerm::Lam(_) | DomTerm::Con(..) => Err(CheckError::CannotInfer(self.show_dom(g, m))),
        }
    }

    fn nf_subst(&self, g: &[AnnType], psi: &DomCtx, s: &DomSubst, phi: &DomCtx) -> CResult<DomSubst> {
        match phi {
            DomCtx::Empty => Ok(DomSubst::Empty),
            DomCtx::Var(_) => Ok(s.clone()),
            DomCtx::Snoc(phi2, a) => {
                let rest = drop_subst(s, 1)?;
                let m = lookup_subst(s, 0)?;
                let a2 = subst_dom_ty(a, &rest)?;
                Ok(ssnoc(self.nf_subst(g, psi, &rest, phi2)?, self.nf_dom(g, psi, &m, &a2)?))
            }
        }
    }

    fn nf_comp_ne(&self, g: &[AnnType], t: &CompTerm) -> CResult<(CompTerm, AnnType)> {
        match t {
            CompTerm::Var(i) => Ok((t.clone(), self.lookup_comp(g, *i)?)),
            CompTerm::App(f, a) => {
                let (f2, ft) = self.nf_comp_ne(g, f)?;
                let AnnType::Ty(CompType::Fn(ann, res)) = ft else {
                    return Err(CheckError::NotAFunction(self.show_term(g, f)));
                };
                let (a2, a1) = match (&*ann, &**a) {
                    (AnnType::Ctx, _) => {
                        let c = a.as_ctx().ok_or_else(|| CheckError::AnnKindMismatch(self.show_term(g, t)))?;
                        (Arg::Ctx(self.nf_ctx(g, &c)?), Arg::Ctx(c))
                    }
                    (AnnType::Ty(t1), Arg::Term(v)) => (Arg::Term(self.nf_comp(g, v, t1)?), Arg::Term(v.clone())),
                    (AnnType::Ty(_), Arg::Ctx(_)) => return Err(CheckError::AnnKindMismatch(self.show_term(g, t))),
                };
                Ok((CompTerm::App(Box::new(f2), Box::new(a2)), AnnType::Ty(inst_ty(&res, &[a1])?)))
            }
            CompTerm::Rec(r) => {
                let ctx = self.nf_ctx(g, &r.ctx)?;
                let mut args = vec![Arg::Ctx(r.ctx.clone())];
                let index = match &r.index {
                    Some(i) => {
                        args.push(Arg::Term(i.clone()));
                        Some(self.nf_comp(g, i, &boxty(DomCtx::Empty, DomType::Ty))?)
                    }
                    None => None,
                };
                let sty = match r.kind {
                    RecKind::Tm => boxty(r.ctx.clone(), DomType::Tm),
                    RecKind::Ty => boxty(r.ctx.clone(), DomType::Ty),
                    RecKind::Trm => boxty(r.ctx.clone(), trm(unbox(r.index.clone().expect("index"), DomSubst::Empty))),
                };
                let scrut = self.nf_comp(g, &r.scrut, &sty)?;
                args.push(Arg::Term(r.scrut.clone()));
                let branches = r
                    .branches
                    .iter()
                    .zip(branch_sigs(r.kind, &r.motive)?)
                    .map(|(b, (binders, ty))| {
                        Ok(Branch { names: Names::none(), body: self.nf_comp(&ext_many(g, &binders), &b.body, &ty)? })
                    })
                    .collect::<CResult<_>>()?;
                let out = Rec { kind: r.kind, motive: self.nf_comp_type(g, &r.motive)?, branches, ctx, index, scrut };
                Ok((CompTerm::Rec(Box::new(out)), AnnType::Ty(motive_at(&r.motive, r.kind, 0, &args)?)))
            }
            CompTerm::Box(..) | CompTerm::Fn(_) => Err(CheckError::CannotInfer(self.show_term(g, t))),
        }
    }

    pub fn nf_ctx(&self, g: &[AnnType], c: &DomCtx) -> CResult<DomCtx> {
        Ok(match c {
            DomCtx::Snoc(r, a) => snoc(self.nf_ctx(g, r)?, self.nf_dom_type(g, r, a)?),
            _ => c.clone(),
        })
    }

    pub fn nf_dom_type(&self, g: &[AnnType], psi: &DomCtx, a: &DomType) -> CResult<DomType> {
        Ok(match a {
            DomType::Trm(m) => trm(self.nf_dom(g, psi, m, &DomType::Ty)?),
            DomType::Pi(x, y) => {
                pi(self.nf_dom_type(g, psi, x)?, self.nf_dom_type(g, &snoc(psi.clone(), (**x).clone()), y)?)
            }
            _ => a.clone(),
        })
    }

    pub fn nf_comp_type(&self, g: &[AnnType], t: &CompType) -> CResult<CompType> {
        Ok(match t {
            CompType::Box(ct) => CompType::Box(CtxType {
                kind: ct.kind,
                ctx: self.nf_ctx(g, &ct.ctx)?,
                ty: self.nf_dom_type(g, &ct.ctx, &ct.ty)?,
            }),
            CompType::Fn(a, b) => {
                let a2 = match &**a {
                    AnnType::Ctx => AnnType::Ctx,
                    AnnType::Ty(t) => AnnType::Ty(self.nf_comp_type(g, t)?),
                };
                fnty(a2, self.nf_comp_type(&ext(g, (**a).clone()), b)?)
            }
        })
    }
}

/// No domain variables and no weakenings: meaningful in any context.
fn closed_dty(a: &DomType) -> bool {
    match a {
        DomType::Tm | DomType::Ty => true,
        DomType::Arrow(x, y) | DomType::Pi(x, y) => closed_dty(x) && closed_dty(y),
        DomType::Trm(m) => closed_dom(m),
    }
}

fn closed_dom(m: &DomTerm) -> bool {
    match m {
        DomTerm::Var(_) => false,
        DomTerm::Const(_) => true,
        DomTerm::Lam(b) => closed_dom(b),
        DomTerm::App(f, a) => closed_dom(f) && closed_dom(a),
        DomTerm::Con(_, xs) => xs.iter().all(closed_dom),
        DomTerm::Unbox(_, s) => closed_subst(s),
    }
}

fn closed_subst(s: &DomSubst) -> bool {
    match s {
        DomSubst::Empty => true,
        DomSubst::Wk(_) => false,
        DomSubst::Snoc(r, m) => closed_subst(r) && closed_dom(m),
    }
}

/// Subsumption on normal types.
fn sub_nf(a: &CompType, b: &CompType) -> bool {
    match (a, b) {
        (CompType::Box(x), CompType::Box(y)) => {
            x.ctx == y.ctx && x.ty == y.ty && (x.kind == y.kind || (x.kind == CtxKind::Var && y.kind == CtxKind::Term))
        }
        (CompType::Fn(a1, r1), CompType::Fn(a2, r2)) => a1 == a2 && sub_nf(r1, r2),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{parse_comp_term, parse_comp_type};

    fn ok(mode: Mode, ty: &str, t: &str) -> CResult<()> {
        let ty = parse_comp_type(ty, mode).unwrap();
        let t = parse_comp_term(t, mode).unwrap();
        Checker::new(mode).check_decl(&ty, &t)
    }

    #[test]
    fn identity_fn() {
        ok(Mode::Simple, "(psi:ctx) => (y:[psi |- tm]) => [psi |- tm]", "fn p. fn y. y").unwrap();
    }

    #[test]
    fn closed_lam() {
        ok(Mode::Simple, "[ |- tm]", "box(|- lam \\x. x)").unwrap();
    }

    #[test]
    fn app_rule() {
        ok(Mode::Simple, "[x:tm, y:tm |- tm]", "box(x, y |- app (lam \\w. app x w) y)").unwrap();
        let e = ok(Mode::Simple, "[x:tm |- tm]", "box(x |- x x)").unwrap_err();
        assert_eq!(e.class(), "NotAFunction");
    }

    #[test]
    fn variable_kind() {
        ok(Mode::Simple, "[x:tm |-# tm]", "box(x |- x)").unwrap();
        let e = ok(Mode::Simple, "[x:tm |-# tm]", "box(x |- lam \\y. y)").unwrap_err();
        assert_eq!(e.class(), "NotAVariable");
    }

    #[test]
    fn ctx_arg_kind_clash() {
        let e = ok(Mode::Simple, "[ |- tm]", "(fn f. f box(|- lam \\x. x)) (fn p. box(|- lam \\x. x))");
        assert!(e.is_err());
        let ty = parse_comp_type("(p:ctx) => [p |- tm] => [p |- tm]", Mode::Simple).unwrap();
        let f = parse_comp_term("fn p. fn y. y", Mode::Simple).unwrap();
        let c = Checker::new(Mode::Simple);
        let g = vec![AnnType::Ty(ty)];
        let t = capp(cvar(0), cbox(simple_lam(dlam(dvar(0)))));
        assert_eq!(c.infer_comp(&g, &t).unwrap_err().class(), "AnnKindMismatch");
        let _ = f;
    }

    #[test]
    fn dep_lam() {
        ok(Mode::Dep, "[ |- trm (arr o o)]", "box(|- lam o o (\\x. x))").unwrap();
        let e = ok(Mode::Dep, "[ |- ty]", "box(|- lam o o \\x. x)").unwrap_err();
        assert_eq!(e.class(), "TypeMismatch");
        let e = ok(Mode::Dep, "[ |- trm (arr o o)]", "box(|- lam o (arr o o) \\x. x)").unwrap_err();
        assert_eq!(e.class(), "TypeMismatch");
    }

    #[test]
    fn unbox_box_beta() {
        let c = Checker::new(Mode::Simple);
        let m = simple_lam(dlam(dvar(0)));
        let t = unbox(cbox(simple_app(dvar(0), dvar(0))), ssnoc(DomSubst::Empty, m.clone()));
        let n = c.normalize_dom(&t, Strategy::Outermost).unwrap();
        assert_eq!(n, simple_app(m.clone(), m));
    }

    #[test]
    fn box_eta() {
        let c = Checker::new(Mode::Simple);
        let ty = boxty(snoc(DomCtx::Empty, DomType::Tm), DomType::Tm);
        let g = vec![AnnType::Ty(ty.clone())];
        let t = cvar(0);
        let e = cbox(unbox(cvar(0), DomSubst::id()));
        assert!(c.equal_comp(&g, &t, &e, &ty).unwrap());
    }

    #[test]
    fn neutral_rec_is_stuck() {
        let src = "fn p. fn y. rec<(q:ctx) => (z:[q |- tm]) => [q |- tm]>((q, v -> v); (q, m, n, fm, fn -> box(q |- app unbox(fm; id) unbox(fn; id))); (q, m, fm -> box(q |- lam \\x. unbox(fm; .., x)))) p y";
        let _ = src;
        let c = Checker::new(Mode::Simple);
        let r = Rec {
            kind: RecKind::Tm,
            motive: parse_comp_type("(q:ctx) => (z:[q |- tm]) => [q |- tm]", Mode::Simple).unwrap(),
            branches: vec![
                Branch { names: Names::none(), body: cvar(0) },
                Branch { names: Names::none(), body: cvar(0) },
                Branch { names: Names::none(), body: cvar(0) },
            ],
            ctx: DomCtx::Empty,
            index: None,
            scrut: cvar(0),
        };
        let t = CompTerm::Rec(Box::new(r));
        assert_eq!(c.whnf_comp(&t).unwrap(), t);
    }
}
