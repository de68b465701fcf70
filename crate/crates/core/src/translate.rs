//! Type-directed translation of checked Cocon terms into the internal theory.
//!
//! Computation variables become crisp variables. Domain terms of the simple
//! variant become functions `El ⟦Ψ⟧ → El ⟦A⟧`; dep-mode domain terms become
//! terms of the internal category with families.

use crate::check::{branch_sigs, CheckError, Checker};
use crate::itt::{
    self, arrow_code, ctx_ty, cv, dvar_k, el, elv, ext, fst_k, iann, iapp, ibox, icapp, iclam, ilam, iletbox, k0, k1,
    k2, msub, obj, ov, pairh, pk, shift, tbox, tcfn, tfn, times, tm_in, tmv_in, trmc, up, IChecker, ICtx, IRec, ITerm,
    IType, Zone, K,
};
use crate::surface::Printer;
use crate::syntax::*;
use std::cell::{Cell, RefCell};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("{0}")]
    Check(#[from] CheckError),
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
    #[error("cannot translate: {0}")]
    Unsupported(String),
}

pub type TResult<T> = Result<T, TranslateError>;

/// One translation step: which rule fired on which source node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub depth: usize,
    pub case: &'static str,
    pub source: String,
}

/// Crisp binders in scope, outermost first; `true` marks a binder that
/// comes from the source computation context, `false` one made by `letbox`.
type Layout = Vec<bool>;

pub struct Translator<'a> {
    ck: &'a Checker,
    mode: Mode,
    tracing: bool,
    depth: Cell<usize>,
    trace: RefCell<Vec<TraceStep>>,
}

struct Guard<'b>(&'b Cell<usize>);

impl Drop for Guard<'_> {
    fn drop(&mut self) {
        self.0.set(self.0.get() - 1);
    }
}

fn with(g: &[AnnType], a: AnnType) -> Vec<AnnType> {
    let mut g = g.to_vec();
    g.push(a);
    g
}

fn lay_with(lay: &[bool], b: bool) -> Layout {
    let mut l = lay.to_vec();
    l.push(b);
    l
}

fn cvar(lay: &[bool], i: usize) -> TResult<ITerm> {
    let mut seen = 0;
    for (pos, src) in lay.iter().rev().enumerate() {
        if *src {
            if seen == i {
                return Ok(cv(pos));
            }
            seen += 1;
        }
    }
    Err(TranslateError::Unsupported(format!("computation variable {i} out of scope")))
}

impl<'a> Translator<'a> {
    pub fn new(ck: &'a Checker, mode: Mode, tracing: bool) -> Translator<'a> {
        Translator { ck, mode, tracing, depth: Cell::new(0), trace: RefCell::new(Vec::new()) }
    }

    pub fn take_trace(&self) -> Vec<TraceStep> {
        std::mem::take(&mut self.trace.borrow_mut())
    }

    fn step(&self, case: &'static str, source: impl FnOnce() -> String) -> Guard<'_> {
        if self.tracing {
            self.trace.borrow_mut().push(TraceStep { depth: self.depth.get(), case, source: source() });
        }
        self.depth.set(self.depth.get() + 1);
        Guard(&self.depth)
    }

    fn pr(&self, g: &[AnnType]) -> Printer {
        Printer::in_context(self.mode, g.len())
    }

    // -----------------------------------------------------------------------
    // contexts and domain types

    pub fn ctx(&self, g: &[AnnType], lay: &[bool], psi: &DomCtx) -> TResult<ITerm> {
        match psi {
            DomCtx::Empty => {
                let _s = self.step("ctx-empty", || ".".into());
                Ok(match self.mode {
                    Mode::Simple => k0(K::Unit),
                    Mode::Dep => k0(K::Top),
                })
            }
            DomCtx::Var(i) => {
                let _s = self.step("ctx-var", || self.pr(g).dom_ctx(psi));
                cvar(lay, *i)
            }
            DomCtx::Snoc(c, a) => {
                let _s = self.step("ctx-extend", || self.pr(g).dom_ctx(psi));
                let head = self.ctx(g, lay, c)?;
                Ok(match self.mode {
                    Mode::Simple => times(head, self.sty(a)?),
                    Mode::Dep => ext(head, self.dty(g, lay, c, a)?),
                })
            }
        }
    }

    fn sty(&self, a: &DomType) -> TResult<ITerm> {
        match a {
            DomType::Tm => Ok(k0(K::Tm)),
            DomType::Arrow(x, y) => Ok(arrow_code(self.sty(x)?, self.sty(y)?)),
            _ => Err(TranslateError::Unsupported("dependent type in simple mode".into())),
        }
    }

    fn dty(&self, g: &[AnnType], lay: &[bool], psi: &DomCtx, a: &DomType) -> TResult<ITerm> {
        match a {
            DomType::Ty => {
                let _s = self.step("ty", || "ty".into());
                Ok(k0(K::TyC))
            }
            DomType::Trm(m) => {
                let _s = self.step("trm", || self.pr(g).dom_type(a));
                Ok(trmc(self.dterm(g, lay, psi, m, &DomType::Ty)?))
            }
            DomType::Pi(x, y) => {
                let _s = self.step("pi", || self.pr(g).dom_type(a));
                Ok(k2(K::Pi, self.dty(g, lay, psi, x)?, self.dty(g, lay, &snoc(psi.clone(), (**x).clone()), y)?))
            }
            _ => Err(TranslateError::Unsupported("simple type in dep mode".into())),
        }
    }

    pub fn dom_ty(&self, g: &[AnnType], lay: &[bool], psi: &DomCtx, a: &DomType) -> TResult<ITerm> {
        match self.mode {
            Mode::Simple => self.sty(a),
            Mode::Dep => self.dty(g, lay, psi, a),
        }
    }

    /// Translation of a domain term at a known type.
    pub fn dom(&self, g: &[AnnType], lay: &[bool], psi: &DomCtx, m: &DomTerm, a: &DomType) -> TResult<ITerm> {
        match self.mode {
            Mode::Simple => self.sterm(g, lay, psi, m, a),
            Mode::Dep => self.dterm(g, lay, psi, m, a),
        }
    }

    /// Translation of a substitution `Ψ ⊢ σ : Φ`.
    pub fn dom_subst(&self, g: &[AnnType], lay: &[bool], psi: &DomCtx, s: &DomSubst, phi: &DomCtx) -> TResult<ITerm> {
        match self.mode {
            Mode::Simple => self.ssubst(g, lay, psi, s, phi),
            Mode::Dep => self.dsubst(g, lay, psi, s, phi),
        }
    }

    // -----------------------------------------------------------------------
    // simple mode: domain terms as functions out of El ⟦Ψ⟧

    fn sterm(&self, g: &[AnnType], lay: &[bool], psi: &DomCtx, m: &DomTerm, a: &DomType) -> TResult<ITerm> {
        let show = || self.pr(g).dom_term(m);
        let pty = el(self.ctx(g, lay, psi)?);
        let tm = || k0(K::Tm);
        match m {
            DomTerm::Var(k) => {
                let _s = self.step("var", show);
                Ok(ilam(pty, k1(K::Snd, fst_k(*k, ov(0)))))
            }
            DomTerm::Lam(b) => {
                let _s = self.step("lam", show);
                let DomType::Arrow(x, y) = a else {
                    return Err(TranslateError::Unsupported("lambda at a non-arrow type".into()));
                };
                let eb = self.sterm(g, lay, &snoc(psi.clone(), (**x).clone()), b, y)?;
                Ok(ilam(pty, k1(K::ArrowI, ilam(el(self.sty(x)?), iapp(eb, k2(K::Pair, ov(1), ov(0)))))))
            }
            DomTerm::App(f, x) => {
                let _s = self.step("app", show);
                let xt = match &**f {
                    DomTerm::Lam(_) => self.ck.infer_dom_term(g, psi, x)?,
                    _ => match self.ck.infer_dom_term(g, psi, f)? {
                        DomType::Arrow(x1, _) => *x1,
                        _ => return Err(TranslateError::Unsupported("application of a non-function".into())),
                    },
                };
                let ef = self.sterm(g, lay, psi, f, &arrow(xt.clone(), a.clone()))?;
                let ex = self.sterm(g, lay, psi, x, &xt)?;
                Ok(ilam(pty, iapp(k1(K::ArrowE, iapp(ef, ov(0))), iapp(ex, ov(0)))))
            }
            DomTerm::Const(SConst::Lam) => {
                let _s = self.step("const-lam", show);
                Ok(ilam(pty, k1(K::ArrowI, ilam(el(arrow_code(tm(), tm())), k1(K::SLam, k1(K::ArrowE, ov(0)))))))
            }
            DomTerm::Const(SConst::App) => {
                let _s = self.step("const-app", show);
                let inner = k1(K::ArrowI, ilam(el(tm()), k2(K::SApp, ov(1), ov(0))));
                Ok(ilam(pty, k1(K::ArrowI, ilam(el(tm()), inner))))
            }
            DomTerm::Unbox(t, s) => {
                if let CompTerm::Box(_, n) = &**t {
                    if self.ck.global_type(t).is_none() {
                        let _s = self.step("unbox-box", show);
                        let phi = self.ck.infer_subst_target(g, psi, s)?;
                        let en = self.sterm(g, lay, &phi, n, a)?;
                        let es = self.ssubst(g, lay, psi, s, &phi)?;
                        return Ok(ilam(pty, iapp(en, iapp(es, ov(0)))));
                    }
                }
                let _s = self.step("unbox", show);
                let ct = self.box_of(g, t)?;
                let (e1, _) = self.comp_infer(g, lay, t)?;
                let lay1 = lay_with(lay, false);
                let es = self.ssubst(g, &lay1, psi, s, &ct.ctx)?;
                let x = if ct.kind == CtxKind::Var { k1(K::VCoe, cv(0)) } else { cv(0) };
                Ok(iletbox(e1, ilam(el(self.ctx(g, &lay1, psi)?), iapp(x, iapp(es, ov(0))))))
            }
            DomTerm::Con(..) => Err(TranslateError::Unsupported("dep constructor in simple mode".into())),
        }
    }

    fn ssubst(&self, g: &[AnnType], lay: &[bool], psi: &DomCtx, s: &DomSubst, phi: &DomCtx) -> TResult<ITerm> {
        let pty = el(self.ctx(g, lay, psi)?);
        match s {
            DomSubst::Empty => {
                let _s = self.step("sub-empty", || ".".into());
                Ok(ilam(pty, k0(K::Terminal)))
            }
            DomSubst::Wk(k) => {
                let _s = self.step("sub-wk", || format!("wk {k}"));
                Ok(ilam(pty, fst_k(*k, ov(0))))
            }
            DomSubst::Snoc(r, m) => {
                let _s = self.step("sub-extend", || self.pr(g).dom_term(m));
                let DomCtx::Snoc(phi1, a) = phi else {
                    return Err(TranslateError::Unsupported("substitution longer than its target".into()));
                };
                let er = self.ssubst(g, lay, psi, r, phi1)?;
                let em = self.sterm(g, lay, psi, m, a)?;
                Ok(ilam(pty, k2(K::Pair, iapp(er, ov(0)), iapp(em, ov(0)))))
            }
        }
    }

    // -----------------------------------------------------------------------
    // dep mode: domain terms as terms of the internal CwF

    fn dterm(&self, g: &[AnnType], lay: &[bool], psi: &DomCtx, m: &DomTerm, a: &DomType) -> TResult<ITerm> {
        let show = || self.pr(g).dom_term(m);
        match m {
            DomTerm::Var(k) => {
                let _s = self.step("var", show);
                Ok(dvar_k(*k))
            }
            DomTerm::Lam(b) => {
                let _s = self.step("lam", show);
                let DomType::Pi(x, y) = a else {
                    return Err(TranslateError::Unsupported("lambda at a non-Pi type".into()));
                };
                let psi1 = snoc(psi.clone(), (**x).clone());
                Ok(k2(K::Abs, self.dty(g, lay, psi, x)?, self.dterm(g, lay, &psi1, b, y)?))
            }
            DomTerm::App(f, x) => {
                let _s = self.step("app", show);
                let fty = match &**f {
                    DomTerm::Lam(b) => {
                        let xt = self.ck.infer_dom_term(g, psi, x)?;
                        let bt = self.ck.infer_dom_term(g, &snoc(psi.clone(), xt.clone()), b)?;
                        pi(xt, bt)
                    }
                    _ => self.ck.infer_dom_term(g, psi, f)?,
                };
                let DomType::Pi(xt, _) = &fty else {
                    return Err(TranslateError::Unsupported("application of a non-function".into()));
                };
                let ef = self.dterm(g, lay, psi, f, &fty)?;
                let ex = self.dterm(g, lay, psi, x, xt)?;
                Ok(k2(K::AppT, ef, ex))
            }
            DomTerm::Con(DCon::O, _) => {
                let _s = self.step("o", show);
                Ok(k0(K::O))
            }
            DomTerm::Con(DCon::Arr, xs) => {
                let _s = self.step("arr", show);
                Ok(k2(
                    K::Arr,
                    self.dterm(g, lay, psi, &xs[0], &DomType::Ty)?,
                    self.dterm(g, lay, psi, &xs[1], &DomType::Ty)?,
                ))
            }
            DomTerm::Con(DCon::Lam, xs) => {
                let _s = self.step("lam-const", show);
                let ea = self.dterm(g, lay, psi, &xs[0], &DomType::Ty)?;
                let eb = self.dterm(g, lay, psi, &xs[1], &DomType::Ty)?;
                let fty = pi(trm(xs[0].clone()), trm(shift_dom(&xs[1], 0, 1)?));
                let ef = self.dterm(g, lay, psi, &xs[2], &fty)?;
                Ok(ITerm::Const(K::DLam, vec![ea, eb, k2(K::AppT, msub(ef, pk(1)), k0(K::V))]))
            }
            DomTerm::Con(DCon::App, xs) => {
                let _s = self.step("app-const", show);
                let ty = DomType::Ty;
                let arr = DomTerm::Con(DCon::Arr, vec![xs[0].clone(), xs[1].clone()]);
                Ok(ITerm::Const(
                    K::DApp,
                    vec![
                        self.dterm(g, lay, psi, &xs[0], &ty)?,
                        self.dterm(g, lay, psi, &xs[1], &ty)?,
                        self.dterm(g, lay, psi, &xs[2], &trm(arr))?,
                        self.dterm(g, lay, psi, &xs[3], &trm(xs[0].clone()))?,
                    ],
                ))
            }
            DomTerm::Unbox(t, s) => {
                if let CompTerm::Box(_, n) = &**t {
                    if self.ck.global_type(t).is_none() {
                        let _s = self.step("unbox-box", show);
                        let phi = self.ck.infer_subst_target(g, psi, s)?;
                        let nt = self.ck.infer_dom_term(g, &phi, n)?;
                        return Ok(msub(self.dterm(g, lay, &phi, n, &nt)?, self.dsubst(g, lay, psi, s, &phi)?));
                    }
                }
                let _s = self.step("unbox", show);
                let ct = self.box_of(g, t)?;
                let (e1, _) = self.comp_infer(g, lay, t)?;
                let lay1 = lay_with(lay, false);
                let es = self.dsubst(g, &lay1, psi, s, &ct.ctx)?;
                let x = if ct.kind == CtxKind::Var { k1(K::VCoe, cv(0)) } else { cv(0) };
                Ok(iletbox(e1, msub(x, es)))
            }
            DomTerm::Const(_) => Err(TranslateError::Unsupported("simple constant in dep mode".into())),
        }
    }

    fn dsubst(&self, g: &[AnnType], lay: &[bool], psi: &DomCtx, s: &DomSubst, phi: &DomCtx) -> TResult<ITerm> {
        match s {
            DomSubst::Empty => {
                let _s = self.step("sub-empty", || ".".into());
                Ok(k0(K::Bang))
            }
            DomSubst::Wk(k) => {
                let _s = self.step("sub-wk", || format!("wk {k}"));
                Ok(pk(*k))
            }
            DomSubst::Snoc(r, m) => {
                let _s = self.step("sub-extend", || self.pr(g).dom_term(m));
                let DomCtx::Snoc(phi1, a) = phi else {
                    return Err(TranslateError::Unsupported("substitution longer than its target".into()));
                };
                let er = self.dsubst(g, lay, psi, r, phi1)?;
                let em = self.dterm(g, lay, psi, m, &subst_dom_ty(a, r)?)?;
                Ok(pairh(er, em, self.dty(g, lay, phi1, a)?))
            }
        }
    }

    fn box_of(&self, g: &[AnnType], t: &CompTerm) -> TResult<CtxType> {
        match self.ck.infer_comp(g, t)? {
            AnnType::Ty(CompType::Box(ct)) => Ok(ct),
            _ => Err(TranslateError::Unsupported("unbox of a non-box".into())),
        }
    }

    // -----------------------------------------------------------------------
    // computation level

    pub fn ann_type(&self, g: &[AnnType], lay: &[bool], a: &AnnType) -> TResult<IType> {
        match a {
            AnnType::Ctx => Ok(match self.mode {
                Mode::Simple => obj(),
                Mode::Dep => ctx_ty(),
            }),
            AnnType::Ty(t) => self.comp_type(g, lay, t),
        }
    }

    pub fn comp_type(&self, g: &[AnnType], lay: &[bool], t: &CompType) -> TResult<IType> {
        match t {
            CompType::Box(ct) => {
                let c = self.ctx(g, lay, &ct.ctx)?;
                let a = self.dom_ty(g, lay, &ct.ctx, &ct.ty)?;
                Ok(tbox(match (self.mode, ct.kind) {
                    (Mode::Simple, CtxKind::Term) => tfn(el(c), el(a)),
                    (Mode::Simple, CtxKind::Var) => elv(c, a),
                    (Mode::Dep, CtxKind::Term) => tm_in(c, a),
                    (Mode::Dep, CtxKind::Var) => tmv_in(c, a),
                }))
            }
            CompType::Fn(a, r) => {
                let ia = self.ann_type(g, lay, a)?;
                Ok(tcfn(ia, self.comp_type(&with(g, (**a).clone()), &lay_with(lay, true), r)?))
            }
        }
    }

    /// Translate a closed declaration.
    pub fn decl(&self, ty: &CompType, body: &CompTerm) -> TResult<(ITerm, IType)> {
        Ok((self.comp_check(&[], &[], body, ty)?, self.comp_type(&[], &[], ty)?))
    }

    pub fn comp_check(&self, g: &[AnnType], lay: &[bool], t: &CompTerm, ty: &CompType) -> TResult<ITerm> {
        match (t, ty) {
            (CompTerm::Fn(b), CompType::Fn(a, r)) => {
                let _s = self.step("fn", || self.pr(g).comp_term(t));
                let ia = self.ann_type(g, lay, a)?;
                Ok(iclam(ia, self.comp_check(&with(g, (**a).clone()), &lay_with(lay, true), b, r)?))
            }
            (CompTerm::Box(_, m), CompType::Box(ct)) => {
                let _s = self.step(if ct.kind == CtxKind::Var { "box-var" } else { "box" }, || self.pr(g).comp_term(t));
                let e = self.dom(g, lay, &ct.ctx, m, &ct.ty)?;
                Ok(ibox(if ct.kind == CtxKind::Var { k1(K::VMark, e) } else { e }))
            }
            _ => {
                let (e, got) = self.comp_infer(g, lay, t)?;
                self.coerce(g, lay, e, &got, ty)
            }
        }
    }

    fn coerce(&self, g: &[AnnType], lay: &[bool], e: ITerm, got: &CompType, want: &CompType) -> TResult<ITerm> {
        if self.ck.equal_comp_type(g, got, want)? {
            return Ok(e);
        }
        let _s = self.step("subsume", || self.pr(g).comp_type(want));
        match (got, want) {
            (CompType::Box(x), CompType::Box(y)) if x.kind == CtxKind::Var && y.kind == CtxKind::Term => Ok(up(e)),
            (CompType::Fn(a, r1), CompType::Fn(_, r2)) => {
                let ia = self.ann_type(g, lay, a)?;
                let body = icapp(shift(&e, Zone::Crisp, 0, 1), cv(0));
                Ok(iclam(ia, self.coerce(&with(g, (**a).clone()), &lay_with(lay, true), body, r1, r2)?))
            }
            _ => Err(TranslateError::Unsupported("types differ".into())),
        }
    }

    fn arg_ann(&self, g: &[AnnType], a: &Arg) -> TResult<(AnnType, Arg)> {
        Ok(match a {
            Arg::Ctx(_) => (AnnType::Ctx, a.clone()),
            Arg::Term(CompTerm::Var(i)) if self.ck.lookup_comp(g, *i)? == AnnType::Ctx => {
                (AnnType::Ctx, Arg::Ctx(DomCtx::Var(*i)))
            }
            Arg::Term(v) => (self.ck.infer_comp(g, v)?, a.clone()),
        })
    }

    fn arg(&self, g: &[AnnType], lay: &[bool], ann: &AnnType, a: &Arg) -> TResult<(ITerm, Arg)> {
        match (ann, a) {
            (AnnType::Ctx, _) => {
                let c = a.as_ctx().ok_or_else(|| TranslateError::Unsupported("context argument".into()))?;
                Ok((self.ctx(g, lay, &c)?, Arg::Ctx(c)))
            }
            (AnnType::Ty(t), Arg::Term(v)) => Ok((self.comp_check(g, lay, v, t)?, a.clone())),
            _ => Err(TranslateError::Unsupported("argument kind".into())),
        }
    }

    pub fn comp_infer(&self, g: &[AnnType], lay: &[bool], t: &CompTerm) -> TResult<(ITerm, CompType)> {
        match t {
            CompTerm::Var(i) => {
                let _s = self.step("cvar", || self.pr(g).comp_term(t));
                match self.ck.lookup_comp(g, *i)? {
                    AnnType::Ty(ty) => Ok((cvar(lay, *i)?, ty)),
                    AnnType::Ctx => Err(TranslateError::Unsupported("context variable used as a term".into())),
                }
            }
            CompTerm::Box(..) | CompTerm::Fn(_) => match self.ck.global_type(t) {
                Some(ty) => {
                    let _s = self.step("global", || self.pr(g).comp_type(&ty));
                    Ok((iann(self.comp_check(g, lay, t, &ty)?, self.comp_type(g, lay, &ty)?), ty))
                }
                None => Err(TranslateError::Check(CheckError::CannotInfer(self.pr(g).comp_term(t)))),
            },
            CompTerm::App(f, a) => {
                let _s = self.step("capp", || self.pr(g).comp_term(t));
                if let (CompTerm::Fn(body), None) = (&**f, self.ck.global_type(f)) {
                    let (ann, arg) = self.arg_ann(g, a)?;
                    let (g1, l1) = (with(g, ann.clone()), lay_with(lay, true));
                    let (eb, tb) = self.comp_infer(&g1, &l1, body)?;
                    let eb = iann(eb, self.comp_type(&g1, &l1, &tb)?);
                    let (ea, arg) = self.arg(g, lay, &ann, &arg)?;
                    let ia = self.ann_type(g, lay, &ann)?;
                    return Ok((icapp(iclam(ia, eb), ea), itt_inst(&tb, arg)?));
                }
                let (ef, fty) = self.comp_infer(g, lay, f)?;
                let CompType::Fn(ann, res) = fty else {
                    return Err(TranslateError::Unsupported("application of a non-function".into()));
                };
                let (ea, arg) = self.arg(g, lay, &ann, a)?;
                Ok((icapp(ef, ea), itt_inst(&res, arg)?))
            }
            CompTerm::Rec(r) => {
                let ty = self.ck.check_recursor(g, r)?;
                Ok((self.rec(g, lay, r)?, ty))
            }
        }
    }

    fn rec(&self, g: &[AnnType], lay: &[bool], r: &Rec) -> TResult<ITerm> {
        let _s = self.step(
            match r.kind {
                RecKind::Tm => "rec",
                RecKind::Ty => "rec-ty",
                RecKind::Trm => "rec-trm",
            },
            || self.pr(g).comp_term(&CompTerm::Rec(Box::new(r.clone()))),
        );
        let n = r.kind.motive_binders();
        let (anns, tau) = motive_parts(&r.motive, n).ok_or_else(|| TranslateError::Unsupported("motive".into()))?;
        let mut gm = g.to_vec();
        let mut lm = lay.to_vec();
        for a in &anns {
            gm.push(a.clone());
            lm.push(true);
        }
        let motive = self.comp_type(&gm, &lm, &tau)?;
        let mut branches = Vec::new();
        for (b, (binders, ty)) in r.branches.iter().zip(branch_sigs(r.kind, &r.motive)?) {
            let mut gb = g.to_vec();
            let mut lb = lay.to_vec();
            let mut anns = Vec::new();
            for a in &binders {
                anns.push(self.ann_type(&gb, &lb, a)?);
                gb.push(a.clone());
                lb.push(true);
            }
            let mut body = self.comp_check(&gb, &lb, &b.body, &ty)?;
            for a in anns.into_iter().rev() {
                body = iclam(a, body);
            }
            branches.push(body);
        }
        let mut args = vec![self.ctx(g, lay, &r.ctx)?];
        let scrut_ty = match r.kind {
            RecKind::Tm => boxty(r.ctx.clone(), DomType::Tm),
            RecKind::Ty => boxty(r.ctx.clone(), DomType::Ty),
            RecKind::Trm => {
                let idx = r.index.as_ref().ok_or_else(|| TranslateError::Unsupported("missing type index".into()))?;
                args.push(self.comp_check(g, lay, idx, &boxty(DomCtx::Empty, DomType::Ty))?);
                boxty(r.ctx.clone(), trm(unbox(idx.clone(), DomSubst::Empty)))
            }
        };
        args.push(self.comp_check(g, lay, &r.scrut, &scrut_ty)?);
        Ok(ITerm::Rec(Box::new(IRec { kind: r.kind, motive, branches, args })))
    }
}

fn itt_inst(t: &CompType, a: Arg) -> TResult<CompType> {
    Ok(crate::syntax::inst_ty(t, &[a])?)
}

/// Translate one checked declaration and re-check it in the internal theory.
pub fn translate_and_check(
    ck: &Checker,
    mode: Mode,
    ty: &CompType,
    body: &CompTerm,
) -> TResult<Result<(ITerm, IType), itt::IError>> {
    let tr = Translator::new(ck, mode, false);
    let (e, t) = tr.decl(ty, body)?;
    let ic = IChecker::new();
    let cx = ICtx::new();
    Ok(ic.wf_type(&cx, &t).and_then(|_| ic.check(&cx, &e, &t)).map(|_| (e, t)))
}
