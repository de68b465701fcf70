//! Randomized equational checks: recursor reductions, unbox β and box η,
//! and the weakening and substitution lemmas of the translation.
//!
//! Every case states both sides independently (surface globals for the
//! recursor branches, syntactic substitution for the lemmas) and compares
//! them with the source checker and, after translation, with `iequal`.

use crate::check::{Checker, DEFAULT_FUEL};
use crate::gen::{self, Head};
use crate::itt::{self, el, iapp, ibox, ilam, k1, k2, msub, pairh, pk, IChecker, ICtx, ITerm, Zone, K};
use crate::pipeline::checker_for;
use crate::surface::{self, DeclBody, SourceFile};
use crate::syntax::*;
use crate::translate::Translator;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One checked instance. `result` carries the reason on failure.
#[derive(Clone, Debug)]
pub struct Case {
    pub family: String,
    pub result: Result<(), String>,
}

impl Case {
    pub fn holds(&self) -> bool {
        self.result.is_ok()
    }
}

pub fn all_hold(cases: &[Case]) -> bool {
    cases.iter().all(Case::holds)
}

fn case(family: &str, result: Result<(), String>) -> Case {
    Case { family: family.to_string(), result }
}

fn s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

// ---------------------------------------------------------------------------
// preludes: one recursor per kind whose branches are named globals

const TM_PRELUDE: &str = r"--mode: simple
def bvar : (q:ctx) => (v:[q |-# tm]) => [q |- tm] = fn q. fn v. box(q |- app unbox(v; id) unbox(v; id));
def bapp : (q:ctx) => (m:[q |- tm]) => (n:[q |- tm]) => (rm:[q |- tm]) => (rn:[q |- tm]) => [q |- tm] =
  fn q. fn m. fn n. fn rm. fn rn. box(q |- app unbox(rn; id) unbox(m; id));
def blam : (q:ctx) => (m:[q, x:tm |- tm]) => (rm:[q, x:tm |- tm]) => [q |- tm] =
  fn q. fn m. fn rm. box(q |- lam \x. app unbox(rm; id) unbox(m; id));
def r : (psi:ctx) => (y:[psi |- tm]) => [psi |- tm] =
  fn psi. fn y. rec<(q:ctx) => (z:[q |- tm]) => [q |- tm]>(
      (q, v -> bvar q v);
      (q, m, n, rm, rn -> bapp q m n rm rn);
      (q, m, rm -> blam q m rm)) psi y;
";

const TY_PRELUDE: &str = r"--mode: dep
def bo : (q:ctx) => [q |- ty] = fn q. box(q |- arr o o);
def barr : (q:ctx) => (a:[q |- ty]) => (b:[q |- ty]) => (ra:[q |- ty]) => (rb:[q |- ty]) => [q |- ty] =
  fn q. fn a. fn b. fn ra. fn rb. box(q |- arr unbox(rb; id) unbox(a; id));
def r : (psi:ctx) => (y:[psi |- ty]) => [psi |- ty] =
  fn psi. fn y. rec<(q:ctx) => (z:[q |- ty]) => [q |- ty]>(
      (q -> bo q);
      (q, a, b, ra, rb -> barr q a b ra rb)) psi y;
";

const TRM_PRELUDE: &str = r"--mode: dep
def tvar : (q:ctx) => (c:[ |- ty]) => (v:[q |-# trm unbox(c; .)]) => [q |- trm unbox(c; .)] = fn q. fn c. fn v. v;
def tlam : (q:ctx) => (c:[ |- ty]) => (d:[ |- ty]) => (m:[q, x:trm unbox(c; .) |- trm unbox(d; .)])
    => (rm:[q, x:trm unbox(c; .) |- trm unbox(d; .)]) => [q |- trm (arr unbox(c; .) unbox(d; .))] =
  fn q. fn c. fn d. fn m. fn rm. box(q |- lam unbox(c; .) unbox(d; .) \x. unbox(rm; id));
def tapp : (q:ctx) => (c:[ |- ty]) => (d:[ |- ty]) => (m:[q |- trm (arr unbox(c; .) unbox(d; .))])
    => (n:[q |- trm unbox(c; .)]) => (rm:[q |- trm (arr unbox(c; .) unbox(d; .))])
    => (rn:[q |- trm unbox(c; .)]) => [q |- trm unbox(d; .)] =
  fn q. fn c. fn d. fn m. fn n. fn rm. fn rn. box(q |- app unbox(c; .) unbox(d; .) unbox(rm; id) unbox(n; id));
def r : (psi:ctx) => (a:[ |- ty]) => (y:[psi |- trm unbox(a; .)]) => [psi |- trm unbox(a; .)] =
  fn psi. fn a. fn y. rec<(q:ctx) => (z:[ |- ty]) => (w:[q |- trm unbox(z; .)]) => [q |- trm unbox(z; .)]>(
      (q, c, v -> tvar q c v);
      (q, c, d, m, rm -> tlam q c d m rm);
      (q, c, d, m, n, rm, rn -> tapp q c d m n rm rn)) psi a y;
";

struct Prelude {
    sf: SourceFile,
    ck: Checker,
}

impl Prelude {
    fn load(src: &str) -> Result<Prelude, String> {
        let sf = surface::parse(src).map_err(s)?;
        for i in 0..sf.decls.len() {
            if let DeclBody::Term { ty, body } = &sf.decls[i].body {
                checker_for(&sf, i, DEFAULT_FUEL)
                    .check_decl(ty, body)
                    .map_err(|e| format!("{}: {e}", sf.decls[i].name))?;
            }
        }
        let ck = checker_for(&sf, sf.decls.len(), DEFAULT_FUEL);
        Ok(Prelude { sf, ck })
    }

    fn global(&self, name: &str) -> (CompTerm, CompType) {
        let d = self.sf.decls.iter().find(|d| d.name == name).expect("prelude global");
        match &d.body {
            DeclBody::Term { ty, body } => (body.clone(), ty.clone()),
            DeclBody::Ctx(_) => unreachable!("prelude defines terms only"),
        }
    }

    fn g(&self, name: &str) -> CompTerm {
        self.global(name).0
    }
}

fn apply(f: CompTerm, args: Vec<Arg>) -> CompTerm {
    args.into_iter().fold(f, |f, a| CompTerm::App(Box::new(f), Box::new(a)))
}

fn t(c: CompTerm) -> Arg {
    Arg::Term(c)
}

fn c(c: DomCtx) -> Arg {
    Arg::Ctx(c)
}

/// Both sides well-typed, equal in the source theory, and with `iequal`
/// images.
pub fn same(ck: &Checker, mode: Mode, ty: &CompType, a: &CompTerm, b: &CompTerm) -> Result<(), String> {
    ck.check_decl(ty, a).map_err(|e| format!("left side: {e}"))?;
    ck.check_decl(ty, b).map_err(|e| format!("right side: {e}"))?;
    ck.reset_fuel();
    if !ck.equal_comp(&[], a, b, ty).map_err(s)? {
        return Err("sides differ in the source theory".into());
    }
    let tr = Translator::new(ck, mode, false);
    let (ea, ity) = tr.decl(ty, a).map_err(s)?;
    let (eb, _) = tr.decl(ty, b).map_err(s)?;
    images_equal(&ea, &eb, &ity)
}

fn images_equal(ea: &ITerm, eb: &ITerm, ity: &itt::IType) -> Result<(), String> {
    let ic = IChecker::new();
    let cx = ICtx::new();
    ic.check(&cx, ea, ity).map_err(|e| format!("left image: {e}"))?;
    ic.check(&cx, eb, ity).map_err(|e| format!("right image: {e}"))?;
    if ic.iequal(&cx, ea, eb, ity).map_err(s)? {
        Ok(())
    } else {
        Err(format!("images differ: {} vs {}", itt::print_term(ea), itt::print_term(eb)))
    }
}

fn irec_in(t: &ITerm) -> bool {
    match t {
        ITerm::Var(..) => false,
        ITerm::Rec(_) => true,
        ITerm::Lam(_, b) | ITerm::CLam(_, b) | ITerm::Box(b) | ITerm::Ann(b, _) => irec_in(b),
        ITerm::App(f, a) | ITerm::CApp(f, a) | ITerm::LetBox(f, a) => irec_in(f) || irec_in(a),
        ITerm::Const(_, xs) => xs.iter().any(irec_in),
    }
}

/// The normal form still contains a recursor, in both theories.
fn stuck(ck: &Checker, mode: Mode, ty: &CompType, e: &CompTerm) -> Result<(), String> {
    ck.check_decl(ty, e).map_err(s)?;
    ck.reset_fuel();
    if !contains_rec(&ck.nf_comp(&[], e, ty).map_err(s)?) {
        return Err("source normal form lost the recursor".into());
    }
    let (ie, _) = Translator::new(ck, mode, false).decl(ty, e).map_err(s)?;
    if !irec_in(&IChecker::new().normalize(&ie).map_err(s)?) {
        return Err("internal normal form lost the recursor".into());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// recursor reductions

/// `per` instances of every reduction of the three recursors, followed by
/// stuck-neutral checks.
pub fn recursor_equations(seed: u64, per: usize) -> Vec<Case> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match Prelude::load(TM_PRELUDE) {
        Ok(p) => tm_equations(&p, &mut rng, per, &mut out),
        Err(e) => out.push(case("tm/prelude", Err(e))),
    }
    match Prelude::load(TY_PRELUDE) {
        Ok(p) => ty_equations(&p, &mut rng, per, &mut out),
        Err(e) => out.push(case("ty/prelude", Err(e))),
    }
    match Prelude::load(TRM_PRELUDE) {
        Ok(p) => trm_equations(&p, &mut rng, per, &mut out),
        Err(e) => out.push(case("trm/prelude", Err(e))),
    }
    out
}

fn tm_equations(p: &Prelude, rng: &mut ChaCha8Rng, per: usize, out: &mut Vec<Case>) {
    let r = p.g("r");
    let rec = |psi: &DomCtx, m: &DomTerm| apply(r.clone(), vec![c(psi.clone()), t(cbox(m.clone()))]);
    let ty = |psi: &DomCtx| boxty(psi.clone(), DomType::Tm);
    for head in [Head::Var, Head::App, Head::Lam] {
        for _ in 0..per {
            let n = rng.gen_range(usize::from(head == Head::Var)..4);
            let psi = gen::uniform_ctx(n, DomType::Tm);
            let m = gen::simple_tm_with_head(rng, n, 3, head);
            let rhs = match (head, &m) {
                (Head::Var, _) => apply(p.g("bvar"), vec![c(psi.clone()), t(cbox(m.clone()))]),
                (Head::App, DomTerm::App(f, n2)) => {
                    let DomTerm::App(_, m1) = &**f else { unreachable!() };
                    let args = vec![c(psi.clone()), t(cbox((**m1).clone())), t(cbox((**n2).clone()))];
                    apply(p.g("bapp"), [args, vec![t(rec(&psi, m1)), t(rec(&psi, n2))]].concat())
                }
                (Head::Lam, DomTerm::App(_, f)) => {
                    let DomTerm::Lam(b) = &**f else { unreachable!() };
                    let psi1 = snoc(psi.clone(), DomType::Tm);
                    apply(p.g("blam"), vec![c(psi.clone()), t(cbox((**b).clone())), t(rec(&psi1, b))])
                }
                _ => unreachable!("generator head"),
            };
            let fam = format!("tm/{}", head_name(head));
            out.push(case(&fam, same(&p.ck, Mode::Simple, &ty(&psi), &rec(&psi, &m), &rhs)));
        }
    }
    // neutral: a context variable with an abstract scrutinee, and a
    // recursive call reaching an unboxed computation variable
    let (_, rty) = p.global("r");
    let open = cfn(cfn(apply(r.clone(), vec![c(DomCtx::Var(1)), t(cvar(0))])));
    out.push(case("tm/stuck", stuck(&p.ck, Mode::Simple, &rty, &open)));
    let psi = gen::uniform_ctx(1, DomType::Tm);
    let inner = simple_app(dvar(0), unbox(cvar(0), DomSubst::id()));
    let e = cfn(apply(r.clone(), vec![c(psi.clone()), t(cbox(inner))]));
    out.push(case("tm/stuck", stuck(&p.ck, Mode::Simple, &fnty(AnnType::Ty(ty(&psi)), ty(&psi)), &e)));
}

fn ty_equations(p: &Prelude, rng: &mut ChaCha8Rng, per: usize, out: &mut Vec<Case>) {
    let r = p.g("r");
    let rec = |psi: &DomCtx, m: &DomTerm| apply(r.clone(), vec![c(psi.clone()), t(cbox(m.clone()))]);
    let ty = |psi: &DomCtx| boxty(psi.clone(), DomType::Ty);
    for arrow in [false, true] {
        for _ in 0..per {
            let n = rng.gen_range(0..3);
            let psi = gen::uniform_ctx(n, DomType::Ty);
            let vars: Vec<usize> = (0..n).collect();
            let (m, rhs) = if arrow {
                let (a, b) = (gen::dep_ty(rng, &vars, 2), gen::dep_ty(rng, &vars, 2));
                let args =
                    vec![c(psi.clone()), t(cbox(a.clone())), t(cbox(b.clone())), t(rec(&psi, &a)), t(rec(&psi, &b))];
                (gen::arr(a, b), apply(p.g("barr"), args))
            } else {
                (gen::o(), apply(p.g("bo"), vec![c(psi.clone())]))
            };
            let fam = if arrow { "ty/arr" } else { "ty/o" };
            out.push(case(fam, same(&p.ck, Mode::Dep, &ty(&psi), &rec(&psi, &m), &rhs)));
        }
    }
    let (_, rty) = p.global("r");
    let open = cfn(cfn(apply(r.clone(), vec![c(DomCtx::Var(1)), t(cvar(0))])));
    out.push(case("ty/stuck", stuck(&p.ck, Mode::Dep, &rty, &open)));
    // a type variable is not a constructor
    let psi = gen::uniform_ctx(1, DomType::Ty);
    out.push(case("ty/stuck", stuck(&p.ck, Mode::Dep, &ty(&psi), &rec(&psi, &dvar(0)))));
}

fn trm_equations(p: &Prelude, rng: &mut ChaCha8Rng, per: usize, out: &mut Vec<Case>) {
    let r = p.g("r");
    let rec = |psi: &DomCtx, a: &DomTerm, m: &DomTerm| {
        apply(r.clone(), vec![c(psi.clone()), t(cbox(a.clone())), t(cbox(m.clone()))])
    };
    for head in [Head::Var, Head::Lam, Head::App] {
        let mut made = 0;
        while made < per {
            let mut tys = vec![gen::o()];
            for _ in 0..rng.gen_range(0..3) {
                tys.push(gen::dep_ty(rng, &[], 1));
            }
            tys.shuffle(rng);
            let a = match head {
                Head::Var => tys.choose(rng).unwrap().clone(),
                Head::Lam => gen::arr(gen::dep_ty(rng, &[], 1), gen::dep_ty(rng, &[], 1)),
                Head::App => gen::dep_ty(rng, &[], 1),
            };
            let Some(m) = gen::dep_trm_with_head(rng, &tys, &a, 2, head) else { continue };
            let psi = gen::trm_ctx(&tys);
            let DomTerm::Con(_, xs) = &m else {
                let rhs = apply(p.g("tvar"), vec![c(psi.clone()), t(cbox(a.clone())), t(cbox(m.clone()))]);
                out.push(case(
                    "trm/var",
                    same(&p.ck, Mode::Dep, &boxty(psi.clone(), trm(a.clone())), &rec(&psi, &a, &m), &rhs),
                ));
                made += 1;
                continue;
            };
            let (b, d) = (xs[0].clone(), xs[1].clone());
            let rhs = if head == Head::Lam {
                let DomTerm::Lam(body) = &xs[2] else { unreachable!("generator emits literal bodies") };
                let psi1 = snoc(psi.clone(), trm(b.clone()));
                let args = vec![c(psi.clone()), t(cbox(b.clone())), t(cbox(d.clone())), t(cbox((**body).clone()))];
                apply(p.g("tlam"), [args, vec![t(rec(&psi1, &d, body))]].concat())
            } else {
                let (f, x) = (&xs[2], &xs[3]);
                let args = vec![
                    c(psi.clone()),
                    t(cbox(b.clone())),
                    t(cbox(d.clone())),
                    t(cbox(f.clone())),
                    t(cbox(x.clone())),
                ];
                let rf = rec(&psi, &gen::arr(b.clone(), d.clone()), f);
                apply(p.g("tapp"), [args, vec![t(rf), t(rec(&psi, &b, x))]].concat())
            };
            let fam = format!("trm/{}", head_name(head));
            let ty = boxty(psi.clone(), trm(a.clone()));
            out.push(case(&fam, same(&p.ck, Mode::Dep, &ty, &rec(&psi, &a, &m), &rhs)));
            made += 1;
        }
    }
    let (_, rty) = p.global("r");
    let open = cfn(cfn(cfn(apply(r.clone(), vec![c(DomCtx::Var(2)), t(cvar(1)), t(cvar(0))]))));
    out.push(case("trm/stuck", stuck(&p.ck, Mode::Dep, &rty, &open)));
}

fn head_name(h: Head) -> &'static str {
    match h {
        Head::Var => "var",
        Head::App => "app",
        Head::Lam => "lam",
    }
}

// ---------------------------------------------------------------------------
// unbox β and box η

/// A generated domain instance: contexts, a substitution between them and
/// a term over the target.
struct Inst {
    psi: DomCtx,
    phi: DomCtx,
    sigma: DomSubst,
    m: DomTerm,
    a: DomType,
}

/// `Ψ ⊢ σ : Φ` where `Φ` keeps a prefix of `Ψ` and adds fresh declarations.
fn gen_inst(rng: &mut ChaCha8Rng, mode: Mode) -> Inst {
    match mode {
        Mode::Simple => {
            let n = rng.gen_range(0..4);
            let j = rng.gen_range(0..=n);
            let k = rng.gen_range(0..3);
            let sigma = (0..k).fold(DomSubst::Wk(j), |s, _| ssnoc(s, gen::simple_tm(rng, n, 2)));
            let m = gen::simple_tm(rng, n - j + k, 3);
            Inst {
                psi: gen::uniform_ctx(n, DomType::Tm),
                phi: gen::uniform_ctx(n - j + k, DomType::Tm),
                sigma,
                m,
                a: DomType::Tm,
            }
        }
        Mode::Dep => {
            let mut ptys = vec![gen::o()];
            for _ in 0..rng.gen_range(0..3) {
                ptys.push(gen::dep_ty(rng, &[], 1));
            }
            ptys.shuffle(rng);
            let j = rng.gen_range(0..ptys.len());
            let mut ftys = ptys[..ptys.len() - j].to_vec();
            let mut sigma = DomSubst::Wk(j);
            for _ in 0..rng.gen_range(0..3) {
                let b = gen::dep_ty(rng, &[], 1);
                sigma = ssnoc(sigma, gen::dep_trm(rng, &ptys, &b, 2));
                ftys.push(b);
            }
            if !ftys.contains(&gen::o()) {
                ftys.push(gen::o());
                sigma = ssnoc(sigma, gen::dep_trm(rng, &ptys, &gen::o(), 2));
            }
            let a = gen::dep_ty(rng, &[], 1);
            let m = gen::dep_trm(rng, &ftys, &a, 3);
            Inst { psi: gen::trm_ctx(&ptys), phi: gen::trm_ctx(&ftys), sigma, m, a: trm(a) }
        }
    }
}

/// `box(Ψ ⊢ unbox(box(Φ ⊢ M), σ))` against `box(Ψ ⊢ [σ]M)`, `per` per mode.
/// Every other instance routes the inner box through a named global.
pub fn unbox_beta(seed: u64, per: usize) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for mode in [Mode::Simple, Mode::Dep] {
        for i in 0..per {
            let inst = gen_inst(&mut rng, mode);
            let mut ck = Checker::new(mode);
            let inner = cbox(inst.m.clone());
            if i % 2 == 1 {
                ck.add_global(inner.clone(), boxty(inst.phi.clone(), inst.a.clone()));
            }
            let res = subst_dom(&inst.m, &inst.sigma).map_err(s).and_then(|sm| {
                let ty = boxty(inst.psi.clone(), subst_dom_ty(&inst.a, &inst.sigma).map_err(s)?);
                same(&ck, mode, &ty, &cbox(unbox(inner, inst.sigma.clone())), &cbox(sm))
            });
            out.push(case(&format!("beta/{}", mode.as_str()), res));
        }
    }
    out
}

/// `t` against `box(Ψ ⊢ unbox(t, id))`, for an abstract `t`, a named
/// closed box, and a context-polymorphic `t`; `per` per mode and shape.
pub fn box_eta(seed: u64, per: usize) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for mode in [Mode::Simple, Mode::Dep] {
        let fam = format!("eta/{}", mode.as_str());
        for i in 0..per {
            let inst = gen_inst(&mut rng, mode);
            let bt = boxty(inst.phi.clone(), inst.a.clone());
            let eta = |x: CompTerm| cbox(unbox(x, DomSubst::id()));
            let res = if i % 2 == 0 {
                let ty = fnty(AnnType::Ty(bt.clone()), bt);
                same(&Checker::new(mode), mode, &ty, &cfn(cvar(0)), &cfn(eta(cvar(0))))
            } else {
                let mut ck = Checker::new(mode);
                let g = cbox(inst.m.clone());
                ck.add_global(g.clone(), bt.clone());
                same(&ck, mode, &bt, &g, &eta(g.clone()))
            };
            out.push(case(&fam, res));
        }
        let a = match mode {
            Mode::Simple => DomType::Tm,
            Mode::Dep => DomType::Ty,
        };
        let poly = fnty(AnnType::Ctx, fnty(AnnType::Ty(boxty(DomCtx::Var(0), a.clone())), boxty(DomCtx::Var(1), a)));
        let res =
            same(&Checker::new(mode), mode, &poly, &cfn(cfn(cvar(0))), &cfn(cfn(cbox(unbox(cvar(0), DomSubst::id())))));
        out.push(case(&fam, res));
    }
    out
}

// ---------------------------------------------------------------------------
// weakening and substitution lemmas

/// The translation commutes with weakening, single substitution, general
/// substitution and computation-level substitution. `per` instances for
/// each lemma and mode.
pub fn substitution_lemmas(seed: u64, per: usize) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for mode in [Mode::Simple, Mode::Dep] {
        let ck = Checker::new(mode);
        let tr = Translator::new(&ck, mode, false);
        for lemma in ["weaken", "single", "subst", "comp"] {
            for _ in 0..per {
                let inst = gen_inst(&mut rng, mode);
                let res = match lemma {
                    "weaken" => weaken_case(&ck, &tr, mode, &mut rng, &inst),
                    "single" => single_case(&ck, &tr, mode, &mut rng),
                    "subst" => subst_case(&ck, &tr, mode, &inst),
                    _ => comp_case(&ck, &tr, mode, &mut rng, &inst),
                };
                out.push(case(&format!("{lemma}/{}", mode.as_str()), res));
            }
        }
    }
    out
}

type Tr<'a> = Translator<'a>;

/// `⟦M⟧` precomposed with the translation `e` of a substitution into `Ψ`.
fn after(mode: Mode, tr: &Tr, psi: &DomCtx, em: ITerm, e: ITerm) -> Result<ITerm, String> {
    Ok(match mode {
        Mode::Simple => ilam(el(tr.ctx(&[], &[], psi).map_err(s)?), iapp(em, iapp(e, itt::ov(0)))),
        Mode::Dep => msub(em, e),
    })
}

fn compare_box(
    ck: &Checker,
    tr: &Tr,
    psi: &DomCtx,
    a: &DomType,
    lhs: &DomTerm,
    rhs_image: ITerm,
) -> Result<(), String> {
    let ty = boxty(psi.clone(), a.clone());
    ck.check_decl(&ty, &cbox(lhs.clone())).map_err(|e| format!("instance: {e}"))?;
    let (el_, ity) = tr.decl(&ty, &cbox(lhs.clone())).map_err(s)?;
    images_equal(&el_, &ibox(rhs_image), &ity)
}

fn weaken_case(ck: &Checker, tr: &Tr, mode: Mode, rng: &mut ChaCha8Rng, inst: &Inst) -> Result<(), String> {
    let b = match mode {
        Mode::Simple => DomType::Tm,
        Mode::Dep => trm(gen::dep_ty(rng, &[], 1)),
    };
    let phi1 = snoc(inst.phi.clone(), b);
    let em = tr.dom(&[], &[], &inst.phi, &inst.m, &inst.a).map_err(s)?;
    let p1 = match mode {
        Mode::Simple => ilam(el(tr.ctx(&[], &[], &phi1).map_err(s)?), k1(K::Fst, itt::ov(0))),
        Mode::Dep => pk(1),
    };
    let rhs = after(mode, tr, &phi1, em, p1)?;
    compare_box(ck, tr, &phi1, &inst.a, &shift_dom(&inst.m, 0, 1).map_err(s)?, rhs)
}

fn single_case(ck: &Checker, tr: &Tr, mode: Mode, rng: &mut ChaCha8Rng) -> Result<(), String> {
    // M over Ψ, x:B and N : B over Ψ
    let (psi, b, m, a, n) = match mode {
        Mode::Simple => {
            let k = rng.gen_range(0..3);
            let m = gen::simple_tm(rng, k + 1, 3);
            let n = gen::simple_tm(rng, k, 2);
            (gen::uniform_ctx(k, DomType::Tm), DomType::Tm, m, DomType::Tm, n)
        }
        Mode::Dep => {
            let mut tys = vec![gen::o()];
            if rng.gen_bool(0.5) {
                tys.push(gen::dep_ty(rng, &[], 1));
            }
            let b = gen::dep_ty(rng, &[], 1);
            let a = gen::dep_ty(rng, &[], 1);
            let n = gen::dep_trm(rng, &tys, &b, 2);
            let mut tys1 = tys.clone();
            tys1.push(b.clone());
            let m = gen::dep_trm(rng, &tys1, &a, 3);
            (gen::trm_ctx(&tys), trm(b), m, trm(a), n)
        }
    };
    let psi1 = snoc(psi.clone(), b.clone());
    let em = tr.dom(&[], &[], &psi1, &m, &a).map_err(s)?;
    let en = tr.dom(&[], &[], &psi, &n, &b).map_err(s)?;
    let ext = match mode {
        Mode::Simple => ilam(el(tr.ctx(&[], &[], &psi).map_err(s)?), k2(K::Pair, itt::ov(0), iapp(en, itt::ov(0)))),
        Mode::Dep => pairh(pk(0), en, tr.dom_ty(&[], &[], &psi, &b).map_err(s)?),
    };
    let rhs = after(mode, tr, &psi, em, ext)?;
    compare_box(ck, tr, &psi, &a, &subst_dom0(&m, &n).map_err(s)?, rhs)
}

fn subst_case(ck: &Checker, tr: &Tr, mode: Mode, inst: &Inst) -> Result<(), String> {
    let em = tr.dom(&[], &[], &inst.phi, &inst.m, &inst.a).map_err(s)?;
    let es = tr.dom_subst(&[], &[], &inst.psi, &inst.sigma, &inst.phi).map_err(s)?;
    let rhs = after(mode, tr, &inst.psi, em, es)?;
    let a = subst_dom_ty(&inst.a, &inst.sigma).map_err(s)?;
    compare_box(ck, tr, &inst.psi, &a, &subst_dom(&inst.m, &inst.sigma).map_err(s)?, rhs)
}

/// `⟦[t/y] e⟧` against `⟦e⟧` with `⟦t⟧` substituted for `y`, where `e`
/// unboxes `y` under a substitution.
fn comp_case(ck: &Checker, tr: &Tr, mode: Mode, rng: &mut ChaCha8Rng, inst: &Inst) -> Result<(), String> {
    let (yty, body) = match mode {
        Mode::Simple => {
            let p = gen::simple_tm(rng, inst.psi.len(), 2);
            (boxty(inst.phi.clone(), DomType::Tm), simple_app(unbox(cvar(0), inst.sigma.clone()), p))
        }
        Mode::Dep => {
            let DomType::Trm(a) = &inst.a else { unreachable!("dep instances are at trm") };
            let b = gen::o();
            let ptys = trm_tys(&inst.psi);
            let p = gen::dep_trm(rng, &ptys, &b, 2);
            let fty = trm(gen::arr(b.clone(), (**a).clone()));
            let app = DomTerm::Con(DCon::App, vec![b, (**a).clone(), unbox(cvar(0), inst.sigma.clone()), p]);
            (boxty(inst.phi.clone(), fty), app)
        }
    };
    let arg = match mode {
        Mode::Simple => gen::simple_tm(rng, inst.phi.len(), 3),
        Mode::Dep => {
            let CompType::Box(ct) = &yty else { unreachable!() };
            let DomType::Trm(f) = &ct.ty else { unreachable!() };
            gen::dep_trm(rng, &trm_tys(&inst.phi), f, 3)
        }
    };
    let a = match mode {
        Mode::Simple => DomType::Tm,
        Mode::Dep => subst_dom_ty(&inst.a, &inst.sigma).map_err(s)?,
    };
    let ety = boxty(inst.psi.clone(), a);
    let e = cbox(body);
    let g = [AnnType::Ty(yty.clone())];
    ck.check_comp(&g, &e, &ety).map_err(|e| format!("instance: {e}"))?;
    let tbox = cbox(arg);
    ck.check_decl(&yty, &tbox).map_err(|e| format!("instance: {e}"))?;
    let lhs = subst_comp(&e, &Arg::Term(tbox.clone())).map_err(s)?;
    let (el_, ity) = tr.decl(&ety, &lhs).map_err(s)?;
    let ee = tr.comp_check(&g, &[true], &e, &ety).map_err(s)?;
    // ascribed, so the redex it creates is inferable
    let (et, yity) = tr.decl(&yty, &tbox).map_err(s)?;
    images_equal(&el_, &itt::subst(&ee, Zone::Crisp, &itt::iann(et, yity)), &ity)
}

/// Closed `trm` types of a generated context, innermost last.
fn trm_tys(psi: &DomCtx) -> Vec<DomTerm> {
    let mut out = Vec::new();
    let mut cur = psi;
    while let DomCtx::Snoc(c, a) = cur {
        let DomType::Trm(x) = a else { unreachable!("generated contexts declare trm") };
        out.push((**x).clone());
        cur = c;
    }
    out.reverse();
    out
}
