use cocon::check::Checker;
use cocon::gen::{self, Head};
use cocon::itt::*;
use cocon::pipeline::{checker_for, parse_source, Options};
use cocon::surface::DeclBody;
use cocon::translate::Translator;
use cocon::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fs;
use std::path::PathBuf;

#[test]
fn box_sees_only_crisp_variables() {
    let ic = IChecker::new();
    let t = el(k0(K::Tm));
    let cx = ICtx::new().push(Zone::Crisp, t.clone()).push(Zone::Ord, t.clone());
    // u::T | x:T, where u is crisp index 0 and x ordinary index 0
    assert!(ic.check(&cx, &ibox(cv(0)), &tbox(t.clone())).is_ok());
    assert_eq!(ic.check(&cx, &ibox(ov(0)), &tbox(t)), Err(IError::OrdinaryVarUnderBox));
}

#[test]
fn terminal_inhabits_unit() {
    let ic = IChecker::new();
    assert!(ic.check(&ICtx::new(), &k0(K::Terminal), &el(k0(K::Unit))).is_ok());
}

#[test]
fn crisp_argument_must_be_closed() {
    let ic = IChecker::new();
    let t = el(k0(K::Tm));
    let f = iclam(t.clone(), cv(0));
    let cx = ICtx::new().push(Zone::Ord, t.clone());
    assert_eq!(ic.infer(&cx, &icapp(f.clone(), ov(0))), Err(IError::OpenCrispArgument));
    let cx = ICtx::new().push(Zone::Crisp, t);
    assert!(ic.infer(&cx, &icapp(f, cv(0))).is_ok());
}

#[test]
fn box_beta_and_idempotence() {
    let ic = IChecker::new();
    let m = k1(K::SLam, k0(K::Terminal));
    assert_eq!(ic.normalize(&iletbox(ibox(m.clone()), cv(0))).unwrap(), m);
    assert_eq!(ic.idempotence_uses(), 0);
    assert_eq!(ic.normalize(&ibox(iletbox(cv(3), cv(0)))).unwrap(), cv(3));
    assert_eq!(ic.idempotence_uses(), 1);
}

#[test]
fn pi_beta_is_substitution() {
    let ic = IChecker::new();
    let a = trmc(k0(K::O));
    let n = cv(0);
    let redex = k2(K::AppT, k2(K::Abs, a.clone(), k0(K::V)), n.clone());
    assert_eq!(ic.normalize(&redex).unwrap(), ic.normalize(&msub(k0(K::V), pairh(pk(0), n.clone(), a))).unwrap());
    assert_eq!(ic.normalize(&redex).unwrap(), n);
}

#[test]
fn simple_translation_examples() {
    let ck = Checker::new(Mode::Simple);
    let tr = Translator::new(&ck, Mode::Simple, false);
    let xy = snoc(snoc(DomCtx::Empty, DomType::Tm), DomType::Tm);
    let tm = || k0(K::Tm);
    assert_eq!(tr.ctx(&[], &[], &xy).unwrap(), times(times(k0(K::Unit), tm()), tm()));
    let x = snoc(DomCtx::Empty, DomType::Tm);
    assert_eq!(
        tr.dom_subst(&[], &[], &x, &DomSubst::Wk(1), &DomCtx::Empty).unwrap(),
        ilam(el(times(k0(K::Unit), tm())), k1(K::Fst, ov(0)))
    );
    assert_eq!(tr.ann_type(&[], &[], &AnnType::Ctx).unwrap(), obj());
}

#[test]
fn is_lam_decides_the_head() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let ck = Checker::new(Mode::Simple);
    let tr = Translator::new(&ck, Mode::Simple, false);
    let ic = IChecker::new();
    let mut lams = 0;
    for _ in 0..20 {
        let n = rng.gen_range(1..4);
        let head = [Head::Var, Head::App, Head::Lam][rng.gen_range(0..3)];
        let m = gen::simple_tm_with_head(&mut rng, n, 3, head);
        let psi = gen::uniform_ctx(n, DomType::Tm);
        let (e, _) = tr.decl(&boxty(psi.clone(), DomType::Tm), &cbox(m.clone())).unwrap();
        let q = is_lam(tr.ctx(&[], &[], &psi).unwrap(), e);
        ic.check(&ICtx::new(), &q, &bool_ty()).unwrap();
        // oracle: the head constructor of the source term
        let want = matches!(&m, DomTerm::App(f, _) if **f == DomTerm::Const(SConst::Lam));
        lams += usize::from(want);
        assert_eq!(ic.normalize(&q).unwrap(), k0(if want { K::True } else { K::False }));
    }
    assert!(lams > 0 && lams < 20);
}

fn corpus_images() -> Vec<(ITerm, IType)> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus/ok");
    let mut paths: Vec<_> = fs::read_dir(root).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    let mut out = Vec::new();
    for p in paths {
        let sf = parse_source(&fs::read_to_string(&p).unwrap(), &Options::default()).unwrap();
        for (i, d) in sf.decls.iter().enumerate() {
            let DeclBody::Term { ty, body } = &d.body else { continue };
            let ck = checker_for(&sf, i, Options::default().fuel);
            if ck.check_decl(ty, body).is_err() {
                continue;
            }
            out.push(Translator::new(&ck, sf.mode, false).decl(ty, body).unwrap());
        }
    }
    out
}

#[test]
fn normal_forms_keep_their_types() {
    let ic = IChecker::new();
    let cx = ICtx::new();
    for (e, t) in corpus_images() {
        let nf = ic.normalize(&e).unwrap();
        ic.check(&cx, &nf, &t).unwrap_or_else(|err| panic!("{}: {err}", print_term(&nf)));
        assert!(ic.iequal(&cx, &e, &nf, &t).unwrap_or_else(|err| panic!(
            "{}\n{}: {err}",
            print_term(&e),
            print_type(&t)
        )));
        assert!(ic.iequal(&cx, &nf, &e, &t).unwrap());
    }
}
