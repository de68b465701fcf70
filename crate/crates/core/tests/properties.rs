use cocon::check::{Checker, Strategy};
use cocon::gen;
use cocon::itt::{IChecker, ICtx};
use cocon::pipeline::{checker_for, parse_source, Options};
use cocon::presheaf::yoneda_pair;
use cocon::surface::DeclBody;
use cocon::translate::Translator;
use cocon::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A dep-mode term with its closed context types and type.
fn dep_instance(r: &mut ChaCha8Rng) -> (Vec<DomTerm>, DomTerm, DomTerm) {
    let mut tys = vec![gen::o()];
    for _ in 0..r.gen_range(0..3) {
        tys.push(gen::dep_ty(r, &[], 1));
    }
    let a = gen::dep_ty(r, &[], 2);
    let m = gen::dep_trm(r, &tys, &a, 3);
    (tys, a, m)
}

const COPY: &str = include_str!("../corpus/ok/simple_copy.ccn");

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn shift_up_then_down_is_identity(seed in any::<u64>(), c in 0usize..3) {
        let m = gen::simple_tm(&mut rng(seed), 3, 4);
        let up = shift_dom(&m, c, 1).unwrap();
        prop_assert_eq!(shift_dom(&up, c, -1).unwrap(), m);
    }

    #[test]
    fn substituting_into_a_weakening_cancels(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = gen::simple_tm(&mut r, 2, 4);
        let n = gen::simple_tm(&mut r, 2, 2);
        prop_assert_eq!(subst_dom0(&shift_dom(&m, 0, 1).unwrap(), &n).unwrap(), m.clone());
        prop_assert_eq!(subst_dom(&m, &DomSubst::id()).unwrap(), m);
    }

    #[test]
    fn substitution_preserves_typing(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (mut tys, a, _) = dep_instance(&mut r);
        let b = gen::dep_ty(&mut r, &[], 1);
        let n = gen::dep_trm(&mut r, &tys, &b, 2);
        tys.push(b);
        let m = gen::dep_trm(&mut r, &tys, &a, 3);
        tys.pop();
        let ck = Checker::new(Mode::Dep);
        let sm = subst_dom0(&m, &n).unwrap();
        prop_assert!(ck.check_dom_term(&[], &gen::trm_ctx(&tys), &sm, &trm(a)).is_ok());
    }

    #[test]
    fn fitch_shift_round_trips(seed in any::<u64>(), c in 0usize..3) {
        let (tys, a, m) = dep_instance(&mut rng(seed));
        let ty = boxty(gen::trm_ctx(&tys), trm(a));
        let ck = Checker::new(Mode::Dep);
        let (e, t) = cocon::fitch::translate_decl(&ck, Mode::Dep, &ty, &cbox(m)).unwrap();
        for x in [e, t] {
            let up = cocon::fitch::shift(&x, c, 2);
            prop_assert_eq!(cocon::fitch::try_shift(&up, c, -2), Some(x));
        }
    }

    #[test]
    fn normal_forms_still_check(seed in any::<u64>()) {
        let sf = parse_source(COPY, &Options::default()).unwrap();
        let ck = checker_for(&sf, 1, Options::default().fuel);
        let DeclBody::Term { body: copy, .. } = &sf.decls[0].body else { unreachable!() };
        let mut r = rng(seed);
        let n = r.gen_range(0..3);
        let psi = gen::uniform_ctx(n, DomType::Tm);
        let m = gen::simple_tm(&mut r, n, 4);
        let t = capp(capp_ctx(copy.clone(), psi.clone()), cbox(m.clone()));
        let ty = boxty(psi, DomType::Tm);
        ck.check_comp(&[], &t, &ty).unwrap();
        let nf = ck.nf_comp(&[], &t, &ty).unwrap();
        ck.check_comp(&[], &nf, &ty).unwrap();
        // copying is the identity on closed-off boxes
        prop_assert_eq!(&nf, &ck.nf_comp(&[], &cbox(m), &ty).unwrap());
        // both strategies reach the same normal form
        let out = ck.normalize_with(&t, Strategy::Outermost).unwrap();
        let inn = ck.normalize_with(&t, Strategy::Innermost).unwrap();
        prop_assert_eq!(out, inn);
    }

    #[test]
    fn iequal_is_reflexive_and_symmetric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (tys, a, m) = dep_instance(&mut r);
        let n = gen::dep_trm(&mut r, &tys, &a, 3);
        let ty = boxty(gen::trm_ctx(&tys), trm(a));
        let ck = Checker::new(Mode::Dep);
        let tr = Translator::new(&ck, Mode::Dep, false);
        let (em, it) = tr.decl(&ty, &cbox(m)).unwrap();
        let (en, _) = tr.decl(&ty, &cbox(n)).unwrap();
        let ic = IChecker::new();
        let cx = ICtx::new();
        prop_assert!(ic.iequal(&cx, &em, &em, &it).unwrap());
        prop_assert_eq!(ic.iequal(&cx, &em, &en, &it).unwrap(), ic.iequal(&cx, &en, &em, &it).unwrap());
        let nf = ic.normalize(&em).unwrap();
        prop_assert!(ic.check(&cx, &nf, &it).is_ok());
    }

    #[test]
    fn random_categories_satisfy_yoneda(seed in any::<u64>()) {
        let mut r = rng(seed);
        let c = gen::random_category(&mut r, 2, 3).unwrap();
        let k = c.objects.len();
        for x in 0..k {
            for y in 0..k {
                prop_assert_eq!(yoneda_pair(&c, x, y).unwrap(), c.hom(x, y).len());
            }
        }
    }
}
