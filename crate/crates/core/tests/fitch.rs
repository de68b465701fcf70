use cocon::fitch::{self, lock_scan, FChecker, FCtx, FError, FTerm};
use cocon::pipeline::{checker_for, parse_source, Options};
use cocon::surface::DeclBody;
use std::fs;
use std::path::PathBuf;

fn bx(t: FTerm) -> Box<FTerm> {
    Box::new(t)
}

/// Translate the last declaration of a dep-mode source.
fn translate_last(src: &str) -> Result<(FTerm, FTerm), FError> {
    let sf = parse_source(src, &Options::default()).unwrap();
    let i = sf.decls.len() - 1;
    let DeclBody::Term { ty, body } = &sf.decls[i].body else { panic!("term declaration") };
    let ck = checker_for(&sf, i, Options::default().fuel);
    ck.check_decl(ty, body).unwrap();
    fitch::translate_decl(&ck, sf.mode, ty, body)
}

#[test]
fn box_introduction_checks_under_a_lock() {
    let ck = FChecker::new();
    let cx = FCtx::new().push(FTerm::Type);
    // Γ, lock ⊢ Type : Type
    assert!(ck.check(&cx.lock(), &FTerm::Type, &FTerm::Type).is_ok());
    assert!(ck.check(&cx, &FTerm::BoxI(bx(FTerm::Type)), &FTerm::BoxT(bx(FTerm::Type))).is_ok());
    // box x with x left of the lock
    assert_eq!(
        ck.check(&cx, &FTerm::BoxI(bx(FTerm::Var(0))), &FTerm::BoxT(bx(FTerm::Type))),
        Err(FError::VariableBehindLock(0))
    );
}

#[test]
fn unbox_across_two_locks_is_rejected() {
    let ck = FChecker::new();
    // a : □Type, lock, b : Type, lock
    let cx = FCtx::new().push(FTerm::BoxT(bx(FTerm::Type))).lock().push(FTerm::Type).lock();
    let m = FTerm::Unbox(2, bx(FTerm::Var(0)));
    assert_eq!(ck.infer(&cx, &m), Err(FError::LockInResidue));
    assert_eq!(lock_scan(&m, &[true, false, true, false]), Err(FError::LockInResidue));
    // one segment back is fine
    let cx1 = FCtx::new().push(FTerm::BoxT(bx(FTerm::Type))).lock().push(FTerm::Type);
    assert_eq!(ck.infer(&cx1, &FTerm::Unbox(1, bx(FTerm::Var(0)))), Ok(FTerm::Type));
}

#[test]
fn variable_behind_lock_is_rejected() {
    let ck = FChecker::new();
    let cx = FCtx::new().push(FTerm::Type).lock();
    assert_eq!(ck.infer(&cx, &FTerm::Var(0)), Err(FError::VariableBehindLock(0)));
    assert_eq!(lock_scan(&FTerm::Var(0), &[true, false]), Err(FError::VariableBehindLock(0)));
    assert!(lock_scan(&FTerm::Var(0), &[false, true]).is_ok());
}

#[test]
fn context_kind_is_boxed_ctx() {
    let (_, ty) = translate_last("--mode: dep\ndef f : (psi:ctx) => [psi |- ty] = fn psi. box(psi |- o);\n").unwrap();
    let FTerm::Pi(dom, cod) = ty else { panic!("{}", fitch::print_term(&ty)) };
    assert_eq!(*dom, FTerm::BoxT(bx(FTerm::Ctx)));
    // ⟦[psi |- ty]⟧ = □(Π(unbox psi). Ty)
    let FTerm::BoxT(inner) = *cod else { panic!() };
    let FTerm::Pi(c, _) = *inner else { panic!() };
    assert_eq!(*c, FTerm::Unbox(0, bx(FTerm::Var(0))));
}

fn contains(t: &FTerm, want: &FTerm) -> bool {
    if t == want {
        return true;
    }
    match t {
        FTerm::Pi(a, b) | FTerm::Lam(a, b) | FTerm::App(a, b) | FTerm::Sigma(a, b) | FTerm::Pair(a, b) => {
            contains(a, want) || contains(b, want)
        }
        FTerm::Fst(a) | FTerm::Snd(a) | FTerm::BoxT(a) | FTerm::BoxI(a) | FTerm::Unbox(_, a) => contains(a, want),
        _ => false,
    }
}

#[test]
fn weakening_over_two_is_double_projection() {
    let (e, _) = translate_last(
        "--mode: dep\ndef w : (t:[ |- ty]) => [a:ty, b:ty |- ty] = fn t. box(a, b |- unbox(t; wk 2));\n",
    )
    .unwrap();
    let u = FTerm::Var(0);
    let pi1_2 = FTerm::Fst(bx(FTerm::Fst(bx(u))));
    assert!(contains(&e, &pi1_2), "{}", fitch::print_term(&e));
}

#[test]
fn recursors_are_refused() {
    let src = "--mode: dep\ndef r : (psi:ctx) => (y:[psi |- ty]) => [psi |- ty] = fn psi. fn y. rec<(q:ctx) => (z:[q |- ty]) => [q |- ty]>((q -> box(q |- o)); (q, a, b, ra, rb -> ra)) psi y;\n";
    assert_eq!(translate_last(src).map(|_| ()), Err(FError::RecursorPresent));
}

#[test]
fn accepted_images_pass_the_lock_scan() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus/ok");
    let mut scanned = 0;
    for p in fs::read_dir(root).unwrap().map(|e| e.unwrap().path()) {
        let sf = parse_source(&fs::read_to_string(&p).unwrap(), &Options::default()).unwrap();
        if sf.mode != cocon::Mode::Dep {
            continue;
        }
        for (i, d) in sf.decls.iter().enumerate() {
            let DeclBody::Term { ty, body } = &d.body else { continue };
            if d.uses_rec() {
                continue;
            }
            let ck = checker_for(&sf, i, Options::default().fuel);
            if ck.check_decl(ty, body).is_err() {
                continue;
            }
            let (e, t) = fitch::translate_decl(&ck, sf.mode, ty, body).unwrap();
            FChecker::new().check_decl(&e, &t).unwrap();
            lock_scan(&e, &[]).unwrap();
            lock_scan(&t, &[]).unwrap();
            scanned += 1;
        }
    }
    assert!(scanned >= 30, "{scanned}");
}
