use cocon::laws::*;

fn report(cases: &[Case]) {
    let bad: Vec<_> = cases.iter().filter(|c| !c.holds()).collect();
    for c in &bad {
        eprintln!("{}: {}", c.family, c.result.as_ref().unwrap_err());
    }
    assert!(bad.is_empty(), "{} of {} failed", bad.len(), cases.len());
}

#[test]
fn recursor_reductions() {
    let cases = recursor_equations(1, 10);
    for fam in ["tm/var", "tm/app", "tm/lam", "ty/o", "ty/arr", "trm/var", "trm/lam", "trm/app"] {
        assert_eq!(cases.iter().filter(|c| c.family == fam).count(), 10, "{fam}");
    }
    assert_eq!(cases.iter().filter(|c| c.family.ends_with("/stuck")).count(), 5);
    report(&cases);
}

#[test]
fn unbox_beta_pairs() {
    report(&unbox_beta(2, 12));
}

#[test]
fn box_eta_pairs() {
    report(&box_eta(3, 6));
}

#[test]
fn weakening_and_substitution_commute() {
    let cases = substitution_lemmas(4, 25);
    assert_eq!(cases.len(), 200);
    report(&cases);
}

#[test]
fn unequal_sides_are_reported() {
    use cocon::check::Checker;
    use cocon::*;
    // [x, y |- app x y] against its swap, both closed boxes over two variables
    let psi = snoc(snoc(DomCtx::Empty, DomType::Tm), DomType::Tm);
    let ty = boxty(psi, DomType::Tm);
    let a = cbox(simple_app(dvar(1), dvar(0)));
    let b = cbox(simple_app(dvar(0), dvar(1)));
    let ck = Checker::new(Mode::Simple);
    assert!(same(&ck, Mode::Simple, &ty, &a, &a).is_ok());
    assert!(same(&ck, Mode::Simple, &ty, &a, &b).is_err());
}

#[test]
fn other_seeds_hold() {
    for seed in 10..13 {
        report(&recursor_equations(seed, 3));
        report(&unbox_beta(seed, 6));
        report(&substitution_lemmas(seed, 4));
    }
}
