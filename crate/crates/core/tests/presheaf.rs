use cocon::presheaf::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;

fn model(name: &str) -> FiniteCategory {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus/models").join(name);
    FiniteCategory::parse(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn poset2() -> FiniteCategory {
    FiniteCategory::parse("object 0\nobject 1\nterminal 1\nmor le : 0 -> 1\n").unwrap()
}

/// Every family of functions, filtered by naturality.
fn brute_nat(c: &FiniteCategory, f: &FinitePresheaf, g: &FinitePresheaf) -> Option<u64> {
    let slots: Vec<(usize, usize)> = (0..c.objects.len()).flat_map(|x| (0..f.size(x)).map(move |i| (x, i))).collect();
    let mut space: u64 = 1;
    for &(x, _) in &slots {
        space = space.checked_mul(g.size(x) as u64)?;
    }
    if space > 2_000_000 {
        return None;
    }
    let mut count = 0;
    for mut code in 0..space {
        let mut comps: Vec<Vec<usize>> = (0..c.objects.len()).map(|x| vec![0; f.size(x)]).collect();
        for &(x, i) in &slots {
            let r = g.size(x) as u64;
            comps[x][i] = (code % r) as usize;
            code /= r;
        }
        if (NatTrans { components: comps }).is_natural(c, f, g) {
            count += 1;
        }
    }
    Some(count)
}

#[test]
fn yoneda_on_small_bases() {
    let c = poset2();
    let y1 = yoneda(&c, c.object("1").unwrap()).unwrap();
    assert_eq!(y1.size(c.object("0").unwrap()), 1);
    let t = c.terminal.unwrap();
    let yt = yoneda(&c, t).unwrap();
    assert!((0..2).all(|x| yt.size(x) == 1));
    let d = FiniteCategory::parse("object a\nobject b\nobject c\n").unwrap();
    let ya = yoneda(&d, 0).unwrap();
    assert_eq!(ya.size(1), 0);
    assert_eq!(ya.size(2), 0);
    assert!(yoneda(&d, 7).is_err());
}

#[test]
fn four_object_model_loads() {
    let c = model("four.cat");
    assert_eq!(c.objects.len(), 4);
    assert!(c.terminal.is_some());
}

#[test]
fn yoneda_counts_match_hom_sets_on_all_pairs() {
    let c = model("four.cat");
    let mut brute = 0;
    for psi in 0..4 {
        for phi in 0..4 {
            let n = yoneda_pair(&c, psi, phi).unwrap();
            assert_eq!(n, c.hom(psi, phi).len());
            let (yp, yf) = (yoneda(&c, psi).unwrap(), yoneda(&c, phi).unwrap());
            if let Some(b) = brute_nat(&c, &yp, &yf) {
                assert_eq!(b, n as u64);
                brute += 1;
            }
        }
    }
    assert!(brute >= 8, "{brute}");
}

#[test]
fn nat_into_constant_is_all_functions() {
    let c = model("four.cat");
    for (s, s2) in [(2, 3), (3, 2), (1, 4), (4, 1)] {
        let f = FinitePresheaf::constant(&c, &(0..s2).map(|i| i.to_string()).collect::<Vec<_>>());
        let om = FinitePresheaf::constant(&c, &(0..s).map(|i| i.to_string()).collect::<Vec<_>>());
        let want = (s as u64).pow(s2 as u32);
        assert_eq!(brute_nat(&c, &f, &om), Some(want));
        assert_eq!(count_nat(&c, &f, &om) as u64, want);
    }
}

#[test]
fn identity_is_natural() {
    let c = model("four.cat");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let f = random_presheaf(&c, &mut rng, 3);
        assert!(nat_transformations(&c, &f, &f).contains(&NatTrans::identity(&f)));
    }
}

#[test]
fn counting_agrees_with_brute_force() {
    let c = model("four.cat");
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut compared = 0;
    for _ in 0..40 {
        let f = random_presheaf(&c, &mut rng, 3);
        let g = random_presheaf(&c, &mut rng, 3);
        if let Some(b) = brute_nat(&c, &f, &g) {
            assert_eq!(count_nat(&c, &f, &g) as u64, b);
            assert_eq!(nat_transformations(&c, &f, &g).len() as u64, b);
            compared += 1;
        }
    }
    assert!(compared >= 10);
}

#[test]
fn flat_comonad_laws_on_random_presheaves() {
    let c = model("four.cat");
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let f = random_presheaf(&c, &mut rng, 4);
        assert!(f.validate(&c).is_ok());
        for l in check_comonad_laws(&c, &f).unwrap() {
            assert!(l.holds, "{}", l.name);
        }
        let fl = flat(&c, &f).unwrap();
        assert_eq!(flat(&c, &fl).unwrap().carriers, fl.carriers);
    }
}

#[test]
fn counit_at_constant_is_bijective() {
    let c = model("four.cat");
    let k = FinitePresheaf::constant(&c, &["p".into(), "q".into()]);
    let eps = counit(&c, &k).unwrap();
    assert!(eps.is_iso(&flat(&c, &k).unwrap(), &k));
}

#[test]
fn comonad_laws_on_three_object_base() {
    let c = FiniteCategory::parse(
        "object u\nobject v\nobject t\nterminal t\nmor f : u -> v\nmor !u : u -> t\nmor !v : v -> t\ncompose !v f = !u\n",
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..5 {
        let f = random_presheaf(&c, &mut rng, 3);
        assert!(check_comonad_laws(&c, &f).unwrap().iter().all(|l| l.holds));
    }
}

#[test]
fn flat_needs_a_terminal() {
    let c = FiniteCategory::parse("object a\n").unwrap();
    let f = FinitePresheaf::terminal(&c);
    assert_eq!(flat(&c, &f), Err(CatError::NoTerminal));
}

#[test]
fn currying_counts_match() {
    let c = model("four.cat");
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..5 {
        let (f, g, h) =
            (random_presheaf(&c, &mut rng, 2), random_presheaf(&c, &mut rng, 2), random_presheaf(&c, &mut rng, 2));
        let fg = product(&c, &f, &g);
        let e = exponential(&c, &g, &h);
        assert!(e.validate(&c).is_ok());
        let lhs = count_nat(&c, &fg, &h);
        if let Some(b) = brute_nat(&c, &fg, &h) {
            assert_eq!(lhs as u64, b);
        }
        assert_eq!(lhs, count_nat(&c, &f, &e));
        assert_eq!(lhs as usize, nat_transformations(&c, &f, &e).len());
    }
}

#[test]
fn product_with_terminal_is_isomorphic() {
    let c = model("four.cat");
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let f = random_presheaf(&c, &mut rng, 4);
    let ft = product(&c, &f, &FinitePresheaf::terminal(&c));
    assert!((0..4).all(|x| ft.size(x) == f.size(x)));
    let id = NatTrans::identity(&f);
    assert!(id.is_natural(&c, &ft, &f) && id.is_iso(&ft, &f));
}

#[test]
fn yoneda_preserves_chosen_products() {
    let c = model("boolean.cat");
    assert_eq!(c.products.len(), 16);
    assert_eq!(c.exps.len(), 16);
    for p in &c.products {
        assert!(yoneda_preserves_product(&c, p));
    }
}

#[test]
fn law_violations_rejected_at_load() {
    let missing = "object a\nmor f : a -> a\n";
    assert!(matches!(FiniteCategory::parse(missing), Err(CatError::MissingComposite(..))));
    // f f = g, f g = f, g f = g: (f f) f = g f = g but f (f f) = f g = f
    let assoc = "object a\nmor f : a -> a\nmor g : a -> a\ncompose f f = g\ncompose f g = f\ncompose g f = g\ncompose g g = g\n";
    assert!(matches!(FiniteCategory::parse(assoc), Err(CatError::Associativity(..))));
    let term = "object a\nobject t\nterminal t\nmor x : a -> t\nmor y : a -> t\n";
    assert!(matches!(FiniteCategory::parse(term), Err(CatError::Terminal(_))));
    assert!(matches!(FiniteCategory::parse("obj a\n"), Err(CatError::Parse { line: 1, .. })));
    assert!(matches!(FiniteCategory::parse("object a\nmor f : a -> b\n"), Err(CatError::UnknownObject(_))));
}

#[test]
fn verify_model_report_holds() {
    let c = model("four.cat");
    let r = verify_model(&c, &mut ChaCha8Rng::seed_from_u64(1), 10, 5);
    assert!(r.all_hold(), "{:?}", r.lines.iter().filter(|l| !l.holds).collect::<Vec<_>>());
    assert_eq!(r.lines.iter().filter(|l| l.name.starts_with("yoneda")).count(), 16);
}
