//! Seeded random generators for domain terms and finite categories.

use crate::presheaf::{CatError, FiniteCategory};
use crate::syntax::*;
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::HashMap;

/// Outermost constructor of a generated term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Head {
    Var,
    App,
    Lam,
}

pub fn o() -> DomTerm {
    DomTerm::Con(DCon::O, vec![])
}

pub fn arr(a: DomTerm, b: DomTerm) -> DomTerm {
    DomTerm::Con(DCon::Arr, vec![a, b])
}

/// `(., x1:a, .., xn:a)`
pub fn uniform_ctx(n: usize, a: DomType) -> DomCtx {
    (0..n).fold(DomCtx::Empty, |c, _| snoc(c, a.clone()))
}

// ---------------------------------------------------------------------------
// simple mode

/// A random `tm` over `n` variables.
pub fn simple_tm<R: Rng>(rng: &mut R, n: usize, depth: usize) -> DomTerm {
    let heads: &[Head] = match (n, depth) {
        (0, 0) => return simple_lam(dlam(dvar(0))),
        (_, 0) => &[Head::Var],
        (0, _) => &[Head::App, Head::Lam],
        _ => &[Head::Var, Head::Var, Head::App, Head::Lam],
    };
    let h = *heads.choose(rng).unwrap();
    simple_tm_with_head(rng, n, depth, h)
}

/// Like `simple_tm` with the outermost constructor fixed. `Head::Var` needs `n > 0`.
pub fn simple_tm_with_head<R: Rng>(rng: &mut R, n: usize, depth: usize, h: Head) -> DomTerm {
    let d = depth.saturating_sub(1);
    match h {
        Head::Var => dvar(rng.gen_range(0..n)),
        Head::App => simple_app(simple_tm(rng, n, d), simple_tm(rng, n, d)),
        Head::Lam => simple_lam(dlam(simple_tm(rng, n + 1, d))),
    }
}

// ---------------------------------------------------------------------------
// dep mode

/// A random `ty`. `vars` lists de Bruijn indices of variables of type `ty`.
pub fn dep_ty<R: Rng>(rng: &mut R, vars: &[usize], depth: usize) -> DomTerm {
    let leaf = vars.len() + 1;
    let pick = if depth == 0 { rng.gen_range(0..leaf) } else { rng.gen_range(0..leaf + 2) };
    if pick < vars.len() {
        dvar(vars[pick])
    } else if pick == vars.len() {
        o()
    } else {
        arr(dep_ty(rng, vars, depth - 1), dep_ty(rng, vars, depth - 1))
    }
}

/// Closed type of `arr a b`, split.
fn split_arr(a: &DomTerm) -> Option<(&DomTerm, &DomTerm)> {
    match a {
        DomTerm::Con(DCon::Arr, xs) => Some((&xs[0], &xs[1])),
        _ => None,
    }
}

fn vars_of(tys: &[DomTerm], a: &DomTerm) -> Vec<usize> {
    let n = tys.len();
    (0..n).filter(|&i| tys[n - 1 - i] == *a).collect()
}

/// A random `trm a` in a context of closed `trm` declarations listed
/// innermost last. The context must contain a `trm o` so every type is
/// inhabited.
pub fn dep_trm<R: Rng>(rng: &mut R, tys: &[DomTerm], a: &DomTerm, depth: usize) -> DomTerm {
    let vs = vars_of(tys, a);
    let mut heads = Vec::new();
    if !vs.is_empty() {
        heads.extend([Head::Var, Head::Var]);
    }
    if split_arr(a).is_some() {
        heads.push(Head::Lam);
    }
    if depth > 0 || heads.is_empty() {
        heads.push(Head::App);
    }
    let h = if depth == 0 && !vs.is_empty() { Head::Var } else { *heads.choose(rng).unwrap() };
    dep_trm_with_head(rng, tys, a, depth, h).expect("head is available")
}

/// Like `dep_trm` with the outermost constructor fixed; `None` if no such term
/// exists (a variable of the type, or a lambda at a base type).
pub fn dep_trm_with_head<R: Rng>(rng: &mut R, tys: &[DomTerm], a: &DomTerm, depth: usize, h: Head) -> Option<DomTerm> {
    let d = depth.saturating_sub(1);
    match h {
        Head::Var => vars_of(tys, a).choose(rng).map(|&i| dvar(i)),
        Head::Lam => {
            let (b, c) = split_arr(a)?;
            let mut inner = tys.to_vec();
            inner.push(b.clone());
            let body = dep_trm(rng, &inner, c, d);
            Some(DomTerm::Con(DCon::Lam, vec![b.clone(), c.clone(), dlam(body)]))
        }
        Head::App => {
            // a variable of the argument type keeps the search finite at depth 0
            let b = if depth == 0 { o() } else { dep_ty(rng, &[], 1) };
            let f = dep_trm(rng, tys, &arr(b.clone(), a.clone()), d);
            let x = dep_trm(rng, tys, &b, d);
            Some(DomTerm::Con(DCon::App, vec![b, a.clone(), f, x]))
        }
    }
}

/// Context of `trm` declarations, innermost last.
pub fn trm_ctx(tys: &[DomTerm]) -> DomCtx {
    tys.iter().fold(DomCtx::Empty, |c, a| snoc(c, trm(a.clone())))
}

// ---------------------------------------------------------------------------
// finite categories

/// A random concrete category: objects are finite sets, morphisms the
/// closure of a few random functions under composition, plus a one-point
/// terminal object. Validated through the text loader.
pub fn random_category<R: Rng>(rng: &mut R, objects: usize, generators: usize) -> Result<FiniteCategory, CatError> {
    let sizes: Vec<usize> = (0..objects).map(|_| rng.gen_range(1..=3)).chain([1]).collect();
    let t = objects;
    let names: Vec<String> = (0..objects).map(|i| format!("o{i}")).chain(["t".to_string()]).collect();
    // (src, tgt, table) -> name
    type Key = (usize, usize, Vec<usize>);
    let mut mors: Vec<(String, Key)> = Vec::new();
    let mut seen: HashMap<Key, usize> = HashMap::new();
    let add = |name: String, k: Key, mors: &mut Vec<(String, Key)>, seen: &mut HashMap<Key, usize>| -> usize {
        *seen.entry(k.clone()).or_insert_with(|| {
            mors.push((name, k));
            mors.len() - 1
        })
    };
    for (x, &n) in sizes.iter().enumerate() {
        add(format!("id_{}", names[x]), (x, x, (0..n).collect()), &mut mors, &mut seen);
    }
    for x in 0..objects {
        add(format!("!{}", names[x]), (x, t, vec![0; sizes[x]]), &mut mors, &mut seen);
    }
    for g in 0..generators {
        let (x, y) = (rng.gen_range(0..=objects), rng.gen_range(0..objects));
        let table = (0..sizes[x]).map(|_| rng.gen_range(0..sizes[y])).collect();
        add(format!("g{g}"), (x, y, table), &mut mors, &mut seen);
    }
    let mut comps = Vec::new();
    let mut i = 0;
    while i < mors.len() {
        for j in 0..=i {
            for (f, g) in [(i, j), (j, i)] {
                // g after f
                let (fk, gk) = (mors[f].1.clone(), mors[g].1.clone());
                if fk.1 != gk.0 {
                    continue;
                }
                let table = fk.2.iter().map(|&v| gk.2[v]).collect();
                let name = format!("c{}", mors.len());
                let h = add(name, (fk.0, gk.1, table), &mut mors, &mut seen);
                comps.push((g, f, h));
            }
        }
        i += 1;
    }
    let mut text = String::new();
    for n in &names {
        text.push_str(&format!("object {n}\n"));
    }
    text.push_str("terminal t\n");
    for (name, (x, y, _)) in &mors {
        if !name.starts_with("id_") {
            text.push_str(&format!("mor {name} : {} -> {}\n", names[*x], names[*y]));
        }
    }
    comps.sort();
    comps.dedup();
    for (g, f, h) in comps {
        if mors[g].0.starts_with("id_") || mors[f].0.starts_with("id_") {
            continue;
        }
        text.push_str(&format!("compose {} {} = {}\n", mors[g].0, mors[f].0, mors[h].0));
    }
    FiniteCategory::parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::Checker;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_terms_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let ck = Checker::new(Mode::Simple);
        for n in 0..4 {
            let m = simple_tm(&mut rng, n, 3);
            ck.check_dom_term(&[], &uniform_ctx(n, DomType::Tm), &m, &DomType::Tm).unwrap();
        }
        let ck = Checker::new(Mode::Dep);
        let tys = vec![o(), arr(o(), o())];
        for _ in 0..20 {
            let a = dep_ty(&mut rng, &[], 2);
            let m = dep_trm(&mut rng, &tys, &a, 3);
            ck.check_dom_term(&[], &trm_ctx(&tys), &m, &trm(a)).unwrap();
        }
    }

    #[test]
    fn random_categories_load() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let c = random_category(&mut rng, 2, 3).unwrap();
            assert!(c.terminal.is_some());
        }
    }
}
