//! Finite categories, presheaves on them and natural transformations,
//! computed exhaustively.

use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

pub type Obj = usize;
pub type MorId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mor {
    pub name: String,
    pub src: Obj,
    pub tgt: Obj,
}

/// A chosen product `p` of `a` and `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Product {
    pub a: Obj,
    pub b: Obj,
    pub p: Obj,
    pub pi1: MorId,
    pub pi2: MorId,
}

/// A chosen exponential `e` of `b` by `a`, with `eval : e × a -> b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exponential {
    pub a: Obj,
    pub b: Obj,
    pub e: Obj,
    pub eval: MorId,
}

#[derive(Clone, Debug)]
pub struct FiniteCategory {
    pub objects: Vec<String>,
    pub mors: Vec<Mor>,
    pub ids: Vec<MorId>,
    /// `comp[g][f] = g ∘ f` when `tgt f = src g`.
    comp: Vec<Vec<Option<MorId>>>,
    pub terminal: Option<Obj>,
    pub products: Vec<Product>,
    pub exps: Vec<Exponential>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown object {0}")]
    UnknownObject(String),
    #[error("unknown morphism {0}")]
    UnknownMorphism(String),
    #[error("duplicate name {0}")]
    Duplicate(String),
    #[error("no composite given for {0} . {1}")]
    MissingComposite(String, String),
    #[error("composite {0} . {1} = {2} has the wrong source or target")]
    CompositeShape(String, String, String),
    #[error("identity law fails at {0}")]
    Identity(String),
    #[error("associativity fails on ({0}, {1}, {2})")]
    Associativity(String, String, String),
    #[error("terminal: {0}")]
    Terminal(String),
    #[error("no terminal object designated")]
    NoTerminal,
    #[error("product: {0}")]
    Product(String),
    #[error("exponential: {0}")]
    Exponential(String),
}

impl CatError {
    pub fn class(&self) -> &'static str {
        match self {
            CatError::Parse { .. } => "ParseError",
            CatError::UnknownObject(_) => "UnknownObject",
            CatError::UnknownMorphism(_) => "UnknownMorphism",
            CatError::Duplicate(_) => "Duplicate",
            CatError::MissingComposite(..) => "MissingComposite",
            CatError::CompositeShape(..) => "CompositeShape",
            CatError::Identity(_) => "IdentityLaw",
            CatError::Associativity(..) => "Associativity",
            CatError::Terminal(_) => "Terminal",
            CatError::NoTerminal => "NoTerminal",
            CatError::Product(_) => "Product",
            CatError::Exponential(_) => "Exponential",
        }
    }
}

impl FiniteCategory {
    /// Objects by name and non-identity morphisms as `(name, src, tgt)`;
    /// identities are added as `id_<obj>`. Composites are filled by
    /// `compose` calls and checked by `validate`.
    pub fn new(objects: &[&str], mors: &[(&str, &str, &str)]) -> Result<FiniteCategory, CatError> {
        let mut c = FiniteCategory {
            objects: Vec::new(),
            mors: Vec::new(),
            ids: Vec::new(),
            comp: Vec::new(),
            terminal: None,
            products: Vec::new(),
            exps: Vec::new(),
        };
        for o in objects {
            c.add_object(o)?;
        }
        for (n, s, t) in mors {
            let (s, t) = (c.object(s)?, c.object(t)?);
            c.add_mor(n, s, t)?;
        }
        Ok(c)
    }

    fn add_object(&mut self, name: &str) -> Result<Obj, CatError> {
        if self.objects.iter().any(|o| o == name) {
            return Err(CatError::Duplicate(name.into()));
        }
        self.objects.push(name.into());
        let o = self.objects.len() - 1;
        let id = self.add_mor(&format!("id_{name}"), o, o)?;
        self.ids.push(id);
        Ok(o)
    }

    fn add_mor(&mut self, name: &str, src: Obj, tgt: Obj) -> Result<MorId, CatError> {
        if self.mors.iter().any(|m| m.name == name) {
            return Err(CatError::Duplicate(name.into()));
        }
        self.mors.push(Mor { name: name.into(), src, tgt });
        for row in &mut self.comp {
            row.push(None);
        }
        self.comp.push(vec![None; self.mors.len()]);
        Ok(self.mors.len() - 1)
    }

    pub fn object(&self, name: &str) -> Result<Obj, CatError> {
        self.objects.iter().position(|o| o == name).ok_or_else(|| CatError::UnknownObject(name.into()))
    }

    pub fn mor(&self, name: &str) -> Result<MorId, CatError> {
        self.mors.iter().position(|m| m.name == name).ok_or_else(|| CatError::UnknownMorphism(name.into()))
    }

    pub fn set_compose(&mut self, g: MorId, f: MorId, h: MorId) -> Result<(), CatError> {
        let (mg, mf, mh) = (&self.mors[g], &self.mors[f], &self.mors[h]);
        if mf.tgt != mg.src || mh.src != mf.src || mh.tgt != mg.tgt {
            return Err(CatError::CompositeShape(mg.name.clone(), mf.name.clone(), mh.name.clone()));
        }
        self.comp[g][f] = Some(h);
        Ok(())
    }

    pub fn compose(&self, g: MorId, f: MorId) -> MorId {
        self.comp[g][f].unwrap_or_else(|| panic!("{} . {} not composable", self.mors[g].name, self.mors[f].name))
    }

    pub fn hom(&self, x: Obj, y: Obj) -> Vec<MorId> {
        (0..self.mors.len()).filter(|&m| self.mors[m].src == x && self.mors[m].tgt == y).collect()
    }

    pub fn bang(&self, x: Obj) -> Result<MorId, CatError> {
        let t = self.terminal.ok_or(CatError::NoTerminal)?;
        self.hom(x, t).first().copied().ok_or(CatError::NoTerminal)
    }

    /// Fill identity composites and check every law; the first failure is
    /// reported with the offending morphisms.
    pub fn validate(&mut self) -> Result<(), CatError> {
        let n = self.mors.len();
        for m in 0..n {
            let (s, t) = (self.mors[m].src, self.mors[m].tgt);
            for (g, f) in [(self.ids[t], m), (m, self.ids[s])] {
                match self.comp[g][f] {
                    None => self.comp[g][f] = Some(m),
                    Some(h) if h == m => {}
                    Some(_) => return Err(CatError::Identity(self.mors[m].name.clone())),
                }
            }
        }
        for g in 0..n {
            for f in 0..n {
                if self.mors[f].tgt == self.mors[g].src && self.comp[g][f].is_none() {
                    return Err(CatError::MissingComposite(self.mors[g].name.clone(), self.mors[f].name.clone()));
                }
            }
        }
        for h in 0..n {
            for g in 0..n {
                if self.mors[g].tgt != self.mors[h].src {
                    continue;
                }
                for f in 0..n {
                    if self.mors[f].tgt != self.mors[g].src {
                        continue;
                    }
                    if self.compose(h, self.compose(g, f)) != self.compose(self.compose(h, g), f) {
                        let nm = |m: MorId| self.mors[m].name.clone();
                        return Err(CatError::Associativity(nm(h), nm(g), nm(f)));
                    }
                }
            }
        }
        if let Some(t) = self.terminal {
            for x in 0..self.objects.len() {
                let k = self.hom(x, t).len();
                if k != 1 {
                    return Err(CatError::Terminal(format!(
                        "{} has {k} morphisms into {}",
                        self.objects[x], self.objects[t]
                    )));
                }
            }
        }
        for p in self.products.clone() {
            self.check_product(&p)?;
        }
        for e in self.exps.clone() {
            self.check_exponential(&e)?;
        }
        Ok(())
    }

    fn check_product(&self, p: &Product) -> Result<(), CatError> {
        let nm = |o: Obj| &self.objects[o];
        if self.mors[p.pi1].src != p.p
            || self.mors[p.pi1].tgt != p.a
            || self.mors[p.pi2].src != p.p
            || self.mors[p.pi2].tgt != p.b
        {
            return Err(CatError::Product(format!("projections of {} have the wrong shape", nm(p.p))));
        }
        for x in 0..self.objects.len() {
            if let Err(e) = self.pairing_table(p, x) {
                return Err(CatError::Product(e));
            }
        }
        Ok(())
    }

    /// `hom(x, p)` against `hom(x, a) × hom(x, b)`: the map `h ↦ (π₁h, π₂h)`
    /// must be a bijection. Returns the inverse as a table.
    fn pairing_table(&self, p: &Product, x: Obj) -> Result<HashMap<(MorId, MorId), MorId>, String> {
        let mut inv = HashMap::new();
        for h in self.hom(x, p.p) {
            let key = (self.compose(p.pi1, h), self.compose(p.pi2, h));
            if inv.insert(key, h).is_some() {
                return Err(format!("two maps {} -> {} share projections", self.objects[x], self.objects[p.p]));
            }
        }
        let want = self.hom(x, p.a).len() * self.hom(x, p.b).len();
        if inv.len() != want {
            return Err(format!("{} pairs into {} missing", want - inv.len(), self.objects[p.p]));
        }
        Ok(inv)
    }

    pub fn product_of(&self, a: Obj, b: Obj) -> Option<&Product> {
        self.products.iter().find(|p| p.a == a && p.b == b)
    }

    fn check_exponential(&self, e: &Exponential) -> Result<(), CatError> {
        let ea = self
            .product_of(e.e, e.a)
            .ok_or_else(|| {
                CatError::Exponential(format!("no product of {} and {}", self.objects[e.e], self.objects[e.a]))
            })?
            .clone();
        if self.mors[e.eval].src != ea.p || self.mors[e.eval].tgt != e.b {
            return Err(CatError::Exponential(format!("{} has the wrong shape", self.mors[e.eval].name)));
        }
        // for every x with a chosen x × a, curry : hom(x, e) -> hom(x × a, b) is bijective
        for xa in self.products.iter().filter(|p| p.b == e.a) {
            let x = xa.a;
            let pair_ea = self.pairing_table(&ea, xa.p).map_err(CatError::Exponential)?;
            let mut seen = HashMap::new();
            for h in self.hom(x, e.e) {
                let k = pair_ea[&(self.compose(h, xa.pi1), xa.pi2)];
                let u = self.compose(e.eval, k);
                if seen.insert(u, h).is_some() {
                    return Err(CatError::Exponential(format!("uncurrying is not injective at {}", self.objects[x])));
                }
            }
            if seen.len() != self.hom(xa.p, e.b).len() {
                return Err(CatError::Exponential(format!("uncurrying is not surjective at {}", self.objects[x])));
            }
        }
        Ok(())
    }

    pub fn parse(src: &str) -> Result<FiniteCategory, CatError> {
        let mut c = FiniteCategory::new(&[], &[])?;
        let mut comps = Vec::new();
        let mut prods = Vec::new();
        let mut exps = Vec::new();
        for (i, raw) in src.lines().enumerate() {
            let line = i + 1;
            let text = raw.split('#').next().unwrap_or("");
            let w: Vec<&str> = text.split_whitespace().collect();
            let perr = |msg: &str| CatError::Parse { line, msg: msg.into() };
            match w.as_slice() {
                [] => {}
                ["object", name] => {
                    c.add_object(name)?;
                }
                ["terminal", name] => c.terminal = Some(c.object(name)?),
                ["mor", name, ":", s, "->", t] => {
                    let (s, t) = (c.object(s)?, c.object(t)?);
                    c.add_mor(name, s, t)?;
                }
                ["compose", g, f, "=", h] => comps.push((line, g.to_string(), f.to_string(), h.to_string())),
                ["product", a, b, "=", p, "with", "pi1", m1, "pi2", m2] => {
                    prods.push([a, b, p, m1, m2].map(|s| s.to_string()))
                }
                ["exp", a, b, "=", e, "with", "eval", m] => exps.push([a, b, e, m].map(|s| s.to_string())),
                [kw, ..] => return Err(perr(&format!("cannot read `{kw}` line"))),
            }
        }
        for (_, g, f, h) in comps {
            let (g, f, h) = (c.mor(&g)?, c.mor(&f)?, c.mor(&h)?);
            c.set_compose(g, f, h)?;
        }
        for [a, b, p, m1, m2] in prods {
            let p =
                Product { a: c.object(&a)?, b: c.object(&b)?, p: c.object(&p)?, pi1: c.mor(&m1)?, pi2: c.mor(&m2)? };
            c.products.push(p);
        }
        for [a, b, e, m] in exps {
            let e = Exponential { a: c.object(&a)?, b: c.object(&b)?, e: c.object(&e)?, eval: c.mor(&m)? };
            c.exps.push(e);
        }
        c.validate()?;
        Ok(c)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for o in &self.objects {
            let _ = writeln!(s, "object {o}");
        }
        if let Some(t) = self.terminal {
            let _ = writeln!(s, "terminal {}", self.objects[t]);
        }
        let nonid = |m: &MorId| !self.ids.contains(m);
        for m in (0..self.mors.len()).filter(nonid) {
            let mm = &self.mors[m];
            let _ = writeln!(s, "mor {} : {} -> {}", mm.name, self.objects[mm.src], self.objects[mm.tgt]);
        }
        for g in (0..self.mors.len()).filter(nonid) {
            for f in (0..self.mors.len()).filter(nonid) {
                if let Some(h) = self.comp[g][f] {
                    let _ = writeln!(s, "compose {} {} = {}", self.mors[g].name, self.mors[f].name, self.mors[h].name);
                }
            }
        }
        s
    }
}

// ---------------------------------------------------------------------------
// presheaves

/// A functor `C^op -> Set` with explicit, ordered carriers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePresheaf {
    pub carriers: Vec<Vec<String>>,
    /// `action[f][y]` is `F(f)(y)` for `y ∈ F(tgt f)`, an element of `F(src f)`.
    pub action: Vec<Vec<usize>>,
}

/// A family of component functions `F(x) -> G(x)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NatTrans {
    pub components: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PshError {
    #[error("F({0}) is not the identity")]
    Identity(String),
    #[error("F({0} . {1}) differs from F({1}) . F({0})")]
    Composition(String, String),
    #[error("action of {0} leaves the carrier")]
    Range(String),
    #[error("naturality fails at {0}")]
    Naturality(String),
    #[error(transparent)]
    Cat(#[from] CatError),
}

impl FinitePresheaf {
    pub fn size(&self, x: Obj) -> usize {
        self.carriers[x].len()
    }

    pub fn validate(&self, c: &FiniteCategory) -> Result<(), PshError> {
        for (m, mm) in c.mors.iter().enumerate() {
            if self.action[m].len() != self.size(mm.tgt) || self.action[m].iter().any(|&v| v >= self.size(mm.src)) {
                return Err(PshError::Range(mm.name.clone()));
            }
        }
        for &id in &c.ids {
            if self.action[id].iter().enumerate().any(|(i, &v)| i != v) {
                return Err(PshError::Identity(c.mors[id].name.clone()));
            }
        }
        for g in 0..c.mors.len() {
            for f in 0..c.mors.len() {
                if c.mors[f].tgt != c.mors[g].src {
                    continue;
                }
                let h = c.compose(g, f);
                for z in 0..self.size(c.mors[g].tgt) {
                    if self.action[h][z] != self.action[f][self.action[g][z]] {
                        return Err(PshError::Composition(c.mors[g].name.clone(), c.mors[f].name.clone()));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn constant(c: &FiniteCategory, labels: &[String]) -> FinitePresheaf {
        FinitePresheaf {
            carriers: vec![labels.to_vec(); c.objects.len()],
            action: vec![(0..labels.len()).collect(); c.mors.len()],
        }
    }

    pub fn terminal(c: &FiniteCategory) -> FinitePresheaf {
        FinitePresheaf::constant(c, &["*".to_string()])
    }
}

/// `y(phi)(x) = C(x, phi)`, acting by precomposition.
pub fn yoneda(c: &FiniteCategory, phi: Obj) -> Result<FinitePresheaf, CatError> {
    if phi >= c.objects.len() {
        return Err(CatError::UnknownObject(format!("#{phi}")));
    }
    let homs: Vec<Vec<MorId>> = (0..c.objects.len()).map(|x| c.hom(x, phi)).collect();
    let carriers = homs.iter().map(|h| h.iter().map(|&m| c.mors[m].name.clone()).collect()).collect();
    let action = c
        .mors
        .iter()
        .enumerate()
        .map(|(f, mf)| {
            homs[mf.tgt]
                .iter()
                .map(|&h| {
                    let hf = c.compose(h, f);
                    homs[mf.src].iter().position(|&k| k == hf).expect("hom closed under precomposition")
                })
                .collect()
        })
        .collect();
    Ok(FinitePresheaf { carriers, action })
}

pub fn product(c: &FiniteCategory, f: &FinitePresheaf, g: &FinitePresheaf) -> FinitePresheaf {
    let carriers = (0..c.objects.len())
        .map(|x| {
            let mut v = Vec::new();
            for a in &f.carriers[x] {
                for b in &g.carriers[x] {
                    v.push(format!("({a},{b})"));
                }
            }
            v
        })
        .collect();
    let action = c
        .mors
        .iter()
        .enumerate()
        .map(|(m, mm)| {
            let (gs, gt) = (g.size(mm.src), g.size(mm.tgt));
            (0..f.size(mm.tgt) * gt).map(|i| f.action[m][i / gt] * gs + g.action[m][i % gt]).collect()
        })
        .collect();
    FinitePresheaf { carriers, action }
}

impl NatTrans {
    pub fn identity(f: &FinitePresheaf) -> NatTrans {
        NatTrans { components: f.carriers.iter().map(|c| (0..c.len()).collect()).collect() }
    }

    /// `self ∘ other`.
    pub fn after(&self, other: &NatTrans) -> NatTrans {
        NatTrans {
            components: other
                .components
                .iter()
                .zip(&self.components)
                .map(|(o, s)| o.iter().map(|&v| s[v]).collect())
                .collect(),
        }
    }

    pub fn is_natural(&self, c: &FiniteCategory, f: &FinitePresheaf, g: &FinitePresheaf) -> bool {
        c.mors.iter().enumerate().all(|(m, mm)| {
            (0..f.size(mm.tgt))
                .all(|y| self.components[mm.src][f.action[m][y]] == g.action[m][self.components[mm.tgt][y]])
        })
    }

    pub fn is_iso(&self, f: &FinitePresheaf, g: &FinitePresheaf) -> bool {
        self.components.iter().enumerate().all(|(x, comp)| {
            let mut hit = vec![false; g.size(x)];
            comp.iter().for_each(|&v| hit[v] = true);
            comp.len() == g.size(x) && f.size(x) == g.size(x) && hit.iter().all(|&h| h)
        })
    }
}

// ---------------------------------------------------------------------------
// enumeration of natural transformations

/// Variables are elements `(x, i)` of F; each morphism `m : x -> y` and
/// `j ∈ F(y)` ties `α_x(F(m) j)` to `G(m)(α_y j)`.
struct NatSearch<'a> {
    g: &'a FinitePresheaf,
    vars: Vec<(Obj, usize)>,
    /// outgoing ties: (morphism, target variable)
    ties: Vec<Vec<(MorId, usize)>>,
}

impl<'a> NatSearch<'a> {
    fn new(c: &FiniteCategory, f: &FinitePresheaf, g: &'a FinitePresheaf) -> NatSearch<'a> {
        let mut vars = Vec::new();
        for x in 0..c.objects.len() {
            for i in 0..f.size(x) {
                vars.push((x, i));
            }
        }
        let index: HashMap<_, _> = vars.iter().enumerate().map(|(k, v)| (*v, k)).collect();
        let mut ties = vec![Vec::new(); vars.len()];
        for (m, mm) in c.mors.iter().enumerate() {
            if c.ids.contains(&m) {
                continue;
            }
            for j in 0..f.size(mm.tgt) {
                ties[index[&(mm.tgt, j)]].push((m, index[&(mm.src, f.action[m][j])]));
            }
        }
        NatSearch { g, vars, ties }
    }

    /// Assign `v := val` and everything it forces; record assigned
    /// variables on the trail. False on conflict.
    fn assign(&self, vals: &mut [Option<usize>], trail: &mut Vec<usize>, v: usize, val: usize) -> bool {
        let mut stack = vec![(v, val)];
        while let Some((v, val)) = stack.pop() {
            match vals[v] {
                Some(w) if w == val => continue,
                Some(_) => return false,
                None => {
                    vals[v] = Some(val);
                    trail.push(v);
                    for &(m, t) in &self.ties[v] {
                        stack.push((t, self.g.action[m][val]));
                    }
                }
            }
        }
        true
    }

    fn undo(vals: &mut [Option<usize>], trail: &mut Vec<usize>, mark: usize) {
        for v in trail.drain(mark..) {
            vals[v] = None;
        }
    }

    /// Visit every solution over `order`, in order.
    fn search(
        &self,
        order: &[usize],
        vals: &mut Vec<Option<usize>>,
        trail: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[Option<usize>]),
    ) {
        let Some(pos) = order.iter().position(|&v| vals[v].is_none()) else {
            visit(vals);
            return;
        };
        let v = order[pos];
        let x = self.vars[v].0;
        for val in 0..self.g.size(x) {
            let mark = trail.len();
            if self.assign(vals, trail, v, val) {
                self.search(&order[pos..], vals, trail, visit);
            }
            Self::undo(vals, trail, mark);
        }
    }

    fn components(&self, vals: &[Option<usize>], nobj: usize) -> NatTrans {
        let mut comps = vec![Vec::new(); nobj];
        for (k, &(x, _)) in self.vars.iter().enumerate() {
            comps[x].push(vals[k].expect("complete assignment"));
        }
        NatTrans { components: comps }
    }
}

/// All natural transformations `F -> G`, in lexicographic order of their
/// components.
pub fn nat_transformations(c: &FiniteCategory, f: &FinitePresheaf, g: &FinitePresheaf) -> Vec<NatTrans> {
    let s = NatSearch::new(c, f, g);
    let order: Vec<usize> = (0..s.vars.len()).collect();
    let mut out = Vec::new();
    let mut vals = vec![None; s.vars.len()];
    s.search(&order, &mut vals, &mut Vec::new(), &mut |vals| out.push(s.components(vals, c.objects.len())));
    out.sort();
    out
}

/// `|nat(F, G)|`, counted per connected block of tied elements.
pub fn count_nat(c: &FiniteCategory, f: &FinitePresheaf, g: &FinitePresheaf) -> u128 {
    let s = NatSearch::new(c, f, g);
    let n = s.vars.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nx = p[y];
            p[y] = r;
            y = nx;
        }
        r
    }
    for v in 0..n {
        for &(_, t) in &s.ties[v] {
            let (a, b) = (find(&mut parent, v), find(&mut parent, t));
            parent[a] = b;
        }
    }
    let mut blocks: HashMap<usize, Vec<usize>> = HashMap::new();
    for v in 0..n {
        let r = find(&mut parent, v);
        blocks.entry(r).or_default().push(v);
    }
    let mut keys: Vec<_> = blocks.keys().copied().collect();
    keys.sort();
    let mut total: u128 = 1;
    for k in keys {
        // elements that many others restrict from go first
        let mut order = blocks[&k].clone();
        order.sort_by_key(|&v| std::cmp::Reverse(s.ties[v].len()));
        let mut count: u128 = 0;
        let mut vals = vec![None; n];
        s.search(&order, &mut vals, &mut Vec::new(), &mut |_| count += 1);
        total = total.checked_mul(count).expect("count overflow");
        if total == 0 {
            return 0;
        }
    }
    total
}

/// `(G ⇒ H)(x) = nat(y x × G, H)`, acting by precomposition.
pub fn exponential(c: &FiniteCategory, g: &FinitePresheaf, h: &FinitePresheaf) -> FinitePresheaf {
    let n = c.objects.len();
    let ys: Vec<FinitePresheaf> = (0..n).map(|x| yoneda(c, x).expect("object in range")).collect();
    let homs: Vec<Vec<Vec<MorId>>> = (0..n).map(|x| (0..n).map(|z| c.hom(z, x)).collect()).collect();
    let elems: Vec<Vec<NatTrans>> = (0..n).map(|x| nat_transformations(c, &product(c, &ys[x], g), h)).collect();
    let lookup: Vec<HashMap<&NatTrans, usize>> =
        elems.iter().map(|es| es.iter().enumerate().map(|(i, e)| (e, i)).collect()).collect();
    let carriers = elems.iter().map(|es| (0..es.len()).map(|i| format!("n{i}")).collect()).collect();
    let action = c
        .mors
        .iter()
        .enumerate()
        .map(|(sigma, ms)| {
            // σ : d -> x sends α ∈ (G⇒H)(x) to α'_z(δ, a) = α_z(σ∘δ, a)
            let (d, x) = (ms.src, ms.tgt);
            elems[x]
                .iter()
                .map(|alpha| {
                    let comps = (0..n)
                        .map(|z| {
                            let gz = g.size(z);
                            let mut comp = Vec::new();
                            for &delta in &homs[d][z] {
                                let sd = c.compose(sigma, delta);
                                let hi = homs[x][z].iter().position(|&k| k == sd).expect("composite in hom");
                                for a in 0..gz {
                                    comp.push(alpha.components[z][hi * gz + a]);
                                }
                            }
                            comp
                        })
                        .collect();
                    lookup[d][&NatTrans { components: comps }]
                })
                .collect()
        })
        .collect();
    FinitePresheaf { carriers, action }
}

// ---------------------------------------------------------------------------
// the flat comonad

/// `♭F`: constant at `F(⊤)`.
pub fn flat(c: &FiniteCategory, f: &FinitePresheaf) -> Result<FinitePresheaf, CatError> {
    let t = c.terminal.ok_or(CatError::NoTerminal)?;
    Ok(FinitePresheaf::constant(c, &f.carriers[t]))
}

/// `ε : ♭F -> F` with components `F(!)`.
pub fn counit(c: &FiniteCategory, f: &FinitePresheaf) -> Result<NatTrans, CatError> {
    let comps = (0..c.objects.len()).map(|x| c.bang(x).map(|b| f.action[b].clone())).collect::<Result<_, _>>()?;
    Ok(NatTrans { components: comps })
}

/// `δ : ♭F -> ♭♭F`; the two carriers coincide, so this is the identity.
pub fn comultiplication(c: &FiniteCategory, f: &FinitePresheaf) -> Result<NatTrans, CatError> {
    Ok(NatTrans::identity(&flat(c, f)?))
}

/// `♭` on morphisms: the component at `⊤`, everywhere.
pub fn flat_map(c: &FiniteCategory, a: &NatTrans) -> Result<NatTrans, CatError> {
    let t = c.terminal.ok_or(CatError::NoTerminal)?;
    Ok(NatTrans { components: vec![a.components[t].clone(); c.objects.len()] })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Law {
    pub name: String,
    pub holds: bool,
}

fn law(name: impl Into<String>, holds: bool) -> Law {
    Law { name: name.into(), holds }
}

pub fn check_comonad_laws(c: &FiniteCategory, f: &FinitePresheaf) -> Result<Vec<Law>, CatError> {
    let fl = flat(c, f)?;
    let ffl = flat(c, &fl)?;
    let eps = counit(c, f)?;
    let eps_fl = counit(c, &fl)?;
    let delta = comultiplication(c, f)?;
    let delta_fl = comultiplication(c, &fl)?;
    let id = NatTrans::identity(&fl);
    Ok(vec![
        law("flat F is a presheaf", fl.validate(c).is_ok()),
        law("counit is natural", eps.is_natural(c, &fl, f)),
        law("comultiplication is natural", delta.is_natural(c, &fl, &ffl)),
        law("flat flat F = flat F", ffl == fl),
        law("counit after comultiplication", eps_fl.after(&delta) == id),
        law("flat counit after comultiplication", flat_map(c, &eps)?.after(&delta) == id),
        law("coassociativity", flat_map(c, &delta)?.after(&delta) == delta_fl.after(&delta)),
        law("counit at flat F is bijective", eps_fl.is_iso(&ffl, &fl)),
    ])
}

// ---------------------------------------------------------------------------
// checks over a whole category

/// Full and faithful on one pair: `α ↦ α_ψ(id)` is inverse to
/// `h ↦ y(h)`. Returns `|nat(yψ, yφ)|`.
pub fn yoneda_pair(c: &FiniteCategory, psi: Obj, phi: Obj) -> Result<usize, String> {
    let (yp, yf) = (yoneda(c, psi).map_err(|e| e.to_string())?, yoneda(c, phi).map_err(|e| e.to_string())?);
    let nats = nat_transformations(c, &yp, &yf);
    let hom = c.hom(psi, phi);
    let id_pos = c.hom(psi, psi).iter().position(|&m| m == c.ids[psi]).expect("identity");
    let mut image = Vec::new();
    for a in &nats {
        let h = hom[a.components[psi][id_pos]];
        // y(h) postcomposes with h
        let yh = NatTrans {
            components: (0..c.objects.len())
                .map(|x| {
                    c.hom(x, psi)
                        .iter()
                        .map(|&k| c.hom(x, phi).iter().position(|&m| m == c.compose(h, k)).expect("composite"))
                        .collect()
                })
                .collect(),
        };
        if &yh != a {
            return Err(format!(
                "a transformation {} => {} is not y of its value at id",
                c.objects[psi], c.objects[phi]
            ));
        }
        image.push(h);
    }
    image.sort();
    image.dedup();
    if image.len() != nats.len() || nats.len() != hom.len() {
        return Err(format!("|nat| = {}, |hom| = {}", nats.len(), hom.len()));
    }
    Ok(nats.len())
}

/// `y(a × b) ≅ ya × yb` through `h ↦ (π₁h, π₂h)`.
pub fn yoneda_preserves_product(c: &FiniteCategory, p: &Product) -> bool {
    let (yp, ya, yb) = (yoneda(c, p.p).unwrap(), yoneda(c, p.a).unwrap(), yoneda(c, p.b).unwrap());
    let yab = product(c, &ya, &yb);
    let comps = (0..c.objects.len())
        .map(|x| {
            let (ha, hb) = (c.hom(x, p.a), c.hom(x, p.b));
            c.hom(x, p.p)
                .iter()
                .map(|&h| {
                    let i = ha.iter().position(|&m| m == c.compose(p.pi1, h)).unwrap();
                    let j = hb.iter().position(|&m| m == c.compose(p.pi2, h)).unwrap();
                    i * hb.len() + j
                })
                .collect()
        })
        .collect();
    let t = NatTrans { components: comps };
    t.is_natural(c, &yp, &yab) && t.is_iso(&yp, &yab)
}

/// A random presheaf with carriers of size `1..=max`, found by randomized
/// backtracking over the actions of non-identity morphisms.
pub fn random_presheaf<R: Rng>(c: &FiniteCategory, rng: &mut R, max: usize) -> FinitePresheaf {
    loop {
        let sizes: Vec<usize> = (0..c.objects.len()).map(|_| rng.gen_range(1..=max)).collect();
        if let Some(p) = fill_actions(c, &sizes, rng) {
            return p;
        }
    }
}

fn fill_actions<R: Rng>(c: &FiniteCategory, sizes: &[usize], rng: &mut R) -> Option<FinitePresheaf> {
    let nm = c.mors.len();
    let mut action: Vec<Vec<Option<usize>>> = c.mors.iter().map(|m| vec![None; sizes[m.tgt]]).collect();
    for &id in &c.ids {
        action[id] = (0..sizes[c.mors[id].src]).map(Some).collect();
    }
    let vars: Vec<(MorId, usize)> =
        (0..nm).filter(|m| !c.ids.contains(m)).flat_map(|m| (0..sizes[c.mors[m].tgt]).map(move |y| (m, y))).collect();
    // composites that mention a given morphism
    let mut touch: Vec<Vec<(MorId, MorId)>> = vec![Vec::new(); nm];
    for g in 0..nm {
        for f in 0..nm {
            if c.mors[f].tgt == c.mors[g].src {
                let h = c.compose(g, f);
                for m in [g, f, h] {
                    touch[m].push((g, f));
                }
            }
        }
    }
    let ok = |action: &Vec<Vec<Option<usize>>>, m: MorId| {
        touch[m].iter().all(|&(g, f)| {
            let h = c.compose(g, f);
            (0..sizes[c.mors[g].tgt]).all(|z| match (action[g][z], action[h][z]) {
                (Some(gz), Some(hz)) => action[f][gz].is_none_or(|fz| fz == hz),
                _ => true,
            })
        })
    };
    let mut budget = 20_000usize;
    fn go<R: Rng>(
        k: usize,
        vars: &[(MorId, usize)],
        action: &mut Vec<Vec<Option<usize>>>,
        sizes: &[usize],
        c: &FiniteCategory,
        rng: &mut R,
        budget: &mut usize,
        ok: &dyn Fn(&Vec<Vec<Option<usize>>>, MorId) -> bool,
    ) -> bool {
        if k == vars.len() {
            return true;
        }
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let (m, y) = vars[k];
        let mut vals: Vec<usize> = (0..sizes[c.mors[m].src]).collect();
        vals.shuffle(rng);
        for v in vals {
            action[m][y] = Some(v);
            if ok(action, m) && go(k + 1, vars, action, sizes, c, rng, budget, ok) {
                return true;
            }
        }
        action[m][y] = None;
        false
    }
    if !go(0, &vars, &mut action, sizes, c, rng, &mut budget, &ok) {
        return None;
    }
    let carriers =
        sizes.iter().enumerate().map(|(x, &n)| (0..n).map(|i| format!("{}{i}", c.objects[x])).collect()).collect();
    let action = action.into_iter().map(|v| v.into_iter().map(|x| x.expect("filled")).collect()).collect();
    let p = FinitePresheaf { carriers, action };
    p.validate(c).ok().map(|_| p)
}

/// One line per check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelReport {
    pub lines: Vec<Law>,
}

impl ModelReport {
    pub fn all_hold(&self) -> bool {
        self.lines.iter().all(|l| l.holds)
    }
}

/// Yoneda on every pair, ♭ laws on `flats` random presheaves, currying on
/// `triples` random triples, and product preservation for chosen products.
pub fn verify_model<R: Rng>(c: &FiniteCategory, rng: &mut R, flats: usize, triples: usize) -> ModelReport {
    let mut lines = Vec::new();
    let n = c.objects.len();
    for psi in 0..n {
        for phi in 0..n {
            let r = yoneda_pair(c, psi, phi);
            let name = match &r {
                Ok(k) => format!("yoneda {} {}: |nat| = |hom| = {k}", c.objects[psi], c.objects[phi]),
                Err(e) => format!("yoneda {} {}: {e}", c.objects[psi], c.objects[phi]),
            };
            lines.push(law(name, r.is_ok()));
        }
    }
    if c.terminal.is_some() {
        for i in 0..flats {
            let f = random_presheaf(c, rng, 4);
            for l in check_comonad_laws(c, &f).expect("terminal present") {
                lines.push(law(format!("flat #{i}: {}", l.name), l.holds));
            }
        }
    }
    for i in 0..triples {
        let (f, g, h) = (random_presheaf(c, rng, 2), random_presheaf(c, rng, 2), random_presheaf(c, rng, 2));
        let lhs = count_nat(c, &product(c, &f, &g), &h);
        let e = exponential(c, &g, &h);
        let rhs = count_nat(c, &f, &e);
        lines.push(law(format!("currying #{i}: {lhs} = {rhs}"), lhs == rhs && e.validate(c).is_ok()));
    }
    for p in &c.products {
        lines.push(law(
            format!("y preserves {} x {} = {}", c.objects[p.a], c.objects[p.b], c.objects[p.p]),
            yoneda_preserves_product(c, p),
        ));
    }
    ModelReport { lines }
}
