use cocon_bench::cocon::pipeline::{check_file, parse_source, translate_decl, Options, Target};
use cocon_bench::cocon::presheaf::{verify_model, FiniteCategory};
use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::Path;

fn ok_sources() -> Vec<(String, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus/ok");
    let mut v: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v.into_iter().map(|p| (p.display().to_string(), std::fs::read_to_string(p).unwrap())).collect()
}

fn check(c: &mut Criterion) {
    let srcs = ok_sources();
    let opts = Options::default();
    c.bench_function("check ok corpus", |b| {
        b.iter(|| {
            for (name, src) in &srcs {
                let sf = parse_source(src, &opts).unwrap();
                black_box(check_file(name, &sf, &opts));
            }
        })
    });
}

fn translate(c: &mut Criterion) {
    let opts = Options::default();
    let files: Vec<_> = ok_sources().into_iter().map(|(_, s)| parse_source(&s, &opts).unwrap()).collect();
    for (label, target) in
        [("translate+recheck internal", Target::Internal), ("translate+recheck fitch", Target::Fitch)]
    {
        c.bench_function(label, |b| {
            b.iter(|| {
                for sf in &files {
                    for i in 0..sf.decls.len() {
                        if target == Target::Fitch
                            && (sf.mode != cocon_bench::cocon::Mode::Dep || sf.decls[i].uses_rec())
                        {
                            continue;
                        }
                        black_box(translate_decl(sf, i, target, &opts, false));
                    }
                }
            })
        });
    }
}

fn presheaf(c: &mut Criterion) {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus/models/four.cat");
    let cat = FiniteCategory::parse(&std::fs::read_to_string(p).unwrap()).unwrap();
    c.bench_function("verify four-object model", |b| {
        b.iter(|| black_box(verify_model(&cat, &mut ChaCha8Rng::seed_from_u64(0), 10, 5)))
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = check, translate, presheaf
}
criterion_main!(benches);
