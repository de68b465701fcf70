use cocon::pipeline::{check_file, parse_source, text_line, Options};
use std::fs;
use std::path::PathBuf;

fn corpus(dir: &str) -> Vec<PathBuf> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(dir);
    let mut v: Vec<_> = fs::read_dir(root)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "ccn"))
        .collect();
    v.sort();
    v
}

fn run(dir: &str) {
    let mut bad = Vec::new();
    for p in corpus(dir) {
        let name = p.file_name().unwrap().to_string_lossy().to_string();
        let src = fs::read_to_string(&p).unwrap();
        let sf = match parse_source(&src, &Options::default()) {
            Ok(sf) => sf,
            Err(e) => {
                bad.push(format!("{name}: {e}"));
                continue;
            }
        };
        let r = check_file(&name, &sf, &Options::default());
        for d in &r.decls {
            if !d.matches {
                bad.push(format!("{}  {:?}", text_line(&name, d), d.message));
            }
        }
    }
    assert!(bad.is_empty(), "{}", bad.join("\n"));
}

#[test]
fn ok_corpus_matches_directives() {
    run("ok");
}

fn designated(src: &str) -> Option<String> {
    src.lines().filter_map(|l| l.trim().strip_prefix("--expect: type-error:")).map(|c| c.trim().to_string()).next_back()
}

#[test]
fn bad_corpus_rejected_with_designated_class() {
    let files = corpus("bad");
    assert!(files.len() >= 12);
    let mut bad = Vec::new();
    for p in files {
        let name = p.file_name().unwrap().to_string_lossy().to_string();
        let src = fs::read_to_string(&p).unwrap();
        let want = designated(&src).expect("bad files carry a designated class");
        let got = match parse_source(&src, &Options::default()) {
            Err(e) => e.class().to_string(),
            Ok(sf) => {
                let r = check_file(&name, &sf, &Options::default());
                if !r.all_match() {
                    bad.push(format!(
                        "{name}: {:?}",
                        r.decls.iter().map(|d| (&d.name, &d.verdict)).collect::<Vec<_>>()
                    ));
                    continue;
                }
                match r.decls.iter().rev().find_map(|d| match &d.verdict {
                    cocon::pipeline::Verdict::TypeError(c) => Some(c.clone()),
                    _ => None,
                }) {
                    Some(c) => c,
                    None => "accepted".into(),
                }
            }
        };
        if got != want {
            bad.push(format!("{name}: wanted {want}, got {got}"));
        }
    }
    assert!(bad.is_empty(), "{}", bad.join("\n"));
}

fn translate_all(target: cocon::pipeline::Target, skip_rec: bool) -> (usize, Vec<String>) {
    use cocon::pipeline::translate_decl;
    let opts = Options::default();
    let (mut n, mut bad) = (0, Vec::new());
    for p in corpus("ok") {
        let name = p.file_name().unwrap().to_string_lossy().to_string();
        let sf = parse_source(&fs::read_to_string(&p).unwrap(), &opts).unwrap();
        if skip_rec && sf.mode != cocon::Mode::Dep {
            continue;
        }
        for i in 0..sf.decls.len() {
            if skip_rec && sf.decls[i].uses_rec() {
                continue;
            }
            if let Some(t) = translate_decl(&sf, i, target, &opts, false) {
                n += 1;
                if let Err(e) = t.recheck {
                    bad.push(format!("{name}/{}: {e}\n  {}\n  : {}", t.name, t.term, t.ty));
                }
            }
        }
    }
    (n, bad)
}

#[test]
fn ok_corpus_rechecks_in_internal_theory() {
    let (n, bad) = translate_all(cocon::pipeline::Target::Internal, false);
    assert!(n > 0);
    assert!(bad.is_empty(), "{} of {n} failed\n{}", bad.len(), bad.join("\n"));
}

#[test]
fn recursor_free_dep_corpus_rechecks_in_fitch() {
    let (n, bad) = translate_all(cocon::pipeline::Target::Fitch, true);
    assert!(n > 0);
    assert!(bad.is_empty(), "{} of {n} failed\n{}", bad.len(), bad.join("\n"));
}
