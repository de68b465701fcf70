//! End-to-end acceptance run. Prints one line per criterion and exits
//! non-zero if any fails.

use cocon::laws::{self, Case};
use cocon::pipeline::{check_source, parse_source, translate_decl, Options, Target, Verdict};
use cocon::presheaf::{verify_model, FiniteCategory};
use cocon::surface::DeclBody;
use cocon::Mode;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

fn corpus_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus")
}

fn files(dir: &str) -> Vec<(String, String)> {
    let mut v: Vec<_> = fs::read_dir(corpus_root().join(dir))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "ccn"))
        .collect();
    v.sort();
    v.into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()))
        .collect()
}

type Outcome = Result<String, String>;

fn failures(cases: &[Case]) -> Vec<String> {
    cases.iter().filter_map(|c| c.result.as_ref().err().map(|e| format!("{}: {e}", c.family))).collect()
}

fn first(errs: &[String]) -> String {
    format!("{} failures, first: {}", errs.len(), errs[0])
}

fn typing_corpus() -> Outcome {
    let opts = Options::default();
    let (mut simple, mut dep, mut errs) = (0, 0, Vec::new());
    for (name, src) in files("ok") {
        let r = check_source(&name, &src, &opts).map_err(|e| format!("{name}: {e}"))?;
        if r.decls.iter().all(|d| d.verdict == Verdict::Ok && d.matches) {
            match r.mode {
                Mode::Simple => simple += 1,
                Mode::Dep => dep += 1,
            }
        } else {
            errs.push(format!("{name} has a rejected or mismatched declaration"));
        }
    }
    let mut rejected = 0;
    for (name, src) in files("bad") {
        let want =
            src.lines().filter_map(|l| l.trim().strip_prefix("--expect: type-error:")).next_back().map(str::trim);
        let got = match check_source(&name, &src, &opts) {
            Err(e) => Some(e.class().to_string()),
            Ok(r) => r.decls.iter().rev().find_map(|d| match &d.verdict {
                Verdict::TypeError(c) => Some(c.clone()),
                _ => None,
            }),
        };
        match (want, got) {
            (Some(w), Some(g)) if w == g => rejected += 1,
            (w, g) => errs.push(format!("{name}: wanted {w:?}, got {g:?}")),
        }
    }
    if !errs.is_empty() {
        return Err(first(&errs));
    }
    let msg =
        format!("{simple} simple + {dep} dep well-typed files, {rejected} ill-typed files rejected with their class");
    if simple + dep >= 30 && simple >= 12 && dep >= 18 && rejected >= 12 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn recursor_equations() -> Outcome {
    let cases = laws::recursor_equations(0, 10);
    let errs = failures(&cases);
    if !errs.is_empty() {
        return Err(first(&errs));
    }
    let mut per: BTreeMap<&str, usize> = BTreeMap::new();
    for c in &cases {
        *per.entry(c.family.as_str()).or_default() += 1;
    }
    let stuck: usize = per.iter().filter(|(f, _)| f.ends_with("/stuck")).map(|(_, n)| n).sum();
    let ctors: Vec<_> = per.iter().filter(|(f, _)| !f.ends_with("/stuck")).collect();
    let msg = format!(
        "{} constructors, min {} instances each, {stuck} stuck scrutinees",
        ctors.len(),
        ctors.iter().map(|(_, n)| **n).min().unwrap_or(0)
    );
    if ctors.len() == 8 && ctors.iter().all(|(_, n)| **n >= 10) && stuck > 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn beta_eta() -> Outcome {
    let beta = laws::unbox_beta(2, 12);
    let eta = laws::box_eta(3, 6);
    let errs: Vec<_> = failures(&beta).into_iter().chain(failures(&eta)).collect();
    if !errs.is_empty() {
        return Err(first(&errs));
    }
    let msg = format!("{} unbox-box pairs, {} box-unbox pairs iequal", beta.len(), eta.len());
    if beta.len() >= 20 && eta.len() >= 10 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn translation_rechecks() -> Outcome {
    let opts = Options::default();
    let (mut internal, mut fitch, mut errs) = (0, 0, Vec::new());
    for (name, src) in files("ok") {
        let sf = parse_source(&src, &opts).map_err(|e| format!("{name}: {e}"))?;
        for (i, d) in sf.decls.iter().enumerate() {
            if matches!(d.body, DeclBody::Ctx(_)) {
                continue;
            }
            let targets: &[Target] = if sf.mode == Mode::Dep && !d.uses_rec() {
                &[Target::Internal, Target::Fitch]
            } else {
                &[Target::Internal]
            };
            for &t in targets {
                match translate_decl(&sf, i, t, &opts, false) {
                    None => errs.push(format!("{name}/{}: not translated", d.name)),
                    Some(tr) => match tr.recheck {
                        Ok(()) if t == Target::Internal => internal += 1,
                        Ok(()) => fitch += 1,
                        Err(e) => errs.push(format!("{name}/{}: {e}", d.name)),
                    },
                }
            }
        }
    }
    if !errs.is_empty() {
        return Err(first(&errs));
    }
    let msg = format!(
        "{internal} declarations recheck in the internal theory, {fitch} recursor-free dep declarations in Fitch"
    );
    if internal > 0 && fitch > 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn substitution_lemmas() -> Outcome {
    let cases = laws::substitution_lemmas(4, 25);
    let errs = failures(&cases);
    if !errs.is_empty() {
        return Err(first(&errs));
    }
    let msg = format!("{} weakening/substitution instances, 0 failures", cases.len());
    if cases.len() >= 200 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn presheaf_lab() -> Outcome {
    let src = fs::read_to_string(corpus_root().join("models/four.cat")).map_err(|e| e.to_string())?;
    let c = FiniteCategory::parse(&src).map_err(|e| e.to_string())?;
    if c.objects.len() != 4 || c.terminal.is_none() {
        return Err("model is not a 4-object category with terminal".into());
    }
    let r = verify_model(&c, &mut ChaCha8Rng::seed_from_u64(0), 10, 5);
    if let Some(l) = r.lines.iter().find(|l| !l.holds) {
        return Err(l.name.clone());
    }
    let count = |p: &str| r.lines.iter().filter(|l| l.name.starts_with(p)).count();
    let flats = r
        .lines
        .iter()
        .filter(|l| l.name.starts_with("flat #"))
        .map(|l| &l.name[..l.name.find(':').unwrap()])
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    let msg = format!(
        "{} yoneda pairs, {flats} presheaves pass the flat laws, {} currying triples",
        count("yoneda "),
        count("currying #")
    );
    if count("yoneda ") == 16 && flats == 10 && count("currying #") == 5 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn report_jsonl(threads: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_cocon"))
        .args(["report", "--format", "jsonl"])
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("report exited with {}: {}", out.status, String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn determinism(a: &[u8], b: &[u8]) -> Outcome {
    let lines = a.iter().filter(|&&c| c == b'\n').count();
    if a == b && lines > 0 {
        Ok(format!("two runs produce identical JSONL ({lines} records, {} bytes)", a.len()))
    } else {
        Err(format!("runs differ ({} vs {} bytes)", a.len(), b.len()))
    }
}

fn no_unknown(a: &[u8]) -> Outcome {
    let text = std::str::from_utf8(a).map_err(|e| e.to_string())?;
    let mut unknown = Vec::new();
    let mut n = 0;
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).map_err(|e| format!("{e}: {line}"))?;
        let at: Vec<_> =
            ["\"name\":", "\"judgment\":", "\"verdict\":", "\"ms\":"].iter().map(|k| line.find(k)).collect();
        if v.as_object().map(|o| o.len()) != Some(4) || at.contains(&None) || !at.windows(2).all(|w| w[0] < w[1]) {
            return Err(format!("keys out of order: {line}"));
        }
        n += 1;
        if v["verdict"] == "unknown" {
            unknown.push(v["name"].to_string());
        }
    }
    if unknown.is_empty() {
        Ok(format!("{n} verdicts, none unknown at default fuel"))
    } else {
        Err(format!("unknown: {}", unknown.join(", ")))
    }
}

fn main() {
    let mut failed = 0;
    let mut line = |n: usize, what: &str, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let r = f();
        let ms = t.elapsed().as_millis();
        match r {
            Ok(m) => println!("criterion {n} PASS  {what}: {m} [{ms} ms]"),
            Err(m) => {
                failed += 1;
                println!("criterion {n} FAIL  {what}: {m} [{ms} ms]");
            }
        }
    };
    line(1, "typing corpus", &typing_corpus);
    line(2, "recursor equations", &recursor_equations);
    line(3, "beta/eta soundness", &beta_eta);
    line(4, "translation rechecks", &translation_rechecks);
    line(5, "substitution lemmas", &substitution_lemmas);
    line(6, "presheaf lab", &presheaf_lab);
    let runs = (report_jsonl("4"), report_jsonl("1"));
    line(7, "determinism", &|| match &runs {
        (Ok(a), Ok(b)) => determinism(a, b),
        (Err(e), _) | (_, Err(e)) => Err(e.clone()),
    });
    line(8, "no unknown verdicts", &|| match &runs.0 {
        Ok(a) => no_unknown(a),
        Err(e) => Err(e.clone()),
    });
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
