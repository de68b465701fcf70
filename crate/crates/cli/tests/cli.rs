use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus").join(rel)
}

fn cocon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cocon")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn simple_files() -> Vec<String> {
    let mut v: Vec<_> = std::fs::read_dir(corpus("ok"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with("simple_"))
        .map(|p| p.display().to_string())
        .collect();
    v.sort();
    v
}

#[test]
fn simple_corpus_checks() {
    let files = simple_files();
    let mut args = vec!["check", "--mode", "simple"];
    args.extend(files.iter().map(String::as_str));
    let o = cocon(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = String::from_utf8(o.stdout).unwrap();
    // output follows argument order
    let firsts: Vec<_> = out.lines().map(|l| l.split(':').next().unwrap().to_string()).collect();
    let mut order = firsts.clone();
    order.dedup();
    assert_eq!(order, files);
}

#[test]
fn translate_copy_to_internal() {
    let f = corpus("ok/simple_copy.ccn");
    let o = cocon(&["translate", "--target", "internal", f.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("copy : "));
}

#[test]
fn trace_lists_rules() {
    let f = corpus("ok/dep_lam_id.ccn");
    let plain = cocon(&["translate", "--target", "internal", f.to_str().unwrap()]);
    let traced = cocon(&["translate", "--target", "internal", "--trace", f.to_str().unwrap()]);
    assert_eq!(code(&traced), 0);
    assert!(traced.stdout.len() > plain.stdout.len());
}

#[test]
fn fitch_refuses_recursors() {
    let f = corpus("ok/simple_copy.ccn");
    let o = cocon(&["translate", "--target", "fitch", "--decl", "copy", f.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("RecursorPresent"));
}

#[test]
fn unbound_name_is_a_scope_error() {
    let f = corpus("bad/unbound.ccn");
    let o = cocon(&["check", f.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("ScopeError"));
}

#[test]
fn usage_and_io_errors_exit_2() {
    assert_eq!(code(&cocon(&["check", "no/such/file.ccn"])), 2);
    assert_eq!(code(&cocon(&["frobnicate"])), 2);
    assert_eq!(code(&cocon(&["check"])), 2);
    assert_eq!(code(&cocon(&["--fuel", "many", "report"])), 2);
    let f = corpus("ok/simple_copy.ccn");
    assert_eq!(code(&cocon(&["eval", f.to_str().unwrap(), "--decl", "missing"])), 2);
}

#[test]
fn eval_prints_normal_form() {
    let f = corpus("ok/simple_copy.ccn");
    let o = cocon(&["eval", f.to_str().unwrap(), "--decl", "copy_var"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("copy_var = box("));
}

#[test]
fn verify_model_passes_on_shipped_models() {
    for m in ["models/four.cat", "models/boolean.cat"] {
        let o = cocon(&["verify-model", corpus(m).to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{m}");
        assert!(!String::from_utf8(o.stdout).unwrap().contains("FAIL"));
    }
}

#[test]
fn verify_model_rejects_broken_category() {
    let dir = std::env::temp_dir().join(format!("cocon-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("broken.cat");
    std::fs::write(&p, "object a\nobject b\nmor f : a -> b\nmor g : b -> a\n").unwrap();
    assert_eq!(code(&cocon(&["verify-model", p.to_str().unwrap()])), 1);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn report_jsonl_records() {
    let o = cocon(&["report", "--format", "jsonl"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    let first = out.lines().next().unwrap();
    assert!(first.starts_with("{\"name\":\"bad/"), "{first}");
    assert!(first.ends_with(",\"ms\":null}"), "{first}");
}

#[test]
fn low_fuel_gives_unknown() {
    let f = corpus("ok/simple_copy.ccn");
    let o = cocon(&["--fuel", "5", "check", "--format", "jsonl", f.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8(o.stdout).unwrap().contains("\"verdict\":\"unknown\""));
}
