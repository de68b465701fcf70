use clap::{Parser, Subcommand, ValueEnum};
use cocon::check::DEFAULT_FUEL;
use cocon::pipeline::{self, checker_for, text_line, DeclOutcome, FileReport, Options, Target, Verdict};
use cocon::presheaf::{verify_model, FiniteCategory};
use cocon::surface::{DeclBody, Expect, Printer};
use cocon::Mode;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cocon", version, about = "Checker, evaluator and translator for Cocon programs")]
struct Cli {
    /// Reduction steps allowed per checker run
    #[arg(long, global = true, default_value_t = DEFAULT_FUEL)]
    fuel: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Type-check source files
    Check {
        /// Override the file's own `--mode:` line
        #[arg(long)]
        mode: Option<ModeArg>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Print the normal form of one declaration
    Eval {
        file: PathBuf,
        #[arg(long)]
        decl: String,
    },
    /// Translate declarations and re-check the images in the target
    Translate {
        #[arg(long, value_enum)]
        target: TargetArg,
        /// Print the translation rule applied at each node
        #[arg(long)]
        trace: bool,
        /// Only this declaration
        #[arg(long)]
        decl: Option<String>,
        file: PathBuf,
    },
    /// Validate a finite category and run the presheaf checks on it
    VerifyModel {
        catfile: PathBuf,
        /// Seed for the random presheaves
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check every `.ccn` file under the given paths against its directives
    Report {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Record wall-clock milliseconds (makes output nondeterministic)
        #[arg(long)]
        timings: bool,
        /// Files or directories; defaults to the bundled corpus
        paths: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Simple,
    Dep,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Jsonl,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Internal,
    Fitch,
}

#[derive(Serialize)]
struct Record<'a> {
    name: String,
    judgment: &'a str,
    verdict: &'a str,
    ms: Option<f64>,
}

fn jsonl(file: &str, d: &DeclOutcome) -> String {
    let r = Record {
        name: format!("{file}:{}", d.name),
        judgment: &d.judgment,
        verdict: d.verdict.as_str(),
        ms: d.ms.map(|x| (x * 1e3).round() / 1e3),
    };
    serde_json::to_string(&r).expect("records serialize")
}

/// `println!` that exits quietly when the reader has gone away (`| head`).
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write;
        if let Err(e) = writeln!(std::io::stdout().lock(), $($t)*) {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                std::process::exit(0);
            }
            panic!("writing to stdout: {e}");
        }
    }};
}

/// Exit statuses.
const OK: u8 = 0;
const FAIL: u8 = 1;
const USAGE: u8 = 2;

struct Failure(u8, String);

fn read(p: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(p).map_err(|e| Failure(USAGE, format!("{}: {e}", p.display())))
}

fn run_file(label: &str, path: &Path, opts: &Options) -> Result<FileReport, Failure> {
    let src = read(path)?;
    pipeline::check_source(label, &src, opts).map_err(|e| Failure(USAGE, format!("{label}:{e}")))
}

fn print_report(r: &FileReport, format: Format) {
    for d in &r.decls {
        match format {
            Format::Text => out!("{}", text_line(&r.file, d)),
            Format::Jsonl => out!("{}", jsonl(&r.file, d)),
        }
    }
}

fn diagnose(r: &FileReport) {
    for d in &r.decls {
        if let Some(m) = &d.message {
            eprintln!("{}:{}: {}: {m}", r.file, d.span, d.name);
        }
    }
}

fn check(files: &[PathBuf], format: Format, opts: &Options) -> u8 {
    let results: Vec<_> = files.par_iter().map(|p| run_file(&p.display().to_string(), p, opts)).collect();
    let mut code = OK;
    for r in results {
        match r {
            Ok(r) => {
                print_report(&r, format);
                diagnose(&r);
                // a rejected declaration fails the check even when a directive predicts it
                let rejected = r.decls.iter().any(|d| d.verdict != Verdict::Ok);
                if rejected || !r.all_match() {
                    code = code.max(FAIL);
                }
            }
            Err(Failure(c, m)) => {
                eprintln!("{m}");
                code = code.max(c);
            }
        }
    }
    code
}

fn eval(file: &Path, name: &str, opts: &Options) -> Result<u8, Failure> {
    let label = file.display().to_string();
    let src = read(file)?;
    let sf = pipeline::parse_source(&src, opts).map_err(|e| Failure(USAGE, format!("{label}:{e}")))?;
    let idx = sf
        .decls
        .iter()
        .position(|d| d.name == name)
        .ok_or_else(|| Failure(USAGE, format!("{label}: no declaration named {name}")))?;
    let out = pipeline::check_decl(&sf, idx, opts);
    if out.verdict != Verdict::Ok {
        diagnose(&FileReport { file: label, mode: sf.mode, decls: vec![out] });
        return Ok(FAIL);
    }
    let mut p = Printer::new(sf.mode);
    match &sf.decls[idx].body {
        DeclBody::Ctx(c) => out!("{name} = {}", p.dom_ctx(c)),
        DeclBody::Term { ty, body } => {
            let ck = checker_for(&sf, idx, opts.fuel);
            let nf = ck.nf_comp(&[], body, ty).map_err(|e| Failure(FAIL, format!("{label}: {name}: {e}")))?;
            out!("{name} = {}", p.comp_term(&nf));
        }
    }
    if matches!(out.expect, Expect::Eval(_)) && !out.matches {
        eprintln!("{label}:{}: {name}: normal form differs from the expected value", out.span);
        return Ok(FAIL);
    }
    Ok(OK)
}

fn translate(file: &Path, target: Target, trace: bool, only: Option<&str>, opts: &Options) -> Result<u8, Failure> {
    let label = file.display().to_string();
    let src = read(file)?;
    let sf = pipeline::parse_source(&src, opts).map_err(|e| Failure(USAGE, format!("{label}:{e}")))?;
    if let Some(n) = only {
        if sf.decl(n).is_none() {
            return Err(Failure(USAGE, format!("{label}: no declaration named {n}")));
        }
    }
    let mut code = OK;
    for (i, d) in sf.decls.iter().enumerate() {
        if only.is_some_and(|n| n != d.name) || matches!(d.body, DeclBody::Ctx(_)) {
            continue;
        }
        let Some(t) = pipeline::translate_decl(&sf, i, target, opts, trace) else {
            eprintln!("{label}:{}: {}: rejected by the source checker", d.span, d.name);
            code = FAIL;
            continue;
        };
        if let Err(e) = &t.recheck {
            eprintln!("{label}:{}: {}: {e}", d.span, t.name);
            code = FAIL;
            continue;
        }
        out!("{} : {}", t.name, t.ty);
        out!("  = {}", t.term);
        if t.idempotence > 0 {
            eprintln!("{label}:{}: {}: note: re-check used box idempotence {} times", d.span, t.name, t.idempotence);
        }
        for s in &t.trace {
            out!("    {}{}  {}", "  ".repeat(s.depth), s.case, s.source);
        }
    }
    Ok(code)
}

fn verify(catfile: &Path, seed: u64) -> Result<u8, Failure> {
    let label = catfile.display().to_string();
    let c = FiniteCategory::parse(&read(catfile)?).map_err(|e| Failure(FAIL, format!("{label}: {e}")))?;
    let r = verify_model(&c, &mut ChaCha8Rng::seed_from_u64(seed), 10, 5);
    for l in &r.lines {
        out!("{} {}", if l.holds { "ok  " } else { "FAIL" }, l.name);
    }
    Ok(if r.all_hold() { OK } else { FAIL })
}

fn corpus_files(root: &Path, out: &mut Vec<PathBuf>) -> Result<(), Failure> {
    if root.is_file() {
        out.push(root.to_path_buf());
        return Ok(());
    }
    let entries = std::fs::read_dir(root).map_err(|e| Failure(USAGE, format!("{}: {e}", root.display())))?;
    for e in entries {
        let p = e.map_err(|e| Failure(USAGE, format!("{}: {e}", root.display())))?.path();
        if p.is_dir() {
            corpus_files(&p, out)?;
        } else if p.extension().is_some_and(|x| x == "ccn") {
            out.push(p);
        }
    }
    Ok(())
}

fn report(paths: &[PathBuf], format: Format, opts: &Options) -> Result<u8, Failure> {
    let default = [PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/corpus"))];
    let roots = if paths.is_empty() { &default[..] } else { paths };
    let mut files = Vec::new();
    for r in roots {
        let mut fs = Vec::new();
        corpus_files(r, &mut fs)?;
        fs.sort();
        // labels relative to the root keep reports independent of the checkout location
        files.extend(fs.into_iter().map(|f| {
            let label =
                f.strip_prefix(r).ok().filter(|l| !l.as_os_str().is_empty()).unwrap_or(&f).display().to_string();
            (label, f)
        }));
    }
    let results: Vec<_> = files.par_iter().map(|(l, p)| run_file(l, p, opts)).collect();
    let (mut n, mut matched, mut unknown) = (0, 0, 0);
    for r in results {
        let r = r?;
        print_report(&r, format);
        n += r.decls.len();
        matched += r.decls.iter().filter(|d| d.matches).count();
        unknown += r.decls.iter().filter(|d| d.verdict == Verdict::Unknown).count();
    }
    if format == Format::Text {
        out!("{n} declarations in {} files, {matched} match their directives, {unknown} unknown", files.len());
    }
    Ok(if matched == n { OK } else { FAIL })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut opts = Options { fuel: cli.fuel, ..Options::default() };
    let res = match &cli.cmd {
        Cmd::Check { mode, format, files } => {
            opts.mode = mode.map(|m| match m {
                ModeArg::Simple => Mode::Simple,
                ModeArg::Dep => Mode::Dep,
            });
            Ok(check(files, *format, &opts))
        }
        Cmd::Eval { file, decl } => eval(file, decl, &opts),
        Cmd::Translate { target, trace, decl, file } => {
            let t = match target {
                TargetArg::Internal => Target::Internal,
                TargetArg::Fitch => Target::Fitch,
            };
            translate(file, t, *trace, decl.as_deref(), &opts)
        }
        Cmd::VerifyModel { catfile, seed } => verify(catfile, *seed),
        Cmd::Report { format, timings, paths } => {
            opts.timings = *timings;
            report(paths, *format, &opts)
        }
    };
    match res {
        Ok(c) => ExitCode::from(c),
        Err(Failure(c, m)) => {
            eprintln!("{m}");
            ExitCode::from(c)
        }
    }
}
