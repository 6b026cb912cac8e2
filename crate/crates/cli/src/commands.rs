use std::fs;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use qiit::algebra::{
    check_homomorphism, family_limit, find_section, fold as fold_into, show_hom, uniqueness_check, verify_algebra,
    AlgebraDoc, Diagram, FibredAlgebra, FibredDoc, FiniteAlgebra,
};
use qiit::eliminator::{derive_eliminator, render_eliminator, Format};
use qiit::model::{build_model, BuildOptions, ModelDump, ModelError, ModelStats, TermModel};
use qiit::props::{fibred_examples, run_props};
use qiit::{parse_signature, validate, Signature, SourceFile};

use crate::{ModelArgs, OutFormat, Status};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("documents serialise")
}

/// Parses and validates, printing diagnostics; `None` when rejected.
fn load_signature(path: &Path) -> Result<Option<Signature>> {
    let src = SourceFile::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let shown = path.display().to_string();
    let sig = match parse_signature(&src) {
        Ok(sig) => sig,
        Err(diags) => {
            for d in &diags {
                eprintln!("{}", d.render(&shown));
            }
            return Ok(None);
        }
    };
    let diags = validate(&sig);
    if !diags.is_empty() {
        for d in &diags {
            eprintln!("{}", d.render(&shown));
        }
        return Ok(None);
    }
    Ok(Some(sig))
}

fn options(args: &ModelArgs) -> BuildOptions {
    BuildOptions { depth: args.depth, budget: args.budget, seed: args.seed, threads: args.threads }
}

fn plural(n: usize, one: &str, many: &str) -> String {
    format!("{n} {}", if n == 1 { one } else { many })
}

fn stats_lines(stats: &ModelStats) -> Vec<String> {
    let mut out = Vec::new();
    for s in &stats.sorts {
        out.push(format!("{}: {}", s.sort, plural(s.classes, "class", "classes")));
        if s.by_index.iter().any(|i| !i.index.is_empty()) {
            for i in &s.by_index {
                out.push(format!("  over {}: {}", i.index.join(", "), plural(i.classes, "class", "classes")));
            }
        }
    }
    out.push(format!(
        "terms: {}, merges: {}, rounds: {}, retyped: {}",
        stats.terms, stats.merges, stats.rounds, stats.retyped
    ));
    out
}

/// Reports a model build failure; budget exhaustion maps to its own status.
fn model_failure(err: ModelError) -> Result<Status> {
    match err {
        ModelError::Invalid(diags) => {
            for d in &diags {
                eprintln!("error: {d}");
            }
            Ok(Status::Failed)
        }
        ModelError::Budget { budget, stats } => {
            eprintln!("error: term budget of {budget} exhausted");
            for line in stats_lines(&stats) {
                eprintln!("{line}");
            }
            Ok(Status::Budget)
        }
    }
}

pub fn check(paths: &[std::path::PathBuf]) -> Result<Status> {
    let mut status = Status::Ok;
    for path in paths {
        match load_signature(path)? {
            Some(_) => println!("{}: ok", path.display()),
            None => status = Status::Failed,
        }
    }
    Ok(status)
}

pub fn elaborate(path: &Path, format: OutFormat) -> Result<Status> {
    let Some(sig) = load_signature(path)? else { return Ok(Status::Failed) };
    let e = qiit::elaborate::elaborate(&sig);
    match format {
        OutFormat::Structured => println!("{}", to_json(&e)),
        OutFormat::Text => {
            println!("-- ladder");
            for st in &e.ladder.stages {
                println!("{} : {}", st.sort, st.presentation);
            }
            println!("-- constructors");
            for c in &e.constructors {
                let args: Vec<String> =
                    c.arguments.iter().map(|a| format!("({} : {}) {}", a.name, a.ty, format!("{:?}", a.shape).to_lowercase())).collect();
                let args = if args.is_empty() { "()".to_string() } else { args.join(", ") };
                let target = match &c.target {
                    qiit::elaborate::TargetDesc::Base { sort, indices } => {
                        std::iter::once(sort.clone()).chain(indices.iter().cloned()).collect::<Vec<_>>().join(" ")
                    }
                    qiit::elaborate::TargetDesc::Equality { lhs, rhs, .. } => format!("{lhs} = {rhs}"),
                };
                println!("{} : {} ; target {} ; {}", c.name, args, target, certificate_name(&c.certificate));
            }
        }
    }
    Ok(Status::Ok)
}

fn certificate_name(c: &qiit::elaborate::Certificate) -> String {
    use qiit::elaborate::Certificate::*;
    match c {
        BaseTarget => "base target".into(),
        ReindexedBaseTarget => "reindexed base target".into(),
        Equality { over } => format!("equality over {}", certificate_name(over)),
    }
}

pub fn elim(path: &Path, format: OutFormat) -> Result<Status> {
    let Some(sig) = load_signature(path)? else { return Ok(Status::Failed) };
    let spec = derive_eliminator(&sig);
    let fmt = match format {
        OutFormat::Text => Format::Text,
        OutFormat::Structured => Format::Structured,
    };
    print!("{}", render_eliminator(&spec, fmt));
    Ok(Status::Ok)
}

pub fn model(path: &Path, args: &ModelArgs, format: OutFormat, out: Option<&Path>, classes: bool) -> Result<Status> {
    let Some(sig) = load_signature(path)? else { return Ok(Status::Failed) };
    let m = match build_model(&sig, &options(args)) {
        Ok(m) => m,
        Err(e) => return model_failure(e),
    };
    let dump = m.dump();
    if let Some(out) = out {
        write(out, &to_json(&dump))?;
    }
    match format {
        OutFormat::Structured => println!("{}", to_json(&dump)),
        OutFormat::Text => {
            for line in stats_lines(&dump.stats) {
                println!("{line}");
            }
            if classes {
                print_classes(&dump);
            }
        }
    }
    Ok(Status::Ok)
}

fn print_classes(dump: &ModelDump) {
    for s in &dump.sorts {
        for ic in &s.index_classes {
            let over = if ic.index.is_empty() { String::new() } else { format!(" over {}", ic.index.join(", ")) };
            for c in &ic.classes {
                println!("{}{} #{}: {}", s.sort, over, c.id, c.members.join(" ~ "));
            }
        }
    }
}

/// Rebuilds the model a dump was written from and checks it matches.
fn load_model(path: &Path) -> Result<TermModel> {
    let dump: ModelDump =
        serde_json::from_str(&read(path)?).with_context(|| format!("{} is not a model dump", path.display()))?;
    if dump.format_version != qiit::model::MODEL_FORMAT_VERSION {
        bail!("unsupported model format version {}", dump.format_version);
    }
    let sig = qiit::parse_str(&dump.signature).map_err(|d| {
        anyhow::anyhow!("signature in {} does not parse: {}", path.display(), d.first().map(|d| d.to_string()).unwrap_or_default())
    })?;
    let budget = dump.stats.terms.max(1);
    let m = build_model(&sig, &BuildOptions { depth: dump.depth, budget, ..BuildOptions::default() })
        .map_err(|e| anyhow::anyhow!("cannot rebuild the model: {e}"))?;
    if m.dump() != dump {
        bail!("{} does not match the model of its own signature", path.display());
    }
    Ok(m)
}

fn load_algebra(path: &Path, m: &TermModel) -> Result<FiniteAlgebra> {
    let doc: AlgebraDoc =
        serde_json::from_str(&read(path)?).with_context(|| format!("{} is not an algebra document", path.display()))?;
    if let Some(text) = &doc.signature {
        let theirs = qiit::parse_str(text).map_err(|_| anyhow::anyhow!("signature in {} does not parse", path.display()))?;
        if qiit::print_signature(&theirs) != qiit::print_signature(m.signature()) {
            bail!("{} is an algebra for a different signature", path.display());
        }
    }
    doc.to_algebra(Arc::new(m.schema().clone())).with_context(|| format!("cannot decode {}", path.display()))
}

#[derive(Serialize)]
struct FoldReport {
    mapping: Vec<String>,
    violations: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    homomorphisms: Option<usize>,
}

pub fn fold(model: &Path, algebra: &Path, unique: bool, hom_budget: usize, format: OutFormat) -> Result<Status> {
    let m = load_model(model)?;
    let a = load_algebra(algebra, &m)?;
    let invalid = verify_algebra(&a);
    if !invalid.is_empty() {
        eprintln!("error: {} is not an algebra of the signature", algebra.display());
        for v in &invalid {
            eprintln!("  {v}");
        }
        return Ok(Status::Failed);
    }
    let h = match fold_into(&m, &a) {
        Ok(h) => h,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(Status::Failed);
        }
    };
    let src = FiniteAlgebra::from_model(&m);
    let violations: Vec<String> = check_homomorphism(&src, &a, &h).iter().map(|v| v.to_string()).collect();
    let homomorphisms = if unique {
        match uniqueness_check(&m, &a, hom_budget) {
            Ok(r) => Some(r.count),
            Err(e) => {
                eprintln!("error: {e}");
                return Ok(Status::Budget);
            }
        }
    } else {
        None
    };
    let report = FoldReport { mapping: show_hom(&src, &a, &h), violations, homomorphisms };
    match format {
        OutFormat::Structured => println!("{}", to_json(&report)),
        OutFormat::Text => {
            for line in &report.mapping {
                println!("{line}");
            }
            for v in &report.violations {
                println!("violation: {v}");
            }
            if let Some(n) = report.homomorphisms {
                println!("homomorphisms: {n}");
            }
        }
    }
    let ok = report.violations.is_empty() && report.homomorphisms.is_none_or(|n| n == 1);
    Ok(if ok { Status::Ok } else { Status::Failed })
}

#[derive(Serialize)]
struct SectionReport {
    motive: String,
    ok: bool,
    problems: Vec<String>,
    values: Vec<String>,
}

pub fn section(model: &Path, fibred: Option<&Path>, format: OutFormat) -> Result<Status> {
    let m = load_model(model)?;
    let cases = match fibred {
        Some(path) => {
            let doc: FibredDoc = serde_json::from_str(&read(path)?)
                .with_context(|| format!("{} is not a fibred algebra document", path.display()))?;
            vec![(path.display().to_string(), FibredAlgebra::from_doc(&FiniteAlgebra::from_model(&m), &doc))]
        }
        None => fibred_examples(&m),
    };
    let mut reports = Vec::new();
    for (name, f) in cases {
        let mut problems = Vec::new();
        let mut values = Vec::new();
        match f.and_then(|f| find_section(&m, &f).map(|s| (f, s))) {
            Err(e) => problems.push(e.to_string()),
            Ok((f, s)) => {
                problems.extend(s.check_rules(&f).iter().map(|v| v.to_string()));
                if !s.projection_is_identity(&f) {
                    problems.push("projection after section is not the identity".into());
                }
                for (sort, row) in s.values.iter().enumerate() {
                    for (class, &t) in row.iter().enumerate() {
                        values.push(format!("{} ↦ {}", m.show_class(sort, class), f.total().label(sort, t)));
                    }
                }
            }
        }
        reports.push(SectionReport { motive: name, ok: problems.is_empty(), problems, values });
    }
    match format {
        OutFormat::Structured => println!("{}", to_json(&reports)),
        OutFormat::Text => {
            for r in &reports {
                println!("motive {}: {}", r.motive, if r.ok { "section found" } else { "FAILED" });
                for p in &r.problems {
                    println!("  {p}");
                }
                for v in &r.values {
                    println!("  {v}");
                }
            }
        }
    }
    Ok(if reports.iter().all(|r| r.ok) { Status::Ok } else { Status::Failed })
}

pub fn limit(path: &Path, format: OutFormat) -> Result<Status> {
    let d: Diagram = serde_json::from_str(&read(path)?).with_context(|| format!("{} is not a diagram", path.display()))?;
    let problems = d.validate();
    if !problems.is_empty() {
        for p in &problems {
            eprintln!("error: {p}");
        }
        return Ok(Status::Failed);
    }
    let l = family_limit(&d);
    match format {
        OutFormat::Structured => println!("{}", to_json(&l)),
        OutFormat::Text => {
            println!("base: {}, total: {}", plural(l.base.len(), "element", "elements"), l.total_size());
            for (b, fib) in l.base.iter().zip(&l.fibres) {
                let name = |t: &[usize], f: &dyn Fn(usize, usize) -> String| {
                    format!("({})", t.iter().enumerate().map(|(i, &x)| f(i, x)).collect::<Vec<_>>().join(", "))
                };
                let base = name(b, &|i, x| d.objects[i].base[x].clone());
                let over: Vec<String> = fib.iter().map(|t| name(t, &|i, x| d.objects[i].fibres[b[i]][x].clone())).collect();
                println!("{base}: {}", over.join(" "));
            }
        }
    }
    Ok(Status::Ok)
}

pub fn props(path: &Path, args: &ModelArgs, format: OutFormat) -> Result<Status> {
    let Some(sig) = load_signature(path)? else { return Ok(Status::Failed) };
    let report = match run_props(&sig, &options(args)) {
        Ok(r) => r,
        Err(e) => return model_failure(e),
    };
    match format {
        OutFormat::Structured => println!("{}", to_json(&report)),
        OutFormat::Text => {
            for r in &report.results {
                let mark = if r.passed { "PASS" } else { "FAIL" };
                if r.detail.is_empty() {
                    println!("{mark} {}", r.name);
                } else {
                    println!("{mark} {} ({})", r.name, r.detail);
                }
            }
            println!("{} passed, {} failed", report.passed, report.failed);
        }
    }
    Ok(if report.all_passed() { Status::Ok } else { Status::Failed })
}
