//! Acceptance suite: one PASS/FAIL line per criterion, with timings.
//!
//! Run with `cargo test -p qiit-core --test acceptance -- --nocapture`.
//! The test fails when the set of failing criteria differs from
//! `EXPECTED_FAILURES`, the criteria known to be unattainable as stated.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use common::{canon, con_ty_oracle, enumerate, CtOracle};

use qiit::algebra::{
    check_homomorphism, enumerate_homs, equaliser, family_limit, find_section, fold, product, show_hom,
    uniqueness_check, verify_algebra, Diagram, FiniteAlgebra, FoldError, Homomorphism, LimitFamily,
};
use qiit::bundled;
use qiit::eliminator::{derive_eliminator, render_eliminator, Format};
use qiit::model::{build_model, BuildOptions, TermError, TermModel};
use qiit::props::{algebras_for, fibred_examples, run_props, PROPS_HOM_BUDGET};
use qiit::{parse_str, Signature};

/// Criteria that cannot pass as written; see the detail line for why.
const EXPECTED_FAILURES: &[u32] = &[4];

/// Bundled signatures with the depth their model is built at.
const MODELS: &[(&str, &str, usize)] = &[
    ("nat", bundled::NAT, 6),
    ("trees2", bundled::TREES2, 3),
    ("interval", bundled::INTERVAL, 3),
    ("con_ty", bundled::CON_TY, 6),
    ("comm", bundled::COMM, 3),
    ("vec", bundled::VEC, 2),
];

/// Largest total carrier used as a test object for universal properties.
const PROBE_SIZE: usize = 6;

struct Outcome {
    pass: bool,
    detail: String,
    witnesses: Vec<String>,
}

fn ok(detail: impl Into<String>) -> Outcome {
    Outcome { pass: true, detail: detail.into(), witnesses: Vec::new() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { pass: false, detail: detail.into(), witnesses: Vec::new() }
}

fn model(text: &str, depth: usize) -> TermModel {
    build_model(&bundled::load(text), &BuildOptions::depth(depth)).expect("bundled model builds")
}

fn total_size(a: &FiniteAlgebra) -> usize {
    (0..a.schema().sorts.len()).map(|s| a.size(s)).sum()
}

fn interval_collapses() -> Outcome {
    let m = model(bundled::INTERVAL, 1);
    match m.class_count(0) {
        1 => ok(format!("1 class, {} merge", m.merges().len())),
        n => fail(format!("{n} classes")),
    }
}

fn naturals_are_free() -> Outcome {
    for d in 0..=6 {
        let m = model(bundled::NAT, d);
        if m.class_count(0) != d + 1 || !m.merges().is_empty() {
            return fail(format!("depth {d}: {} classes, {} merges", m.class_count(0), m.merges().len()));
        }
    }
    ok("depths 0..6 give d+1 classes, 0 merges")
}

fn trees_match_oracle() -> Outcome {
    let mut got = Vec::new();
    for d in [1, 2] {
        let oracle: BTreeSet<_> = enumerate(&[0, 2], d).iter().map(canon).collect();
        let classes = model(bundled::TREES2, d).class_count(0);
        if classes != oracle.len() {
            return fail(format!("depth {d}: model {classes}, oracle {}", oracle.len()));
        }
        got.push(classes);
    }
    ok(format!(
        "depth 1: {}, depth 2: {} (model = oracle; the listed 5 counts ordered trees)",
        got[0], got[1]
    ))
}

fn sigma_eq_fires() -> Outcome {
    let sig = bundled::con_ty();
    let lhs = "ext (ext eps (iota eps)) (iota (ext eps (iota eps)))";
    let rhs = "ext eps (sigma eps (iota eps) (iota (ext eps (iota eps))))";
    let side = |m: &TermModel, t: &str| m.class_of(&qiit::parser::parse_term(&sig, t).expect("term parses"));
    // As stated: depth 3.
    let m3 = model(bundled::CON_TY, 3);
    let at3 = match (side(&m3, lhs), side(&m3, rhs)) {
        (Ok(a), Ok(b)) if a == b && !m3.retyped().is_empty() => None,
        (Err(TermError::OverDepth { height: h1, .. }), Err(TermError::OverDepth { height: h2, .. })) => {
            Some(format!("depth 3: sides have heights {h1} and {h2}, outside the model"))
        }
        (l, r) => Some(format!("depth 3: sides {l:?} and {r:?}, retyped {}", m3.retyped().len())),
    };
    // The smallest depth at which the merge and the retyping both happen.
    let m = model(bundled::CON_TY, 6);
    let (l, r) = (side(&m, lhs), side(&m, rhs));
    let oracle = con_ty_oracle(6);
    let got = CtOracle { con: m.class_count(0), ty: m.class_count(1), terms: m.term_count(), retyped: m.retyped().len() };
    let at6 = format!(
        "depth 6: sides {}, retyped {}, oracle {}",
        if l.is_ok() && l == r { "merged" } else { "apart" },
        got.retyped,
        if got == oracle { "agrees" } else { "differs" }
    );
    let fine6 = l.is_ok() && l == r && got.retyped > 0 && got == oracle;
    match at3 {
        None if fine6 => ok(format!("depth 3 merged; {at6}")),
        None => fail(format!("depth 3 merged; {at6}")),
        Some(why) => fail(format!("{why}; {at6}")),
    }
}

fn hom_law() -> Outcome {
    let mut out = ok("");
    let (mut accepted, mut rejected) = (0, 0);
    for &(name, text, depth) in MODELS {
        let m = model(text, depth);
        let src = FiniteAlgebra::from_model(&m);
        for (alg, a, valid) in algebras_for(&m) {
            if !valid {
                match fold(&m, &a) {
                    Err(FoldError::Invalid(v)) if !v.is_empty() => {
                        rejected += 1;
                        out.witnesses.push(format!("{name} -> {alg} rejected: {}", v[0]));
                    }
                    other => return fail(format!("{name} -> {alg}: invalid algebra not rejected ({other:?})")),
                }
                continue;
            }
            let h = match fold(&m, &a) {
                Ok(h) => h,
                Err(e) => return fail(format!("{name} -> {alg}: {e}")),
            };
            let v = check_homomorphism(&src, &a, &h);
            if !v.is_empty() {
                return fail(format!("{name} -> {alg}: fold rejected at {}", v[0]));
            }
            accepted += 1;
            // Every single-point change of the fold must break the law.
            let mut first = None;
            for s in 0..src.schema().sorts.len() {
                for c in 0..src.size(s) {
                    for e in (0..a.size(s)).filter(|&e| e != h.apply(s, c)) {
                        let mut bad = h.clone();
                        bad.maps[s][c] = e;
                        let v = check_homomorphism(&src, &a, &bad);
                        if v.is_empty() {
                            let shown = show_hom(&src, &a, &bad).join("; ");
                            return fail(format!("{name} -> {alg}: altered map accepted: {shown}"));
                        }
                        rejected += 1;
                        first.get_or_insert_with(|| {
                            format!("{name} -> {alg}, {} sent to {}: {}", src.label(s, c), a.label(s, e), v[0])
                        });
                    }
                }
            }
            out.witnesses.extend(first);
        }
    }
    out.detail = format!("{accepted} folds accepted, {rejected} counterexamples rejected");
    out
}

fn initiality() -> Outcome {
    let mut pairs = 0;
    let mut slowest = Duration::ZERO;
    for &(name, text, depth) in MODELS {
        let m = model(text, depth);
        let src = FiniteAlgebra::from_model(&m);
        for (alg, a, valid) in algebras_for(&m) {
            if !valid {
                continue;
            }
            let start = Instant::now();
            let r = match uniqueness_check(&m, &a, PROPS_HOM_BUDGET) {
                Ok(r) => r,
                Err(e) => return fail(format!("{name} -> {alg}: {e}")),
            };
            if !r.unique() || !r.equalisers_whole.iter().all(|&w| w) {
                return fail(format!("{name} -> {alg}: {} homomorphisms", r.count));
            }
            let h = &r.homs[0];
            let e = equaliser(&src, &a, h, h);
            if total_size(&e.algebra) != total_size(&src) {
                return fail(format!("{name} -> {alg}: equaliser is not the whole model"));
            }
            let took = start.elapsed();
            slowest = slowest.max(took);
            if took > Duration::from_secs(30) {
                return fail(format!("{name} -> {alg}: took {took:?}"));
            }
            pairs += 1;
        }
    }
    ok(format!("{pairs} pairs, exactly 1 homomorphism each, slowest {slowest:.1?}"))
}

fn sections() -> Outcome {
    let mut found = 0;
    for &(name, text, depth) in MODELS {
        let m = model(text, depth);
        for (motive, f) in fibred_examples(&m) {
            let f = match f {
                Ok(f) => f,
                Err(e) => return fail(format!("{name} / {motive}: {e}")),
            };
            let s = match find_section(&m, &f) {
                Ok(s) => s,
                Err(e) => return fail(format!("{name} / {motive}: {e}")),
            };
            if let Some(v) = s.check_rules(&f).first() {
                return fail(format!("{name} / {motive}: computation rule fails at {v}"));
            }
            if !s.projection_is_identity(&f) {
                return fail(format!("{name} / {motive}: projection after section is not the identity"));
            }
            found += 1;
        }
    }
    ok(format!("{found} sections found, all computation rules hold"))
}

/// Homomorphisms between two algebras, or a failure message.
fn homs(x: &FiniteAlgebra, y: &FiniteAlgebra) -> Result<Vec<Homomorphism>, String> {
    enumerate_homs(x, y, PROPS_HOM_BUDGET).map_err(|e| e.to_string())
}

fn completeness() -> Outcome {
    let (mut products, mut equalisers, mut probes) = (0, 0, 0);
    let mut check = || -> Result<(), String> {
        for &(name, text, depth) in MODELS {
            let m = model(text, depth);
            let valid: Vec<(String, FiniteAlgebra)> =
                algebras_for(&m).into_iter().filter(|(_, _, v)| *v).map(|(n, a, _)| (n, a)).collect();
            let mut objects: Vec<FiniteAlgebra> = valid.iter().map(|(_, a)| a.clone()).collect();
            objects.push(FiniteAlgebra::from_model(&m));
            let objects: Vec<FiniteAlgebra> = objects.into_iter().filter(|x| total_size(x) <= PROBE_SIZE).collect();
            probes += objects.len();
            for (an, a) in &valid {
                for (bn, b) in &valid {
                    let p = product(a, b);
                    if let Some(v) = verify_algebra(&p.algebra).first() {
                        return Err(format!("{name}: {an} x {bn} fails at {v}"));
                    }
                    products += 1;
                    for x in &objects {
                        let into_p = homs(x, &p.algebra)?;
                        let pairs: BTreeSet<_> =
                            into_p.iter().map(|k| (k.then(&p.left).maps, k.then(&p.right).maps)).collect();
                        let (ha, hb) = (homs(x, a)?, homs(x, b)?);
                        if pairs.len() != into_p.len() || into_p.len() != ha.len() * hb.len() {
                            return Err(format!(
                                "{name}: {an} x {bn} has {} maps from a probe, expected {} x {}",
                                into_p.len(),
                                ha.len(),
                                hb.len()
                            ));
                        }
                    }
                    let parallel = homs(a, b)?;
                    for f in &parallel {
                        for g in &parallel {
                            let e = equaliser(a, b, f, g);
                            if let Some(v) = verify_algebra(&e.algebra).first().or(e.closure_violations.first()) {
                                return Err(format!("{name}: equaliser over {an} -> {bn} fails at {v}"));
                            }
                            equalisers += 1;
                            for x in &objects {
                                let through: BTreeSet<_> =
                                    homs(x, &e.algebra)?.iter().map(|k| k.then(&e.inclusion).maps).collect();
                                let agreeing: BTreeSet<_> = homs(x, a)?
                                    .into_iter()
                                    .filter(|h| h.then(f) == h.then(g))
                                    .map(|h| h.maps)
                                    .collect();
                                if through != agreeing {
                                    return Err(format!("{name}: equaliser over {an} -> {bn} misses a map"));
                                }
                            }
                        }
                    }
                }
            }
        }
        for (dn, _) in bundled::DIAGRAMS {
            let d = bundled::diagram(dn);
            if family_limit(&d) != direct_limit(&d) {
                return Err(format!("diagram {dn}: family limit differs from direct enumeration"));
            }
        }
        Ok(())
    };
    match check() {
        Ok(()) => ok(format!(
            "{products} products, {equalisers} equalisers verified against {probes} probes; {} diagrams agree",
            bundled::DIAGRAMS.len()
        )),
        Err(e) => fail(e),
    }
}

/// The limit computed on whole sets: cones of base elements, and cones of
/// total-space elements grouped by their base cone. No pruning.
fn direct_limit(d: &Diagram) -> LimitFamily {
    fn tuples(sizes: &[usize]) -> Vec<Vec<usize>> {
        sizes.iter().fold(vec![Vec::new()], |acc, &n| {
            acc.into_iter().flat_map(|t| (0..n).map(move |x| [t.clone(), vec![x]].concat())).collect()
        })
    }
    let bases: Vec<usize> = d.objects.iter().map(|o| o.base.len()).collect();
    let base: Vec<Vec<usize>> =
        tuples(&bases).into_iter().filter(|t| d.arrows.iter().all(|a| a.base[t[a.source]] == t[a.target])).collect();
    let totals: Vec<Vec<(usize, usize)>> = d
        .objects
        .iter()
        .map(|o| (0..o.base.len()).flat_map(|b| (0..o.fibres[b].len()).map(move |x| (b, x))).collect())
        .collect();
    let mut grouped: BTreeMap<Vec<usize>, Vec<Vec<usize>>> = base.iter().map(|b| (b.clone(), Vec::new())).collect();
    for t in tuples(&totals.iter().map(Vec::len).collect::<Vec<_>>()) {
        let elems: Vec<(usize, usize)> = t.iter().enumerate().map(|(i, &k)| totals[i][k]).collect();
        let cone = d.arrows.iter().all(|a| {
            let (b, x) = elems[a.source];
            (a.base[b], a.fibres[b][x]) == elems[a.target]
        });
        if cone {
            let b: Vec<usize> = elems.iter().map(|e| e.0).collect();
            grouped.get_mut(&b).expect("base of a cone is a cone").push(elems.iter().map(|e| e.1).collect());
        }
    }
    let fibres = base.iter().map(|b| grouped[b].clone()).collect();
    LimitFamily { base, fibres }
}

fn golden_eliminators() -> Outcome {
    let shapes: &[(&str, &str, &[&str])] = &[
        ("trees2", bundled::TREES2, &["m_leaf : Q(leaf)", "m_node : ", "m_mix : ", "=[ap Q (mix f s)]"]),
        ("con_ty", bundled::CON_TY, &["m_ext : ", "m_sigma : ", "m_sigma_eq : ", "=[ap Q (sigma_eq G A B)]"]),
        ("nat", bundled::NAT, &["m_zero : Q(zero)", "m_suc : "]),
        ("interval", bundled::INTERVAL, &["m_l : Q(l)", "m_r : Q(r)", "m_seg : m_l =[ap Q seg] m_r"]),
    ];
    for (name, text, must) in shapes {
        let got = render_eliminator(&derive_eliminator(&bundled::load(text)), Format::Text);
        let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.elim"));
        let want = match std::fs::read_to_string(&path) {
            Ok(w) => w,
            Err(e) => return fail(format!("{}: {e}", path.display())),
        };
        if got != want {
            return fail(format!("{name} differs from {}", path.display()));
        }
        if let Some(s) = must.iter().find(|s| !got.contains(*s)) {
            return fail(format!("{name} lacks `{s}`"));
        }
    }
    ok(format!("{} files match", shapes.len()))
}

/// Structured outputs of the whole suite under one seed and thread count.
fn structured_suite(seed: u64, threads: usize) -> String {
    let opts = |depth| BuildOptions { seed: Some(seed), threads: Some(threads), ..BuildOptions::depth(depth) };
    let mut out = String::new();
    for &(name, text, depth) in MODELS {
        let sig: Signature = parse_str(text).expect("bundled signature");
        let m = build_model(&sig, &opts(depth)).expect("bundled model builds");
        out += &format!("== {name}\n");
        out += &render_eliminator(&derive_eliminator(&sig), Format::Structured);
        out += &serde_json::to_string(&m.dump()).expect("serialisable");
        out += &serde_json::to_string(&run_props(&sig, &opts(depth)).expect("props run")).expect("serialisable");
        for (alg, a, valid) in algebras_for(&m) {
            if valid {
                let r = uniqueness_check(&m, &a, PROPS_HOM_BUDGET).expect("within budget");
                out += &format!("{alg}: {}", serde_json::to_string(&r).expect("serialisable"));
            }
        }
        for (motive, f) in fibred_examples(&m) {
            let s = f.and_then(|f| find_section(&m, &f)).map(|s| s.values).map_err(|e| e.to_string());
            out += &format!("{motive}: {}", serde_json::to_string(&s).expect("serialisable"));
        }
    }
    out
}

fn determinism() -> Outcome {
    let a = structured_suite(1, 1);
    let b = structured_suite(0x5eed_f00d, 4);
    if a == b {
        ok(format!("{} bytes identical across seeds 1 / 0x5eedf00d and 1 / 4 threads", a.len()))
    } else {
        let at = a.bytes().zip(b.bytes()).position(|(x, y)| x != y).unwrap_or(a.len().min(b.len()));
        fail(format!("outputs differ at byte {at}"))
    }
}

type Criterion = (u32, &'static str, Option<Duration>, fn() -> Outcome);

#[test]
fn acceptance() {
    let criteria: &[Criterion] = &[
        (1, "interval collapses to one class", Some(Duration::from_secs(1)), interval_collapses),
        (2, "naturals: d+1 classes, no merges", Some(Duration::from_secs(1)), naturals_are_free),
        (3, "permutable trees match the canonical-form oracle", Some(Duration::from_secs(5)), trees_match_oracle),
        (4, "Con/Ty sigma_eq merge at depth 3", Some(Duration::from_secs(30)), sigma_eq_fires),
        (5, "homomorphism law accepts folds, rejects counterexamples", None, hom_law),
        (6, "initiality on bundled pairs", None, initiality),
        (7, "sections of bundled fibred algebras", None, sections),
        (8, "products, equalisers and family limits", None, completeness),
        (9, "eliminator golden files", None, golden_eliminators),
        (10, "determinism across seeds and threads", None, determinism),
    ];
    let mut failed = Vec::new();
    for &(n, name, limit, run) in criteria {
        let start = Instant::now();
        let mut o = run();
        let took = start.elapsed();
        if let Some(limit) = limit {
            if took > limit {
                o.pass = false;
                o.detail += &format!("; over the {limit:?} limit");
            }
        }
        println!("{} [{n}] {name}: {} ({took:.2?})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        for w in &o.witnesses {
            println!("    witness: {w}");
        }
        if !o.pass {
            failed.push(n);
        }
    }
    assert_eq!(failed, EXPECTED_FAILURES, "failing criteria differ from the expected set");
}
