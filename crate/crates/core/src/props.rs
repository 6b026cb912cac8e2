//! The built-in property suite behind `qiit props`.
//!
//! Every property is checked on finite instances: the signature itself,
//! its prefixes, the term model at the requested depth, and the bundled
//! algebras and fibred algebras that belong to the signature.

use serde::{Deserialize, Serialize};

use crate::algebra::{
    check_homomorphism, find_section, fold, product, terminal, total_algebra, uniqueness_check, verify_algebra,
    FibredAlgebra, FibredError, FiniteAlgebra, TotalElem,
};
use crate::bundled;
use crate::elaborate::elaborate;
use crate::eliminator::{derive_eliminator, parse_structured, render_eliminator, Format};
use crate::model::{build_model, BuildOptions, MergeReason, ModelError, TermModel};
use crate::parser::{parse_str, print_signature};
use crate::schema::Value;
use crate::{validate, Signature};

pub const PROPS_FORMAT_VERSION: u32 = 1;

/// Search budget for homomorphism enumeration inside the suite.
pub const PROPS_HOM_BUDGET: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropResult {
    pub name: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropReport {
    pub format_version: u32,
    pub depth: usize,
    pub passed: usize,
    pub failed: usize,
    pub results: Vec<PropResult>,
}

impl PropReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

struct Suite {
    results: Vec<PropResult>,
}

impl Suite {
    fn record(&mut self, name: impl Into<String>, problems: Vec<String>) {
        let passed = problems.is_empty();
        let detail = problems.into_iter().take(5).collect::<Vec<_>>().join("; ");
        self.results.push(PropResult { name: name.into(), passed, detail });
    }
}

/// Runs every applicable property. Fails only when the signature is
/// rejected or the term model exceeds its budget.
pub fn run_props(sig: &Signature, opts: &BuildOptions) -> Result<PropReport, ModelError> {
    let diags = validate(sig);
    if !diags.is_empty() {
        return Err(ModelError::Invalid(diags));
    }
    let mut suite = Suite { results: Vec::new() };
    signature_props(sig, &mut suite);
    let m = build_model(sig, opts)?;
    model_props(sig, &m, opts, &mut suite)?;
    algebra_props(&m, &mut suite);
    section_props(&m, &mut suite);
    let failed = suite.results.iter().filter(|r| !r.passed).count();
    Ok(PropReport {
        format_version: PROPS_FORMAT_VERSION,
        depth: opts.depth,
        passed: suite.results.len() - failed,
        failed,
        results: suite.results,
    })
}

fn signature_props(sig: &Signature, suite: &mut Suite) {
    let first = validate(sig);
    suite.record("validate is deterministic", if validate(sig) == first { vec![] } else { vec!["diagnostics differ".into()] });

    let printed = print_signature(sig);
    let round = match parse_str(&printed) {
        Ok(back) if back == *sig => vec![],
        Ok(_) => vec!["re-parsed signature differs".into()],
        Err(d) => d.iter().map(|d| d.message.clone()).collect(),
    };
    suite.record("print then parse is the identity", round);

    let full = elaborate(sig);
    let elim = derive_eliminator(sig);
    let (mut scope, mut elab, mut elim_prefix) = (Vec::new(), Vec::new(), Vec::new());
    for k in 0..=sig.decls.len() {
        let Ok(prefix) = sig.scope_of(k) else {
            scope.push(format!("prefix {k} out of range"));
            continue;
        };
        if !validate(&prefix).is_empty() {
            scope.push(format!("prefix {k} does not validate"));
            continue;
        }
        if elaborate(&prefix) != full.prefix(k) {
            elab.push(format!("prefix {k}"));
        }
        let e = derive_eliminator(&prefix);
        let motives_ok = elim.motives.starts_with(&e.motives);
        let methods_ok = elim.methods.starts_with(&e.methods);
        if !motives_ok || !methods_ok {
            elim_prefix.push(format!("prefix {k}"));
        }
    }
    suite.record("every prefix validates", scope);
    suite.record("elaboration is stable under prefix", elab);
    suite.record("eliminator is stable under prefix", elim_prefix);
    suite.record(
        "every constructor carries a consistent certificate",
        full.constructors.iter().filter(|c| !c.certificate_consistent()).map(|c| c.name.clone()).collect(),
    );
    let structured = render_eliminator(&elim, Format::Structured);
    let back = match parse_structured(&structured) {
        Ok(e) if e == elim => vec![],
        Ok(_) => vec!["re-parsed eliminator differs".into()],
        Err(e) => vec![e.to_string()],
    };
    suite.record("structured eliminator round-trips", back);
}

fn model_props(sig: &Signature, m: &TermModel, opts: &BuildOptions, suite: &mut Suite) -> Result<(), ModelError> {
    suite.record("model invariants hold", m.check_invariants());

    let mut traced = Vec::new();
    for merge in m.merges() {
        let (l, r) = (m.class_of_term(merge.left), m.class_of_term(merge.right));
        if m.term_sort(merge.left) != m.term_sort(merge.right) || l != r {
            traced.push(format!("{} and {}", m.show_term(merge.left), m.show_term(merge.right)));
        }
        if let MergeReason::Path { path, .. } = &merge.reason {
            if *path >= m.schema().paths.len() {
                traced.push(format!("unknown path {path}"));
            }
        }
    }
    suite.record("every merge is traceable and respected", traced);

    let other = BuildOptions { seed: Some(opts.seed.unwrap_or(0).wrapping_add(0x9e37)), threads: Some(2), ..opts.clone() };
    let again = build_model(sig, &other)?;
    let same = serde_json::to_string(&m.dump()).ok() == serde_json::to_string(&again.dump()).ok();
    suite.record(
        "model is independent of seed and parallelism",
        if same { vec![] } else { vec!["dumps differ".into()] },
    );

    if opts.depth > 0 {
        let smaller = build_model(sig, &BuildOptions { depth: opts.depth - 1, ..opts.clone() })?;
        suite.record(format!("classes at depth {} embed into depth {}", opts.depth - 1, opts.depth), embeds(&smaller, m));
    }
    Ok(())
}

/// Checks that every class of `small` maps to a single class of `big`.
fn embeds(small: &TermModel, big: &TermModel) -> Vec<String> {
    let mut out = Vec::new();
    for s in 0..small.schema().sorts.len() {
        for (c, class) in small.classes(s).iter().enumerate() {
            let images: Vec<Option<Value>> = class.members.iter().map(|&t| big.class_of(&small.term_expr(t)).ok()).collect();
            if images.iter().any(Option::is_none) || images.windows(2).any(|w| w[0] != w[1]) {
                out.push(small.show_class(s, c));
            }
        }
    }
    out
}

/// Bundled algebras written for this signature, plus the terminal one.
pub fn algebras_for(m: &TermModel) -> Vec<(String, FiniteAlgebra, bool)> {
    let text = print_signature(m.signature());
    let mut out: Vec<(String, FiniteAlgebra, bool)> = bundled::ALGEBRAS
        .iter()
        .filter(|a| print_signature(&bundled::load(a.signature)) == text)
        .map(|a| (a.name.to_string(), a.load(), a.valid))
        .collect();
    out.push(("terminal".into(), terminal(FiniteAlgebra::from_model(m).schema_arc().clone()), true));
    out
}

fn algebra_props(m: &TermModel, suite: &mut Suite) {
    let algebras = algebras_for(m);
    let model_alg = FiniteAlgebra::from_model(m);
    for (name, a, valid) in &algebras {
        if !valid {
            suite.record(
                format!("invalid algebra {name} is rejected"),
                if verify_algebra(a).is_empty() { vec!["verify_algebra found nothing".into()] } else { vec![] },
            );
            continue;
        }
        suite.record(format!("{name} satisfies its equations"), verify_algebra(a).iter().map(|v| v.to_string()).collect());
        let h = match fold(m, a) {
            Ok(h) => h,
            Err(e) => {
                suite.record(format!("fold into {name} is well defined"), vec![e.to_string()]);
                continue;
            }
        };
        suite.record(
            format!("fold into {name} is a homomorphism"),
            check_homomorphism(&model_alg, a, &h).iter().map(|v| v.to_string()).collect(),
        );
        for path in &m.schema().paths {
            let mut bad = Vec::new();
            for args in m.schema().fillings(&path.args, m) {
                let mapped: Vec<Value> = args.iter().map(|v| h.map_value(v)).collect();
                let l = m.schema().eval(&path.lhs, &mapped, a);
                let r = m.schema().eval(&path.rhs, &mapped, a);
                if l.is_none() || l != r {
                    bad.push(path.args.iter().zip(&args).map(|(q, v)| m.show_value(&q.ty, v)).collect::<Vec<_>>().join(" "));
                }
            }
            suite.record(format!("fold forces {} endpoints equal in {name}", path.name), bad);
        }
        let unique = match uniqueness_check(m, a, PROPS_HOM_BUDGET) {
            Ok(r) if r.unique() => vec![],
            Ok(r) => vec![format!("{} homomorphisms", r.count)],
            Err(e) => vec![e.to_string()],
        };
        suite.record(format!("exactly one homomorphism into {name}"), unique);
    }
    let valid: Vec<&(String, FiniteAlgebra, bool)> = algebras.iter().filter(|x| x.2).collect();
    for (i, (na, a, _)) in valid.iter().enumerate() {
        for (nb, b, _) in valid.iter().skip(i + 1) {
            let p = product(a, b);
            let mut problems: Vec<String> = verify_algebra(&p.algebra).iter().map(|v| v.to_string()).collect();
            problems.extend(check_homomorphism(&p.algebra, a, &p.left).iter().map(|v| v.to_string()));
            problems.extend(check_homomorphism(&p.algebra, b, &p.right).iter().map(|v| v.to_string()));
            for s in 0..p.algebra.schema().sorts.len() {
                let mut pairs: Vec<(usize, usize)> = (0..p.algebra.size(s)).map(|x| (p.left.maps[s][x], p.right.maps[s][x])).collect();
                pairs.sort();
                pairs.dedup();
                if pairs.len() != p.algebra.size(s) {
                    problems.push("projections identify distinct elements".into());
                }
            }
            match uniqueness_check(m, &p.algebra, PROPS_HOM_BUDGET) {
                Ok(r) if r.unique() => {}
                Ok(r) => problems.push(format!("{} homomorphisms into the product", r.count)),
                Err(e) => problems.push(e.to_string()),
            }
            suite.record(format!("product {na} x {nb} is a product"), problems);
        }
    }
}

/// The fibred algebras exercised over a model: the unit motive, each valid
/// algebra as a constant family, and a few signature-specific motives.
pub fn fibred_examples(m: &TermModel) -> Vec<(String, Result<FibredAlgebra, FibredError>)> {
    let base = FiniteAlgebra::from_model(m);
    let mut out = vec![("unit".to_string(), FibredAlgebra::constant_unit(&base))];
    for (name, a, valid) in algebras_for(m) {
        if valid {
            let p = product(&base, &a);
            out.push((format!("constant {name}"), FibredAlgebra::fibres_of(&base, &p.algebra, &p.left)));
        }
    }
    let text = print_signature(m.signature());
    let q_of = |elems: &[Vec<TotalElem>], v: &Value| match v {
        Value::Elem { sort, id } => elems[*sort as usize][*id as usize].q,
        _ => 0,
    };
    if text == print_signature(&bundled::nat()) {
        out.push((
            "parity".into(),
            FibredAlgebra::build(&base, &|_, _, _, _| vec!["even".into(), "odd".into()], &|p, args, elems| {
                if p == 0 {
                    0
                } else {
                    1 - q_of(elems, &args[0])
                }
            }),
        ));
    }
    if text == print_signature(&bundled::trees2()) {
        const CAP: usize = 2;
        out.push((
            format!("height capped at {CAP}"),
            FibredAlgebra::build(&base, &|_, _, _, _| (0..=CAP).map(|k| k.to_string()).collect(), &|p, args, elems| {
                match (p, args) {
                    (1, [Value::Table(vs)]) => {
                        (1 + vs.iter().map(|v| q_of(elems, v)).max().unwrap_or(0)).min(CAP)
                    }
                    _ => 0,
                }
            }),
        ));
    }
    out
}

fn section_props(m: &TermModel, suite: &mut Suite) {
    for (name, f) in fibred_examples(m) {
        let mut problems = Vec::new();
        match f {
            Err(e) => problems.push(e.to_string()),
            Ok(f) => {
                problems.extend(f.coherence().iter().map(|v| v.to_string()));
                if let Err(e) = total_algebra(&f) {
                    problems.push(e.to_string());
                }
                match find_section(m, &f) {
                    Err(e) => problems.push(e.to_string()),
                    Ok(s) => {
                        problems.extend(s.check_rules(&f).iter().map(|v| v.to_string()));
                        if !s.projection_is_identity(&f) {
                            problems.push("projection after section is not the identity".into());
                        }
                    }
                }
            }
        }
        suite.record(format!("section exists for motive {name}"), problems);
    }
}
