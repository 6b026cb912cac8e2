//! Elimination principles derived from signatures.
//!
//! Naming scheme, which the golden files rely on:
//!
//! * motives are `Q`, `R`, `S`, `U`, `V`, `W` in sort order (then `Q_<Sort>`);
//!   the motive of a sort takes its indices, the element, and one
//!   hypothesis per sort-valued index, in that order;
//! * the method of constructor `c` is `m_c`;
//! * the inductive hypothesis for argument `v` is `v_ih` and comes right
//!   after `v`; function arguments get a pointwise hypothesis whose binder
//!   is the declared one, or the lowercased domain name;
//! * a section is `h` when there is one sort, otherwise `h_<Sort>`;
//! * a binder is printed only when something later in the type refers
//!   to it.

use serde::{Deserialize, Serialize};

use crate::syntax::{Decl, Entry, IndexExpr, ParamType, PathDecl, PointDecl, Signature, SortRef};

pub const ELIMINATOR_FORMAT_VERSION: u32 = 1;

/// Terms appearing in eliminator types.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "term", rename_all = "snake_case")]
pub enum ETerm {
    Var { name: String },
    Atom { set: String, elem: String },
    /// Curried application of a constructor, method or path.
    App { head: String, args: Vec<ETerm> },
    /// A motive or section applied to its arguments, written `Q(x, y)`.
    Call { head: String, args: Vec<ETerm> },
    At { fun: Box<ETerm>, arg: Box<ETerm> },
    Compose { fun: Box<ETerm>, perm: Box<ETerm> },
    Table { domain: String, entries: Vec<(String, ETerm)> },
    Lam { binder: String, body: Box<ETerm> },
    /// A section post-composed with a function argument, `h ∘ f`.
    Post { section: String, fun: Box<ETerm> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EType {
    Set,
    External { set: String },
    Perm { set: String },
    Sort { sort: String, indices: Vec<ETerm> },
    Family { term: ETerm },
    Pi { binder: Option<String>, domain: Box<EType>, codomain: Box<EType> },
    /// `lhs =[ap family path] rhs`.
    PathOver { family: ETerm, path: ETerm, lhs: ETerm, rhs: ETerm },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Motive {
    pub sort: String,
    pub name: String,
    pub ty: EType,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    Point,
    Path,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Method {
    pub constructor: String,
    pub kind: MethodKind,
    pub name: String,
    pub ty: EType,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionDecl {
    pub sort: String,
    pub name: String,
    pub ty: EType,
}

/// `lhs = rhs` for all values of `binders`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComputationRule {
    pub constructor: String,
    pub binders: Vec<String>,
    pub lhs: ETerm,
    pub rhs: ETerm,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EliminatorSpec {
    pub format_version: u32,
    pub motives: Vec<Motive>,
    pub methods: Vec<Method>,
    pub sections: Vec<SectionDecl>,
    pub rules: Vec<ComputationRule>,
}

const MOTIVE_NAMES: [&str; 6] = ["Q", "R", "S", "U", "V", "W"];

struct Names<'a> {
    sig: &'a Signature,
    sorts: Vec<&'a str>,
}

impl<'a> Names<'a> {
    fn new(sig: &'a Signature) -> Self {
        Names { sig, sorts: sig.sorts().map(|s| s.name.as_str()).collect() }
    }

    fn motive(&self, sort: &str) -> String {
        let i = self.sorts.iter().position(|s| *s == sort).expect("declared sort");
        match MOTIVE_NAMES.get(i) {
            Some(n) if self.sorts.len() <= MOTIVE_NAMES.len() => n.to_string(),
            _ => format!("Q_{sort}"),
        }
    }

    fn section(&self, sort: &str) -> String {
        if self.sorts.len() == 1 {
            "h".into()
        } else {
            format!("h_{sort}")
        }
    }

    fn indices(&self, sort: &str) -> &'a [Entry] {
        &self.sig.sort(sort).expect("declared sort").indices
    }

    fn point_args(&self, ctor: &str) -> &'a [Entry] {
        &self.sig.point(ctor).expect("declared point").args
    }
}

fn method_name(ctor: &str) -> String {
    format!("m_{ctor}")
}

fn ih_name(v: &str) -> String {
    format!("{v}_ih")
}

fn fresh(base: &str, taken: &[String]) -> String {
    let mut name = base.to_string();
    while taken.contains(&name) {
        name.push('\'');
    }
    name
}

fn var(name: impl Into<String>) -> ETerm {
    ETerm::Var { name: name.into() }
}

fn pi(binder: impl Into<String>, domain: EType, codomain: EType) -> EType {
    EType::Pi { binder: Some(binder.into()), domain: Box::new(domain), codomain: Box::new(codomain) }
}

/// The surface term as an eliminator term.
fn plain(sig: &Signature, e: &IndexExpr) -> ETerm {
    match e {
        IndexExpr::Var { name } => var(name),
        IndexExpr::Atom { set, elem } => ETerm::Atom { set: set.clone(), elem: elem.clone() },
        IndexExpr::Apply { ctor, args } => {
            ETerm::App { head: ctor.clone(), args: args.iter().map(|a| plain(sig, a)).collect() }
        }
        IndexExpr::Table { domain, entries } => ETerm::Table {
            domain: domain.clone(),
            entries: labelled(sig, domain, entries.iter().map(|x| plain(sig, x))),
        },
        IndexExpr::At { fun, arg } => ETerm::At { fun: Box::new(plain(sig, fun)), arg: Box::new(plain(sig, arg)) },
        IndexExpr::Compose { fun, perm } => {
            ETerm::Compose { fun: Box::new(plain(sig, fun)), perm: Box::new(plain(sig, perm)) }
        }
    }
}

fn labelled(sig: &Signature, domain: &str, values: impl Iterator<Item = ETerm>) -> Vec<(String, ETerm)> {
    let labels = sig.external(domain).map(|d| d.elements.clone()).unwrap_or_default();
    values.enumerate().map(|(k, v)| (labels.get(k).cloned().unwrap_or_else(|| format!("#{k}")), v)).collect()
}

/// The inductive hypothesis for a sort-valued (or function-valued)
/// expression, built from argument hypotheses and methods.
fn ih(n: &Names, e: &IndexExpr) -> ETerm {
    match e {
        IndexExpr::Var { name } => var(ih_name(name)),
        IndexExpr::Apply { ctor, args } => {
            ETerm::App { head: method_name(ctor), args: interleave(n, n.point_args(ctor), args, &|a| ih(n, a)) }
        }
        IndexExpr::At { fun, arg } => ETerm::At { fun: Box::new(ih(n, fun)), arg: Box::new(plain(n.sig, arg)) },
        IndexExpr::Compose { fun, perm } => {
            ETerm::Compose { fun: Box::new(ih(n, fun)), perm: Box::new(plain(n.sig, perm)) }
        }
        IndexExpr::Table { domain, entries } => ETerm::Table {
            domain: domain.clone(),
            entries: labelled(n.sig, domain, entries.iter().map(|x| ih(n, x))),
        },
        IndexExpr::Atom { .. } => unreachable!("atoms have no inductive hypothesis"),
    }
}

/// Arguments of a method call: each argument followed by its hypothesis
/// when it is sort- or function-valued.
fn interleave(n: &Names, params: &[Entry], args: &[IndexExpr], hyp: &dyn Fn(&IndexExpr) -> ETerm) -> Vec<ETerm> {
    let mut out = Vec::new();
    for (p, a) in params.iter().zip(args) {
        out.push(plain(n.sig, a));
        if matches!(p.ty, ParamType::Sort { .. } | ParamType::Function { .. }) {
            out.push(hyp(a));
        }
    }
    out
}

/// Motive application at a sort reference with element `elem`; index
/// hypotheses come from `hyp`.
fn motive_at(n: &Names, r: &SortRef, elem: ETerm, hyp: &dyn Fn(&IndexExpr) -> ETerm) -> ETerm {
    let entries = n.indices(&r.sort);
    let mut args: Vec<ETerm> = r.indices.iter().map(|e| plain(n.sig, e)).collect();
    args.push(elem);
    for (entry, e) in entries.iter().zip(&r.indices) {
        if matches!(entry.ty, ParamType::Sort { .. }) {
            args.push(hyp(e));
        }
    }
    ETerm::Call { head: n.motive(&r.sort), args }
}

fn param_type(n: &Names, ty: &ParamType, taken: &[String]) -> EType {
    match ty {
        ParamType::External { set } => EType::External { set: set.clone() },
        ParamType::Perm { set } => EType::Perm { set: set.clone() },
        ParamType::Sort { target } => sort_type(n, target),
        ParamType::Function { domain, binder, codomain } => {
            let b = binder.clone().unwrap_or_else(|| fresh(&domain.to_lowercase(), taken));
            pi(b, EType::External { set: domain.clone() }, sort_type(n, codomain))
        }
    }
}

fn sort_type(n: &Names, r: &SortRef) -> EType {
    EType::Sort { sort: r.sort.clone(), indices: r.indices.iter().map(|e| plain(n.sig, e)).collect() }
}

/// `(x : T) → (x_ih : ...) → ...` for a constructor telescope, returned
/// as (binder, domain) pairs.
fn method_telescope(n: &Names, args: &[Entry]) -> Vec<(String, EType)> {
    let taken: Vec<String> = args.iter().map(|e| e.name.clone()).collect();
    let mut out = Vec::new();
    for e in args {
        out.push((e.name.clone(), param_type(n, &e.ty, &taken)));
        let hyp = |x: &IndexExpr| ih(n, x);
        match &e.ty {
            ParamType::Sort { target } => {
                let fam = motive_at(n, target, var(&e.name), &hyp);
                out.push((fresh(&ih_name(&e.name), &taken), EType::Family { term: fam }));
            }
            ParamType::Function { domain, binder, codomain } => {
                let b = binder.clone().unwrap_or_else(|| fresh(&domain.to_lowercase(), &taken));
                let at = ETerm::At { fun: Box::new(var(&e.name)), arg: Box::new(var(&b)) };
                let fam = motive_at(n, codomain, at, &hyp);
                let ty = pi(b, EType::External { set: domain.clone() }, EType::Family { term: fam });
                out.push((fresh(&ih_name(&e.name), &taken), ty));
            }
            _ => {}
        }
    }
    out
}

fn close(tele: Vec<(String, EType)>, result: EType) -> EType {
    let ty = tele.into_iter().rev().fold(result, |acc, (b, d)| pi(b, d, acc));
    prune(ty)
}

/// Drops binders that nothing later refers to.
fn prune(ty: EType) -> EType {
    match ty {
        EType::Pi { binder, domain, codomain } => {
            let codomain = prune(*codomain);
            let domain = prune(*domain);
            let binder = binder.filter(|b| type_mentions(&codomain, b));
            EType::Pi { binder, domain: Box::new(domain), codomain: Box::new(codomain) }
        }
        other => other,
    }
}

fn type_mentions(ty: &EType, v: &str) -> bool {
    match ty {
        EType::Set | EType::External { .. } | EType::Perm { .. } => false,
        EType::Sort { indices, .. } => indices.iter().any(|t| term_mentions(t, v)),
        EType::Family { term } => term_mentions(term, v),
        EType::Pi { domain, codomain, .. } => type_mentions(domain, v) || type_mentions(codomain, v),
        EType::PathOver { family, path, lhs, rhs } => [family, path, lhs, rhs].iter().any(|t| term_mentions(t, v)),
    }
}

fn term_mentions(t: &ETerm, v: &str) -> bool {
    match t {
        ETerm::Var { name } => name == v,
        ETerm::Atom { .. } => false,
        ETerm::App { args, .. } | ETerm::Call { args, .. } => args.iter().any(|a| term_mentions(a, v)),
        ETerm::At { fun, arg } => term_mentions(fun, v) || term_mentions(arg, v),
        ETerm::Compose { fun, perm } => term_mentions(fun, v) || term_mentions(perm, v),
        ETerm::Table { entries, .. } => entries.iter().any(|(_, e)| term_mentions(e, v)),
        ETerm::Lam { binder, body } => binder != v && term_mentions(body, v),
        ETerm::Post { fun, .. } => term_mentions(fun, v),
    }
}

fn args_of(entries: &[Entry]) -> Vec<IndexExpr> {
    entries.iter().map(|e| IndexExpr::var(&e.name)).collect()
}

fn motive_decl(n: &Names, sort: &str) -> Motive {
    let indices = n.indices(sort);
    let mut taken: Vec<String> = indices.iter().map(|e| e.name.clone()).collect();
    let mut tele: Vec<(String, EType)> =
        indices.iter().map(|e| (e.name.clone(), param_type(n, &e.ty, &taken))).collect();
    let x = fresh("x", &taken);
    taken.push(x.clone());
    tele.push((x, sort_type(n, &SortRef::new(sort, args_of(indices)))));
    for e in indices {
        if let ParamType::Sort { target } = &e.ty {
            let fam = motive_at(n, target, var(&e.name), &|x| ih(n, x));
            tele.push((fresh(&ih_name(&e.name), &taken), EType::Family { term: fam }));
        }
    }
    Motive { sort: sort.into(), name: n.motive(sort), ty: close(tele, EType::Set) }
}

fn point_method(n: &Names, p: &PointDecl) -> Method {
    let tele = method_telescope(n, &p.args);
    let elem = ETerm::App { head: p.name.clone(), args: p.args.iter().map(|e| var(&e.name)).collect() };
    let result = motive_at(n, &p.target, elem, &|x| ih(n, x));
    Method {
        constructor: p.name.clone(),
        kind: MethodKind::Point,
        name: method_name(&p.name),
        ty: close(tele, EType::Family { term: result }),
    }
}

fn path_method(n: &Names, p: &PathDecl) -> Method {
    let mut taken: Vec<String> = p.args.iter().map(|e| e.name.clone()).collect();
    let tele = method_telescope(n, &p.args);
    let family = if n.indices(&p.at.sort).is_empty() {
        var(n.motive(&p.at.sort))
    } else {
        let y = fresh("y", &taken);
        taken.push(y.clone());
        let body = motive_at(n, &p.at, var(&y), &|x| ih(n, x));
        ETerm::Lam { binder: y, body: Box::new(body) }
    };
    let path = ETerm::App { head: p.name.clone(), args: p.args.iter().map(|e| var(&e.name)).collect() };
    let result = EType::PathOver { family, path, lhs: ih(n, &p.lhs), rhs: ih(n, &p.rhs) };
    Method { constructor: p.name.clone(), kind: MethodKind::Path, name: method_name(&p.name), ty: close(tele, result) }
}

/// The section applied to a value of the given type.
fn section_at(n: &Names, ty: &ParamType, v: &str) -> ETerm {
    match ty {
        ParamType::Sort { target } => {
            let mut args: Vec<ETerm> = target.indices.iter().map(|e| plain(n.sig, e)).collect();
            args.push(var(v));
            ETerm::Call { head: n.section(&target.sort), args }
        }
        ParamType::Function { domain, binder, codomain } if codomain.indices.is_empty() => {
            let _ = (domain, binder);
            ETerm::Post { section: n.section(&codomain.sort), fun: Box::new(var(v)) }
        }
        ParamType::Function { domain, binder, codomain } => {
            let b = binder.clone().unwrap_or_else(|| fresh(&domain.to_lowercase(), &[v.to_string()]));
            let mut args: Vec<ETerm> = codomain.indices.iter().map(|e| plain(n.sig, e)).collect();
            args.push(ETerm::At { fun: Box::new(var(v)), arg: Box::new(var(&b)) });
            ETerm::Lam { binder: b, body: Box::new(ETerm::Call { head: n.section(&codomain.sort), args }) }
        }
        _ => unreachable!("only sort-valued arguments have sections"),
    }
}

fn section_decl(n: &Names, sort: &str) -> SectionDecl {
    let indices = n.indices(sort);
    let taken: Vec<String> = indices.iter().map(|e| e.name.clone()).collect();
    let mut tele: Vec<(String, EType)> =
        indices.iter().map(|e| (e.name.clone(), param_type(n, &e.ty, &taken))).collect();
    let x = fresh("x", &taken);
    tele.push((x.clone(), sort_type(n, &SortRef::new(sort, args_of(indices)))));
    let hyp = |e: &IndexExpr| match e {
        IndexExpr::Var { name } => {
            let entry = indices.iter().find(|i| &i.name == name).expect("index variable");
            section_at(n, &entry.ty, name)
        }
        _ => unreachable!("sort telescopes refer to their own variables"),
    };
    let result = motive_at(n, &SortRef::new(sort, args_of(indices)), var(&x), &hyp);
    SectionDecl { sort: sort.into(), name: n.section(sort), ty: close(tele, EType::Family { term: result }) }
}

fn rule(n: &Names, p: &PointDecl) -> ComputationRule {
    let elem = ETerm::App { head: p.name.clone(), args: p.args.iter().map(|e| var(&e.name)).collect() };
    let mut lhs_args: Vec<ETerm> = p.target.indices.iter().map(|e| plain(n.sig, e)).collect();
    lhs_args.push(elem);
    let mut rhs_args = Vec::new();
    for e in &p.args {
        rhs_args.push(var(&e.name));
        if matches!(e.ty, ParamType::Sort { .. } | ParamType::Function { .. }) {
            rhs_args.push(section_at(n, &e.ty, &e.name));
        }
    }
    ComputationRule {
        constructor: p.name.clone(),
        binders: p.args.iter().map(|e| e.name.clone()).collect(),
        lhs: ETerm::Call { head: n.section(&p.target.sort), args: lhs_args },
        rhs: ETerm::App { head: method_name(&p.name), args: rhs_args },
    }
}

/// Derives the eliminator of a well-formed signature.
pub fn derive_eliminator(sig: &Signature) -> EliminatorSpec {
    let n = Names::new(sig);
    let mut spec = EliminatorSpec {
        format_version: ELIMINATOR_FORMAT_VERSION,
        motives: Vec::new(),
        methods: Vec::new(),
        sections: Vec::new(),
        rules: Vec::new(),
    };
    for d in &sig.decls {
        match d {
            Decl::Sort(s) => {
                spec.motives.push(motive_decl(&n, &s.name));
                spec.sections.push(section_decl(&n, &s.name));
            }
            Decl::Point(p) => {
                spec.methods.push(point_method(&n, p));
                spec.rules.push(rule(&n, p));
            }
            Decl::Path(p) => spec.methods.push(path_method(&n, p)),
        }
    }
    spec
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Structured,
}

pub fn render_eliminator(e: &EliminatorSpec, format: Format) -> String {
    match format {
        Format::Text => render_text(e),
        Format::Structured => {
            let mut s = serde_json::to_string_pretty(e).expect("serialisable");
            s.push('\n');
            s
        }
    }
}

pub fn parse_structured(text: &str) -> serde_json::Result<EliminatorSpec> {
    serde_json::from_str(text)
}

fn render_text(e: &EliminatorSpec) -> String {
    let mut out = String::new();
    out.push_str("-- motives\n");
    for m in &e.motives {
        out.push_str(&format!("{} : {}\n", m.name, show_type(&m.ty)));
    }
    out.push_str("-- methods\n");
    for m in &e.methods {
        out.push_str(&format!("{} : {}\n", m.name, show_type(&m.ty)));
    }
    out.push_str("-- sections\n");
    for s in &e.sections {
        out.push_str(&format!("{} : {}\n", s.name, show_type(&s.ty)));
    }
    out.push_str("-- computation rules\n");
    for r in &e.rules {
        out.push_str(&format!("{} = {}\n", show_term(&r.lhs), show_term(&r.rhs)));
    }
    out
}

pub fn show_type(ty: &EType) -> String {
    match ty {
        EType::Set => "Set".into(),
        EType::External { set } => set.clone(),
        EType::Perm { set } => format!("{set} ≅ {set}"),
        EType::Sort { sort, indices } => {
            let mut s = sort.clone();
            for i in indices {
                s.push(' ');
                s.push_str(&atomic(i));
            }
            s
        }
        EType::Family { term } => show_term(term),
        EType::Pi { binder: Some(b), domain, codomain } => {
            format!("({b} : {}) → {}", show_type(domain), show_type(codomain))
        }
        EType::Pi { binder: None, domain, codomain } => {
            let d = match **domain {
                EType::Pi { .. } | EType::PathOver { .. } => format!("({})", show_type(domain)),
                _ => show_type(domain),
            };
            format!("{d} → {}", show_type(codomain))
        }
        EType::PathOver { family, path, lhs, rhs } => {
            format!("{} =[ap {} {}] {}", show_term(lhs), atomic(family), atomic(path), show_term(rhs))
        }
    }
}

pub fn show_term(t: &ETerm) -> String {
    match t {
        ETerm::Var { name } => name.clone(),
        ETerm::Atom { elem, .. } => elem.clone(),
        ETerm::App { head, args } => {
            let mut s = head.clone();
            for a in args {
                s.push(' ');
                s.push_str(&atomic(a));
            }
            s
        }
        ETerm::Call { head, args } => {
            let parts: Vec<String> = args.iter().map(show_term).collect();
            format!("{head}({})", parts.join(", "))
        }
        ETerm::At { fun, arg } => format!("{} {}", atomic(fun), atomic(arg)),
        ETerm::Compose { fun, perm } => format!("{} ∘ {}", atomic(fun), atomic(perm)),
        ETerm::Table { entries, .. } => {
            let parts: Vec<String> = entries.iter().map(|(k, v)| format!("{k} ↦ {}", show_term(v))).collect();
            format!("{{{}}}", parts.join(", "))
        }
        ETerm::Lam { binder, body } => format!("λ {binder}. {}", show_term(body)),
        ETerm::Post { section, fun } => format!("{section} ∘ {}", atomic(fun)),
    }
}

fn atomic(t: &ETerm) -> String {
    match t {
        ETerm::App { args, .. } if !args.is_empty() => format!("({})", show_term(t)),
        ETerm::At { .. } | ETerm::Compose { .. } | ETerm::Lam { .. } | ETerm::Post { .. } => {
            format!("({})", show_term(t))
        }
        _ => show_term(t),
    }
}
