//! Well-formedness checking for signatures.
//!
//! The checker is bidirectional: function literals are only checked
//! against an expected type, everything else is inferred and compared
//! syntactically after a small normalisation (beta-reducing applications
//! of literals).

use std::collections::HashSet;

use crate::diagnostic::Diagnostic;
use crate::syntax::{Decl, Entry, IndexExpr, ParamType, Signature, SortRef};

/// Checks every invariant of `sig` and returns all violations, in
/// declaration order. An empty list means the signature is accepted.
pub fn validate(sig: &Signature) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    check_externals(sig, &mut out);

    let mut seen: HashSet<&str> = sig.externals.iter().map(|e| e.name.as_str()).collect();
    for (i, decl) in sig.decls.iter().enumerate() {
        let mut local = Vec::new();
        if !seen.insert(decl.name()) {
            local.push(format!("duplicate name `{}`", decl.name()));
        }
        let ctx = Ctx::new(sig, i);
        match decl {
            Decl::Sort(s) => {
                let mut ctx = ctx;
                for entry in &s.indices {
                    if let ParamType::Function { .. } = entry.ty {
                        local.push(format!(
                            "sort `{}`: function-typed index `{}` is not supported",
                            s.name, entry.name
                        ));
                        continue;
                    }
                    if let Some(r) = entry.ty.sort_ref() {
                        if r.indices.iter().any(IndexExpr::has_apply) {
                            local.push(format!(
                                "sort `{}`: constructor application in index telescope",
                                s.name
                            ));
                            continue;
                        }
                    }
                    ctx.push_entry(entry, &mut local);
                }
            }
            Decl::Point(p) => {
                let mut ctx = ctx;
                for entry in &p.args {
                    ctx.push_entry(entry, &mut local);
                }
                if let Err(e) = ctx.check_sortref(&p.target) {
                    local.push(format!("point `{}`: {e}", p.name));
                }
            }
            Decl::Path(p) => {
                let mut ctx = ctx;
                for entry in &p.args {
                    ctx.push_entry(entry, &mut local);
                }
                if let Err(e) = ctx.check_sortref(&p.at) {
                    local.push(format!("path `{}`: {e}", p.name));
                }
                let lhs = ctx.infer_endpoint(&p.lhs);
                let rhs = ctx.infer_endpoint(&p.rhs);
                match (lhs, rhs) {
                    (Err(e), _) => local.push(format!("path `{}`: left endpoint: {e}", p.name)),
                    (_, Err(e)) => local.push(format!("path `{}`: right endpoint: {e}", p.name)),
                    (Ok(l), Ok(r)) => {
                        if l.sort != r.sort {
                            local.push(format!(
                                "path `{}`: endpoints live in different sorts `{}` and `{}`",
                                p.name, l.sort, r.sort
                            ));
                        } else if l.indices != r.indices {
                            local.push(format!(
                                "path `{}`: endpoint indices are not syntactically identical",
                                p.name
                            ));
                        } else if normalize_ref(sig, &p.at) != l {
                            local.push(format!(
                                "path `{}`: declared sort does not match the endpoints",
                                p.name
                            ));
                        }
                    }
                }
            }
        }
        for msg in local {
            let mut d = Diagnostic::error(msg).at_decl(i);
            if let Some(span) = sig.decl_span(i) {
                d = d.with_span(span);
            }
            out.push(d);
        }
    }
    out
}

fn check_externals(sig: &Signature, out: &mut Vec<Diagnostic>) {
    let mut names = HashSet::new();
    for (i, ext) in sig.externals.iter().enumerate() {
        let span = sig.external_spans.get(i).copied();
        let mut push = |msg: String| {
            let mut d = Diagnostic::error(msg);
            if let Some(s) = span {
                d = d.with_span(s);
            }
            out.push(d);
        };
        if !names.insert(ext.name.as_str()) {
            push(format!("duplicate external set `{}`", ext.name));
        }
        let mut elems = HashSet::new();
        for e in &ext.elements {
            if !elems.insert(e.as_str()) {
                push(format!("external set `{}` lists `{e}` twice", ext.name));
            }
        }
    }
}

/// Infers the sort of a path endpoint (or any sort-valued expression)
/// over the telescope `args`, with only the first `upto` declarations of
/// `sig` in scope.
pub fn infer_sort(sig: &Signature, upto: usize, args: &[Entry], expr: &IndexExpr) -> Result<SortRef, String> {
    let mut ctx = Ctx::new(sig, upto);
    let mut sink = Vec::new();
    for entry in args {
        ctx.push_entry(entry, &mut sink);
    }
    if let Some(first) = sink.into_iter().next() {
        return Err(first);
    }
    ctx.infer_endpoint(expr)
}

struct Ctx<'a> {
    sig: &'a Signature,
    upto: usize,
    vars: Vec<(String, ParamType)>,
}

impl<'a> Ctx<'a> {
    fn new(sig: &'a Signature, upto: usize) -> Self {
        Ctx { sig, upto, vars: Vec::new() }
    }

    fn lookup_decl(&self, name: &str) -> Option<&'a Decl> {
        self.sig.decls[..self.upto].iter().find(|d| d.name() == name)
    }

    fn missing(&self, what: &str, name: &str) -> String {
        match self.sig.decls.iter().position(|d| d.name() == name) {
            Some(pos) if pos >= self.upto => format!("forward {what} reference `{name}`"),
            Some(_) => format!("`{name}` is not a {what}"),
            None => format!("unknown {what} `{name}`"),
        }
    }

    fn check_set(&self, set: &str) -> Result<usize, String> {
        self.sig
            .external(set)
            .map(|e| e.elements.len())
            .ok_or_else(|| format!("unknown external set `{set}`"))
    }

    fn push_entry(&mut self, entry: &Entry, errs: &mut Vec<String>) {
        if self.vars.iter().any(|(n, _)| *n == entry.name) {
            errs.push(format!("duplicate telescope variable `{}`", entry.name));
        }
        if let Err(e) = self.check_type(&entry.ty) {
            errs.push(format!("in `{}`: {e}", entry.name));
        }
        self.vars.push((entry.name.clone(), entry.ty.clone()));
    }

    fn check_type(&mut self, ty: &ParamType) -> Result<(), String> {
        match ty {
            ParamType::External { set } | ParamType::Perm { set } => self.check_set(set).map(|_| ()),
            ParamType::Sort { target } => self.check_sortref(target),
            ParamType::Function { domain, binder, codomain } => {
                self.check_set(domain)?;
                if let Some(b) = binder {
                    self.vars.push((b.clone(), ParamType::External { set: domain.clone() }));
                    let r = self.check_sortref(codomain);
                    self.vars.pop();
                    r
                } else {
                    self.check_sortref(codomain)
                }
            }
        }
    }

    fn check_sortref(&mut self, r: &SortRef) -> Result<(), String> {
        let decl = match self.lookup_decl(&r.sort) {
            Some(Decl::Sort(s)) => s,
            _ => return Err(self.missing("sort", &r.sort)),
        };
        if decl.indices.len() != r.indices.len() {
            return Err(format!(
                "sort `{}` expects {} indices, got {}",
                r.sort,
                decl.indices.len(),
                r.indices.len()
            ));
        }
        for (k, (entry, idx)) in decl.indices.iter().zip(&r.indices).enumerate() {
            let expected = subst_type(&entry.ty, &|v| {
                decl.indices[..k].iter().position(|e| e.name == v).map(|j| r.indices[j].clone())
            });
            self.check_expr(idx, &expected)?;
        }
        Ok(())
    }

    fn infer_endpoint(&mut self, e: &IndexExpr) -> Result<SortRef, String> {
        match self.infer(e)? {
            ParamType::Sort { target } => Ok(normalize_ref(self.sig, &target)),
            other => Err(format!("endpoint is not a point term (has type {other:?})")),
        }
    }

    fn check_expr(&mut self, e: &IndexExpr, expected: &ParamType) -> Result<(), String> {
        if let IndexExpr::Table { domain, entries } = e {
            let n = self.check_set(domain)?;
            if entries.len() != n {
                return Err(format!("function literal over `{domain}` must have {n} entries"));
            }
            let set = self.sig.external(domain).expect("checked");
            return match expected {
                ParamType::Function { domain: d, binder, codomain } if d == domain => {
                    for (k, entry) in entries.iter().enumerate() {
                        let cod = match binder {
                            Some(b) => {
                                let atom = IndexExpr::atom(domain.clone(), set.elements[k].clone());
                                subst_ref(codomain, &|v| (v == b).then(|| atom.clone()))
                            }
                            None => codomain.clone(),
                        };
                        self.check_expr(entry, &ParamType::Sort { target: cod })?;
                    }
                    Ok(())
                }
                ParamType::Perm { set: s } if s == domain => {
                    let mut seen = HashSet::new();
                    for entry in entries {
                        match entry {
                            IndexExpr::Atom { set: es, elem } if es == domain => {
                                if !seen.insert(elem.clone()) {
                                    return Err("permutation literal is not a bijection".into());
                                }
                            }
                            _ => return Err("permutation literal entries must be atoms".into()),
                        }
                    }
                    Ok(())
                }
                _ => Err(format!("function literal over `{domain}` where {expected:?} was expected")),
            };
        }
        let got = self.infer(e)?;
        if normalize_type(self.sig, &got) == normalize_type(self.sig, expected) {
            Ok(())
        } else {
            Err(format!("type mismatch: expected {}, found {}", show_type(expected), show_type(&got)))
        }
    }

    fn infer(&mut self, e: &IndexExpr) -> Result<ParamType, String> {
        match e {
            IndexExpr::Var { name } => self
                .vars
                .iter()
                .rev()
                .find(|(n, _)| n == name)
                .map(|(_, t)| t.clone())
                .ok_or_else(|| format!("unbound variable `{name}`")),
            IndexExpr::Atom { set, elem } => {
                let ext = self.sig.external(set).ok_or_else(|| format!("unknown external set `{set}`"))?;
                if ext.position(elem).is_none() {
                    return Err(format!("`{elem}` is not an element of `{set}`"));
                }
                Ok(ParamType::External { set: set.clone() })
            }
            IndexExpr::Apply { ctor, args } => {
                let decl = match self.lookup_decl(ctor) {
                    Some(Decl::Point(p)) => p,
                    Some(Decl::Path(_)) => return Err(format!("path constructor `{ctor}` used as a point")),
                    _ => return Err(self.missing("constructor", ctor)),
                };
                if decl.args.len() != args.len() {
                    return Err(format!(
                        "constructor `{ctor}` expects {} arguments, got {}",
                        decl.args.len(),
                        args.len()
                    ));
                }
                let names: Vec<&str> = decl.args.iter().map(|a| a.name.as_str()).collect();
                let names = &names;
                let lookup = |k: usize| {
                    move |v: &str| names[..k].iter().rposition(|n| *n == v).map(|j| args[j].clone())
                };
                for (k, (entry, arg)) in decl.args.iter().zip(args).enumerate() {
                    let expected = subst_type(&entry.ty, &lookup(k));
                    self.check_expr(arg, &expected)
                        .map_err(|err| format!("argument `{}` of `{ctor}`: {err}", entry.name))?;
                }
                Ok(ParamType::Sort { target: subst_ref(&decl.target, &lookup(args.len())) })
            }
            IndexExpr::Table { .. } => Err("cannot infer the type of a function literal here".into()),
            IndexExpr::At { fun, arg } => match self.infer(fun)? {
                ParamType::Function { domain, binder, codomain } => {
                    self.check_expr(arg, &ParamType::External { set: domain.clone() })?;
                    let cod = match binder {
                        Some(b) => subst_ref(&codomain, &|v| (v == b).then(|| (**arg).clone())),
                        None => codomain,
                    };
                    Ok(ParamType::Sort { target: cod })
                }
                ParamType::Perm { set } => {
                    self.check_expr(arg, &ParamType::External { set: set.clone() })?;
                    Ok(ParamType::External { set })
                }
                other => Err(format!("cannot apply a value of type {}", show_type(&other))),
            },
            IndexExpr::Compose { fun, perm } => match self.infer(fun)? {
                ParamType::Function { domain, binder, codomain } => {
                    if let Some(b) = &binder {
                        if codomain.indices.iter().any(|i| i.mentions(b)) {
                            return Err("cannot precompose a dependent function with a permutation".into());
                        }
                    }
                    self.check_expr(perm, &ParamType::Perm { set: domain.clone() })?;
                    Ok(ParamType::Function { domain, binder: None, codomain })
                }
                other => Err(format!("cannot compose a value of type {}", show_type(&other))),
            },
        }
    }
}

pub(crate) fn subst_type(ty: &ParamType, map: &dyn Fn(&str) -> Option<IndexExpr>) -> ParamType {
    match ty {
        ParamType::External { .. } | ParamType::Perm { .. } => ty.clone(),
        ParamType::Sort { target } => ParamType::Sort { target: subst_ref(target, map) },
        ParamType::Function { domain, binder, codomain } => {
            let shadow = binder.clone();
            let inner = move |v: &str| if Some(v) == shadow.as_deref() { None } else { map(v) };
            ParamType::Function {
                domain: domain.clone(),
                binder: binder.clone(),
                codomain: subst_ref(codomain, &inner),
            }
        }
    }
}

pub(crate) fn subst_ref(r: &SortRef, map: &dyn Fn(&str) -> Option<IndexExpr>) -> SortRef {
    SortRef { sort: r.sort.clone(), indices: r.indices.iter().map(|i| i.subst(map)).collect() }
}

/// Beta-reduces applications of literals.
pub fn normalize(sig: &Signature, e: &IndexExpr) -> IndexExpr {
    match e {
        IndexExpr::Var { .. } | IndexExpr::Atom { .. } => e.clone(),
        IndexExpr::Apply { ctor, args } => IndexExpr::Apply { ctor: ctor.clone(), args: args.iter().map(|a| normalize(sig, a)).collect() },
        IndexExpr::Table { domain, entries } => {
            IndexExpr::Table { domain: domain.clone(), entries: entries.iter().map(|a| normalize(sig, a)).collect() }
        }
        IndexExpr::At { fun, arg } => {
            let fun = normalize(sig, fun);
            let arg = normalize(sig, arg);
            match (&fun, &arg) {
                (IndexExpr::Table { domain, entries }, IndexExpr::Atom { elem, .. }) => {
                    match sig.external(domain).and_then(|d| d.position(elem)) {
                        Some(k) if k < entries.len() => entries[k].clone(),
                        _ => IndexExpr::At { fun: Box::new(fun), arg: Box::new(arg) },
                    }
                }
                (IndexExpr::Compose { fun: f, perm }, _) => normalize(sig, &IndexExpr::At {
                    fun: f.clone(),
                    arg: Box::new(IndexExpr::At { fun: perm.clone(), arg: Box::new(arg) }),
                }),
                _ => IndexExpr::At { fun: Box::new(fun), arg: Box::new(arg) },
            }
        }
        IndexExpr::Compose { fun, perm } => {
            IndexExpr::Compose { fun: Box::new(normalize(sig, fun)), perm: Box::new(normalize(sig, perm)) }
        }
    }
}

fn normalize_ref(sig: &Signature, r: &SortRef) -> SortRef {
    SortRef { sort: r.sort.clone(), indices: r.indices.iter().map(|i| normalize(sig, i)).collect() }
}

fn normalize_type(sig: &Signature, t: &ParamType) -> ParamType {
    match t {
        ParamType::Sort { target } => ParamType::Sort { target: normalize_ref(sig, target) },
        ParamType::Function { domain, binder, codomain } => ParamType::Function {
            domain: domain.clone(),
            binder: binder.clone(),
            codomain: normalize_ref(sig, codomain),
        },
        _ => t.clone(),
    }
}

fn show_type(t: &ParamType) -> String {
    match t {
        ParamType::External { set } => set.clone(),
        ParamType::Perm { set } => format!("Perm {set}"),
        ParamType::Sort { target } => crate::parser::print_sortref(target),
        ParamType::Function { domain, binder: None, codomain } => {
            format!("{domain} -> {}", crate::parser::print_sortref(codomain))
        }
        ParamType::Function { domain, binder: Some(b), codomain } => {
            format!("({b} : {domain}) -> {}", crate::parser::print_sortref(codomain))
        }
    }
}
