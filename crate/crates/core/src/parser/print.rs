use std::fmt::Write;

use crate::syntax::{Decl, Entry, IndexExpr, ParamType, Signature, SortRef};

/// Canonical text of a signature: external sets first, then one
/// declaration per line in declaration order.
pub fn print_signature(sig: &Signature) -> String {
    let mut out = String::new();
    for ext in &sig.externals {
        let _ = writeln!(out, "external {} = {{{}}};", ext.name, ext.elements.join(", "));
    }
    for decl in &sig.decls {
        match decl {
            Decl::Sort(s) if s.indices.is_empty() => {
                let _ = writeln!(out, "sort {};", s.name);
            }
            Decl::Sort(s) => {
                let _ = writeln!(out, "sort {} : {}Set;", s.name, telescope(sig, &s.indices));
            }
            Decl::Point(p) => {
                let _ = writeln!(out, "point {} : {}{};", p.name, telescope(sig, &p.args), sortref(sig, &p.target));
            }
            Decl::Path(p) => {
                let _ = writeln!(
                    out,
                    "path {} : {}{} = {};",
                    p.name,
                    telescope(sig, &p.args),
                    print_expr(sig, &p.lhs),
                    print_expr(sig, &p.rhs)
                );
            }
        }
    }
    out
}

fn telescope(sig: &Signature, entries: &[Entry]) -> String {
    entries.iter().map(|e| format!("({} : {}) -> ", e.name, param_type(sig, &e.ty))).collect()
}

fn param_type(sig: &Signature, ty: &ParamType) -> String {
    match ty {
        ParamType::External { set } => set.clone(),
        ParamType::Perm { set } => format!("Perm {set}"),
        ParamType::Sort { target } => sortref(sig, target),
        ParamType::Function { domain, binder: None, codomain } => format!("{domain} -> {}", sortref(sig, codomain)),
        ParamType::Function { domain, binder: Some(b), codomain } => {
            format!("({b} : {domain}) -> {}", sortref(sig, codomain))
        }
    }
}

fn sortref(sig: &Signature, r: &SortRef) -> String {
    let mut s = r.sort.clone();
    for i in &r.indices {
        s.push(' ');
        s.push_str(&atom(sig, i));
    }
    s
}

/// Prints a sort reference without access to the signature (function
/// literals are then printed by position).
pub fn print_sortref(r: &SortRef) -> String {
    sortref(&Signature::new(), r)
}

pub fn print_expr(sig: &Signature, e: &IndexExpr) -> String {
    match e {
        IndexExpr::Var { name } => name.clone(),
        IndexExpr::Atom { elem, .. } => elem.clone(),
        IndexExpr::Apply { ctor, args } => {
            let mut s = ctor.clone();
            for a in args {
                s.push(' ');
                s.push_str(&atom(sig, a));
            }
            s
        }
        IndexExpr::Table { domain, entries } => {
            let labels = sig.external(domain).map(|d| d.elements.clone());
            let parts: Vec<String> = entries
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    let key = labels.as_ref().and_then(|l| l.get(k).cloned()).unwrap_or_else(|| format!("#{k}"));
                    format!("{key} => {}", print_expr(sig, v))
                })
                .collect();
            format!("{{{}}}", parts.join(", "))
        }
        IndexExpr::At { fun, arg } => format!("{} {}", atom(sig, fun), atom(sig, arg)),
        IndexExpr::Compose { fun, perm } => format!("{} . {}", app(sig, fun), app(sig, perm)),
    }
}

fn app(sig: &Signature, e: &IndexExpr) -> String {
    match e {
        IndexExpr::Compose { .. } => format!("({})", print_expr(sig, e)),
        _ => print_expr(sig, e),
    }
}

fn atom(sig: &Signature, e: &IndexExpr) -> String {
    match e {
        IndexExpr::Apply { args, .. } if !args.is_empty() => format!("({})", print_expr(sig, e)),
        IndexExpr::At { .. } | IndexExpr::Compose { .. } => format!("({})", print_expr(sig, e)),
        _ => print_expr(sig, e),
    }
}
