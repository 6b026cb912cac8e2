//! Semantic staging of a signature.
//!
//! Each sort becomes a stage of the base-category ladder, presented
//! concretely as a family of sets over the evaluated indices of earlier
//! stages. Each constructor is read as an argument functor (its telescope)
//! and a target functor, and carries a certificate naming the
//! construction that makes the target relatively continuous. Certificates
//! are never decided semantically; they follow from the shape of the
//! declaration.

use serde::{Deserialize, Serialize};

use crate::parser::{print_expr, print_sortref};
use crate::schema::permutations;
use crate::syntax::{Decl, Entry, ExternalSet, IndexExpr, ParamType, Signature, SortRef};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub name: String,
    /// The stage (sort) or external set the index ranges over.
    pub over: String,
    pub ty: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub sort: String,
    pub decl: usize,
    /// `Set` for an unindexed sort, otherwise a family over the index
    /// telescope.
    pub presentation: String,
    pub indices: Vec<IndexEntry>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SortLadder {
    pub stages: Vec<Stage>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArgumentShape {
    /// An external set, constant in the algebra.
    Constant,
    /// The bijections of an external set, constant in the algebra.
    Bijections,
    /// A carrier at the given indices.
    Carrier,
    /// Functions from an external set into a carrier.
    Exponential,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgumentDesc {
    pub name: String,
    pub ty: String,
    pub shape: ArgumentShape,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetDesc {
    /// The forgetful functor to a sort, reindexed along the index
    /// expressions.
    Base { sort: String, indices: Vec<String> },
    /// Equality of two elements of the target.
    Equality { sort: String, indices: Vec<String>, lhs: String, rhs: String },
}

/// Why a target functor is relatively continuous.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Certificate {
    /// A forgetful functor to a sort whose indices are telescope variables.
    BaseTarget,
    /// A forgetful functor composed with a reindexing that builds index
    /// terms from constructors; continuity is preserved by the composition.
    ReindexedBaseTarget,
    /// The equality functor over a certified target.
    Equality { over: Box<Certificate> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructorKind {
    Point,
    Path,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructorSemantics {
    pub name: String,
    pub decl: usize,
    pub kind: ConstructorKind,
    pub arguments: Vec<ArgumentDesc>,
    pub target: TargetDesc,
    pub certificate: Certificate,
}

impl ConstructorSemantics {
    /// Whether the certificate matches the constructor kind and the shape
    /// of its target.
    pub fn certificate_consistent(&self) -> bool {
        match (&self.kind, &self.target, &self.certificate) {
            (ConstructorKind::Point, TargetDesc::Base { .. }, c) => {
                matches!(c, Certificate::BaseTarget | Certificate::ReindexedBaseTarget)
            }
            (ConstructorKind::Path, TargetDesc::Equality { .. }, Certificate::Equality { over }) => {
                matches!(**over, Certificate::BaseTarget | Certificate::ReindexedBaseTarget)
            }
            _ => false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Elaboration {
    pub ladder: SortLadder,
    pub constructors: Vec<ConstructorSemantics>,
}

impl Elaboration {
    /// The part contributed by the first `k` declarations.
    pub fn prefix(&self, k: usize) -> Elaboration {
        Elaboration {
            ladder: SortLadder { stages: self.ladder.stages.iter().filter(|s| s.decl < k).cloned().collect() },
            constructors: self.constructors.iter().filter(|c| c.decl < k).cloned().collect(),
        }
    }
}

/// Elaborates a well-formed signature.
pub fn elaborate(sig: &Signature) -> Elaboration {
    let mut out = Elaboration::default();
    for (i, decl) in sig.decls.iter().enumerate() {
        match decl {
            Decl::Sort(s) => out.ladder.stages.push(Stage {
                sort: s.name.clone(),
                decl: i,
                presentation: presentation(sig, &s.indices),
                indices: s
                    .indices
                    .iter()
                    .map(|e| IndexEntry {
                        name: e.name.clone(),
                        over: match &e.ty {
                            ParamType::External { set } | ParamType::Perm { set } => set.clone(),
                            ParamType::Sort { target } => target.sort.clone(),
                            ParamType::Function { codomain, .. } => codomain.sort.clone(),
                        },
                        ty: show_param(sig, &e.ty),
                    })
                    .collect(),
            }),
            Decl::Point(p) => out.constructors.push(ConstructorSemantics {
                name: p.name.clone(),
                decl: i,
                kind: ConstructorKind::Point,
                arguments: arguments(sig, &p.args),
                target: TargetDesc::Base { sort: p.target.sort.clone(), indices: shown(sig, &p.target.indices) },
                certificate: base_certificate(&p.target),
            }),
            Decl::Path(p) => out.constructors.push(ConstructorSemantics {
                name: p.name.clone(),
                decl: i,
                kind: ConstructorKind::Path,
                arguments: arguments(sig, &p.args),
                target: TargetDesc::Equality {
                    sort: p.at.sort.clone(),
                    indices: shown(sig, &p.at.indices),
                    lhs: print_expr(sig, &p.lhs),
                    rhs: print_expr(sig, &p.rhs),
                },
                certificate: Certificate::Equality { over: Box::new(base_certificate(&p.at)) },
            }),
        }
    }
    out
}

fn presentation(sig: &Signature, indices: &[Entry]) -> String {
    if indices.is_empty() {
        return "Set".into();
    }
    let tele: Vec<String> = indices.iter().map(|e| format!("({} : {})", e.name, show_param(sig, &e.ty))).collect();
    format!("Fam over {}", tele.join(" "))
}

fn base_certificate(target: &SortRef) -> Certificate {
    if target.indices.iter().all(|e| matches!(e, IndexExpr::Var { .. })) {
        Certificate::BaseTarget
    } else {
        Certificate::ReindexedBaseTarget
    }
}

fn shown(sig: &Signature, es: &[IndexExpr]) -> Vec<String> {
    es.iter().map(|e| print_expr(sig, e)).collect()
}

fn show_param(sig: &Signature, ty: &ParamType) -> String {
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
    if r.indices.is_empty() {
        return print_sortref(r);
    }
    let mut s = r.sort.clone();
    for e in &r.indices {
        let t = print_expr(sig, e);
        if t.contains(' ') {
            s.push_str(&format!(" ({t})"));
        } else {
            s.push(' ');
            s.push_str(&t);
        }
    }
    s
}

fn arguments(sig: &Signature, args: &[Entry]) -> Vec<ArgumentDesc> {
    args.iter()
        .map(|e| ArgumentDesc {
            name: e.name.clone(),
            ty: show_param(sig, &e.ty),
            shape: match e.ty {
                ParamType::External { .. } => ArgumentShape::Constant,
                ParamType::Perm { .. } => ArgumentShape::Bijections,
                ParamType::Sort { .. } => ArgumentShape::Carrier,
                ParamType::Function { .. } => ArgumentShape::Exponential,
            },
        })
        .collect()
}

/// The bijection sets `Perm(A)` of every external set `A` used by a
/// permutation argument, in order of first use. Elements are labelled by
/// their image lists, e.g. `[a1,a0]`.
pub fn derived_externals(sig: &Signature) -> Vec<ExternalSet> {
    let mut used: Vec<&str> = Vec::new();
    for decl in &sig.decls {
        let entries = match decl {
            Decl::Sort(s) => &s.indices,
            Decl::Point(p) => &p.args,
            Decl::Path(p) => &p.args,
        };
        for e in entries {
            if let ParamType::Perm { set } = &e.ty {
                if !used.contains(&set.as_str()) {
                    used.push(set);
                }
            }
        }
    }
    used.into_iter()
        .filter_map(|name| sig.external(name))
        .map(|ext| {
            let elements = permutations(ext.elements.len()).into_iter().map(|p| {
                let images: Vec<&str> = p.iter().map(|&k| ext.elements[k as usize].as_str()).collect();
                format!("[{}]", images.join(","))
            });
            ExternalSet::new(format!("Perm({})", ext.name), elements)
        })
        .collect()
}
