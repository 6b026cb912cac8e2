//! Abstract syntax of signatures: external sets, sorts, telescopes and
//! point/path constructors.
//!
//! A [`Signature`] is an ordered list of declarations. Every name must be
//! declared before it is used, which is what makes interleaved
//! declarations (a constructor of one sort placed between two constructors
//! of another) well defined.

use serde::{Deserialize, Serialize};

use crate::diagnostic::Span;

/// A finite, extensionally listed parameter set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExternalSet {
    pub name: String,
    pub elements: Vec<String>,
}

impl ExternalSet {
    pub fn new(name: impl Into<String>, elements: impl IntoIterator<Item = impl Into<String>>) -> Self {
        ExternalSet { name: name.into(), elements: elements.into_iter().map(Into::into).collect() }
    }

    pub fn position(&self, elem: &str) -> Option<usize> {
        self.elements.iter().position(|e| e == elem)
    }
}

/// A sort applied to index expressions, e.g. `Ty (ext G A)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SortRef {
    pub sort: String,
    pub indices: Vec<IndexExpr>,
}

impl SortRef {
    pub fn new(sort: impl Into<String>, indices: Vec<IndexExpr>) -> Self {
        SortRef { sort: sort.into(), indices }
    }

    pub fn plain(sort: impl Into<String>) -> Self {
        SortRef { sort: sort.into(), indices: Vec::new() }
    }
}

/// The type of a telescope entry.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamType {
    /// An element of an external set.
    External { set: String },
    /// A bijection of an external set onto itself.
    Perm { set: String },
    /// An element of a sort at the given indices.
    Sort { target: SortRef },
    /// A total function out of an external set. When `binder` is present the
    /// codomain indices may mention it.
    Function { domain: String, binder: Option<String>, codomain: SortRef },
}

impl ParamType {
    pub fn sort(target: SortRef) -> Self {
        ParamType::Sort { target }
    }

    /// The sort reached by this parameter, if it is sort-valued (directly
    /// or pointwise).
    pub fn sort_ref(&self) -> Option<&SortRef> {
        match self {
            ParamType::Sort { target } => Some(target),
            ParamType::Function { codomain, .. } => Some(codomain),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Entry {
    pub name: String,
    pub ty: ParamType,
}

impl Entry {
    pub fn new(name: impl Into<String>, ty: ParamType) -> Self {
        Entry { name: name.into(), ty }
    }
}

pub type Telescope = Vec<Entry>;

/// Index expressions and path endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IndexExpr {
    Var { name: String },
    Atom { set: String, elem: String },
    /// A fully applied point constructor.
    Apply { ctor: String, args: Vec<IndexExpr> },
    /// A function literal; `entries[i]` is the image of the i-th element
    /// of `domain`.
    Table { domain: String, entries: Vec<IndexExpr> },
    /// Application of a function- or permutation-valued expression to an
    /// atom-valued one.
    At { fun: Box<IndexExpr>, arg: Box<IndexExpr> },
    /// Precomposition of a function with a permutation, `f . e`.
    Compose { fun: Box<IndexExpr>, perm: Box<IndexExpr> },
}

impl IndexExpr {
    pub fn var(name: impl Into<String>) -> Self {
        IndexExpr::Var { name: name.into() }
    }

    pub fn apply(ctor: impl Into<String>, args: Vec<IndexExpr>) -> Self {
        IndexExpr::Apply { ctor: ctor.into(), args }
    }

    pub fn atom(set: impl Into<String>, elem: impl Into<String>) -> Self {
        IndexExpr::Atom { set: set.into(), elem: elem.into() }
    }

    /// Substitutes variables by expressions, leaving unmapped names alone.
    pub fn subst(&self, map: &dyn Fn(&str) -> Option<IndexExpr>) -> IndexExpr {
        match self {
            IndexExpr::Var { name } => map(name).unwrap_or_else(|| self.clone()),
            IndexExpr::Atom { .. } => self.clone(),
            IndexExpr::Apply { ctor, args } => {
                IndexExpr::Apply { ctor: ctor.clone(), args: args.iter().map(|a| a.subst(map)).collect() }
            }
            IndexExpr::Table { domain, entries } => IndexExpr::Table {
                domain: domain.clone(),
                entries: entries.iter().map(|e| e.subst(map)).collect(),
            },
            IndexExpr::At { fun, arg } => {
                IndexExpr::At { fun: Box::new(fun.subst(map)), arg: Box::new(arg.subst(map)) }
            }
            IndexExpr::Compose { fun, perm } => {
                IndexExpr::Compose { fun: Box::new(fun.subst(map)), perm: Box::new(perm.subst(map)) }
            }
        }
    }

    /// Every variable occurring in the expression.
    pub fn vars(&self, out: &mut Vec<String>) {
        match self {
            IndexExpr::Var { name } => {
                if !out.contains(name) {
                    out.push(name.clone())
                }
            }
            IndexExpr::Atom { .. } => {}
            IndexExpr::Apply { args, .. } => args.iter().for_each(|a| a.vars(out)),
            IndexExpr::Table { entries, .. } => entries.iter().for_each(|a| a.vars(out)),
            IndexExpr::At { fun, arg } => {
                fun.vars(out);
                arg.vars(out);
            }
            IndexExpr::Compose { fun, perm } => {
                fun.vars(out);
                perm.vars(out);
            }
        }
    }

    pub fn mentions(&self, var: &str) -> bool {
        let mut vs = Vec::new();
        self.vars(&mut vs);
        vs.iter().any(|v| v == var)
    }

    pub fn has_apply(&self) -> bool {
        match self {
            IndexExpr::Apply { .. } => true,
            IndexExpr::Var { .. } | IndexExpr::Atom { .. } => false,
            IndexExpr::Table { entries, .. } => entries.iter().any(IndexExpr::has_apply),
            IndexExpr::At { fun, arg } => fun.has_apply() || arg.has_apply(),
            IndexExpr::Compose { fun, perm } => fun.has_apply() || perm.has_apply(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SortDecl {
    pub name: String,
    pub indices: Telescope,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointDecl {
    pub name: String,
    pub args: Telescope,
    pub target: SortRef,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathDecl {
    pub name: String,
    pub args: Telescope,
    /// The sort and indices both endpoints inhabit.
    pub at: SortRef,
    pub lhs: IndexExpr,
    pub rhs: IndexExpr,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "decl", rename_all = "snake_case")]
pub enum Decl {
    Sort(SortDecl),
    Point(PointDecl),
    Path(PathDecl),
}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::Sort(d) => &d.name,
            Decl::Point(d) => &d.name,
            Decl::Path(d) => &d.name,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Decl::Sort(_) => "sort",
            Decl::Point(_) => "point",
            Decl::Path(_) => "path",
        }
    }
}

/// An ordered list of external sets and declarations.
///
/// Equality is structural and ignores source spans.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Signature {
    pub externals: Vec<ExternalSet>,
    pub decls: Vec<Decl>,
    /// Source spans of the external sets, when parsed.
    #[serde(skip)]
    pub external_spans: Vec<Span>,
    /// Source spans of the declarations, when parsed.
    #[serde(skip)]
    pub decl_spans: Vec<Span>,
}

impl PartialEq for Signature {
    fn eq(&self, other: &Self) -> bool {
        self.externals == other.externals && self.decls == other.decls
    }
}

impl Eq for Signature {}

/// `scope_of` was asked for a prefix longer than the signature.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("declaration index {index} out of range (signature has {len} declarations)")]
pub struct ScopeError {
    pub index: usize,
    pub len: usize,
}

impl Signature {
    pub fn new() -> Self {
        Signature::default()
    }

    pub fn external(&self, name: &str) -> Option<&ExternalSet> {
        self.externals.iter().find(|e| e.name == name)
    }

    pub fn decl_position(&self, name: &str) -> Option<usize> {
        self.decls.iter().position(|d| d.name() == name)
    }

    pub fn sorts(&self) -> impl Iterator<Item = &SortDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Sort(s) => Some(s),
            _ => None,
        })
    }

    pub fn points(&self) -> impl Iterator<Item = &PointDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Point(p) => Some(p),
            _ => None,
        })
    }

    pub fn paths(&self) -> impl Iterator<Item = &PathDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Path(p) => Some(p),
            _ => None,
        })
    }

    pub fn sort(&self, name: &str) -> Option<&SortDecl> {
        self.sorts().find(|s| s.name == name)
    }

    pub fn point(&self, name: &str) -> Option<&PointDecl> {
        self.points().find(|p| p.name == name)
    }

    pub fn sort_index(&self, name: &str) -> Option<usize> {
        self.sorts().position(|s| s.name == name)
    }

    pub fn point_index(&self, name: &str) -> Option<usize> {
        self.points().position(|p| p.name == name)
    }

    /// The prefix signature made of the first `k` declarations. External
    /// sets are kept in full.
    pub fn scope_of(&self, k: usize) -> Result<Signature, ScopeError> {
        if k > self.decls.len() {
            return Err(ScopeError { index: k, len: self.decls.len() });
        }
        Ok(Signature {
            externals: self.externals.clone(),
            decls: self.decls[..k].to_vec(),
            external_spans: self.external_spans.clone(),
            decl_spans: self.decl_spans.iter().take(k).copied().collect(),
        })
    }

    pub fn decl_span(&self, i: usize) -> Option<Span> {
        self.decl_spans.get(i).copied()
    }
}
