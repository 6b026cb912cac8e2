//! A compiled form of an accepted signature: names are resolved to dense
//! indices and telescope variables to positions, so that index
//! expressions can be evaluated quickly in any interpretation.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::check::validate;
use crate::diagnostic::Diagnostic;
use crate::syntax::{Decl, Entry, IndexExpr, ParamType, Signature, SortRef};

/// A value inhabiting a telescope entry: an atom of an external set, an
/// element of a sort, or a table (a function out of an external set, or a
/// permutation given as a table of atoms).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Value {
    Atom(u32),
    Elem { sort: u32, id: u32 },
    Table(Vec<Value>),
}

impl Value {
    pub fn elem(sort: usize, id: usize) -> Value {
        Value::Elem { sort: sort as u32, id: id as u32 }
    }

    pub fn as_elem(&self) -> Option<(usize, usize)> {
        match self {
            Value::Elem { sort, id } => Some((*sort as usize, *id as usize)),
            _ => None,
        }
    }

    /// Rewrites every element reference with `f`.
    pub fn map_elems(&self, f: &mut dyn FnMut(usize, usize) -> Option<usize>) -> Option<Value> {
        Some(match self {
            Value::Atom(a) => Value::Atom(*a),
            Value::Elem { sort, id } => Value::elem(*sort as usize, f(*sort as usize, *id as usize)?),
            Value::Table(vs) => Value::Table(vs.iter().map(|v| v.map_elems(f)).collect::<Option<_>>()?),
        })
    }

    /// Element references occurring in the value, in order.
    pub fn elems(&self, out: &mut Vec<(usize, usize)>) {
        match self {
            Value::Atom(_) => {}
            Value::Elem { sort, id } => out.push((*sort as usize, *id as usize)),
            Value::Table(vs) => vs.iter().for_each(|v| v.elems(out)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RExpr {
    Var(usize),
    Atom(u32),
    Apply(usize, Vec<RExpr>),
    Table(Vec<RExpr>),
    At(Box<RExpr>, Box<RExpr>),
    Compose(Box<RExpr>, Box<RExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RType {
    Atom(usize),
    Perm(usize),
    Sort(usize, Vec<RExpr>),
    /// The codomain indices may refer to the domain element through the
    /// variable slot of the entry itself.
    Function { domain: usize, sort: usize, indices: Vec<RExpr> },
}

impl RType {
    pub fn sort(&self) -> Option<usize> {
        match self {
            RType::Sort(s, _) | RType::Function { sort: s, .. } => Some(*s),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RParam {
    pub name: String,
    pub ty: RType,
}

#[derive(Clone, Debug)]
pub struct SortInfo {
    pub name: String,
    pub decl: usize,
    pub indices: Vec<RParam>,
}

#[derive(Clone, Debug)]
pub struct PointInfo {
    pub name: String,
    pub decl: usize,
    pub args: Vec<RParam>,
    pub target: usize,
    pub target_indices: Vec<RExpr>,
}

#[derive(Clone, Debug)]
pub struct PathInfo {
    pub name: String,
    pub decl: usize,
    pub args: Vec<RParam>,
    pub sort: usize,
    pub indices: Vec<RExpr>,
    pub lhs: RExpr,
    pub rhs: RExpr,
}

#[derive(Clone, Debug)]
pub struct ExtInfo {
    pub name: String,
    pub elements: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Schema {
    pub sig: Signature,
    pub externals: Vec<ExtInfo>,
    /// All bijections of each external set, lexicographically ordered.
    pub perms: Vec<Vec<Vec<u32>>>,
    pub sorts: Vec<SortInfo>,
    pub points: Vec<PointInfo>,
    pub paths: Vec<PathInfo>,
}

/// Every bijection of `{0, .., n-1}` as a table, in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<u32>> {
    fn go(n: usize, cur: &mut Vec<u32>, used: &mut Vec<bool>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for k in 0..n {
            if !used[k] {
                used[k] = true;
                cur.push(k as u32);
                go(n, cur, used, out);
                cur.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(n, &mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

impl Schema {
    /// Validates and compiles a signature.
    pub fn new(sig: &Signature) -> Result<Schema, Vec<Diagnostic>> {
        let diags = validate(sig);
        if diags.iter().any(Diagnostic::is_error) {
            return Err(diags);
        }
        let externals: Vec<ExtInfo> =
            sig.externals.iter().map(|e| ExtInfo { name: e.name.clone(), elements: e.elements.clone() }).collect();
        let perms = externals.iter().map(|e| permutations(e.elements.len())).collect();
        let mut schema =
            Schema { sig: sig.clone(), externals, perms, sorts: Vec::new(), points: Vec::new(), paths: Vec::new() };
        for (i, decl) in sig.decls.iter().enumerate() {
            match decl {
                Decl::Sort(s) => {
                    let indices = schema.telescope(&s.indices);
                    schema.sorts.push(SortInfo { name: s.name.clone(), decl: i, indices });
                }
                Decl::Point(p) => {
                    let args = schema.telescope(&p.args);
                    let scope = names(&p.args);
                    let target = schema.sort_id(&p.target.sort);
                    let target_indices = p.target.indices.iter().map(|e| schema.expr(e, &scope)).collect();
                    schema.points.push(PointInfo { name: p.name.clone(), decl: i, args, target, target_indices });
                }
                Decl::Path(p) => {
                    let args = schema.telescope(&p.args);
                    let scope = names(&p.args);
                    let sort = schema.sort_id(&p.at.sort);
                    let indices = p.at.indices.iter().map(|e| schema.expr(e, &scope)).collect();
                    let lhs = schema.expr(&p.lhs, &scope);
                    let rhs = schema.expr(&p.rhs, &scope);
                    schema.paths.push(PathInfo { name: p.name.clone(), decl: i, args, sort, indices, lhs, rhs });
                }
            }
        }
        Ok(schema)
    }

    pub fn sort_id(&self, name: &str) -> usize {
        self.sorts.iter().position(|s| s.name == name).expect("validated")
    }

    pub fn point_id(&self, name: &str) -> Option<usize> {
        self.points.iter().position(|p| p.name == name)
    }

    pub fn ext_id(&self, name: &str) -> usize {
        self.externals.iter().position(|e| e.name == name).expect("validated")
    }

    fn telescope(&self, entries: &[Entry]) -> Vec<RParam> {
        let mut scope: Vec<String> = Vec::new();
        let mut out = Vec::new();
        for e in entries {
            let ty = match &e.ty {
                ParamType::External { set } => RType::Atom(self.ext_id(set)),
                ParamType::Perm { set } => RType::Perm(self.ext_id(set)),
                ParamType::Sort { target } => {
                    let (s, idx) = self.sortref(target, &scope);
                    RType::Sort(s, idx)
                }
                ParamType::Function { domain, binder, codomain } => {
                    let mut inner = scope.clone();
                    // The binder occupies the slot the function itself will take.
                    inner.push(binder.clone().unwrap_or_default());
                    let (s, idx) = self.sortref(codomain, &inner);
                    RType::Function { domain: self.ext_id(domain), sort: s, indices: idx }
                }
            };
            scope.push(e.name.clone());
            out.push(RParam { name: e.name.clone(), ty });
        }
        out
    }

    fn sortref(&self, r: &SortRef, scope: &[String]) -> (usize, Vec<RExpr>) {
        (self.sort_id(&r.sort), r.indices.iter().map(|e| self.expr(e, scope)).collect())
    }

    fn expr(&self, e: &IndexExpr, scope: &[String]) -> RExpr {
        match e {
            IndexExpr::Var { name } => {
                RExpr::Var(scope.iter().rposition(|n| n == name).expect("validated: bound variable"))
            }
            IndexExpr::Atom { set, elem } => {
                let ext = &self.externals[self.ext_id(set)];
                RExpr::Atom(ext.elements.iter().position(|x| x == elem).expect("validated") as u32)
            }
            IndexExpr::Apply { ctor, args } => RExpr::Apply(
                self.point_id(ctor).expect("validated"),
                args.iter().map(|a| self.expr(a, scope)).collect(),
            ),
            IndexExpr::Table { entries, .. } => RExpr::Table(entries.iter().map(|a| self.expr(a, scope)).collect()),
            IndexExpr::At { fun, arg } => RExpr::At(Box::new(self.expr(fun, scope)), Box::new(self.expr(arg, scope))),
            IndexExpr::Compose { fun, perm } => {
                RExpr::Compose(Box::new(self.expr(fun, scope)), Box::new(self.expr(perm, scope)))
            }
        }
    }

    pub fn domain_size(&self, ext: usize) -> usize {
        self.externals[ext].elements.len()
    }

    /// Evaluates an index expression. `None` means some constructor
    /// application is undefined in the interpretation.
    pub fn eval(&self, e: &RExpr, env: &[Value], interp: &dyn Interp) -> Option<Value> {
        Some(match e {
            RExpr::Var(i) => env[*i].clone(),
            RExpr::Atom(a) => Value::Atom(*a),
            RExpr::Apply(p, args) => {
                let vals = args.iter().map(|a| self.eval(a, env, interp)).collect::<Option<Vec<_>>>()?;
                Value::elem(self.points[*p].target, interp.apply(*p, &vals)?)
            }
            RExpr::Table(entries) => {
                Value::Table(entries.iter().map(|a| self.eval(a, env, interp)).collect::<Option<_>>()?)
            }
            RExpr::At(f, a) => match (self.eval(f, env, interp)?, self.eval(a, env, interp)?) {
                (Value::Table(vs), Value::Atom(k)) => vs[k as usize].clone(),
                _ => return None,
            },
            RExpr::Compose(f, p) => match (self.eval(f, env, interp)?, self.eval(p, env, interp)?) {
                (Value::Table(vs), Value::Table(perm)) => Value::Table(
                    perm.iter()
                        .map(|k| match k {
                            Value::Atom(k) => vs[*k as usize].clone(),
                            _ => unreachable!("permutations are tables of atoms"),
                        })
                        .collect(),
                ),
                _ => return None,
            },
        })
    }

    pub fn eval_all(&self, es: &[RExpr], env: &[Value], interp: &dyn Interp) -> Option<Vec<Value>> {
        es.iter().map(|e| self.eval(e, env, interp)).collect()
    }

    /// Candidates for one telescope entry given the values of the entries
    /// before it.
    pub fn candidates(&self, ty: &RType, env: &mut Vec<Value>, interp: &dyn Interp) -> Vec<Value> {
        match ty {
            RType::Atom(s) => (0..self.domain_size(*s) as u32).map(Value::Atom).collect(),
            RType::Perm(s) => self.perms[*s]
                .iter()
                .map(|p| Value::Table(p.iter().map(|&k| Value::Atom(k)).collect()))
                .collect(),
            RType::Sort(s, idx) => match self.eval_all(idx, env, interp) {
                Some(iv) => interp.elements(*s, &iv).into_iter().map(|id| Value::elem(*s, id)).collect(),
                None => Vec::new(),
            },
            RType::Function { .. } => match self.table_columns(ty, env, interp) {
                Some(columns) => cartesian(&columns).into_iter().map(Value::Table).collect(),
                None => Vec::new(),
            },
        }
    }

    /// Per-entry choices for a function table; `None` when some entry has
    /// no candidate.
    fn table_columns(&self, ty: &RType, env: &mut Vec<Value>, interp: &dyn Interp) -> Option<Vec<Vec<Value>>> {
        let RType::Function { domain, sort, indices } = ty else { return None };
        let n = self.domain_size(*domain);
        let mut columns = Vec::with_capacity(n);
        for a in 0..n {
            env.push(Value::Atom(a as u32));
            let iv = self.eval_all(indices, env, interp);
            env.pop();
            let col: Vec<Value> = interp.elements(*sort, &iv?).into_iter().map(|id| Value::elem(*sort, id)).collect();
            if col.is_empty() {
                return None;
            }
            columns.push(col);
        }
        Some(columns)
    }

    /// Enumerates every well-typed filling of `params` in `interp`, in a
    /// deterministic order. The callback may stop the enumeration.
    pub fn for_each_filling(
        &self,
        params: &[RParam],
        interp: &dyn Interp,
        f: &mut dyn FnMut(&[Value]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let mut env = Vec::with_capacity(params.len());
        self.fill(params, interp, &mut env, f)
    }

    fn fill(
        &self,
        params: &[RParam],
        interp: &dyn Interp,
        env: &mut Vec<Value>,
        f: &mut dyn FnMut(&[Value]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if env.len() == params.len() {
            return f(env);
        }
        let ty = &params[env.len()].ty;
        if let RType::Function { .. } = ty {
            // Tables are enumerated in place; their number grows too fast
            // to collect.
            let Some(columns) = self.table_columns(ty, env, interp) else { return ControlFlow::Continue(()) };
            let mut pos = vec![0usize; columns.len()];
            loop {
                env.push(Value::Table(pos.iter().zip(&columns).map(|(&i, c)| c[i].clone()).collect()));
                let r = self.fill(params, interp, env, f);
                env.pop();
                r?;
                // Odometer step, last entry fastest, matching `cartesian`.
                let mut k = columns.len();
                loop {
                    if k == 0 {
                        return ControlFlow::Continue(());
                    }
                    k -= 1;
                    pos[k] += 1;
                    if pos[k] < columns[k].len() {
                        break;
                    }
                    pos[k] = 0;
                }
            }
        }
        let cands = self.candidates(ty, env, interp);
        for c in cands {
            env.push(c);
            let r = self.fill(params, interp, env, f);
            env.pop();
            r?;
        }
        ControlFlow::Continue(())
    }

    /// Collects every filling of `params`.
    pub fn fillings(&self, params: &[RParam], interp: &dyn Interp) -> Vec<Vec<Value>> {
        let mut out = Vec::new();
        let _ = self.for_each_filling(params, interp, &mut |vs| {
            out.push(vs.to_vec());
            ControlFlow::Continue(())
        });
        out
    }

    /// Renders a value using the external-set labels; elements are named
    /// by `elem`.
    pub fn show_value(&self, ty: &RType, v: &Value, elem: &dyn Fn(usize, usize) -> String) -> String {
        match (ty, v) {
            (RType::Atom(s), Value::Atom(a)) => self.externals[*s].elements[*a as usize].clone(),
            (RType::Perm(s), Value::Table(vs)) | (RType::Function { domain: s, .. }, Value::Table(vs)) => {
                let labels = &self.externals[*s].elements;
                let parts: Vec<String> = vs
                    .iter()
                    .enumerate()
                    .map(|(k, x)| {
                        let inner = match x {
                            Value::Atom(a) => labels[*a as usize].clone(),
                            Value::Elem { sort, id } => elem(*sort as usize, *id as usize),
                            Value::Table(_) => format!("{x:?}"),
                        };
                        format!("{} => {inner}", labels[k])
                    })
                    .collect();
                format!("{{{}}}", parts.join(", "))
            }
            (_, Value::Elem { sort, id }) => elem(*sort as usize, *id as usize),
            _ => format!("{v:?}"),
        }
    }
}

fn names(entries: &[Entry]) -> Vec<String> {
    entries.iter().map(|e| e.name.clone()).collect()
}

pub(crate) fn cartesian(columns: &[Vec<Value>]) -> Vec<Vec<Value>> {
    let mut out: Vec<Vec<Value>> = vec![Vec::new()];
    for col in columns {
        let mut next = Vec::with_capacity(out.len() * col.len());
        for prefix in &out {
            for c in col {
                let mut row = prefix.clone();
                row.push(c.clone());
                next.push(row);
            }
        }
        out = next;
    }
    out
}

/// An interpretation of the point constructors: the operations of an
/// algebra, possibly partial.
pub trait Interp {
    /// Applies a point constructor; `None` when undefined.
    fn apply(&self, point: usize, args: &[Value]) -> Option<usize>;
    /// Elements of `sort` whose index tuple equals `index`.
    fn elements(&self, sort: usize, index: &[Value]) -> Vec<usize>;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_counts() {
        assert_eq!(permutations(0), vec![Vec::<u32>::new()]);
        assert_eq!(permutations(2), vec![vec![0, 1], vec![1, 0]]);
        // brute force: all 27 tables on 3 elements, keep the bijective ones
        let mut brute = Vec::new();
        for a in 0..3u32 {
            for b in 0..3u32 {
                for c in 0..3u32 {
                    let t = vec![a, b, c];
                    let mut s = t.clone();
                    s.sort();
                    s.dedup();
                    if s.len() == 3 {
                        brute.push(t);
                    }
                }
            }
        }
        assert_eq!(brute.len(), 6);
        assert_eq!(permutations(3), brute);
    }
}
