//! Depth-bounded initial algebras.
//!
//! [`build_model`] enumerates every well-typed closed term up to a nesting
//! depth, instantiates every path constructor over the resulting classes,
//! and closes the induced relation under constructor congruence. Because
//! a merge in one sort can make new terms of a dependent sort well typed,
//! generation and quotienting alternate until neither changes anything.
//!
//! Depth is the height of a term: constructors without term arguments
//! have depth 0, and `c(t1, .., tn)` has depth one more than its deepest
//! argument (function tables count through their entries). Canonical
//! representatives are least in the order that compares constructor
//! declaration position first and then the arguments left to right,
//! recursively, with atoms ordered by their position in the external set.

mod dump;
mod union_find;

use std::cmp::Ordering;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::collections::HashMap;
use std::ops::ControlFlow;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use dump::{ClassDump, IndexClassDump, MergeDump, ModelDump, SortDump, MODEL_FORMAT_VERSION};
pub use union_find::UnionFind;

use crate::diagnostic::Diagnostic;
use crate::schema::{Interp, RType, Schema, Value};
use crate::syntax::{IndexExpr, Signature};

pub const DEFAULT_BUDGET: usize = 100_000;
/// Path instances visited per closure pass, per unit of budget.
const PATH_STEPS_PER_TERM: usize = 64;

#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub depth: usize,
    /// Maximum number of interned terms.
    pub budget: usize,
    /// Shuffles the order in which new terms are discovered. The result
    /// does not depend on it.
    pub seed: Option<u64>,
    /// Worker threads for term generation; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { depth: 3, budget: DEFAULT_BUDGET, seed: None, threads: None }
    }
}

impl BuildOptions {
    pub fn depth(depth: usize) -> Self {
        BuildOptions { depth, ..Default::default() }
    }
}

/// A closed term: a point constructor applied to values whose element
/// references are term ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub point: usize,
    pub args: Vec<Value>,
}

#[derive(Clone, Debug)]
struct Stored {
    term: Term,
    sort: usize,
    /// Index values as first computed (term ids, not canonicalised).
    index: Vec<Value>,
    height: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MergeReason {
    /// An instance of a path constructor; the filling refers to term ids.
    Path { path: usize, filling: Vec<Value> },
    Congruence,
}

/// One union performed while building, between two term ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub reason: MergeReason,
    pub round: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexStats {
    pub index: Vec<String>,
    pub classes: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SortStats {
    pub sort: String,
    pub classes: usize,
    pub by_index: Vec<IndexStats>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelStats {
    pub sorts: Vec<SortStats>,
    pub terms: usize,
    pub merges: usize,
    pub rounds: usize,
    /// Terms that are well typed only because of an earlier merge.
    pub retyped: usize,
}

impl ModelStats {
    pub fn classes_of(&self, sort: &str) -> Option<usize> {
        self.sorts.iter().find(|s| s.sort == sort).map(|s| s.classes)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("signature is not well formed ({} diagnostics)", .0.len())]
    Invalid(Vec<Diagnostic>),
    #[error("term budget of {budget} exceeded: {} terms after {} rounds, {} merges", stats.terms, stats.rounds, stats.merges)]
    Budget { budget: usize, stats: ModelStats },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TermError {
    #[error("ill-typed term: {0}")]
    IllTyped(String),
    #[error("term has depth {height}, beyond the model depth {depth}")]
    OverDepth { height: usize, depth: usize },
}

/// An equivalence class of terms.
#[derive(Clone, Debug)]
pub struct Class {
    pub sort: usize,
    /// Least member under the term order.
    pub rep: usize,
    /// Members, sorted by the term order.
    pub members: Vec<usize>,
    /// Index values at class level (element ids are class ids).
    pub index: Vec<Value>,
}

/// A saturated depth-bounded term model. Classes are numbered per sort in
/// the order of their representatives; element values in the [`Interp`]
/// implementation refer to these class ids.
#[derive(Clone, Debug)]
pub struct TermModel {
    schema: Schema,
    depth: usize,
    terms: Vec<Stored>,
    merges: Vec<Merge>,
    rounds: usize,
    saturated: bool,
    class_of: Vec<usize>,
    classes: Vec<Vec<Class>>,
    ops: HashMap<(usize, Vec<Value>), usize>,
    by_index: HashMap<(usize, Vec<Value>), Vec<usize>>,
    retyped: Vec<usize>,
}

/// Builds the depth-bounded initial algebra of `sig`.
pub fn build_model(sig: &Signature, opts: &BuildOptions) -> Result<TermModel, ModelError> {
    let schema = Schema::new(sig).map_err(ModelError::Invalid)?;
    build_from_schema(schema, opts)
}

pub fn build_from_schema(schema: Schema, opts: &BuildOptions) -> Result<TermModel, ModelError> {
    let run = |schema: Schema| {
        let mut b = Builder::new(&schema, opts);
        b.run()?;
        Ok(b.finish(schema.clone()))
    };
    match opts.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().expect("thread pool");
            pool.install(|| run(schema))
        }
        None => run(schema),
    }
}

struct Builder<'s> {
    schema: &'s Schema,
    opts: &'s BuildOptions,
    terms: Vec<Stored>,
    intern: HashMap<Term, usize>,
    uf: UnionFind,
    merges: Vec<Merge>,
    rounds: usize,
    rng: Option<StdRng>,
}

/// Term order on stored terms.
fn term_cmp(terms: &[Stored], a: usize, b: usize) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    shape_cmp(terms, &terms[a].term, &terms[b].term)
}

fn shape_cmp(terms: &[Stored], a: &Term, b: &Term) -> Ordering {
    a.point.cmp(&b.point).then_with(|| {
        for (x, y) in a.args.iter().zip(&b.args) {
            let o = value_cmp(terms, x, y);
            if o != Ordering::Equal {
                return o;
            }
        }
        a.args.len().cmp(&b.args.len())
    })
}

fn value_cmp(terms: &[Stored], x: &Value, y: &Value) -> Ordering {
    match (x, y) {
        (Value::Atom(a), Value::Atom(b)) => a.cmp(b),
        (Value::Elem { sort: s1, id: a }, Value::Elem { sort: s2, id: b }) => {
            s1.cmp(s2).then_with(|| term_cmp(terms, *a as usize, *b as usize))
        }
        (Value::Table(xs), Value::Table(ys)) => {
            for (x, y) in xs.iter().zip(ys) {
                let o = value_cmp(terms, x, y);
                if o != Ordering::Equal {
                    return o;
                }
            }
            xs.len().cmp(&ys.len())
        }
        _ => x.cmp(y),
    }
}

fn height_of(terms: &[Stored], args: &[Value]) -> usize {
    let mut elems = Vec::new();
    args.iter().for_each(|v| v.elems(&mut elems));
    elems.iter().map(|&(_, t)| terms[t].height + 1).max().unwrap_or(0)
}

/// A frozen view of the partition used while enumerating fillings.
struct Snapshot {
    root: Vec<usize>,
    by_index: HashMap<(usize, Vec<Value>), Vec<usize>>,
    ops: HashMap<(usize, Vec<Value>), usize>,
}

impl Snapshot {
    fn canon(&self, v: &Value) -> Value {
        v.map_elems(&mut |_, id| Some(self.root[id])).expect("total")
    }
}

impl Interp for Snapshot {
    fn apply(&self, point: usize, args: &[Value]) -> Option<usize> {
        let key = (point, args.iter().map(|a| self.canon(a)).collect());
        self.ops.get(&key).map(|&t| self.root[t])
    }

    fn elements(&self, sort: usize, index: &[Value]) -> Vec<usize> {
        let key = (sort, index.iter().map(|a| self.canon(a)).collect());
        self.by_index.get(&key).cloned().unwrap_or_default()
    }
}

/// Evaluates index expressions syntactically: a constructor application
/// denotes exactly the stored term with those arguments.
struct RawInterp<'a> {
    intern: &'a HashMap<Term, usize>,
}

impl Interp for RawInterp<'_> {
    fn apply(&self, point: usize, args: &[Value]) -> Option<usize> {
        self.intern.get(&Term { point, args: args.to_vec() }).copied()
    }

    fn elements(&self, _sort: usize, _index: &[Value]) -> Vec<usize> {
        Vec::new()
    }
}

impl<'s> Builder<'s> {
    fn new(schema: &'s Schema, opts: &'s BuildOptions) -> Self {
        Builder {
            schema,
            opts,
            terms: Vec::new(),
            intern: HashMap::new(),
            uf: UnionFind::default(),
            merges: Vec::new(),
            rounds: 0,
            rng: opts.seed.map(StdRng::seed_from_u64),
        }
    }

    fn run(&mut self) -> Result<(), ModelError> {
        loop {
            self.rounds += 1;
            let fresh = self.generate();
            if self.terms.len() + fresh.len() > self.opts.budget {
                let stats = self.partial_stats();
                return Err(ModelError::Budget { budget: self.opts.budget, stats });
            }
            let added = fresh.len();
            for t in fresh {
                self.intern_term(t);
            }
            let merged = self.close()?;
            if added == 0 && merged == 0 {
                return Ok(());
            }
        }
    }

    fn partial_stats(&self) -> ModelStats {
        ModelStats {
            sorts: Vec::new(),
            terms: self.terms.len(),
            merges: self.merges.len(),
            rounds: self.rounds,
            retyped: 0,
        }
    }

    fn snapshot(&mut self, classes_only: bool) -> Snapshot {
        let root = self.uf.roots();
        let canon = |v: &Value| v.map_elems(&mut |_, id| Some(root[id])).expect("total");
        let mut by_index: HashMap<(usize, Vec<Value>), Vec<usize>> = HashMap::new();
        let mut ops = HashMap::new();
        for (id, s) in self.terms.iter().enumerate() {
            let key = (s.term.point, s.term.args.iter().map(canon).collect::<Vec<_>>());
            ops.entry(key).or_insert(id);
            let include = if classes_only { root[id] == id } else { s.height < self.opts.depth };
            if include {
                let key = (s.sort, s.index.iter().map(canon).collect());
                by_index.entry(key).or_default().push(id);
            }
        }
        Snapshot { root, by_index, ops }
    }

    /// Every well-typed term, with arguments of depth below the bound,
    /// that is not stored yet; sorted by the term order.
    fn generate(&mut self) -> Vec<(Term, usize, Vec<Value>)> {
        let snap = self.snapshot(false);
        let schema = self.schema;
        let terms = &self.terms;
        let intern = &self.intern;
        // Stops enumeration as soon as the budget is certain to be exceeded.
        let room = self.opts.budget.saturating_sub(terms.len());
        let found = AtomicUsize::new(0);
        let per_point: Vec<Vec<(Term, usize, Vec<Value>)>> = (0..schema.points.len())
            .into_par_iter()
            .map(|p| {
                let info = &schema.points[p];
                let raw = RawInterp { intern };
                let mut out = Vec::new();
                let _ = schema.for_each_filling(&info.args, &snap, &mut |args| {
                    let term = Term { point: p, args: args.to_vec() };
                    if intern.contains_key(&term) {
                        return ControlFlow::Continue(());
                    }
                    let index = schema
                        .eval_all(&info.target_indices, args, &raw)
                        .or_else(|| schema.eval_all(&info.target_indices, args, &snap));
                    if let Some(index) = index {
                        let height = height_of(terms, args);
                        out.push((term, height, index));
                        if found.fetch_add(1, AtomicOrdering::Relaxed) >= room {
                            return ControlFlow::Break(());
                        }
                    }
                    ControlFlow::Continue(())
                });
                out
            })
            .collect();
        let mut fresh: Vec<_> = per_point.into_iter().flatten().collect();
        if let Some(rng) = self.rng.as_mut() {
            fresh.shuffle(rng);
        }
        fresh.sort_by(|a, b| shape_cmp(terms, &a.0, &b.0));
        fresh.dedup_by(|a, b| a.0 == b.0);
        fresh
    }

    fn intern_term(&mut self, (term, height, index): (Term, usize, Vec<Value>)) -> usize {
        let id = self.uf.push();
        let sort = self.schema.points[term.point].target;
        self.intern.insert(term.clone(), id);
        self.terms.push(Stored { term, sort, index, height });
        id
    }

    fn union(&mut self, a: usize, b: usize, reason: MergeReason) -> bool {
        let terms = &self.terms;
        if self.uf.union(a, b, |x, y| term_cmp(terms, x, y) == Ordering::Less) {
            self.merges.push(Merge { left: a, right: b, reason, round: self.rounds });
            true
        } else {
            false
        }
    }

    /// Instantiates path constructors over classes and closes under
    /// congruence until nothing changes. Returns the number of merges.
    fn close(&mut self) -> Result<usize, ModelError> {
        let before = self.merges.len();
        loop {
            let mut changed = false;
            let snap = self.snapshot(true);
            let mut pending = Vec::new();
            let mut steps = 0usize;
            let limit = self.opts.budget.saturating_mul(PATH_STEPS_PER_TERM);
            for (pi, path) in self.schema.paths.iter().enumerate() {
                let flow = self.schema.for_each_filling(&path.args, &snap, &mut |filling| {
                    steps += 1;
                    if steps > limit {
                        return ControlFlow::Break(());
                    }
                    let l = self.schema.eval(&path.lhs, filling, &snap);
                    let r = self.schema.eval(&path.rhs, filling, &snap);
                    if let (Some(Value::Elem { id: l, .. }), Some(Value::Elem { id: r, .. })) = (l, r) {
                        if l != r {
                            pending.push((l as usize, r as usize, pi, filling.to_vec()));
                        }
                    }
                    ControlFlow::Continue(())
                });
                if flow.is_break() {
                    return Err(ModelError::Budget { budget: self.opts.budget, stats: self.partial_stats() });
                }
            }
            for (l, r, path, filling) in pending {
                changed |= self.union(l, r, MergeReason::Path { path, filling });
            }
            changed |= self.congruence();
            if !changed {
                return Ok(self.merges.len() - before);
            }
        }
    }

    fn congruence(&mut self) -> bool {
        let mut any = false;
        loop {
            let mut seen: HashMap<(usize, Vec<Value>), usize> = HashMap::new();
            let mut pairs = Vec::new();
            for id in 0..self.terms.len() {
                let t = &self.terms[id].term;
                let uf = &mut self.uf;
                let args: Vec<Value> =
                    t.args.iter().map(|v| v.map_elems(&mut |_, x| Some(uf.find(x))).expect("total")).collect();
                match seen.get(&(t.point, args.clone())) {
                    Some(&other) => {
                        if self.uf.find(other) != self.uf.find(id) {
                            pairs.push((other, id));
                        }
                    }
                    None => {
                        seen.insert((t.point, args), id);
                    }
                }
            }
            let mut changed = false;
            for (a, b) in pairs {
                changed |= self.union(a, b, MergeReason::Congruence);
            }
            if !changed {
                return any;
            }
            any = true;
        }
    }

    fn finish(mut self, schema: Schema) -> TermModel {
        let root = self.uf.roots();
        let nsorts = schema.sorts.len();
        let mut members: HashMap<usize, Vec<usize>> = HashMap::new();
        for (id, &r) in root.iter().enumerate() {
            members.entry(r).or_default().push(id);
        }
        let terms = &self.terms;
        let mut per_sort: Vec<Vec<usize>> = vec![Vec::new(); nsorts];
        for &r in members.keys() {
            per_sort[terms[r].sort].push(r);
        }
        let mut class_of = vec![usize::MAX; terms.len()];
        for roots in per_sort.iter_mut() {
            roots.sort_by(|&a, &b| term_cmp(terms, a, b));
            for (cid, r) in roots.iter().enumerate() {
                for &m in &members[r] {
                    class_of[m] = cid;
                }
            }
        }
        let to_class = |v: &Value| v.map_elems(&mut |_, id| Some(class_of[id])).expect("total");
        let mut classes: Vec<Vec<Class>> = vec![Vec::new(); nsorts];
        for (sort, roots) in per_sort.iter().enumerate() {
            for r in roots {
                let mut ms = members[r].clone();
                ms.sort_by(|&a, &b| term_cmp(terms, a, b));
                let rep = ms[0];
                let index = terms[rep].index.iter().map(to_class).collect();
                classes[sort].push(Class { sort, rep, members: ms, index });
            }
        }
        let mut ops = HashMap::new();
        for (id, s) in terms.iter().enumerate() {
            let key = (s.term.point, s.term.args.iter().map(to_class).collect::<Vec<_>>());
            ops.insert(key, class_of[id]);
        }
        let mut by_index: HashMap<(usize, Vec<Value>), Vec<usize>> = HashMap::new();
        for (sort, cs) in classes.iter().enumerate() {
            for (cid, c) in cs.iter().enumerate() {
                by_index.entry((sort, c.index.clone())).or_default().push(cid);
            }
        }
        let raw = RawInterp { intern: &self.intern };
        let mut retyped = Vec::new();
        for (id, s) in terms.iter().enumerate() {
            if !syntactically_typed(&schema, terms, &raw, s) {
                retyped.push(id);
            }
        }
        TermModel {
            schema,
            depth: self.opts.depth,
            terms: self.terms,
            merges: self.merges,
            rounds: self.rounds,
            saturated: true,
            class_of,
            classes,
            ops,
            by_index,
            retyped,
        }
    }
}

/// Whether every sort-valued argument of the term carries exactly the
/// index its telescope demands, with no appeal to merged classes.
fn syntactically_typed(schema: &Schema, terms: &[Stored], raw: &RawInterp, s: &Stored) -> bool {
    let info = &schema.points[s.term.point];
    let args = &s.term.args;
    for (i, param) in info.args.iter().enumerate() {
        match (&param.ty, &args[i]) {
            (RType::Sort(_, idx), Value::Elem { id, .. }) => {
                match schema.eval_all(idx, &args[..i], raw) {
                    Some(expected) if expected == terms[*id as usize].index => {}
                    _ => return false,
                }
            }
            (RType::Function { indices, .. }, Value::Table(entries)) => {
                for (a, e) in entries.iter().enumerate() {
                    let mut env = args[..i].to_vec();
                    env.push(Value::Atom(a as u32));
                    let Value::Elem { id, .. } = e else { return false };
                    match schema.eval_all(indices, &env, raw) {
                        Some(expected) if expected == terms[*id as usize].index => {}
                        _ => return false,
                    }
                }
            }
            _ => {}
        }
    }
    true
}

impl Interp for TermModel {
    fn apply(&self, point: usize, args: &[Value]) -> Option<usize> {
        self.ops.get(&(point, args.to_vec())).copied()
    }

    fn elements(&self, sort: usize, index: &[Value]) -> Vec<usize> {
        self.by_index.get(&(sort, index.to_vec())).cloned().unwrap_or_default()
    }
}

impl TermModel {
    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn signature(&self) -> &Signature {
        &self.schema.sig
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn saturated(&self) -> bool {
        self.saturated
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn term(&self, id: usize) -> &Term {
        &self.terms[id].term
    }

    pub fn term_sort(&self, id: usize) -> usize {
        self.terms[id].sort
    }

    pub fn term_height(&self, id: usize) -> usize {
        self.terms[id].height
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Terms whose typing needed a merged index class.
    pub fn retyped(&self) -> &[usize] {
        &self.retyped
    }

    pub fn classes(&self, sort: usize) -> &[Class] {
        &self.classes[sort]
    }

    pub fn class(&self, sort: usize, id: usize) -> &Class {
        &self.classes[sort][id]
    }

    pub fn class_count(&self, sort: usize) -> usize {
        self.classes[sort].len()
    }

    /// The class id (within its sort) of a stored term.
    pub fn class_of_term(&self, term: usize) -> usize {
        self.class_of[term]
    }

    /// Index classes of a sort, in first-occurrence order, with the classes
    /// at each.
    pub fn index_classes(&self, sort: usize) -> Vec<(Vec<Value>, Vec<usize>)> {
        let mut out: Vec<(Vec<Value>, Vec<usize>)> = Vec::new();
        for (cid, c) in self.classes[sort].iter().enumerate() {
            match out.iter_mut().find(|(idx, _)| *idx == c.index) {
                Some((_, cs)) => cs.push(cid),
                None => out.push((c.index.clone(), vec![cid])),
            }
        }
        out
    }

    /// Renders a stored term in surface syntax.
    pub fn show_term(&self, id: usize) -> String {
        crate::parser::print_expr(&self.schema.sig, &self.term_expr(id))
    }

    pub fn term_expr(&self, id: usize) -> IndexExpr {
        let t = &self.terms[id].term;
        let info = &self.schema.points[t.point];
        let args = info.args.iter().zip(&t.args).map(|(p, v)| self.value_expr(&p.ty, v)).collect();
        IndexExpr::Apply { ctor: info.name.clone(), args }
    }

    fn value_expr(&self, ty: &RType, v: &Value) -> IndexExpr {
        match (ty, v) {
            (RType::Atom(s), Value::Atom(a)) => {
                let e = &self.schema.externals[*s];
                IndexExpr::atom(e.name.clone(), e.elements[*a as usize].clone())
            }
            (_, Value::Elem { id, .. }) => self.term_expr(*id as usize),
            (RType::Perm(s), Value::Table(vs)) => {
                let e = &self.schema.externals[*s];
                IndexExpr::Table {
                    domain: e.name.clone(),
                    entries: vs.iter().map(|x| self.value_expr(&RType::Atom(*s), x)).collect(),
                }
            }
            (RType::Function { domain, sort, .. }, Value::Table(vs)) => IndexExpr::Table {
                domain: self.schema.externals[*domain].name.clone(),
                entries: vs.iter().map(|x| self.value_expr(&RType::Sort(*sort, Vec::new()), x)).collect(),
            },
            _ => unreachable!("value does not match its type"),
        }
    }

    /// The canonical representative of a class, rendered.
    pub fn show_class(&self, sort: usize, id: usize) -> String {
        self.show_term(self.classes[sort][id].rep)
    }

    /// Renders a class-level value of the given type.
    pub fn show_value(&self, ty: &RType, v: &Value) -> String {
        self.schema.show_value(ty, v, &|s, c| self.show_class(s, c))
    }

    /// Renders class-level index values of a sort.
    pub fn show_index(&self, sort: usize, index: &[Value]) -> Vec<String> {
        self.schema.sorts[sort]
            .indices
            .iter()
            .zip(index)
            .map(|(p, v)| match v {
                Value::Atom(_) => self.schema.show_value(&p.ty, v, &|_, _| String::new()),
                Value::Elem { sort, id } => self.show_class(*sort as usize, *id as usize),
                Value::Table(_) => self.show_value(&p.ty, v),
            })
            .collect()
    }

    /// The class of a closed term given in surface syntax.
    pub fn class_of(&self, expr: &IndexExpr) -> Result<Value, TermError> {
        let height = expr_height(expr);
        if height > self.depth {
            return Err(TermError::OverDepth { height, depth: self.depth });
        }
        self.eval_closed(expr)
    }

    fn eval_closed(&self, expr: &IndexExpr) -> Result<Value, TermError> {
        match expr {
            IndexExpr::Apply { ctor, args } => {
                let p = self
                    .schema
                    .point_id(ctor)
                    .ok_or_else(|| TermError::IllTyped(format!("`{ctor}` is not a point constructor")))?;
                let info = &self.schema.points[p];
                if info.args.len() != args.len() {
                    return Err(TermError::IllTyped(format!("`{ctor}` expects {} arguments", info.args.len())));
                }
                let mut env: Vec<Value> = Vec::with_capacity(args.len());
                for (param, arg) in info.args.iter().zip(args) {
                    let v = match (&param.ty, arg) {
                        (RType::Function { .. }, IndexExpr::Table { entries, .. }) => {
                            Value::Table(entries.iter().map(|e| self.eval_closed(e)).collect::<Result<_, _>>()?)
                        }
                        (RType::Perm(_), IndexExpr::Table { entries, .. }) => {
                            Value::Table(entries.iter().map(|e| self.eval_closed(e)).collect::<Result<_, _>>()?)
                        }
                        _ => self.eval_closed(arg)?,
                    };
                    let fits = match &param.ty {
                        RType::Function { .. } => self.table_fits(&param.ty, &env, &v),
                        ty => self.schema.candidates(ty, &mut env, self).contains(&v),
                    };
                    if !fits {
                        return Err(TermError::IllTyped(format!(
                            "argument `{}` of `{ctor}` does not have the expected type",
                            param.name
                        )));
                    }
                    env.push(v);
                }
                // Well typed and within the depth bound, so it is stored.
                let id = self.apply(p, &env).ok_or_else(|| {
                    TermError::IllTyped(format!("`{ctor}` application not found in the model"))
                })?;
                Ok(Value::elem(info.target, id))
            }
            IndexExpr::Atom { set, elem } => {
                let s = self.schema.ext_id(set);
                let k = self.schema.externals[s]
                    .elements
                    .iter()
                    .position(|e| e == elem)
                    .ok_or_else(|| TermError::IllTyped(format!("`{elem}` is not in `{set}`")))?;
                Ok(Value::Atom(k as u32))
            }
            _ => Err(TermError::IllTyped("only constructor applications and atoms are closed terms".into())),
        }
    }

    fn table_fits(&self, ty: &RType, env: &[Value], v: &Value) -> bool {
        let (RType::Function { sort, indices, .. }, Value::Table(entries)) = (ty, v) else {
            return false;
        };
        entries.iter().enumerate().all(|(a, e)| {
            let mut env = env.to_vec();
            env.push(Value::Atom(a as u32));
            match (self.schema.eval_all(indices, &env, self), e) {
                (Some(iv), Value::Elem { sort: s, id }) => {
                    *s as usize == *sort && self.classes[*sort][*id as usize].index == iv
                }
                _ => false,
            }
        })
    }

    pub fn stats(&self) -> ModelStats {
        let sorts = self
            .schema
            .sorts
            .iter()
            .enumerate()
            .map(|(s, info)| SortStats {
                sort: info.name.clone(),
                classes: self.classes[s].len(),
                by_index: self
                    .index_classes(s)
                    .into_iter()
                    .map(|(idx, cs)| IndexStats { index: self.show_index(s, &idx), classes: cs.len() })
                    .collect(),
            })
            .collect();
        ModelStats {
            sorts,
            terms: self.terms.len(),
            merges: self.merges.len(),
            rounds: self.rounds,
            retyped: self.retyped.len(),
        }
    }

    /// Checks the structural invariants of the partition: merged terms
    /// share sort and index class, the partition is closed under
    /// congruence, and every term is within the depth bound.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut out = Vec::new();
        let to_class = |v: &Value| v.map_elems(&mut |_, id| Some(self.class_of[id])).expect("total");
        let mut sig_seen: HashMap<(usize, Vec<Value>), (usize, usize)> = HashMap::new();
        for (id, s) in self.terms.iter().enumerate() {
            if s.height > self.depth {
                out.push(format!("term {} exceeds the depth bound", self.show_term(id)));
            }
            let class = &self.classes[s.sort][self.class_of[id]];
            let idx: Vec<Value> = s.index.iter().map(to_class).collect();
            if idx != class.index {
                out.push(format!("term {} has a different index class than its class", self.show_term(id)));
            }
            let key = (s.term.point, s.term.args.iter().map(to_class).collect::<Vec<_>>());
            match sig_seen.get(&key) {
                Some(&(other, sort)) => {
                    if sort != s.sort || self.class_of[other] != self.class_of[id] {
                        out.push(format!(
                            "congruent terms {} and {} are in different classes",
                            self.show_term(other),
                            self.show_term(id)
                        ));
                    }
                }
                None => {
                    sig_seen.insert(key, (id, s.sort));
                }
            }
        }
        out
    }

    pub fn dump(&self) -> ModelDump {
        dump::dump(self)
    }
}

/// Height of a closed surface term.
pub fn expr_height(e: &IndexExpr) -> usize {
    match e {
        IndexExpr::Apply { args, .. } => args.iter().flat_map(term_heights).max().map_or(0, |h| h + 1),
        _ => 0,
    }
}

fn term_heights(e: &IndexExpr) -> Vec<usize> {
    match e {
        IndexExpr::Apply { .. } => vec![expr_height(e)],
        IndexExpr::Table { entries, .. } => entries.iter().flat_map(term_heights).collect(),
        _ => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;

    fn classes(sig: &Signature, depth: usize) -> Vec<usize> {
        let m = build_model(sig, &BuildOptions::depth(depth)).unwrap();
        assert!(m.check_invariants().is_empty());
        (0..m.schema().sorts.len()).map(|s| m.class_count(s)).collect()
    }

    #[test]
    fn interval_collapses() {
        assert_eq!(classes(&bundled::interval(), 1), vec![1]);
    }

    #[test]
    fn nat_is_a_chain() {
        for d in 0..6 {
            assert_eq!(classes(&bundled::nat(), d), vec![d + 1]);
        }
    }

    #[test]
    fn seed_does_not_matter() {
        let sig = bundled::trees2();
        let a = build_model(&sig, &BuildOptions { seed: Some(1), ..BuildOptions::depth(3) }).unwrap();
        let b = build_model(&sig, &BuildOptions { seed: Some(99), threads: Some(1), ..BuildOptions::depth(3) }).unwrap();
        assert_eq!(a.dump(), b.dump());
    }

    #[test]
    fn budget_is_reported() {
        let err = build_model(&bundled::trees2(), &BuildOptions { budget: 10, ..BuildOptions::depth(4) }).unwrap_err();
        assert!(matches!(err, ModelError::Budget { budget: 10, .. }));
    }

    #[test]
    fn scratch() {
        for d in 0..4 {
            let m = build_model(&bundled::trees2(), &BuildOptions::depth(d)).unwrap();
            eprintln!("trees d={d} {:?}", m.stats());
        }
        for d in 0..7 {
            let m = build_model(&bundled::con_ty(), &BuildOptions { budget: 2_000_000, ..BuildOptions::depth(d) });
            match m {
                Ok(m) => eprintln!("conty d={d} terms={} merges={} retyped={} classes={:?}", m.term_count(), m.merges().len(), m.retyped().len(), (0..2).map(|s| m.class_count(s)).collect::<Vec<_>>()),
                Err(e) => eprintln!("conty d={d} {e}"),
            }
        }
    }
}
