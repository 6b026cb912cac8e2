//! Finite algebras and the constructions on them.
//!
//! A [`FiniteAlgebra`] lists, per sort, its elements together with their
//! index values, and per point constructor a table of operations. Element
//! references inside index values and operation arguments are carrier
//! positions. A term model is viewed as a *partial* finite algebra whose
//! operations are undefined beyond the depth bound; checks then quantify
//! only over the defined part.

mod doc;
mod fibred;
mod homs;
mod limits;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use doc::{AlgebraDoc, DocError, ElementDoc, EntryDoc, ALGEBRA_FORMAT_VERSION};
pub use fibred::{
    find_section, total_algebra, FibredAlgebra, FibredDoc, FibredError, MethodDoc, MotiveDoc, Section, TotalElem,
};
pub use homs::{
    check_homomorphism, enumerate_homs, fold, show_hom, uniqueness_check, FoldError, HomBudget, UniquenessReport,
};
pub use limits::{equaliser, family_limit, product, terminal, Diagram, Equaliser, Family, FamilyMap, LimitFamily, Product};

use crate::model::TermModel;
use crate::schema::{Interp, RType, Schema, Value};

/// Default cap on the number of telescope fillings a check may visit.
pub const DEFAULT_FILL_BUDGET: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Element {
    pub label: String,
    pub index: Vec<Value>,
}

#[derive(Clone, Debug)]
pub struct FiniteAlgebra {
    schema: Arc<Schema>,
    carriers: Vec<Vec<Element>>,
    ops: Vec<BTreeMap<Vec<Value>, usize>>,
    partial: bool,
    by_index: HashMap<(usize, Vec<Value>), Vec<usize>>,
}

impl PartialEq for FiniteAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.schema.sig == other.schema.sig
            && self.carriers == other.carriers
            && self.ops == other.ops
            && self.partial == other.partial
    }
}

impl Interp for FiniteAlgebra {
    fn apply(&self, point: usize, args: &[Value]) -> Option<usize> {
        self.ops[point].get(args).copied()
    }

    fn elements(&self, sort: usize, index: &[Value]) -> Vec<usize> {
        self.by_index.get(&(sort, index.to_vec())).cloned().unwrap_or_default()
    }
}

impl FiniteAlgebra {
    pub fn new(
        schema: Arc<Schema>,
        carriers: Vec<Vec<Element>>,
        ops: Vec<BTreeMap<Vec<Value>, usize>>,
        partial: bool,
    ) -> Self {
        assert_eq!(carriers.len(), schema.sorts.len(), "one carrier per sort");
        assert_eq!(ops.len(), schema.points.len(), "one table per point constructor");
        let mut by_index: HashMap<(usize, Vec<Value>), Vec<usize>> = HashMap::new();
        for (s, c) in carriers.iter().enumerate() {
            for (id, e) in c.iter().enumerate() {
                by_index.entry((s, e.index.clone())).or_default().push(id);
            }
        }
        FiniteAlgebra { schema, carriers, ops, partial, by_index }
    }

    /// Builds a total algebra by filling every operation from `op`, point
    /// by point in declaration order (later telescopes may evaluate
    /// earlier operations). `op` returns the target element, or `None` to
    /// leave the entry undefined, which `verify_algebra` reports.
    pub fn tabulate(
        schema: Arc<Schema>,
        carriers: Vec<Vec<Element>>,
        mut op: impl FnMut(usize, &[Value]) -> Option<usize>,
    ) -> Self {
        let empty = vec![BTreeMap::new(); schema.points.len()];
        let mut alg = FiniteAlgebra::new(schema.clone(), carriers, empty, false);
        for p in 0..schema.points.len() {
            let fillings = schema.fillings(&schema.points[p].args, &alg);
            for args in fillings {
                if let Some(r) = op(p, &args) {
                    alg.ops[p].insert(args, r);
                }
            }
        }
        alg
    }

    /// The term model as a partial algebra over its classes.
    pub fn from_model(m: &TermModel) -> Self {
        let schema = Arc::new(m.schema().clone());
        let carriers = (0..schema.sorts.len())
            .map(|s| {
                m.classes(s)
                    .iter()
                    .enumerate()
                    .map(|(c, class)| Element { label: m.show_class(s, c), index: class.index.clone() })
                    .collect()
            })
            .collect();
        let mut ops = vec![BTreeMap::new(); schema.points.len()];
        for t in 0..m.term_count() {
            let term = m.term(t);
            let args: Vec<Value> = term
                .args
                .iter()
                .map(|v| v.map_elems(&mut |_, id| Some(m.class_of_term(id))).expect("total"))
                .collect();
            ops[term.point].insert(args, m.class_of_term(t));
        }
        FiniteAlgebra::new(schema, carriers, ops, true)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn schema_arc(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn is_partial(&self) -> bool {
        self.partial
    }

    pub fn carrier(&self, sort: usize) -> &[Element] {
        &self.carriers[sort]
    }

    pub fn carriers(&self) -> &[Vec<Element>] {
        &self.carriers
    }

    pub fn size(&self, sort: usize) -> usize {
        self.carriers[sort].len()
    }

    pub fn ops(&self, point: usize) -> &BTreeMap<Vec<Value>, usize> {
        &self.ops[point]
    }

    pub fn element(&self, sort: usize, id: usize) -> &Element {
        &self.carriers[sort][id]
    }

    pub fn find(&self, sort: usize, label: &str) -> Option<usize> {
        self.carriers[sort].iter().position(|e| e.label == label)
    }

    pub fn label(&self, sort: usize, id: usize) -> &str {
        &self.carriers[sort][id].label
    }

    pub fn show_value(&self, ty: &RType, v: &Value) -> String {
        self.schema.show_value(ty, v, &|s, id| self.carriers[s][id].label.clone())
    }

    pub fn show_args(&self, params: &[crate::schema::RParam], args: &[Value]) -> Vec<String> {
        params.iter().zip(args).map(|(p, v)| self.show_value(&p.ty, v)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub constructor: String,
    /// The offending filling, rendered.
    pub filling: Vec<String>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at ({}): {}", self.constructor, self.filling.join(", "), self.detail)
    }
}

/// Checks that operation tables are well typed and (for total algebras)
/// total, and that every path equation holds at every filling.
pub fn verify_algebra(a: &FiniteAlgebra) -> Vec<Violation> {
    verify_algebra_with(a, DEFAULT_FILL_BUDGET)
}

pub fn verify_algebra_with(a: &FiniteAlgebra, budget: usize) -> Vec<Violation> {
    let schema = a.schema.clone();
    let mut out = Vec::new();
    let mut visited = 0usize;
    let mut over = |name: &str, out: &mut Vec<Violation>| {
        visited += 1;
        if visited > budget {
            out.push(Violation {
                constructor: name.into(),
                filling: Vec::new(),
                detail: format!("enumeration budget of {budget} fillings exceeded"),
            });
            return true;
        }
        false
    };

    for (s, info) in schema.sorts.iter().enumerate() {
        let valid: Vec<Vec<Value>> = schema.fillings(&info.indices, a);
        for (id, e) in a.carriers[s].iter().enumerate() {
            if !valid.contains(&e.index) {
                out.push(Violation {
                    constructor: info.name.clone(),
                    filling: vec![e.label.clone()],
                    detail: format!("element {id} has an index outside the carriers"),
                });
            }
        }
    }

    for (p, info) in schema.points.iter().enumerate() {
        let mut seen = 0usize;
        let mut stop = false;
        let _ = schema.for_each_filling(&info.args, a, &mut |args| {
            if over(&info.name, &mut out) {
                stop = true;
                return ControlFlow::Break(());
            }
            match a.ops[p].get(args) {
                Some(&r) => {
                    seen += 1;
                    let expected = schema.eval_all(&info.target_indices, args, a);
                    let got = a.carriers[info.target].get(r).map(|e| &e.index);
                    if got.is_none() || expected.as_ref() != got {
                        out.push(Violation {
                            constructor: info.name.clone(),
                            filling: a.show_args(&info.args, args),
                            detail: format!("result {r} is not in the carrier at the target index"),
                        });
                    }
                }
                None if !a.partial => out.push(Violation {
                    constructor: info.name.clone(),
                    filling: a.show_args(&info.args, args),
                    detail: "operation undefined".into(),
                }),
                None => {}
            }
            ControlFlow::Continue(())
        });
        if stop {
            return out;
        }
        if seen != a.ops[p].len() {
            out.push(Violation {
                constructor: info.name.clone(),
                filling: Vec::new(),
                detail: format!("{} table entries have ill-typed arguments", a.ops[p].len() - seen),
            });
        }
    }

    for info in &schema.paths {
        let mut stop = false;
        let _ = schema.for_each_filling(&info.args, a, &mut |args| {
            if over(&info.name, &mut out) {
                stop = true;
                return ControlFlow::Break(());
            }
            let l = schema.eval(&info.lhs, args, a);
            let r = schema.eval(&info.rhs, args, a);
            match (l, r) {
                (Some(l), Some(r)) if l != r => out.push(Violation {
                    constructor: info.name.clone(),
                    filling: a.show_args(&info.args, args),
                    detail: format!(
                        "sides differ: {} vs {}",
                        a.show_value(&RType::Sort(info.sort, Vec::new()), &l),
                        a.show_value(&RType::Sort(info.sort, Vec::new()), &r)
                    ),
                }),
                (Some(_), Some(_)) => {}
                _ if a.partial => {}
                _ => out.push(Violation {
                    constructor: info.name.clone(),
                    filling: a.show_args(&info.args, args),
                    detail: "a side is undefined".into(),
                }),
            }
            ControlFlow::Continue(())
        });
        if stop {
            return out;
        }
    }
    out
}

/// A map between algebras of the same signature: per sort, the image of
/// each source element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Homomorphism {
    pub maps: Vec<Vec<usize>>,
}

impl Homomorphism {
    pub fn identity(a: &FiniteAlgebra) -> Self {
        Homomorphism { maps: a.carriers.iter().map(|c| (0..c.len()).collect()).collect() }
    }

    pub fn apply(&self, sort: usize, id: usize) -> usize {
        self.maps[sort][id]
    }

    pub fn map_value(&self, v: &Value) -> Value {
        v.map_elems(&mut |s, id| Some(self.maps[s][id])).expect("total")
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Homomorphism) -> Homomorphism {
        Homomorphism {
            maps: self.maps.iter().enumerate().map(|(s, m)| m.iter().map(|&x| other.maps[s][x]).collect()).collect(),
        }
    }
}

#[cfg(test)]
mod tests;
