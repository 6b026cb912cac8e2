//! The `.qalg` document format.
//!
//! Elements are referred to by label. An argument or index value is a
//! label string (atom or element) or an array of labels (a function or
//! permutation table, in domain order).

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use super::{Element, FiniteAlgebra};
use crate::schema::{RType, Schema, Value};

pub const ALGEBRA_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraDoc {
    pub format_version: u32,
    /// Signature source text; optional when the caller supplies it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<String>,
    #[serde(default)]
    pub partial: bool,
    pub carriers: BTreeMap<String, Vec<ElementDoc>>,
    pub operations: BTreeMap<String, Vec<EntryDoc>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementDoc {
    pub label: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub index: Vec<Json>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryDoc {
    pub args: Vec<Json>,
    pub result: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DocError {
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("unknown point constructor `{0}`")]
    UnknownPoint(String),
    #[error("duplicate label `{label}` in sort `{sort}`")]
    Duplicate { sort: String, label: String },
    #[error("cannot read `{value}` as {expected}")]
    Value { value: String, expected: String },
    #[error("`{point}` entry has {got} arguments, expected {expected}")]
    Arity { point: String, got: usize, expected: usize },
}

impl AlgebraDoc {
    pub fn from_algebra(a: &FiniteAlgebra) -> AlgebraDoc {
        let schema = a.schema();
        let carriers = schema
            .sorts
            .iter()
            .enumerate()
            .map(|(s, info)| {
                let elems = a
                    .carrier(s)
                    .iter()
                    .map(|e| ElementDoc {
                        label: e.label.clone(),
                        index: info.indices.iter().zip(&e.index).map(|(p, v)| encode(a, &p.ty, v)).collect(),
                    })
                    .collect();
                (info.name.clone(), elems)
            })
            .collect();
        let operations = schema
            .points
            .iter()
            .enumerate()
            .map(|(p, info)| {
                let entries = a
                    .ops(p)
                    .iter()
                    .map(|(args, &r)| EntryDoc {
                        args: info.args.iter().zip(args).map(|(q, v)| encode(a, &q.ty, v)).collect(),
                        result: a.label(info.target, r).to_string(),
                    })
                    .collect();
                (info.name.clone(), entries)
            })
            .collect();
        AlgebraDoc {
            format_version: ALGEBRA_FORMAT_VERSION,
            signature: Some(crate::parser::print_signature(&schema.sig)),
            partial: a.is_partial(),
            carriers,
            operations,
        }
    }

    /// Decodes the document against a compiled signature. Sorts and
    /// constructors missing from the document get empty carriers/tables.
    pub fn to_algebra(&self, schema: Arc<Schema>) -> Result<FiniteAlgebra, DocError> {
        if self.format_version != ALGEBRA_FORMAT_VERSION {
            return Err(DocError::Version(self.format_version));
        }
        for name in self.carriers.keys() {
            if !schema.sorts.iter().any(|s| &s.name == name) {
                return Err(DocError::UnknownSort(name.clone()));
            }
        }
        for name in self.operations.keys() {
            if schema.point_id(name).is_none() {
                return Err(DocError::UnknownPoint(name.clone()));
            }
        }
        let mut labels: Vec<Vec<String>> = Vec::new();
        let mut carriers = Vec::new();
        for info in &schema.sorts {
            let docs = self.carriers.get(&info.name).map(Vec::as_slice).unwrap_or(&[]);
            let mut row = Vec::new();
            let mut names: Vec<String> = Vec::new();
            for d in docs {
                if names.contains(&d.label) {
                    return Err(DocError::Duplicate { sort: info.name.clone(), label: d.label.clone() });
                }
                if d.index.len() != info.indices.len() {
                    return Err(DocError::Value {
                        value: d.label.clone(),
                        expected: format!("an element with {} index values", info.indices.len()),
                    });
                }
                let index = info
                    .indices
                    .iter()
                    .zip(&d.index)
                    .map(|(p, j)| decode(&schema, &labels, &p.ty, j))
                    .collect::<Result<Vec<_>, _>>()?;
                names.push(d.label.clone());
                row.push(Element { label: d.label.clone(), index });
            }
            labels.push(names);
            carriers.push(row);
        }
        let mut ops = vec![BTreeMap::new(); schema.points.len()];
        for (p, info) in schema.points.iter().enumerate() {
            for e in self.operations.get(&info.name).map(Vec::as_slice).unwrap_or(&[]) {
                if e.args.len() != info.args.len() {
                    return Err(DocError::Arity { point: info.name.clone(), got: e.args.len(), expected: info.args.len() });
                }
                let args = info
                    .args
                    .iter()
                    .zip(&e.args)
                    .map(|(q, j)| decode(&schema, &labels, &q.ty, j))
                    .collect::<Result<Vec<_>, _>>()?;
                let r = find(&labels[info.target], &e.result, &schema.sorts[info.target].name)?;
                ops[p].insert(args, r);
            }
        }
        Ok(FiniteAlgebra::new(schema, carriers, ops, self.partial))
    }
}

fn encode(a: &FiniteAlgebra, ty: &RType, v: &Value) -> Json {
    match (ty, v) {
        (RType::Atom(s), Value::Atom(x)) => Json::String(a.schema().externals[*s].elements[*x as usize].clone()),
        (_, Value::Elem { sort, id }) => Json::String(a.label(*sort as usize, *id as usize).to_string()),
        (RType::Perm(s), Value::Table(vs)) => {
            Json::Array(vs.iter().map(|x| encode(a, &RType::Atom(*s), x)).collect())
        }
        (RType::Function { sort, .. }, Value::Table(vs)) => {
            Json::Array(vs.iter().map(|x| encode(a, &RType::Sort(*sort, Vec::new()), x)).collect())
        }
        _ => Json::Null,
    }
}

fn find(labels: &[String], label: &str, sort: &str) -> Result<usize, DocError> {
    labels
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| DocError::Value { value: label.into(), expected: format!("an element of `{sort}`") })
}

fn decode(schema: &Schema, labels: &[Vec<String>], ty: &RType, j: &Json) -> Result<Value, DocError> {
    let bad = |expected: &str| DocError::Value { value: j.to_string(), expected: expected.into() };
    match ty {
        RType::Atom(s) => {
            let ext = &schema.externals[*s];
            let label = j.as_str().ok_or_else(|| bad(&format!("an element of `{}`", ext.name)))?;
            let k = ext.elements.iter().position(|e| e == label).ok_or_else(|| bad(&format!("an element of `{}`", ext.name)))?;
            Ok(Value::Atom(k as u32))
        }
        RType::Sort(s, _) => {
            let label = j.as_str().ok_or_else(|| bad("an element label"))?;
            Ok(Value::elem(*s, find(&labels[*s], label, &schema.sorts[*s].name)?))
        }
        RType::Perm(s) | RType::Function { domain: s, .. } => {
            let items = j.as_array().ok_or_else(|| bad("a table"))?;
            if items.len() != schema.externals[*s].elements.len() {
                return Err(bad(&format!("a table over `{}`", schema.externals[*s].name)));
            }
            let inner = match ty {
                RType::Function { sort, .. } => RType::Sort(*sort, Vec::new()),
                _ => RType::Atom(*s),
            };
            Ok(Value::Table(items.iter().map(|x| decode(schema, labels, &inner, x)).collect::<Result<_, _>>()?))
        }
    }
}
