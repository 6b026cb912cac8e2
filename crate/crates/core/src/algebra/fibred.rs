use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{check_homomorphism, verify_algebra, Element, FiniteAlgebra, Homomorphism, Violation};
use crate::model::TermModel;
use crate::schema::{Interp, Value};

/// An element of the total space: a base element, the total-space
/// elements its indices are lifted to, and a position in the motive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TotalElem {
    pub base: usize,
    pub index: Vec<Value>,
    pub q: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FibredError {
    #[error("method `{point}` returns {q}, outside its motive of size {size}")]
    Method { point: String, q: usize, size: usize },
    #[error("method `{0}` lands over an index that is not evaluable")]
    Index(String),
    #[error("methods are incoherent: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Incoherent(Vec<Violation>),
    #[error("no method value for {0}")]
    Undefined(String),
    #[error("section sends class {0} to different values")]
    IllDefined(String),
}

/// Motives and methods over a base algebra, stored in total-space form:
/// the methods are the operations of the total algebra.
#[derive(Clone, Debug)]
pub struct FibredAlgebra {
    base: FiniteAlgebra,
    elems: Vec<Vec<TotalElem>>,
    motives: Vec<Motives>,
    total: FiniteAlgebra,
}

/// Motive labels keyed by base element and total index.
type Motives = BTreeMap<(usize, Vec<Value>), Vec<String>>;

/// Closure computing motive labels at (sort, base element, total index).
pub type MotiveFn<'a> = dyn Fn(usize, usize, &[Value], &[Vec<TotalElem>]) -> Vec<String> + 'a;
/// Closure computing a method's motive position at (point, total args).
pub type MethodFn<'a> = dyn Fn(usize, &[Value], &[Vec<TotalElem>]) -> usize + 'a;

impl FibredAlgebra {
    /// Builds motives sort by sort and methods point by point. Methods are
    /// consulted only where the base operation is defined.
    pub fn build(base: &FiniteAlgebra, motive: &MotiveFn, method: &MethodFn) -> Result<FibredAlgebra, FibredError> {
        let schema = base.schema_arc().clone();
        let nsorts = schema.sorts.len();
        let mut elems: Vec<Vec<TotalElem>> = vec![Vec::new(); nsorts];
        let mut motives: Vec<Motives> = vec![BTreeMap::new(); nsorts];
        let mut carriers: Vec<Vec<Element>> = vec![Vec::new(); nsorts];
        let empty_ops = vec![BTreeMap::new(); schema.points.len()];
        for s in 0..nsorts {
            let scratch = FiniteAlgebra::new(schema.clone(), carriers.clone(), empty_ops.clone(), base.is_partial());
            let lifts = schema.fillings(&schema.sorts[s].indices, &scratch);
            for (c, be) in base.carrier(s).iter().enumerate() {
                for idx in &lifts {
                    if project(&elems, idx) != be.index {
                        continue;
                    }
                    let labels = motive(s, c, idx, &elems);
                    for (q, l) in labels.iter().enumerate() {
                        carriers[s].push(Element { label: format!("({}, {l})", be.label), index: idx.clone() });
                        elems[s].push(TotalElem { base: c, index: idx.clone(), q });
                    }
                    motives[s].insert((c, idx.clone()), labels);
                }
            }
        }
        let mut total = FiniteAlgebra::new(schema.clone(), carriers, empty_ops, base.is_partial());
        let lookup: Vec<BTreeMap<&TotalElem, usize>> =
            elems.iter().map(|row| row.iter().enumerate().map(|(i, e)| (e, i)).collect()).collect();
        for (p, info) in schema.points.iter().enumerate() {
            let mut entries = Vec::new();
            for args in schema.fillings(&info.args, &total) {
                let base_args: Vec<Value> = args.iter().map(|v| project_value(&elems, v)).collect();
                let Some(r) = base.apply(p, &base_args) else { continue };
                let idx = schema
                    .eval_all(&info.target_indices, &args, &total)
                    .ok_or_else(|| FibredError::Index(info.name.clone()))?;
                let size = motives[info.target].get(&(r, idx.clone())).map_or(0, Vec::len);
                let q = method(p, &args, &elems);
                let key = TotalElem { base: r, index: idx, q };
                let id = *lookup[info.target]
                    .get(&key)
                    .ok_or_else(|| FibredError::Method { point: info.name.clone(), q, size })?;
                entries.push((args, id));
            }
            total.ops[p].extend(entries);
        }
        Ok(FibredAlgebra { base: base.clone(), elems, motives, total })
    }

    /// The one-element motive everywhere.
    pub fn constant_unit(base: &FiniteAlgebra) -> Result<FibredAlgebra, FibredError> {
        FibredAlgebra::build(base, &|_, _, _, _| vec!["*".into()], &|_, _, _| 0)
    }

    /// The fibres of a homomorphism `g : src → base`: the motive over a
    /// base element lists the source elements sent to it (and lying over
    /// the chosen lifts of its indices); methods are the source operations.
    pub fn fibres_of(base: &FiniteAlgebra, src: &FiniteAlgebra, g: &Homomorphism) -> Result<FibredAlgebra, FibredError> {
        let fibre = |s: usize, c: usize, idx: &[Value], elems: &[Vec<TotalElem>]| -> Vec<usize> {
            let lifted: Vec<Value> = idx.iter().map(|v| decode_value(src, g, elems, v)).collect();
            (0..src.size(s)).filter(|&y| g.maps[s][y] == c && src.element(s, y).index == lifted).collect()
        };
        let motive = |s: usize, c: usize, idx: &[Value], elems: &[Vec<TotalElem>]| -> Vec<String> {
            fibre(s, c, idx, elems).into_iter().map(|y| src.label(s, y).to_string()).collect()
        };
        let method = |p: usize, args: &[Value], elems: &[Vec<TotalElem>]| -> usize {
            let info = &src.schema().points[p];
            let src_args: Vec<Value> = args.iter().map(|v| decode_value(src, g, elems, v)).collect();
            let Some(y) = src.apply(p, &src_args) else { return usize::MAX };
            let r = g.maps[info.target][y];
            let idx = src.element(info.target, y).index.clone();
            // The total index is the unique lift of the source index.
            let lift: Option<Vec<Value>> = idx.iter().map(|v| encode_value(src, g, elems, v)).collect();
            let Some(lift) = lift else { return usize::MAX };
            fibre(info.target, r, &lift, elems).iter().position(|&z| z == y).unwrap_or(usize::MAX)
        };
        FibredAlgebra::build(base, &motive, &method)
    }

    pub fn base(&self) -> &FiniteAlgebra {
        &self.base
    }

    pub fn total(&self) -> &FiniteAlgebra {
        &self.total
    }

    pub fn elems(&self, sort: usize) -> &[TotalElem] {
        &self.elems[sort]
    }

    pub fn motive_labels(&self, sort: usize, base: usize, index: &[Value]) -> Option<&[String]> {
        self.motives[sort].get(&(base, index.to_vec())).map(Vec::as_slice)
    }

    /// Path-method coherence and well-typedness of the methods, checked
    /// on the total algebra.
    pub fn coherence(&self) -> Vec<Violation> {
        verify_algebra(&self.total)
    }

    pub fn projection(&self) -> Homomorphism {
        Homomorphism { maps: self.elems.iter().map(|row| row.iter().map(|e| e.base).collect()).collect() }
    }

    pub fn to_doc(&self) -> FibredDoc {
        FibredDoc {
            format_version: super::ALGEBRA_FORMAT_VERSION,
            motives: self
                .motives
                .iter()
                .map(|m| {
                    m.iter()
                        .map(|((base, index), labels)| MotiveDoc {
                            base: *base,
                            index: index.clone(),
                            labels: labels.clone(),
                        })
                        .collect()
                })
                .collect(),
            methods: (0..self.total.ops.len())
                .map(|p| {
                    self.total.ops[p]
                        .iter()
                        .map(|(args, &r)| MethodDoc { args: args.clone(), q: self.elems[self.total.schema.points[p].target][r].q })
                        .collect()
                })
                .collect(),
        }
    }

    /// Rebuilds a fibred algebra from its document over `base`.
    pub fn from_doc(base: &FiniteAlgebra, doc: &FibredDoc) -> Result<FibredAlgebra, FibredError> {
        let motive = |s: usize, c: usize, idx: &[Value], _: &[Vec<TotalElem>]| -> Vec<String> {
            doc.motives
                .get(s)
                .and_then(|m| m.iter().find(|e| e.base == c && e.index == idx))
                .map(|e| e.labels.clone())
                .unwrap_or_default()
        };
        let method = |p: usize, args: &[Value], _: &[Vec<TotalElem>]| -> usize {
            doc.methods.get(p).and_then(|m| m.iter().find(|e| e.args == args)).map_or(usize::MAX, |e| e.q)
        };
        FibredAlgebra::build(base, &motive, &method)
    }
}

/// Serialisable form of a fibred algebra (`.qfib`); element references
/// in `index` and `args` are total-space positions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FibredDoc {
    pub format_version: u32,
    pub motives: Vec<Vec<MotiveDoc>>,
    pub methods: Vec<Vec<MethodDoc>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MotiveDoc {
    pub base: usize,
    pub index: Vec<Value>,
    pub labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodDoc {
    pub args: Vec<Value>,
    pub q: usize,
}

fn project(elems: &[Vec<TotalElem>], idx: &[Value]) -> Vec<Value> {
    idx.iter().map(|v| project_value(elems, v)).collect()
}

fn project_value(elems: &[Vec<TotalElem>], v: &Value) -> Value {
    v.map_elems(&mut |s, id| Some(elems[s][id].base)).expect("total")
}

/// The source element a total element stands for (fibres-of motives).
fn decode_value(src: &FiniteAlgebra, g: &Homomorphism, elems: &[Vec<TotalElem>], v: &Value) -> Value {
    v.map_elems(&mut |s, id| Some(decode(src, g, elems, s, id))).expect("total")
}

fn decode(src: &FiniteAlgebra, g: &Homomorphism, elems: &[Vec<TotalElem>], s: usize, id: usize) -> usize {
    let t = &elems[s][id];
    let lifted: Vec<Value> = t.index.iter().map(|v| decode_value(src, g, elems, v)).collect();
    let fibre: Vec<usize> =
        (0..src.size(s)).filter(|&y| g.maps[s][y] == t.base && src.element(s, y).index == lifted).collect();
    fibre[t.q]
}

fn encode_value(src: &FiniteAlgebra, g: &Homomorphism, elems: &[Vec<TotalElem>], v: &Value) -> Option<Value> {
    v.map_elems(&mut |s, y| (0..elems[s].len()).find(|&id| decode(src, g, elems, s, id) == y))
}

/// The total algebra and its projection onto the base.
pub fn total_algebra(f: &FibredAlgebra) -> Result<(FiniteAlgebra, Homomorphism), FibredError> {
    let v = f.coherence();
    if !v.is_empty() {
        return Err(FibredError::Incoherent(v));
    }
    Ok((f.total.clone(), f.projection()))
}

/// A dependent map from the base classes into the total space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    /// Per sort, per class, the chosen total element.
    pub values: Vec<Vec<usize>>,
}

impl Section {
    pub fn as_hom(&self) -> Homomorphism {
        Homomorphism { maps: self.values.clone() }
    }

    /// Every computation rule: the section commutes with the methods.
    pub fn check_rules(&self, f: &FibredAlgebra) -> Vec<Violation> {
        check_homomorphism(&f.base, &f.total, &self.as_hom())
    }

    /// Whether projecting after the section is the identity.
    pub fn projection_is_identity(&self, f: &FibredAlgebra) -> bool {
        self.as_hom().then(&f.projection()) == Homomorphism::identity(&f.base)
    }

    /// The motive position chosen for a class.
    pub fn q(&self, f: &FibredAlgebra, sort: usize, class: usize) -> usize {
        f.elems[sort][self.values[sort][class]].q
    }
}

/// The section over a term model, by recursion on terms.
pub fn find_section(m: &TermModel, f: &FibredAlgebra) -> Result<Section, FibredError> {
    let v = f.coherence();
    if !v.is_empty() {
        return Err(FibredError::Incoherent(v));
    }
    let mut order: Vec<usize> = (0..m.term_count()).collect();
    order.sort_by_key(|&t| m.term_height(t));
    let mut value: Vec<usize> = vec![usize::MAX; m.term_count()];
    for t in order {
        let term = m.term(t);
        let args: Vec<Value> =
            term.args.iter().map(|v| v.map_elems(&mut |_, id| Some(value[id])).expect("total")).collect();
        let r = f.total.apply(term.point, &args).ok_or_else(|| FibredError::Undefined(m.show_term(t)))?;
        value[t] = r;
    }
    let mut values = Vec::new();
    for s in 0..m.schema().sorts.len() {
        let mut row = Vec::new();
        for (c, class) in m.classes(s).iter().enumerate() {
            let v = value[class.rep];
            if class.members.iter().any(|&t| value[t] != v) || f.elems[s][v].base != c {
                return Err(FibredError::IllDefined(m.show_class(s, c)));
            }
            row.push(v);
        }
        values.push(row);
    }
    Ok(Section { values })
}
