use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{Element, FiniteAlgebra, Homomorphism, Violation};
use crate::schema::Value;

pub struct Product {
    pub algebra: FiniteAlgebra,
    pub left: Homomorphism,
    pub right: Homomorphism,
}

/// Index-wise product with componentwise operations.
pub fn product(a: &FiniteAlgebra, b: &FiniteAlgebra) -> Product {
    let schema = a.schema_arc().clone();
    let nsorts = schema.sorts.len();
    let mut pair_id: Vec<HashMap<(usize, usize), usize>> = vec![HashMap::new(); nsorts];
    let mut carriers: Vec<Vec<Element>> = vec![Vec::new(); nsorts];
    let mut left = vec![Vec::new(); nsorts];
    let mut right = vec![Vec::new(); nsorts];
    for s in 0..nsorts {
        for (x, ex) in a.carrier(s).iter().enumerate() {
            for (y, ey) in b.carrier(s).iter().enumerate() {
                let index: Option<Vec<Value>> =
                    ex.index.iter().zip(&ey.index).map(|(u, v)| pair_value(&pair_id, u, v)).collect();
                if let Some(index) = index {
                    pair_id[s].insert((x, y), carriers[s].len());
                    carriers[s].push(Element { label: format!("({}, {})", ex.label, ey.label), index });
                    left[s].push(x);
                    right[s].push(y);
                }
            }
        }
    }
    let mut ops = vec![BTreeMap::new(); schema.points.len()];
    for (p, info) in schema.points.iter().enumerate() {
        for (aa, &ra) in a.ops(p) {
            for (ab, &rb) in b.ops(p) {
                let args: Option<Vec<Value>> = aa.iter().zip(ab).map(|(u, v)| pair_value(&pair_id, u, v)).collect();
                if let (Some(args), Some(&r)) = (args, pair_id[info.target].get(&(ra, rb))) {
                    ops[p].insert(args, r);
                }
            }
        }
    }
    let partial = a.is_partial() || b.is_partial();
    Product {
        algebra: FiniteAlgebra::new(schema, carriers, ops, partial),
        left: Homomorphism { maps: left },
        right: Homomorphism { maps: right },
    }
}

fn pair_value(pair_id: &[HashMap<(usize, usize), usize>], u: &Value, v: &Value) -> Option<Value> {
    match (u, v) {
        (Value::Atom(x), Value::Atom(y)) if x == y => Some(Value::Atom(*x)),
        (Value::Elem { sort, id: x }, Value::Elem { sort: s2, id: y }) if sort == s2 => {
            let s = *sort as usize;
            pair_id[s].get(&(*x as usize, *y as usize)).map(|&id| Value::elem(s, id))
        }
        (Value::Table(xs), Value::Table(ys)) if xs.len() == ys.len() => {
            Some(Value::Table(xs.iter().zip(ys).map(|(x, y)| pair_value(pair_id, x, y)).collect::<Option<_>>()?))
        }
        _ => None,
    }
}

pub struct Equaliser {
    pub algebra: FiniteAlgebra,
    pub inclusion: Homomorphism,
    /// Operations whose arguments agree but whose result does not; empty
    /// whenever `f` and `g` are homomorphisms.
    pub closure_violations: Vec<Violation>,
}

/// The subalgebra of `src` on which `f` and `g` agree.
pub fn equaliser(src: &FiniteAlgebra, _tgt: &FiniteAlgebra, f: &Homomorphism, g: &Homomorphism) -> Equaliser {
    let schema = src.schema_arc().clone();
    let nsorts = schema.sorts.len();
    let mut new_id: Vec<Vec<Option<usize>>> = Vec::with_capacity(nsorts);
    let mut inclusion = vec![Vec::new(); nsorts];
    let mut carriers = vec![Vec::new(); nsorts];
    for s in 0..nsorts {
        let mut row = vec![None; src.size(s)];
        for (id, e) in src.carrier(s).iter().enumerate() {
            if f.maps[s][id] != g.maps[s][id] {
                continue;
            }
            // Indices of agreeing elements agree too, since both maps
            // respect indices.
            let index: Option<Vec<Value>> =
                e.index.iter().map(|v| v.map_elems(&mut |s2, i2| new_id[s2][i2])).collect();
            if let Some(index) = index {
                row[id] = Some(carriers[s].len());
                carriers[s].push(Element { label: e.label.clone(), index });
                inclusion[s].push(id);
            }
        }
        new_id.push(row);
    }
    let mut ops = vec![BTreeMap::new(); schema.points.len()];
    let mut closure_violations = Vec::new();
    for (p, info) in schema.points.iter().enumerate() {
        for (args, &r) in src.ops(p) {
            let Some(inner) = args.iter().map(|v| v.map_elems(&mut |s, id| new_id[s][id])).collect::<Option<Vec<_>>>()
            else {
                continue;
            };
            match new_id[info.target][r] {
                Some(nr) => {
                    ops[p].insert(inner, nr);
                }
                None => closure_violations.push(Violation {
                    constructor: info.name.clone(),
                    filling: src.show_args(&info.args, args),
                    detail: "result leaves the agreement set".into(),
                }),
            }
        }
    }
    Equaliser {
        algebra: FiniteAlgebra::new(schema, carriers, ops, src.is_partial()),
        inclusion: Homomorphism { maps: inclusion },
        closure_violations,
    }
}

/// A family of finite sets over a finite base.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Family {
    pub name: String,
    pub base: Vec<String>,
    /// `fibres[b]` lists the elements over base element `b`.
    pub fibres: Vec<Vec<String>>,
}

/// A map of families: a base map and, over each base element, a map of
/// fibres into the fibre over its image.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyMap {
    pub source: usize,
    pub target: usize,
    pub base: Vec<usize>,
    pub fibres: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagram {
    pub objects: Vec<Family>,
    pub arrows: Vec<FamilyMap>,
}

impl Diagram {
    /// Problems with the shape of the maps; empty when well formed.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (k, a) in self.arrows.iter().enumerate() {
            let (Some(src), Some(tgt)) = (self.objects.get(a.source), self.objects.get(a.target)) else {
                out.push(format!("arrow {k} has an unknown endpoint"));
                continue;
            };
            if a.base.len() != src.base.len() || a.fibres.len() != src.base.len() {
                out.push(format!("arrow {k} does not cover the source base"));
                continue;
            }
            for (b, &img) in a.base.iter().enumerate() {
                if img >= tgt.base.len() {
                    out.push(format!("arrow {k} sends base {b} outside the target"));
                    continue;
                }
                if a.fibres[b].len() != src.fibres[b].len()
                    || a.fibres[b].iter().any(|&x| x >= tgt.fibres[img].len())
                {
                    out.push(format!("arrow {k} has an ill-typed fibre map over {b}"));
                }
            }
        }
        out
    }
}

/// A limit family: base tuples (one base element per object) and, over
/// each, the compatible fibre tuples. Both are in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitFamily {
    pub base: Vec<Vec<usize>>,
    pub fibres: Vec<Vec<Vec<usize>>>,
}

impl LimitFamily {
    pub fn total_size(&self) -> usize {
        self.fibres.iter().map(Vec::len).sum()
    }
}

/// The limit of a finite diagram of families: first the limit of the
/// bases, then over each base cone the limit of the fibres, which is the
/// pullback of the total-space limit along the base cone.
pub fn family_limit(d: &Diagram) -> LimitFamily {
    let n = d.objects.len();
    let mut base = Vec::new();
    cones(n, &|i| d.objects[i].base.len(), &|tuple: &[usize]| {
        d.arrows.iter().all(|a| {
            a.source >= tuple.len() || a.target >= tuple.len() || a.base[tuple[a.source]] == tuple[a.target]
        })
    }, &mut Vec::new(), &mut base);
    let fibres = base
        .iter()
        .map(|bt: &Vec<usize>| {
            let mut out = Vec::new();
            cones(n, &|i| d.objects[i].fibres[bt[i]].len(), &|tuple: &[usize]| {
                d.arrows.iter().all(|a| {
                    a.source >= tuple.len()
                        || a.target >= tuple.len()
                        || a.fibres[bt[a.source]][tuple[a.source]] == tuple[a.target]
                })
            }, &mut Vec::new(), &mut out);
            out
        })
        .collect();
    LimitFamily { base, fibres }
}

/// Depth-first enumeration of tuples, pruning with `ok` on every prefix.
fn cones(
    n: usize,
    size: &dyn Fn(usize) -> usize,
    ok: &dyn Fn(&[usize]) -> bool,
    prefix: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if prefix.len() == n {
        out.push(prefix.clone());
        return;
    }
    for x in 0..size(prefix.len()) {
        prefix.push(x);
        if ok(prefix) {
            cones(n, size, ok, prefix, out);
        }
        prefix.pop();
    }
}

/// The terminal algebra: one element over every index filling.
pub fn terminal(schema: std::sync::Arc<crate::schema::Schema>) -> FiniteAlgebra {
    let nsorts = schema.sorts.len();
    let empty = vec![BTreeMap::new(); schema.points.len()];
    let mut carriers = vec![Vec::new(); nsorts];
    let mut a = FiniteAlgebra::new(schema.clone(), carriers.clone(), empty.clone(), false);
    for (s, info) in schema.sorts.iter().enumerate() {
        let row = schema
            .fillings(&info.indices, &a)
            .into_iter()
            .enumerate()
            .map(|(k, index)| Element { label: if info.indices.is_empty() { "*".into() } else { format!("*{k}") }, index })
            .collect();
        carriers[s] = row;
        a = FiniteAlgebra::new(schema.clone(), carriers.clone(), empty.clone(), false);
    }
    for (p, info) in schema.points.iter().enumerate() {
        let entries: Vec<(Vec<Value>, usize)> = schema
            .fillings(&info.args, &a)
            .into_iter()
            .filter_map(|args| {
                let idx = schema.eval_all(&info.target_indices, &args, &a)?;
                let r = a.carriers[info.target].iter().position(|e| e.index == idx)?;
                Some((args, r))
            })
            .collect();
        a.ops[p].extend(entries);
    }
    a
}
