use serde::{Deserialize, Serialize};

use super::{equaliser, verify_algebra, FiniteAlgebra, Homomorphism, Violation};
use crate::model::TermModel;
use crate::schema::{Interp, Value};

/// Checks that `h` respects indices and commutes with every defined
/// operation of `src`. Path constructors need no check at set level.
pub fn check_homomorphism(src: &FiniteAlgebra, tgt: &FiniteAlgebra, h: &Homomorphism) -> Vec<Violation> {
    let schema = src.schema();
    let mut out = Vec::new();
    for (s, info) in schema.sorts.iter().enumerate() {
        if h.maps.get(s).map(Vec::len) != Some(src.size(s)) {
            out.push(Violation {
                constructor: info.name.clone(),
                filling: Vec::new(),
                detail: "map does not cover the carrier".into(),
            });
            return out;
        }
        for (id, e) in src.carrier(s).iter().enumerate() {
            let img = h.maps[s][id];
            let Some(te) = tgt.carrier(s).get(img) else {
                out.push(Violation {
                    constructor: info.name.clone(),
                    filling: vec![e.label.clone()],
                    detail: format!("image {img} is outside the target carrier"),
                });
                continue;
            };
            let mapped: Vec<Value> = e.index.iter().map(|v| h.map_value(v)).collect();
            if mapped != te.index {
                out.push(Violation {
                    constructor: info.name.clone(),
                    filling: vec![e.label.clone()],
                    detail: format!("image {} lies over a different index", te.label),
                });
            }
        }
    }
    if !out.is_empty() {
        return out;
    }
    for (p, info) in schema.points.iter().enumerate() {
        for (args, &r) in src.ops(p) {
            let mapped: Vec<Value> = args.iter().map(|v| h.map_value(v)).collect();
            let expected = h.maps[info.target][r];
            match tgt.apply(p, &mapped) {
                Some(got) if got == expected => {}
                Some(got) => out.push(Violation {
                    constructor: info.name.clone(),
                    filling: src.show_args(&info.args, args),
                    detail: format!(
                        "h({}) = {} but {}(h args) = {}",
                        src.label(info.target, r),
                        tgt.label(info.target, expected),
                        info.name,
                        tgt.label(info.target, got)
                    ),
                }),
                None if tgt.is_partial() => {}
                None => out.push(Violation {
                    constructor: info.name.clone(),
                    filling: src.show_args(&info.args, args),
                    detail: "target operation undefined at the mapped arguments".into(),
                }),
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FoldError {
    #[error("target algebra is not valid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("operation `{point}` undefined at the image of {term}")]
    Undefined { point: String, term: String },
    #[error("class {class} is sent to both {first} and {second}")]
    IllDefined { class: String, first: String, second: String },
    #[error("{} does not lie over the image of its index", .0)]
    Index(String),
}

/// The map out of the term model defined by structural recursion on terms.
pub fn fold(m: &TermModel, a: &FiniteAlgebra) -> Result<Homomorphism, FoldError> {
    let violations = verify_algebra(a);
    if !violations.is_empty() {
        return Err(FoldError::Invalid(violations));
    }
    let mut order: Vec<usize> = (0..m.term_count()).collect();
    order.sort_by_key(|&t| m.term_height(t));
    let mut value: Vec<Option<usize>> = vec![None; m.term_count()];
    for t in order {
        let term = m.term(t);
        let args: Vec<Value> = term
            .args
            .iter()
            .map(|v| v.map_elems(&mut |_, id| Some(value[id].expect("arguments are lower"))).expect("total"))
            .collect();
        let r = a.apply(term.point, &args).ok_or_else(|| FoldError::Undefined {
            point: m.schema().points[term.point].name.clone(),
            term: m.show_term(t),
        })?;
        value[t] = Some(r);
    }
    let mut maps = Vec::new();
    for s in 0..m.schema().sorts.len() {
        let mut row = Vec::new();
        for (c, class) in m.classes(s).iter().enumerate() {
            let v = value[class.rep].expect("every term folded");
            for &t in &class.members {
                let w = value[t].expect("every term folded");
                if w != v {
                    return Err(FoldError::IllDefined {
                        class: m.show_class(s, c),
                        first: a.label(s, v).into(),
                        second: a.label(s, w).into(),
                    });
                }
            }
            row.push(v);
        }
        maps.push(row);
    }
    let h = Homomorphism { maps };
    let src = FiniteAlgebra::from_model(m);
    for s in 0..src.schema().sorts.len() {
        for (c, e) in src.carrier(s).iter().enumerate() {
            let idx: Vec<Value> = e.index.iter().map(|v| h.map_value(v)).collect();
            if a.element(s, h.maps[s][c]).index != idx {
                return Err(FoldError::Index(e.label.clone()));
            }
        }
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("homomorphism search exceeded {budget} steps")]
pub struct HomBudget {
    pub budget: usize,
}

struct Search<'a> {
    src: &'a FiniteAlgebra,
    tgt: &'a FiniteAlgebra,
    /// (point, args, result sort, result id) for every defined source entry.
    entries: Vec<(usize, &'a [Value], usize, usize)>,
    budget: usize,
    steps: usize,
    found: Vec<Homomorphism>,
}

type Partial = Vec<Vec<Option<usize>>>;

impl Search<'_> {
    /// Forces results of entries whose arguments are all assigned.
    /// Returns false on a contradiction.
    fn propagate(&self, asg: &mut Partial) -> bool {
        loop {
            let mut changed = false;
            for &(p, args, rs, r) in &self.entries {
                let mut ok = true;
                let mapped: Vec<Value> = args
                    .iter()
                    .map(|v| {
                        v.map_elems(&mut |s, id| {
                            let x = asg[s][id];
                            ok &= x.is_some();
                            x
                        })
                    })
                    .collect::<Option<_>>()
                    .unwrap_or_default();
                if !ok {
                    continue;
                }
                let Some(img) = self.tgt.apply(p, &mapped) else {
                    if self.tgt.is_partial() {
                        continue;
                    }
                    return false;
                };
                match asg[rs][r] {
                    Some(x) if x != img => return false,
                    Some(_) => {}
                    None => {
                        asg[rs][r] = Some(img);
                        changed = true;
                    }
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn candidates(&self, asg: &Partial, s: usize, id: usize) -> Option<Vec<usize>> {
        let e = self.src.element(s, id);
        let idx = e
            .index
            .iter()
            .map(|v| v.map_elems(&mut |s2, id2| asg[s2][id2]))
            .collect::<Option<Vec<Value>>>()?;
        Some(self.tgt.elements(s, &idx))
    }

    fn go(&mut self, mut asg: Partial) -> Result<(), HomBudget> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(HomBudget { budget: self.budget });
        }
        if !self.propagate(&mut asg) {
            return Ok(());
        }
        let next = asg.iter().enumerate().find_map(|(s, row)| row.iter().position(Option::is_none).map(|id| (s, id)));
        match next {
            None => {
                let h = Homomorphism {
                    maps: asg.into_iter().map(|row| row.into_iter().map(|x| x.expect("complete")).collect()).collect(),
                };
                if super::check_homomorphism(self.src, self.tgt, &h).is_empty() {
                    self.found.push(h);
                }
                Ok(())
            }
            Some((s, id)) => {
                // Sorts are visited in order, so the index is assigned.
                let cands = self.candidates(&asg, s, id).expect("index assigned before element");
                for c in cands {
                    let mut next = asg.clone();
                    next[s][id] = Some(c);
                    self.go(next)?;
                }
                Ok(())
            }
        }
    }
}

/// Every homomorphism from `src` to `tgt`, in lexicographic order of the
/// sort maps. Constraint propagation from the operation tables runs before
/// each branching step.
pub fn enumerate_homs(src: &FiniteAlgebra, tgt: &FiniteAlgebra, budget: usize) -> Result<Vec<Homomorphism>, HomBudget> {
    let schema = src.schema();
    let mut entries = Vec::new();
    for (p, info) in schema.points.iter().enumerate() {
        for (args, &r) in src.ops(p) {
            entries.push((p, args.as_slice(), info.target, r));
        }
    }
    let mut search = Search { src, tgt, entries, budget, steps: 0, found: Vec::new() };
    let start: Partial = (0..schema.sorts.len()).map(|s| vec![None; src.size(s)]).collect();
    search.go(start)?;
    let mut found = search.found;
    found.sort_by(|a, b| a.maps.cmp(&b.maps));
    Ok(found)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub count: usize,
    /// For every pair of distinct homomorphisms found, whether their
    /// equaliser is the whole model. Empty when fewer than two exist.
    pub equalisers_whole: Vec<bool>,
    pub homs: Vec<Homomorphism>,
}

impl UniquenessReport {
    pub fn unique(&self) -> bool {
        self.count == 1
    }
}

/// Counts the homomorphisms from the term model into `a`.
pub fn uniqueness_check(m: &TermModel, a: &FiniteAlgebra, budget: usize) -> Result<UniquenessReport, HomBudget> {
    let src = FiniteAlgebra::from_model(m);
    let homs = enumerate_homs(&src, a, budget)?;
    let mut whole = Vec::new();
    for i in 0..homs.len() {
        for j in i + 1..homs.len() {
            let e = equaliser(&src, a, &homs[i], &homs[j]);
            whole.push((0..src.schema().sorts.len()).all(|s| e.algebra.size(s) == src.size(s)));
        }
    }
    Ok(UniquenessReport { count: homs.len(), equalisers_whole: whole, homs })
}

/// Renders a homomorphism as `source ↦ target` lines per sort.
pub fn show_hom(src: &FiniteAlgebra, tgt: &FiniteAlgebra, h: &Homomorphism) -> Vec<String> {
    let mut out = Vec::new();
    for (s, info) in src.schema().sorts.iter().enumerate() {
        for (id, e) in src.carrier(s).iter().enumerate() {
            out.push(format!("{}: {} ↦ {}", info.name, e.label, tgt.label(s, h.maps[s][id])));
        }
    }
    out
}
