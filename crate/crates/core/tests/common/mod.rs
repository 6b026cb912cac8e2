//! Brute-force oracles shared by the test targets. They share no code
//! with the model engine: raw terms are enumerated directly and the
//! equivalence is closed by naive iteration.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

/// A raw term: constructor tag and children (table entries flattened in
/// domain order).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Raw {
    pub c: usize,
    pub kids: Vec<Raw>,
}

pub fn height(t: &Raw) -> usize {
    t.kids.iter().map(|k| height(k) + 1).max().unwrap_or(0)
}

/// All terms of height at most `depth` for constructors with the given
/// numbers of recursive children.
pub fn enumerate(arities: &[usize], depth: usize) -> Vec<Raw> {
    let mut all: BTreeSet<Raw> = BTreeSet::new();
    for _ in 0..=depth {
        let prev: Vec<Raw> = all.iter().cloned().collect();
        for (c, &n) in arities.iter().enumerate() {
            let mut tuples: Vec<Vec<Raw>> = vec![Vec::new()];
            for _ in 0..n {
                tuples = tuples
                    .into_iter()
                    .flat_map(|t| prev.iter().map(move |x| [t.clone(), vec![x.clone()]].concat()))
                    .collect();
            }
            for kids in tuples {
                all.insert(Raw { c, kids });
            }
        }
    }
    all.into_iter().filter(|t| height(t) <= depth).collect()
}

pub fn find(p: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while p[r] != r {
        r = p[r];
    }
    p[x] = r;
    r
}

/// Number of classes of the equivalence generated by `pairs` and closed
/// under congruence, computed by iterating to a fixpoint.
pub fn naive_classes(terms: &[Raw], pairs: &[(Raw, Raw)]) -> usize {
    let id: HashMap<&Raw, usize> = terms.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut p: Vec<usize> = (0..terms.len()).collect();
    for (a, b) in pairs {
        if let (Some(&x), Some(&y)) = (id.get(a), id.get(b)) {
            let (rx, ry) = (find(&mut p, x), find(&mut p, y));
            p[rx] = ry;
        }
    }
    loop {
        let mut changed = false;
        let mut seen: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
        for (i, t) in terms.iter().enumerate() {
            let key = (t.c, t.kids.iter().map(|k| find(&mut p, id[k])).collect::<Vec<_>>());
            match seen.get(&key) {
                Some(&j) => {
                    let (ri, rj) = (find(&mut p, i), find(&mut p, j));
                    if ri != rj {
                        p[ri] = rj;
                        changed = true;
                    }
                }
                None => {
                    seen.insert(key, i);
                }
            }
        }
        if !changed {
            break;
        }
    }
    (0..terms.len()).filter(|&i| find(&mut p, i) == i).count()
}

/// Canonical form of a tree up to permuting children at every node.
pub fn canon(t: &Raw) -> Raw {
    let mut kids: Vec<Raw> = t.kids.iter().map(canon).collect();
    kids.sort();
    Raw { c: t.c, kids }
}

/// Con/Ty terms, stored by id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ct {
    Eps,
    Ext(usize, usize),
    Iota(usize),
    Sigma(usize, usize, usize),
}

/// Oracle result for Con/Ty: class counts per sort, raw term count, and
/// how many terms are well typed only up to the equivalence.
#[derive(Debug, PartialEq, Eq)]
pub struct CtOracle {
    pub con: usize,
    pub ty: usize,
    pub terms: usize,
    pub retyped: usize,
}

pub struct CtStore {
    terms: Vec<Ct>,
    heights: Vec<usize>,
    ids: HashMap<Ct, usize>,
    parent: Vec<usize>,
}

impl CtStore {
    fn is_con(&self, t: usize) -> bool {
        matches!(self.terms[t], Ct::Eps | Ct::Ext(..))
    }

    fn index(&self, t: usize) -> usize {
        match self.terms[t] {
            Ct::Iota(g) | Ct::Sigma(g, _, _) => g,
            _ => unreachable!("contexts have no index"),
        }
    }

    fn eq(&mut self, a: usize, b: usize) -> bool {
        find(&mut self.parent, a) == find(&mut self.parent, b)
    }

    /// Some stored `ext g' a'` with g' ~ g and a' ~ a.
    fn ext_class(&mut self, g: usize, a: usize) -> Option<usize> {
        (0..self.terms.len()).find(|&t| match self.terms[t] {
            Ct::Ext(g2, a2) => self.eq(g2, g) && self.eq(a2, a),
            _ => false,
        })
    }

    fn sigma_class(&mut self, g: usize, a: usize, b: usize) -> Option<usize> {
        (0..self.terms.len()).find(|&t| match self.terms[t] {
            Ct::Sigma(g2, a2, b2) => self.eq(g2, g) && self.eq(a2, a) && self.eq(b2, b),
            _ => false,
        })
    }

    fn well_typed(&mut self, t: Ct) -> bool {
        match t {
            Ct::Eps => true,
            Ct::Iota(g) => self.is_con(g),
            Ct::Ext(g, a) => self.is_con(g) && !self.is_con(a) && {
                let i = self.index(a);
                self.eq(i, g)
            },
            Ct::Sigma(g, a, b) => {
                if !self.is_con(g) || self.is_con(a) || self.is_con(b) {
                    return false;
                }
                let (ia, ib) = (self.index(a), self.index(b));
                self.eq(ia, g) && self.ext_class(g, a).is_some_and(|e| self.eq(ib, e))
            }
        }
    }

    fn syntactically_typed(&self, t: Ct) -> bool {
        match t {
            Ct::Eps | Ct::Iota(_) => true,
            Ct::Ext(g, a) => self.index(a) == g,
            Ct::Sigma(g, a, b) => self.index(a) == g && self.ids.get(&Ct::Ext(g, a)) == Some(&self.index(b)),
        }
    }

    fn height_of(&self, t: Ct) -> usize {
        let args: Vec<usize> = match t {
            Ct::Eps => vec![],
            Ct::Iota(g) => vec![g],
            Ct::Ext(g, a) => vec![g, a],
            Ct::Sigma(g, a, b) => vec![g, a, b],
        };
        args.iter().map(|&x| self.heights[x] + 1).max().unwrap_or(0)
    }

    /// Recomputes the equivalence from scratch: sigma_eq instances whose
    /// sides are both present, closed under congruence.
    fn close(&mut self) {
        let n = self.terms.len();
        self.parent = (0..n).collect();
        loop {
            let mut changed = false;
            let pairs = self.sigma_eq_pairs();
            for (x, y) in pairs {
                let (rx, ry) = (find(&mut self.parent, x), find(&mut self.parent, y));
                if rx != ry {
                    self.parent[rx] = ry;
                    changed = true;
                }
            }
            for i in 0..n {
                for j in 0..i {
                    let same = match (self.terms[i], self.terms[j]) {
                        (Ct::Ext(a, b), Ct::Ext(c, d)) => self.eq(a, c) && self.eq(b, d),
                        (Ct::Iota(a), Ct::Iota(c)) => self.eq(a, c),
                        (Ct::Sigma(a, b, e), Ct::Sigma(c, d, f)) => self.eq(a, c) && self.eq(b, d) && self.eq(e, f),
                        _ => false,
                    };
                    if same && !self.eq(i, j) {
                        let (ri, rj) = (find(&mut self.parent, i), find(&mut self.parent, j));
                        self.parent[ri] = rj;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    fn sigma_eq_pairs(&mut self) -> Vec<(usize, usize)> {
        let n = self.terms.len();
        let mut out = Vec::new();
        let (cons, tys): (Vec<usize>, Vec<usize>) = (0..n).partition(|&t| self.is_con(t));
        for &g in &cons {
            for &a in &tys {
                let ia = self.index(a);
                if !self.eq(ia, g) {
                    continue;
                }
                let Some(ga) = self.ext_class(g, a) else { continue };
                for &b in &tys {
                    let ib = self.index(b);
                    if !self.eq(ib, ga) {
                        continue;
                    }
                    let lhs = self.ext_class(ga, b);
                    let rhs = self.sigma_class(g, a, b).and_then(|s| self.ext_class(g, s));
                    if let (Some(l), Some(r)) = (lhs, rhs) {
                        out.push((l, r));
                    }
                }
            }
        }
        out
    }
}

/// Alternates raw generation and naive closure until neither changes.
pub fn con_ty_oracle(depth: usize) -> CtOracle {
    let mut st = CtStore { terms: vec![], heights: vec![], ids: HashMap::new(), parent: vec![] };
    loop {
        let before = st.terms.len();
        loop {
            let n = st.terms.len();
            let mut cands = vec![Ct::Eps];
            for x in 0..n {
                cands.push(Ct::Iota(x));
                for y in 0..n {
                    cands.push(Ct::Ext(x, y));
                    for z in 0..n {
                        cands.push(Ct::Sigma(x, y, z));
                    }
                }
            }
            let mut added = false;
            for c in cands {
                if st.ids.contains_key(&c) || st.height_of(c) > depth || !st.well_typed(c) {
                    continue;
                }
                st.ids.insert(c, st.terms.len());
                st.heights.push(st.height_of(c));
                st.terms.push(c);
                st.parent.push(st.parent.len());
                added = true;
            }
            if !added {
                break;
            }
        }
        let old: Vec<usize> = (0..st.terms.len()).map(|i| find(&mut st.parent, i)).collect();
        st.close();
        let new: Vec<usize> = (0..st.terms.len()).map(|i| find(&mut st.parent, i)).collect();
        let same_partition = (0..old.len()).all(|i| (0..old.len()).all(|j| (old[i] == old[j]) == (new[i] == new[j])));
        if st.terms.len() == before && same_partition {
            break;
        }
    }
    let n = st.terms.len();
    let roots: Vec<usize> = (0..n).filter(|&i| find(&mut st.parent, i) == i).collect();
    CtOracle {
        con: roots.iter().filter(|&&r| st.is_con(r)).count(),
        ty: roots.iter().filter(|&&r| !st.is_con(r)).count(),
        terms: n,
        retyped: st.terms.iter().filter(|&&t| !st.syntactically_typed(t)).count(),
    }
}
