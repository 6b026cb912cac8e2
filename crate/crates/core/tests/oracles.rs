//! Class counts of the term model against brute-force oracles that share
//! no code with the model engine: raw terms are enumerated directly and
//! the equivalence is closed by naive iteration.

mod common;

use std::collections::BTreeSet;

use common::*;

use qiit::bundled;
use qiit::model::{build_model, BuildOptions};

fn model_classes(text: &str, depth: usize) -> usize {
    build_model(&bundled::load(text), &BuildOptions::depth(depth)).unwrap().class_count(0)
}

#[test]
fn nat_matches_oracle() {
    for d in 0..=6 {
        let terms = enumerate(&[0, 1], d);
        assert_eq!(model_classes(bundled::NAT, d), naive_classes(&terms, &[]), "depth {d}");
        assert_eq!(terms.len(), d + 1);
    }
}

#[test]
fn interval_matches_oracle() {
    let l = Raw { c: 0, kids: vec![] };
    let r = Raw { c: 1, kids: vec![] };
    for d in 0..=3 {
        let terms = enumerate(&[0, 0], d);
        assert_eq!(model_classes(bundled::INTERVAL, d), naive_classes(&terms, &[(l.clone(), r.clone())]));
    }
}

#[test]
fn comm_matches_oracle() {
    for d in 0..=3 {
        let terms = enumerate(&[0, 2], d);
        let pairs: Vec<(Raw, Raw)> = terms
            .iter()
            .filter(|t| t.c == 1)
            .map(|t| (t.clone(), Raw { c: 1, kids: vec![t.kids[1].clone(), t.kids[0].clone()] }))
            .collect();
        assert_eq!(model_classes(bundled::COMM, d), naive_classes(&terms, &pairs), "depth {d}");
    }
}

#[test]
fn trees_match_naive_closure() {
    for d in 0..=3 {
        let terms = enumerate(&[0, 2], d);
        // node f = node (f . s) for both bijections of a two-element set
        let pairs: Vec<(Raw, Raw)> = terms
            .iter()
            .filter(|t| t.c == 1)
            .flat_map(|t| {
                let swapped = Raw { c: 1, kids: vec![t.kids[1].clone(), t.kids[0].clone()] };
                [(t.clone(), t.clone()), (t.clone(), swapped)]
            })
            .collect();
        assert_eq!(model_classes(bundled::TREES2, d), naive_classes(&terms, &pairs), "depth {d}");
    }
}

#[test]
fn trees_match_canonical_forms() {
    let expected = [1, 2, 4, 11];
    for (d, &n) in expected.iter().enumerate() {
        let forms: BTreeSet<Raw> = enumerate(&[0, 2], d).iter().map(canon).collect();
        assert_eq!(forms.len(), n, "oracle at depth {d}");
        assert_eq!(model_classes(bundled::TREES2, d), n, "model at depth {d}");
    }
}

#[test]
fn con_ty_matches_naive_closure() {
    for d in 0..=7 {
        let o = con_ty_oracle(d);
        let m = build_model(&bundled::con_ty(), &BuildOptions::depth(d)).unwrap();
        let got = CtOracle { con: m.class_count(0), ty: m.class_count(1), terms: m.term_count(), retyped: m.retyped().len() };
        assert_eq!(got, o, "depth {d}");
    }
}
