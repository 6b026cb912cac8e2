use super::*;
use crate::bundled;
use crate::model::{build_model, BuildOptions};

fn model(sig: &str, depth: usize) -> TermModel {
    build_model(&bundled::load(sig), &BuildOptions::depth(depth)).unwrap()
}

#[test]
fn first_projection_breaks_mix() {
    let v = verify_algebra(&bundled::algebra("trees_first"));
    assert!(!v.is_empty());
    assert!(v.iter().all(|x| x.constructor == "mix"));
    // Only the swap with distinct entries breaks it.
    assert!(v.iter().all(|x| x.filling[1] == "{a0 => a1, a1 => a0}"));
    assert!(v.iter().all(|x| x.filling[0] == "{a0 => 0, a1 => 1}" || x.filling[0] == "{a0 => 1, a1 => 0}"));
}

#[test]
fn nat_fold_and_bad_map() {
    let m = model(bundled::NAT, 4);
    let a = bundled::algebra("nat_mod3");
    let h = fold(&m, &a).unwrap();
    assert_eq!(h.maps[0], vec![0, 1, 2, 0, 1]);
    let src = FiniteAlgebra::from_model(&m);
    assert!(check_homomorphism(&src, &a, &h).is_empty());
    let zero = Homomorphism { maps: vec![vec![0; 5]] };
    let v = check_homomorphism(&src, &a, &zero);
    assert!(!v.is_empty() && v.iter().all(|x| x.constructor == "suc"));
    let id = Homomorphism::identity(&a);
    assert!(check_homomorphism(&a, &a, &id).is_empty());
}

#[test]
fn interval_folds_to_merged_point() {
    let m = model(bundled::INTERVAL, 1);
    for name in ["interval_unit", "interval_two"] {
        let a = bundled::algebra(name);
        let h = fold(&m, &a).unwrap();
        assert_eq!(h.maps[0], vec![a.apply(0, &[]).unwrap()]);
        assert_eq!(uniqueness_check(&m, &a, 10_000).unwrap().count, 1);
    }
    assert!(matches!(fold(&m, &bundled::algebra("interval_apart")), Err(FoldError::Invalid(_))));
}

#[test]
fn unique_homs_from_models() {
    let cases = [(bundled::NAT, 4, "nat_mod3"), (bundled::TREES2, 2, "trees_max"), (bundled::TREES2, 3, "trees_isnode")];
    for (sig, d, alg) in cases {
        let r = uniqueness_check(&model(sig, d), &bundled::algebra(alg), 100_000).unwrap();
        assert_eq!(r.count, 1, "{alg}");
    }
}

#[test]
fn parity_section() {
    for d in 0..6 {
        let m = model(bundled::NAT, d);
        let base = FiniteAlgebra::from_model(&m);
        let f = FibredAlgebra::build(
            &base,
            &|_, _, _, _| vec!["0".into(), "1".into()],
            &|p, args, elems| match (p, args) {
                (0, _) => 0,
                (_, [Value::Elem { id, .. }]) => 1 - elems[0][*id as usize].q,
                _ => unreachable!(),
            },
        )
        .unwrap();
        let (total, proj) = total_algebra(&f).unwrap();
        assert_eq!(total.size(0), 2 * (d + 1));
        assert!(check_homomorphism(&total, &base, &proj).is_empty());
        let s = find_section(&m, &f).unwrap();
        let parity: Vec<usize> = (0..=d).map(|k| s.q(&f, 0, k)).collect();
        assert_eq!(parity, (0..=d).map(|k| k % 2).collect::<Vec<_>>());
        assert!(s.check_rules(&f).is_empty());
        assert!(s.projection_is_identity(&f));
    }
}

#[test]
fn unit_motive_total_is_isomorphic() {
    let m = model(bundled::CON_TY, 5);
    let base = FiniteAlgebra::from_model(&m);
    let f = FibredAlgebra::constant_unit(&base).unwrap();
    let (total, proj) = total_algebra(&f).unwrap();
    for s in 0..2 {
        assert_eq!(total.size(s), base.size(s));
        let mut img = proj.maps[s].clone();
        img.sort();
        assert_eq!(img, (0..base.size(s)).collect::<Vec<_>>());
    }
    let sec = find_section(&m, &f).unwrap();
    assert!(sec.projection_is_identity(&f));
}

#[test]
fn mod2_times_mod3() {
    let p = product(&bundled::algebra("nat_mod2"), &bundled::algebra("nat_mod3"));
    assert_eq!(p.algebra.size(0), 6);
    assert!(verify_algebra(&p.algebra).is_empty());
    // suc is componentwise successor
    for (args, &r) in p.algebra.ops(1) {
        let Value::Elem { id, .. } = args[0] else { unreachable!() };
        let (x, y) = (p.left.maps[0][id as usize], p.right.maps[0][id as usize]);
        assert_eq!((p.left.maps[0][r], p.right.maps[0][r]), ((x + 1) % 2, (y + 1) % 3));
    }
    let r = uniqueness_check(&model(bundled::NAT, 6), &p.algebra, 100_000).unwrap();
    assert_eq!(r.count, 1);
}

#[test]
fn equaliser_of_homs_from_two_cycles() {
    // zero sits on the cycle 0 -> 1 -> 0; the cycle 2 -> 3 -> 2 is junk
    // that a homomorphism may send either way round.
    let z2 = bundled::algebra("nat_mod2");
    let carriers = vec![(0..4).map(|k| Element { label: k.to_string(), index: vec![] }).collect()];
    let src = FiniteAlgebra::tabulate(z2.schema_arc().clone(), carriers, |p, args| match (p, args) {
        (0, _) => Some(0),
        (_, [Value::Elem { id, .. }]) => Some(*id as usize ^ 1),
        _ => None,
    });
    assert!(verify_algebra(&src).is_empty());
    let homs = enumerate_homs(&src, &z2, 10_000).unwrap();
    assert_eq!(homs.iter().map(|h| h.maps[0].clone()).collect::<Vec<_>>(), vec![vec![0, 1, 0, 1], vec![0, 1, 1, 0]]);
    let e = equaliser(&src, &z2, &homs[0], &homs[1]);
    assert!(e.closure_violations.is_empty());
    assert_eq!(e.inclusion.maps[0], vec![0, 1]);
    assert!(verify_algebra(&e.algebra).is_empty());
    assert!(check_homomorphism(&e.algebra, &src, &e.inclusion).is_empty());
    let same = equaliser(&src, &z2, &homs[0], &homs[0]);
    assert_eq!(same.inclusion.maps[0], vec![0, 1, 2, 3]);
    // Into Z2 x Z2 the map is forced by zero.
    let sq = product(&z2, &z2).algebra;
    let z4 = bundled::algebra("nat_mod4");
    assert_eq!(enumerate_homs(&z4, &sq, 10_000).unwrap().len(), 1);
}

#[test]
fn family_limits_small() {
    let two = Family { name: "two".into(), base: vec!["x".into(), "y".into()], fibres: vec![vec!["p".into()], vec!["q".into(), "r".into()]] };
    let three = Family {
        name: "three".into(),
        base: vec!["u".into(), "v".into(), "w".into()],
        fibres: vec![vec!["1".into()], vec!["2".into(), "3".into()], vec![]],
    };
    let one = Diagram { objects: vec![two.clone()], arrows: vec![] };
    let l = family_limit(&one);
    assert_eq!(l.base, vec![vec![0], vec![1]]);
    assert_eq!(l.total_size(), 3);
    let prod = Diagram { objects: vec![two, three], arrows: vec![] };
    let l = family_limit(&prod);
    assert_eq!(l.base.len(), 6);
    for (bt, fib) in l.base.iter().zip(&l.fibres) {
        assert_eq!(fib.len(), prod.objects[0].fibres[bt[0]].len() * prod.objects[1].fibres[bt[1]].len());
    }
}

#[test]
fn terminal_algebras() {
    for (name, text) in bundled::ACCEPTED {
        let t = terminal(model(text, 0).schema().clone().into());
        assert!(verify_algebra(&t).is_empty(), "{name}");
    }
    // a x 1 is a again, through the left projection.
    let a = bundled::algebra("nat_mod3");
    let p = product(&a, &terminal(a.schema_arc().clone()));
    assert_eq!(p.algebra.size(0), 3);
    assert_eq!(p.left.maps[0], vec![0, 1, 2]);
    assert!(check_homomorphism(&p.algebra, &a, &p.left).is_empty());
    // Con/Ty: one context, one type over it.
    let t = terminal(model(bundled::CON_TY, 0).schema().clone().into());
    assert_eq!((t.size(0), t.size(1)), (1, 1));
}
