use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qiit::algebra::{enumerate_homs, fold, FiniteAlgebra};
use qiit::bundled;
use qiit::model::{build_model, BuildOptions};

fn term_models(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_model");
    for (name, text, depth) in [("nat", bundled::NAT, 6), ("trees2", bundled::TREES2, 4), ("con_ty", bundled::CON_TY, 6)] {
        let sig = bundled::load(text);
        group.bench_with_input(BenchmarkId::new(name, depth), &depth, |b, &d| {
            b.iter(|| build_model(black_box(&sig), &BuildOptions::depth(d)).unwrap())
        });
    }
    group.finish();
}

fn folds(c: &mut Criterion) {
    let m = build_model(&bundled::trees2(), &BuildOptions::depth(4)).unwrap();
    let a = bundled::algebra("trees_max");
    c.bench_function("fold trees2/4 -> trees_max", |b| b.iter(|| fold(black_box(&m), &a).unwrap()));
    let src = FiniteAlgebra::from_model(&m);
    c.bench_function("enumerate_homs trees2/4 -> trees_max", |b| {
        b.iter(|| enumerate_homs(black_box(&src), &a, 1_000_000).unwrap())
    });
}

criterion_group!(benches, term_models, folds);
criterion_main!(benches);
