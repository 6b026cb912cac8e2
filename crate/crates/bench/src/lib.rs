//! Criterion benchmarks for the term model and homomorphism search; see
//! `benches/model.rs`.
