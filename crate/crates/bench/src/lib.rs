//! Criterion benchmarks for the verification pipeline live in `benches/`.
