//! Criterion benchmarks for invsep live in `benches/`.
