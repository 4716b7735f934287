//! Criterion benchmarks for keyrot-core; see `benches/`.
