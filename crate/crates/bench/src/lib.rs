//! Criterion benchmarks for the weightlab library live under `benches/`.
