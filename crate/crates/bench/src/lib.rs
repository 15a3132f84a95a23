//! Criterion benchmarks for the construction pipeline live under `benches/`.
