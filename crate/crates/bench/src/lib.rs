//! Criterion benchmarks for the threshold pipeline; see `benches/`.
