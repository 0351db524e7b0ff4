//! Criterion benchmarks for `bfx-core`; see `benches/`.
