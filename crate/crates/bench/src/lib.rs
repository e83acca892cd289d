//! Criterion benchmarks for `ammblend-core`; see `benches/`.
