//! Criterion benchmarks for the rmf-core kernels live in `benches/`.
