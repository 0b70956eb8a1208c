//! Benchmarks for `jacobi-core` live in `benches/`.
