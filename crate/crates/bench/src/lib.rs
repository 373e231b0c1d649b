//! Criterion benchmarks for the solver and the learning agent live in `benches/`.
