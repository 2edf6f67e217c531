//! Criterion benchmarks for the breptok kernel; see `benches/kernel.rs`.
