//! Criterion benchmarks for hqc-core. Run with `cargo bench -p hqc-bench`.
