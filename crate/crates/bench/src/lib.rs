//! Benchmark-only crate; the benchmarks live under `benches/`.
//!
//! Run them with `cargo bench -p tube-bench`.
