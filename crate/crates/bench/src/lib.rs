//! Benchmark-only crate; see `benches/phases.rs`.
