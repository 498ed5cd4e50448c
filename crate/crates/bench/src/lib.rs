//! Benchmark-only crate; see `benches/energy.rs`.
