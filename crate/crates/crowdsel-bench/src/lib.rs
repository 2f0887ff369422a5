//! Benchmark-only crate; see `benches/hot_paths.rs`. The library target
//! exists so the bench target has a crate to live in.
