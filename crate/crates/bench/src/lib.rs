//! Benchmarks for `qprobe-core` live under `benches/`.
