//! Benchmarks for the nearfield analysis chain; see `benches/`.
