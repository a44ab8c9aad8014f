//! Criterion benchmarks live under `benches/`; this library target is intentionally empty.
