//! Criterion benchmarks for the polygrid pipeline live in `benches/`.
//! Run them with `cargo bench -p polygrid-bench`.
