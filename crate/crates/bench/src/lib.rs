//! Criterion benchmarks for levy-entropy; see `benches/kernels.rs`.
