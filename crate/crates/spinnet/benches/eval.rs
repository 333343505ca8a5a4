//! Sequential vs. rayon-parallel evaluation benchmarks. Placeholder until
//! the engines land; filled in alongside them.

use criterion::{criterion_group, criterion_main, Criterion};

fn bench_placeholder(_c: &mut Criterion) {}

criterion_group!(benches, bench_placeholder);
criterion_main!(benches);
