//! Parallel vs sequential paths for the three data-parallel kernels: the
//! concatenate-and-fuse recursion, the direct sieve, and the census scan.
//!
//! Run with `cargo bench -p gapcycles`. With `--no-default-features` the
//! parallel entry points fall back to the sequential code, so the pairs
//! collapse to the same numbers.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use gapcycles::census::{census_all, census_all_seq, census_gap, census_gap_seq};
use gapcycles::cycle::{
    build_to, direct_sieve, direct_sieve_seq, recurse, recurse_seq, MemoryBudget,
};

const B: &MemoryBudget = &MemoryBudget::UNLIMITED;

fn bench_recursion(c: &mut Criterion) {
    let g17 = build_to(17, B).unwrap();
    let mut group = c.benchmark_group("recurse_17_to_19");
    group.sample_size(20);
    group.bench_function(BenchmarkId::new("parallel", "G(19#)"), |b| {
        b.iter(|| black_box(recurse(&g17, 19, B).unwrap()))
    });
    group.bench_function(BenchmarkId::new("sequential", "G(19#)"), |b| {
        b.iter(|| black_box(recurse_seq(&g17, 19, B).unwrap()))
    });
    group.finish();
}

fn bench_sieve(c: &mut Criterion) {
    let mut group = c.benchmark_group("direct_sieve_19");
    group.sample_size(20);
    group.bench_function(BenchmarkId::new("parallel", "G(19#)"), |b| {
        b.iter(|| black_box(direct_sieve(19, B).unwrap()))
    });
    group.bench_function(BenchmarkId::new("sequential", "G(19#)"), |b| {
        b.iter(|| black_box(direct_sieve_seq(19, B).unwrap()))
    });
    group.finish();
}

fn bench_census(c: &mut Criterion) {
    let g19 = build_to(19, B).unwrap();
    let mut group = c.benchmark_group("census_19");
    group.sample_size(20);
    group.bench_function(BenchmarkId::new("all_to_24/parallel", "G(19#)"), |b| {
        b.iter(|| black_box(census_all(&g19, 24).unwrap()))
    });
    group.bench_function(BenchmarkId::new("all_to_24/sequential", "G(19#)"), |b| {
        b.iter(|| black_box(census_all_seq(&g19, 24).unwrap()))
    });
    group.bench_function(BenchmarkId::new("gap_22/parallel", "G(19#)"), |b| {
        b.iter(|| black_box(census_gap(&g19, 22, None).unwrap()))
    });
    group.bench_function(BenchmarkId::new("gap_22/sequential", "G(19#)"), |b| {
        b.iter(|| black_box(census_gap_seq(&g19, 22, None).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, bench_recursion, bench_sieve, bench_census);
criterion_main!(benches);
