use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use chargext::approx::{lep_pair_check, OBoundTable};
use chargext::extend::{bounded_extension, sc, transport};
use chargext::lpcore::min_norm_common_extension;
use chargext::rational::int;
use chargext::Limits;
use chargext_bench::*;

fn chain_vs_lp(c: &mut Criterion) {
    let limits = Limits::default();
    let mut group = c.benchmark_group("least_extension");
    for atoms in [4, 6, 8] {
        let pairs = consistent_pairs(atoms, 20);
        group.bench_with_input(BenchmarkId::new("chain", atoms), &pairs, |b, pairs| {
            b.iter(|| {
                for (x, y) in pairs {
                    black_box(sc(x, y, &limits).unwrap());
                }
            })
        });
        group.bench_with_input(BenchmarkId::new("simplex", atoms), &pairs, |b, pairs| {
            b.iter(|| {
                for (x, y) in pairs {
                    black_box(min_norm_common_extension(x, y, None).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn transport_plans(c: &mut Criterion) {
    let mut group = c.benchmark_group("transport");
    for dim in [3, 6, 12] {
        let instances = transport_instances(dim, 50);
        group.bench_with_input(BenchmarkId::from_parameter(dim), &instances, |b, xs| {
            b.iter(|| {
                for x in xs {
                    black_box(transport(x).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn bounded(c: &mut Criterion) {
    let limits = Limits::default();
    let triples = bounded_triples(50);
    c.bench_function("bounded_extension", |b| {
        b.iter(|| {
            for t in &triples {
                black_box(bounded_extension(&t.nu, &t.target, &t.base, &t.delta, &limits).unwrap());
            }
        })
    });
}

fn pair_check(c: &mut Criterion) {
    let limits = Limits::default();
    let mut group = c.benchmark_group("lep_pair_check");
    group.sample_size(10);
    for d in [3, 4] {
        let (b1, b2) = cylinder_pair(d);
        group.bench_function(BenchmarkId::from_parameter(d), |b| {
            b.iter(|| black_box(lep_pair_check(&b1, &b2, &int(2), &limits).unwrap()))
        });
    }
    group.finish();
}

fn exact_parameter(c: &mut Criterion) {
    let limits = Limits::default();
    let mut group = c.benchmark_group("exact_o");
    group.sample_size(10);
    for atoms in [2, 3] {
        let (top, seq) = discrete_sequence(atoms, 10);
        group.bench_function(BenchmarkId::from_parameter(atoms), |b| {
            b.iter(|| black_box(OBoundTable::fill_exact(&top, &[10], &seq, &int(2), &limits).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, chain_vs_lp, transport_plans, bounded, pair_check, exact_parameter);
criterion_main!(benches);
