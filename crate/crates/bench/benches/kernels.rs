use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use divlab_core::jet::{kernel_jet, log_series, real_part_jet, KernelId, KernelParts};
use divlab_core::{Axis, Jet};

const SOURCE: [f64; 2] = [2.1, -0.4];
const TARGET: [f64; 2] = [0.3, 0.2];

fn jet_arithmetic(c: &mut Criterion) {
    let mut group = c.benchmark_group("jet_mul");
    for order in [4, 8, 12] {
        let x = Jet::coordinate(TARGET, order, Axis::X).add_scalar(1.5);
        let y = Jet::coordinate(TARGET, order, Axis::Y).add_scalar(-0.5);
        group.bench_with_input(BenchmarkId::from_parameter(order), &order, |b, _| {
            b.iter(|| black_box(&x).try_mul(black_box(&y)).unwrap())
        });
    }
    group.finish();
}

fn kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel_jet");
    for order in [4, 8, 12] {
        group.bench_with_input(BenchmarkId::new("log_series", order), &order, |b, &n| {
            b.iter(|| {
                let s = log_series(black_box(SOURCE), black_box(TARGET), n).unwrap();
                real_part_jet(TARGET, &s)
            })
        });
        group.bench_with_input(BenchmarkId::new("log_charge", order), &order, |b, &n| {
            b.iter(|| kernel_jet(KernelId::LogCharge, black_box(SOURCE), black_box(TARGET), n).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("stokeslet_all", order), &order, |b, &n| {
            b.iter(|| {
                let parts = KernelParts::new(black_box(SOURCE), black_box(TARGET), n).unwrap();
                let mut out = Vec::with_capacity(6);
                for i in Axis::BOTH {
                    for j in Axis::BOTH {
                        out.push(parts.stokeslet_velocity(i, j));
                    }
                    out.push(parts.stokeslet_pressure(i));
                }
                out
            })
        });
    }
    group.finish();
}

criterion_group!(benches, jet_arithmetic, kernels);
criterion_main!(benches);
