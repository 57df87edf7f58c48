use std::collections::BTreeMap;
use std::hint::black_box;

use closurekb::battery::{brute_force_optimum, toy_instance};
use closurekb::fjsp::{brute_force_optimum as fjsp_optimum, random_instance, random_windows};
use closurekb::par::Exec;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;

fn battery(c: &mut Criterion) {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    // 4 machines x 4 slots = 2^16 schedules
    let inst = toy_instance(&mut rng, 4, 4);
    let buffers = BTreeMap::new();
    let mut g = c.benchmark_group("battery_brute_force_16bit");
    for exec in [Exec::Sequential, Exec::Parallel] {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| brute_force_optimum(black_box(&inst.data), inst.event.as_ref(), &buffers, exec).unwrap())
        });
    }
    g.finish();
}

fn fjsp(c: &mut Criterion) {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let inst = random_instance(&mut rng, 3, 3, 2..=2, 3, 9);
    let w = random_windows(&mut rng, &inst, 1, 20);
    let inst = inst.with_windows(w).unwrap();
    let mut g = c.benchmark_group("fjsp_oracle_6ops");
    for exec in [Exec::Sequential, Exec::Parallel] {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| fjsp_optimum(black_box(&inst), exec).unwrap())
        });
    }
    g.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = battery, fjsp
}
criterion_main!(benches);
