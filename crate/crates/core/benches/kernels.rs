use std::hint::black_box;

use blogtensor::decomp::{greedy_parafac, ncw_normalize, nmf_multiplicative, NmfConfig, ParafacConfig};
use blogtensor::tensorops::{contract_seq_with, Matrix, Mode, SparseTensor3, Vector};
use blogtensor::Exec;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn random_tensor(dims: [usize; 3], density: f64, seed: u64) -> SparseTensor3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = dims[0] * dims[1] * dims[2];
    let nnz = (total as f64 * density) as usize;
    let mut coords = std::collections::BTreeSet::new();
    while coords.len() < nnz {
        coords.insert((
            rng.random_range(0..dims[0]),
            rng.random_range(0..dims[1]),
            rng.random_range(0..dims[2]),
        ));
    }
    let entries = coords
        .into_iter()
        .map(|(i, j, k)| (i, j, k, rng.random_range(0.1..10.0)));
    SparseTensor3::from_entries(dims, entries).unwrap()
}

fn bench_contract_seq(c: &mut Criterion) {
    let x = random_tensor([150, 150, 600], 0.01, 1);
    let u = Vector::from_elem(150, 1.0);
    let v = Vector::from_elem(600, 1.0);
    let mut group = c.benchmark_group("contract_seq 150x150x600");
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| contract_seq_with(exec, black_box(&x), Mode::Two, &u, Mode::Three, &v).unwrap())
        });
    }
    group.finish();
}

fn bench_parafac(c: &mut Criterion) {
    let x = random_tensor([100, 100, 300], 0.01, 2);
    let mut group = c.benchmark_group("greedy_parafac R=2 100x100x300");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        let mut cfg = ParafacConfig::new(2);
        cfg.exec = exec;
        cfg.max_iters = 50;
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| greedy_parafac(black_box(&x), cfg).unwrap())
        });
    }
    group.finish();
}

fn bench_nmf(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let raw = Matrix::from_shape_fn((140, 600), |(i, j)| {
        let base = if rng.random_bool(0.9) {
            0.0
        } else {
            rng.random_range(1.0..30.0)
        };
        base + if i == j % 140 { 1.0 } else { 0.0 }
    });
    let cstar = ncw_normalize(&raw).unwrap();
    let mut group = c.benchmark_group("nmf 10 trials R=4 140x600");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        let mut cfg = NmfConfig::new(4);
        cfg.exec = exec;
        cfg.max_iters = 50;
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| nmf_multiplicative(black_box(&cstar), cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_contract_seq, bench_parafac, bench_nmf);
criterion_main!(benches);
